"""Rule-based dialog state tracking: a pure fold of user acts into state.

``update`` is the act-level tracker; ``word_dst_update`` is the word-level
reference implementation (parse, then update) behind the same contract.
System-side bookkeeping (which requests were answered, offers, booking
confirmations) is folded in separately via ``absorb_system_acts`` so the
tracker itself stays a pure function of user acts.
"""

from __future__ import annotations

from dataclasses import replace

from .acts import ActSet, GENERAL, NONE, canonicalize
from .errors import UnknownSlot
from .nlu import PatternLexicon, parse
from .ontology import BOOKING_SLOTS, DONTCARE, SchemaSet
from .state import BeliefState, DomainState


def init_state(schemas: SchemaSet) -> BeliefState:
    return BeliefState(domains={name: DomainState() for name in schemas.names})


def update(state: BeliefState, user_acts: ActSet, schemas: SchemaSet) -> BeliefState:
    """Fold one user turn into the belief state.

    inform sets a constraint (last write wins; "dontcare" clears instead),
    request marks a slot as wanted, book records booking details, bye
    terminates.  turn_count goes up by exactly 1 per call.
    """
    user_acts = canonicalize(user_acts)
    domains = dict(state.domains)
    terminated = state.terminated
    for act in user_acts:
        if act.act_type == "bye":
            terminated = True
            continue
        if act.act_type in ("greet", "thank", "reqmore"):
            continue
        if act.domain == GENERAL:
            continue
        if act.domain not in schemas:
            raise UnknownSlot(f"act references unknown domain {act.domain!r}")
        schema = schemas[act.domain]
        dstate = domains[act.domain]
        if act.act_type == "inform":
            if act.slot in schema.informable:
                constraints = dict(dstate.constraints)
                dontcare = set(dstate.dontcare)
                if act.value == DONTCARE:
                    constraints.pop(act.slot, None)
                    dontcare.add(act.slot)
                else:
                    constraints[act.slot] = act.value
                    dontcare.discard(act.slot)
                dstate = replace(dstate, constraints=constraints, dontcare=frozenset(dontcare))
            elif act.slot in schema.requestable or act.slot in BOOKING_SLOTS:
                pass  # no constraint semantics for open or booking slots
            else:
                raise UnknownSlot(f"slot {act.slot!r} absent from domain {act.domain!r} schema")
        elif act.act_type == "request":
            if act.slot not in schema.slots:
                raise UnknownSlot(f"slot {act.slot!r} absent from domain {act.domain!r} schema")
            dstate = replace(dstate, requested=dstate.requested | {act.slot})
        elif act.act_type == "book":
            if act.slot == NONE:
                continue
            if act.slot not in BOOKING_SLOTS:
                raise UnknownSlot(f"unknown booking slot {act.slot!r}")
            booking = dict(dstate.booking)
            booking[act.slot] = act.value
            dstate = replace(dstate, booking=booking)
        # offer/select/recommend/nooffer coming from the user carry no
        # state semantics for the system side.
        domains[act.domain] = dstate
    return BeliefState(
        domains=domains,
        terminated=terminated,
        turn_count=state.turn_count + 1,
        last_user_acts=user_acts,
    )


def word_dst_update(
    state: BeliefState,
    user_utterance: str,
    system_acts: ActSet,
    lexicon: PatternLexicon,
    schemas: SchemaSet,
) -> BeliefState:
    """Word-level tracking reference: understand, then track."""
    return update(state, parse(lexicon, user_utterance, context=system_acts), schemas)


def absorb_system_acts(state: BeliefState, system_acts: ActSet) -> BeliefState:
    """Record what the system just did: answered slots, offers, bookings."""
    domains = dict(state.domains)
    for act in canonicalize(system_acts):
        if act.domain not in domains:
            continue
        dstate = domains[act.domain]
        if act.act_type == "inform" and act.value != NONE:
            fulfilled = dict(dstate.fulfilled)
            fulfilled[act.slot] = act.value
            dstate = replace(dstate, fulfilled=fulfilled)
        elif act.act_type in ("offer", "recommend") and act.slot == "name":
            dstate = replace(dstate, offered=act.value)
        elif act.act_type == "book":
            dstate = replace(dstate, booked=True)
        domains[act.domain] = dstate
    return replace(state, domains=domains)
