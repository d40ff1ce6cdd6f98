"""Handcrafted system policy: deterministic and total.

Per active domain, in schema order: no match for the constraints means
nooffer; pending requests get answered from the first matching entity
(with an offer); booking details plus a known entity trigger the booking
confirmation; an underspecified constraint set gets the highest-priority
unfilled informable slot requested.  When no domain yields anything the
policy asks whether it can help further, so the action is never empty.
"""

from __future__ import annotations

from typing import List

from ..acts import ActSet, DialogAct, canonicalize
from ..ontology import EntityDatabase, SchemaSet
from ..state import BeliefState
from .features import answer_acts, nooffer_acts, pending_requests


def decide_rule(state: BeliefState, db: EntityDatabase, schemas: SchemaSet) -> ActSet:
    if state.terminated:
        return (DialogAct("bye"),)

    out: List[DialogAct] = []
    for name in schemas.names:
        schema = schemas[name]
        dstate = state.domains[name]
        if dstate.is_empty() and not any(a.domain == name for a in state.last_user_acts):
            continue

        matches = db.query(name, dstate.constraints)
        if dstate.constraints and not matches:
            out.extend(nooffer_acts(state, name, db))
            continue

        if pending_requests(dstate, matches):
            out.extend(answer_acts(state, name, db, schemas))
            continue

        if dstate.booking and not dstate.booked and (dstate.offered is not None or matches):
            out.append(DialogAct("book", name))
            continue

        if len(matches) > 1:
            unfilled = [
                s for s in schema.informable if s not in dstate.constraints and s not in dstate.dontcare
            ]
            if unfilled:
                out.append(DialogAct("request", name, unfilled[0]))
                continue

    if not out:
        return (DialogAct("reqmore"),)
    return canonicalize(out)
