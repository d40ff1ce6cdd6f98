"""State featurization and the composite system-action inventory.

The feature vector is binary and schema-determined: per domain a bit per
informable slot (constraint filled), a bit per requestable slot (request
pending), a 4-way bucket of the current DB match count, and four status
bits; globally a one-hot over the last user act types plus a bias.  The
action inventory is the small fixed set of composite system acts the RL
policies choose from; ``materialize`` turns a chosen action into concrete
dialog acts against the current state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..acts import ACT_TYPES, ActSet, DialogAct
from ..ontology import EntityDatabase, SchemaSet
from ..state import BeliefState, DomainState

COUNT_BUCKETS = 4  # 0, 1, 2-4, >=5
DOMAIN_STATUS_BITS = 4  # booking-present, booked, offered, any-pending


@dataclass(frozen=True)
class FeatureVector:
    dim: int
    active: Tuple[int, ...]

    def as_array(self) -> np.ndarray:
        out = np.zeros(self.dim, dtype=np.float64)
        out[list(self.active)] = 1.0
        return out

    def index_array(self) -> np.ndarray:
        return np.asarray(self.active, dtype=np.intp)


@dataclass(frozen=True)
class ActionTemplate:
    kind: str  # request | answer | nooffer | book | reqmore | bye | greet
    domain: str = ""
    slot: str = ""

    def label(self) -> str:
        return "/".join(p for p in (self.kind, self.domain, self.slot) if p)


def build_action_inventory(schemas: SchemaSet) -> Tuple[ActionTemplate, ...]:
    out: List[ActionTemplate] = []
    for name in schemas.names:
        schema = schemas[name]
        for slot in schema.informable:
            out.append(ActionTemplate("request", name, slot))
        out.append(ActionTemplate("answer", name))
        out.append(ActionTemplate("nooffer", name))
        if schema.bookable:
            out.append(ActionTemplate("book", name))
    out.append(ActionTemplate("reqmore"))
    out.append(ActionTemplate("bye"))
    out.append(ActionTemplate("greet"))
    return tuple(out)


def feature_dim(schemas: SchemaSet) -> int:
    total = 0
    for name in schemas.names:
        schema = schemas[name]
        total += len(schema.informable) + len(schema.requestable)
        total += COUNT_BUCKETS + DOMAIN_STATUS_BITS
    return total + len(ACT_TYPES) + 1  # act-type one-hots + bias


def _domain_active(dstate: DomainState, domain: str, last_acts: ActSet) -> bool:
    return not dstate.is_empty() or any(a.domain == domain for a in last_acts)


def _matches(db: EntityDatabase, domain: str, dstate: DomainState):
    return db.query(domain, dstate.constraints)


def pending_requests(dstate: DomainState, matches) -> Tuple[str, ...]:
    """Requested slots not yet answered consistently with the top match."""
    if matches:
        top = matches[0].attributes
        return tuple(
            s for s in sorted(dstate.requested) if s in top and dstate.fulfilled.get(s) != top[s]
        )
    return tuple(s for s in sorted(dstate.requested) if s not in dstate.fulfilled)


def _bucket(count: int) -> int:
    if count == 0:
        return 0
    if count == 1:
        return 1
    if count <= 4:
        return 2
    return 3


def featurize(state: BeliefState, db: EntityDatabase, schemas: SchemaSet) -> FeatureVector:
    active: List[int] = []
    offset = 0
    for name in schemas.names:
        schema = schemas[name]
        dstate = state.domains[name]
        is_active = _domain_active(dstate, name, state.last_user_acts)
        matches = _matches(db, name, dstate) if is_active else ()
        pending = pending_requests(dstate, matches) if is_active else ()

        for i, slot in enumerate(schema.informable):
            if slot in dstate.constraints:
                active.append(offset + i)
        offset += len(schema.informable)

        for i, slot in enumerate(schema.requestable):
            if slot in pending:
                active.append(offset + i)
        offset += len(schema.requestable)

        if is_active:
            active.append(offset + _bucket(len(matches)))
        offset += COUNT_BUCKETS

        if dstate.booking:
            active.append(offset)
        if dstate.booked:
            active.append(offset + 1)
        if dstate.offered is not None:
            active.append(offset + 2)
        if pending:
            active.append(offset + 3)
        offset += DOMAIN_STATUS_BITS

    for i, act_type in enumerate(ACT_TYPES):
        if any(a.act_type == act_type for a in state.last_user_acts):
            active.append(offset + i)
    offset += len(ACT_TYPES)

    active.append(offset)  # bias
    offset += 1
    return FeatureVector(dim=offset, active=tuple(active))


def answer_acts(state: BeliefState, domain: str, db: EntityDatabase, schemas: SchemaSet) -> ActSet:
    """Answer pending requests from the top matching entity, echo the
    constraints it was selected by, and offer it by name when possible."""
    dstate = state.domains[domain]
    matches = _matches(db, domain, dstate)
    if not matches:
        return nooffer_acts(state, domain, db)
    top = matches[0].attributes
    out: List[DialogAct] = []
    pending = pending_requests(dstate, matches)
    for slot in pending:
        out.append(DialogAct("inform", domain, slot, top[slot]))
    if pending:
        for slot in sorted(dstate.constraints):
            if slot in top and slot not in pending:
                out.append(DialogAct("inform", domain, slot, top[slot]))
    if "name" in top:
        out.append(DialogAct("offer", domain, "name", top["name"]))
    if not out:
        slot = next(iter(schemas[domain].requestable), None)
        if slot and slot in top:
            out.append(DialogAct("inform", domain, slot, top[slot]))
        else:
            out.append(DialogAct("reqmore"))
    return tuple(out)


def nooffer_acts(state: BeliefState, domain: str, db: EntityDatabase) -> ActSet:
    """Name one violated constraint: a constraint whose removal restores
    at least one match, or the first one when none does."""
    constraints = state.domains[domain].constraints
    if not constraints:
        return (DialogAct("nooffer", domain),)
    for slot in sorted(constraints):
        rest = {s: v for s, v in constraints.items() if s != slot}
        if db.query(domain, rest):
            return (DialogAct("nooffer", domain, slot, constraints[slot]),)
    slot = sorted(constraints)[0]
    return (DialogAct("nooffer", domain, slot, constraints[slot]),)


def materialize(
    action: ActionTemplate, state: BeliefState, db: EntityDatabase, schemas: SchemaSet
) -> ActSet:
    if action.kind == "request":
        return (DialogAct("request", action.domain, action.slot),)
    if action.kind == "answer":
        return answer_acts(state, action.domain, db, schemas)
    if action.kind == "nooffer":
        return nooffer_acts(state, action.domain, db)
    if action.kind == "book":
        return (DialogAct("book", action.domain),)
    return (DialogAct(action.kind),)
