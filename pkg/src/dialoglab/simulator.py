"""Agenda-based user simulation and task-success adjudication.

The agenda is a stack of pending user acts initialized from a sampled
goal (bye at the bottom, booking details, then requests, then informs on
top).  Each turn reacts to the system acts with push/pop rules, then pops
up to ``max_initiative`` acts as the user turn.  The fulfillment ledger
records answers to requested slots and is what success is judged on.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Set, Tuple

from .acts import ActSet, DialogAct, NONE, canonicalize
from .errors import EmptyGoal
from .ontology import DONTCARE, EntityDatabase, SchemaSet, UserGoal

BYE = DialogAct("bye")

DEFAULT_PATIENCE = 3
DEFAULT_MAX_INITIATIVE = 2


@dataclass
class Ledger:
    """What the user has received so far: answers and booking confirmations."""

    received: Dict[str, Dict[str, Optional[str]]] = field(default_factory=dict)
    booked: Set[str] = field(default_factory=set)

    def unfilled(self, domain) -> Tuple[str, ...]:
        return tuple(s for s, v in self.received.get(domain, {}).items() if v is None)

    def reset_domain(self, domain):
        for slot in self.received.get(domain, {}):
            self.received[domain][slot] = None


@dataclass
class Agenda:
    stack: List[DialogAct]
    goal: UserGoal
    ledger: Ledger
    schemas: SchemaSet
    db: EntityDatabase
    patience: int = DEFAULT_PATIENCE
    max_initiative: int = DEFAULT_MAX_INITIATIVE
    last_system_acts: Optional[ActSet] = None
    offered: Dict[str, str] = field(default_factory=dict)
    forced_failure: bool = False
    finished: bool = False

    def push(self, act: DialogAct):
        # No duplicates: re-pushing moves the act to the top.
        self.stack = [a for a in self.stack if a != act]
        self.stack.append(act)

    def drop(self, predicate):
        self.stack = [a for a in self.stack if not predicate(a)]


def init_agenda(
    goal: UserGoal,
    seed: int,
    schemas: SchemaSet,
    db: EntityDatabase,
    patience: int = DEFAULT_PATIENCE,
    max_initiative: int = DEFAULT_MAX_INITIATIVE,
) -> Agenda:
    if not goal.sections or all(
        not s.constraints and not s.requests and not s.book for s in goal.sections.values()
    ):
        raise EmptyGoal("goal has no sections with content")
    rng = random.Random(f"agenda:{seed}")

    books: List[DialogAct] = []
    requests: List[DialogAct] = []
    informs: List[DialogAct] = []
    ledger = Ledger()
    for domain in sorted(goal.sections):
        section = goal.sections[domain]
        ledger.received[domain] = {slot: None for slot in section.requests}
        if section.book:
            for slot in sorted(section.book):
                books.append(DialogAct("book", domain, slot, section.book[slot]))
        for slot in section.requests:
            requests.append(DialogAct("request", domain, slot))
        for slot in sorted(section.constraints):
            informs.append(DialogAct("inform", domain, slot, section.constraints[slot]))
    rng.shuffle(requests)
    rng.shuffle(informs)
    # Top of stack = end of list; informs surface first when popped.
    stack = [BYE] + books + requests + informs
    return Agenda(stack, goal, ledger, schemas, db, patience=patience, max_initiative=max_initiative)


def _relaxation(agenda: Agenda, domain: str, rng: random.Random) -> Optional[DialogAct]:
    """Pick an alternative value for one constraint that restores matches."""
    section = agenda.goal.sections[domain]
    slots = sorted(section.constraints)
    rng.shuffle(slots)
    schema = agenda.schemas[domain]
    for slot in slots:
        values = [v for v in schema.informable.get(slot, ()) if v != section.constraints[slot]]
        rng.shuffle(values)
        for value in values:
            trial = dict(section.constraints)
            trial[slot] = value
            if agenda.db.query(domain, trial):
                new_section = replace(section, constraints=trial)
                sections = dict(agenda.goal.sections)
                sections[domain] = new_section
                agenda.goal = UserGoal(sections)
                agenda.ledger.reset_domain(domain)
                return DialogAct("inform", domain, slot, value)
    return None


def user_step(agenda: Agenda, system_acts: ActSet, rng: random.Random) -> Tuple[ActSet, bool]:
    """React to the system acts, then emit the next user turn.

    Mutates the agenda in place (it has a single owner) and returns the
    emitted act set plus the done flag; done means bye was emitted.
    """
    system_acts = canonicalize(system_acts)

    if any(a.act_type == "bye" for a in system_acts):
        agenda.finished = True
        return (BYE,), True

    if system_acts and system_acts == agenda.last_system_acts:
        agenda.patience -= 1
        if agenda.patience <= 0:
            agenda.forced_failure = True
            agenda.finished = True
            agenda.last_system_acts = system_acts
            return (BYE,), True
    agenda.last_system_acts = system_acts

    # --- reaction phase ---
    # Contradicted domains first: when an inform clashes with a goal
    # constraint, everything the system said about that domain this turn
    # came from the wrong entity, so received answers reset wholesale.
    contradicted = set()
    for act in system_acts:
        if act.act_type != "inform" or act.domain not in agenda.goal.sections:
            continue
        constraints = agenda.goal.sections[act.domain].constraints
        if act.slot in constraints and act.value != constraints[act.slot]:
            contradicted.add(act.domain)
    for domain in sorted(contradicted):
        agenda.ledger.reset_domain(domain)
        constraints = agenda.goal.sections[domain].constraints
        for act in system_acts:
            if act.act_type == "inform" and act.domain == domain and act.slot in constraints:
                if act.value != constraints[act.slot]:
                    agenda.push(DialogAct("inform", domain, act.slot, constraints[act.slot]))

    for act in system_acts:
        domain = act.domain
        in_goal = domain in agenda.goal.sections
        if act.act_type == "request":
            if in_goal and act.slot in agenda.goal.sections[domain].constraints:
                value = agenda.goal.sections[domain].constraints[act.slot]
                agenda.push(DialogAct("inform", domain, act.slot, value))
            else:
                agenda.push(DialogAct("inform", domain, act.slot, DONTCARE))
        elif act.act_type == "inform":
            if not in_goal or domain in contradicted:
                continue
            received = agenda.ledger.received.get(domain, {})
            if act.slot in received and received[act.slot] is None:
                received[act.slot] = act.value
                agenda.drop(lambda a, d=domain, s=act.slot: a.act_type == "request" and a.domain == d and a.slot == s)
        elif act.act_type == "nooffer":
            if in_goal and agenda.goal.sections[domain].constraints:
                relax = _relaxation(agenda, domain, rng)
                if relax is not None:
                    agenda.push(relax)
                else:
                    agenda.stack = [BYE]
            elif in_goal:
                agenda.stack = [BYE]
        elif act.act_type == "book":
            if in_goal:
                agenda.ledger.booked.add(domain)
                agenda.drop(lambda a, d=domain: a.act_type == "book" and a.domain == d)
        elif act.act_type in ("offer", "recommend", "select"):
            if act.slot == "name" and act.value != NONE:
                agenda.offered[domain] = act.value
        # greet / thank / reqmore need no reaction; an empty agenda ends
        # naturally because the next emission pops bye.

    # --- emission phase ---
    budget = rng.randint(1, agenda.max_initiative)
    emitted: List[DialogAct] = []
    done = False
    while budget > 0 and agenda.stack:
        top = agenda.stack[-1]
        if top == BYE:
            if not emitted:  # bye is never co-emitted with other acts
                agenda.stack.pop()
                emitted.append(BYE)
                done = True
            break
        emitted.append(agenda.stack.pop())
        budget -= 1
    agenda.finished = agenda.finished or done
    return canonicalize(emitted), done


def goal_success(goal: UserGoal, ledger: Ledger, db: EntityDatabase) -> bool:
    """True iff every request was answered consistently with one entity
    matching the (possibly relaxed) goal constraints, and any booking in
    the goal was confirmed.
    """
    for domain, section in goal.sections.items():
        received = ledger.received.get(domain, {})
        if any(received.get(slot) is None for slot in section.requests):
            return False
        if section.book and domain not in ledger.booked:
            return False
        matches = db.query(domain, section.constraints)
        filled = {s: v for s, v in received.items() if v is not None}
        ok = any(
            all(e.attributes.get(s, "") == v for s, v in filled.items()) for e in matches
        )
        if not ok:
            return False
    return True
