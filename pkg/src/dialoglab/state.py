"""Belief state and episode records shared by tracker, policies and harness.

States are immutable value objects: every update produces a fresh copy, so
they are freely shareable across sessions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import List, Mapping, Optional

from .acts import ActSet, acts_to_string, string_to_acts
from .ontology import UserGoal

DONE_REASONS = ("success", "failure_goal", "failure_turn_limit", "aborted")


@dataclass(frozen=True)
class DomainState:
    constraints: Mapping[str, str] = field(default_factory=dict)
    requested: frozenset = frozenset()
    booking: Mapping[str, str] = field(default_factory=dict)
    # Slots the user answered with "dontcare"; cleared constraints are
    # remembered here so the policy does not ask again.
    dontcare: frozenset = frozenset()
    # System-side bookkeeping (folded in via absorb_system_acts, never by
    # the tracker itself): values already informed, offer and booking flags.
    fulfilled: Mapping[str, str] = field(default_factory=dict)
    offered: Optional[str] = None
    booked: bool = False

    def is_empty(self) -> bool:
        return not (self.constraints or self.requested or self.booking or self.dontcare)


@dataclass(frozen=True)
class BeliefState:
    domains: Mapping[str, DomainState]
    terminated: bool = False
    turn_count: int = 0
    last_user_acts: ActSet = ()

    def domain(self, name) -> DomainState:
        return self.domains[name]

    def with_domain(self, name, dstate) -> "BeliefState":
        new = dict(self.domains)
        new[name] = dstate
        return replace(self, domains=new)


@dataclass
class Turn:
    speaker: str  # "user" | "system"
    acts: ActSet
    utterance: Optional[str] = None


@dataclass
class Episode:
    goal: UserGoal
    turns: List[Turn] = field(default_factory=list)
    reward_trace: List[float] = field(default_factory=list)
    success: bool = False
    done_reason: str = "aborted"

    def act_trace(self) -> str:
        """Canonical one-line-per-turn act trace used for channel equivalence."""
        return "\n".join(f"{t.speaker}\t{acts_to_string(t.acts)}" for t in self.turns)

    def to_json(self) -> dict:
        return {
            "goal": self.goal.to_json(),
            "turns": [
                {"speaker": t.speaker, "acts": acts_to_string(t.acts), "utterance": t.utterance}
                for t in self.turns
            ],
            "reward_trace": self.reward_trace,
            "success": self.success,
            "done_reason": self.done_reason,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, doc) -> "Episode":
        return cls(
            goal=UserGoal.from_json(doc["goal"]),
            turns=[Turn(t["speaker"], string_to_acts(t["acts"]), t.get("utterance")) for t in doc["turns"]],
            reward_trace=list(doc["reward_trace"]),
            success=bool(doc["success"]),
            done_reason=doc["done_reason"],
        )

    @classmethod
    def loads(cls, line: str) -> "Episode":
        return cls.from_json(json.loads(line))
