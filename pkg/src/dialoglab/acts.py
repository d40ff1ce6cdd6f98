"""Dialog-act algebra: the atomic semantic unit and its set/grammar forms.

A turn is a set of acts.  Canonical form (deduplicated, sorted) is the
representation used everywhere downstream; the string grammar

    acttype(domain, slot=value; slot=value)|acttype(domain, slot)|acttype(domain)

is the bit-exact transcript format.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Tuple

from .errors import ParseFailure

ACT_TYPES = (
    "inform",
    "request",
    "book",
    "nooffer",
    "offer",
    "select",
    "recommend",
    "bye",
    "greet",
    "reqmore",
    "thank",
)

# Act types whose slot and value are forced to "none".
SLOTLESS_TYPES = ("bye", "greet", "thank", "reqmore")

NONE = "none"
GENERAL = "general"


def norm(text: str) -> str:
    """Lowercase and collapse whitespace; the value-matching normal form."""
    return " ".join(str(text).lower().split())


@dataclass(frozen=True)
class DialogAct:
    act_type: str
    domain: str = GENERAL
    slot: str = NONE
    value: str = NONE

    def __post_init__(self):
        if self.act_type not in ACT_TYPES:
            raise ValueError(f"unknown act type {self.act_type!r}")
        object.__setattr__(self, "domain", norm(self.domain) or GENERAL)
        object.__setattr__(self, "slot", norm(self.slot) or NONE)
        object.__setattr__(self, "value", norm(self.value) or NONE)
        if self.act_type == "request" and self.value != NONE:
            raise ValueError("request acts carry no value")
        if self.act_type in SLOTLESS_TYPES and (self.slot != NONE or self.value != NONE):
            raise ValueError(f"{self.act_type} acts carry no slot or value")

    def sort_key(self):
        # Value participates as a tiebreaker so the ordering is total.
        return (self.act_type, self.domain, self.slot, self.value)


# An act set is an ordered tuple in canonical form.
ActSet = Tuple[DialogAct, ...]


def acts(*items: DialogAct) -> ActSet:
    return canonicalize(items)


def inform(domain, slot, value) -> DialogAct:
    return DialogAct("inform", domain, slot, value)


def request(domain, slot) -> DialogAct:
    return DialogAct("request", domain, slot)


def canonicalize(items: Iterable[DialogAct]) -> ActSet:
    """Deduplicate and apply the canonical total order. Idempotent."""
    return tuple(sorted(set(items), key=DialogAct.sort_key))


_ACT_RE = re.compile(r"\s*(\w+)\s*\(\s*([\w-]+)\s*(?:,([^)]*))?\)\s*")


def acts_to_string(items: Iterable[DialogAct]) -> str:
    """Serialize to the act grammar. Input is canonicalized first."""
    parts = []
    for act in canonicalize(items):
        if act.slot == NONE and act.value == NONE:
            parts.append(f"{act.act_type}({act.domain})")
        elif act.value == NONE:
            parts.append(f"{act.act_type}({act.domain}, {act.slot})")
        else:
            parts.append(f"{act.act_type}({act.domain}, {act.slot}={act.value})")
    return "|".join(parts)


def string_to_acts(text: str) -> ActSet:
    """Parse the act grammar; raises ParseFailure with the failing offset."""
    text = text.strip()
    if not text:
        return ()
    out = []
    offset = 0
    for chunk in text.split("|"):
        m = _ACT_RE.fullmatch(chunk)
        if not m:
            raise ParseFailure(f"bad act syntax {chunk.strip()!r}", location=f"offset {offset}")
        act_type, domain, slot_part = m.group(1), m.group(2), m.group(3)
        if act_type not in ACT_TYPES:
            raise ParseFailure(f"unknown act type {act_type!r}", location=f"offset {offset}")
        try:
            if slot_part is None or not slot_part.strip():
                out.append(DialogAct(act_type, domain))
            else:
                for pair in slot_part.split(";"):
                    if "=" in pair:
                        slot, value = pair.split("=", 1)
                        out.append(DialogAct(act_type, domain, slot, value))
                    else:
                        out.append(DialogAct(act_type, domain, pair))
        except ValueError as exc:
            raise ParseFailure(str(exc), location=f"offset {offset}") from exc
        offset += len(chunk) + 1
    return canonicalize(out)
