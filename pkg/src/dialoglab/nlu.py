"""Pattern-matching language understanding, inverted from the NLG grammar.

Each invertible template compiles to an anchored regex whose single capture
binds the act value.  Closed-vocabulary slots (informables, booking slots)
only accept in-vocabulary captures plus "dontcare"; open slots (name,
phone, ...) accept any span delimited by the template's literal context.
Utterances are split on sentence boundaries and each segment is matched
greedy longest-literal-first, which is what makes multi-intent turns work.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .acts import ACT_TYPES, ActSet, DialogAct, NONE, canonicalize
from .errors import ValidationFailure
from .nlg import FALLBACK_SURFACE, Template, TemplateSet
from .ontology import BOOKING_SLOTS, DONTCARE, SchemaSet

_SEGMENT_SPLIT = re.compile(r"(?<=[.?!;])\s+")
_STRIP_EDGE = re.compile(r"^[\s.,?!;]+|[\s.,?!;]+$")

DONTCARE_PHRASES = ("dontcare", "i dont care", "i do not care", "any", "anything", "it does not matter")


@dataclass(frozen=True)
class Pattern:
    regex: "re.Pattern"
    act_type: str
    domain: str
    slot: str
    fixed_value: Optional[str]  # set when the surface has no capture
    vocab: Optional[frozenset]  # None = open slot
    literal_len: int
    first_word: str

    def try_match(self, segment: str) -> Optional[DialogAct]:
        m = self.regex.fullmatch(segment)
        if not m:
            return None
        if self.fixed_value is not None:
            value = self.fixed_value
        else:
            value = " ".join(m.group("val").split())
            if self.vocab is not None and value not in self.vocab:
                return None
        if self.act_type == "request":
            return DialogAct(self.act_type, self.domain, self.slot)
        return DialogAct(self.act_type, self.domain, self.slot, value)


class PatternLexicon:
    """Compiled, immutable pattern table for one speaker role."""

    def __init__(self, role: str, patterns: Sequence[Pattern], gazetteer: Dict[Tuple[str, str], frozenset], non_invertible: int):
        self.role = role
        self.patterns = tuple(sorted(patterns, key=lambda p: -p.literal_len))
        self.gazetteer = gazetteer
        self.non_invertible = non_invertible
        self._buckets: Dict[str, List[Pattern]] = {}
        for p in self.patterns:
            self._buckets.setdefault(p.first_word, []).append(p)

    def __len__(self):
        return len(self.patterns)

    def candidates(self, segment: str) -> List[Pattern]:
        first = segment.split(" ", 1)[0] if segment else ""
        return self._buckets.get(first, [])


def _slot_vocab(schemas: SchemaSet, domain: str, slot: str) -> Optional[frozenset]:
    """Closed vocabulary for a slot, or None when the slot is open."""
    if slot in BOOKING_SLOTS:
        return frozenset(BOOKING_SLOTS[slot]) | {DONTCARE}
    if domain in schemas:
        vocab = schemas[domain].informable.get(slot)
        if vocab is not None:
            return frozenset(vocab) | {DONTCARE}
    return None


def _compile_surface(surface: str, slot: str) -> Tuple["re.Pattern", int, str]:
    placeholder = "{" + slot + "}"
    if placeholder in surface:
        head, tail = surface.split(placeholder, 1)
        regex = re.compile(re.escape(head) + r"(?P<val>.+?)" + re.escape(tail))
        literal_len = len(head) + len(tail)
    else:
        regex = re.compile(re.escape(surface))
        literal_len = len(surface)
    first_word = surface.split(" ", 1)[0]
    return regex, literal_len, first_word


def _fallback_patterns() -> List[Pattern]:
    out = []
    for act_type in ACT_TYPES:
        surface = FALLBACK_SURFACE.format(act_type=act_type, domain="X", slot="Y", value="Z")
        head = surface.split("X")[0]
        regex = re.compile(
            re.escape(head) + r"(?P<dom>[\w-]+) with (?P<slot>[\w:-]+) being (?P<val>.+)"
        )
        out.append(
            Pattern(regex, act_type, "", "", None, None, literal_len=len(head) + 12, first_word=act_type)
        )
    return out


def build_lexicon(schemas: SchemaSet, templates: TemplateSet, role: str = "user") -> PatternLexicon:
    """Invert every invertible template of ``role`` into a match pattern.

    Raises ValidationFailure when two templates with different act skeletons
    could match the same surface form (identical literals and overlapping
    value sets).
    """
    patterns: List[Pattern] = []
    signature_map: Dict[str, List[Tuple[Template, Optional[frozenset]]]] = {}
    non_invertible = 0
    gazetteer: Dict[Tuple[str, str], frozenset] = {}
    for schema in schemas:
        for slot in schema.informable:
            gazetteer[(schema.name, slot)] = _slot_vocab(schemas, schema.name, slot)

    for t in templates.entries:
        if t.role not in (role, "both"):
            continue
        if not t.invertible:
            non_invertible += 1
            continue
        placeholder = "{" + t.slot + "}"
        has_capture = placeholder in t.surface
        vocab = _slot_vocab(schemas, t.domain, t.slot) if has_capture else None
        if t.value is not None and has_capture:
            vocab = frozenset({t.value})
        regex, literal_len, first_word = _compile_surface(t.surface, t.slot)
        fixed = None
        if not has_capture:
            fixed = t.value if t.value is not None else NONE
        patterns.append(Pattern(regex, t.act_type, t.domain, t.slot, fixed, vocab, literal_len, first_word))

        signature = t.surface.replace(placeholder, "\x00") if has_capture else t.surface
        skeleton = (t.act_type, t.domain, t.slot)
        for other, other_vocab in signature_map.get(signature, ()):
            if (other.act_type, other.domain, other.slot) == skeleton:
                continue
            open_or_overlap = (
                vocab is None
                or other_vocab is None
                or (vocab & other_vocab)
            )
            if open_or_overlap:
                raise ValidationFailure(
                    f"ambiguous templates: {other.act_type}({other.domain}, {other.slot}) and "
                    f"{t.act_type}({t.domain}, {t.slot}) share surface {t.surface!r}"
                )
        signature_map.setdefault(signature, []).append((t, vocab))

    patterns.extend(_fallback_patterns())
    return PatternLexicon(role, patterns, gazetteer, non_invertible)


def _segments(utterance: str) -> List[str]:
    text = " ".join(utterance.lower().split())
    out = []
    for seg in _SEGMENT_SPLIT.split(text):
        seg = _STRIP_EDGE.sub("", seg)
        if seg:
            out.append(seg)
    return out


def _resolve_bare_value(lexicon: PatternLexicon, segment: str, context: ActSet) -> Optional[DialogAct]:
    """One-turn context memory: a bare value answers the last request."""
    requested = [a for a in context if a.act_type == "request"]
    if not requested:
        return None
    for act in requested:
        vocab = lexicon.gazetteer.get((act.domain, act.slot))
        if vocab is None:
            vocab = _slot_vocab_from_booking(act.slot)
        if vocab is None:
            continue
        if segment in DONTCARE_PHRASES:
            return DialogAct("inform", act.domain, act.slot, DONTCARE)
        for value in sorted(vocab):
            if segment == value or segment == f"the {value} one" or segment == f"{value} one" or segment == f"the {value}":
                return DialogAct("inform", act.domain, act.slot, value)
    return None


def _slot_vocab_from_booking(slot: str) -> Optional[frozenset]:
    if slot in BOOKING_SLOTS:
        return frozenset(BOOKING_SLOTS[slot]) | {DONTCARE}
    return None


def parse(lexicon: PatternLexicon, utterance: str, context: ActSet = ()) -> ActSet:
    """Map an utterance to its act set; unknown input degrades to ()."""
    found: List[DialogAct] = []
    for segment in _segments(utterance):
        act = None
        for pattern in lexicon.candidates(segment):
            if pattern.domain == "" and pattern.slot == "":
                act = _try_fallback(pattern, segment)
            else:
                act = pattern.try_match(segment)
            if act is not None:
                break
        if act is None:
            act = _resolve_bare_value(lexicon, segment, context)
        if act is not None:
            found.append(act)
    return canonicalize(found)


def _try_fallback(pattern: Pattern, segment: str) -> Optional[DialogAct]:
    m = pattern.regex.fullmatch(segment)
    if not m:
        return None
    try:
        value = m.group("val")
        if pattern.act_type == "request":
            value = NONE
        return DialogAct(pattern.act_type, m.group("dom"), m.group("slot"), value)
    except ValueError:
        return None
