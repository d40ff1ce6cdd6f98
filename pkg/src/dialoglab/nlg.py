"""Template-based natural language generation for both dialog roles.

Surfaces are lowercase, punctuation-free sentences with ``{slot}``
placeholders bound to act values; multi-act turns join sentences with
". " in canonical act order so the pattern NLU can split them back apart.
The invertible subset of the template set doubles as the NLU grammar.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .acts import ActSet, DialogAct, NONE, canonicalize
from .errors import EmptyActSet, IOFailure, ParseFailure, ValidationFailure

SENTENCE_JOINER = ". "

_PLACEHOLDER_RE = re.compile(r"\{([\w-]+)\}")
_SKELETON_RE = re.compile(r"^\s*(\w+)\s*\(\s*([\w-]+)\s*(?:,\s*([\w-]+)\s*)?\)\s*$")

# Rendering used when no template covers an act; mechanical but invertible.
FALLBACK_SURFACE = "{act_type} for {domain} with {slot} being {value}"


@dataclass(frozen=True)
class Template:
    act_type: str
    domain: str
    slot: str
    role: str  # "user" | "system" | "both"
    surface: str
    invertible: bool = True
    value: Optional[str] = None  # pins the template to one exact value

    def applies_to(self, act: DialogAct, role: str) -> bool:
        if self.role not in (role, "both"):
            return False
        if (self.act_type, self.domain, self.slot) != (act.act_type, act.domain, act.slot):
            return False
        return self.value is None or self.value == act.value

    def render(self, act: DialogAct) -> str:
        return self.surface.replace("{" + self.slot + "}", act.value)


class TemplateSet:
    def __init__(self, entries: List[Template]):
        self.entries = tuple(entries)
        self._index: Dict[tuple, List[Template]] = {}
        for t in self.entries:
            self._index.setdefault((t.act_type, t.domain, t.slot), []).append(t)

    def __len__(self):
        return len(self.entries)

    def invertible_entries(self, role: str) -> Tuple[Template, ...]:
        return tuple(t for t in self.entries if t.invertible and t.role in (role, "both"))

    def find(self, act: DialogAct, role: str) -> Optional[Template]:
        for t in self._index.get((act.act_type, act.domain, act.slot), ()):
            if t.applies_to(act, role):
                return t
        return None

    def render_act(self, act: DialogAct, role: str) -> str:
        template = self.find(act, role)
        if template is not None:
            return template.render(act)
        return FALLBACK_SURFACE.format(
            act_type=act.act_type, domain=act.domain, slot=act.slot, value=act.value
        )


def parse_skeleton(text: str) -> Tuple[str, str, str]:
    m = _SKELETON_RE.match(text)
    if not m:
        raise ParseFailure(f"bad act skeleton {text!r}")
    return m.group(1), m.group(2), m.group(3) or NONE


def load_templates(path) -> TemplateSet:
    """Load and validate a template file (JSON array of entries)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IOFailure(f"cannot read template file {path}: {exc}") from exc
    if not raw.strip():
        return TemplateSet([])
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseFailure(f"template file {path} is not valid JSON: {exc.msg}", location=f"line {exc.lineno}") from exc
    if not isinstance(doc, list):
        raise ParseFailure(f"template file {path} must be a JSON array")

    entries = []
    for i, item in enumerate(doc):
        where = f"templates[{i}]"
        try:
            act_type, domain, slot = parse_skeleton(item["act"])
        except KeyError:
            raise ValidationFailure(f"{where}: missing 'act' skeleton")
        surface = item.get("surface", "")
        role = item.get("role", "both")
        if role not in ("user", "system", "both"):
            raise ValidationFailure(f"{where}: bad role {role!r}")
        placeholders = set(_PLACEHOLDER_RE.findall(surface))
        if placeholders - {slot}:
            extra = sorted(placeholders - {slot})
            raise ValidationFailure(f"{where}: surface placeholder(s) {extra} absent from skeleton {item['act']!r}")
        entries.append(
            Template(
                act_type=act_type,
                domain=domain,
                slot=slot,
                role=role,
                surface=surface,
                invertible=bool(item.get("invertible", True)),
                value=item.get("value"),
            )
        )
    return TemplateSet(entries)


def generate(templates: TemplateSet, items: ActSet, role: str) -> str:
    """Render an act set as one utterance, deterministically.

    First matching template wins per act; acts with no template fall back
    to the generic rendering.  Every act value appears verbatim.
    """
    items = canonicalize(items)
    if not items:
        raise EmptyActSet("cannot generate from an empty act set")
    return SENTENCE_JOINER.join(templates.render_act(act, role) for act in items)
