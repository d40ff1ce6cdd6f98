"""Domain ontologies, entity database and satisfiable user-goal sampling.

Everything here is immutable after load and safe to share across
concurrently running sessions; goal sampling is a pure function of its
arguments.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple

from .acts import norm
from .errors import IOFailure, ParseFailure, UnknownDomain, UnsatisfiableProfile, ValidationFailure

DONTCARE = "dontcare"

# Booking slots live outside the entity schema: the toy database has no
# capacity model, so any combination of these values is accepted.
BOOKING_SLOTS: Dict[str, Tuple[str, ...]] = {
    "day": ("monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"),
    "people": ("1", "2", "3", "4", "5", "6", "7", "8"),
    "time": ("17:00", "18:00", "19:00", "20:00"),
}


@dataclass(frozen=True)
class DomainSchema:
    name: str
    informable: Mapping[str, Tuple[str, ...]]  # slot -> finite value vocabulary
    requestable: Tuple[str, ...]
    bookable: bool = False

    @property
    def slots(self) -> Tuple[str, ...]:
        seen = dict.fromkeys(list(self.informable) + list(self.requestable))
        return tuple(seen)


@dataclass(frozen=True)
class Entity:
    domain: str
    attributes: Mapping[str, str]


class SchemaSet:
    """Ordered, name-indexed collection of domain schemas."""

    def __init__(self, schemas):
        self._by_name = {s.name: s for s in schemas}
        self.names = tuple(s.name for s in schemas)

    def __contains__(self, name):
        return name in self._by_name

    def __getitem__(self, name) -> DomainSchema:
        return self._by_name[name]

    def __iter__(self):
        return iter(self._by_name.values())

    def __len__(self):
        return len(self._by_name)

    def canonical_json(self) -> str:
        doc = [
            {
                "name": s.name,
                "informable": {k: list(v) for k, v in s.informable.items()},
                "requestable": list(s.requestable),
                "bookable": s.bookable,
            }
            for s in self
        ]
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


class EntityDatabase:
    """Insertion-ordered entity store with exact-match constraint queries."""

    def __init__(self, entities):
        self.entities = tuple(entities)
        self._by_domain: Dict[str, list] = {}
        for e in self.entities:
            self._by_domain.setdefault(e.domain, []).append(e)
        self._cache: Dict[tuple, Tuple[Entity, ...]] = {}

    def __len__(self):
        return len(self.entities)

    def domain_entities(self, domain) -> Tuple[Entity, ...]:
        if domain not in self._by_domain:
            raise UnknownDomain(f"no entities or schema for domain {domain!r}")
        return tuple(self._by_domain[domain])

    def query(self, domain: str, constraints: Mapping[str, str]) -> Tuple[Entity, ...]:
        """Entities of ``domain`` whose attributes match every constraint.

        Matching is exact, case-insensitive, whitespace-trimmed; a
        ``dontcare`` value drops its constraint.  Result order is database
        insertion order.
        """
        if domain not in self._by_domain:
            raise UnknownDomain(f"unknown domain {domain!r}")
        effective = tuple(
            sorted((norm(s), norm(v)) for s, v in constraints.items() if norm(v) != DONTCARE)
        )
        key = (domain, effective)
        hit = self._cache.get(key)
        if hit is None:
            hit = tuple(
                e
                for e in self._by_domain[domain]
                if all(norm(e.attributes.get(s, "")) == v for s, v in effective)
            )
            self._cache[key] = hit
        return hit


def load_ontology(path) -> Tuple[SchemaSet, EntityDatabase]:
    """Load and validate an ontology file (see the shipped toy fixture)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IOFailure(f"cannot read ontology file {path}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseFailure(f"ontology {path} is not valid JSON: {exc.msg}", location=f"line {exc.lineno}") from exc

    if not isinstance(doc, dict) or "domains" not in doc or "entities" not in doc:
        raise ParseFailure(f"ontology {path} must have top-level 'domains' and 'entities'")

    schemas = []
    seen = set()
    for i, d in enumerate(doc["domains"]):
        where = f"domains[{i}]"
        name = norm(d.get("name", ""))
        if not name:
            raise ValidationFailure(f"{where}: missing domain name")
        if name in seen:
            raise ValidationFailure(f"{where}: duplicate domain {name!r}")
        seen.add(name)
        informable = {}
        for slot, values in d.get("informable", {}).items():
            slot = norm(slot)
            if slot in informable:
                raise ValidationFailure(f"{where}: duplicate slot {slot!r}")
            if not values:
                raise ValidationFailure(f"{where}: empty vocabulary for slot {slot!r}")
            informable[slot] = tuple(norm(v) for v in values)
        requestable = tuple(dict.fromkeys(norm(s) for s in d.get("requestable", [])))
        schemas.append(DomainSchema(name, informable, requestable, bool(d.get("bookable", False))))
    schema_set = SchemaSet(schemas)

    entities = []
    for i, e in enumerate(doc["entities"]):
        where = f"entities[{i}]"
        domain = norm(e.get("domain", ""))
        if domain not in schema_set:
            raise ValidationFailure(f"{where}: unknown domain {domain!r}")
        schema = schema_set[domain]
        attrs = {}
        for slot, value in e.get("attributes", {}).items():
            slot = norm(slot)
            if slot not in schema.slots:
                raise ValidationFailure(f"{where}: slot {slot!r} absent from domain {domain!r} schema")
            attrs[slot] = norm(value)
        entities.append(Entity(domain, attrs))
    return schema_set, EntityDatabase(entities)


@dataclass(frozen=True)
class GoalSection:
    constraints: Mapping[str, str]
    requests: Tuple[str, ...]
    book: Optional[Mapping[str, str]] = None


@dataclass(frozen=True)
class UserGoal:
    sections: Mapping[str, GoalSection]

    @property
    def domains(self) -> Tuple[str, ...]:
        return tuple(self.sections)

    def to_json(self) -> dict:
        return {
            d: {
                "constraints": dict(s.constraints),
                "requests": list(s.requests),
                "book": dict(s.book) if s.book else None,
            }
            for d, s in self.sections.items()
        }

    @classmethod
    def from_json(cls, doc) -> "UserGoal":
        return cls(
            {
                d: GoalSection(dict(s["constraints"]), tuple(s["requests"]), dict(s["book"]) if s.get("book") else None)
                for d, s in doc.items()
            }
        )


@dataclass(frozen=True)
class GoalProfile:
    """Bounds for goal sampling; domains=None means all schema domains."""

    domains: Optional[Tuple[str, ...]] = None
    min_domains: int = 1
    max_domains: int = 2
    min_constraints: int = 1
    max_constraints: int = 3
    min_requests: int = 1
    max_requests: int = 2
    book_prob: float = 0.3

    @classmethod
    def from_config(cls, doc: Optional[dict]) -> "GoalProfile":
        doc = doc or {}
        return cls(
            domains=tuple(doc["domains"]) if doc.get("domains") else None,
            min_domains=doc.get("min_domains", 1),
            max_domains=doc.get("max_domains", 2),
            min_constraints=doc.get("min_constraints", 1),
            max_constraints=doc.get("max_constraints", 3),
            min_requests=doc.get("min_requests", 1),
            max_requests=doc.get("max_requests", 2),
            book_prob=doc.get("book_prob", 0.3),
        )


def sample_goal(seed: int, schemas: SchemaSet, db: EntityDatabase, profile: GoalProfile = GoalProfile()) -> UserGoal:
    """Sample a satisfiable goal: constraints are revealed attributes of a
    concrete entity, so query(constraints) returns that entity at minimum.
    """
    rng = random.Random(f"goal:{seed}")
    pool = [d for d in (profile.domains or schemas.names) if d in schemas]
    if not pool:
        raise UnsatisfiableProfile("profile selects no domain present in the schema set")
    k = rng.randint(min(profile.min_domains, len(pool)), min(profile.max_domains, len(pool)))
    chosen = rng.sample(pool, k)

    sections = {}
    for domain in sorted(chosen):
        schema = schemas[domain]
        try:
            entities = db.domain_entities(domain)
        except UnknownDomain as exc:
            raise UnsatisfiableProfile(str(exc)) from exc
        entity = rng.choice(entities)

        # Only reveal attributes whose value is actually in the slot
        # vocabulary, so goal constraints always validate against the schema.
        informable_present = [
            s for s in schema.informable if entity.attributes.get(s) in schema.informable[s]
        ]
        if not informable_present and not schema.requestable:
            raise UnsatisfiableProfile(f"domain {domain!r} offers nothing to constrain or request")
        n_con = min(rng.randint(profile.min_constraints, profile.max_constraints), len(informable_present))
        constraints = {s: entity.attributes[s] for s in sorted(rng.sample(informable_present, n_con))}

        requestable = list(schema.requestable)
        n_req = min(rng.randint(profile.min_requests, profile.max_requests), len(requestable))
        requests = tuple(sorted(rng.sample(requestable, n_req)))

        if not constraints and not requests:
            raise UnsatisfiableProfile(f"domain {domain!r} produced an empty goal section")

        book = None
        if schema.bookable and rng.random() < profile.book_prob:
            book = {slot: rng.choice(values) for slot, values in BOOKING_SLOTS.items()}
        sections[domain] = GoalSection(constraints, requests, book)
    return UserGoal(sections)
