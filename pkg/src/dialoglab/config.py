"""Experiment configuration: parsing, validation, normalization, and the
Agents-Environments-Bodies composition.

A config file is one JSON document whose single top-level key names the
experiment; inside it, ``agent`` is a list of agent slot specs, ``env`` a
list of environment specs, ``body`` the product wiring and ``meta`` the
harness parameters.  ``parse_config`` validates and normalizes (defaults
filled, alias spellings folded); ``compose`` instantiates fresh component
objects for every body.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from typing import Dict, List, Tuple

from . import components  # populates the registry
from .agent import DialogAgent
from .envs import EnvSpec, RoleplayEnv, SimulatedEnv
from .errors import MissingSlot, ParseFailure, ShapeMismatch, SlotConflict, UnknownComponent, ValidationFailure
from .nlg import load_templates
from .ontology import GoalProfile, load_ontology
from .registry import REGISTRY

AGENT_SLOTS = ("nlu", "dst", "word_dst", "policy", "word_policy", "nlg", "end_to_end")
SLOT_ALIASES = {"word-dst": "word_dst", "word-policy": "word_policy", "end-to-end": "end_to_end"}
ENV_COMPONENT_SLOTS = ("nlu", "policy", "nlg")

DEFAULT_ONTOLOGY = "builtin:toy_multiwoz"
DEFAULT_TEMPLATES = "builtin:templates_toy"

META_DEFAULTS = {
    "episodes": None,  # falls back to the env's max_tick
    "n_sessions": 1,
    "master_seed": 0,
    "train": False,
    "parallel_sessions": 1,
    "objective": "success_rate",
    "ontology": DEFAULT_ONTOLOGY,
    "templates": DEFAULT_TEMPLATES,
}

ENV_DEFAULTS = {
    "kind": None,  # inferred from the presence of nlu/nlg
    "max_t": 40,
    "max_tick": 20000,
    "noise_rate": 0.0,
    "user_first": True,
    "seed_policy": "sequential",
    "goal": None,
}


@dataclass(frozen=True)
class AgentSpecDoc:
    name: str
    slots: Dict[str, dict]

    @property
    def mode(self) -> str:
        if "end_to_end" in self.slots:
            return "end_to_end"
        if "word_policy" in self.slots:
            return "word_policy"
        if "word_dst" in self.slots:
            return "word_dst"
        return "pipeline"


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    agents: Tuple[AgentSpecDoc, ...]
    envs: Tuple[dict, ...]
    body: dict
    meta: dict

    def normalized(self) -> dict:
        doc = {
            "agent": [dict({"name": a.name}, **a.slots) for a in self.agents],
            "env": [dict(e) for e in self.envs],
            "body": dict(self.body),
            "meta": dict(self.meta),
        }
        return {self.name: doc}

    def dumps(self) -> str:
        return json.dumps(self.normalized(), sort_keys=True, indent=1)


def _validate_agent(doc: dict, index: int) -> AgentSpecDoc:
    where = f"agent[{index}]"
    name = doc.get("name", "DialogAgent")
    slots = {}
    for key, value in doc.items():
        if key == "name":
            continue
        slot = SLOT_ALIASES.get(key, key)
        if slot not in AGENT_SLOTS:
            raise ValidationFailure(f"{where}: unknown section {key!r}")
        if not isinstance(value, dict) or "name" not in value:
            raise ValidationFailure(f"{where}.{key}: expected an object with a 'name'")
        if value["name"] not in REGISTRY:
            raise UnknownComponent(f"{where}.{slot}: unknown component {value['name']!r}")
        slots[slot] = dict(value)

    if "end_to_end" in slots and len(slots) > 1:
        raise SlotConflict(f"{where}: end_to_end excludes every other slot")
    if "word_dst" in slots and ("nlu" in slots or "dst" in slots):
        raise SlotConflict(f"{where}: word_dst is mutually exclusive with nlu/dst")
    if "word_policy" in slots and ("policy" in slots or "nlg" in slots):
        raise SlotConflict(f"{where}: word_policy is mutually exclusive with policy/nlg")
    if not any(s in slots for s in ("policy", "word_policy", "end_to_end")):
        raise MissingSlot(f"{where}: an agent needs a policy, word_policy or end_to_end slot")
    if not any(s in slots for s in ("dst", "word_dst", "end_to_end")):
        raise MissingSlot(f"{where}: an agent needs a dst, word_dst or end_to_end slot")
    return AgentSpecDoc(name, slots)


def _validate_env(doc: dict, index: int) -> dict:
    where = f"env[{index}]"
    out = {"name": doc.get("name", f"env{index}")}
    for slot in ENV_COMPONENT_SLOTS:
        if slot in doc:
            value = doc[slot]
            if not isinstance(value, dict) or "name" not in value:
                raise ValidationFailure(f"{where}.{slot}: expected an object with a 'name'")
            if value["name"] not in REGISTRY:
                raise UnknownComponent(f"{where}.{slot}: unknown component {value['name']!r}")
            out[slot] = dict(value)
    for key, default in ENV_DEFAULTS.items():
        out[key] = doc.get(key, default)
    if out["kind"] is None:
        out["kind"] = "simulated_text" if ("nlu" in out or "nlg" in out) else "simulated_acts"
    unknown = set(doc) - set(out) - {"name"}
    if unknown:
        raise ValidationFailure(f"{where}: unknown key(s) {sorted(unknown)}")
    EnvSpec(
        kind=out["kind"],
        max_t=out["max_t"],
        max_tick=out["max_tick"],
        noise_rate=out["noise_rate"],
        user_first=out["user_first"],
        seed_policy=out["seed_policy"],
    )  # field validation only
    return out


def parse_config(text_or_doc) -> ExperimentConfig:
    """Parse, validate and normalize an experiment config."""
    if isinstance(text_or_doc, str):
        try:
            doc = json.loads(text_or_doc)
        except json.JSONDecodeError as exc:
            raise ParseFailure(f"config is not valid JSON: {exc.msg}", location=f"line {exc.lineno}") from exc
    else:
        doc = text_or_doc
    if not isinstance(doc, dict) or len(doc) != 1:
        raise ParseFailure("config must have exactly one top-level experiment name")
    name = next(iter(doc))
    body_doc = doc[name]
    agents_doc = body_doc.get("agent")
    envs_doc = body_doc.get("env")
    if not agents_doc or not isinstance(agents_doc, list):
        raise ValidationFailure("config needs a non-empty 'agent' list")
    if not envs_doc or not isinstance(envs_doc, list):
        raise ValidationFailure("config needs a non-empty 'env' list")

    agents = tuple(_validate_agent(a, i) for i, a in enumerate(agents_doc))
    envs = tuple(_validate_env(e, i) for i, e in enumerate(envs_doc))

    body = dict(body_doc.get("body", {}))
    body.setdefault("product", "outer")
    body.setdefault("num", 1)
    if body["product"] not in ("outer", "inner", "custom"):
        raise ValidationFailure(f"unknown body product {body['product']!r}")
    if body["product"] == "custom" and not body.get("pairs"):
        raise ValidationFailure("custom body product requires an explicit 'pairs' adjacency list")

    meta = dict(META_DEFAULTS)
    meta.update(body_doc.get("meta", {}))
    if meta["episodes"] is None:
        meta["episodes"] = envs[0]["max_tick"]
    return ExperimentConfig(name, agents, envs, body, meta)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------- compose

_RESOURCE_CACHE: Dict[Tuple[str, str], components.Resources] = {}


def _data_path(spec: str, builtin_name: str) -> str:
    if spec == f"builtin:{builtin_name}":
        return str(importlib_resources.files("dialoglab").joinpath(f"data/{builtin_name}.json"))
    return spec


def load_resources(meta: dict) -> components.Resources:
    ontology = _data_path(meta.get("ontology", DEFAULT_ONTOLOGY), "toy_multiwoz")
    templates = _data_path(meta.get("templates", DEFAULT_TEMPLATES), "templates_toy")
    key = (ontology, templates)
    if key not in _RESOURCE_CACHE:
        schemas, db = load_ontology(ontology)
        _RESOURCE_CACHE[key] = components.Resources(schemas, db, load_templates(templates))
    return _RESOURCE_CACHE[key]


@dataclass
class Body:
    agent_index: int
    env_index: int
    agent: DialogAgent
    env: object
    stores: dict = field(default_factory=dict)


@dataclass
class ComposedExperiment:
    config: ExperimentConfig
    resources: components.Resources
    agents: List[DialogAgent]
    envs: List[object]
    bodies: List[Body]


def _build_agent(spec: AgentSpecDoc, resources: components.Resources) -> DialogAgent:
    built = {}
    for slot, slot_doc in spec.slots.items():
        params = {k: v for k, v in slot_doc.items() if k != "name"}
        factory = REGISTRY.lookup(slot_doc["name"])
        built[slot] = factory(params, resources)
    return DialogAgent(resources.schemas, resources.db, **built)


def _build_env(doc: dict, resources: components.Resources):
    user_params = {k: v for k, v in doc.get("policy", {}).items() if k != "name"}
    spec = EnvSpec(
        kind=doc["kind"],
        max_t=doc["max_t"],
        max_tick=doc["max_tick"],
        noise_rate=doc["noise_rate"],
        user_first=doc["user_first"],
        seed_policy=doc["seed_policy"],
        patience=user_params.get("patience", 3),
        max_initiative=user_params.get("max_initiative", 2),
        profile=GoalProfile.from_config(doc.get("goal")),
    )
    if spec.kind == "simulated_text":
        return SimulatedEnv(
            resources.schemas,
            resources.db,
            spec,
            templates=resources.templates,
            system_lexicon=resources.lexicon("system"),
        )
    if spec.kind == "simulated_acts":
        return SimulatedEnv(resources.schemas, resources.db, spec)
    if spec.kind == "roleplay":
        from .agent import UserAgent

        env = RoleplayEnv(resources.schemas, resources.db, spec)
        env.attach_user_party(UserAgent(resources.schemas, resources.db, spec))
        return env
    raise ValidationFailure(f"env kind {doc['kind']!r} cannot be composed outside the service")


def compose(config: ExperimentConfig) -> ComposedExperiment:
    """Instantiate the AEB wiring: one fresh (agent, env) pair per body."""
    resources = load_resources(config.meta)
    product = config.body["product"]
    n_a, n_e = len(config.agents), len(config.envs)
    if product == "outer":
        pairs = [(i, j) for i in range(n_a) for j in range(n_e)]
    elif product == "inner":
        if n_a != n_e:
            raise ShapeMismatch(f"inner product needs equal list lengths, got {n_a} agents and {n_e} envs")
        pairs = list(zip(range(n_a), range(n_e)))
    else:
        pairs = []
        for pair in config.body["pairs"]:
            i, j = int(pair[0]), int(pair[1])
            if not (0 <= i < n_a and 0 <= j < n_e):
                raise ShapeMismatch(f"custom pair {pair} out of range")
            pairs.append((i, j))

    bodies: List[Body] = []
    agents: List[DialogAgent] = []
    envs: List[object] = []
    for _ in range(int(config.body.get("num", 1))):
        for i, j in pairs:
            agent = _build_agent(config.agents[i], resources)
            env = _build_env(config.envs[j], resources)
            agents.append(agent)
            envs.append(env)
            bodies.append(Body(i, j, agent, env))
    return ComposedExperiment(config, resources, agents, envs, bodies)
