"""Built-in component wrappers and their registry entries.

Every factory takes (params, resources) where resources bundles the
loaded ontology, templates and compiled lexicons.  Fresh component
instances are created per body; the heavyweight resources are immutable
and shared.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from . import dst as dst_mod
from .acts import ActSet
from .nlg import TemplateSet, generate
from .nlu import PatternLexicon, build_lexicon, parse
from .ontology import EntityDatabase, SchemaSet
from .policy import QLearningPolicy, ReinforcePolicy, decide_rule
from .registry import register
from .state import BeliefState


@dataclass
class Resources:
    schemas: SchemaSet
    db: EntityDatabase
    templates: TemplateSet

    def __post_init__(self):
        self._lexicons = {}

    def lexicon(self, role: str) -> PatternLexicon:
        if role not in self._lexicons:
            self._lexicons[role] = build_lexicon(self.schemas, self.templates, role)
        return self._lexicons[role]


@register("PatternNLU")
class PatternNLU:
    """Multi-intent pattern matcher; ``side`` picks whose text it reads."""

    def __init__(self, params, resources: Resources):
        side = params.get("side", "user")
        self.lexicon = resources.lexicon(side)

    def parse(self, text: str, context: ActSet = ()) -> ActSet:
        return parse(self.lexicon, text, context=context)


@register("RuleDST")
class RuleDST:
    def __init__(self, params, resources: Resources):
        self.schemas = resources.schemas

    def init(self) -> BeliefState:
        return dst_mod.init_state(self.schemas)

    def update(self, state: BeliefState, user_acts: ActSet) -> BeliefState:
        return dst_mod.update(state, user_acts, self.schemas)


@register("WordDST")
class WordDST:
    """Word-level tracking slot; the reference implementation is the
    parse-then-track pass-through."""

    def __init__(self, params, resources: Resources):
        self.schemas = resources.schemas
        self.lexicon = resources.lexicon(params.get("side", "user"))

    def init(self) -> BeliefState:
        return dst_mod.init_state(self.schemas)

    def update_text(self, state: BeliefState, text: str, system_acts: ActSet) -> BeliefState:
        return dst_mod.word_dst_update(state, text, system_acts, self.lexicon, self.schemas)

    def update_acts(self, state: BeliefState, user_acts: ActSet) -> BeliefState:
        return dst_mod.update(state, user_acts, self.schemas)


@register("RulePolicy")
class RulePolicy:
    trainable = False

    def __init__(self, params, resources: Resources):
        self.schemas = resources.schemas
        self.db = resources.db

    def decide(self, state: BeliefState) -> ActSet:
        return decide_rule(state, self.db, self.schemas)


class _RLDecideMixin:
    def decide(self, state: BeliefState) -> ActSet:
        features = self.featurize(state)
        action = self.act(features)
        return self.materialize(action, state)


@register("QLearning")
class QLearningComponent(_RLDecideMixin, QLearningPolicy):
    def __init__(self, params, resources: Resources):
        QLearningPolicy.__init__(
            self,
            resources.schemas,
            resources.db,
            seed=params.get("seed", 0),
            alpha=params.get("alpha", 0.02),
            gamma=params.get("gamma", 0.99),
            epsilon=params.get("epsilon", 0.05),
            eps_start=params.get("eps_start", 1.0),
            eps_end=params.get("eps_end", 0.05),
        )


@register("Reinforce")
class ReinforceComponent(_RLDecideMixin, ReinforcePolicy):
    def __init__(self, params, resources: Resources):
        ReinforcePolicy.__init__(
            self,
            resources.schemas,
            resources.db,
            seed=params.get("seed", 0),
            lr=params.get("lr", 0.005),
            gamma=params.get("gamma", 0.99),
        )


@register("TemplateNLG")
class TemplateNLG:
    def __init__(self, params, resources: Resources):
        self.templates = resources.templates
        self.role = "user" if params.get("is_user", False) else "system"

    def generate(self, acts: ActSet) -> str:
        return generate(self.templates, acts, self.role)


@register("WordPolicy")
class WordPolicyPassthrough:
    """Word-level policy slot; reference implementation glues the rule
    policy to the system-role template NLG."""

    trainable = False

    def __init__(self, params, resources: Resources):
        self.schemas = resources.schemas
        self.db = resources.db
        self.templates = resources.templates

    def respond(self, state: BeliefState) -> Tuple[ActSet, str]:
        acts = decide_rule(state, self.db, self.schemas)
        text = generate(self.templates, acts, "system") if acts else ""
        return acts, text


@register("PipelineEndToEnd")
class PipelineEndToEnd:
    """End-to-end slot reference: the full text-to-text rule pipeline
    packaged as a single component."""

    def __init__(self, params, resources: Resources):
        self.schemas = resources.schemas
        self.db = resources.db
        self.templates = resources.templates
        self.lexicon = resources.lexicon("user")
        self.state: Optional[BeliefState] = None
        self.last_system_acts: ActSet = ()
        self.reset()

    def reset(self):
        self.state = dst_mod.init_state(self.schemas)
        self.last_system_acts = ()

    def respond(self, text: str) -> Tuple[str, ActSet]:
        user_acts = parse(self.lexicon, text, context=self.last_system_acts)
        self.state = dst_mod.update(self.state, user_acts, self.schemas)
        system_acts = decide_rule(self.state, self.db, self.schemas)
        self.state = dst_mod.absorb_system_acts(self.state, system_acts)
        self.last_system_acts = system_acts
        reply = generate(self.templates, system_acts, "system") if system_acts else ""
        return reply, system_acts


@register("AgendaPolicy")
class AgendaPolicy:
    """User-side policy marker for environment configs.

    The simulated environment owns the agenda internally; this component
    exists so env configs name their user policy explicitly and can carry
    its parameters (patience, max_initiative).
    """

    def __init__(self, params, resources: Resources):
        self.patience = params.get("patience", 3)
        self.max_initiative = params.get("max_initiative", 2)
