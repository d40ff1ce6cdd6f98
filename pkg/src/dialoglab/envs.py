"""Episodic environments wrapping the user simulator behind reset/step.

Four kinds: act-level simulation, NL-level simulation (template NLG and
pattern NLU on the user side), round-robin role play, and a human bridge
driven by an input callback.  One instance serves one session; instances
are independent and safe to run in parallel sessions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

from .acts import ActSet, DialogAct, NONE, canonicalize
from .errors import SteppedAfterDone, ValidationFailure, WrongSpeaker
from .nlg import TemplateSet, generate
from .nlu import PatternLexicon, parse
from .ontology import BOOKING_SLOTS, DONTCARE, EntityDatabase, GoalProfile, SchemaSet, sample_goal
from .policy.rl import reward as reward_fn
from .simulator import Agenda, goal_success, init_agenda, user_step
from .state import Episode, Turn

ENV_KINDS = ("simulated_acts", "simulated_text", "roleplay", "human")


@dataclass(frozen=True)
class EnvSpec:
    kind: str = "simulated_acts"
    max_t: int = 40
    max_tick: int = 20000
    noise_rate: float = 0.0
    # user_first=False makes the system open the dialog (the opening user
    # turn is empty); the default follows the agenda-model convention.
    user_first: bool = True
    seed_policy: str = "sequential"  # episode seeds derive as f(session seed, body, index)
    patience: int = 3
    max_initiative: int = 2
    profile: GoalProfile = field(default_factory=GoalProfile)

    def __post_init__(self):
        if self.kind not in ENV_KINDS:
            raise ValidationFailure(f"unknown env kind {self.kind!r}")
        if self.max_t < 2:
            raise ValidationFailure("max_t must be >= 2")
        if not 0.0 <= self.noise_rate <= 1.0:
            raise ValidationFailure("noise_rate must lie in [0, 1]")
        if self.seed_policy != "sequential":
            raise ValidationFailure(f"unknown seed policy {self.seed_policy!r}")


@dataclass
class Observation:
    channel: str  # "acts" | "text"
    payload: object  # ActSet or str
    tick: int
    done: bool
    reward: float
    # Evaluation side channel: the true user acts behind the payload.
    gold_acts: ActSet = ()


class UserSide:
    """Act-level user: sampled goal, agenda, optional value noise."""

    def __init__(self, schemas: SchemaSet, db: EntityDatabase, spec: EnvSpec):
        self.schemas = schemas
        self.db = db
        self.spec = spec
        self.agenda: Optional[Agenda] = None
        self._rng: Optional[random.Random] = None
        self._noise_rng: Optional[random.Random] = None

    def reset(self, episode_seed: int):
        goal = sample_goal(episode_seed, self.schemas, self.db, self.spec.profile)
        self.agenda = init_agenda(
            goal,
            episode_seed,
            self.schemas,
            self.db,
            patience=self.spec.patience,
            max_initiative=self.spec.max_initiative,
        )
        self._rng = random.Random(f"user:{episode_seed}")
        self._noise_rng = random.Random(f"noise:{episode_seed}")
        return goal

    def react(self, system_acts: ActSet) -> Tuple[ActSet, bool]:
        acts, done = user_step(self.agenda, system_acts, self._rng)
        return self._corrupt(acts), done

    def _corrupt(self, acts: ActSet) -> ActSet:
        """Channel noise: each valued act's value flips to another
        in-vocabulary value with probability noise_rate."""
        if self.spec.noise_rate <= 0.0:
            return acts
        out = []
        for act in acts:
            vocab = None
            if act.value != NONE and act.value != DONTCARE:
                if act.slot in BOOKING_SLOTS:
                    vocab = BOOKING_SLOTS[act.slot]
                elif act.domain in self.schemas:
                    vocab = self.schemas[act.domain].informable.get(act.slot)
            if vocab and self._noise_rng.random() < self.spec.noise_rate:
                alternatives = [v for v in vocab if v != act.value]
                if alternatives:
                    act = DialogAct(act.act_type, act.domain, act.slot, self._noise_rng.choice(alternatives))
            out.append(act)
        return canonicalize(out)

    def success(self) -> bool:
        if self.agenda is None or self.agenda.forced_failure:
            return False
        return goal_success(self.agenda.goal, self.agenda.ledger, self.db)


class SimulatedEnv:
    """Act- or NL-level simulated environment (kind decides the channel)."""

    def __init__(
        self,
        schemas: SchemaSet,
        db: EntityDatabase,
        spec: EnvSpec,
        templates: Optional[TemplateSet] = None,
        system_lexicon: Optional[PatternLexicon] = None,
    ):
        self.spec = spec
        self.channel = "text" if spec.kind == "simulated_text" else "acts"
        if self.channel == "text" and (templates is None or system_lexicon is None):
            raise ValidationFailure("text environment needs templates and a system-side lexicon")
        self.templates = templates
        self.system_lexicon = system_lexicon
        self.user = UserSide(schemas, db, spec)
        self.episode: Optional[Episode] = None
        self._tick = 0
        self._sys_turns = 0
        self._done = True
        self._last_user_acts: ActSet = ()

    def _user_payload(self, acts: ActSet):
        if self.channel == "text":
            return generate(self.templates, acts, "user") if acts else ""
        return acts

    def reset(self, episode_seed: int) -> Observation:
        goal = self.user.reset(episode_seed)
        self.episode = Episode(goal=goal)
        self._tick = 0
        self._sys_turns = 0
        self._done = False
        if self.spec.user_first:
            user_acts, _ = self.user.react(())
        else:
            user_acts = ()  # system-initiative: the user waits to be greeted
        self._last_user_acts = user_acts
        payload = self._user_payload(user_acts)
        utterance = payload if self.channel == "text" else None
        self.episode.turns.append(Turn("user", user_acts, utterance))
        return Observation(self.channel, payload, tick=0, done=False, reward=0.0, gold_acts=user_acts)

    def step(self, system_action) -> Observation:
        if self._done:
            raise SteppedAfterDone("environment episode already finished; call reset")
        if self.channel == "text":
            system_acts = parse(self.system_lexicon, system_action)
            self.episode.turns.append(Turn("system", system_acts, system_action))
        else:
            system_acts = canonicalize(system_action)
            self.episode.turns.append(Turn("system", system_acts, None))
        self._sys_turns += 1

        done = False
        reason = None
        user_acts: ActSet = ()
        if any(a.act_type == "bye" for a in system_acts):
            done = True
            self.user.agenda.finished = True
        else:
            user_acts, done = self.user.react(system_acts)
        if not done and self._sys_turns >= self.spec.max_t:
            done = True
            reason = "failure_turn_limit"

        success = False
        if done:
            success = self.user.success() if reason != "failure_turn_limit" else False
            self.episode.success = success
            self.episode.done_reason = reason or ("success" if success else "failure_goal")
            self._done = True

        step_reward = reward_fn(success, done, self.spec.max_t)
        self.episode.reward_trace.append(step_reward)

        if user_acts:
            payload = self._user_payload(user_acts)
            utterance = payload if self.channel == "text" else None
            self.episode.turns.append(Turn("user", user_acts, utterance))
        else:
            payload = self._user_payload(())
        self._last_user_acts = user_acts
        self._tick += 1
        return Observation(self.channel, payload, tick=self._tick, done=done, reward=step_reward, gold_acts=user_acts)


class RoleplayEnv:
    """Round-robin referee between a user-role and a system-role party.

    Two drive modes: submit both sides' actions through roleplay_step, or
    attach an agenda-backed user party (attach_user_party) and drive it
    like any simulated environment via reset/step — which is how composed
    role-play configs run under the harness.
    """

    def __init__(self, schemas: SchemaSet, db: EntityDatabase, spec: EnvSpec):
        self.schemas = schemas
        self.db = db
        self.spec = spec
        self.channel = "acts"
        self.user_side: Optional[UserSide] = None  # attached for adjudication
        self._user_party = None  # UserAgent-compatible: open_episode / respond
        self.episode: Optional[Episode] = None
        self._tick = 0
        self._driver_ticks = 0
        self._sys_turns = 0
        self._done = True
        self.current_speaker = "user"

    def attach_user_side(self, user_side: UserSide):
        self.user_side = user_side

    def attach_user_party(self, party):
        self._user_party = party
        self.attach_user_side(party.side)

    def begin(self, goal) -> None:
        self.episode = Episode(goal=goal)
        self._tick = 0
        self._driver_ticks = 0
        self._sys_turns = 0
        self._done = False
        self.current_speaker = "user"

    def reset(self, episode_seed: int) -> Observation:
        """Episodic entry point; needs an attached user party."""
        if self._user_party is None:
            raise ValidationFailure("role-play reset/step needs an attached user party")
        user_acts, goal = self._user_party.open_episode(episode_seed)
        self.begin(goal)
        obs = self.roleplay_step("user", user_acts)
        self._driver_ticks = 0
        return Observation(self.channel, user_acts, tick=0, done=False, reward=0.0, gold_acts=user_acts)

    def step(self, system_action) -> Observation:
        """Consume the system action, then play the attached user party."""
        if self._user_party is None:
            raise ValidationFailure("role-play reset/step needs an attached user party")
        system_acts = canonicalize(system_action)
        obs = self.roleplay_step("system", system_acts)
        user_acts: ActSet = ()
        if not obs.done:
            user_acts, _user_done = self._user_party.respond(system_acts)
            obs = self.roleplay_step("user", user_acts)
        self._driver_ticks += 1
        done = obs.done or self._done
        reward = self.episode.reward_trace[-1] if self.episode.reward_trace else 0.0
        return Observation(
            self.channel, user_acts, tick=self._driver_ticks, done=done, reward=reward, gold_acts=user_acts
        )

    def roleplay_step(self, speaker: str, acts: ActSet) -> Observation:
        if self._done:
            raise SteppedAfterDone("role-play episode already finished")
        if speaker != self.current_speaker:
            raise WrongSpeaker(f"it is the {self.current_speaker}'s turn, not the {speaker}'s")
        acts = canonicalize(acts)
        self.episode.turns.append(Turn(speaker, acts, None))

        done = False
        reason = None
        step_reward = 0.0
        if speaker == "system":
            self._sys_turns += 1
        bye = any(a.act_type == "bye" for a in acts)
        if speaker == "user" and bye:
            done = True
        elif speaker == "system" and bye:
            done = True
        if speaker == "system" and not done and self._sys_turns >= self.spec.max_t:
            done = True
            reason = "failure_turn_limit"

        if done:
            success = False
            if self.user_side is not None and reason != "failure_turn_limit":
                success = self.user_side.success()
            self.episode.success = success
            self.episode.done_reason = reason or ("success" if success else "failure_goal")
            self._done = True
        if speaker == "system":
            step_reward = reward_fn(self.episode.success if done else None, done, self.spec.max_t)
            self.episode.reward_trace.append(step_reward)
        elif done and self.episode.reward_trace:
            # the terminal outcome lands on the preceding system action,
            # mirroring the simulated environment's reward trace
            step_reward = reward_fn(self.episode.success, True, self.spec.max_t)
            self.episode.reward_trace[-1] = step_reward

        self.current_speaker = "system" if speaker == "user" else "user"
        self._tick += 1
        return Observation(self.channel, acts, tick=self._tick, done=done, reward=step_reward, gold_acts=acts)


class HumanBridgeEnv:
    """Human-in-the-loop environment driven by an input callback.

    ``input_fn`` blocks for the next human utterance; ``output_fn``
    receives everything addressed to the human.  Rewards are zero; task
    success is adjudicated from the transcript after the fact.
    """

    QUIT_WORDS = ("/quit", "quit", "exit")

    def __init__(
        self,
        schemas: SchemaSet,
        db: EntityDatabase,
        spec: EnvSpec,
        templates: TemplateSet,
        system_lexicon: PatternLexicon,
        user_lexicon: PatternLexicon,
        input_fn: Callable[[], str],
        output_fn: Callable[[str], None] = lambda s: None,
        instructions_fn: Optional[Callable[[str], None]] = None,
    ):
        self.schemas = schemas
        self.db = db
        self.spec = spec
        self.channel = "text"
        self.templates = templates
        self.system_lexicon = system_lexicon
        self.user_lexicon = user_lexicon
        self.input_fn = input_fn
        self.output_fn = output_fn
        self.instructions_fn = instructions_fn or output_fn
        self.episode: Optional[Episode] = None
        self.goal = None
        self._tick = 0
        self._sys_turns = 0
        self._done = True
        self._last_system_acts: ActSet = ()

    def reset(self, episode_seed: int) -> Observation:
        self.goal = sample_goal(episode_seed, self.schemas, self.db, self.spec.profile)
        self.episode = Episode(goal=self.goal)
        self._tick = 0
        self._sys_turns = 0
        self._done = False
        self._last_system_acts = ()
        self.instructions_fn(goal_instructions(self.goal, self.templates))
        return self._read_human()

    def _read_human(self) -> Observation:
        text = self.input_fn()
        if text is None or text.strip().lower() in self.QUIT_WORDS:
            text = "thank you goodbye"
        acts = parse(self.user_lexicon, text, context=self._last_system_acts)
        self.episode.turns.append(Turn("user", acts, text))
        return Observation(self.channel, text, tick=self._tick, done=False, reward=0.0, gold_acts=acts)

    def step(self, system_text: str) -> Observation:
        if self._done:
            raise SteppedAfterDone("chat already finished")
        system_acts = parse(self.system_lexicon, system_text)
        self._last_system_acts = system_acts
        self.episode.turns.append(Turn("system", system_acts, system_text))
        self.episode.reward_trace.append(0.0)
        self._sys_turns += 1
        self.output_fn(system_text)
        self._tick += 1
        if any(a.act_type == "bye" for a in system_acts) or self._sys_turns >= self.spec.max_t:
            self._done = True
            self.episode.done_reason = "aborted"
            return Observation(self.channel, "", tick=self._tick, done=True, reward=0.0)
        # a human farewell still reaches the agent, which answers it before
        # the next step reports done
        obs = self._read_human()
        return Observation(self.channel, obs.payload, tick=self._tick, done=False, reward=0.0, gold_acts=obs.gold_acts)


def goal_instructions(goal, templates: TemplateSet) -> str:
    """Render a sampled goal as plain-language instructions via the
    user-role templates."""
    lines = []
    for domain in goal.domains:
        section = goal.sections[domain]
        parts: List[DialogAct] = []
        for slot in sorted(section.constraints):
            parts.append(DialogAct("inform", domain, slot, section.constraints[slot]))
        say = generate(templates, tuple(parts), "user") if parts else ""
        asks = [DialogAct("request", domain, slot) for slot in section.requests]
        ask = generate(templates, tuple(asks), "user") if asks else ""
        line = f"[{domain}]"
        if say:
            line += f" you want: {say}."
        if ask:
            line += f" find out: {ask}."
        if section.book:
            details = ", ".join(f"{s}={v}" for s, v in sorted(section.book.items()))
            line += f" then book it ({details})."
        lines.append(line)
    return "\n".join(lines)
