"""Dialog agent assembly: the pipeline that turns observations into actions.

A DialogAgent is wired from slot components (nlu / dst / word_dst /
policy / word_policy / nlg / end_to_end) and consumes either act sets or
raw text depending on what its slots support.  UserAgent wraps the
agenda simulator behind the same interface for role play.
"""

from __future__ import annotations

from typing import Optional, Tuple

from .acts import ActSet, canonicalize
from .dst import absorb_system_acts
from .errors import ValidationFailure
from .envs import UserSide
from .state import BeliefState


class DialogAgent:
    def __init__(
        self,
        schemas,
        db,
        nlu=None,
        dst=None,
        word_dst=None,
        policy=None,
        word_policy=None,
        nlg=None,
        end_to_end=None,
    ):
        self.schemas = schemas
        self.db = db
        self.nlu = nlu
        self.dst = dst
        self.word_dst = word_dst
        self.policy = policy
        self.word_policy = word_policy
        self.nlg = nlg
        self.end_to_end = end_to_end
        self.state: Optional[BeliefState] = None
        self.last_system_acts: ActSet = ()
        self.last_user_acts: ActSet = ()
        self.reset()

    # -- capabilities ------------------------------------------------
    @property
    def consumes_text(self) -> bool:
        return self.end_to_end is not None or self.word_dst is not None or self.nlu is not None

    @property
    def produces_text(self) -> bool:
        return self.end_to_end is not None or self.word_policy is not None or self.nlg is not None

    @property
    def trainable(self) -> bool:
        return self.policy is not None and getattr(self.policy, "trainable", False)

    # -- lifecycle ---------------------------------------------------
    def reset(self):
        if self.end_to_end is not None:
            self.end_to_end.reset()
            self.state = self.end_to_end.state
        else:
            self.state = self.dst.init() if self.dst is not None else self.word_dst.init()
        self.last_system_acts = ()
        self.last_user_acts = ()

    def begin_episode(self, episode_index: int, total_episodes: int):
        self.reset()
        if self.policy is not None and hasattr(self.policy, "begin_episode"):
            self.policy.begin_episode(episode_index, total_episodes)

    # -- one turn ----------------------------------------------------
    def respond(self, payload, channel: str):
        """Consume one user turn, return the system action for the channel."""
        if channel == "text":
            return self.respond_text(payload)
        return self.respond_acts(payload)

    def respond_acts(self, user_acts: ActSet) -> ActSet:
        if self.end_to_end is not None:
            raise ValidationFailure("end-to-end agents only operate on the text channel")
        user_acts = canonicalize(user_acts)
        if self.word_dst is not None:
            # Word-level slot on the act channel degrades to act tracking.
            self.state = self.word_dst.update_acts(self.state, user_acts)
        else:
            self.state = self.dst.update(self.state, user_acts)
        self.last_user_acts = user_acts
        system_acts = self._decide()
        return system_acts

    def respond_text(self, text: str) -> str:
        if self.end_to_end is not None:
            reply, system_acts = self.end_to_end.respond(text)
            self.state = self.end_to_end.state
            self.last_system_acts = system_acts
            return reply
        if self.word_dst is not None:
            self.state = self.word_dst.update_text(self.state, text, self.last_system_acts)
            self.last_user_acts = self.state.last_user_acts
        elif self.nlu is not None:
            user_acts = self.nlu.parse(text, context=self.last_system_acts)
            self.state = self.dst.update(self.state, user_acts)
            self.last_user_acts = user_acts
        else:
            raise ValidationFailure("agent has no text input slot (nlu/word_dst/end_to_end)")
        system_acts = self._decide()
        if self.word_policy is not None:
            return self._last_reply
        if self.nlg is None:
            raise ValidationFailure("agent has no text output slot (nlg/word_policy/end_to_end)")
        return self.nlg.generate(system_acts) if system_acts else ""

    def _decide(self) -> ActSet:
        if self.word_policy is not None:
            system_acts, reply = self.word_policy.respond(self.state)
            self._last_reply = reply
        else:
            system_acts = self.policy.decide(self.state)
        system_acts = canonicalize(system_acts)
        self.state = self._absorb(system_acts)
        self.last_system_acts = system_acts
        return system_acts

    def _absorb(self, system_acts: ActSet) -> BeliefState:
        return absorb_system_acts(self.state, system_acts)

    def observe_reward(self, value: float, done: bool):
        if self.trainable:
            self.policy.observe_reward(value, done)


class UserAgent:
    """Agenda-simulator party for role-play environments.

    Uses the same seed streams as the simulated environment, so a role
    play against it reproduces the simulated-environment trace.
    """

    def __init__(self, schemas, db, spec):
        self.side = UserSide(schemas, db, spec)

    def open_episode(self, episode_seed: int) -> Tuple[ActSet, object]:
        goal = self.side.reset(episode_seed)
        acts, _ = self.side.react(())
        return acts, goal

    def respond(self, system_acts: ActSet) -> Tuple[ActSet, bool]:
        return self.side.react(system_acts)
