"""Linear RL system policies trained in the simulated environment.

Q-learning (epsilon-greedy, one TD step per transition) stands in for the
deep value-based family; REINFORCE with a running-mean baseline covers the
policy-gradient family.  Both act on the binary belief-state features,
choose from the composite action inventory and share the hot-loop kernels
(compiled or pure Python, see ``kernels``).
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..errors import CheckpointMismatch, DivergenceDetected
from ..ontology import EntityDatabase, SchemaSet
from ..state import BeliefState
from . import kernels
from .features import FeatureVector, build_action_inventory, feature_dim, featurize, materialize

WEIGHT_LIMIT = 1e6


def reward(success: Optional[bool], done: bool, max_t: int) -> float:
    """Reward contract: -1 per non-terminal system turn, +2*max_t on
    success, -max_t on failure (goal unmet or turn limit)."""
    if not done:
        return -1.0
    return 2.0 * max_t if success else -float(max_t)


def schema_hash(schemas: SchemaSet) -> str:
    return hashlib.sha256(schemas.canonical_json().encode()).hexdigest()[:16]


def epsilon_schedule(episode: int, total: int, start: float = 1.0, end: float = 0.05) -> float:
    """Linear decay from start to end over the first half of training."""
    horizon = max(1, total // 2)
    if episode >= horizon:
        return end
    return start + (end - start) * (episode / horizon)


def act_epsilon_greedy(weights: np.ndarray, features: FeatureVector, epsilon: float, rng: random.Random) -> int:
    """Greedy action with probability 1-epsilon (ties to the lowest
    index), uniform otherwise."""
    n_actions = weights.shape[0]
    if rng.random() < epsilon:
        return rng.randrange(n_actions)
    out = np.empty(n_actions, dtype=np.float64)
    kernels.q_values(weights, features.index_array(), out)
    return int(kernels.greedy_index(out, n_actions))


@dataclass
class Transition:
    features: FeatureVector
    action: int
    reward: float
    next_features: Optional[FeatureVector]
    done: bool


def q_update(weights: np.ndarray, transition: Transition, alpha: float, gamma: float) -> None:
    next_active = (
        transition.next_features.index_array()
        if transition.next_features is not None and not transition.done
        else np.empty(0, dtype=np.intp)
    )
    max_abs = kernels.td_update(
        weights,
        transition.features.index_array(),
        transition.action,
        transition.reward,
        next_active,
        gamma,
        alpha,
        transition.done,
    )
    if max_abs > WEIGHT_LIMIT:
        raise DivergenceDetected(f"|weight| reached {max_abs:.3g}; lower the learning rate")


def reinforce_update(
    weights: np.ndarray,
    steps: List[Tuple[FeatureVector, int]],
    rewards: List[float],
    baseline: float,
    lr: float,
    gamma: float = 1.0,
) -> float:
    """One episode of REINFORCE: accumulate the log-likelihood gradient
    weighted by (return - baseline) at fixed weights, then apply it.

    Returns the episode return G_0 (callers fold it into the baseline).
    """
    n_actions, dim = weights.shape
    returns = []
    g = 0.0
    for r in reversed(rewards):
        g = r + gamma * g
        returns.append(g)
    returns.reverse()

    grad = np.zeros((n_actions, dim), dtype=np.float64)
    scratch = np.empty(n_actions, dtype=np.float64)
    for (features, action), g_t in zip(steps, returns):
        kernels.policy_grad_accumulate(
            weights, grad, features.index_array(), action, g_t - baseline, scratch
        )
    weights += lr * grad
    max_abs = float(np.abs(weights).max()) if weights.size else 0.0
    if max_abs > WEIGHT_LIMIT:
        raise DivergenceDetected(f"|weight| reached {max_abs:.3g}; lower the learning rate")
    return returns[0] if returns else 0.0


class _LinearPolicyBase:
    """Shared plumbing: inventory, featurization, checkpoint payload."""

    algorithm = ""
    trainable = True

    def __init__(self, schemas: SchemaSet, db: EntityDatabase, seed: int = 0):
        self.schemas = schemas
        self.db = db
        self.inventory = build_action_inventory(schemas)
        self.dim = feature_dim(schemas)
        self.weights = np.zeros((len(self.inventory), self.dim), dtype=np.float64)
        self.rng = random.Random(f"policy:{seed}")
        self.train = False

    def reseed(self, seed):
        self.rng = random.Random(f"policy:{seed}")

    def featurize(self, state: BeliefState) -> FeatureVector:
        return featurize(state, self.db, self.schemas)

    def materialize(self, action_index: int, state: BeliefState):
        return materialize(self.inventory[action_index], state, self.db, self.schemas)

    def hyperparameters(self) -> dict:
        return {}

    def checkpoint(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "schema_hash": schema_hash(self.schemas),
            "action_inventory": [a.label() for a in self.inventory],
            "weights": self.weights.tolist(),
            "hyperparameters": self.hyperparameters(),
        }

    def load_weights(self, doc: dict):
        if doc.get("schema_hash") != schema_hash(self.schemas):
            raise CheckpointMismatch(
                "checkpoint was trained against a different ontology "
                f"({doc.get('schema_hash')} != {schema_hash(self.schemas)})"
            )
        weights = np.asarray(doc["weights"], dtype=np.float64)
        if weights.shape != self.weights.shape:
            raise CheckpointMismatch(f"weight shape {weights.shape} != {self.weights.shape}")
        self.weights = np.ascontiguousarray(weights)

    def begin_episode(self, episode_index: int, total_episodes: int):
        pass

    def end_episode(self):
        pass


class QLearningPolicy(_LinearPolicyBase):
    algorithm = "qlearning"

    def __init__(
        self,
        schemas: SchemaSet,
        db: EntityDatabase,
        seed: int = 0,
        alpha: float = 0.02,
        gamma: float = 0.99,
        epsilon: float = 0.05,
        eps_start: float = 1.0,
        eps_end: float = 0.05,
    ):
        super().__init__(schemas, db, seed)
        self.alpha = alpha
        self.gamma = gamma
        self.epsilon = epsilon
        self.eps_start = eps_start
        self.eps_end = eps_end
        self._pending: Optional[Tuple[FeatureVector, int]] = None
        self._pending_reward: Optional[float] = None

    def hyperparameters(self):
        return {
            "alpha": self.alpha,
            "gamma": self.gamma,
            "eps_start": self.eps_start,
            "eps_end": self.eps_end,
        }

    def begin_episode(self, episode_index: int, total_episodes: int):
        if self.train:
            self.epsilon = epsilon_schedule(episode_index, total_episodes, self.eps_start, self.eps_end)
        self._pending = None
        self._pending_reward = None

    def act(self, features: FeatureVector) -> int:
        if self._pending is not None and self._pending_reward is not None:
            prev_features, prev_action = self._pending
            q_update(
                self.weights,
                Transition(prev_features, prev_action, self._pending_reward, features, False),
                self.alpha,
                self.gamma,
            )
            self._pending = None
            self._pending_reward = None
        epsilon = self.epsilon if self.train else 0.0
        action = act_epsilon_greedy(self.weights, features, epsilon, self.rng)
        if self.train:
            self._pending = (features, action)
        return action

    def observe_reward(self, value: float, done: bool):
        if not self.train or self._pending is None:
            return
        if done:
            features, action = self._pending
            q_update(self.weights, Transition(features, action, value, None, True), self.alpha, self.gamma)
            self._pending = None
            self._pending_reward = None
        else:
            self._pending_reward = value


class ReinforcePolicy(_LinearPolicyBase):
    algorithm = "reinforce"

    def __init__(
        self,
        schemas: SchemaSet,
        db: EntityDatabase,
        seed: int = 0,
        lr: float = 0.005,
        gamma: float = 0.99,
    ):
        super().__init__(schemas, db, seed)
        self.lr = lr
        self.gamma = gamma
        self.baseline = 0.0
        self._episode_count = 0
        self._steps: List[Tuple[FeatureVector, int]] = []
        self._rewards: List[float] = []

    def hyperparameters(self):
        return {"lr": self.lr, "gamma": self.gamma}

    def begin_episode(self, episode_index: int, total_episodes: int):
        self._steps = []
        self._rewards = []

    def act(self, features: FeatureVector) -> int:
        n_actions = self.weights.shape[0]
        probs = np.empty(n_actions, dtype=np.float64)
        kernels.softmax_probs(self.weights, features.index_array(), probs)
        if self.train:
            u = self.rng.random()
            acc = 0.0
            action = n_actions - 1
            for i in range(n_actions):
                acc += probs[i]
                if u < acc:
                    action = i
                    break
        else:
            action = int(kernels.greedy_index(probs, n_actions))
        if self.train:
            self._steps.append((features, action))
        return action

    def observe_reward(self, value: float, done: bool):
        if not self.train:
            return
        self._rewards.append(value)
        if done:
            self.end_episode()

    def end_episode(self):
        if not self._steps:
            return
        g0 = reinforce_update(self.weights, self._steps, self._rewards, self.baseline, self.lr, self.gamma)
        # Baseline is the running mean of episode returns.
        self._episode_count += 1
        self.baseline += (g0 - self.baseline) / self._episode_count
        self._steps = []
        self._rewards = []


def save_checkpoint(policy: _LinearPolicyBase, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(policy.checkpoint(), fh, sort_keys=True)
        fh.write("\n")


def load_checkpoint(policy: _LinearPolicyBase, path) -> None:
    with open(path, "r", encoding="utf-8") as fh:
        policy.load_weights(json.load(fh))
