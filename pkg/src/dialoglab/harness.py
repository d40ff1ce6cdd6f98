"""Session / Trial / Experiment control layers.

A session runs one composed body set for a fixed number of episodes under
one seed; a trial averages several sessions at fixed parameters (seeds
master, master+1, ...); an experiment grid-searches hyperparameters and
keeps the argmax trial.  Everything a report contains is a pure function
of (config, master seed); wall-clock metadata lives only in the meta.json
sidecar so reports and transcripts are byte-reproducible.
"""

from __future__ import annotations

import csv
import itertools
import json
import os
import platform
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from .config import ComposedExperiment, ExperimentConfig, compose, parse_config
from .dst import init_state, update
from .errors import ComponentFailure, DialogLabError, EmptySearchSpace, IOFailure
from .policy import kernels
from .state import Episode

METRICS = ("success_rate", "avg_return", "avg_turns", "book_rate", "dst_joint_accuracy", "dst_slot_accuracy")


def derive_episode_seed(session_seed: int, body_index: int, episode_index: int) -> int:
    return session_seed * 1_000_003 + body_index * 100_003 + episode_index


@dataclass
class SessionReport:
    seed: int
    episodes_run: int
    success_rate: float
    avg_return: float
    avg_turns: float
    book_rate: float
    dst_joint_accuracy: Optional[float]
    dst_slot_accuracy: Optional[float]
    episode_records: List[dict] = field(default_factory=list)
    transcripts: List[Episode] = field(default_factory=list)
    checkpoint: Optional[dict] = None

    def metrics(self) -> dict:
        return {
            "success_rate": self.success_rate,
            "avg_return": self.avg_return,
            "avg_turns": self.avg_turns,
            "book_rate": self.book_rate,
            "dst_joint_accuracy": self.dst_joint_accuracy,
            "dst_slot_accuracy": self.dst_slot_accuracy,
        }

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "episodes_run": self.episodes_run,
            **self.metrics(),
            "episodes": self.episode_records,
        }


class _GoldTracker:
    """Parallel rule-tracker fold over the true user acts, for measuring
    tracker accuracy (joint and per-slot, both reported and labeled)."""

    def __init__(self, schemas):
        self.schemas = schemas
        self.state = init_state(schemas)
        self.joint_hits = 0
        self.slot_hits = 0
        self.slot_total = 0
        self.turns = 0

    def new_episode(self):
        self.state = init_state(self.schemas)

    def observe(self, gold_acts, agent_state):
        self.state = update(self.state, gold_acts, self.schemas)
        self.turns += 1
        joint_equal = True
        for name in self.schemas.names:
            gold = self.state.domains[name]
            got = agent_state.domains[name]
            if (gold.constraints, gold.requested, gold.booking) != (got.constraints, got.requested, got.booking):
                joint_equal = False
            schema = self.schemas[name]
            for slot in schema.informable:
                self.slot_total += 1
                if gold.constraints.get(slot) == got.constraints.get(slot):
                    self.slot_hits += 1
        if joint_equal:
            self.joint_hits += 1

    def results(self) -> Tuple[Optional[float], Optional[float]]:
        if self.turns == 0:
            return None, None
        return self.joint_hits / self.turns, self.slot_hits / self.slot_total


def _episode_record(index: int, seed: int, episode: Episode, env) -> dict:
    wants_booking = any(s.book for s in episode.goal.sections.values())
    booked = False
    user_side = getattr(env, "user", None) or getattr(env, "user_side", None)
    agenda = getattr(user_side, "agenda", None)
    if agenda is not None and wants_booking:
        booked = all(d in agenda.ledger.booked for d, s in episode.goal.sections.items() if s.book)
    return {
        "episode": index,
        "seed": seed,
        "success": episode.success,
        "turns": len(episode.turns),
        "return": sum(episode.reward_trace),
        "wants_booking": wants_booking,
        "booked": booked,
        "done_reason": episode.done_reason,
    }


def run_session(composed: ComposedExperiment, meta: dict, seed: int, keep_transcripts: bool = True) -> SessionReport:
    """Run every body for meta['episodes'] episodes; deterministic in seed."""
    episodes_per_body = int(meta["episodes"])
    train = bool(meta.get("train", False))
    records: List[dict] = []
    transcripts: List[Episode] = []
    checkpoint = None
    gold = _GoldTracker(composed.resources.schemas)

    for body_index, body in enumerate(composed.bodies):
        agent, env = body.agent, body.env
        if agent.trainable:
            agent.policy.reseed(seed)
            agent.policy.train = train
        for ep_index in range(episodes_per_body):
            episode_seed = derive_episode_seed(seed, body_index, ep_index)
            turn = 0
            try:
                obs = env.reset(episode_seed)
                agent.begin_episode(ep_index, episodes_per_body)
                gold.new_episode()
                track = agent.state is not None
                while not obs.done:
                    turn += 1
                    action = agent.respond(obs.payload, env.channel)
                    if track and obs.gold_acts:
                        gold.observe(obs.gold_acts, agent.state)
                    obs = env.step(action)
                    if train and agent.trainable:
                        agent.observe_reward(obs.reward, obs.done)
            except DialogLabError as exc:
                raise ComponentFailure(
                    f"episode {ep_index} turn {turn} (seed {episode_seed}, body {body_index}): {exc}"
                ) from exc
            records.append(_episode_record(ep_index, episode_seed, env.episode, env))
            if keep_transcripts:
                transcripts.append(env.episode)
        if train and agent.trainable:
            checkpoint = agent.policy.checkpoint()

    n = len(records)
    successes = sum(1 for r in records if r["success"])
    booking_goals = [r for r in records if r["wants_booking"]]
    joint_acc, slot_acc = gold.results()
    return SessionReport(
        seed=seed,
        episodes_run=n,
        success_rate=successes / n if n else 0.0,
        avg_return=float(_exact_mean([r["return"] for r in records])) if n else 0.0,
        avg_turns=float(_exact_mean([r["turns"] for r in records])) if n else 0.0,
        book_rate=(sum(1 for r in booking_goals if r["booked"]) / len(booking_goals)) if booking_goals else 0.0,
        dst_joint_accuracy=joint_acc,
        dst_slot_accuracy=slot_acc,
        episode_records=records,
        transcripts=transcripts if keep_transcripts else [],
        checkpoint=checkpoint,
    )


# ------------------------------------------------------------------ trial

@dataclass
class TrialReport:
    params: dict
    seeds: List[int]
    session_reports: List[SessionReport]
    means: dict
    stds: dict
    failed: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "params": self.params,
            "seeds": self.seeds,
            "sessions": [r.to_json() for r in self.session_reports],
            "means": self.means,
            "stds": self.stds,
            "failed": self.failed,
        }


def _exact_mean(values) -> Fraction:
    total = Fraction(0)
    for v in values:
        total += Fraction(v)
    return total / len(values) if values else Fraction(0)


def _exact_std(values) -> float:
    if not values:
        return 0.0
    mean = _exact_mean(values)
    var = sum((Fraction(v) - mean) ** 2 for v in values) / len(values)
    return float(var) ** 0.5


def aggregate_sessions(reports: List[SessionReport]) -> Tuple[dict, dict]:
    means, stds = {}, {}
    for metric in METRICS:
        values = [r.metrics()[metric] for r in reports]
        if any(v is None for v in values):
            means[metric] = None
            stds[metric] = None
        else:
            means[metric] = float(_exact_mean(values))
            stds[metric] = _exact_std(values)
    return means, stds


def run_trial(
    config: ExperimentConfig,
    params: Optional[dict] = None,
    n_sessions: Optional[int] = None,
    master_seed: Optional[int] = None,
    keep_transcripts: bool = True,
) -> TrialReport:
    """Run n sessions at fixed parameters with seeds master, master+1, ...

    Sessions may execute concurrently (meta['parallel_sessions']); results
    are ordered by session index before aggregation so parallelism never
    changes the report.  Trainable-policy sessions stay serialized.
    """
    if params:
        config = apply_overrides(config, params)
    meta = config.meta
    n = int(n_sessions if n_sessions is not None else meta["n_sessions"])
    if n < 1:
        raise ComponentFailure("a trial needs n_sessions >= 1")
    master = int(master_seed if master_seed is not None else meta["master_seed"])
    seeds = [master + i for i in range(n)]

    def one(i_seed):
        i, seed = i_seed
        try:
            composed = compose(config)
            return i, run_session(composed, meta, seed, keep_transcripts=keep_transcripts), None
        except ComponentFailure as exc:
            return i, None, exc
        except DialogLabError as exc:
            return i, None, ComponentFailure(f"composition failed: {exc}")

    workers = int(meta.get("parallel_sessions", 1))
    trainable = bool(meta.get("train", False))
    results: List[Optional[SessionReport]] = [None] * n
    failure: Optional[Tuple[int, ComponentFailure]] = None
    if workers > 1 and not trainable:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, report, exc in pool.map(one, enumerate(seeds)):
                if exc is not None and failure is None:
                    failure = (i, exc)
                results[i] = report
    else:
        for item in enumerate(seeds):
            i, report, exc = one(item)
            if exc is not None:
                failure = (i, exc)
                break
            results[i] = report

    completed = [r for r in results if r is not None]
    if failure is not None:
        means, stds = aggregate_sessions(completed) if completed else ({}, {})
        report = TrialReport(params or {}, seeds, completed, means, stds, failed=f"session {failure[0]}: {failure[1]}")
        raise ComponentFailure(f"session {failure[0]} failed: {failure[1]}") from failure[1]
    means, stds = aggregate_sessions(completed)
    return TrialReport(params or {}, seeds, completed, means, stds)


def apply_overrides(config: ExperimentConfig, overrides: dict) -> ExperimentConfig:
    """Apply dotted-path overrides (e.g. "meta.episodes", "env.0.noise_rate",
    "agent.0.policy.alpha") and re-validate."""
    doc = json.loads(json.dumps(config.normalized()))
    body = doc[config.name]
    for path, value in overrides.items():
        parts = path.split(".")
        node = body
        for part in parts[:-1]:
            node = node[int(part)] if isinstance(node, list) else node[part]
        last = parts[-1]
        if isinstance(node, list):
            node[int(last)] = value
        else:
            node[last] = value
    return parse_config(doc)


# -------------------------------------------------------------- experiment

@dataclass
class ExperimentReport:
    search_space: dict
    objective: str
    trial_reports: List[TrialReport]
    best_trial: int

    def to_json(self) -> dict:
        return {
            "search_space": self.search_space,
            "objective": self.objective,
            "trials": [t.to_json() for t in self.trial_reports],
            "best_trial": self.best_trial,
        }


def expand_search_space(search_space: dict) -> List[dict]:
    """Cartesian grid over per-parameter value lists or (low, high, count)
    ranges, in sorted parameter order."""
    if not search_space:
        raise EmptySearchSpace("search space has no parameters")
    names = sorted(search_space)
    grids = []
    for name in names:
        spec = search_space[name]
        if isinstance(spec, dict):
            low, high, count = float(spec["low"]), float(spec["high"]), int(spec["count"])
            if count < 1:
                raise EmptySearchSpace(f"parameter {name!r} has an empty range")
            if count == 1:
                values = [low]
            else:
                step = (high - low) / (count - 1)
                values = [low + step * i for i in range(count)]
        else:
            values = list(spec)
        if not values:
            raise EmptySearchSpace(f"parameter {name!r} has no values")
        grids.append(values)
    return [dict(zip(names, combo)) for combo in itertools.product(*grids)]


def run_experiment(
    config: ExperimentConfig,
    search_space: dict,
    objective: str = "success_rate",
    keep_transcripts: bool = False,
) -> ExperimentReport:
    points = expand_search_space(search_space)
    meta = config.meta
    if meta.get("search") == "random":
        rng = random.Random(f"search:{meta['master_seed']}")
        k = min(int(meta.get("search_samples", len(points))), len(points))
        points = [points[i] for i in sorted(rng.sample(range(len(points)), k))]
    trials = [run_trial(config, params=point, keep_transcripts=keep_transcripts) for point in points]
    best = 0
    for i, trial in enumerate(trials):
        if trial.means.get(objective) is not None and (
            trials[best].means.get(objective) is None
            or trial.means[objective] > trials[best].means[objective]
        ):
            best = i
    return ExperimentReport(search_space, objective, trials, best)


# ------------------------------------------------------------------ emits

def _dump_json(doc, path):
    tmp = json.dumps(doc, sort_keys=True, indent=1)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(tmp + "\n")
    except OSError as exc:
        raise IOFailure(f"cannot write report {path}: {exc}") from exc


def _write_meta_sidecar(directory):
    _dump_json(
        {
            "created_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "host": platform.node(),
            "kernel_backend": kernels.BACKEND,
        },
        os.path.join(directory, "meta.json"),
    )


def emit_session_report(report: SessionReport, directory) -> List[str]:
    """Write report.json, episodes.csv, transcripts.jsonl and the meta
    sidecar; everything except meta.json is byte-deterministic."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    report_path = os.path.join(directory, "report.json")
    _dump_json(report.to_json(), report_path)
    paths.append(report_path)

    csv_path = os.path.join(directory, "episodes.csv")
    fieldnames = ["episode", "seed", "success", "turns", "return", "wants_booking", "booked", "done_reason"]
    try:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=fieldnames)
            writer.writeheader()
            for record in report.episode_records:
                writer.writerow(record)
    except OSError as exc:
        raise IOFailure(f"cannot write {csv_path}: {exc}") from exc
    paths.append(csv_path)

    jsonl_path = os.path.join(directory, "transcripts.jsonl")
    try:
        with open(jsonl_path, "w", encoding="utf-8") as fh:
            for episode in report.transcripts:
                fh.write(episode.dumps() + "\n")
    except OSError as exc:
        raise IOFailure(f"cannot write {jsonl_path}: {exc}") from exc
    paths.append(jsonl_path)

    if report.checkpoint is not None:
        ckpt_path = os.path.join(directory, "policy.json")
        _dump_json(report.checkpoint, ckpt_path)
        paths.append(ckpt_path)
    _write_meta_sidecar(directory)
    return paths


def emit_trial_report(report: TrialReport, directory, experiment_name="trial") -> List[str]:
    os.makedirs(directory, exist_ok=True)
    paths = []
    for i, session in enumerate(report.session_reports):
        paths.extend(emit_session_report(session, os.path.join(directory, f"session_{i}")))
    summary = report.to_json()
    summary["sessions"] = [f"session_{i}/report.json" for i in range(len(report.session_reports))]
    path = os.path.join(directory, "report.json")
    _dump_json(summary, path)
    paths.append(path)
    _write_meta_sidecar(directory)
    return paths


def emit_experiment_report(report: ExperimentReport, directory) -> List[str]:
    os.makedirs(directory, exist_ok=True)
    paths = []
    for k, trial in enumerate(report.trial_reports):
        paths.extend(emit_trial_report(trial, os.path.join(directory, f"trial_{k}")))
    summary = report.to_json()
    summary["trials"] = [f"trial_{k}/report.json" for k in range(len(report.trial_reports))]
    path = os.path.join(directory, "report.json")
    _dump_json(summary, path)
    paths.append(path)
    _write_meta_sidecar(directory)
    return paths


def run_directory(base_dir, experiment_name) -> str:
    return os.path.join(base_dir, experiment_name)


# ----------------------------------------------------------- comparisons

def compare_configs(
    configs: List[ExperimentConfig],
    episodes: int,
    master_seed: int = 0,
    out_path=None,
) -> dict:
    """Run one session per config on the same seeds and emit a side-by-side
    report of tracker accuracy vs end-to-end success."""
    rows = []
    for config in configs:
        trial = run_trial(
            config,
            params={"meta.episodes": episodes, "meta.n_sessions": 1, "meta.master_seed": master_seed},
            keep_transcripts=False,
        )
        session = trial.session_reports[0]
        rows.append(
            {
                "experiment": config.name,
                "agent_mode": config.agents[0].mode,
                "episodes": session.episodes_run,
                "success_rate": session.success_rate,
                "dst_joint_accuracy": session.dst_joint_accuracy,
                "dst_slot_accuracy": session.dst_slot_accuracy,
                "avg_turns": session.avg_turns,
                "avg_return": session.avg_return,
            }
        )
    doc = {"master_seed": master_seed, "experiments": rows}
    if out_path:
        _dump_json(doc, out_path)
    return doc
