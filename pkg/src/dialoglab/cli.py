"""Command-line entry points: run, report, serve, chat."""

from __future__ import annotations

import json
import os
import sys

import click

from .config import compose, load_config, load_resources
from .envs import EnvSpec, HumanBridgeEnv
from .harness import (
    emit_experiment_report,
    emit_trial_report,
    run_directory,
    run_experiment,
    run_trial,
)
from .ontology import GoalProfile


@click.group()
def main():
    """Build, run and evaluate task-oriented dialog agents."""


@main.command()
@click.argument("config_path", type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="Master seed (overrides meta).")
@click.option("--episodes", type=int, default=None, help="Episodes per session (overrides meta).")
@click.option("--sessions", type=int, default=None, help="Sessions per trial (overrides meta).")
@click.option("--out", "out_dir", type=click.Path(), default="runs", show_default=True)
def run(config_path, seed, episodes, sessions, out_dir):
    """Run the experiment described by CONFIG_PATH and emit reports."""
    config = load_config(config_path)
    overrides = {}
    if seed is not None:
        overrides["meta.master_seed"] = seed
    if episodes is not None:
        overrides["meta.episodes"] = episodes
    if sessions is not None:
        overrides["meta.n_sessions"] = sessions
    target = run_directory(out_dir, config.name)
    search_space = config.meta.get("search_space")
    if search_space:
        report = run_experiment(config, search_space, objective=config.meta["objective"])
        emit_experiment_report(report, target)
        best = report.trial_reports[report.best_trial]
        click.echo(f"experiment: {len(report.trial_reports)} trials, best trial {report.best_trial} "
                   f"({report.objective}={best.means.get(report.objective)})")
    else:
        trial = run_trial(config, params=overrides or None)
        emit_trial_report(trial, os.path.join(target, "trial_0"))
        click.echo(f"trial: {len(trial.session_reports)} session(s)")
        for name, value in trial.means.items():
            if value is not None:
                click.echo(f"  {name}: {value:.4f}")
    click.echo(f"reports written under {target}")


@main.command()
@click.argument("run_dir", type=click.Path(exists=True))
def report(run_dir):
    """Summarize the reports found under RUN_DIR."""
    found = False
    for root, _dirs, files in sorted(os.walk(run_dir)):
        if "report.json" not in files:
            continue
        found = True
        with open(os.path.join(root, "report.json"), "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        rel = os.path.relpath(root, run_dir)
        if "means" in doc:
            means = ", ".join(f"{k}={v:.4f}" for k, v in doc["means"].items() if v is not None)
            click.echo(f"{rel}: trial over seeds {doc.get('seeds')}: {means}")
        elif "best_trial" in doc:
            click.echo(f"{rel}: experiment, best_trial={doc['best_trial']} objective={doc['objective']}")
        elif "success_rate" in doc:
            click.echo(
                f"{rel}: session seed={doc.get('seed')} episodes={doc.get('episodes_run')} "
                f"success_rate={doc.get('success_rate'):.4f} avg_turns={doc.get('avg_turns'):.2f}"
            )
    if not found:
        click.echo("no report.json found", err=True)
        sys.exit(1)


@main.command()
@click.option("--config", "config_paths", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--runs-dir", default="runs", show_default=True)
@click.option("--static-dir", default=None, help="Webchat bundle directory (served at /).")
def serve(config_paths, port, host, runs_dir, static_dir):
    """Serve human-evaluation chat sessions over HTTP."""
    import uvicorn

    from .service import create_app

    if static_dir is None:
        candidate = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))), "frontend", "dist")
        static_dir = candidate if os.path.isdir(candidate) else None
    app = create_app(list(config_paths), runs_dir=runs_dir, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.argument("config_path", type=click.Path(exists=True))
@click.option("--seed", type=int, default=0, show_default=True)
def chat(config_path, seed):
    """Terminal chat loop against the configured agent (human bridge)."""
    config = load_config(config_path)
    resources = load_resources(config.meta)
    composed = compose(config)
    agent = composed.bodies[0].agent
    if not (agent.consumes_text and agent.produces_text):
        raise click.ClickException("the first agent in this config cannot chat over text")

    env_doc = config.envs[0]
    spec = EnvSpec(
        kind="human",
        max_t=env_doc["max_t"],
        noise_rate=0.0,
        profile=GoalProfile.from_config(env_doc.get("goal")),
    )
    env = HumanBridgeEnv(
        resources.schemas,
        resources.db,
        spec,
        resources.templates,
        system_lexicon=resources.lexicon("system"),
        user_lexicon=resources.lexicon("user"),
        input_fn=lambda: click.prompt("you", prompt_suffix="> "),
        output_fn=lambda text: click.echo(f"bot> {text}"),
        instructions_fn=lambda text: click.echo(text),
    )
    click.echo("your goal (type 'quit' to stop):")
    obs = env.reset(seed)
    agent.begin_episode(0, 1)
    while not obs.done:
        reply = agent.respond(obs.payload, "text")
        obs = env.step(reply)
    click.echo("chat finished.")


if __name__ == "__main__":
    main()
