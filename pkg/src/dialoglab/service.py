"""Human-evaluation chat service: JSON-over-HTTP sessions backed by the
same agent pipeline and success adjudication the simulator uses.

Endpoints: POST /sessions, POST /sessions/{id}/messages,
POST /sessions/{id}/close, GET /sessions/{id}, GET /configs, GET /runs.
The webchat bundle (when built) is served at /.
"""

from __future__ import annotations

import json
import os
import random
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .acts import acts_to_string
from .agent import DialogAgent
from .config import ExperimentConfig, _build_agent, load_config, load_resources
from .envs import goal_instructions
from .errors import DialogLabError, SessionClosed, UnknownConfig, UnknownSession
from .nlg import generate
from .ontology import sample_goal
from .simulator import Ledger, goal_success
from .state import Episode, Turn


class CreateSessionRequest(BaseModel):
    config: str
    seed: Optional[int] = None


class MessageRequest(BaseModel):
    text: str


class CloseRequest(BaseModel):
    success: bool
    stars: int = Field(ge=1, le=5)
    comment: str = ""


@dataclass
class ChatSession:
    id: str
    config_name: str
    agent: DialogAgent
    goal: object
    instructions: str
    max_t: int
    episode: Episode = None
    status: str = "open"
    rating: Optional[dict] = None
    done: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock)
    transcript_path: Optional[str] = None


class ChatService:
    def __init__(self, configs: Dict[str, ExperimentConfig], runs_dir: str = "runs"):
        self.configs = configs
        self.runs_dir = runs_dir
        self.sessions: Dict[str, ChatSession] = {}
        self._store_lock = threading.Lock()

    # -- session lifecycle -------------------------------------------
    def create_session(self, config_name: str, seed: Optional[int] = None) -> ChatSession:
        if config_name not in self.configs:
            raise UnknownConfig(f"no experiment config named {config_name!r}")
        config = self.configs[config_name]
        resources = load_resources(config.meta)
        agent_spec = config.agents[0]
        agent = _build_agent(agent_spec, resources)
        if not (agent.consumes_text and agent.produces_text):
            raise UnknownConfig(f"config {config_name!r} has no text-capable agent for chat")
        if seed is None:
            seed = random.SystemRandom().randrange(10**9)
        goal = sample_goal(seed, resources.schemas, resources.db)
        session = ChatSession(
            id=uuid.uuid4().hex,
            config_name=config_name,
            agent=agent,
            goal=goal,
            instructions=goal_instructions(goal, resources.templates),
            max_t=config.envs[0]["max_t"],
            episode=Episode(goal=goal),
        )
        agent.begin_episode(0, 1)
        with self._store_lock:
            self.sessions[session.id] = session
        return session

    def _get(self, session_id: str) -> ChatSession:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSession(f"no session {session_id!r}") from None

    def opening_prompt(self, session: ChatSession) -> str:
        resources = load_resources(self.configs[session.config_name].meta)
        from .acts import DialogAct

        return generate(resources.templates, (DialogAct("greet"),), "system")

    def post_message(self, session_id: str, text: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            if session.status != "open" or session.done:
                raise SessionClosed(f"session {session_id} is closed")
            reply = session.agent.respond_text(text)
            session.episode.turns.append(Turn("user", session.agent.last_user_acts, text))
            session.episode.turns.append(Turn("system", session.agent.last_system_acts, reply))
            session.episode.reward_trace.append(0.0)
            system_turns = sum(1 for t in session.episode.turns if t.speaker == "system")
            said_bye = any(a.act_type == "bye" for a in session.agent.last_system_acts)
            session.done = said_bye or system_turns >= session.max_t
            return {"reply": reply, "done": session.done, "turns": len(session.episode.turns)}

    # -- adjudication and persistence ----------------------------------
    def _auto_success(self, session: ChatSession) -> bool:
        ledger = Ledger()
        goal = session.goal
        for domain, section in goal.sections.items():
            ledger.received[domain] = {slot: None for slot in section.requests}
        for turn in session.episode.turns:
            if turn.speaker != "system":
                continue
            for act in turn.acts:
                if act.domain not in goal.sections:
                    continue
                if act.act_type == "inform" and act.slot in ledger.received.get(act.domain, {}):
                    ledger.received[act.domain][act.slot] = act.value
                elif act.act_type == "book":
                    ledger.booked.add(act.domain)
        resources = load_resources(self.configs[session.config_name].meta)
        return goal_success(goal, ledger, resources.db)

    def close_session(self, session_id: str, rating: dict) -> dict:
        session = self._get(session_id)
        with session.lock:
            if session.status != "open":
                raise UnknownSession(f"session {session_id} already closed")
            session.status = "closed"
            session.rating = rating
            auto = self._auto_success(session)
            session.episode.success = bool(rating.get("success"))
            session.episode.done_reason = "success" if auto else "failure_goal"
            record = {
                "id": session.id,
                "config": session.config_name,
                "rating": rating,
                "human_success": bool(rating.get("success")),
                "auto_success": auto,
                "episode": session.episode.to_json(),
            }
            day = time.strftime("%Y-%m-%d")
            directory = os.path.join(self.runs_dir, "human", day)
            os.makedirs(directory, exist_ok=True)
            path = os.path.join(directory, f"{session.id}.json")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
            session.transcript_path = path
            return {"transcript_path": path, "auto_success": auto, "human_success": record["human_success"]}

    def session_view(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            return {
                "id": session.id,
                "config": session.config_name,
                "status": session.status,
                "done": session.done,
                "instructions": session.instructions,
                "opening_prompt": self.opening_prompt(session),
                "messages": [
                    {
                        "speaker": t.speaker,
                        "text": t.utterance,
                        "acts": acts_to_string(t.acts),
                    }
                    for t in session.episode.turns
                ],
                "rating": session.rating,
                "transcript_path": session.transcript_path,
            }

    def list_runs(self) -> List[dict]:
        out = []
        if not os.path.isdir(self.runs_dir):
            return out
        for root, _dirs, files in os.walk(self.runs_dir):
            if "report.json" in files:
                out.append({"path": os.path.relpath(root, self.runs_dir)})
        out.sort(key=lambda r: r["path"])
        return out


def create_app(config_paths: List[str], runs_dir: str = "runs", static_dir: Optional[str] = None) -> FastAPI:
    configs = {}
    for path in config_paths:
        config = load_config(path)
        configs[config.name] = config
    service = ChatService(configs, runs_dir=runs_dir)
    app = FastAPI(title="dialoglab", version="0.1.0")
    app.state.service = service

    def _http(exc: DialogLabError) -> HTTPException:
        if isinstance(exc, (UnknownSession, UnknownConfig)):
            return HTTPException(status_code=404, detail=str(exc))
        if isinstance(exc, SessionClosed):
            return HTTPException(status_code=409, detail=str(exc))
        return HTTPException(status_code=400, detail=str(exc))

    @app.post("/sessions")
    def create_session(body: CreateSessionRequest):
        try:
            session = service.create_session(body.config, seed=body.seed)
        except DialogLabError as exc:
            raise _http(exc)
        return {
            "id": session.id,
            "status": session.status,
            "instructions": session.instructions,
            "opening_prompt": service.opening_prompt(session),
        }

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageRequest):
        try:
            return service.post_message(session_id, body.text)
        except DialogLabError as exc:
            raise _http(exc)

    @app.post("/sessions/{session_id}/close")
    def close_session(session_id: str, body: CloseRequest):
        try:
            return service.close_session(
                session_id, {"success": body.success, "stars": body.stars, "comment": body.comment}
            )
        except DialogLabError as exc:
            raise _http(exc)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            return service.session_view(session_id)
        except DialogLabError as exc:
            raise _http(exc)

    @app.get("/configs")
    def get_configs():
        return {"configs": sorted(configs)}

    @app.get("/runs")
    def get_runs():
        return {"runs": service.list_runs()}

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="webchat")
    else:

        @app.get("/")
        def index():
            return {"service": "dialoglab", "endpoints": ["/configs", "/sessions", "/runs"]}

    return app
