"""Interactive demonstration sessions over a JSON websocket protocol.

One websocket connection is one isolated session: a scenario replaying
under the current policy, a snapshot ring for rewinding, labels the user
adds, and the repair loop run on demand.  All messages carry ``"v": 1``
and are validated against the committed protocol schema.
"""

from __future__ import annotations

import asyncio
import json
from importlib import resources
from pathlib import Path

import jsonschema
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .ast import Policy
from .demos import Demonstration, demos_to_json, save_demos
from .domain import DomainDefinition, social_domain
from .errors import IdipsError, ProtocolError
from .evaluator import eval_policy_traced, trace_literals
from .parser import load_policy, parse_policy
from .printer import print_policy
from .sim import (
    SnapshotRing,
    corridor_scenario,
    door_scenario,
    extract_world,
    init_snapshot,
    load_scenario,
    scenario_to_json,
    step,
)
from .synthesis import SynthConfig, idips, report_to_json

RING_CAPACITY = 1200
MAX_MANUAL_STEPS = 600

_schema = json.loads(
    resources.files("idips.data").joinpath("protocol.schema.json").read_text()
)


def protocol_validator(direction: str) -> jsonschema.Draft202012Validator:
    """Validator for one side of the wire: "client" or "server" messages."""
    sub = {**_schema["$defs"][direction], "$defs": _schema["$defs"]}
    return jsonschema.Draft202012Validator(sub)


_validator = protocol_validator("client")


def _resolve_scenario(value: str):
    if value == "corridor":
        return corridor_scenario(0)
    if value == "door":
        return door_scenario(0)
    return load_scenario(value)


def _frame(snap, mode: str, trace: dict | None) -> dict:
    return {
        "v": 1,
        "type": "snapshot",
        "tick": snap.tick,
        "mode": mode,
        "robot": {
            "pos": list(snap.robot_pos),
            "vel": list(snap.robot_vel),
            "heading": snap.robot_heading,
        },
        "humans": [{"pos": list(p), "vel": list(v)} for p, v in snap.humans],
        "door_open": snap.door_open,
        "action": snap.action,
        "trace": trace,
    }


class Session:
    """One logical execution strand; handlers run under the session lock."""

    def __init__(self, scenario, policy: Policy | None, dom: DomainDefinition):
        self.scenario = scenario
        self.dom = dom
        self.policy = policy
        self.snap = init_snapshot(scenario)
        self.action = "GoAlone"
        self.ring = SnapshotRing(RING_CAPACITY)
        self.ring.push(self.snap)
        self.demos: list[Demonstration] = []
        self.mode = "running"  # running | paused | rewound
        self.rewound = None
        self.step_hz = 20.0
        self.last_trace: dict | None = None

    def advance(self) -> None:
        w = extract_world(self.snap, self.scenario)
        if self.policy is not None:
            nxt, fired = eval_policy_traced(self.policy, self.action, w)
            self.last_trace = {
                "prev": self.action,
                "fired": fired,
                "branches": [
                    {
                        "result": br.result,
                        "literals": trace_literals(br.guard, w, self.action),
                    }
                    for br in self.policy.branches
                ],
            }
            self.action = nxt
        else:
            self.last_trace = None
        self.snap = step(self.snap, self.action, self.scenario)
        self.ring.push(self.snap)

    def jump_back(self, n: int):
        try:
            return self.ring.back(n)
        except IndexError:
            raise ProtocolError(
                "rewind", f"cannot rewind {n} ticks: buffer holds {len(self.ring)}"
            ) from None

    def restart_from(self, snap, action: str) -> None:
        self.ring.truncate_to(snap)
        self.snap = snap
        self.action = action
        self.rewound = None

    def demo_msg(self) -> dict:
        return {"v": 1, "type": "demos", "demos": demos_to_json(self.demos)["demos"]}

    def policy_msg(self) -> dict:
        text = print_policy(self.policy) if self.policy is not None else None
        return {"v": 1, "type": "policy", "text": text}


def _error(code: str, message: str) -> dict:
    return {"v": 1, "type": "error", "code": code, "message": message}


async def _handle(session: Session, msg: dict, send) -> None:
    kind = msg["type"]
    if kind == "pause":
        session.mode = "paused"
        await send({"v": 1, "type": "mode", "mode": session.mode})
    elif kind == "resume":
        if session.rewound is not None:
            # replaying from t-n without a new label is deterministic
            session.restart_from(session.rewound, session.rewound.action)
        session.mode = "running"
        await send({"v": 1, "type": "mode", "mode": session.mode})
    elif kind == "rewind":
        snap = session.jump_back(int(msg["n"]))
        session.rewound = snap
        session.mode = "rewound"
        session.last_trace = None
        await send(_frame(snap, "rewound", None))
    elif kind == "set_action":
        action = msg["action"]
        if action not in session.dom.actions:
            raise ProtocolError("action", f"unknown action {action!r}")
        session.action = action
        await send({"v": 1, "type": "mode", "mode": session.mode})
    elif kind == "label_transition":
        action = msg["action"]
        if action not in session.dom.actions:
            raise ProtocolError("action", f"unknown action {action!r}")
        target = session.rewound if session.rewound is not None else session.snap
        w = extract_world(target, session.scenario)
        session.demos.append(
            Demonstration(target.action, w, action, tick=target.tick, source="ui-label")
        )
        session.restart_from(target, action)
        session.mode = "running"
        await send(session.demo_msg())
    elif kind == "save_demos":
        path = Path(msg["path"])
        if path.is_absolute() or ".." in path.parts:
            raise ProtocolError("path", "demo path must be relative to the server directory")
        save_demos(session.demos, path)
        await send({"v": 1, "type": "saved", "path": str(path), "count": len(session.demos)})
    elif kind == "run_idips":
        cfg = SynthConfig(min_score=float(msg.get("min_score", 0.95)))
        base = session.policy if session.policy is not None else Policy(())
        result = await asyncio.to_thread(idips, session.dom, list(session.demos), base, cfg)
        session.policy = result.policy
        await send({"v": 1, "type": "report", "report": report_to_json(result)})
        await send(session.policy_msg())
    elif kind == "load_policy":
        try:
            session.policy = parse_policy(msg["text"], session.dom)
        except IdipsError as e:
            await send(_error("policy_error", f"{type(e).__name__}: {e}"))
            return
        await send(session.policy_msg())
    elif kind == "step_rate":
        hz = float(msg["hz"])
        if not 1.0 <= hz <= 60.0:
            raise ProtocolError("rate", f"step rate {hz} outside 1..60")
        session.step_hz = hz
        await send({"v": 1, "type": "mode", "mode": session.mode})
    elif kind == "step":
        n = int(msg.get("n", 1))
        if not 1 <= n <= MAX_MANUAL_STEPS:
            raise ProtocolError("step", f"step count {n} outside 1..{MAX_MANUAL_STEPS}")
        if session.rewound is not None:
            session.restart_from(session.rewound, session.rewound.action)
            session.mode = "paused"
        for _ in range(n):
            session.advance()
        await send(_frame(session.snap, session.mode, session.last_trace))
    else:
        raise ProtocolError("type", f"unknown message type {kind!r}")


def create_app(
    scenario: str,
    policy_path: str | None = None,
    domain: DomainDefinition | None = None,
    frontend_dir: str | Path | None = None,
) -> FastAPI:
    dom = domain or social_domain()
    base_scenario = _resolve_scenario(scenario)
    base_policy = load_policy(policy_path, dom) if policy_path else None

    app = FastAPI()

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        session = Session(base_scenario, base_policy, dom)
        lock = asyncio.Lock()

        async def send(obj: dict) -> None:
            await ws.send_text(json.dumps(obj))

        await send(
            {
                "v": 1,
                "type": "hello",
                "scenario": scenario_to_json(session.scenario),
                "actions": list(dom.actions),
                "policy": print_policy(base_policy) if base_policy else None,
                "step_rate": session.step_hz,
            }
        )

        async def ticker() -> None:
            while True:
                async with lock:
                    if session.mode == "running":
                        session.advance()
                        await send(_frame(session.snap, session.mode, session.last_trace))
                await asyncio.sleep(1.0 / session.step_hz)

        task = asyncio.create_task(ticker())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError as e:
                    await send(_error("schema", f"not JSON: {e}"))
                    continue
                errors = sorted(_validator.iter_errors(msg), key=str)
                if errors:
                    await send(_error("schema", errors[0].message))
                    continue
                async with lock:
                    try:
                        await _handle(session, msg, send)
                    except ProtocolError as e:
                        await send(_error(e.code, str(e)))
                    except IdipsError as e:
                        await send(_error("domain", f"{type(e).__name__}: {e}"))
        except WebSocketDisconnect:
            pass
        finally:
            task.cancel()

    dist = Path(frontend_dir) if frontend_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if dist.is_dir():
        app.mount("/", StaticFiles(directory=dist, html=True), name="ui")
    return app
