"""Check reports and their JSON form.

The JSON report is lossless: it carries full configurations (control
frames as structured nodes, environment, statuses, file store), so an
Unsafe witness can be deserialized and replayed through the step
relation.  Text rendering summarizes the control to its first three
frames to keep traces readable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SpecError
from .machine import (
    Configuration, Ctrl, FileStore, HoleAssign, HoleIf, HoleOpLeft,
    HoleOpRight, HoleRead, Unit, Value, make_configuration,
)
from .semantics import ForkCount, Interleave, OraclePos, RuleInstance, UNIQUE, Unique
from .syntax import (
    And, Assign, AtomStmt, BinOp, Fork, ForkFor, ForkIf, If, IntLit, Mode,
    Open, Close, Or, ReadAt, ReadND, Seq, Skip, Stmt, Var, While,
    format_atom, format_stmt,
)
from .explorer import Trace

SCHEMA = "filesafe-report/1"


# ---------------------------------------------------------------------------
# Nodes

def node_to_obj(node) -> dict:
    match node:
        case IntLit(n):
            return {"node": "int", "n": n}
        case Var(name):
            return {"node": "var", "name": name}
        case BinOp(op, left, right):
            return {"node": "binop", "op": op,
                    "left": node_to_obj(left), "right": node_to_obj(right)}
        case And(left, right):
            return {"node": "and",
                    "left": node_to_obj(left), "right": node_to_obj(right)}
        case Or(left, right):
            return {"node": "or",
                    "left": node_to_obj(left), "right": node_to_obj(right)}
        case Assign(Var(name), value):
            return {"node": "assign", "target": name, "value": node_to_obj(value)}
        case If(cond, then_body, else_body):
            return {"node": "if", "cond": node_to_obj(cond),
                    "then": node_to_obj(then_body), "else": node_to_obj(else_body)}
        case While(cond, body):
            return {"node": "while",
                    "cond": node_to_obj(cond), "body": node_to_obj(body)}
        case Open(f):
            return {"node": "open", "file": f}
        case Close(f):
            return {"node": "close", "file": f}
        case ReadND(target, pointer, f):
            return {"node": "read-nd", "target": target,
                    "pointer": pointer, "file": f}
        case ReadAt(target, f, pos):
            return {"node": "read-at", "target": target, "file": f,
                    "pos": node_to_obj(pos)}
        case Skip():
            return {"node": "skip"}
        case AtomStmt(atom):
            return {"node": "stmt", "atom": node_to_obj(atom)}
        case Seq(first, second):
            return {"node": "seq",
                    "first": node_to_obj(first), "second": node_to_obj(second)}
        case Fork(branches):
            return {"node": "fork", "branches": [node_to_obj(b) for b in branches]}
        case ForkFor(body):
            return {"node": "forkfor", "body": node_to_obj(body)}
        case ForkIf(arms):
            return {"node": "forkif", "arms": [
                [node_to_obj(guard), node_to_obj(s)] for guard, s in arms
            ]}
    raise TypeError(f"not serializable: {node!r}")


def node_from_obj(obj: dict):
    kind = obj["node"]
    if kind == "int":
        return IntLit(obj["n"])
    if kind == "var":
        return Var(obj["name"])
    if kind == "binop":
        return BinOp(obj["op"], node_from_obj(obj["left"]), node_from_obj(obj["right"]))
    if kind == "and":
        return And(node_from_obj(obj["left"]), node_from_obj(obj["right"]))
    if kind == "or":
        return Or(node_from_obj(obj["left"]), node_from_obj(obj["right"]))
    if kind == "assign":
        return Assign(Var(obj["target"]), node_from_obj(obj["value"]))
    if kind == "if":
        return If(node_from_obj(obj["cond"]),
                  node_from_obj(obj["then"]), node_from_obj(obj["else"]))
    if kind == "while":
        return While(node_from_obj(obj["cond"]), node_from_obj(obj["body"]))
    if kind == "open":
        return Open(obj["file"])
    if kind == "close":
        return Close(obj["file"])
    if kind == "read-nd":
        return ReadND(obj["target"], obj["pointer"], obj["file"])
    if kind == "read-at":
        return ReadAt(obj["target"], obj["file"], node_from_obj(obj["pos"]))
    if kind == "skip":
        return Skip()
    if kind == "stmt":
        return AtomStmt(node_from_obj(obj["atom"]))
    if kind == "seq":
        return Seq(node_from_obj(obj["first"]), node_from_obj(obj["second"]))
    if kind == "fork":
        return Fork(tuple(node_from_obj(b) for b in obj["branches"]))
    if kind == "forkfor":
        return ForkFor(node_from_obj(obj["body"]))
    if kind == "forkif":
        return ForkIf(tuple(
            (node_from_obj(guard), node_from_obj(s)) for guard, s in obj["arms"]
        ))
    raise SpecError(f"unknown node kind {kind!r}")


# ---------------------------------------------------------------------------
# Frames and configurations

def frame_to_obj(frame) -> dict:
    if isinstance(frame, Ctrl):
        return {"frame": "ctrl", "item": node_to_obj(frame.item)}
    if isinstance(frame, HoleOpRight):
        return {"frame": "hole-op-right", "op": frame.op,
                "right": node_to_obj(frame.right)}
    if isinstance(frame, HoleOpLeft):
        return {"frame": "hole-op-left", "left": frame.left, "op": frame.op}
    if isinstance(frame, HoleAssign):
        return {"frame": "hole-assign", "target": frame.target}
    if isinstance(frame, HoleIf):
        return {"frame": "hole-if", "then": node_to_obj(frame.then_body),
                "else": node_to_obj(frame.else_body)}
    if isinstance(frame, HoleRead):
        return {"frame": "hole-read", "target": frame.target, "file": frame.file}
    if isinstance(frame, Unit):
        return {"frame": "unit"}
    if isinstance(frame, Value):
        return {"frame": "value", "n": frame.n}
    raise TypeError(f"not a frame: {frame!r}")


def frame_from_obj(obj: dict):
    kind = obj["frame"]
    if kind == "ctrl":
        return Ctrl(node_from_obj(obj["item"]))
    if kind == "hole-op-right":
        return HoleOpRight(obj["op"], node_from_obj(obj["right"]))
    if kind == "hole-op-left":
        return HoleOpLeft(obj["left"], obj["op"])
    if kind == "hole-assign":
        return HoleAssign(obj["target"])
    if kind == "hole-if":
        return HoleIf(node_from_obj(obj["then"]), node_from_obj(obj["else"]))
    if kind == "hole-read":
        return HoleRead(obj["target"], obj["file"])
    if kind == "unit":
        return Unit()
    if kind == "value":
        return Value(obj["n"])
    raise SpecError(f"unknown frame kind {kind!r}")


def config_to_obj(config: Configuration) -> dict:
    return {
        "mode": config.mode.value,
        "control": [frame_to_obj(f) for f in config.control],
        "env": {name: value for name, value in config.env},
        "status": {name: st for name, st in config.status},
        "files": {
            name: {"contents": list(data), "cursor": cursor}
            for name, data, cursor in config.store.entries
        },
    }


def config_from_obj(obj: dict) -> Configuration:
    store = FileStore(tuple(
        (name, tuple(entry["contents"]), entry["cursor"])
        for name, entry in sorted(obj["files"].items())
    ))
    return make_configuration(
        control=[frame_from_obj(f) for f in obj["control"]],
        env=obj["env"],
        status=obj["status"],
        store=store,
        mode=Mode.from_flag(obj["mode"]),
    )


# ---------------------------------------------------------------------------
# Choices and traces

def choice_to_obj(choice) -> dict:
    if isinstance(choice, Unique):
        return {"choice": "unique"}
    if isinstance(choice, Interleave):
        return {"choice": "interleave", "order": [list(p) for p in choice.order]}
    if isinstance(choice, ForkCount):
        return {"choice": "fork-count", "k": choice.k}
    if isinstance(choice, OraclePos):
        return {"choice": "oracle-pos", "n": choice.n}
    raise TypeError(f"not a choice: {choice!r}")


def choice_from_obj(obj: dict):
    kind = obj["choice"]
    if kind == "unique":
        return UNIQUE
    if kind == "interleave":
        return Interleave(tuple((b, a) for b, a in obj["order"]))
    if kind == "fork-count":
        return ForkCount(obj["k"])
    if kind == "oracle-pos":
        return OraclePos(obj["n"])
    raise SpecError(f"unknown choice kind {kind!r}")


def trace_to_obj(trace: Trace) -> dict:
    return {
        "start": config_to_obj(trace.start),
        "steps": [
            {
                "rule": rule_instance.rule,
                "choice": choice_to_obj(rule_instance.choice),
                "control_summary": summarize_control(config.control),
                "config": config_to_obj(config),
            }
            for rule_instance, config in trace.steps
        ],
        "outcome": trace.outcome,
    }


def trace_from_obj(obj: dict) -> Trace:
    return Trace(
        start=config_from_obj(obj["start"]),
        steps=tuple(
            (
                RuleInstance(entry["rule"], choice_from_obj(entry["choice"])),
                config_from_obj(entry["config"]),
            )
            for entry in obj["steps"]
        ),
        outcome=obj.get("outcome"),
    )


# ---------------------------------------------------------------------------
# Text formatting

def format_frame(frame) -> str:
    if isinstance(frame, Ctrl):
        if isinstance(frame.item, Stmt):
            return format_stmt(frame.item)
        return format_atom(frame.item)
    if isinstance(frame, HoleOpRight):
        return f"_ {frame.op} {format_atom(frame.right)}"
    if isinstance(frame, HoleOpLeft):
        return f"{frame.left} {frame.op} _"
    if isinstance(frame, HoleAssign):
        return f"{frame.target} = _"
    if isinstance(frame, HoleIf):
        then_text = (
            format_stmt(frame.then_body) if isinstance(frame.then_body, Stmt)
            else format_atom(frame.then_body)
        )
        else_text = (
            format_stmt(frame.else_body) if isinstance(frame.else_body, Stmt)
            else format_atom(frame.else_body)
        )
        return f"if _ then {then_text} else {else_text}"
    if isinstance(frame, HoleRead):
        return f"{frame.target} = read({frame.file}, _)"
    if isinstance(frame, Unit):
        return "()"
    if isinstance(frame, Value):
        return str(frame.n)
    raise TypeError(f"not a frame: {frame!r}")


def summarize_control(control, limit: int = 3) -> str:
    parts = [format_frame(f) for f in control[:limit]]
    if len(control) > limit:
        parts.append("…")
    return " :: ".join(parts)


def format_choice(choice) -> str:
    if isinstance(choice, Unique):
        return "-"
    if isinstance(choice, Interleave):
        return "order=" + "".join(f"({b},{a})" for b, a in choice.order)
    if isinstance(choice, ForkCount):
        return f"k={choice.k}"
    if isinstance(choice, OraclePos):
        return f"n={choice.n}"
    raise TypeError(f"not a choice: {choice!r}")


def format_step(rule_instance: RuleInstance, config: Configuration) -> str:
    env_text = ", ".join(f"{n}={v}" for n, v in config.env)
    status_text = ", ".join(f"{n}={s}" for n, s in config.status)
    return (
        f"{rule_instance.rule} [{format_choice(rule_instance.choice)}] "
        f"=> {summarize_control(config.control)} "
        f"| env={{{env_text}}} | files={{{status_text}}}"
    )


# ---------------------------------------------------------------------------
# Reports

@dataclass
class Report:
    verdict: str                     # "safe" | "unsafe" | "unknown"
    states: int | None
    normal_forms: int | None
    witness: dict | None             # trace object, present when unsafe
    exhausted: str | None
    frontier: int | None
    bounds: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    wall_time_ms: float = 0.0

    def to_obj(self) -> dict:
        return {
            "schema": SCHEMA,
            "verdict": self.verdict,
            "states": self.states,
            "normal_forms": self.normal_forms,
            "witness": self.witness,
            "exhausted": self.exhausted,
            "frontier": self.frontier,
            "bounds": self.bounds,
            "flags": self.flags,
            "wall_time_ms": self.wall_time_ms,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "Report":
        if obj.get("schema") != SCHEMA:
            raise SpecError(f"unsupported report schema {obj.get('schema')!r}")
        return cls(
            verdict=obj["verdict"],
            states=obj["states"],
            normal_forms=obj["normal_forms"],
            witness=obj["witness"],
            exhausted=obj["exhausted"],
            frontier=obj["frontier"],
            bounds=obj["bounds"],
            flags=obj["flags"],
            wall_time_ms=obj["wall_time_ms"],
        )

    def render_text(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        if self.states is not None:
            lines.append(f"states visited: {self.states}")
        if self.normal_forms is not None:
            lines.append(f"normal forms: {self.normal_forms}")
        if self.exhausted is not None:
            lines.append(f"exhausted: {self.exhausted} (frontier {self.frontier})")
        lines.append("bounds: " + " ".join(
            f"{k}={v}" for k, v in self.bounds.items()
        ))
        lines.append("flags: " + " ".join(
            f"{k}={v}" for k, v in self.flags.items()
        ))
        if self.witness is not None:
            lines.append(f"witness ({len(self.witness['steps'])} steps):")
            start = config_from_obj(self.witness["start"])
            lines.append(f"  start: {summarize_control(start.control)}")
            for entry in self.witness["steps"]:
                rule_instance = RuleInstance(
                    entry["rule"], choice_from_obj(entry["choice"]),
                )
                config = config_from_obj(entry["config"])
                lines.append("  " + format_step(rule_instance, config))
        lines.append(f"wall time: {self.wall_time_ms:.1f} ms")
        return "\n".join(lines) + "\n"
