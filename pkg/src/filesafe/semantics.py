"""The small-step rules.

`step` maps a configuration to every immediate successor, each labeled
with the rule that produced it and the nondeterministic choice it made.
Rules are dispatched so that at most one rule matches any non-fork head;
the fork family and the oracle read are the only sources of multiple
successors.  An empty successor list together with a non-final
classification is how stuckness shows up; nothing raises for it.

Rule names, with their choice kinds where not Unique:

  lookup               variable to its bound value
  op-freeze-left       start evaluating the left operand of a binop
  op-freeze-right      start evaluating the right operand
  op-apply             combine two literals (division by zero is stuck)
  and-desugar          a && b  ->  if a then b else 0
  or-desugar           a || b  ->  if a then 1 else b
  assign-freeze        start evaluating the assigned value
  assign-apply         bind the target, leave the value on the control
  if-freeze            start evaluating the guard
  if-true / if-false   take a branch on guard exactly 1 / exactly 0
  while-unroll         one conditional unrolling
  open / close         flip the file status, open resets the cursor
  read-nd              whilef read; cursor mode advances the cursor
                       (Unique), oracle mode enumerates every position
                       (OraclePos)
  read-at              safe read at an evaluated position
  seq                  split a sequence into two control entries
  fork                 one successor per branch interleaving (Interleave)
  forkfor              one successor per repetition count (ForkCount)
  forkif               wrap every arm in a guarded if, then fork
  skip                 drop the head
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import UnknownFileError
from .machine import (
    CLOSED, OPEN, Configuration, Ctrl, FileStore, HoleAssign, HoleIf,
    HoleOpLeft, HoleOpRight, HoleRead, Value, ctrl, env_bind, env_get,
    normalize_control, set_status, status_of,
)
from .syntax import (
    And, Assign, AtomStmt, BinOp, Fork, ForkFor, ForkIf, If, IntLit, Mode,
    Open, Close, Or, ReadAt, ReadND, Seq, Skip, Var, While, atoms_of,
)


class ReadMode(enum.Enum):
    """How a whilef read picks its position."""

    CURSOR = "cursor"
    ORACLE = "oracle"

    @classmethod
    def from_flag(cls, text: str) -> "ReadMode":
        for m in cls:
            if m.value == text:
                return m
        raise ValueError(f"unknown read mode {text!r}")


@dataclass(frozen=True)
class Bounds:
    """Search limits; forkfor_max caps the repetition choice."""

    forkfor_max: int = 2
    max_steps_per_path: int = 10_000
    max_states: int = 1_000_000

    def __post_init__(self):
        if self.forkfor_max < 0:
            raise ValueError("forkfor_max must be >= 0")
        if self.max_steps_per_path <= 0:
            raise ValueError("max_steps_per_path must be positive")
        if self.max_states <= 0:
            raise ValueError("max_states must be positive")


# ---------------------------------------------------------------------------
# Choices

@dataclass(frozen=True)
class Unique:
    """The only possible outcome of a deterministic rule."""


@dataclass(frozen=True)
class Interleave:
    """A chosen branch interleaving: (branch index, atom index) pairs."""

    order: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class ForkCount:
    """A chosen forkfor repetition count."""

    k: int


@dataclass(frozen=True)
class OraclePos:
    """A chosen oracle read position."""

    n: int


Choice = Unique | Interleave | ForkCount | OraclePos

UNIQUE = Unique()


@dataclass(frozen=True)
class RuleInstance:
    rule: str
    choice: Choice = UNIQUE


# ---------------------------------------------------------------------------
# Reads

def eval_phi(store: FileStore, file: str, n: int) -> int:
    """The value at position n, or the 0 sentinel at or past the end."""
    contents = store.contents(file)  # raises UnknownFileError
    if 0 <= n < len(contents):
        return contents[n]
    return 0


# ---------------------------------------------------------------------------
# Interleavings

def enumerate_interleavings(branches: list[list] | tuple) -> list[Interleave]:
    """Every order-preserving shuffle of the branches' atom lists.

    Shuffles are sequences of (branch, atom) index pairs, lexicographic
    in the branch index sequence and duplicate-free.  Empty branches
    contribute nothing.  The count is multinomial:
    (sum of lengths)! / product(lengths!).
    """
    sizes = [len(b) for b in branches]
    total = sum(sizes)
    out: list[Interleave] = []
    order: list[tuple[int, int]] = []
    taken = [0] * len(sizes)

    def rec():
        if len(order) == total:
            out.append(Interleave(tuple(order)))
            return
        for i in range(len(sizes)):
            if taken[i] < sizes[i]:
                order.append((i, taken[i]))
                taken[i] += 1
                rec()
                taken[i] -= 1
                order.pop()

    rec()
    return out


# ---------------------------------------------------------------------------
# Step

_COMPARISONS = {
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _apply_op(op: str, a: int, b: int) -> int | None:
    """Literal arithmetic; None when the operation has no result."""
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            return None
        # Truncation toward zero, not Python floor division.
        return -(-a // b) if (a < 0) != (b < 0) else a // b
    return 1 if _COMPARISONS[op](a, b) else 0


def step(
    config: Configuration,
    bounds: Bounds,
    *,
    read_mode: ReadMode = ReadMode.CURSOR,
    truthy: bool = False,
) -> list[tuple[RuleInstance, Configuration]]:
    """All immediate successors of `config`, in a fixed order.

    `read_mode` selects the whilef read interpretation; `truthy` relaxes
    guard strictness to treat any nonzero guard as true (off by default).
    """
    head, *rest = config.control
    if not isinstance(head, Ctrl):
        return []  # a value, unit, or a hole nothing will ever fill

    def succ(rule, control, env=None, status=None, store=None, choice=UNIQUE):
        return (
            RuleInstance(rule, choice),
            Configuration(
                control=normalize_control(control),
                env=config.env if env is None else env,
                status=config.status if status is None else status,
                store=config.store if store is None else store,
                mode=config.mode,
            ),
        )

    item = head.item
    match item:
        case Seq(s1, s2):
            return [succ("seq", [ctrl(s1), ctrl(s2), *rest])]

        case Fork(branches):
            atom_lists = [atoms_of(b) for b in branches]
            out = []
            for inter in enumerate_interleavings(atom_lists):
                laid = [Ctrl(atom_lists[i][j]) for i, j in inter.order]
                out.append(succ("fork", [*laid, *rest], choice=inter))
            return out

        case ForkFor(body):
            out = []
            for k in range(bounds.forkfor_max + 1):
                if k == 0:
                    control = [Ctrl(Skip()), *rest]
                else:
                    control = [Ctrl(Fork((body,) * k)), *rest]
                out.append(succ("forkfor", control, choice=ForkCount(k)))
            return out

        case ForkIf(arms):
            branches = tuple(
                AtomStmt(If(guard, body, Skip())) for guard, body in arms
            )
            return [succ("forkif", [Ctrl(Fork(branches)), *rest])]

        case Var(name):
            value = env_get(config, name)
            if value is None:
                return []
            return [succ("lookup", [Value(value), *rest])]

        case BinOp(op, left, right):
            if not isinstance(left, IntLit):
                return [succ(
                    "op-freeze-left",
                    [ctrl(left), HoleOpRight(op, right), *rest],
                )]
            if not isinstance(right, IntLit):
                return [succ(
                    "op-freeze-right",
                    [ctrl(right), HoleOpLeft(left.n, op), *rest],
                )]
            result = _apply_op(op, left.n, right.n)
            if result is None:
                return []
            return [succ("op-apply", [Value(result), *rest])]

        case And(left, right):
            return [succ("and-desugar", [Ctrl(If(left, right, IntLit(0))), *rest])]

        case Or(left, right):
            return [succ("or-desugar", [Ctrl(If(left, IntLit(1), right)), *rest])]

        case Assign(Var(name), value):
            if not isinstance(value, IntLit):
                return [succ(
                    "assign-freeze",
                    [ctrl(value), HoleAssign(name), *rest],
                )]
            return [succ(
                "assign-apply",
                [Value(value.n), *rest],
                env=env_bind(config.env, name, value.n),
            )]

        case If(cond, then_body, else_body):
            if not isinstance(cond, IntLit):
                return [succ(
                    "if-freeze",
                    [ctrl(cond), HoleIf(then_body, else_body), *rest],
                )]
            if cond.n == 1 or (truthy and cond.n != 0):
                return [succ("if-true", [ctrl(then_body), *rest])]
            if cond.n == 0:
                return [succ("if-false", [ctrl(else_body), *rest])]
            return []  # guard strictness: any other value is stuck

        case While(cond, body):
            unrolled = If(
                cond,
                Seq(AtomStmt(body), AtomStmt(While(cond, body))),
                Skip(),
            )
            return [succ("while-unroll", [Ctrl(unrolled), *rest])]

        case Open(f):
            if status_of(config, f) != CLOSED or not config.store.has(f):
                return []
            return [succ(
                "open", rest,
                status=set_status(config.status, f, OPEN),
                store=config.store.with_cursor(f, 0),
            )]

        case Close(f):
            if status_of(config, f) != OPEN:
                return []
            return [succ("close", rest, status=set_status(config.status, f, CLOSED))]

        case ReadND(target, pointer, f):
            if config.mode is not Mode.WHILEF:
                return []
            if status_of(config, f) != OPEN or not config.store.has(f):
                return []
            if read_mode is ReadMode.CURSOR:
                n = config.store.cursor(f)
                env = env_bind(config.env, pointer, n)
                env = env_bind(env, target, eval_phi(config.store, f, n))
                return [succ(
                    "read-nd", rest, env=env,
                    store=config.store.with_cursor(f, n + 1),
                )]
            out = []
            for n in range(len(config.store.contents(f)) + 1):
                env = env_bind(config.env, pointer, n)
                env = env_bind(env, target, eval_phi(config.store, f, n))
                out.append(succ("read-nd", rest, env=env, choice=OraclePos(n)))
            return out

        case ReadAt(target, f, pos):
            if config.mode is not Mode.SAFE:
                return []
            if not isinstance(pos, IntLit):
                # Position expressions follow the operand freeze discipline.
                return [succ("read-at", [ctrl(pos), HoleRead(target, f), *rest])]
            if status_of(config, f) != OPEN or not config.store.has(f):
                return []
            if pos.n < 0:
                return []
            env = env_bind(config.env, target, eval_phi(config.store, f, pos.n))
            return [succ("read-at", rest, env=env)]

        case Skip():
            return [succ("skip", rest)]

    return []
