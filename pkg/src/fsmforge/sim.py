"""Abstract execution of a woven contract.

Runs the modifier chain and transition body semantics (state requires,
guard conjunction, lock, counter, admin set, timed firing) against a
speculative copy of the session; any failed check discards the copy so
a reverted call leaves the session untouched, mirroring transactional
rollback. Statement fragments are opaque and never executed; the modeled
effect of a transition is its state change.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from . import guards as g
from .model import Transition
from .weave import WovenContract


class SimUsageError(Exception):
    pass


class TimeBackwardError(SimUsageError):
    pass


class MissingOverride(Exception):
    """Opaque guard reached without a scenario-supplied override."""


class UnboundVariable(SimUsageError):
    def __init__(self, name: str):
        super().__init__(f"guard variable '{name}' is not bound in env")
        self.name = name


class RevertReason(Enum):
    LOCKED = "Locked"
    WRONG_STATE = "WrongState"
    GUARD_FAILED = "GuardFailed"
    COUNTER_MISMATCH = "CounterMismatch"
    NOT_ADMIN = "NotAdmin"
    MISSING_OVERRIDE = "MissingOverride"
    UNKNOWN_TRANSITION = "UnknownTransition"


@dataclass(frozen=True)
class SimConfig:
    creation_time: int = 0
    deployer: str = "deployer"
    initial_time: Optional[int] = None  # defaults to creation_time


@dataclass(frozen=True)
class Invocation:
    transition: str
    sender: str
    next_transition_number: Optional[int] = None
    guard_overrides: dict[int, bool] = field(default_factory=dict)
    timed_guard_overrides: dict[str, bool] = field(default_factory=dict)
    reentry_probe: Optional["Invocation"] = None


@dataclass(frozen=True)
class Outcome:
    executed: bool
    revert_reason: Optional[RevertReason] = None
    fired_timed: tuple[str, ...] = ()
    events: tuple[str, ...] = ()
    probe: Optional["Outcome"] = None

    @property
    def reverted(self) -> bool:
        return not self.executed


def _revert(reason: RevertReason) -> Outcome:
    return Outcome(executed=False, revert_reason=reason)


@dataclass
class _State:
    """The mutable portion of a session, copied per invocation."""

    current_state: str
    locked: bool
    transition_counter: int
    is_admin: frozenset[str]
    num_admins: int

    def copy(self) -> "_State":
        return replace(self)


@dataclass
class SimSession:
    woven: WovenContract
    current_state: str
    creation_time: int
    now: int
    locked: bool = False
    transition_counter: int = 0
    is_admin: frozenset[str] = frozenset()
    num_admins: int = 0
    env: dict[str, int] = field(default_factory=dict)
    log: list[tuple[Invocation, Outcome]] = field(default_factory=list)

    def snapshot(self) -> dict:
        return {
            "state": self.current_state,
            "counter": self.transition_counter,
            "admins": sorted(self.is_admin),
            "now": self.now,
        }

    def _take(self) -> _State:
        return _State(self.current_state, self.locked, self.transition_counter,
                      self.is_admin, self.num_admins)

    def _commit(self, state: _State):
        self.current_state = state.current_state
        self.locked = state.locked
        self.transition_counter = state.transition_counter
        self.is_admin = state.is_admin
        self.num_admins = state.num_admins


def new_session(woven: WovenContract, config: SimConfig = SimConfig()) -> SimSession:
    model = woven.base
    if model.initial_state is None:
        raise SimUsageError("model has no initial state")
    initial_time = config.creation_time if config.initial_time is None else config.initial_time
    if initial_time < config.creation_time:
        raise SimUsageError("initial_time must not precede creation_time")
    session = SimSession(
        woven=woven,
        current_state=model.initial_state,
        creation_time=config.creation_time,
        now=initial_time,
    )
    if model.plugins.access_control:
        session.is_admin = frozenset({config.deployer})
        session.num_admins = 1
    return session


def advance_time(session: SimSession, to: int) -> SimSession:
    if to < session.now:
        raise TimeBackwardError(f"cannot move the clock back from {session.now} to {to}")
    session.now = to
    return session


def _truthy(value) -> bool:
    return bool(value)


def _div_trunc(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero in guard")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _mod_trunc(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("modulo by zero in guard")
    return a - _div_trunc(a, b) * b


def eval_guard(ast: g.GuardAst, now: int, creation_time: int, env: dict[str, int],
               override: Optional[bool] = None):
    """Evaluate a guard AST; ints and bools, division truncating toward zero.

    Opaque nodes return the override, or raise MissingOverride without one.
    """
    if isinstance(ast, g.Opaque):
        if override is None:
            raise MissingOverride(ast.text)
        return override
    if isinstance(ast, g.IntLit):
        return ast.value
    if isinstance(ast, g.TimeLit):
        return ast.seconds
    if isinstance(ast, g.Now):
        return now
    if isinstance(ast, g.CreationTime):
        return creation_time
    if isinstance(ast, g.Var):
        if ast.name not in env:
            raise UnboundVariable(ast.name)
        return env[ast.name]
    if isinstance(ast, g.Unary):
        value = eval_guard(ast.child, now, creation_time, env)
        return (not _truthy(value)) if ast.op == "!" else -int(value)
    if isinstance(ast, g.Binary):
        left = eval_guard(ast.left, now, creation_time, env)
        if ast.op == "&&":
            return _truthy(left) and _truthy(eval_guard(ast.right, now, creation_time, env))
        if ast.op == "||":
            return _truthy(left) or _truthy(eval_guard(ast.right, now, creation_time, env))
        right = eval_guard(ast.right, now, creation_time, env)
        left, right = int(left), int(right)
        if ast.op == "+":
            return left + right
        if ast.op == "-":
            return left - right
        if ast.op == "*":
            return left * right
        if ast.op == "/":
            return _div_trunc(left, right)
        if ast.op == "%":
            return _mod_trunc(left, right)
        if ast.op == "<":
            return left < right
        if ast.op == "<=":
            return left <= right
        if ast.op == ">":
            return left > right
        if ast.op == ">=":
            return left >= right
        if ast.op == "==":
            return left == right
        if ast.op == "!=":
            return left != right
    raise SimUsageError(f"unknown guard node {ast!r}")


def _find_transition(woven: WovenContract, name: str) -> Optional[Transition]:
    for t in woven.base.transitions:
        if t.name == name:
            return t
    return None


def _run_timed(session: SimSession, state: _State, call: Invocation) -> list[str] | Outcome:
    """Fire due timed transitions against the speculative state."""
    fired: list[str] = []
    for tt in session.woven.base.timed_transitions:
        if state.current_state != tt.from_state:
            continue
        if session.now < session.creation_time + tt.time_offset_seconds:
            continue
        if tt.guard is not None:
            ast = g.parse_guard_expr(tt.guard.text)
            override = call.timed_guard_overrides.get(tt.name)
            try:
                holds = _truthy(eval_guard(ast, session.now, session.creation_time,
                                           session.env, override))
            except MissingOverride:
                return _revert(RevertReason.MISSING_OVERRIDE)
            if not holds:
                continue
        state.current_state = tt.to_state
        fired.append(tt.name)
    return fired


def _execute(session: SimSession, state: _State, call: Invocation, depth: int) -> Outcome:
    plugins = session.woven.base.plugins
    t = _find_transition(session.woven, call.transition)
    if t is None:
        return _revert(RevertReason.UNKNOWN_TRANSITION)
    if plugins.counter and call.next_transition_number is None:
        raise SimUsageError(
            f"counter plugin is enabled; call to '{call.transition}' needs a transition number")

    if plugins.locking:
        if state.locked:
            return _revert(RevertReason.LOCKED)
        state.locked = True

    fired: tuple[str, ...] = ()
    if plugins.timed:
        result = _run_timed(session, state, call)
        if isinstance(result, Outcome):
            return result
        fired = tuple(result)

    if plugins.counter:
        if call.next_transition_number != state.transition_counter:
            return _revert(RevertReason.COUNTER_MISMATCH)
        state.transition_counter += 1

    if plugins.access_control and "admin" in t.tags and call.sender not in state.is_admin:
        return _revert(RevertReason.NOT_ADMIN)

    if state.current_state != t.from_state:
        return _revert(RevertReason.WRONG_STATE)
    for i, guard in enumerate(t.guards):
        ast = g.parse_guard_expr(guard.text)
        try:
            holds = _truthy(eval_guard(ast, session.now, session.creation_time,
                                       session.env, call.guard_overrides.get(i)))
        except MissingOverride:
            return _revert(RevertReason.MISSING_OVERRIDE)
        if not holds:
            return _revert(RevertReason.GUARD_FAILED)

    probe_outcome: Optional[Outcome] = None
    if call.reentry_probe is not None and depth == 0:
        # A reentrant callback arrives mid-body, while the lock (if any) is held.
        probe = call.reentry_probe
        if plugins.counter and probe.next_transition_number is None:
            probe = replace(probe, next_transition_number=state.transition_counter)
        probe_state = state.copy()
        probe_outcome = _execute(session, probe_state, probe, depth + 1)
        if probe_outcome.executed:
            # No lock to stop it: the probe's effects land in the caller's
            # intermediate state. This is the reentrancy vulnerability.
            _assign(state, probe_state)

    state.current_state = t.to_state

    if plugins.locking:
        state.locked = False

    events: tuple[str, ...] = ()
    if plugins.events and "event" in t.tags:
        events = (f"Event{t.name}",)

    return Outcome(executed=True, fired_timed=fired, events=events, probe=probe_outcome)


def _assign(dst: _State, src: _State):
    dst.current_state = src.current_state
    dst.locked = src.locked
    dst.transition_counter = src.transition_counter
    dst.is_admin = src.is_admin
    dst.num_admins = src.num_admins


def invoke(session: SimSession, call: Invocation) -> Outcome:
    """Run one invocation; commits on success, rolls back fully on revert."""
    state = session._take()
    outcome = _execute(session, state, call, depth=0)
    if outcome.executed:
        session._commit(state)
    session.log.append((call, outcome))
    return outcome


def admin_call(session: SimSession, action: str, target: str, sender: str) -> Outcome:
    """addAdmin/removeAdmin management calls of the access-control plugin."""
    if not session.woven.base.plugins.access_control:
        raise SimUsageError("access_control plugin is not enabled")
    if action not in ("add", "remove"):
        raise SimUsageError(f"unknown admin action '{action}'")
    if sender not in session.is_admin:
        return _revert(RevertReason.NOT_ADMIN)
    if action == "add":
        if target in session.is_admin:
            return _revert(RevertReason.GUARD_FAILED)
        session.is_admin = session.is_admin | {target}
        session.num_admins += 1
    else:
        if target not in session.is_admin:
            return _revert(RevertReason.GUARD_FAILED)
        if session.num_admins <= 1:
            return _revert(RevertReason.GUARD_FAILED)
        session.is_admin = session.is_admin - {target}
        session.num_admins -= 1
    return Outcome(executed=True)
