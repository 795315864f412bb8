"""Line-oriented scenario scripts driving the simulator.

Grammar (one step per line, `#` starts a comment):

    time <seconds>
    env <ident>=<int> [...]
    call <transition> as <actor> [n=<int>] [g<k>=<true|false> ...]
        [reenter=<transition>] expect <ok|revert:<Reason>>
    admin <add|remove> <actor> by <actor> expect <ok|revert>
    assert state=<StateId> | counter=<int> | admin(<actor>)=<true|false>
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .sim import (
    Invocation,
    Outcome,
    RevertReason,
    SimConfig,
    SimSession,
    advance_time,
    admin_call,
    invoke,
    new_session,
)
from .weave import WovenContract


class ScenarioSyntaxError(Exception):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Step:
    line_no: int
    text: str
    kind: str  # time | env | call | admin | assert
    payload: dict


@dataclass
class StepResult:
    step: Step
    ok: bool
    detail: str = ""
    outcome: Optional[Outcome] = None


@dataclass
class Report:
    results: list[StepResult] = field(default_factory=list)
    final_snapshot: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    @property
    def failures(self) -> list[StepResult]:
        return [r for r in self.results if not r.ok]


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_REASONS = {r.value: r for r in RevertReason}


def _parse_bool(line_no: int, text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise ScenarioSyntaxError(line_no, f"expected true or false, got '{text}'")


def _parse_int(line_no: int, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ScenarioSyntaxError(line_no, f"expected an integer, got '{text}'") from None


def _parse_call(line_no: int, parts: list[str]) -> dict:
    if len(parts) < 3 or parts[1] != "as":
        raise ScenarioSyntaxError(line_no, "call syntax: call <transition> as <actor> ...")
    payload = {
        "transition": parts[0],
        "sender": parts[2],
        "n": None,
        "overrides": {},
        "reenter": None,
        "expect_ok": None,
        "expect_reason": None,
    }
    rest = parts[3:]
    i = 0
    while i < len(rest):
        word = rest[i]
        if word == "expect":
            if i + 1 >= len(rest) or i + 2 != len(rest):
                raise ScenarioSyntaxError(line_no, "expect must be last: expect <ok|revert:<Reason>>")
            expectation = rest[i + 1]
            if expectation == "ok":
                payload["expect_ok"] = True
            elif expectation.startswith("revert:"):
                reason = expectation[len("revert:"):]
                if reason not in _REASONS:
                    raise ScenarioSyntaxError(line_no, f"unknown revert reason '{reason}'")
                payload["expect_ok"] = False
                payload["expect_reason"] = _REASONS[reason]
            elif expectation == "revert":
                payload["expect_ok"] = False
            else:
                raise ScenarioSyntaxError(line_no, f"bad expectation '{expectation}'")
            i += 2
            continue
        if "=" not in word:
            raise ScenarioSyntaxError(line_no, f"unexpected token '{word}'")
        key, value = word.split("=", 1)
        if key == "n":
            payload["n"] = _parse_int(line_no, value)
        elif key == "reenter":
            payload["reenter"] = value
        elif re.fullmatch(r"g\d+", key):
            payload["overrides"][int(key[1:])] = _parse_bool(line_no, value)
        else:
            raise ScenarioSyntaxError(line_no, f"unknown call option '{key}'")
        i += 1
    if payload["expect_ok"] is None:
        raise ScenarioSyntaxError(line_no, "call step needs an 'expect' clause")
    return payload


def _parse_admin(line_no: int, parts: list[str]) -> dict:
    if (len(parts) != 6 or parts[0] not in ("add", "remove")
            or parts[2] != "by" or parts[4] != "expect"):
        raise ScenarioSyntaxError(line_no, "admin syntax: admin <add|remove> <actor> by <actor> expect <ok|revert>")
    if parts[5] not in ("ok", "revert"):
        raise ScenarioSyntaxError(line_no, f"bad expectation '{parts[5]}'")
    return {"action": parts[0], "target": parts[1], "sender": parts[3],
            "expect_ok": parts[5] == "ok"}


def _parse_assert(line_no: int, parts: list[str]) -> dict:
    if len(parts) != 1 or "=" not in parts[0]:
        raise ScenarioSyntaxError(line_no, "assert syntax: assert <key>=<value>")
    key, value = parts[0].split("=", 1)
    admin_match = re.fullmatch(r"admin\((\w+)\)", key)
    if key == "state":
        if not _IDENT.match(value):
            raise ScenarioSyntaxError(line_no, f"bad state name '{value}'")
        return {"check": "state", "value": value}
    if key == "counter":
        return {"check": "counter", "value": _parse_int(line_no, value)}
    if admin_match:
        return {"check": "admin", "actor": admin_match.group(1),
                "value": _parse_bool(line_no, value)}
    raise ScenarioSyntaxError(line_no, f"unknown assertion '{key}'")


def parse_step(line_no: int, line: str) -> Optional[Step]:
    """Parse one scenario line; None for blanks and comments."""
    text = line.split("#", 1)[0].strip()
    if not text:
        return None
    parts = text.split()
    kind, rest = parts[0], parts[1:]
    if kind == "time":
        if len(rest) != 1:
            raise ScenarioSyntaxError(line_no, "time syntax: time <seconds>")
        payload = {"to": _parse_int(line_no, rest[0])}
    elif kind == "env":
        bindings = {}
        if not rest:
            raise ScenarioSyntaxError(line_no, "env syntax: env <ident>=<int> [...]")
        for word in rest:
            if "=" not in word:
                raise ScenarioSyntaxError(line_no, f"bad env binding '{word}'")
            name, value = word.split("=", 1)
            if not _IDENT.match(name):
                raise ScenarioSyntaxError(line_no, f"bad env name '{name}'")
            bindings[name] = _parse_int(line_no, value)
        payload = {"bindings": bindings}
    elif kind == "call":
        payload = _parse_call(line_no, rest)
    elif kind == "admin":
        payload = _parse_admin(line_no, rest)
    elif kind == "assert":
        payload = _parse_assert(line_no, rest)
    else:
        raise ScenarioSyntaxError(line_no, f"unknown step '{kind}'")
    return Step(line_no=line_no, text=text, kind=kind, payload=payload)


def parse_scenario(text: str) -> list[Step]:
    steps = []
    for line_no, line in enumerate(text.split("\n"), start=1):
        step = parse_step(line_no, line)
        if step is not None:
            steps.append(step)
    return steps


def run_step(session: SimSession, step: Step) -> StepResult:
    p = step.payload
    if step.kind == "time":
        if p["to"] < session.now:
            return StepResult(step, ok=False,
                              detail=f"time {p['to']} is before now={session.now}")
        advance_time(session, p["to"])
        return StepResult(step, ok=True, detail=f"now={session.now}")
    if step.kind == "env":
        session.env.update(p["bindings"])
        return StepResult(step, ok=True, detail="env updated")
    if step.kind == "call":
        call = Invocation(
            transition=p["transition"],
            sender=p["sender"],
            next_transition_number=p["n"],
            guard_overrides=dict(p["overrides"]),
            reentry_probe=(None if p["reenter"] is None
                           else Invocation(transition=p["reenter"], sender=p["sender"])),
        )
        outcome = invoke(session, call)
        return StepResult(step, ok=_expectation_met(p, outcome),
                          detail=_describe(outcome), outcome=outcome)
    if step.kind == "admin":
        outcome = admin_call(session, p["action"], p["target"], p["sender"])
        ok = outcome.executed == p["expect_ok"]
        return StepResult(step, ok=ok, detail=_describe(outcome), outcome=outcome)
    if step.kind == "assert":
        if p["check"] == "state":
            ok = session.current_state == p["value"]
            return StepResult(step, ok=ok, detail=f"state={session.current_state}")
        if p["check"] == "counter":
            ok = session.transition_counter == p["value"]
            return StepResult(step, ok=ok, detail=f"counter={session.transition_counter}")
        ok = (p["actor"] in session.is_admin) == p["value"]
        return StepResult(step, ok=ok,
                          detail=f"admin({p['actor']})={p['actor'] in session.is_admin}")
    raise AssertionError(f"unhandled step kind {step.kind}")


def _expectation_met(p: dict, outcome: Outcome) -> bool:
    if p["expect_ok"]:
        return outcome.executed
    if outcome.executed:
        return False
    return p["expect_reason"] is None or outcome.revert_reason == p["expect_reason"]


def _describe(outcome: Outcome) -> str:
    if outcome.executed:
        extra = ""
        if outcome.fired_timed:
            extra += f" fired_timed={list(outcome.fired_timed)}"
        if outcome.events:
            extra += f" events={list(outcome.events)}"
        if outcome.probe is not None:
            extra += f" probe={_describe(outcome.probe)}"
        return "Executed" + extra
    detail = f"Reverted({outcome.revert_reason.value})"
    if outcome.probe is not None:
        detail += f" probe={_describe(outcome.probe)}"
    return detail


def run_scenario(woven: WovenContract, text: str,
                 config: SimConfig = SimConfig()) -> Report:
    """Parse and execute a scenario; raises ScenarioSyntaxError on bad scripts."""
    steps = parse_scenario(text)
    session = new_session(woven, config)
    report = Report()
    for step in steps:
        report.results.append(run_step(session, step))
    report.final_snapshot = session.snapshot()
    return report
