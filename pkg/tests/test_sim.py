import random
from dataclasses import replace

import pytest

from fsmforge.dsl import parse_dsl
from fsmforge.model import (
    ContractModel,
    Fragment,
    PluginConfig,
    TimedTransition,
    Transition,
)
from fsmforge.sim import (
    Invocation,
    MissingOverride,
    RevertReason,
    SimConfig,
    SimUsageError,
    TimeBackwardError,
    UnboundVariable,
    admin_call,
    advance_time,
    eval_guard,
    invoke,
    new_session,
)
from fsmforge.guards import parse_guard_expr
from fsmforge.weave import weave


def build(transitions, timed_transitions=(), **plugin_flags):
    model = ContractModel(
        name="S", states=("A", "B", "C"), initial_state="A",
        transitions=tuple(transitions),
        timed_transitions=tuple(timed_transitions),
        plugins=PluginConfig(**plugin_flags))
    return weave(model)


def t(name, frm, to, guard=None, tags=()):
    guards = (Fragment(guard, "expr"),) if guard else ()
    return Transition(name, frm, to, guards=guards, tags=tuple(tags))


def test_basic_state_machine():
    woven = build([t("ab", "A", "B"), t("bc", "B", "C")])
    s = new_session(woven)
    assert s.current_state == "A"
    assert invoke(s, Invocation("bc", "u")).revert_reason == RevertReason.WRONG_STATE
    assert invoke(s, Invocation("ab", "u")).executed
    assert s.current_state == "B"
    assert invoke(s, Invocation("bc", "u")).executed
    assert s.current_state == "C"


def test_unknown_transition_reverts():
    woven = build([t("ab", "A", "B")])
    s = new_session(woven)
    out = invoke(s, Invocation("nope", "u"))
    assert out.revert_reason == RevertReason.UNKNOWN_TRANSITION
    assert s.current_state == "A"


def test_guard_failure_and_env():
    woven = build([t("ab", "A", "B", guard="k > 3")])
    s = new_session(woven)
    s.env["k"] = 1
    assert invoke(s, Invocation("ab", "u")).revert_reason == RevertReason.GUARD_FAILED
    s.env["k"] = 5
    assert invoke(s, Invocation("ab", "u")).executed


def test_opaque_guard_needs_override():
    woven = build([t("ab", "A", "B", guard="balances[msg.sender] > 0")])
    s = new_session(woven)
    out = invoke(s, Invocation("ab", "u"))
    assert out.revert_reason == RevertReason.MISSING_OVERRIDE
    assert invoke(s, Invocation("ab", "u", guard_overrides={0: False})
                  ).revert_reason == RevertReason.GUARD_FAILED
    assert invoke(s, Invocation("ab", "u", guard_overrides={0: True})).executed


def test_unbound_variable_is_a_usage_error():
    woven = build([t("ab", "A", "B", guard="mystery > 0")])
    s = new_session(woven)
    with pytest.raises(UnboundVariable):
        invoke(s, Invocation("ab", "u"))


def test_counter_sequencing():
    woven = build([t("aa", "A", "A")], counter=True)
    s = new_session(woven)
    with pytest.raises(SimUsageError):
        invoke(s, Invocation("aa", "u"))  # missing n
    assert invoke(s, Invocation("aa", "u", 1)).revert_reason == RevertReason.COUNTER_MISMATCH
    assert invoke(s, Invocation("aa", "u", 0)).executed
    assert invoke(s, Invocation("aa", "u", 0)).revert_reason == RevertReason.COUNTER_MISMATCH
    assert invoke(s, Invocation("aa", "u", 1)).executed
    assert s.transition_counter == 2


def test_counter_rolls_back_on_revert():
    woven = build([t("ab", "A", "B", guard="k > 0")], counter=True)
    s = new_session(woven)
    s.env["k"] = 0
    assert invoke(s, Invocation("ab", "u", 0)).reverted
    assert s.transition_counter == 0


def test_locking_blocks_reentry_probe():
    woven = build([t("aa", "A", "A")], locking=True)
    s = new_session(woven)
    out = invoke(s, Invocation("aa", "u", reentry_probe=Invocation("aa", "u")))
    assert out.executed
    assert out.probe is not None and out.probe.revert_reason == RevertReason.LOCKED
    assert not s.locked


def test_reentry_executes_without_locking():
    woven = build([t("aa", "A", "A")], counter=True)
    s = new_session(woven)
    out = invoke(s, Invocation("aa", "u", 0, reentry_probe=Invocation("aa", "u")))
    assert out.executed and out.probe.executed
    assert s.transition_counter == 2  # probe effect merged into the caller


def test_probe_depth_is_one():
    woven = build([t("aa", "A", "A")])
    s = new_session(woven)
    probe = Invocation("aa", "u", reentry_probe=Invocation("aa", "u"))
    out = invoke(s, Invocation("aa", "u", reentry_probe=probe))
    assert out.probe.executed
    assert out.probe.probe is None  # nested probe not executed


def test_admin_tag_enforced():
    woven = build([t("aa", "A", "A", tags=("admin",))], access_control=True)
    s = new_session(woven, SimConfig(deployer="boss"))
    assert invoke(s, Invocation("aa", "mallory")).revert_reason == RevertReason.NOT_ADMIN
    assert invoke(s, Invocation("aa", "boss")).executed


def test_admin_management():
    woven = build([t("aa", "A", "A")], access_control=True)
    s = new_session(woven, SimConfig(deployer="boss"))
    assert admin_call(s, "add", "alice", "mallory").revert_reason == RevertReason.NOT_ADMIN
    assert admin_call(s, "add", "boss", "boss").revert_reason == RevertReason.GUARD_FAILED
    assert admin_call(s, "add", "alice", "boss").executed
    assert s.num_admins == 2
    assert admin_call(s, "remove", "mallory", "boss").revert_reason == RevertReason.GUARD_FAILED
    assert admin_call(s, "remove", "boss", "alice").executed
    assert admin_call(s, "remove", "alice", "alice").revert_reason == RevertReason.GUARD_FAILED
    assert s.num_admins == 1


def test_admin_call_requires_plugin():
    woven = build([t("aa", "A", "A")])
    s = new_session(woven)
    with pytest.raises(SimUsageError):
        admin_call(s, "add", "x", "y")


def test_time_cannot_go_backward():
    woven = build([t("aa", "A", "A")])
    s = new_session(woven, SimConfig(initial_time=50))
    advance_time(s, 70)
    with pytest.raises(TimeBackwardError):
        advance_time(s, 60)


def test_initial_time_before_creation_rejected():
    woven = build([t("aa", "A", "A")])
    with pytest.raises(SimUsageError):
        new_session(woven, SimConfig(creation_time=100, initial_time=50))


# --- timed transitions ----------------------------------------------------


def timed_chain(guard_bc=None):
    return build(
        [t("aa", "A", "A"), t("bb", "B", "B"), t("cc", "C", "C")],
        timed_transitions=[
            TimedTransition("ab", "A", "B", 100),
            TimedTransition("bc", "B", "C", 200,
                            guard=Fragment(guard_bc, "expr") if guard_bc else None),
        ],
        timed=True,
    )


def test_timed_fires_before_body_state_check():
    s = new_session(timed_chain())
    advance_time(s, 100)
    # body expects B, which only holds after the timed firing
    out = invoke(s, Invocation("bb", "u"))
    assert out.executed and out.fired_timed == ("ab",)
    assert s.current_state == "B"


def test_timed_cascade_fires_ascending_at_most_once():
    s = new_session(timed_chain())
    advance_time(s, 500)
    out = invoke(s, Invocation("cc", "u"))
    assert out.executed and out.fired_timed == ("ab", "bc")
    assert s.current_state == "C"


def test_timed_not_due_does_not_fire():
    s = new_session(timed_chain())
    advance_time(s, 99)
    out = invoke(s, Invocation("aa", "u"))
    assert out.executed and out.fired_timed == ()
    assert s.current_state == "A"


def test_timed_guard_gates_the_firing():
    s = new_session(timed_chain(guard_bc="k >= 2"))
    s.env["k"] = 0
    advance_time(s, 500)
    out = invoke(s, Invocation("bb", "u"))
    assert out.executed and out.fired_timed == ("ab",)
    s.env["k"] = 2
    out = invoke(s, Invocation("cc", "u"))
    assert out.executed and out.fired_timed == ("bc",)


def test_timed_firings_roll_back_with_the_body():
    s = new_session(timed_chain())
    advance_time(s, 100)
    out = invoke(s, Invocation("aa", "u"))  # body requires A, timed moved to B
    assert out.revert_reason == RevertReason.WRONG_STATE
    assert s.current_state == "A"  # the "ab" firing was rolled back too


def test_timed_opaque_guard_needs_override():
    s = new_session(timed_chain(guard_bc="votes[msg.sender] > 0"))
    advance_time(s, 500)
    out = invoke(s, Invocation("bb", "u"))
    assert out.revert_reason == RevertReason.MISSING_OVERRIDE
    out = invoke(s, Invocation("cc", "u", timed_guard_overrides={"bc": True}))
    assert out.executed and out.fired_timed == ("ab", "bc")


def test_eval_guard_division_truncates_toward_zero():
    assert eval_guard(parse_guard_expr("7 / 2"), 0, 0, {}) == 3
    assert eval_guard(parse_guard_expr("-(7) / 2"), 0, 0, {}) == -3
    assert eval_guard(parse_guard_expr("7 % -(2)"), 0, 0, {}) == 1
    with pytest.raises(ZeroDivisionError):
        eval_guard(parse_guard_expr("1 / 0"), 0, 0, {})


def test_eval_guard_short_circuit():
    # The right operand would raise; short-circuit must skip it.
    assert eval_guard(parse_guard_expr("0 && mystery"), 0, 0, {}) is False
    assert eval_guard(parse_guard_expr("1 || mystery"), 0, 0, {}) is True


def test_eval_guard_now_and_creation_time():
    ast = parse_guard_expr("now >= creationTime + 5 days")
    assert eval_guard(ast, 432000, 0, {}) is True
    assert eval_guard(ast, 431999, 0, {}) is False
