"""The exhaustive execution enumerator and its consistency checks."""

import pytest

from conftest import load, make_trace, O
from fencesynth.enumerator import (
    candidate_values,
    coherence_violations,
    enumerate_consistent_traces,
    exists_sc_total_order,
    find_buggy_traces,
    is_consistent,
)
from fencesynth.errors import ResourceLimitError
from fencesynth.limits import Limits
from fencesynth.litmus import elaborate, parse_program
from fencesynth.optimize import TypedSolution
from fencesynth.driver import apply_solution
from fencesynth.model import FenceSlot


def outcomes(traces, *names):
    """Final local values as tuples, in enumeration order."""
    out = []
    for tr in traces:
        merged = {}
        for env in tr.final_locals.values():
            merged.update(env)
        out.append(tuple(merged.get(n, 0) for n in names))
    return out


def test_candidate_values_fixpoint():
    p = load("dekker_core")
    vals = candidate_values(p)
    assert set(vals["f1"]) == {0, 1}
    # Two unrollable increments can reach at most a bounded chain; the
    # overapproximation must at least contain the dynamically producible 0..2.
    assert {0, 1, 2} <= set(vals["wins"])


def test_sb_allows_both_zero():
    p = load("sb_rlx")
    traces = enumerate_consistent_traces(p)
    assert (0, 0) in outcomes(traces, "a", "b")
    assert len(traces) == 4  # all four read combinations are consistent


def test_single_thread_rf_forced():
    src = (
        "program seq\ninit x = 0\nthread t1 {\n"
        "  store(x, 1, rlx)\n  a = load(x, rlx)\n}\nassert true\n"
    )
    traces = enumerate_consistent_traces(elaborate(parse_program(src)))
    # Reading the initial value is forbidden by coherence within the thread.
    assert outcomes(traces, "a") == [(1,)]


def test_zero_statement_program_has_one_trace():
    src = "program empty\ninit x = 0\nthread t1 {\n}\nassert true\n"
    traces = enumerate_consistent_traces(elaborate(parse_program(src)))
    assert len(traces) == 1
    assert [e.is_init for e in traces[0].events] == [True]


def test_rwrw_buggy_trace_is_consistent(rwrw):
    buggy = find_buggy_traces(rwrw)
    assert len(buggy) == 1
    tr = buggy[0]
    assert is_consistent(tr)
    assert tr.assertion_holds is False
    assert tr.final_shared == {"x": 1, "y": 1}


def test_reversed_rf_violates_coherence():
    # A read sequenced before the write it observes: rf;hb is reflexive.
    tr, _ = make_trace(
        init={"x": 0},
        threads={"t1": [("r", "read", "x", O.RLX, 1, None), ("w", "write", "x", O.RLX, None, 1)]},
        rf=[("w", "r")],
        mo_tail={"x": ["w"]},
    )
    assert "co-rh" in coherence_violations(tr)
    assert not is_consistent(tr)


def test_all_sc_store_buffer_rejects_zero_zero():
    p = load("sb_sc")
    assert (0, 0) not in outcomes(enumerate_consistent_traces(p), "a", "b")


def test_all_sc_iriw_rejects_split_order():
    p = load("iriw_sc")
    traces = enumerate_consistent_traces(p)
    assert (1, 0, 1, 0) not in outcomes(traces, "a", "b", "c", "d")
    # The same program with relaxed accesses admits it.
    q = load("iriw_rlx")
    assert (1, 0, 1, 0) in outcomes(enumerate_consistent_traces(q), "a", "b", "c", "d")


def test_no_sc_events_total_order_trivial():
    tr, _ = make_trace(
        init={"x": 0},
        threads={"t1": [("w", "write", "x", O.RLX, None, 1)]},
        rf=[],
        mo_tail={"x": ["w"]},
    )
    assert exists_sc_total_order(tr)


def test_sc_fence_pair_blocks_store_buffer():
    # The store-buffer trace with an sc fence between each store and load
    # admits no sc order; with acquire-release fences it still does.
    p = load("sb_rlx")
    tr = find_buggy_traces(p)[0]
    from conftest import with_fences

    f1, f2 = FenceSlot("t1", 1), FenceSlot("t2", 1)
    assert not exists_sc_total_order(with_fences(tr, {f1: O.SC, f2: O.SC}))
    assert exists_sc_total_order(with_fences(tr, {f1: O.AR, f2: O.SC}))
    assert exists_sc_total_order(with_fences(tr, {f1: O.SC, f2: O.AR}))


def test_buggy_traces_rwrw_exactly_one_one(rwrw):
    buggy = find_buggy_traces(rwrw)
    assert outcomes(buggy, "a", "b") == [(1, 1)]


def test_fence_removes_buggy_traces(rwrw):
    fixed = apply_solution(
        rwrw, TypedSolution(assignment=((FenceSlot("t1", 1), O.REL),))
    )
    assert find_buggy_traces(fixed) == []


def test_assert_true_never_buggy():
    assert find_buggy_traces(load("assert_true")) == []


def test_hb_irreflexive_on_accepted_traces(rwrw):
    for tr in enumerate_consistent_traces(rwrw):
        assert not tr.hb_closed.is_reflexive()
        assert not tr.hb.is_reflexive()


def test_per_object_mo_is_strict_total_order():
    for tr in enumerate_consistent_traces(load("coh_rr")):
        for obj, chain in tr.mo_chains.items():
            for i, a in enumerate(chain):
                for b in chain[i + 1 :]:
                    assert (a, b) in tr.mo and (b, a) not in tr.mo
        assert not tr.mo.is_reflexive()


def test_enumeration_is_deterministic():
    p = load("dekker_core")
    from oracle import trace_signature

    first = [trace_signature(t) for t in enumerate_consistent_traces(p)]
    second = [trace_signature(t) for t in enumerate_consistent_traces(p)]
    assert first == second


def test_max_traces_limit_reported_distinctly():
    p = load("sb_rlx")
    with pytest.raises(ResourceLimitError):
        enumerate_consistent_traces(p, Limits(max_traces=2))
    # An unsatisfiable-outcome program reports plain emptiness instead.
    assert find_buggy_traces(load("assert_true"), Limits(max_traces=2)) == []


def _orderless_signature(tr):
    def key(eid):
        e = tr.event(eid)
        return ("init", e.obj) if e.is_init else (e.thr, e.idx)

    return (
        frozenset((key(e.id), e.act, e.obj, e.rval, e.wval) for e in tr.events),
        frozenset((key(a), key(b)) for a, b in tr.rf.pairs),
        frozenset((key(a), key(b)) for a, b in tr.mo.pairs),
    )


def test_strengthening_shrinks_trace_set():
    # Replacing any access order by a stronger one never enlarges the
    # consistent-trace set (compared with orders stripped).
    from conftest import corpus_text

    base_src = corpus_text("mp_rlx")
    base = elaborate(parse_program(base_src))
    base_sigs = {_orderless_signature(t) for t in enumerate_consistent_traces(base)}
    for strengthened in (
        base_src.replace("store(f, 1, rlx)", "store(f, 1, rel)"),
        base_src.replace("a = load(f, rlx)", "a = load(f, acq)"),
        base_src.replace("store(d, 1, rlx)", "store(d, 1, sc)"),
    ):
        p = elaborate(parse_program(strengthened))
        sigs = {_orderless_signature(t) for t in enumerate_consistent_traces(p)}
        assert sigs <= base_sigs


def test_fadd_returns_old_value():
    src = (
        "program fa\ninit x = 0\nthread t1 {\n"
        "  u = fadd(x, 5, rlx)\n}\nassert u == 0 && x == 5\n"
    )
    p = elaborate(parse_program(src))
    traces = enumerate_consistent_traces(p)
    assert len(traces) == 1 and traces[0].assertion_holds


def test_repeat_zero_expands_to_nothing():
    src = (
        "program rz\ninit x = 0\nthread t1 {\n"
        "  repeat 0 {\n    store(x, 1, rlx)\n  }\n}\nassert x == 0\n"
    )
    p = elaborate(parse_program(src))
    assert p.threads[0].size == 0
    traces = enumerate_consistent_traces(p)
    assert len(traces) == 1 and traces[0].assertion_holds


def test_candidate_fences_never_in_rf_mo_fr(rwrw):
    from fencesynth.cycles import insert_candidate_fences
    from fencesynth.relations import compute_fr

    tr = find_buggy_traces(rwrw)[0]
    it = insert_candidate_fences(tr)
    touched = {i for pair in (it.rf.pairs | it.mo.pairs | compute_fr(it).pairs) for i in pair}
    assert not (touched & it.fence_event_ids)
