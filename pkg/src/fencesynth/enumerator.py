"""Exhaustive enumeration of consistent executions.

Enumeration is exact and three-phased: per-read observed values are chosen
from a finite candidate set (resolving branches and fixing each thread's
event list), then reads-from functions matching those values and per-object
modification orders are enumerated, and finally each candidate execution is
kept iff the six coherence axioms hold and the sc events admit a total
order.  Output order is deterministic: lexicographic in the choice vectors.

rmw atomicity: a fetch-add reads from its immediate mo predecessor.
"""

from __future__ import annotations

import itertools
from typing import Iterator

from .errors import LitmusError, ResourceLimitError
from .limits import Limits
from .litmus import (
    Fence,
    FetchAdd,
    If,
    Load,
    Program,
    Store,
    eval_expr,
)
from .model import Event, Relation, SourceLocation, Trace
from .orders import MemoryOrder
from .relations import hb_with_init

CONDITION_NAMES = ("co-h", "co-rh", "co-mh", "co-mrh", "co-mhi", "co-mrhi")


# ---------------------------------------------------------------------------
# Candidate observed values


def candidate_values(p: Program) -> dict[str, tuple[int, ...]]:
    """Finite superset of the values each object can hold at runtime.

    A monotone transfer iterated once per statement: any dynamically
    producible value needs a chain of distinct statement executions, and
    loops are already unrolled, so that many rounds reach a fixpoint.
    """
    vals: dict[str, set[int]] = {o: {v} for o, v in p.init.items()}
    local_vals: dict[str, dict[str, set[int]]] = {t.tid: {} for t in p.threads}

    def leaf_count(block) -> int:
        n = 0
        for s in block:
            if isinstance(s, If):
                n += leaf_count(s.then) + leaf_count(s.orelse)
            else:
                n += 1
        return n

    rounds = sum(leaf_count(t.body) for t in p.threads) + 1
    for _ in range(rounds):
        for t in p.threads:
            lv = local_vals[t.tid]

            def walk(block):
                for s in block:
                    if isinstance(s, Load):
                        lv.setdefault(s.dest, set()).update(vals[s.obj])
                    elif isinstance(s, FetchAdd):
                        lv.setdefault(s.dest, set()).update(vals[s.obj])
                        vals[s.obj].update([v + s.addend for v in vals[s.obj]])
                    elif isinstance(s, Store):
                        if isinstance(s.value, int):
                            vals[s.obj].add(s.value)
                        else:
                            vals[s.obj].update(lv.get(s.value, ()))
                    elif isinstance(s, If):
                        walk(s.then)
                        walk(s.orelse)

            walk(t.body)
    return {o: tuple(sorted(v)) for o, v in vals.items()}


# ---------------------------------------------------------------------------
# Per-thread symbolic executions (one per combination of observed values)


class _EventSpec:
    __slots__ = ("act", "obj", "ord", "stmt", "rval", "wval")

    def __init__(self, act, obj, ord_, stmt, rval=None, wval=None):
        self.act = act
        self.obj = obj
        self.ord = ord_
        self.stmt = stmt
        self.rval = rval
        self.wval = wval


def _thread_runs(block, env, cand) -> list[tuple[list[_EventSpec], dict[str, int]]]:
    """All executions of a block: event lists plus final local values.

    Choices for earlier reads vary slowest, giving lexicographic order.
    """
    runs: list[tuple[list[_EventSpec], dict[str, int]]] = [([], dict(env))]
    for stmt in block:
        nxt: list[tuple[list[_EventSpec], dict[str, int]]] = []
        for acc, env0 in runs:
            for evs, env1 in _stmt_runs(stmt, env0, cand):
                nxt.append((acc + evs, env1))
        runs = nxt
    return runs


def _stmt_runs(stmt, env, cand):
    if isinstance(stmt, Load):
        out = []
        for v in cand[stmt.obj]:
            env1 = dict(env)
            env1[stmt.dest] = v
            out.append(([_EventSpec("read", stmt.obj, stmt.ord, stmt, rval=v)], env1))
        return out
    if isinstance(stmt, FetchAdd):
        out = []
        for v in cand[stmt.obj]:
            env1 = dict(env)
            env1[stmt.dest] = v
            out.append(
                (
                    [_EventSpec("rmw", stmt.obj, stmt.ord, stmt, rval=v, wval=v + stmt.addend)],
                    env1,
                )
            )
        return out
    if isinstance(stmt, Store):
        value = stmt.value if isinstance(stmt.value, int) else env.get(stmt.value, 0)
        return [([_EventSpec("write", stmt.obj, stmt.ord, stmt, wval=value)], env)]
    if isinstance(stmt, Fence):
        return [([_EventSpec("fence", None, stmt.ord, stmt)], env)]
    if isinstance(stmt, If):
        taken = stmt.then if eval_expr(stmt.cond, lambda n: env.get(n, 0)) else stmt.orelse
        return _thread_runs(taken, env, cand)
    raise LitmusError("unelaborated statement in enumeration", stmt.line)


# ---------------------------------------------------------------------------
# Consistency


def coherence_violations(tr) -> list[str]:
    """Names of the violated coherence axioms (empty for a coherent trace).

    The axioms are evaluated on the transitive closure of hb, matching the
    hb-run semantics used by cycle detection.
    """
    out = []
    hbc = tr.hb_closed
    rf, mo = tr.rf, tr.mo
    rfi = rf.inverse()
    if hbc.is_reflexive():
        out.append("co-h")
    if rf.compose(hbc).is_reflexive():
        out.append("co-rh")
    mh = mo.compose(hbc)
    if mh.is_reflexive():
        out.append("co-mh")
    mrh = mo.compose(rf).compose(hbc)
    if mrh.is_reflexive():
        out.append("co-mrh")
    if mh.compose(rfi).is_reflexive():
        out.append("co-mhi")
    if mrh.compose(rfi).is_reflexive():
        out.append("co-mrhi")
    return out


def exists_sc_total_order(tr) -> bool:
    """Whether the sc events admit a total order satisfying the sc axioms.

    Searches linear extensions of the forced pairs, accepting on the first
    witness.  Forced pairs: hb and mo restricted to sc events, plus the
    pairs the fence/mo coherence rules determine outright.  A complete
    order is accepted iff every read passes the sc-read-source rules
    (direct, and through sc fences around the read and its source).
    """
    sc_ids = sorted(e.id for e in tr.sc_events)
    if not sc_ids:
        return True
    scset = set(sc_ids)

    hb0 = hb_with_init(tr).pairs
    sb = tr.sb.pairs
    mo = tr.mo.pairs
    sc_writes: dict[str, list[int]] = {}
    writes_by_obj: dict[str, list[int]] = {}
    for e in tr.events:
        if e.is_write:
            writes_by_obj.setdefault(e.obj, []).append(e.id)
            if e.id in scset:
                sc_writes.setdefault(e.obj, []).append(e.id)
    sc_fences = [e.id for e in tr.events if e.id in scset and e.is_fence]
    rf_pairs = sorted(tr.rf.pairs)

    preds: dict[int, set[int]] = {v: set() for v in sc_ids}

    def force(a: int, b: int) -> None:
        if a != b:
            preds[b].add(a)

    for a, b in tr.hb_closed.pairs | mo:
        if a in scset and b in scset:
            force(a, b)

    # Modification order must cohere with fence placement: a write cannot
    # be ordered (via fences around it) ahead of a same-object mo-earlier
    # write.  Forced as edges so the search never explores violations.
    for obj, ws in writes_by_obj.items():
        for b_ in ws:
            for a_ in ws:
                if (b_, a_) not in mo:
                    continue
                # mo(b_, a_): the rules must not conclude mo(a_, b_).
                fences_after_a = [x for x in sc_fences if (a_, x) in sb]
                fences_before_b = [y for y in sc_fences if (y, b_) in sb]
                if b_ in scset:
                    for x in fences_after_a:
                        force(b_, x)
                if a_ in scset:
                    for y in fences_before_b:
                        force(y, a_)
                for x in fences_after_a:
                    for y in fences_before_b:
                        force(y, x)

    pos: dict[int, int] = {}

    def imm_sc_source(w: int, r: int, obj: str) -> bool:
        # w is the closest same-object sc write before r in the order.
        if pos[w] > pos[r]:
            return False
        return not any(
            c != w and pos[w] < pos[c] < pos[r] for c in sc_writes.get(obj, ())
        )

    def read_ok(w: int, r: int, robj: str) -> bool:
        if r in scset:
            if w in scset:
                if not imm_sc_source(w, r, robj):
                    return False
            else:
                for w2 in sc_writes.get(robj, ()):
                    if (w, w2) in hb0 and imm_sc_source(w2, r, robj):
                        return False
        # Sources must not be hidden behind an sc fence: a read below an sc
        # fence sees the last sc write before the fence or something
        # mo-later; likewise through a fence above the source write, and
        # through a fence pair around both.
        fences_before_r = [f for f in sc_fences if (f, r) in sb]
        for f in fences_before_r:
            for a in sc_writes.get(robj, ()):
                if a != w and pos[a] < pos[f] and (a, w) not in mo:
                    return False
        for a in writes_by_obj.get(robj, ()):
            if a == w or (a, w) in mo:
                continue
            fences_after_a = [x for x in sc_fences if (a, x) in sb]
            if r in scset and any(pos[x] < pos[r] for x in fences_after_a):
                return False
            for x in fences_after_a:
                if any(pos[x] < pos[y] for y in fences_before_r):
                    return False
        return True

    def acceptable() -> bool:
        return all(read_ok(w, r, tr.event(r).obj) for w, r in rf_pairs)

    n = len(sc_ids)

    def extend() -> bool:
        if len(pos) == n:
            return acceptable()
        for v in sc_ids:
            if v in pos:
                continue
            if any(p not in pos for p in preds[v]):
                continue
            pos[v] = len(pos)
            if extend():
                return True
            del pos[v]
        return False

    return extend()


def is_consistent(tr) -> bool:
    """The conjunction of the coherence axioms and the sc-order condition."""
    return not coherence_violations(tr) and exists_sc_total_order(tr)


# ---------------------------------------------------------------------------
# Enumeration


def iter_consistent_traces(p: Program, limits: Limits | None = None) -> Iterator[Trace]:
    if not p.elaborated:
        raise LitmusError("program must be elaborated before enumeration")
    limits = limits or Limits()
    cand = candidate_values(p)
    bindings = p.assertion_bindings()
    per_thread = [_thread_runs(t.body, {}, cand) for t in p.threads]

    init_events = []
    for k, (obj, val) in enumerate(p.init.items()):
        init_events.append(
            Event(id=k, thr=None, idx=k, act="write", obj=obj, ord=MemoryOrder.RLX, wval=val)
        )
    n_init = len(init_events)

    count = 0
    for combo in itertools.product(*per_thread):
        limits.check_time("trace-enumeration")
        events = list(init_events)
        final_locals: dict[str, dict[str, int]] = {}
        sb_pairs: set[tuple[int, int]] = set()
        next_id = n_init
        ok = True
        for thread, (specs, env) in zip(p.threads, combo):
            final_locals[thread.tid] = env
            ids = []
            for i, spec in enumerate(specs):
                events.append(
                    Event(
                        id=next_id,
                        thr=thread.tid,
                        idx=i,
                        act=spec.act,
                        obj=spec.obj,
                        ord=spec.ord,
                        loc=SourceLocation(thread.tid, spec.stmt.idx),
                        rval=spec.rval,
                        wval=spec.wval,
                        cont=spec.stmt.cont,
                    )
                )
                ids.append(next_id)
                next_id += 1
            for i, a in enumerate(ids):
                for b in ids[i + 1 :]:
                    sb_pairs.add((a, b))

        reads = [e for e in events if e.is_read]
        writes = [e for e in events if e.is_write]
        source_lists = []
        for r in reads:
            srcs = sorted(
                w.id for w in writes if w.obj == r.obj and w.wval == r.rval and w.id != r.id
            )
            if not srcs:
                ok = False
                break
            source_lists.append(srcs)
        if not ok:
            continue

        objects = list(p.init)
        perm_lists = []
        for obj in objects:
            ids = sorted(w.id for w in writes if w.obj == obj and not w.is_init)
            perm_lists.append(list(itertools.permutations(ids)))
        rmw_ids = [e.id for e in events if e.act == "rmw"]
        sb = Relation(sb_pairs)

        by_id = {e.id: e for e in events}
        for rf_choice in itertools.product(*source_lists):
            limits.check_time("trace-enumeration")
            rf = Relation((w, r.id) for w, r in zip(rf_choice, reads))
            rf_src = {r.id: w for w, r in zip(rf_choice, reads)}
            for mo_choice in itertools.product(*perm_lists):
                chains = {}
                mo_pairs = set()
                for obj, perm in zip(objects, mo_choice):
                    init_id = objects.index(obj)
                    chain = (init_id,) + perm
                    chains[obj] = chain
                    for i, a in enumerate(chain):
                        for b in chain[i + 1 :]:
                            mo_pairs.add((a, b))
                # rmw atomicity: the source is the immediate mo predecessor.
                atomic = True
                for u in rmw_ids:
                    chain = chains[by_id[u].obj]
                    at = chain.index(u)
                    if at == 0 or chain[at - 1] != rf_src[u]:
                        atomic = False
                        break
                if not atomic:
                    continue

                final_shared = {obj: by_id[chains[obj][-1]].wval for obj in objects}

                def lookup(name):
                    kind, where = bindings[name]
                    if kind == "object":
                        return final_shared[where]
                    return final_locals[where].get(name, 0)

                tr = Trace(
                    events,
                    sb,
                    rf,
                    Relation(mo_pairs),
                    assertion_holds=eval_expr(p.assertion, lookup),
                    final_shared=final_shared,
                    final_locals=final_locals,
                )
                if is_consistent(tr):
                    count += 1
                    if limits.max_traces is not None and count > limits.max_traces:
                        raise ResourceLimitError(
                            "trace-enumeration", "more than %d traces" % limits.max_traces
                        )
                    yield tr


def enumerate_consistent_traces(p: Program, limits: Limits | None = None) -> list[Trace]:
    return list(iter_consistent_traces(p, limits))


def iter_buggy_traces(p: Program, limits: Limits | None = None) -> Iterator[Trace]:
    for tr in iter_consistent_traces(p, limits):
        if not tr.assertion_holds:
            yield tr


def find_buggy_traces(p: Program, limits: Limits | None = None) -> list[Trace]:
    """Consistent executions whose final state falsifies the assertion."""
    return list(iter_buggy_traces(p, limits))
