"""Events, executions and explicit binary relations.

Executions are stored exactly: every relation is an explicit set of
event-id pairs and all closure/composition operations are exact.  Values
are immutable after construction; derived relations are computed lazily
and cached, so precompute them before sharing a trace across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping

from .orders import MemoryOrder

READ_ACTS = ("read", "rmw")
WRITE_ACTS = ("write", "rmw")


# ---------------------------------------------------------------------------
# Locations


@dataclass(frozen=True, order=True)
class SourceLocation:
    """Position of a statement: thread id plus index in the elaborated listing."""

    thread: str
    index: int

    def __str__(self) -> str:
        return "%s:%d" % (self.thread, self.index)


@dataclass(frozen=True, order=True)
class FenceSlot:
    """A gap between statements of a thread; the identity of a candidate fence.

    ``gap`` ranges over [0, #statements]: gap g sits immediately before the
    statement with index g, and gap #statements is the end of the thread.
    """

    thread: str
    gap: int

    def __str__(self) -> str:
        return "%s@%d" % (self.thread, self.gap)


# ---------------------------------------------------------------------------
# Relations


class Relation:
    """A binary relation over event ids, stored as an explicit pair set."""

    __slots__ = ("pairs", "_succ")

    def __init__(self, pairs: Iterable[tuple[int, int]] = ()):
        self.pairs = frozenset(pairs)
        self._succ = None

    def __contains__(self, pair) -> bool:
        return pair in self.pairs

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(sorted(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __eq__(self, other) -> bool:
        return isinstance(other, Relation) and self.pairs == other.pairs

    def __hash__(self) -> int:
        return hash(self.pairs)

    def __repr__(self) -> str:
        return "Relation(%r)" % sorted(self.pairs)

    def __or__(self, other: "Relation") -> "Relation":
        return Relation(self.pairs | other.pairs)

    def successors(self, a: int) -> frozenset[int]:
        if self._succ is None:
            succ: dict[int, set[int]] = {}
            for x, y in self.pairs:
                succ.setdefault(x, set()).add(y)
            self._succ = {k: frozenset(v) for k, v in succ.items()}
        return self._succ.get(a, frozenset())

    def compose(self, other: "Relation") -> "Relation":
        """Relational composition: {(a, c) | exists b. (a,b) in self, (b,c) in other}."""
        out = set()
        for a, b in self.pairs:
            for c in other.successors(b):
                out.add((a, c))
        return Relation(out)

    def inverse(self) -> "Relation":
        return Relation((b, a) for a, b in self.pairs)

    def transitive_closure(self) -> "Relation":
        reach: dict[int, set[int]] = {}
        nodes = {a for a, _ in self.pairs}
        for start in nodes:
            seen: set[int] = set()
            stack = list(self.successors(start))
            while stack:
                v = stack.pop()
                if v in seen:
                    continue
                seen.add(v)
                stack.extend(self.successors(v))
            reach[start] = seen
        return Relation((a, b) for a, bs in reach.items() for b in bs)

    def restrict(self, keep) -> "Relation":
        """Pairs whose both endpoints satisfy the predicate."""
        return Relation((a, b) for a, b in self.pairs if keep(a) and keep(b))

    def is_reflexive(self) -> bool:
        """True iff some (e, e) pair is present."""
        return any(a == b for a, b in self.pairs)


def relation_compose(r1: Relation, r2: Relation) -> Relation:
    return r1.compose(r2)


def is_reflexive(r: Relation) -> bool:
    return r.is_reflexive()


# ---------------------------------------------------------------------------
# Events


@dataclass(frozen=True)
class Event:
    """One runtime action: a read, write, rmw or fence.

    Initialization writes have ``thr`` None and participate in mo only.
    ``rval`` is the value observed (reads/rmws), ``wval`` the value written
    (writes/rmws/init).  ``cont`` is the gap index just after this event's
    statement, used when naming candidate-fence slots.
    """

    id: int
    thr: str | None
    idx: int
    act: str
    obj: str | None
    ord: MemoryOrder
    loc: SourceLocation | FenceSlot | None = None
    rval: int | None = None
    wval: int | None = None
    cont: int | None = None

    @property
    def is_init(self) -> bool:
        return self.thr is None

    @property
    def is_read(self) -> bool:
        return self.act in READ_ACTS

    @property
    def is_write(self) -> bool:
        return self.act in WRITE_ACTS

    @property
    def is_fence(self) -> bool:
        return self.act == "fence"

    def __str__(self) -> str:
        loc = "-" if self.loc is None else str(self.loc)
        return "event %d %s %d %s %s %s %s" % (
            self.id,
            self.thr if self.thr is not None else "-",
            self.idx,
            self.act,
            self.obj if self.obj is not None else "-",
            self.ord,
            loc,
        )


# ---------------------------------------------------------------------------
# Traces


class _TraceOps:
    """Shared lookups and lazily-cached derived relations."""

    events: tuple[Event, ...]
    sb: Relation
    rf: Relation
    mo: Relation

    @cached_property
    def _by_id(self) -> Mapping[int, Event]:
        return {e.id: e for e in self.events}

    def event(self, eid: int) -> Event:
        return self._by_id[eid]

    @cached_property
    def thread_order(self) -> tuple[str, ...]:
        seen: list[str] = []
        for e in self.events:
            if e.thr is not None and e.thr not in seen:
                seen.append(e.thr)
        return tuple(seen)

    @cached_property
    def thread_events(self) -> Mapping[str, tuple[Event, ...]]:
        out: dict[str, list[Event]] = {t: [] for t in self.thread_order}
        for e in self.events:
            if e.thr is not None:
                out[e.thr].append(e)
        return {t: tuple(sorted(v, key=lambda e: e.idx)) for t, v in out.items()}

    @cached_property
    def init_events(self) -> tuple[Event, ...]:
        return tuple(e for e in self.events if e.is_init)

    @cached_property
    def reads(self) -> tuple[Event, ...]:
        return tuple(e for e in self.events if e.is_read and not e.is_init)

    @cached_property
    def writes(self) -> tuple[Event, ...]:
        return tuple(e for e in self.events if e.is_write)

    @cached_property
    def fences(self) -> tuple[Event, ...]:
        return tuple(e for e in self.events if e.is_fence)

    @cached_property
    def sc_events(self) -> tuple[Event, ...]:
        return tuple(e for e in self.events if e.ord is MemoryOrder.SC)

    @cached_property
    def mo_chains(self) -> Mapping[str, tuple[int, ...]]:
        """Per-object modification order as an id chain, init event first."""
        objs: dict[str, list[int]] = {}
        for e in self.events:
            if e.is_write and e.obj is not None:
                objs.setdefault(e.obj, []).append(e.id)
        chains = {}
        for obj, ids in objs.items():
            # Total order: sort by number of mo-predecessors within the object.
            npred = {i: 0 for i in ids}
            for a, b in self.mo.pairs:
                if b in npred and a in npred:
                    npred[b] += 1
            chains[obj] = tuple(sorted(ids, key=lambda i: npred[i]))
        return chains

    # Derived relations (see relations.py for the definitions).

    @cached_property
    def _hb_info(self):
        from .relations import compute_hb_info

        return compute_hb_info(self)

    @property
    def sw(self) -> Relation:
        return self._hb_info.sw

    @property
    def dob(self) -> Relation:
        return self._hb_info.dob

    @property
    def ithb(self) -> Relation:
        return self._hb_info.ithb

    @property
    def hb(self) -> Relation:
        return self._hb_info.hb

    @property
    def hb_closed(self) -> Relation:
        return self._hb_info.hb_closed

    @cached_property
    def fr(self) -> Relation:
        from .relations import compute_fr

        return compute_fr(self)


class Trace(_TraceOps):
    """One execution: events plus the sb, rf and mo relations.

    ``assertion_holds`` is the final-state verdict, ``final_shared`` the
    mo-maximal value per object and ``final_locals`` each thread's register
    file after its last assignment.
    """

    def __init__(
        self,
        events: Iterable[Event],
        sb: Relation,
        rf: Relation,
        mo: Relation,
        assertion_holds: bool | None = None,
        final_shared: Mapping[str, int] | None = None,
        final_locals: Mapping[str, Mapping[str, int]] | None = None,
    ):
        self.events = tuple(sorted(events, key=lambda e: e.id))
        self.sb = sb
        self.rf = rf
        self.mo = mo
        self.assertion_holds = assertion_holds
        self.final_shared = dict(final_shared or {})
        self.final_locals = {t: dict(env) for t, env in (final_locals or {}).items()}

    def __repr__(self) -> str:
        return "Trace(%d events, assertion_holds=%r)" % (len(self.events), self.assertion_holds)


class IntermediateTrace(_TraceOps):
    """A buggy execution with one untyped candidate fence per adjacent slot.

    Candidate fences extend sb (and hence sw/dob/ithb/hb and so) but never
    participate in rf, mo or fr.  All candidates carry the strongest order;
    the coherence analysis only relies on their release/acquire capability.
    """

    def __init__(self, base: Trace, fence_events: Iterable[Event], sb: Relation):
        self.base = base
        self.fence_events = tuple(fence_events)
        self.events = tuple(sorted(base.events + self.fence_events, key=lambda e: e.id))
        self.sb = sb
        self.rf = base.rf
        self.mo = base.mo

    @cached_property
    def fence_event_ids(self) -> frozenset[int]:
        return frozenset(e.id for e in self.fence_events)

    @cached_property
    def slot_of(self) -> Mapping[int, FenceSlot]:
        return {e.id: e.loc for e in self.fence_events}

    @cached_property
    def slots(self) -> tuple[FenceSlot, ...]:
        return tuple(sorted(self.slot_of.values()))

    def is_candidate(self, eid: int) -> bool:
        return eid in self.fence_event_ids

    @cached_property
    def so_info(self):
        from .relations import compute_so_info

        return compute_so_info(self)

    @property
    def so(self) -> Relation:
        return self.so_info.so

    def __repr__(self) -> str:
        return "IntermediateTrace(%d events, %d candidate fences)" % (
            len(self.events),
            len(self.fence_events),
        )


# ---------------------------------------------------------------------------
# Dump format (`--emit-traces`)


def dump_trace(tr: _TraceOps, include_derived: bool = True) -> str:
    """One fact per line, stable sort: events, then sb/rf/mo, then derived."""
    lines = [str(e) for e in tr.events]
    for name in ("sb", "rf", "mo"):
        rel: Relation = getattr(tr, name)
        lines.extend("%s %d %d" % (name, a, b) for a, b in rel)
    if include_derived:
        for name in ("sw", "dob", "hb"):
            rel = getattr(tr, name)
            lines.extend("%s %d %d" % (name, a, b) for a, b in rel)
        lines.extend("fr %d %d" % (a, b) for a, b in tr.fr)
        if isinstance(tr, IntermediateTrace):
            so = tr.so
        else:
            from .cycles import insert_candidate_fences
            from .relations import compute_so_info

            # A plain trace has no candidate fences; so covers program events only.
            so = compute_so_info(insert_candidate_fences(tr, slots=())).so
        lines.extend("so %d %d" % (a, b) for a, b in so)
    return "\n".join(lines) + "\n"
