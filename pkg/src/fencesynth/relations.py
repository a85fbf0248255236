"""Derived C11 relations: synchronizes-with, dependency ordering,
inter-thread happens-before, from-reads, and the forced order on
sequentially-consistent events.

All functions are pure over immutable traces and accept either a plain
execution or an intermediate one (candidate fences spliced into sb).
Inter-thread happens-before is derived by the least fixpoint of

    sw ⊆ ithb;  dob ⊆ ithb;  sw;sb ⊆ ithb;  sb;ithb ⊆ ithb;  ithb;ithb ⊆ ithb

and hb = sb ∪ ithb.  The coherence axioms are evaluated on hb's transitive
closure (see ``hb_closed``), which keeps cycle detection over hb-edge runs
and trace re-verification in exact agreement.

Every derived hb pair carries one canonical witness: the underlying
sb/sw/dob step sequence, chosen to rely on as few candidate fences as
possible.  Witnesses let cycle analysis name the fences a cycle needs and
read off each fence's release/acquire role.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .model import Event, Relation


@dataclass(frozen=True)
class SyncPath:
    """A derivation of one hb pair as concrete sb/sw/dob steps."""

    nodes: tuple[int, ...]
    labels: tuple[str, ...]

    def compose(self, other: "SyncPath") -> "SyncPath":
        assert self.nodes[-1] == other.nodes[0]
        return SyncPath(self.nodes + other.nodes[1:], self.labels + other.labels)


@dataclass(frozen=True)
class HbInfo:
    sw: Relation
    dob: Relation
    ithb: Relation
    hb: Relation
    hb_closed: Relation
    witness: Mapping[tuple[int, int], SyncPath]  # for every hb pair
    closed_witness: Mapping[tuple[int, int], SyncPath]  # for every hb_closed pair


def _candidates(tr) -> frozenset[int]:
    return getattr(tr, "fence_event_ids", frozenset())


def release_sequence(tr, w: Event) -> list[Event]:
    """Maximal contiguous mo-subsequence from ``w``: writes of w's thread
    plus rmws of other threads."""
    assert w.is_write, "release sequences start at writes or rmws"
    chain = tr.mo_chains[w.obj]
    pos = chain.index(w.id)
    out = [w]
    for eid in chain[pos + 1 :]:
        e = tr.event(eid)
        if e.thr == w.thr or e.act == "rmw":
            out.append(e)
        else:
            break
    return out


def derive_sync(tr) -> tuple[Relation, Relation]:
    """The sw and dob relations, including the fence-induced cases.

    For each rf edge (w, r): a release-capable w synchronizes with an
    acquire-capable r directly, with an acquire fence sequenced after r,
    from a release fence sequenced before w, or fence to fence.  dob lifts
    the same two acquire-side cases to the release-sequence head of w.
    """
    sb = tr.sb.pairs
    rel_fences = [f for f in tr.fences if f.ord.at_least_release]
    acq_fences = [f for f in tr.fences if f.ord.at_least_acquire]
    sw: set[tuple[int, int]] = set()
    dob: set[tuple[int, int]] = set()

    heads = [w for w in tr.writes if w.ord.at_least_release and not w.is_init]
    in_release_seq: dict[int, list[Event]] = {}
    for head in heads:
        for member in release_sequence(tr, head):
            in_release_seq.setdefault(member.id, []).append(head)

    for w_id, r_id in tr.rf.pairs:
        w, r = tr.event(w_id), tr.event(r_id)
        acq_after_r = [f for f in acq_fences if (r_id, f.id) in sb]
        rel_before_w = [f for f in rel_fences if (f.id, w_id) in sb]
        if w.ord.at_least_release:
            if r.ord.at_least_acquire:
                sw.add((w_id, r_id))
            for f in acq_after_r:
                sw.add((w_id, f.id))
        if r.ord.at_least_acquire:
            for f in rel_before_w:
                sw.add((f.id, r_id))
        for f1 in rel_before_w:
            for f2 in acq_after_r:
                sw.add((f1.id, f2.id))
        for head in in_release_seq.get(w_id, ()):
            if r.ord.at_least_acquire:
                dob.add((head.id, r_id))
            for f in acq_after_r:
                dob.add((head.id, f.id))

    return Relation(sw), Relation(dob)


def _witness_key(path: SyncPath, candidates: frozenset[int]):
    deps = sum(1 for n in path.nodes[1:-1] if n in candidates)
    return (deps, len(path.nodes), path.nodes)


def compute_hb_info(tr) -> HbInfo:
    sw, dob = derive_sync(tr)
    candidates = _candidates(tr)
    sb = tr.sb.pairs
    sb_by_src: dict[int, list[int]] = {}
    for a, b in sb:
        sb_by_src.setdefault(a, []).append(b)

    best: dict[tuple[int, int], SyncPath] = {}

    def offer(a: int, b: int, path: SyncPath) -> bool:
        cur = best.get((a, b))
        if cur is None or _witness_key(path, candidates) < _witness_key(cur, candidates):
            best[(a, b)] = path
            return True
        return False

    for a, b in sw.pairs:
        offer(a, b, SyncPath((a, b), ("sw",)))
    for a, b in dob.pairs:
        offer(a, b, SyncPath((a, b), ("dob",)))

    sb_by_dst: dict[int, list[int]] = {}
    for a, b in sb:
        sb_by_dst.setdefault(b, []).append(a)

    # Least fixpoint with best-witness relaxation; every update strictly
    # improves a key, so the loop terminates.  Reflexive ithb pairs are
    # genuine hb cycles and are kept.
    changed = True
    rounds = 0
    while changed:
        changed = False
        rounds += 1
        assert rounds < 10_000, "ithb fixpoint failed to converge"
        snapshot = list(best.items())
        by_src: dict[int, list[tuple[int, SyncPath]]] = {}
        for (a, b), p in snapshot:
            by_src.setdefault(a, []).append((b, p))
        # sw;sb
        for a, x in sw.pairs:
            for b in sb_by_src.get(x, ()):
                if offer(a, b, SyncPath((a, x, b), ("sw", "sb"))):
                    changed = True
        # sb;ithb
        for (x, b), path in snapshot:
            for a in sb_by_dst.get(x, ()):
                if offer(a, b, SyncPath((a,) + path.nodes, ("sb",) + path.labels)):
                    changed = True
        # ithb;ithb
        for (a, x), p1 in snapshot:
            for b, p2 in by_src.get(x, ()):
                if offer(a, b, p1.compose(p2)):
                    changed = True

    ithb = Relation(best.keys())
    hb_pairs = set(best.keys()) | sb
    witness = dict(best)
    for a, b in sb:
        path = SyncPath((a, b), ("sb",))
        cur = witness.get((a, b))
        if cur is None or _witness_key(path, candidates) < _witness_key(cur, candidates):
            witness[(a, b)] = path
    hb = Relation(hb_pairs)

    # Transitive closure with witnesses (runs of hb edges).
    closed = dict(witness)
    changed = True
    rounds = 0
    while changed:
        changed = False
        rounds += 1
        assert rounds < 10_000, "hb closure failed to converge"
        snapshot = list(closed.items())
        by_src: dict[int, list[tuple[int, SyncPath]]] = {}
        for (a, b), p in snapshot:
            by_src.setdefault(a, []).append((b, p))
        for (a, x), p1 in snapshot:
            for b, p2 in by_src.get(x, ()):
                pair = (a, b)
                path = p1.compose(p2)
                cur = closed.get(pair)
                if cur is None or _witness_key(path, candidates) < _witness_key(cur, candidates):
                    closed[pair] = path
                    changed = True

    return HbInfo(
        sw=sw,
        dob=dob,
        ithb=ithb,
        hb=hb,
        hb_closed=Relation(closed.keys()),
        witness=witness,
        closed_witness=closed,
    )


def compute_hb(tr) -> tuple[Relation, Relation]:
    """The (ithb, hb) pair exactly per the derivation rules."""
    info = tr._hb_info if hasattr(tr, "_hb_info") else compute_hb_info(tr)
    return info.ithb, info.hb


def compute_fr(tr) -> Relation:
    """from-reads: rf⁻¹;mo, minus reflexive pairs."""
    fr = tr.rf.inverse().compose(tr.mo)
    return Relation(p for p in fr.pairs if p[0] != p[1])


# ---------------------------------------------------------------------------
# The forced order on sc events (strong analysis)


@dataclass(frozen=True)
class SoInfo:
    so: Relation
    # Candidate fences each so edge relies on beyond its own endpoints
    # (an edge justified through a fence-enabled hb pair needs those fences).
    deps: Mapping[tuple[int, int], frozenset[int]]


def compute_so_info(it) -> SoInfo:
    """The sc-order relation of an intermediate trace.

    For every pair (e1, e2) in hb ∪ mo ∪ rf ∪ fr the clauses add: the pair
    itself if both ends are sc; (e1, F) for an sc fence F sequenced after
    e2; (F, e2) for an sc fence F sequenced before e1; and (F1, F2) for sc
    fences around e1 and e2.  sc pairs with no forced order stay unordered.
    """
    info = it._hb_info
    candidates = _candidates(it)
    sb = it.sb.pairs
    sc = {e.id for e in it.sc_events}
    sc_fences = [e for e in it.sc_events if e.is_fence]

    r_pairs: dict[tuple[int, int], frozenset[int]] = {}

    def feed(pair, deps):
        cur = r_pairs.get(pair)
        if cur is None or (len(deps), sorted(deps)) < (len(cur), sorted(cur)):
            r_pairs[pair] = deps

    for pair, path in info.closed_witness.items():
        feed(pair, frozenset(n for n in path.nodes if n in candidates))
    for rel in (it.mo, it.rf, it.fr):
        for pair in rel.pairs:
            feed(pair, frozenset())

    so: dict[tuple[int, int], frozenset[int]] = {}

    def add(u, v, deps):
        cur = so.get((u, v))
        if cur is None or (len(deps), sorted(deps)) < (len(cur), sorted(cur)):
            so[(u, v)] = deps

    for (a, b), rdeps in r_pairs.items():
        a_sc = a in sc
        b_sc = b in sc
        if a_sc and b_sc:
            add(a, b, rdeps)
        if a_sc:
            for f in sc_fences:
                if (b, f.id) in sb:
                    add(a, f.id, rdeps)
        if b_sc:
            for f in sc_fences:
                if (f.id, a) in sb:
                    add(f.id, b, rdeps)
        before_a = [f for f in sc_fences if (f.id, a) in sb]
        after_b = [f for f in sc_fences if (b, f.id) in sb]
        for f1 in before_a:
            for f2 in after_b:
                add(f1.id, f2.id, rdeps)

    return SoInfo(so=Relation(so.keys()), deps=so)


def compute_so(it) -> Relation:
    return it.so_info.so


def hb_with_init(tr) -> Relation:
    """hb_closed extended with initialization preceding every other event.

    Initialization writes happen before any thread runs; only the sc-read
    source rule consults this extension.
    """
    init_ids = [e.id for e in tr.init_events]
    extra = {
        (i, e.id) for i in init_ids for e in tr.events if e.id != i and not e.is_init
    }
    return Relation(tr.hb_closed.pairs | extra)
