"""Persistence pairs on surfaces from two spanning-forest sweeps.

Pairs of dimension (0, 1) come from a union-find sweep over the primal
1-skeleton in the consistent total order. Pairs of dimension (1, 2) come
from the same sweep on the dual 1-skeleton (2-cells as nodes, 1-cells as
arcs) in the reversed order with negated values.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from . import _kernels
from .errors import NotClosedSurface, UnmatchableInfinities


@dataclass(frozen=True, order=True)
class PersistenceRecord:
    """A persistence pair, or an essential class when ``negative`` is None.

    ``dim`` is the dimension of the positive cell. A pair whose negative
    cell is a virtual cap has ``death == inf`` but keeps its negative cell.
    """
    dim: int
    birth: float
    death: float
    positive: int
    negative: object = None

    @property
    def persistence(self):
        if math.isinf(self.death):
            return math.inf
        return self.death - self.birth

    @property
    def essential(self):
        return self.negative is None

    @property
    def dim_pair(self):
        if self.essential:
            return (self.dim,)
        return (self.dim, self.dim + 1)


class RecordSet(Sequence):
    """Array-backed sequence of :class:`PersistenceRecord`.

    Records are stored column-wise; ``negative`` is ``-1`` for essential
    classes. Indexing with an integer builds a record object, indexing with
    a mask or index array returns another ``RecordSet``.
    """

    def __init__(self, dim, birth, death, positive, negative):
        self.dim = np.asarray(dim, dtype=np.int64)
        self.birth = np.asarray(birth, dtype=float)
        self.death = np.asarray(death, dtype=float)
        self.positive = np.asarray(positive, dtype=np.int64)
        self.negative = np.asarray(negative, dtype=np.int64)

    @classmethod
    def empty(cls):
        z = np.zeros(0)
        return cls(z, z, z, z, z)

    @classmethod
    def from_records(cls, records):
        records = list(records)
        return cls([r.dim for r in records], [r.birth for r in records],
                   [r.death for r in records],
                   [r.positive for r in records],
                   [-1 if r.negative is None else r.negative
                    for r in records])

    @classmethod
    def concat(cls, parts):
        parts = list(parts)
        if not parts:
            return cls.empty()
        return cls(*(np.concatenate([getattr(p, k) for p in parts])
                     for k in ("dim", "birth", "death", "positive",
                               "negative")))

    def __len__(self):
        return self.dim.shape[0]

    def __getitem__(self, i):
        if isinstance(i, (int, np.integer)):
            neg = int(self.negative[i])
            return PersistenceRecord(int(self.dim[i]), float(self.birth[i]),
                                     float(self.death[i]),
                                     int(self.positive[i]),
                                     None if neg < 0 else neg)
        return RecordSet(self.dim[i], self.birth[i], self.death[i],
                         self.positive[i], self.negative[i])

    def __repr__(self):
        return f"RecordSet({len(self)} records)"

    @property
    def essential(self):
        return self.negative < 0

    @property
    def persistence(self):
        with np.errstate(invalid="ignore"):
            p = self.death - self.birth
        p[np.isinf(self.death)] = np.inf
        return p


@dataclass
class SpanningForestResult:
    """Outcome of one union-find sweep.

    Attributes
    ----------
    edges : ndarray
        The 1-cells of the swept graph, aligned with ``ends``.
    ends : ndarray
        (m, 2) node ids of every 1-cell in this graph.
    tree : ndarray of bool
        Membership of each 1-cell in the minimum spanning forest.
    mdelta : ndarray of bool
        Tree edges that survive the threshold (drops negative edges whose
        persistence exceeds ``two_delta``).
    pairs : RecordSet
        Finite pairs found by the sweep, in sweep order.
    hierarchy : ndarray of int
        ``hierarchy[c]`` is the creator that ``c`` merged into, or -1.
    creators : ndarray of int
        Creators of the final components (the essential classes).
    roots : ndarray of int
        Nodes that stay critical after canceling every pair within the
        threshold; one per component of the thresholded forest.
    """
    edges: np.ndarray
    ends: np.ndarray
    tree: np.ndarray
    mdelta: np.ndarray
    pairs: RecordSet
    hierarchy: np.ndarray
    creators: np.ndarray
    roots: np.ndarray
    dual: bool = False

    @property
    def tree_edges(self):
        return self.edges[self.tree]

    @property
    def mdelta_edges(self):
        return self.edges[self.mdelta]

    @property
    def parent(self):
        """Persistence hierarchy as a dict: child creator -> parent."""
        c = np.flatnonzero(self.hierarchy >= 0)
        return dict(zip(c.tolist(), self.hierarchy[c].tolist()))


def kruskal_persistence(cx, f, order, two_delta, V=None, *, dual=False):
    """Union-find sweep over the primal or dual 1-skeleton.

    Edges are visited in increasing ``order`` (decreasing for the dual
    sweep). An edge joining two components pairs the younger creator with
    the edge; the older creator becomes its parent in the hierarchy. An edge
    matched with a node by ``V`` merges that node silently.
    """
    f = np.asarray(f, dtype=float)
    n = cx.n
    partner = np.full(n, -1, np.int64) if V is None else V.partner
    if dual:
        edges, ends = cx.edge_cofaces()
        node_dim = 2
    else:
        edges, ends = cx.edge_endpoints()
        node_dim = 0
    rank = order.rank
    # edge rows in sweep order, read off the total order without sorting
    local = np.full(n, -1, dtype=np.int64)
    local[edges] = np.arange(edges.size)
    sweep = local[order.order[cx.dims[order.order] == 1]]
    if dual:
        sweep = sweep[::-1]
    p = partner[edges]
    matched = np.where((p >= 0) & (cx.dims[np.maximum(p, 0)] == node_dim),
                       p, -1)
    # node n stands for the unbounded outside of a complex with free edges
    node_rank = np.empty(n + 1, dtype=np.int64)
    values = np.empty(n + 1)
    if dual:
        node_rank[:n] = -rank
        values[:n] = -f
    else:
        node_rank[:n] = rank
        values[:n] = f
    node_rank[n] = np.iinfo(np.int64).min
    values[n] = -np.inf
    tree, mdelta, pos, neg, hier, absorbed = _kernels.kruskal(
        edges[sweep], np.ascontiguousarray(ends[sweep]), matched[sweep],
        node_rank, values, float(two_delta), n + 1)
    inv = np.empty_like(sweep)
    inv[sweep] = np.arange(sweep.size)
    tree, mdelta = tree[inv], mdelta[inv]

    if dual:
        pairs = RecordSet(np.ones(pos.size), f[neg], f[pos], neg, pos)
    else:
        pairs = RecordSet(np.zeros(pos.size), f[pos], f[neg], pos, neg)
    used = np.zeros(n + 1, dtype=bool)
    used[:n] = cx.dims == node_dim
    if dual and np.any(ends == n):
        used[n] = True
    silent = np.zeros(n + 1, dtype=bool)
    silent[matched[matched >= 0]] = True
    creators = np.flatnonzero(used[:n] & (hier[:n] < 0) & ~silent[:n])
    roots = np.flatnonzero(used & ~absorbed)
    return SpanningForestResult(edges, ends, tree, mdelta, pairs, hier[:n],
                                creators, roots, dual)


def all_persistence_pairs(cx, f, order, two_delta=0.0, V=None,
                          require_closed=True):
    """All persistence records of a closed surface.

    Returns ``(records, primal, dual)`` where ``records`` is a
    :class:`RecordSet` and ``primal`` and ``dual`` are the two
    :class:`SpanningForestResult` sweeps. Essential 1-classes are the
    1-cells in neither spanning forest.

    Raises
    ------
    NotClosedSurface
        If a 1-cell does not have exactly two cofacets and
        ``require_closed`` is set.
    """
    f = np.asarray(f, dtype=float)
    if require_closed and not cx.is_closed:
        raise NotClosedSurface("cap the boundary before computing pairs")
    primal = kruskal_persistence(cx, f, order, two_delta, V)
    dual = kruskal_persistence(cx, f, order, two_delta, V, dual=True)
    in_tree = np.zeros(cx.n, dtype=bool)
    in_tree[primal.tree_edges] = True
    in_tree[dual.tree_edges] = True
    edges = cx.cells(1)
    loose = edges[~in_tree[edges]]
    parts = [primal.pairs, dual.pairs]
    for d, cells in ((0, primal.creators), (1, loose), (2, dual.creators)):
        k = cells.size
        parts.append(RecordSet(np.full(k, d), f[cells], np.full(k, np.inf),
                               cells, np.full(k, -1)))
    return RecordSet.concat(parts), primal, dual


# ------------------------------------------------------------------ diagrams
@dataclass
class PersistenceDiagram:
    """Multiset of ``(birth, death)`` points tagged with a dimension.

    The diagonal is implicit. Essential classes have ``death == inf``.
    """
    dims: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    births: np.ndarray = field(default_factory=lambda: np.zeros(0))
    deaths: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self):
        return self.births.shape[0]

    @classmethod
    def from_points(cls, points, dim=0):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return cls(np.full(len(pts), dim, np.int64), pts[:, 0], pts[:, 1])

    def points(self, dim=None):
        keep = slice(None) if dim is None else self.dims == dim
        return np.stack([self.births[keep], self.deaths[keep]], axis=1)

    def off_diagonal(self):
        keep = self.deaths > self.births
        return PersistenceDiagram(self.dims[keep], self.births[keep],
                                  self.deaths[keep])

    def sorted(self):
        idx = np.lexsort((self.deaths, self.births, self.dims))
        return PersistenceDiagram(self.dims[idx], self.births[idx],
                                  self.deaths[idx])

    def __eq__(self, other):
        a, b = self.sorted(), other.sorted()
        return (np.array_equal(a.dims, b.dims)
                and np.array_equal(a.births, b.births)
                and np.array_equal(a.deaths, b.deaths))

    def to_tsv(self):
        """``dim  birth  death`` lines sorted by (dim, birth, death)."""
        s = self.sorted()
        lines = ["dim\tbirth\tdeath"]
        for d, b, e in zip(s.dims, s.births, s.deaths):
            lines.append(f"{int(d)}\t{_fmt(b)}\t{_fmt(e)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text):
        rows = [line.split("\t") for line in text.splitlines()[1:] if line]
        if not rows:
            return cls()
        d = np.array([int(r[0]) for r in rows], dtype=np.int64)
        b = np.array([float(r[1]) for r in rows])
        e = np.array([float(r[2]) for r in rows])
        return cls(d, b, e)


def _fmt(x):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def diagram(records):
    """Project records to their (birth, death) points, keeping multiplicity."""
    if isinstance(records, RecordSet):
        return PersistenceDiagram(records.dim.copy(), records.birth.copy(),
                                  records.death.copy())
    records = list(records)
    return PersistenceDiagram(
        np.array([r.dim for r in records], dtype=np.int64),
        np.array([r.birth for r in records], dtype=float),
        np.array([r.death for r in records], dtype=float))


def bottleneck_distance(X, Y):
    """Bottleneck distance between two diagrams, dimension by dimension.

    Points at infinity are matched among themselves by their births; finite
    points may also be matched to the diagonal. Exact: binary search over the
    candidate distances with a bipartite perfect-matching test.

    Raises
    ------
    UnmatchableInfinities
        If the number of essential points differs in some dimension.
    """
    if not isinstance(X, PersistenceDiagram):
        X = PersistenceDiagram.from_points(X)
    if not isinstance(Y, PersistenceDiagram):
        Y = PersistenceDiagram.from_points(Y)
    best = 0.0
    for d in np.union1d(X.dims, Y.dims):
        px, py = X.points(d), Y.points(d)
        ix, iy = np.isinf(px[:, 1]), np.isinf(py[:, 1])
        if ix.sum() != iy.sum():
            raise UnmatchableInfinities(
                f"dimension {d}: {ix.sum()} vs {iy.sum()} essential points")
        bx, by = np.sort(px[ix, 0]), np.sort(py[iy, 0])
        same = bx == by   # also covers inf == inf
        if bx.size:
            diff = np.where(same, 0.0, np.abs(bx - by))
            best = max(best, float(diff.max()))
        best = max(best, _bottleneck_finite(px[~ix], py[~iy]))
    return best


def _linf(a, b):
    d = np.abs(a[:, None, :] - b[None, :, :])
    return d.max(axis=2)


def _bottleneck_finite(A, B):
    na, nb = len(A), len(B)
    if na == 0 and nb == 0:
        return 0.0
    da = (A[:, 1] - A[:, 0]) / 2 if na else np.zeros(0)
    db = (B[:, 1] - B[:, 0]) / 2 if nb else np.zeros(0)
    cross = _linf(A, B) if na and nb else np.zeros((na, nb))
    cand = np.unique(np.concatenate([cross.ravel(), da, db, [0.0]]))

    def feasible(r):
        # left: A points then diagonal slots for B; right: B then slots for A
        rows, cols = [], []
        ia, ib = np.nonzero(cross <= r)
        rows.append(ia), cols.append(ib)
        ka = np.flatnonzero(da <= r)
        rows.append(ka), cols.append(nb + ka)
        kb = np.flatnonzero(db <= r)
        rows.append(na + kb), cols.append(kb)
        ga, gb = np.meshgrid(np.arange(nb), np.arange(na), indexing="ij")
        rows.append(na + ga.ravel()), cols.append(nb + gb.ravel())
        r_ = np.concatenate(rows)
        c_ = np.concatenate(cols)
        m = coo_matrix((np.ones(r_.size), (r_, c_)),
                       shape=(na + nb, na + nb)).tocsr()
        match = maximum_bipartite_matching(m, perm_type="column")
        return bool(np.all(match >= 0))

    lo, hi = 0, cand.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo])
