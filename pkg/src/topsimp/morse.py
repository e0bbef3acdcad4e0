"""Discrete gradient fields, induced orders and Forman cancelation."""

import heapq
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix

from . import _kernels
from .cell_complex import csr_gather
from .errors import (CycleDetected, InconsistentInput, MissingCellValue,
                     MissingVertexValue, NonUniquePath, NotCritical,
                     WrongDimension)


class GradientField:
    """A matching of facet-incident cell pairs.

    Stored as a partner array: ``partner[c]`` is the cell matched with ``c``
    or ``-1`` when ``c`` is critical. The array is read-only; operations that
    modify a field return a new one.
    """

    __slots__ = ("partner",)

    def __init__(self, partner):
        partner = np.array(partner, dtype=np.int64)
        partner.setflags(write=False)
        self.partner = partner

    @classmethod
    def empty(cls, n):
        return cls(np.full(n, -1, dtype=np.int64))

    @classmethod
    def from_pairs(cls, n, pairs):
        """Build from ``(sigma, tau)`` pairs with ``sigma`` a facet of ``tau``."""
        partner = np.full(n, -1, dtype=np.int64)
        for s, t in pairs:
            if partner[s] >= 0 or partner[t] >= 0:
                raise ValueError(f"cell matched twice in pair ({s}, {t})")
            partner[s], partner[t] = t, s
        return cls(partner)

    def __len__(self):
        return self.partner.shape[0]

    def __eq__(self, other):
        return (isinstance(other, GradientField)
                and np.array_equal(self.partner, other.partner))

    def __hash__(self):
        return hash(self.partner.tobytes())

    def __repr__(self):
        return (f"GradientField({len(self.pairs())} pairs, "
                f"{self.critical().size} critical)")

    def is_critical(self, c):
        return self.partner[c] < 0

    def critical(self):
        return np.flatnonzero(self.partner < 0)

    def pairs(self):
        """(k, 2) array of ``(lower, upper)`` pairs sorted by the lower cell.

        For a valid field the lower cell is the facet; without the complex at
        hand the smaller id is taken, which agrees for complexes numbered by
        dimension.
        """
        c = np.flatnonzero(self.partner >= 0)
        p = self.partner[c]
        keep = c < p
        return np.stack([c[keep], p[keep]], axis=1)

    def oriented_pairs(self, cx):
        """(k, 2) array of ``(facet, cell)`` pairs using the complex's dims."""
        c = np.flatnonzero(self.partner >= 0)
        p = self.partner[c]
        keep = cx.dims[c] < cx.dims[p]
        return np.stack([c[keep], p[keep]], axis=1)

    def to_text(self, cx):
        """Two-column listing ``sigma<TAB>tau`` of the pairs, facet first."""
        return "".join(f"{s}\t{t}\n" for s, t in self.oriented_pairs(cx))

    @classmethod
    def from_text(cls, n, text):
        pairs = [tuple(int(x) for x in line.split())
                 for line in text.splitlines() if line.strip()]
        return cls.from_pairs(n, pairs)

    def validate(self, cx):
        """Raise if this is not a gradient field on ``cx``."""
        c = np.flatnonzero(self.partner >= 0)
        p = self.partner[c]
        if np.any(self.partner[p] != c):
            raise ValueError("partner array is not symmetric")
        lo = np.where(cx.dims[c] < cx.dims[p], c, p)
        hi = np.where(cx.dims[c] < cx.dims[p], p, c)
        for s, t in zip(lo, hi):
            if s not in cx.facets(t):
                raise ValueError(f"{s} is not a facet of {t}")
        status, _ = _kernels.topo_order(cx.dims, cx.facet_ptr, cx.facet_idx,
                                        self.partner)
        if status == _kernels.CYCLE:
            raise CycleDetected("closed V-path found")


@dataclass(frozen=True)
class TotalOrder:
    """A strict total order on the cells.

    ``order[i]`` is the i-th smallest cell and ``rank`` its inverse
    permutation.
    """
    order: np.ndarray
    rank: np.ndarray

    @classmethod
    def from_order(cls, order):
        order = np.asarray(order, dtype=np.int64)
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)
        order.setflags(write=False)
        rank.setflags(write=False)
        return cls(order, rank)

    def __len__(self):
        return self.order.shape[0]

    def precedes(self, a, b):
        return self.rank[a] < self.rank[b]


# ------------------------------------------------------------- functions
def _partner_of(V, n):
    return np.full(n, -1, dtype=np.int64) if V is None else V.partner


def check_consistency(cx, f, V=None):
    """True iff ``f`` and ``V`` satisfy the pseudo-Morse inequalities.

    For every facet ``s`` of ``t``: ``f(s) <= f(t)`` unless ``(s, t)`` is in
    ``V``, in which case ``f(s) >= f(t)``.
    """
    f = np.asarray(f, dtype=float)
    partner = _partner_of(V, cx.n)
    s, t = cx.incidences()
    matched = partner[t] == s
    fs, ft = f[s], f[t]
    return bool(np.all(np.where(matched, fs >= ft, fs <= ft)))


def extend_from_vertices(cx, vertex_values):
    """Extend 0-cell values upward: a cell gets the max over its facets.

    ``vertex_values`` is either an array indexed like ``cx.cells(0)`` or a
    mapping from 0-cell id to value.
    """
    verts = cx.cells(0)
    vals = _collect(vertex_values, verts, MissingVertexValue)
    f = np.full(cx.n, np.nan)
    f[verts] = vals
    for d in (1, 2):
        cells = cx.cells(d)
        if cells.size:
            fac, own = csr_gather(cx.facet_ptr, cx.facet_idx, cells)
            out = np.full(cx.n, -np.inf)
            np.maximum.at(out, own, f[fac])
            f[cells] = out[cells]
    return f


def extend_from_top_cells(cx, cell2_values):
    """Extend 2-cell values downward: a cell gets the min over its cofacets."""
    faces = cx.cells(2)
    vals = _collect(cell2_values, faces, MissingCellValue)
    f = np.full(cx.n, np.nan)
    f[faces] = vals
    for d in (1, 0):
        cells = cx.cells(d)
        if cells.size:
            cof, own = csr_gather(cx.cofacet_ptr, cx.cofacet_idx, cells)
            out = np.full(cx.n, np.inf)
            np.minimum.at(out, own, f[cof])
            f[cells] = out[cells]
    return f


def _collect(values, cells, exc):
    if isinstance(values, dict):
        missing = [int(c) for c in cells if int(c) not in values]
        if missing:
            raise exc(f"no value for cells {missing[:5]}")
        return np.array([values[int(c)] for c in cells], dtype=float)
    vals = np.asarray(values, dtype=float).ravel()
    if vals.size != cells.size:
        raise exc(f"expected {cells.size} values, got {vals.size}")
    if np.any(np.isnan(vals)):
        raise exc("values contain NaN")
    return vals


# ------------------------------------------------------------- orders
def build_total_order(cx, f, V=None):
    """Consistent total order: by value, then field order, then (dim, id).

    With an empty field this is the plain lexicographic order on
    ``(value, dimension, id)``. Within a group of equal values the field
    relations are respected by a Kahn sweep whose ready queue is keyed by
    ``(dimension, id)``.
    """
    f = np.asarray(f, dtype=float)
    if not check_consistency(cx, f, V):
        raise InconsistentInput("function is not consistent with the field")
    # stable sort by value over cells presorted by (dim, id)
    by_dim = np.argsort(cx.dims, kind="stable")
    order = by_dim[np.argsort(f[by_dim], kind="stable")]
    if V is None or not np.any(V.partner >= 0):
        return TotalOrder.from_order(order)

    partner = V.partner
    fo = f[order]
    bounds = np.flatnonzero(np.r_[True, fo[1:] != fo[:-1], True])
    out = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        group = order[a:b]
        if b - a == 1 or not np.any(partner[group] >= 0):
            out.append(group)
            continue
        out.append(_kahn(cx, group, partner))
    return TotalOrder.from_order(np.concatenate(out))


def _kahn(cx, group, partner):
    members = set(group.tolist())
    preds = {c: [p for p in _preds(cx, c, partner) if p in members]
             for c in members}
    succs = {c: [] for c in members}
    for c, ps in preds.items():
        for p in ps:
            succs[p].append(c)
    indeg = {c: len(ps) for c, ps in preds.items()}
    heap = [(int(cx.dims[c]), c) for c, k in indeg.items() if k == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        _, c = heapq.heappop(heap)
        out.append(c)
        for s in succs[c]:
            indeg[s] -= 1
            if indeg[s] == 0:
                heapq.heappush(heap, (int(cx.dims[s]), s))
    if len(out) != len(members):
        raise CycleDetected("closed V-path among cells of equal value")
    return np.array(out, dtype=np.int64)


def _preds(cx, c, partner):
    """Cells directly below ``c`` in the field-induced order."""
    out = [int(p) for p in cx.facets(c) if p != partner[c]]
    p = partner[c]
    if p >= 0 and cx.dims[p] > cx.dims[c]:
        out.append(int(p))
    return out


def _succs(cx, c, partner):
    out = [int(s) for s in cx.cofacets(c) if s != partner[c]]
    p = partner[c]
    if p >= 0 and cx.dims[p] < cx.dims[c]:
        out.append(int(p))
    return out


def induced_hasse_diagram(cx, V=None):
    """Sparse adjacency of the Hasse diagram of the field-induced order.

    Entry ``(u, v)`` is set when ``v`` is covered by ``u``: for a facet pair
    ``(s, t)`` outside ``V`` the arc is ``t -> s``, for a pair in ``V`` it is
    ``s -> t``. A cell ``a`` precedes ``b`` iff ``a`` is reachable from ``b``.
    """
    partner = _partner_of(V, cx.n)
    s, t = cx.incidences()
    matched = partner[t] == s
    src = np.where(matched, s, t)
    dst = np.where(matched, t, s)
    return csr_matrix((np.ones(src.size, dtype=np.int8), (src, dst)),
                      shape=(cx.n, cx.n))


def linear_extension(cx, V=None):
    """Topological order of the induced Hasse diagram (smaller cells first).

    Raises
    ------
    CycleDetected
        If ``V`` contains a closed V-path.
    """
    status, order = _kernels.topo_order(cx.dims, cx.facet_ptr, cx.facet_idx,
                                        _partner_of(V, cx.n))
    if status == _kernels.CYCLE:
        raise CycleDetected("closed V-path found")
    return order


def is_gradient(cx, V):
    try:
        linear_extension(cx, V)
    except CycleDetected:
        return False
    return True


def critical_cells(cx, V):
    """(k, 2) array of ``(cell, index)`` for the unmatched cells."""
    c = V.critical()
    return np.stack([c, cx.dims[c].astype(np.int64)], axis=1)


# ------------------------------------------------------------- V-paths
@dataclass(frozen=True)
class VPath:
    """Alternating sequence ``(s0, t0, s1, ..., s_r)`` of a V-path."""
    cells: tuple

    @property
    def start(self):
        return self.cells[0]

    @property
    def end(self):
        return self.cells[-1]

    def __len__(self):
        return len(self.cells)


def _step(cx, partner, s):
    """Cells reachable from ``s`` in one V-path step (empty at a path end)."""
    t = partner[s]
    if t < 0 or cx.dims[t] <= cx.dims[s]:
        return t, []
    return t, [int(x) for x in cx.facets(t) if x != s]


def trace_vpaths_from(cx, V, tau, max_paths=10_000):
    """Maximal V-paths starting at facets of the critical cell ``tau``.

    Returns a list of ``(VPath, ends_at_critical)``. Paths are extended
    iteratively; a path stops at a cell that is not matched upward.
    """
    partner = V.partner
    if partner[tau] >= 0:
        raise NotCritical(f"cell {tau} is matched")
    if cx.dims[tau] not in (1, 2):
        raise WrongDimension("tracing starts at a 1-cell or a 2-cell")
    out = []
    stack = [(int(s),) for s in reversed(cx.facets(tau).tolist())]
    while stack:
        path = stack.pop()
        t, nxt = _step(cx, partner, path[-1])
        if not nxt:
            out.append((VPath(path), bool(partner[path[-1]] < 0)))
            continue
        for x in reversed(nxt):
            stack.append(path + (t, x))
        if len(stack) + len(out) > max_paths:
            raise NonUniquePath("too many V-paths to enumerate")
    return out


def _count_paths(cx, partner, start, target, cap=2):
    """Number of V-paths from ``start`` to ``target`` (saturating at cap)."""
    memo = {}
    # iterative post-order over the V-path DAG from start
    stack = [(start, False)]
    while stack:
        s, done = stack.pop()
        if s in memo:
            continue
        if s == target:
            memo[s] = 1
            continue
        _, nxt = _step(cx, partner, s)
        if done:
            memo[s] = min(cap, sum(memo[x] for x in nxt))
            continue
        stack.append((s, True))
        for x in nxt:
            if x not in memo:
                stack.append((x, False))
    return memo[start]


def cancel_pair(cx, V, sigma, tau):
    """Reverse ``V`` along the unique V-path from a facet of ``tau`` to ``sigma``.

    Raises
    ------
    NotCritical
        ``sigma`` or ``tau`` is matched in ``V``.
    NonUniquePath
        There is no such path or more than one.
    """
    partner = V.partner
    for c in (sigma, tau):
        if partner[c] >= 0:
            raise NotCritical(f"cell {c} is matched")
    if cx.dims[tau] != cx.dims[sigma] + 1:
        raise WrongDimension("tau must be one dimension above sigma")
    starts = [int(s) for s in cx.facets(tau)]
    counts = [_count_paths(cx, partner, s, sigma) for s in starts]
    if sum(counts) != 1:
        raise NonUniquePath(f"{sum(counts)} V-paths from the boundary of "
                            f"{tau} to {sigma}")
    # reconstruct the path
    s = starts[counts.index(1)]
    path = [s]
    while s != sigma:
        t, nxt = _step(cx, partner, s)
        s = next(x for x in nxt if _count_paths(cx, partner, x, sigma) == 1)
        path += [t, s]
    new = partner.copy()
    for i in range(0, len(path) - 1, 2):
        new[path[i]] = new[path[i + 1]] = -1
    new[path[0]], new[tau] = tau, path[0]
    for i in range(1, len(path) - 1, 2):
        new[path[i]], new[path[i + 1]] = path[i + 1], path[i]
    return GradientField(new)
