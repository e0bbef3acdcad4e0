"""Perfect delta-simplification of functions on surfaces.

The fast path extracts the simplified gradient field from the two
thresholded spanning forests and then builds the least and greatest
functions consistent with it inside the ``[f - delta, f + delta]`` box.
``plateau_sequence`` is the slow reference construction that cancels one
pair at a time.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import breadth_first_order

from . import _kernels
from .cell_complex import cap_boundary
from .errors import (CycleDetected, InternalInvariantViolation,
                     NotClosedSurface)
from .morse import (GradientField, build_total_order, cancel_pair,
                    induced_hasse_diagram)
from .persistence import RecordSet, all_persistence_pairs


@dataclass
class SimplificationResult:
    """Output of :func:`simplify`.

    All arrays are indexed by the cells of ``complex``, which is the capped
    input when the input had boundary. Use :meth:`strip` to drop the virtual
    cells.
    """
    complex: object
    f: np.ndarray
    delta: float
    order: object
    records: RecordSet
    v_delta: GradientField
    f_min: np.ndarray
    f_max: np.ndarray
    f_mean: np.ndarray
    surviving: RecordSet
    canceled: RecordSet
    n_input: int
    timings: dict = field(default_factory=dict)

    def strip(self, values):
        """Restrict a cell function to the cells of the original input."""
        return np.asarray(values)[:self.n_input]

    def critical(self, include_virtual=False):
        c = self.v_delta.critical()
        if not include_virtual:
            c = c[c < self.n_input]
        return c


def extract_gradient_field(cx, primal, dual=None):
    """Simplified gradient field from the thresholded primal and dual forests.

    Each forest component is traversed depth first from its creator; an edge
    reaching an unvisited node is matched with that node. ``dual`` may be
    omitted for a graph (a complex without 2-cells).

    Raises
    ------
    InternalInvariantViolation
        If a cell would be matched twice or a forest contains a cycle.
    """
    n = cx.n
    partner = np.full(n, -1, dtype=np.int64)
    for res, ptr, idx in ((primal, cx.cofacet_ptr, cx.cofacet_idx),
                          (dual, cx.facet_ptr, cx.facet_idx)):
        if res is None:
            continue
        if np.any(res.ends == n) or np.any(res.roots >= n):
            raise NotClosedSurface("dual graph has an outside node; "
                                   "cap the boundary first")
        local = np.full(n, -1, dtype=np.int64)
        local[res.edges] = np.arange(res.edges.size)
        status, _ = _kernels.forest_traverse(
            res.roots.astype(np.int64), ptr, idx, res.mdelta, local,
            res.ends, partner)
        if status != _kernels.OK:
            raise InternalInvariantViolation(
                f"forest traversal failed with status {status}")
    return GradientField(partner)


def _topo(cx, v_delta):
    status, order = _kernels.topo_order(cx.dims, cx.facet_ptr, cx.facet_idx,
                                        v_delta.partner)
    if status == _kernels.CYCLE:
        raise CycleDetected("simplified field has a closed V-path")
    return order


def construct_f_min(cx, f, v_delta, delta, topo=None):
    """Least function consistent with ``v_delta`` and ``>= f - delta``."""
    f = np.asarray(f, dtype=float)
    if topo is None:
        topo = _topo(cx, v_delta)
    return _kernels.lower_envelope(topo, f, float(delta), cx.dims,
                                   cx.facet_ptr, cx.facet_idx,
                                   v_delta.partner)


def construct_f_max(cx, f, v_delta, delta, topo=None):
    """Greatest function consistent with ``v_delta`` and ``<= f + delta``."""
    f = np.asarray(f, dtype=float)
    if topo is None:
        topo = _topo(cx, v_delta)
    return _kernels.upper_envelope(topo, f, float(delta), cx.dims,
                                   cx.facet_ptr, cx.facet_idx,
                                   v_delta.partner)


def symmetrize(f_min, f_max):
    """Componentwise mean of the two extreme solutions."""
    f_min = np.asarray(f_min, dtype=float)
    f_max = np.asarray(f_max, dtype=float)
    return (f_min + f_max) / 2


def smooth_within_polytope(cx, f, g, v_delta, delta, sweeps=10, pin=None):
    """Projected Gauss-Seidel smoothing of ``g - f`` inside the polytope.

    Every cell is moved toward the mean of ``g - f`` over its facets and
    cofacets (plus ``f`` at the cell), then clamped to the box
    ``[f - delta, f + delta]`` and to the interval allowed by its
    neighbours in the order induced by ``v_delta``. Critical cells of
    ``v_delta`` and cells with infinite value stay fixed, so the diagram of
    the output equals the diagram of ``g``.

    Parameters
    ----------
    g : ndarray
        Feasible starting point, typically the mean solution.
    pin : ndarray of bool, optional
        Extra cells to keep fixed.
    """
    f = np.asarray(f, dtype=float)
    g = np.array(g, dtype=float)
    pinned = (v_delta.partner < 0) | ~np.isfinite(f)
    if pin is not None:
        pinned |= pin
    return _kernels.gauss_seidel(
        g, f, f - delta, f + delta, pinned, int(sweeps), cx.dims,
        cx.facet_ptr, cx.facet_idx, cx.cofacet_ptr, cx.cofacet_idx,
        v_delta.partner)


def split_records(records, delta):
    """(surviving, canceled) records for threshold ``2 * delta``."""
    keep = records.essential | (records.persistence > 2 * delta)
    return records[keep], records[~keep]


def simplify(cx, f, delta, V=None, *, timer=None):
    """Perfect delta-simplification of ``f`` on the surface ``cx``.

    Surfaces with boundary are capped first; the virtual cells keep the
    value ``+inf`` and can be dropped with :meth:`SimplificationResult.strip`.

    Parameters
    ----------
    cx : CellComplex
        Combinatorial surface.
    f : array_like
        Cell values consistent with ``V`` (with the empty field by default).
    delta : float
        Sup-norm budget, ``>= 0``.
    V : GradientField, optional
        Field consistent with ``f``; must live on the capped complex if
        ``cx`` has boundary.
    timer : callable, optional
        Clock used for the per-stage timings (``time.perf_counter``).
    """
    if delta < 0 or not np.isfinite(delta):
        raise ValueError("delta must be finite and non-negative")
    f = np.asarray(f, dtype=float)
    n_input = cx.n
    tick = timer or (lambda: 0.0)
    times = {}

    t0 = tick()
    if not cx.is_closed:
        cx, f = cap_boundary(cx, f)
    if V is not None and len(V) != cx.n:
        raise ValueError("field size does not match the (capped) complex")
    order = build_total_order(cx, f, V)
    t1 = tick()
    times["order"] = t1 - t0
    records, primal, dual = all_persistence_pairs(cx, f, order, 2 * delta, V)
    t2 = tick()
    times["persistence"] = t2 - t1
    v_delta = extract_gradient_field(cx, primal, dual)
    t3 = tick()
    times["extract"] = t3 - t2
    topo = _topo(cx, v_delta)
    f_min = construct_f_min(cx, f, v_delta, delta, topo)
    f_max = construct_f_max(cx, f, v_delta, delta, topo)
    f_mean = symmetrize(f_min, f_max)
    times["construct"] = tick() - t3
    surviving, canceled = split_records(records, delta)
    return SimplificationResult(cx, f, float(delta), order, records, v_delta,
                                f_min, f_max, f_mean, surviving, canceled,
                                n_input, times)


# ------------------------------------------------------------ reference path
def _reach(adj, start):
    return breadth_first_order(adj, start, directed=True,
                               return_predecessors=False)


def plateau_sequence(cx, f, V, order, delta, pairs):
    """Cancel pairs one at a time with plateau functions (quadratic time).

    Parameters
    ----------
    pairs : iterable of (sigma, tau)
        Persistence pairs of ``(f, order)``. Those with persistence at most
        ``2 * delta`` are canceled in the order of their negative cells.

    Returns
    -------
    (GradientField, ndarray)
        The final field and plateau function.
    """
    f0 = np.asarray(f, dtype=float)
    g = f0.copy()
    V = GradientField.empty(cx.n) if V is None else V
    todo = [(int(s), int(t)) for s, t in pairs
            if f0[t] - f0[s] <= 2 * delta]
    todo.sort(key=lambda st: order.rank[st[1]])
    for s, t in todo:
        m = (f0[s] + f0[t]) / 2
        hasse = induced_hasse_diagram(cx, V)
        above = _reach(hasse.T.tocsr(), s)     # rho >= sigma
        below = _reach(hasse, t)               # rho <= tau
        up = above[g[above] < m]
        down = below[g[below] > m]
        g[up] = m
        g[down] = m
        V = cancel_pair(cx, V, s, t)
    return V, g
