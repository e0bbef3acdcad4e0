"""Finite regular CW complexes of dimension at most two.

Cells of every dimension share a single dense id space ``0..n-1``. Complexes
built here number their cells by dimension (all 0-cells, then all 1-cells,
then all 2-cells), and capping appends the virtual 2-cells at the end.

Incidences are stored in compressed sparse row form: ``facet_ptr[c]`` to
``facet_ptr[c + 1]`` delimits the facets of cell ``c`` inside ``facet_idx``.
Cofacets are the transpose of that relation.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .errors import (DegenerateTriangle, NonManifoldEdge, NotClosedSurface,
                     SizeOverflow)

_INDEX_LIMIT = np.iinfo(np.int64).max // 8


def csr_gather(ptr, idx, rows):
    """Concatenated CSR segments of ``rows`` and the row each entry came from."""
    rows = np.asarray(rows, dtype=np.int64)
    counts = ptr[rows + 1] - ptr[rows]
    total = int(counts.sum())
    offs = np.repeat(ptr[rows] - (np.cumsum(counts) - counts), counts)
    return idx[offs + np.arange(total)], np.repeat(rows, counts)


def _readonly(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


class CellComplex:
    """Cells with dimensions and facet/cofacet incidences.

    Parameters
    ----------
    dims : array_like of int
        Dimension (0, 1 or 2) of every cell.
    facet_ptr, facet_idx : array_like of int
        Facets of every cell in CSR layout. Repeated entries are allowed so
        that non-regular test fixtures can be represented; see
        :func:`validate_surface`.
    virtual : array_like of bool, optional
        Marks 2-cells added by :func:`cap_boundary`.
    boundary_components : int, optional
        Number of boundary cycles. Computed from the incidences when omitted.

    Instances are treated as immutable; all arrays are read-only.
    """

    def __init__(self, dims, facet_ptr, facet_idx, *, virtual=None,
                 boundary_components=None):
        self.dims = _readonly(dims, np.int8)
        self.facet_ptr = _readonly(facet_ptr, np.int64)
        self.facet_idx = _readonly(facet_idx, np.int64)
        n = self.dims.shape[0]
        if self.facet_ptr.shape[0] != n + 1:
            raise ValueError("facet_ptr must have one entry more than dims")
        if self.facet_idx.size and (self.facet_idx.min() < 0
                                    or self.facet_idx.max() >= n):
            raise ValueError("facet index out of range")
        cptr, cidx = _kernels.transpose_csr(n, self.facet_ptr, self.facet_idx)
        self.cofacet_ptr = _readonly(cptr, np.int64)
        self.cofacet_idx = _readonly(cidx, np.int64)
        if virtual is None:
            virtual = np.zeros(n, dtype=bool)
        self.virtual = _readonly(virtual, bool)
        if boundary_components is None:
            boundary_components = _count_boundary_components(self)
        self.boundary_components = int(boundary_components)

    @classmethod
    def from_cells(cls, facets, dims=None, **kwargs):
        """Build from an explicit facet list per cell (test fixtures)."""
        facets = [list(fs) for fs in facets]
        if dims is None:
            dims = []
            for fs in facets:
                dims.append(0 if not fs else 1 + max(dims[f] for f in fs))
        ptr = np.zeros(len(facets) + 1, dtype=np.int64)
        ptr[1:] = np.cumsum([len(fs) for fs in facets])
        idx = np.array([f for fs in facets for f in fs], dtype=np.int64)
        return cls(dims, ptr, idx, **kwargs)

    # ------------------------------------------------------------------ access
    @property
    def n(self):
        return self.dims.shape[0]

    def __len__(self):
        return self.n

    def __repr__(self):
        c0, c1, c2 = self.counts
        return (f"CellComplex({c0} vertices, {c1} edges, {c2} faces, "
                f"{int(self.virtual.sum())} virtual, "
                f"{self.boundary_components} boundary components)")

    @property
    def counts(self):
        """Number of cells of dimension 0, 1 and 2."""
        return tuple(int(c) for c in np.bincount(self.dims, minlength=3)[:3])

    def cells(self, dim):
        return np.flatnonzero(self.dims == dim)

    def facets(self, c):
        return self.facet_idx[self.facet_ptr[c]:self.facet_ptr[c + 1]]

    def cofacets(self, c):
        return self.cofacet_idx[self.cofacet_ptr[c]:self.cofacet_ptr[c + 1]]

    @property
    def n_facets(self):
        return np.diff(self.facet_ptr)

    @property
    def n_cofacets(self):
        return np.diff(self.cofacet_ptr)

    def incidences(self):
        """All (facet, cell) incidence pairs as two aligned arrays."""
        owner = np.repeat(np.arange(self.n), self.n_facets)
        return self.facet_idx, owner

    def euler_characteristic(self):
        c0, c1, c2 = self.counts
        return c0 - c1 + c2

    @property
    def is_closed(self):
        """Every 1-cell has exactly two cofacets."""
        edges = self.cells(1)
        return bool(np.all(self.n_cofacets[edges] == 2))

    def edge_endpoints(self):
        """(edge ids, (m, 2) array of their two 0-cells).

        A 1-cell listing a single facet is a loop and gets that vertex twice.
        """
        edges = self.cells(1)
        start = self.facet_ptr[edges]
        cnt = self.facet_ptr[edges + 1] - start
        if np.any((cnt < 1) | (cnt > 2)):
            raise ValueError("1-cells must have one or two facets")
        ends = np.empty((edges.size, 2), dtype=np.int64)
        ends[:, 0] = self.facet_idx[start]
        ends[:, 1] = self.facet_idx[start + cnt - 1]
        return edges, ends

    def edge_cofaces(self):
        """(edge ids, (m, 2) array of their 2-cells, reduced mod two).

        An edge whose cofacets cancel in pairs gets ``-1`` for both ends. An
        edge with a single surviving cofacet is attached to the marker
        ``self.n`` standing for the unbounded outside.
        """
        edges = self.cells(1)
        start = self.cofacet_ptr[edges]
        cnt = self.cofacet_ptr[edges + 1] - start
        ends = np.full((edges.size, 2), -1, dtype=np.int64)
        regular = cnt == 2
        a = self.cofacet_idx[start[regular]]
        b = self.cofacet_idx[start[regular] + 1]
        ends[regular, 0] = a
        ends[regular, 1] = b
        ends[regular & (ends[:, 0] == ends[:, 1])] = -1
        for k in np.flatnonzero(~regular):
            odd = [c for c, m in zip(*np.unique(self.cofacets(edges[k]),
                                                return_counts=True)) if m % 2]
            if len(odd) == 1:
                ends[k] = (odd[0], self.n)
            elif len(odd) == 2:
                ends[k] = odd
            elif len(odd) > 2:
                raise NotClosedSurface(
                    f"1-cell {edges[k]} has {len(odd)} cofacets")
        return edges, ends


# ---------------------------------------------------------------- construction
def from_triangle_mesh(n_vertices, triangles):
    """Complex of a triangle mesh: vertices, distinct edges, triangles.

    Raises
    ------
    NonManifoldEdge
        An edge is shared by three or more triangles.
    DegenerateTriangle
        A triangle repeats a vertex.
    """
    tri = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    nv = int(n_vertices)
    if tri.size and (tri.min() < 0 or tri.max() >= nv):
        raise ValueError("triangle vertex index out of range")
    bad = ((tri[:, 0] == tri[:, 1]) | (tri[:, 1] == tri[:, 2])
           | (tri[:, 0] == tri[:, 2]))
    if np.any(bad):
        raise DegenerateTriangle(f"triangle {int(np.flatnonzero(bad)[0])} "
                                 "repeats a vertex")
    nt = tri.shape[0]
    # edge k of a triangle joins corners k and k+1
    a = tri[:, [0, 1, 2]].ravel()
    b = tri[:, [1, 2, 0]].ravel()
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    keys, inverse, mult = np.unique(lo * nv + hi, return_inverse=True,
                                    return_counts=True)
    if np.any(mult > 2):
        k = int(keys[np.argmax(mult)])
        raise NonManifoldEdge(f"edge ({k // nv}, {k % nv}) is shared by "
                              f"{int(mult.max())} triangles")
    ne = keys.size
    if nv + ne + nt > _INDEX_LIMIT:
        raise SizeOverflow("cell count exceeds the index space")
    dims = np.concatenate([np.zeros(nv, np.int8), np.ones(ne, np.int8),
                           np.full(nt, 2, np.int8)])
    edge_facets = np.stack([keys // nv, keys % nv], axis=1)
    tri_facets = nv + inverse.reshape(nt, 3)
    ptr = np.concatenate([np.zeros(nv, np.int64),
                          np.full(ne, 2, np.int64),
                          np.full(nt, 3, np.int64)])
    ptr = np.concatenate([[0], np.cumsum(ptr)])
    idx = np.concatenate([edge_facets.ravel(), tri_facets.ravel()])
    return CellComplex(dims, ptr, idx)


def from_pixel_grid(rows, cols):
    """Cubical complex of a ``rows x cols`` image, one 2-cell per pixel.

    Vertices are numbered row-major on the ``(rows+1) x (cols+1)`` corner
    lattice, then horizontal edges, then vertical edges, then pixels in
    row-major order. Pixel ``(i, j)`` is cell ``pixel_offset + i * cols + j``.
    """
    rows, cols = int(rows), int(cols)
    if rows < 1 or cols < 1:
        raise ValueError("grid needs at least one row and one column")
    W = cols + 1
    nv = (rows + 1) * W
    nh = (rows + 1) * cols
    nvt = rows * W
    nf = rows * cols
    if nv + nh + nvt + nf > _INDEX_LIMIT:
        raise SizeOverflow("cell count exceeds the index space")
    ii, jj = np.divmod(np.arange(nh, dtype=np.int64), cols)
    h_facets = np.stack([ii * W + jj, ii * W + jj + 1], axis=1)
    ii, jj = np.divmod(np.arange(nvt, dtype=np.int64), W)
    v_facets = np.stack([ii * W + jj, (ii + 1) * W + jj], axis=1)
    ii, jj = np.divmod(np.arange(nf, dtype=np.int64), cols)
    h0, v0 = nv, nv + nh
    f_facets = np.stack([h0 + ii * cols + jj,          # top
                         v0 + ii * W + jj + 1,         # right
                         h0 + (ii + 1) * cols + jj,    # bottom
                         v0 + ii * W + jj], axis=1)    # left
    dims = np.concatenate([np.zeros(nv, np.int8), np.ones(nh + nvt, np.int8),
                           np.full(nf, 2, np.int8)])
    ptr = np.empty(dims.size + 1, dtype=np.int64)
    ptr[0] = 0
    ptr[1:nv + 1] = 0
    ptr[nv + 1:nv + nh + nvt + 1] = 2 * np.arange(1, nh + nvt + 1)
    ptr[nv + nh + nvt + 1:] = 2 * (nh + nvt) + 4 * np.arange(1, nf + 1)
    idx = np.concatenate([h_facets.ravel(), v_facets.ravel(),
                          f_facets.ravel()])
    return CellComplex(dims, ptr, idx, boundary_components=1)


def pixel_cells(complex_, shape):
    """Cell ids of the pixels of a grid built by :func:`from_pixel_grid`."""
    rows, cols = shape
    start = complex_.counts[0] + complex_.counts[1]
    return np.arange(start, start + rows * cols).reshape(rows, cols)


def _boundary_edges(cx):
    edges = cx.cells(1)
    return edges[cx.n_cofacets[edges] == 1]


def _count_boundary_components(cx):
    bd = _boundary_edges(cx)
    if bd.size == 0:
        return 0
    return len(_boundary_cycles(cx, bd))


def _boundary_cycles(cx, bd):
    """Group boundary edges into connected components, each traced in order."""
    ends = np.stack([cx.facet_idx[cx.facet_ptr[bd]],
                     cx.facet_idx[cx.facet_ptr[bd + 1] - 1]], axis=1)
    verts, local = np.unique(ends, return_inverse=True)
    local = local.reshape(-1, 2)
    m, nv = bd.size, verts.size
    # bipartite edge-vertex graph; components give the boundary cycles
    g = coo_matrix((np.ones(2 * m), (np.repeat(np.arange(m), 2),
                                     m + local.ravel())),
                   shape=(m + nv, m + nv))
    _, labels = connected_components(g, directed=False)
    labels = labels[:m]
    cycles = []
    for lab in np.unique(labels[np.argsort(bd)]):
        members = np.flatnonzero(labels == lab)
        cycles.append(_trace(bd[members], local[members]))
    cycles.sort(key=lambda c: min(c))
    return cycles


def _trace(edges, ends):
    """Order a cycle's edges by walking it; falls back to id order."""
    at = {}
    for k, (a, b) in enumerate(ends):
        at.setdefault(int(a), []).append(k)
        at.setdefault(int(b), []).append(k)
    if any(len(v) != 2 for v in at.values()):
        return sorted(int(e) for e in edges)
    start = int(np.argmin(edges))
    out, used = [], set()
    k, v = start, int(ends[start, 1])
    while k not in used:
        used.add(k)
        out.append(int(edges[k]))
        nxt = [j for j in at[v] if j not in used]
        if not nxt:
            break
        k = nxt[0]
        a, b = ends[k]
        v = int(b) if int(a) == v else int(a)
    if len(out) != len(edges):
        return sorted(int(e) for e in edges)
    return out


def cap_boundary(cx, f=None):
    """Close a surface by attaching one virtual 2-cell per boundary cycle.

    The virtual cells get the value ``+inf`` in the extended function. On a
    closed surface the inputs are returned unchanged.

    Returns
    -------
    (CellComplex, ndarray or None)
    """
    if f is not None:
        f = np.asarray(f, dtype=float)
    bd = _boundary_edges(cx)
    if bd.size == 0:
        return cx, f
    cycles = _boundary_cycles(cx, bd)
    k = len(cycles)
    dims = np.concatenate([cx.dims, np.full(k, 2, np.int8)])
    sizes = np.array([len(c) for c in cycles], dtype=np.int64)
    ptr = np.concatenate([cx.facet_ptr, cx.facet_ptr[-1] + np.cumsum(sizes)])
    idx = np.concatenate([cx.facet_idx,
                          np.concatenate([np.asarray(c) for c in cycles])])
    virtual = np.concatenate([cx.virtual, np.ones(k, dtype=bool)])
    capped = CellComplex(dims, ptr, idx, virtual=virtual,
                         boundary_components=0)
    if f is not None:
        f = np.concatenate([f, np.full(k, np.inf)])
    return capped, f


@dataclass(frozen=True)
class DualComplex:
    """A dual complex and the cell correspondence to its primal.

    ``to_primal[d]`` is the primal cell dual to dual cell ``d``;
    ``to_dual`` is the inverse permutation.
    """
    complex: CellComplex
    to_primal: np.ndarray
    to_dual: np.ndarray = field(repr=False)


def dual(cx):
    """Dual of a closed surface: ``i``-cells correspond to ``(2-i)``-cells.

    Dual ids list the primal 2-cells first, then 1-cells, then 0-cells, each
    group in primal id order.
    """
    edges = cx.cells(1)
    if not np.all(cx.n_cofacets[edges] == 2):
        raise NotClosedSurface("every 1-cell needs exactly two cofacets")
    to_primal = np.concatenate([cx.cells(2), edges, cx.cells(0)])
    to_dual = np.empty(cx.n, dtype=np.int64)
    to_dual[to_primal] = np.arange(cx.n)
    dims = 2 - cx.dims[to_primal]
    counts = cx.n_cofacets[to_primal]
    ptr = np.concatenate([[0], np.cumsum(counts)])
    idx = to_dual[csr_gather(cx.cofacet_ptr, cx.cofacet_idx, to_primal)[0]]
    d = CellComplex(dims, ptr, idx, virtual=cx.virtual[to_primal],
                    boundary_components=0)
    return DualComplex(d, _readonly(to_primal, np.int64),
                       _readonly(to_dual, np.int64))


# ------------------------------------------------------------------ validation
@dataclass
class SurfaceReport:
    """Outcome of :func:`validate_surface`."""
    is_regular: bool
    is_manifold: bool
    is_closed: bool
    boundary_components: int
    euler_characteristic: int
    problems: list = field(default_factory=list)

    def __bool__(self):
        return self.is_manifold


def validate_surface(cx, max_problems=20):
    """Check that ``cx`` is a combinatorial surface (possibly with boundary).

    Every 1-cell must have two distinct 0-cell facets and one or two
    cofacets, no cell may list a facet twice, and the link of every 0-cell
    must be a single path or cycle.
    """
    problems = []

    def note(msg):
        if len(problems) < max_problems:
            problems.append(msg)

    regular = True
    nfac = cx.n_facets
    fac, owner = cx.incidences()
    key = np.sort(owner * (cx.n + 1) + fac)
    for c in np.unique(key[1:][key[1:] == key[:-1]] // (cx.n + 1)):
        regular = False
        note(f"cell {c} lists a facet more than once")
    edges = cx.cells(1)
    for e in edges[nfac[edges] != 2]:
        regular = False
        note(f"1-cell {e} does not have two distinct 0-cell facets")

    manifold = regular
    ncof = cx.n_cofacets
    for e in edges[ncof[edges] > 2]:
        manifold = False
        note(f"1-cell {e} has {ncof[e]} cofacets")
    for e in edges[ncof[edges] == 0]:
        manifold = False
        note(f"1-cell {e} is not attached to any 2-cell")
    if manifold:
        bad = _link_check(cx)
        for v in bad:
            manifold = False
            note(f"link of 0-cell {v} is not a single path or cycle")
    closed = manifold and bool(np.all(ncof[edges] == 2))
    return SurfaceReport(regular, manifold, closed,
                         cx.boundary_components if manifold else 0,
                         cx.euler_characteristic(), problems)


def _link_check(cx):
    """0-cells whose link graph is not a single path or cycle."""
    verts = cx.cells(0)
    bad = _kernels.bad_links(verts, cx.cofacet_ptr, cx.cofacet_idx)
    return verts[bad].tolist()
