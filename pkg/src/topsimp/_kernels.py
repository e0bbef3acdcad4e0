"""Compiled inner loops. Everything here works on flat integer arrays over the
global cell id space; the public modules wrap these with argument checking."""

import numpy as np
from numba import njit

# status codes returned by kernels that can fail
OK = 0
CYCLE = 1
DOUBLE_MATCH = 2
NOT_FOREST = 3


@njit(cache=True)
def transpose_csr(n, ptr, idx):
    """Counting-sort transpose of a CSR incidence (facets -> cofacets)."""
    counts = np.zeros(n + 1, dtype=np.int64)
    for k in range(idx.shape[0]):
        counts[idx[k] + 1] += 1
    for i in range(n):
        counts[i + 1] += counts[i]
    out_ptr = counts.copy()
    fill = counts[:-1].copy()
    out_idx = np.empty(idx.shape[0], dtype=np.int64)
    for c in range(n):
        for k in range(ptr[c], ptr[c + 1]):
            f = idx[k]
            out_idx[fill[f]] = c
            fill[f] += 1
    return out_ptr, out_idx


@njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def kruskal(edges, ends, matched, node_rank, values, two_delta, n_nodes):
    """Union-find sweep over ``edges`` (already in sweep order).

    ``ends[k]`` are the two node ids of ``edges[k]`` (-1 when the edge has no
    endpoint in this graph). ``matched[k]`` is the node id matched with the edge
    by the input gradient field, or -1. Nodes are creators ordered by
    ``node_rank``; the younger creator (larger rank) is paired with the edge.
    """
    m = edges.shape[0]
    parent = np.arange(n_nodes)
    size = np.ones(n_nodes, dtype=np.int64)
    creator = np.arange(n_nodes)
    hier = -np.ones(n_nodes, dtype=np.int64)
    absorbed = np.zeros(n_nodes, dtype=np.bool_)
    tree = np.zeros(m, dtype=np.bool_)
    mdelta = np.zeros(m, dtype=np.bool_)
    pair_pos = np.empty(m, dtype=np.int64)
    pair_neg = np.empty(m, dtype=np.int64)
    npairs = 0
    for k in range(m):
        a = ends[k, 0]
        b = ends[k, 1]
        if a < 0 or b < 0:
            continue
        ra = _find(parent, a)
        rb = _find(parent, b)
        if ra == rb:
            continue
        e = edges[k]
        tree[k] = True
        p = matched[k]
        if p >= 0:
            # the matched node enters together with the edge; no class is born
            if _find(parent, p) == ra:
                old = creator[rb]
            else:
                old = creator[ra]
            young = p
            mdelta[k] = True
            absorbed[p] = True
        else:
            ca = creator[ra]
            cb = creator[rb]
            if node_rank[ca] < node_rank[cb]:
                old = ca
                young = cb
            else:
                old = cb
                young = ca
            pair_pos[npairs] = young
            pair_neg[npairs] = e
            npairs += 1
            hier[young] = old
            if values[e] - values[young] <= two_delta:
                mdelta[k] = True
                absorbed[young] = True
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]
        creator[ra] = old
    return tree, mdelta, pair_pos[:npairs], pair_neg[:npairs], hier, absorbed


@njit(cache=True)
def forest_traverse(roots, node_ptr, node_idx, use_edge, edge_local, ends,
                    partner):
    """Depth-first traversal of a spanning forest from its roots.

    ``node_ptr/node_idx`` list the incident edge ids of every node,
    ``edge_local[e]`` maps a global edge id to its row in ``ends``/``use_edge``.
    On reaching an unvisited node ``phi`` through edge ``psi`` the pair
    ``(phi, psi)`` is written to ``partner`` (symmetrically).
    Returns a status code and the number of visited nodes.
    """
    n = partner.shape[0]
    visited = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    nvisit = 0
    for r in roots:
        if visited[r]:
            return NOT_FOREST, nvisit
        visited[r] = True
        nvisit += 1
        sp = 0
        stack[0] = r
        while sp >= 0:
            u = stack[sp]
            sp -= 1
            for k in range(node_ptr[u], node_ptr[u + 1]):
                e = node_idx[k]
                row = edge_local[e]
                if row < 0 or not use_edge[row]:
                    continue
                v = ends[row, 0]
                if v == u:
                    v = ends[row, 1]
                if partner[e] >= 0:
                    # edge already used to enter its other endpoint
                    if partner[e] == u or partner[e] == v:
                        continue
                    return DOUBLE_MATCH, nvisit
                if visited[v]:
                    return NOT_FOREST, nvisit
                if partner[v] >= 0:
                    return DOUBLE_MATCH, nvisit
                visited[v] = True
                nvisit += 1
                partner[v] = e
                partner[e] = v
                sp += 1
                stack[sp] = v
    return OK, nvisit


@njit(cache=True)
def topo_order(dims, fptr, fidx, partner):
    """Linear extension of the field-induced order (smaller cells first).

    Iterative DFS post-order over predecessor lists: the facets of a cell
    other than its partner, plus the partner when it lies one dimension up.
    Slot ``nf`` of a cell with ``nf`` facets stands for that partner.
    Returns (status, order).
    """
    n = dims.shape[0]
    order = np.empty(n, dtype=np.int64)
    state = np.zeros(n, dtype=np.int8)
    stack_c = np.empty(n, dtype=np.int64)
    stack_k = np.empty(n, dtype=np.int64)
    pos = 0
    for s in range(n):
        if state[s] != 0:
            continue
        sp = 0
        stack_c[0] = s
        stack_k[0] = fptr[s]
        state[s] = 1
        while sp >= 0:
            c = stack_c[sp]
            k = stack_k[sp]
            end = fptr[c + 1]
            if k <= end:
                stack_k[sp] = k + 1
                pc = partner[c]
                if k < end:
                    p = fidx[k]
                    if p == pc:
                        continue
                elif pc >= 0 and dims[pc] > dims[c]:
                    p = pc
                else:
                    continue
                if state[p] == 0:
                    state[p] = 1
                    sp += 1
                    stack_c[sp] = p
                    stack_k[sp] = fptr[p]
                elif state[p] == 1:
                    return CYCLE, order[:pos]
            else:
                state[c] = 2
                order[pos] = c
                pos += 1
                sp -= 1
    return OK, order


@njit(cache=True)
def lower_envelope(order, values, delta, dims, fptr, fidx, partner):
    """Least function >= values - delta consistent with the field."""
    out = np.empty(values.shape[0])
    for i in range(order.shape[0]):
        c = order[i]
        v = values[c] - delta
        pc = partner[c]
        for k in range(fptr[c], fptr[c + 1]):
            q = fidx[k]
            if q != pc and out[q] > v:
                v = out[q]
        if pc >= 0 and dims[pc] > dims[c] and out[pc] > v:
            v = out[pc]
        out[c] = v
    return out


@njit(cache=True)
def upper_envelope(order, values, delta, dims, fptr, fidx, partner):
    """Greatest function <= values + delta consistent with the field."""
    out = values + delta
    for i in range(order.shape[0] - 1, -1, -1):
        c = order[i]
        v = out[c]
        pc = partner[c]
        for k in range(fptr[c], fptr[c + 1]):
            q = fidx[k]
            if q != pc and out[q] > v:
                out[q] = v
        if pc >= 0 and dims[pc] > dims[c] and out[pc] > v:
            out[pc] = v
    return out


@njit(cache=True)
def gauss_seidel(g, f, lo_box, hi_box, pinned, sweeps, dims, fptr, fidx,
                 cptr, cidx, partner):
    """Projected Gauss-Seidel sweeps on the Dirichlet energy of g - f.

    Every update is clamped into the box and into the interval spanned by the
    current values of the Hasse predecessors and successors, so feasibility
    is preserved after each single-cell update.
    """
    n = g.shape[0]
    for _ in range(sweeps):
        for c in range(n):
            if pinned[c]:
                continue
            lo = lo_box[c]
            hi = hi_box[c]
            pc = partner[c]
            acc = 0.0
            cnt = 0
            # facets: predecessors unless matched with c
            for k in range(fptr[c], fptr[c + 1]):
                q = fidx[k]
                if q == pc:
                    if g[q] < hi:
                        hi = g[q]
                elif g[q] > lo:
                    lo = g[q]
                if np.isfinite(g[q]):
                    acc += g[q] - f[q]
                    cnt += 1
            # cofacets: successors unless matched with c
            for k in range(cptr[c], cptr[c + 1]):
                q = cidx[k]
                if q == pc:
                    if g[q] > lo:
                        lo = g[q]
                elif g[q] < hi:
                    hi = g[q]
                if np.isfinite(g[q]):
                    acc += g[q] - f[q]
                    cnt += 1
            if cnt == 0:
                continue
            v = f[c] + acc / cnt
            if v < lo:
                v = lo
            if v > hi:
                v = hi
            g[c] = v
    return g


@njit(cache=True)
def bad_links(verts, cptr, cidx):
    """Flag 0-cells whose link is not a single path or cycle.

    The link of v has one node per incident edge and one arc per 2-cell
    through v, joining the two edges of that 2-cell which contain v.
    """
    bad = np.zeros(verts.shape[0], dtype=np.bool_)
    for t in range(verts.shape[0]):
        v = verts[t]
        d = cptr[v + 1] - cptr[v]
        if d == 0:
            bad[t] = True
            continue
        m = 0
        for i in range(d):
            e = cidx[cptr[v] + i]
            m += cptr[e + 1] - cptr[e]
        faces = np.empty(m, dtype=np.int64)
        owner = np.empty(m, dtype=np.int64)
        m = 0
        for i in range(d):
            e = cidx[cptr[v] + i]
            for k in range(cptr[e], cptr[e + 1]):
                faces[m] = cidx[k]
                owner[m] = i
                m += 1
        srt = np.argsort(faces)
        parent = np.arange(d)
        deg = np.zeros(d, dtype=np.int64)
        ncomp = d
        k = 0
        while k < m:
            j = k
            while j < m and faces[srt[j]] == faces[srt[k]]:
                j += 1
            if j - k != 2:
                bad[t] = True
                break
            a = owner[srt[k]]
            b = owner[srt[k + 1]]
            deg[a] += 1
            deg[b] += 1
            ra = _find(parent, a)
            rb = _find(parent, b)
            if ra != rb:
                parent[rb] = ra
                ncomp -= 1
            k = j
        if bad[t]:
            continue
        if ncomp != 1 or deg.max() > 2:
            bad[t] = True
    return bad
