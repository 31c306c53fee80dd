"""Metric graphs with a compact core and truncated half-lines, on uniform grids.

A graph is a set of edges (real intervals) glued at vertices. Functions are
sampled with one shared spacing ``h`` on every edge; vertex samples are stored
once and shared by all incident edges, so continuity at vertices holds by
construction. Half-line edges are truncated at their stated length and carry a
decay marker (value pinned to zero by the solvers) at the far end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "EdgeSpec",
    "MetricGraph",
    "GridFunction",
    "HelmholtzSolver",
    "build_tadpole",
    "build_line",
    "build_halfline",
    "mass",
    "kinetic",
    "kirchhoff_residual",
    "normalized",
]


@dataclass(frozen=True)
class EdgeSpec:
    """One edge: a real interval of the given length.

    ``is_compact_core`` marks edges that carry the nonlinearity;
    ``is_halfline`` marks truncated half-lines (decay condition at the far
    end). An edge cannot be both.
    """

    length: float
    is_compact_core: bool = False
    is_halfline: bool = False

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"edge length must be positive, got {self.length}")
        if self.is_compact_core and self.is_halfline:
            raise ValueError("an edge cannot be both compact-core and half-line")


class MetricGraph:
    """Edges glued at vertices, discretized with a shared uniform spacing.

    ``incidence[v]`` lists ``(edge_id, end, sign)`` for every edge end meeting
    vertex ``v``; ``end`` is 0 or 1 and ``sign`` is +1 at end 0 and -1 at
    end 1, so that ``sum(sign * u'(end))`` over a vertex is the outgoing
    derivative balance used in the Kirchhoff condition.

    Edge lengths are rounded to integer multiples of ``h`` at construction.
    Instances are immutable and safe to share across threads.
    """

    def __init__(self, edges, incidence, h: float):
        if not h > 0:
            raise ValueError("grid spacing h must be positive")
        self.h = float(h)

        end_to_vertex = {}
        for v, ends in enumerate(incidence):
            for eid, end, sign in ends:
                if end not in (0, 1):
                    raise ValueError(f"edge end must be 0 or 1, got {end}")
                if sign != (1 if end == 0 else -1):
                    raise ValueError("orientation sign must be +1 at end 0, -1 at end 1")
                if (eid, end) in end_to_vertex:
                    raise ValueError(f"edge end ({eid},{end}) attached twice")
                end_to_vertex[(eid, end)] = v
        for eid in range(len(edges)):
            for end in (0, 1):
                if (eid, end) not in end_to_vertex:
                    raise ValueError(f"edge end ({eid},{end}) not attached to any vertex")

        rounded = []
        self._n_cells = []
        for eid, e in enumerate(edges):
            n = int(round(e.length / h))
            if n < 4:
                raise ValueError(
                    f"h={h} too coarse for edge {eid} of length {e.length}"
                )
            rounded.append(EdgeSpec(n * h, e.is_compact_core, e.is_halfline))
            self._n_cells.append(n)
        self.edges = tuple(rounded)
        self.incidence = tuple(tuple(ends) for ends in incidence)
        self.n_vertices = len(incidence)

        # DOF layout: vertices first, then edge interiors, contiguous per edge.
        self._edge_nodes = []
        next_dof = self.n_vertices
        for eid, n in enumerate(self._n_cells):
            ids = np.empty(n + 1, dtype=np.int64)
            ids[0] = end_to_vertex[(eid, 0)]
            ids[-1] = end_to_vertex[(eid, 1)]
            ids[1:-1] = np.arange(next_dof, next_dof + n - 1)
            next_dof += n - 1
            ids.setflags(write=False)
            self._edge_nodes.append(ids)
        self.n_dofs = next_dof

        self._check_connected()

        # Trapezoid weights, total and restricted to the compact core.
        W = np.zeros(self.n_dofs)
        Wc = np.zeros(self.n_dofs)
        for eid, ids in enumerate(self._edge_nodes):
            w = np.full(ids.shape, self.h)
            w[0] *= 0.5
            w[-1] *= 0.5
            np.add.at(W, ids, w)
            if self.edges[eid].is_compact_core:
                np.add.at(Wc, ids, w)
        W.setflags(write=False)
        Wc.setflags(write=False)
        self.quad_weights = W
        self.core_weights = Wc

        self.stiffness = self._assemble_stiffness()

        # Far ends of half-line edges (degree-1 vertices) carry the decay pin.
        dirichlet = []
        for eid, e in enumerate(self.edges):
            if e.is_halfline:
                v = end_to_vertex[(eid, 1)]
                if len(self.incidence[v]) == 1:
                    dirichlet.append(v)
        self.dirichlet_dofs = np.asarray(sorted(set(dirichlet)), dtype=np.int64)
        self.dirichlet_dofs.setflags(write=False)

    def _check_connected(self):
        adj = [set() for _ in range(self.n_vertices)]
        for eid in range(len(self.edges)):
            a = self._edge_nodes[eid][0]
            b = self._edge_nodes[eid][-1]
            adj[a].add(b)
            adj[b].add(a)
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != self.n_vertices:
            raise ValueError("graph is not connected")

    def _assemble_stiffness(self):
        # Quadratic form u.S.u = sum over cells of (du)^2/h, i.e. the Dirichlet
        # energy of the piecewise-linear interpolant.
        rows, cols, vals = [], [], []
        inv_h = 1.0 / self.h
        for ids in self._edge_nodes:
            a = ids[:-1]
            b = ids[1:]
            rows.extend([a, b, a, b])
            cols.extend([a, b, b, a])
            n = a.size
            vals.extend([np.full(n, inv_h), np.full(n, inv_h),
                         np.full(n, -inv_h), np.full(n, -inv_h)])
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
        S = sp.coo_matrix((vals, (rows, cols)), shape=(self.n_dofs, self.n_dofs))
        return S.tocsr()

    # -- structure queries ---------------------------------------------------

    def edge_node_ids(self, eid: int) -> np.ndarray:
        return self._edge_nodes[eid]

    def edge_num_cells(self, eid: int) -> int:
        return self._n_cells[eid]

    def edge_x(self, eid: int) -> np.ndarray:
        return self.h * np.arange(self._n_cells[eid] + 1)

    def degree(self, v: int) -> int:
        return len(self.incidence[v])

    @property
    def core_edge_ids(self):
        return tuple(i for i, e in enumerate(self.edges) if e.is_compact_core)

    @property
    def halfline_edge_ids(self):
        return tuple(i for i, e in enumerate(self.edges) if e.is_halfline)

    @property
    def total_length(self) -> float:
        return sum(e.length for e in self.edges)

    def is_tadpole(self) -> bool:
        """One loop (compact core, both ends at one vertex) plus one half-line."""
        if len(self.edges) != 2:
            return False
        loops = [i for i, ids in enumerate(self._edge_nodes) if ids[0] == ids[-1]]
        if len(loops) != 1:
            return False
        loop = loops[0]
        tail = 1 - loop
        if not (self.edges[loop].is_compact_core and self.edges[tail].is_halfline):
            return False
        junction = self._edge_nodes[loop][0]
        return self.degree(junction) == 3

    def tadpole_parts(self):
        """Return (loop edge id, half-line edge id, junction vertex)."""
        if not self.is_tadpole():
            raise ValueError("not a tadpole graph")
        loop = next(i for i, ids in enumerate(self._edge_nodes) if ids[0] == ids[-1])
        return loop, 1 - loop, int(self._edge_nodes[loop][0])

    def vertex_distances(self, source: int) -> np.ndarray:
        """Shortest path distance from a vertex to every vertex."""
        dist = np.full(self.n_vertices, np.inf)
        dist[source] = 0.0
        todo = {source}
        while todo:
            v = min(todo, key=lambda k: dist[k])
            todo.discard(v)
            for eid, end, _sign in self.incidence[v]:
                other = int(self._edge_nodes[eid][-1 if end == 0 else 0])
                cand = dist[v] + self.edges[eid].length
                if cand < dist[other] - 1e-15:
                    dist[other] = cand
                    todo.add(other)
        return dist


class GridFunction:
    """Real samples of a function on a :class:`MetricGraph`.

    Values are stored as one flat vector with vertex samples shared by all
    incident edges, so vertex continuity cannot be violated. Instances are
    immutable (the array is read-only).
    """

    __slots__ = ("graph", "values")

    def __init__(self, graph: MetricGraph, values: np.ndarray, _checked: bool = False):
        values = np.array(values, dtype=float, copy=True)
        if values.shape != (graph.n_dofs,):
            raise ValueError(
                f"expected {graph.n_dofs} samples, got shape {values.shape}"
            )
        if not _checked and not np.all(np.isfinite(values)):
            raise ValueError("samples must all be finite")
        values.setflags(write=False)
        self.graph = graph
        self.values = values

    @classmethod
    def zeros(cls, graph: MetricGraph) -> "GridFunction":
        return cls(graph, np.zeros(graph.n_dofs), _checked=True)

    @classmethod
    def from_edge_arrays(cls, graph: MetricGraph, arrays) -> "GridFunction":
        """Assemble from per-edge sample arrays; endpoint samples of edges
        sharing a vertex must agree."""
        if len(arrays) != len(graph.edges):
            raise ValueError("need one array per edge")
        flat = np.zeros(graph.n_dofs)
        seen = np.zeros(graph.n_dofs, dtype=bool)
        for eid, arr in enumerate(arrays):
            arr = np.asarray(arr, dtype=float)
            ids = graph.edge_node_ids(eid)
            if arr.shape != ids.shape:
                raise ValueError(
                    f"edge {eid}: expected {ids.size} samples, got {arr.size}"
                )
            clash = seen[ids]
            if np.any(clash):
                old = flat[ids][clash]
                new = arr[clash]
                scale = max(1.0, float(np.max(np.abs(arr))))
                if np.max(np.abs(old - new)) > 1e-9 * scale:
                    raise ValueError(f"edge {eid}: vertex samples disagree")
            flat[ids] = arr
            seen[ids] = True
        return cls(graph, flat)

    @classmethod
    def from_edge_callable(cls, graph: MetricGraph, fn) -> "GridFunction":
        """Sample ``fn(edge_id, x_array)`` on every edge."""
        return cls.from_edge_arrays(
            graph, [fn(eid, graph.edge_x(eid)) for eid in range(len(graph.edges))]
        )

    def edge_values(self, eid: int) -> np.ndarray:
        return self.values[self.graph.edge_node_ids(eid)]

    def vertex_value(self, v: int) -> float:
        return float(self.values[v])

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.graph, values)


def mass(u: GridFunction) -> float:
    """Trapezoid quadrature of u^2 over all edges."""
    return float(u.graph.quad_weights @ (u.values * u.values))


def kinetic(u: GridFunction) -> float:
    """Quadrature of (u')^2 over all edges (not halved).

    Uses forward differences per cell; equals the Dirichlet energy of the
    piecewise-linear interpolant, second-order accurate for smooth profiles.
    """
    g = u.graph
    total = 0.0
    for eid in range(len(g.edges)):
        dv = np.diff(u.values[g.edge_node_ids(eid)])
        total += float(dv @ dv) / g.h
    return total


def _one_sided_slope(vals: np.ndarray, h: float, end: int) -> float:
    # Second-order one-sided difference at an edge end.
    if end == 0:
        return (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * h)
    return (3.0 * vals[-1] - 4.0 * vals[-2] + vals[-3]) / (2.0 * h)


def kirchhoff_residual(u: GridFunction, lam: float | None = None) -> float:
    """|v'(0) - v'(L) + w'(0)| at the tadpole junction.

    Edge-end slopes use second-order one-sided stencils. If ``lam`` is given,
    the half-line contribution is replaced by the decay law -sqrt(lam)*u(v),
    which is exact for a tail proportional to exp(-sqrt(lam) x).
    """
    g = u.graph
    if not g.is_tadpole():
        raise ValueError("Kirchhoff residual is defined on tadpole graphs")
    _loop, tail, junction = g.tadpole_parts()
    total = 0.0
    for eid, end, sign in g.incidence[junction]:
        if lam is not None and eid == tail:
            total += sign * (-np.sqrt(lam) * u.values[junction])
            continue
        vals = u.values[g.edge_node_ids(eid)]
        total += sign * _one_sided_slope(vals, g.h, end)
    return abs(float(total))


def normalized(u: GridFunction, mu: float) -> GridFunction:
    """Rescale to squared L2 norm ``mu``."""
    m = mass(u)
    if m <= 0.0:
        raise ValueError("cannot normalize a function with zero mass")
    return GridFunction(u.graph, u.values * np.sqrt(mu / m), _checked=True)


class HelmholtzSolver:
    """Factorized (sigma*M + S) on the graph, far-end decay rows pinned.

    M is the lumped (trapezoid) mass matrix and S the stiffness form. Applying
    the inverse to a derivative vector yields a smoothed descent/ascent
    direction whose stable step size does not shrink with the grid; used by
    the gradient flows.
    """

    def __init__(self, graph: MetricGraph, sigma: float = 1.0):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        self.graph = graph
        A = (graph.stiffness + sp.diags(sigma * graph.quad_weights)).tolil()
        for d in graph.dirichlet_dofs:
            A[d, :] = 0.0
            A[:, d] = 0.0
            A[d, d] = 1.0
        self._lu = spla.splu(A.tocsc())

    def apply(self, rhs: np.ndarray) -> np.ndarray:
        r = np.array(rhs, dtype=float, copy=True)
        r[self.graph.dirichlet_dofs] = 0.0
        d = self._lu.solve(r)
        d[self.graph.dirichlet_dofs] = 0.0
        return d


def build_tadpole(L: float, R: float, h: float) -> MetricGraph:
    """Loop of length ~L (compact core) plus a half-line truncated at ~R,
    joined at a single degree-3 vertex. Lengths are rounded to multiples of h.
    """
    if L <= 0 or R <= 0 or h <= 0:
        raise ValueError("L, R, h must all be positive")
    if h > min(L, R) / 8.0:
        raise ValueError(f"h={h} too coarse; need h <= min(L, R)/8 = {min(L, R) / 8}")
    edges = [
        EdgeSpec(L, is_compact_core=True),
        EdgeSpec(R, is_halfline=True),
    ]
    incidence = [
        [(0, 0, 1), (0, 1, -1), (1, 0, 1)],  # junction: loop both ends + tail
        [(1, 1, -1)],                        # truncated far end
    ]
    return MetricGraph(edges, incidence, h)


def build_line(R: float, h: float) -> MetricGraph:
    """Line oracle: two truncated half-lines glued at a central vertex."""
    if R <= 0 or h <= 0:
        raise ValueError("R, h must be positive")
    if h > R / 8.0:
        raise ValueError(f"h={h} too coarse; need h <= R/8 = {R / 8}")
    edges = [EdgeSpec(R, is_halfline=True), EdgeSpec(R, is_halfline=True)]
    incidence = [
        [(0, 0, 1), (1, 0, 1)],
        [(0, 1, -1)],
        [(1, 1, -1)],
    ]
    return MetricGraph(edges, incidence, h)


def build_halfline(R: float, h: float) -> MetricGraph:
    """Half-line oracle: a single truncated half-line with a free origin."""
    if R <= 0 or h <= 0:
        raise ValueError("R, h must be positive")
    if h > R / 8.0:
        raise ValueError(f"h={h} too coarse; need h <= R/8 = {R / 8}")
    edges = [EdgeSpec(R, is_halfline=True)]
    incidence = [[(0, 0, 1)], [(0, 1, -1)]]
    return MetricGraph(edges, incidence, h)
