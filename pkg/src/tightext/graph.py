"""Weighted graphs, boundary problems, local Lipschitz constants and graph file I/O.

All containers are immutable after construction (their numpy buffers are marked
read-only), so they can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GraphFormatError",
    "WeightedGraph",
    "BoundaryProblem",
    "VertexFunction",
    "LipschitzProfile",
    "local_lipschitz",
    "lipschitz_profile",
    "is_tighter",
    "lex_compare",
    "read_graph",
    "write_graph",
    "load_graph",
    "save_graph",
]


class GraphFormatError(ValueError):
    """Raised when a graph text document cannot be parsed or is inconsistent."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class WeightedGraph:
    """Undirected connected graph with edge weights in (0, 1].

    Each undirected edge is given once as ``(i, j, w)``; the symmetric
    adjacency structure is built internally.  Absent edges are simply not
    stored (there is no zero-weight edge concept).  Node indices are 0-based.

    Set ``require_connected=False`` only for graphs whose consumers handle
    isolated vertices themselves (the patch-similarity graphs do).
    """

    def __init__(self, node_count: int, edges, *, require_connected: bool = True):
        if not isinstance(node_count, (int, np.integer)) or node_count < 1:
            raise ValueError(f"node_count must be a positive integer, got {node_count!r}")
        n = int(node_count)

        seen: dict[tuple[int, int], float] = {}
        src, dst, wts = [], [], []
        for edge in edges:
            try:
                i, j, w = edge
            except (TypeError, ValueError):
                raise ValueError(f"edge must be an (i, j, weight) triple, got {edge!r}") from None
            i, j, w = int(i), int(j), float(w)
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for {n} nodes")
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0.0 < w <= 1.0) or not np.isfinite(w):
                raise ValueError(f"edge ({i}, {j}) weight {w} outside (0, 1]")
            key = (min(i, j), max(i, j))
            if key in seen:
                if seen[key] != w:
                    raise ValueError(f"asymmetric weights for edge {key}: {seen[key]} vs {w}")
                raise ValueError(f"duplicate edge {key}")
            seen[key] = w
            src.append(i)
            dst.append(j)
            wts.append(w)

        self._n = n
        self._edge_list = tuple(sorted(seen.items()))  # ((i, j), w) with i < j

        # Symmetric CSR: per node, neighbors appear in edge-insertion order
        # (the two directed copies of edge k are interleaved at 2k, 2k+1 so a
        # stable sort by source preserves that order for both endpoints).
        both_src = np.empty(2 * len(src), dtype=np.int64)
        both_dst = np.empty_like(both_src)
        both_w = np.empty(2 * len(src), dtype=np.float64)
        both_src[0::2], both_src[1::2] = src, dst
        both_dst[0::2], both_dst[1::2] = dst, src
        both_w[0::2] = wts
        both_w[1::2] = wts
        order = np.argsort(both_src, kind="stable")
        counts = np.bincount(both_src, minlength=n)
        self._ptr = _freeze(np.concatenate(([0], np.cumsum(counts))).astype(np.int64))
        self._nbr = _freeze(both_dst[order])
        self._w = _freeze(both_w[order])
        self._sqw = _freeze(np.sqrt(both_w[order]))

        self._connected = self._bfs_connected()
        if require_connected and not self._connected:
            raise ValueError("graph is not connected")

    def _bfs_connected(self) -> bool:
        if self._n == 1:
            return True
        seen = np.zeros(self._n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            x = stack.pop()
            for y in self._nbr[self._ptr[x]:self._ptr[x + 1]]:
                if not seen[y]:
                    seen[y] = True
                    stack.append(int(y))
        return bool(seen.all())

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return len(self._edge_list)

    @property
    def connected(self) -> bool:
        return self._connected

    def edges(self):
        """Canonical edge list: ((i, j), w) tuples with i < j, sorted."""
        return self._edge_list

    def neighbors(self, x: int):
        """Neighbor indices and weights of node ``x``, in adjacency order."""
        lo, hi = self._ptr[x], self._ptr[x + 1]
        return self._nbr[lo:hi], self._w[lo:hi]

    def degree(self, x: int) -> int:
        return int(self._ptr[x + 1] - self._ptr[x])

    def reachable_from(self, sources) -> np.ndarray:
        """Boolean mask of nodes reachable from the given source nodes."""
        seen = np.zeros(self._n, dtype=bool)
        stack = [int(s) for s in np.atleast_1d(sources)]
        for s in stack:
            seen[s] = True
        while stack:
            x = stack.pop()
            for y in self._nbr[self._ptr[x]:self._ptr[x + 1]]:
                if not seen[y]:
                    seen[y] = True
                    stack.append(int(y))
        return seen


class VertexFunction:
    """An assignment of a vector in R^m to every node of a graph."""

    def __init__(self, data):
        arr = np.array(data, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"vertex data must be (node_count, m), got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("vertex data contains non-finite values")
        self._data = _freeze(arr)

    @classmethod
    def zeros(cls, node_count: int, dim: int = 1) -> "VertexFunction":
        return cls(np.zeros((node_count, dim)))

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def node_count(self) -> int:
        return self._data.shape[0]

    @property
    def dim(self) -> int:
        return self._data.shape[1]

    def component(self, j: int) -> np.ndarray:
        return self._data[:, j].copy()

    def __repr__(self):
        return f"VertexFunction(node_count={self.node_count}, dim={self.dim})"


class BoundaryProblem:
    """A graph, a nonempty boundary node set U and boundary values g: U -> R^m."""

    def __init__(self, graph: WeightedGraph, boundary, values):
        given = np.array([int(b) for b in boundary], dtype=np.int64)
        if given.size == 0:
            raise ValueError("boundary set must be nonempty")
        if np.unique(given).size != given.size:
            raise ValueError("boundary indices must be unique")
        if given.min() < 0 or given.max() >= graph.node_count:
            raise ValueError("boundary index out of range")
        vals = np.array(values, dtype=np.float64)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape != (given.size, vals.shape[1]) or vals.shape[1] < 1:
            raise ValueError(f"boundary values must be ({given.size}, m), got {vals.shape}")
        if not np.isfinite(vals).all():
            raise ValueError("boundary values contain non-finite entries")
        order = np.argsort(given)
        bnd = given[order]
        vals = vals[order]

        self.graph = graph
        self.boundary = _freeze(bnd)
        self.values = _freeze(vals)
        mask = np.zeros(graph.node_count, dtype=bool)
        mask[bnd] = True
        self._boundary_mask = _freeze(mask)
        self.interior = _freeze(np.flatnonzero(~mask))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def boundary_mask(self) -> np.ndarray:
        return self._boundary_mask

    def scalar_component(self, j: int) -> "BoundaryProblem":
        """The same problem restricted to coordinate ``j`` of the values."""
        return BoundaryProblem(self.graph, self.boundary, self.values[:, [j]])

    def embed(self, interior_values) -> VertexFunction:
        """Assemble a full vertex function from values on the interior nodes."""
        data = np.zeros((self.graph.node_count, self.dim))
        data[self.boundary] = self.values
        if self.interior.size:
            iv = np.asarray(interior_values, dtype=np.float64).reshape(self.interior.size, self.dim)
            data[self.interior] = iv
        return VertexFunction(data)

    def check_extension(self, u: VertexFunction) -> None:
        """Raise unless ``u`` matches the graph size and equals g on U."""
        if u.node_count != self.graph.node_count or u.dim != self.dim:
            raise ValueError(
                f"function shape ({u.node_count}, {u.dim}) does not match problem "
                f"({self.graph.node_count}, {self.dim})"
            )
        if not np.array_equal(u.data[self.boundary], self.values):
            raise ValueError("function does not agree with the boundary values on U")


@dataclass(frozen=True)
class LipschitzProfile:
    """Local Lipschitz constants on the interior, raw and sorted nonincreasingly."""

    per_node: np.ndarray    # aligned with BoundaryProblem.interior
    sorted_desc: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "per_node", _freeze(np.asarray(self.per_node, dtype=np.float64)))
        object.__setattr__(self, "sorted_desc", _freeze(np.asarray(self.sorted_desc, dtype=np.float64)))

    def __len__(self):
        return self.per_node.size


def all_local_lipschitz(values: np.ndarray, graph: WeightedGraph) -> np.ndarray:
    """Vector of S u(x) for every node x; isolated nodes get 0.

    ``values`` is a (node_count, m) array.  Pure function of read-only inputs,
    safe to call concurrently.
    """
    vals = np.asarray(values, dtype=np.float64)
    if vals.ndim == 1:
        vals = vals[:, None]
    ptr, nbr, sqw = graph._ptr, graph._nbr, graph._sqw
    deg = np.diff(ptr)
    out = np.zeros(graph.node_count)
    if nbr.size == 0:
        return out
    owner = np.repeat(np.arange(graph.node_count), deg)
    diffs = vals[nbr] - vals[owner]
    norms = sqw * np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
    nonempty = deg > 0
    starts = ptr[:-1][nonempty]
    out[nonempty] = np.maximum.reduceat(norms, starts)
    return out


def local_lipschitz(u: VertexFunction, prob: BoundaryProblem, x: int) -> float:
    """Largest weighted jump of ``u`` from node ``x`` to any of its neighbors.

    Defined for any vertex function; ``u`` need not agree with the boundary
    values.
    """
    graph = prob.graph
    if u.node_count != graph.node_count:
        raise ValueError("function size does not match graph")
    idx, w = graph.neighbors(int(x))
    if idx.size == 0:
        raise ValueError(f"node {x} has no neighbors")
    diffs = u.data[idx] - u.data[int(x)]
    return float(np.max(np.sqrt(w) * np.linalg.norm(diffs, axis=1)))


def lipschitz_profile(u: VertexFunction, prob: BoundaryProblem) -> LipschitzProfile:
    """Per-interior-node local Lipschitz constants, plus the nonincreasing sort."""
    if u.node_count != prob.graph.node_count:
        raise ValueError("function size does not match graph")
    interior = prob.interior
    if interior.size == 0:
        empty = np.zeros(0)
        return LipschitzProfile(empty, empty.copy())
    degs = np.array([prob.graph.degree(int(x)) for x in interior])
    if (degs == 0).any():
        missing = interior[degs == 0]
        raise ValueError(f"interior node(s) {missing.tolist()} have no neighbors")
    per = all_local_lipschitz(u.data, prob.graph)[interior]
    return LipschitzProfile(per, np.sort(per)[::-1])


def is_tighter(u: VertexFunction, v: VertexFunction, prob: BoundaryProblem) -> bool:
    """Whether ``u`` is tighter than ``v``.

    Compares the worst interior node where ``u`` improves on ``v`` against the
    worst node where it is worse; the maximum over an empty set is -inf, so a
    strict improvement somewhere with no worsening anywhere wins.
    """
    prob.check_extension(u)
    prob.check_extension(v)
    su = lipschitz_profile(u, prob).per_node
    sv = lipschitz_profile(v, prob).per_node
    improved = su < sv
    worsened = sv < su
    lhs = sv[improved].max() if improved.any() else -np.inf
    rhs = su[worsened].max() if worsened.any() else -np.inf
    return bool(lhs > rhs)


def lex_compare(a: LipschitzProfile, b: LipschitzProfile) -> int:
    """Lexicographic order of two sorted profiles: -1, 0 or +1."""
    pa, pb = a.sorted_desc, b.sorted_desc
    if pa.size != pb.size:
        raise ValueError(f"profile length mismatch: {pa.size} vs {pb.size}")
    for x, y in zip(pa, pb):
        if x < y:
            return -1
        if x > y:
            return 1
    return 0


# ---------------------------------------------------------------------------
# Text format
#
#   graph <node_count> <edge_count> <m>
#   e <i> <j> <weight>          (edge_count lines, i < j canonical)
#   boundary <count>
#   b <i> <g_1> ... <g_m>       (count lines)
#
# Whitespace-tolerant; '#' starts a comment.
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def read_graph(source) -> BoundaryProblem:
    """Parse a graph document from a string, bytes, or a readable text stream."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = source
    if isinstance(text, bytes):
        text = text.decode("utf-8")

    rows = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((ln, line.split()))
    if not rows:
        raise GraphFormatError("empty graph document")

    def fail(ln, msg):
        raise GraphFormatError(f"line {ln}: {msg}")

    ln, tok = rows[0]
    if len(tok) != 4 or tok[0] != "graph":
        fail(ln, f"expected 'graph <nodes> <edges> <m>', got {' '.join(tok)!r}")
    try:
        n, e, m = int(tok[1]), int(tok[2]), int(tok[3])
    except ValueError:
        fail(ln, "graph header fields must be integers")
    if n < 1 or e < 0 or m < 1:
        fail(ln, f"invalid graph header values ({n}, {e}, {m})")

    pos = 1
    edges = []
    for _ in range(e):
        if pos >= len(rows):
            raise GraphFormatError(f"expected {e} edge lines, found {len(edges)}")
        ln, tok = rows[pos]
        pos += 1
        if len(tok) != 4 or tok[0] != "e":
            fail(ln, f"expected 'e <i> <j> <weight>', got {' '.join(tok)!r}")
        try:
            i, j, w = int(tok[1]), int(tok[2]), float(tok[3])
        except ValueError:
            fail(ln, "malformed edge line")
        if not np.isfinite(w):
            fail(ln, f"edge weight {tok[3]} is not finite")
        edges.append((i, j, w))

    if pos >= len(rows):
        raise GraphFormatError("missing 'boundary <count>' section")
    ln, tok = rows[pos]
    pos += 1
    if len(tok) != 2 or tok[0] != "boundary":
        fail(ln, f"expected 'boundary <count>', got {' '.join(tok)!r}")
    try:
        bcount = int(tok[1])
    except ValueError:
        fail(ln, "boundary count must be an integer")
    if bcount < 1:
        fail(ln, "boundary must contain at least one node")

    bidx, bvals = [], []
    for _ in range(bcount):
        if pos >= len(rows):
            raise GraphFormatError(f"expected {bcount} boundary lines, found {len(bidx)}")
        ln, tok = rows[pos]
        pos += 1
        if len(tok) != 2 + m or tok[0] != "b":
            fail(ln, f"expected 'b <i> <{m} values>', got {' '.join(tok)!r}")
        try:
            bi = int(tok[1])
            gv = [float(t) for t in tok[2:]]
        except ValueError:
            fail(ln, "malformed boundary line")
        if not np.isfinite(gv).all():
            fail(ln, "boundary values must be finite")
        if bi in bidx:
            fail(ln, f"duplicate boundary node {bi}")
        bidx.append(bi)
        bvals.append(gv)

    if pos != len(rows):
        fail(rows[pos][0], "unexpected trailing content")

    try:
        graph = WeightedGraph(n, edges)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None
    order = np.argsort(bidx)
    try:
        return BoundaryProblem(graph, [bidx[k] for k in order], [bvals[k] for k in order])
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None


def write_graph(prob: BoundaryProblem) -> str:
    """Serialize a boundary problem to the canonical text form."""
    g = prob.graph
    lines = [f"graph {g.node_count} {g.edge_count} {prob.dim}"]
    for (i, j), w in g.edges():
        lines.append(f"e {i} {j} {_fmt(w)}")
    lines.append(f"boundary {prob.boundary.size}")
    for b, vals in zip(prob.boundary, prob.values):
        lines.append("b " + str(int(b)) + " " + " ".join(_fmt(v) for v in vals))
    return "\n".join(lines) + "\n"


def load_graph(path) -> BoundaryProblem:
    with open(path, "r", encoding="utf-8") as fh:
        return read_graph(fh)


def save_graph(path, prob: BoundaryProblem) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_graph(prob))
