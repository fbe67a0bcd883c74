"""Shared fixture problems and generators for the test suite."""

from __future__ import annotations

import numpy as np

from tightext import BoundaryProblem, VertexFunction, WeightedGraph

R3 = np.sqrt(3.0)

# Six-node instance with three boundary nodes holding planar positions; it has
# several componentwise-harmonic extensions but a unique tight one.
F1 = {3: (R3 / 6, 1 / 3), 4: (R3 / 6, 2 / 3), 5: (1 / R3, 0.5)}      # componentwise
F2 = {3: (1 / (2 + 2 * R3), R3 / (2 + 2 * R3)),
      4: (1 / (2 + 2 * R3), 0.25 + R3 / 4),
      5: (0.5, 0.5)}                                                 # tight
U1 = {3: (R3 / 7, 2 / 7), 4: (R3 / 14, 9 / 14), 5: (2 * R3 / 7, 4 / 7)}  # harmonic, not tight

SIX_NODE_TEXT = """\
# six-node planar example, m=2
graph 6 6 2
e 0 3 1.0
e 1 4 1.0
e 2 5 1.0
e 3 4 1.0
e 4 5 1.0
e 3 5 1.0
boundary 3
b 0 0.0 0.0
b 1 0.0 1.0
b 2 0.8660254037844386 0.5
"""


def six_node_problem() -> BoundaryProblem:
    graph = WeightedGraph(6, [(0, 3, 1.0), (1, 4, 1.0), (2, 5, 1.0),
                              (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)])
    return BoundaryProblem(graph, [0, 1, 2], [[0.0, 0.0], [0.0, 1.0], [R3 / 2, 0.5]])


def embed_interior(prob: BoundaryProblem, by_node: dict) -> VertexFunction:
    return prob.embed([by_node[int(x)] for x in prob.interior])


def path_problem(values_by_boundary: dict, n: int = 3, weights=None,
                 m: int = 1) -> BoundaryProblem:
    """Path graph 0-1-...-(n-1) with the given boundary nodes and values."""
    weights = weights or [1.0] * (n - 1)
    graph = WeightedGraph(n, [(i, i + 1, weights[i]) for i in range(n - 1)])
    bnd = sorted(values_by_boundary)
    vals = np.asarray([values_by_boundary[b] for b in bnd], dtype=np.float64)
    if vals.ndim == 1:
        vals = vals[:, None]
    return BoundaryProblem(graph, bnd, vals)


def star_problem() -> BoundaryProblem:
    """Four nodes: path 0-1-2 plus a pendant 3 on the center; values +-1.

    The sup of the local Lipschitz constants does not distinguish where the
    pendant sits, but the power energies do.
    """
    graph = WeightedGraph(4, [(0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0)])
    return BoundaryProblem(graph, [0, 2], [[1.0], [-1.0]])


def nonstrict_convexity_problem():
    """Path 0-1-2-3 with only node 1 fixed at 0; two extensions and their
    midpoint share the same quadratic energy."""
    graph = WeightedGraph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    prob = BoundaryProblem(graph, [1], [[0.0]])
    u = VertexFunction([[1.0], [0.0], [1.0], [3.0]])
    v = VertexFunction([[1.0], [0.0], [-1.0], [1.0]])
    return prob, u, v


def lex_counterexample():
    """3-path with the center fixed: profiles are lex-ordered yet neither
    function is tighter than the other."""
    graph = WeightedGraph(3, [(0, 1, 1.0), (1, 2, 1.0)])
    prob = BoundaryProblem(graph, [1], [[2.0]])
    u = VertexFunction([[0.0], [2.0], [5.0]])
    v = VertexFunction([[5.0], [2.0], [1.0]])
    return prob, u, v


def random_connected_problem(rng: np.random.Generator, max_nodes: int = 10,
                             m: int = 1, value_lo: float = 0.0,
                             value_hi: float = 2.0,
                             max_interior: int | None = None) -> BoundaryProblem:
    """Random spanning tree plus extra edges; boundary values spread in a box."""
    n = int(rng.integers(3, max_nodes + 1))
    edges = []
    perm = rng.permutation(n)
    for k in range(1, n):
        i, j = int(perm[k]), int(perm[rng.integers(0, k)])
        edges.append((i, j, float(rng.uniform(0.2, 1.0))))
    have = {(min(i, j), max(i, j)) for i, j, _ in edges}
    for _ in range(int(rng.integers(0, n))):
        i, j = (int(v) for v in rng.integers(0, n, 2))
        if i != j and (min(i, j), max(i, j)) not in have:
            have.add((min(i, j), max(i, j)))
            edges.append((i, j, float(rng.uniform(0.2, 1.0))))
    graph = WeightedGraph(n, edges)
    if max_interior is None:
        nb = int(rng.integers(1, n))
    else:
        nb = max(1, n - int(rng.integers(1, max_interior + 1)))
    bnd = sorted(int(b) for b in rng.choice(n, size=nb, replace=False))
    vals = rng.uniform(value_lo, value_hi, (nb, m))
    return BoundaryProblem(graph, bnd, vals)


def two_tone_image(height: int = 32, width: int = 32, hole: tuple = (12, 20, 12, 20)):
    """Synthetic RGB image split into two constant halves, with a masked box."""
    px = np.zeros((height, width, 3))
    px[:, : width // 2] = [0.1, 0.3, 0.8]
    px[:, width // 2:] = [0.9, 0.2, 0.1]
    mask = np.zeros((height, width), dtype=bool)
    i0, i1, j0, j1 = hole
    mask[i0:i1, j0:j1] = True
    return px, mask
