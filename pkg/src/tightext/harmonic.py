"""Graph infinity-Laplace operator and the damped fixed-point extension solver.

The extension iterates ``u <- u + tau * lap(u)`` on the interior (Jacobi-style
simultaneous sweeps) while holding the boundary values fixed.  Convergence is
guaranteed for ``tau`` in (0, 1); values in [1, 2) are accepted but flagged in
the report, and ``tau >= 2`` is rejected (there are explicit period-2 cycles).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import BoundaryProblem, VertexFunction, WeightedGraph

__all__ = [
    "IterationConfig",
    "IterationReport",
    "graph_inf_laplacian",
    "extend_inf_harmonic",
    "extend_componentwise",
    "divergence_demo",
    "divergence_example",
]

_INITS = ("zero", "boundary_mean")


@dataclass(frozen=True)
class IterationConfig:
    tau: float = 0.4
    tol: float = 1e-10          # sup-norm of one update step
    max_iters: int = 100_000
    init: str = "boundary_mean"

    def __post_init__(self):
        if not (0.0 < self.tau < 2.0):
            raise ValueError(f"tau must lie in (0, 2), got {self.tau}")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.init not in _INITS:
            raise ValueError(f"init must be one of {_INITS}, got {self.init!r}")

    @property
    def tau_unproven(self) -> bool:
        """True for tau in [1, 2): permitted, but convergence is not guaranteed."""
        return self.tau >= 1.0


@dataclass(frozen=True)
class IterationReport:
    iterations: int
    final_step_norm: float
    residual: float             # max |lap(u)| over the interior at the final iterate
    converged: bool
    tau_unproven: bool = False


class _InteriorStencil:
    """Interior-sliced adjacency arrays for vectorized sweeps."""

    def __init__(self, graph: WeightedGraph, interior: np.ndarray):
        ptr, nbr, sqw = graph._ptr, graph._nbr, graph._sqw
        segs = [np.arange(ptr[x], ptr[x + 1]) for x in interior]
        if segs:
            flat = np.concatenate(segs)
            deg = np.array([s.size for s in segs])
        else:
            flat = np.zeros(0, dtype=np.int64)
            deg = np.zeros(0, dtype=np.int64)
        if (deg == 0).any():
            bad = interior[deg == 0]
            raise ValueError(f"interior node(s) {bad.tolist()} have no neighbors")
        self.interior = interior
        self.nbr = nbr[flat]
        self.sqw = sqw[flat]
        self.owner = np.repeat(interior, deg)
        self.starts = np.concatenate(([0], np.cumsum(deg)))[:-1]

    def laplacian(self, vals: np.ndarray) -> np.ndarray:
        """Half the gap between the largest weighted up- and down-jumps, per node."""
        d = self.sqw * (vals[self.nbr] - vals[self.owner])
        if d.size == 0:
            return np.zeros(0)
        pos = np.maximum.reduceat(np.maximum(d, 0.0), self.starts)
        neg = np.maximum.reduceat(np.maximum(-d, 0.0), self.starts)
        return 0.5 * (pos - neg)


def graph_inf_laplacian(u: VertexFunction, prob: BoundaryProblem, x: int) -> float:
    """Infinity-Laplacian of a scalar vertex function at node ``x``."""
    if u.dim != 1:
        raise ValueError(f"the operator is defined for scalar functions, got m={u.dim}")
    graph = prob.graph
    if u.node_count != graph.node_count:
        raise ValueError("function size does not match graph")
    idx, w = graph.neighbors(int(x))
    if idx.size == 0:
        raise ValueError(f"node {x} has no neighbors")
    d = np.sqrt(w) * (u.data[idx, 0] - u.data[int(x), 0])
    return float(0.5 * (np.max(np.maximum(d, 0.0)) - np.max(np.maximum(-d, 0.0))))


def _initial_values(prob: BoundaryProblem, init: str) -> np.ndarray:
    vals = np.zeros(prob.graph.node_count)
    if init == "boundary_mean":
        vals[:] = prob.values[:, 0].mean()
    vals[prob.boundary] = prob.values[:, 0]
    return vals


def extend_inf_harmonic(prob: BoundaryProblem, cfg: IterationConfig | None = None,
                        on_sweep=None) -> tuple[VertexFunction, IterationReport]:
    """Scalar discrete infinity-harmonic extension of the boundary values.

    Returns the extension and a report.  Exhausting ``max_iters`` is not an
    error; it is reported as ``converged=False``.  ``on_sweep``, if given, is
    called with a read-only view of the values after every sweep.
    """
    cfg = cfg or IterationConfig()
    if prob.dim != 1:
        raise ValueError(f"scalar solver requires m=1, got m={prob.dim}")

    vals = _initial_values(prob, cfg.init)
    interior = prob.interior
    if interior.size == 0:
        u = VertexFunction(vals)
        return u, IterationReport(0, 0.0, 0.0, True, cfg.tau_unproven)

    stencil = _InteriorStencil(prob.graph, interior)
    view = vals.view()
    view.flags.writeable = False

    iterations = 0
    step_norm = np.inf
    converged = False
    for iterations in range(1, cfg.max_iters + 1):
        lap = stencil.laplacian(vals)
        step = cfg.tau * lap
        vals[interior] += step
        step_norm = float(np.max(np.abs(step)))
        if on_sweep is not None:
            on_sweep(view)
        if step_norm < cfg.tol:
            converged = True
            break

    residual = float(np.max(np.abs(stencil.laplacian(vals))))
    u = VertexFunction(vals)
    return u, IterationReport(iterations, step_norm, residual, converged, cfg.tau_unproven)


def extend_componentwise(prob: BoundaryProblem, cfg: IterationConfig | None = None,
                         on_sweep=None) -> tuple[VertexFunction, IterationReport]:
    """Apply the scalar extension to each coordinate of vector-valued data.

    The report aggregates the per-component runs: worst-case iterations, step
    norm and residual; ``converged`` only if every component converged.
    """
    cfg = cfg or IterationConfig()
    data = np.zeros((prob.graph.node_count, prob.dim))
    reports = []
    for j in range(prob.dim):
        uj, rj = extend_inf_harmonic(prob.scalar_component(j), cfg, on_sweep)
        data[:, j] = uj.data[:, 0]
        reports.append(rj)
    report = IterationReport(
        iterations=max(r.iterations for r in reports),
        final_step_norm=max(r.final_step_norm for r in reports),
        residual=max(r.residual for r in reports),
        converged=all(r.converged for r in reports),
        tau_unproven=cfg.tau_unproven,
    )
    return VertexFunction(data), report


def divergence_example() -> tuple[BoundaryProblem, VertexFunction]:
    """The 5-node path with zero ends and a unit spike that cycles at tau=2."""
    graph = WeightedGraph(5, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)])
    prob = BoundaryProblem(graph, [0, 4], [[0.0], [0.0]])
    u0 = np.zeros((5, 1))
    u0[2, 0] = 1.0
    return prob, VertexFunction(u0)


def divergence_demo(prob: BoundaryProblem, u0: VertexFunction, tau: float = 2.0,
                    iterations: int = 8) -> list[VertexFunction]:
    """Run raw undamped sweeps and return [u^0, u^1, ..., u^iterations].

    Diagnostic helper: unlike the solver entry points it accepts any tau,
    including the divergent tau=2.
    """
    if prob.dim != 1 or u0.dim != 1:
        raise ValueError("divergence demo is scalar-valued")
    prob.check_extension(u0)
    stencil = _InteriorStencil(prob.graph, prob.interior)
    vals = u0.data[:, 0].copy()
    out = [VertexFunction(vals.copy())]
    for _ in range(iterations):
        vals[prob.interior] += tau * stencil.laplacian(vals)
        vals[prob.boundary] = prob.values[:, 0]
        out.append(VertexFunction(vals.copy()))
    return out
