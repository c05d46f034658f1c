"""Closed-form solver for Cauchy problems on time graphs.

The coupled system is reduced to one dense boundary solve: with E the
block-diagonal end-of-edge propagator and F the forced terminal integrals,
the initial values c satisfy (I - B E) c = g + B F.  Each edge is then
integrated independently by an exponential-trapezoidal recurrence that is
exact for the piecewise-linear forcing class, so the only nontrivial numerics
are the matrix exponentials and the single linear solve.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import matfun
from .problem import forcing_node_values, stack_edge_values, validate

MILD = "MILD"
STRONG = "STRONG"
CLASSICAL = "CLASSICAL"

# rcond below this: refuse to solve.  Between this and ILL_CONDITIONED_RCOND:
# solve, but flag the report.
SINGULAR_RCOND = 1e-14
ILL_CONDITIONED_RCOND = 1e-8


class NotWellPosed(Exception):
    """The boundary operator I - B E is numerically singular."""

    def __init__(self, rcond, stage=None):
        where = "" if stage is None else f" (stage {stage})"
        super().__init__(
            f"monodromy operator numerically singular{where}: rcond={rcond:.3e}")
        self.rcond = rcond
        self.stage = stage


@dataclass(frozen=True)
class Monodromy:
    """E = blockdiag(e^{a_j A_j}), M = I - B E, and M's conditioning."""

    E: np.ndarray
    M: np.ndarray
    rcond: float


@dataclass(frozen=True)
class EdgeSolution:
    edge: object
    times: np.ndarray   # uniform, 0 .. a_j inclusive
    states: np.ndarray  # (steps + 1, dim), states[0] = c
    c: np.ndarray


@dataclass(frozen=True)
class SolveReport:
    solutions: dict                  # edge id -> EdgeSolution
    edge_order: tuple
    boundary_residual: float         # ||psi_- - B psi_+ - g|| / (1 + ||g||)
    ode_residual: float              # max scaled one-step recurrence defect
    energy_defect: float
    monodromy_rcond: float
    ill_conditioned: bool
    commutator_norm: float           # || [blockdiag(A_j), B] ||, informational

    def psi_minus(self):
        return np.concatenate(
            [self.solutions[e].states[0] for e in self.edge_order])

    def psi_plus(self):
        return np.concatenate(
            [self.solutions[e].states[-1] for e in self.edge_order])


def _thread_count():
    try:
        return max(1, int(os.environ.get("CHRONOGRAPH_THREADS", "1")))
    except ValueError:
        return 1


def _map_edges(fn, edges):
    """Apply fn to each edge, optionally in parallel; results in edge order."""
    workers = min(_thread_count(), len(edges))
    if workers <= 1:
        return [fn(e) for e in edges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, edges))


def _require_valid(problem):
    violations = validate(problem)
    if violations:
        raise ValueError("invalid problem: " + "; ".join(violations))


def assemble_monodromy(problem):
    """Block-diagonal terminal propagator and the boundary operator I - B E."""
    _require_valid(problem)
    gr = problem.graph
    off = gr.offsets()
    n = gr.size()
    E = np.zeros((n, n), dtype=complex)
    blocks = _map_edges(
        lambda e: matfun.expm(problem.operator(e), gr.lengths[e]), gr.edges)
    for e, blk in zip(gr.edges, blocks):
        s = off[e]
        d = gr.dims[e]
        E[s:s + d, s:s + d] = blk
    M = np.eye(n, dtype=complex) - problem.B.assemble(gr) @ E
    return Monodromy(E, M, matfun.rcond_identity_scale(M))


def _edge_step_operators(problem, edge):
    A = problem.operator(edge)
    h = float(problem.graph.lengths[edge]) / problem.steps_for(edge)
    Eh, P1, P2 = matfun.expm_phi12(A, h)
    return h, Eh, h * P1, h * P2


def _integrate_edge(problem, edge, start):
    """Exponential-trapezoidal sweep along one edge from the given start value."""
    h, Eh, Q1, Q2 = _edge_step_operators(problem, edge)
    K = problem.steps_for(edge)
    f = forcing_node_values(problem, edge)
    d = problem.graph.dims[edge]
    states = np.empty((K + 1, d), dtype=complex)
    states[0] = start
    for k in range(K):
        states[k + 1] = (Eh @ states[k] + Q1 @ f[k]
                         + Q2 @ (f[k + 1] - f[k]))
    return states


def forced_terminal_integrals(problem):
    """Stacked terminal values of the forced-only flow started from zero.

    Componentwise this is the convolution of the edge propagator with the
    forcing over the whole edge, evaluated by the same exact recurrence the
    propagation uses.
    """
    _require_valid(problem)
    gr = problem.graph
    parts = _map_edges(
        lambda e: _integrate_edge(problem, e, np.zeros(gr.dims[e]))[-1],
        gr.edges)
    return np.concatenate(parts)


def solve_boundary(problem, mono, F):
    """Initial values on every edge: c = (I - B E)^{-1} (g + B F)."""
    g = stack_edge_values(problem.graph, problem.g)
    rhs = g + problem.B.assemble(problem.graph) @ F
    if mono.rcond < SINGULAR_RCOND:
        raise NotWellPosed(mono.rcond)
    try:
        c, _ = matfun.solve_linear(mono.M, rhs)
    except matfun.SingularMatrix as exc:
        raise NotWellPosed(exc.rcond) from exc
    return c


def _composite_simpson(values, h):
    """Composite Simpson on uniform nodes; odd interval counts end with the
    3/8 rule so the order stays four.  A single interval falls back to the
    trapezoid."""
    n = len(values) - 1
    if n <= 0:
        return 0.0
    if n == 1:
        return h * 0.5 * (values[0] + values[1])
    total = 0.0
    stop = n if n % 2 == 0 else n - 3
    for k in range(0, stop, 2):
        total += h / 3.0 * (values[k] + 4.0 * values[k + 1] + values[k + 2])
    if stop != n:
        total += 3.0 * h / 8.0 * (values[n - 3] + 3.0 * values[n - 2]
                                  + 3.0 * values[n - 1] + values[n])
    return total


def energy_defect_of(problem, solutions):
    """|Re<psi', psi> - (||psi_+||^2 - ||psi_-||^2)/2| with psi' = A psi + f
    at the nodes and composite Simpson along each edge."""
    inner = 0.0
    plus_sq = 0.0
    minus_sq = 0.0
    for e in problem.graph.edges:
        sol = solutions[e]
        A = problem.operator(e)
        f = forcing_node_values(problem, e, sol.times)
        deriv = sol.states @ A.T + f
        values = np.real(np.sum(np.conj(sol.states) * deriv, axis=1))
        h = sol.times[1] - sol.times[0] if len(sol.times) > 1 else 0.0
        inner += _composite_simpson(values, h)
        plus_sq += float(np.sum(np.abs(sol.states[-1]) ** 2))
        minus_sq += float(np.sum(np.abs(sol.states[0]) ** 2))
    return abs(inner - 0.5 * (plus_sq - minus_sq))


def _one_step_defect(problem, solutions):
    """Max scaled defect of the integration recurrence, recomputed from
    freshly assembled step operators."""
    worst = 0.0
    for e in problem.graph.edges:
        sol = solutions[e]
        _, Eh, Q1, Q2 = _edge_step_operators(problem, e)
        f = forcing_node_values(problem, e)
        for k in range(len(sol.times) - 1):
            predicted = Eh @ sol.states[k] + Q1 @ f[k] + Q2 @ (f[k + 1] - f[k])
            defect = np.linalg.norm(sol.states[k + 1] - predicted)
            scale = 1.0 + np.linalg.norm(sol.states[k])
            worst = max(worst, float(defect / scale))
    return worst


def _boundary_residual(problem, solutions):
    gr = problem.graph
    minus = np.concatenate([solutions[e].states[0] for e in gr.edges])
    plus = np.concatenate([solutions[e].states[-1] for e in gr.edges])
    g = stack_edge_values(gr, problem.g)
    B = problem.B.assemble(gr)
    return float(np.linalg.norm(minus - B @ plus - g)
                 / (1.0 + np.linalg.norm(g)))


def _commutator_norm(problem):
    gr = problem.graph
    off = gr.offsets()
    n = gr.size()
    AV = np.zeros((n, n), dtype=complex)
    for e in gr.edges:
        s = off[e]
        d = gr.dims[e]
        AV[s:s + d, s:s + d] = problem.operator(e)
    B = problem.B.assemble(gr)
    return float(np.linalg.norm(AV @ B - B @ AV, 2))


def propagate(problem, c, mono=None):
    """Integrate every edge from the given stacked initial values and attach
    residual diagnostics."""
    _require_valid(problem)
    gr = problem.graph
    if mono is None:
        mono = assemble_monodromy(problem)
    off = gr.offsets()
    c = np.asarray(c, dtype=complex).reshape(-1)
    if c.shape[0] != gr.size():
        raise ValueError(f"boundary vector length {c.shape[0]} != {gr.size()}")

    def run(edge):
        start = c[off[edge]:off[edge] + gr.dims[edge]]
        states = _integrate_edge(problem, edge, start)
        return EdgeSolution(edge, problem.times(edge), states,
                            states[0].copy())

    solutions = {e: sol for e, sol in zip(gr.edges, _map_edges(run, gr.edges))}
    return SolveReport(
        solutions=solutions,
        edge_order=tuple(gr.edges),
        boundary_residual=_boundary_residual(problem, solutions),
        ode_residual=_one_step_defect(problem, solutions),
        energy_defect=energy_defect_of(problem, solutions),
        monodromy_rcond=mono.rcond,
        ill_conditioned=bool(mono.rcond < ILL_CONDITIONED_RCOND),
        commutator_norm=_commutator_norm(problem),
    )


def solve(problem):
    """Full pipeline: monodromy, forced integrals, boundary solve, propagation."""
    mono = assemble_monodromy(problem)
    F = forced_terminal_integrals(problem)
    c = solve_boundary(problem, mono, F)
    return propagate(problem, c, mono)


def resolvent_Dt(problem, lam):
    """Solve with every edge operator replaced by lam * I.

    This realizes the resolvent of the coupled time derivative at lam; it is
    singular exactly when lam hits the transmission operator's point spectrum.
    """
    from .problem import EdgeOperator, TimeGraphProblem

    gr = problem.graph
    ops = tuple(EdgeOperator(e, complex(lam) * np.eye(gr.dims[e]))
                for e in gr.edges)
    shifted = TimeGraphProblem(gr, ops, problem.B, dict(problem.g),
                               problem.forcing, dict(problem.steps))
    return solve(shifted)


def solution_grade(problem, report=None):
    """Regularity grade of the solved problem: MILD, STRONG, or CLASSICAL.

    Constant (including zero) forcing is continuous, and finite samples on a
    uniform grid have bounded one-sided difference quotients, so both grade as
    CLASSICAL.  Non-finite forcing data degrades to STRONG when the residuals
    are finite, else MILD.  Reported, not proved.
    """
    from .problem import SampledForcing

    classical = True
    for e in problem.graph.edges:
        spec = problem.forcing.spec_for(e)
        vals = (spec.values if isinstance(spec, SampledForcing)
                else forcing_node_values(problem, e))
        if not np.all(np.isfinite(vals)):
            classical = False
    if classical:
        return CLASSICAL
    if report is None or (np.isfinite(report.boundary_residual)
                          and np.isfinite(report.ode_residual)):
        return STRONG
    return MILD
