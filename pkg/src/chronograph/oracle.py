"""Independent cross-checks: Crank-Nicolson, Picard iteration, brute force.

These deliberately avoid the main solver's machinery.  The Crank-Nicolson
stepper touches no matrix exponential; the Picard iteration replaces the
boundary solve with a fixed point; the permutation search replaces the graph
classification with exhaustive enumeration.  They ship in the library so
acceptance runs are reproducible from the command line.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from . import solver
from .problem import forcing_node_values, stack_edge_values, validate
from .solver import EdgeSolution, NotWellPosed, SolveReport


class PicardDivergence(Exception):
    """Fixed-point iteration cannot converge: spectral radius of B E >= 1."""

    def __init__(self, rho):
        super().__init__(f"picard iteration divergent (rho(BE) = {rho:.6f})")
        self.rho = rho


class TooLarge(ValueError):
    """Pattern too large for exhaustive permutation search."""


@dataclass(frozen=True)
class OracleConfig:
    cn_steps_per_edge: int = 10_000
    picard_max_iter: int = 100_000
    picard_tol: float = 1e-12


def _cn_edge_maps(A, a, steps):
    """One-step Crank-Nicolson map P and forcing weight for one edge."""
    d = A.shape[0]
    h = float(a) / steps
    L = np.eye(d, dtype=complex) - 0.5 * h * A
    lu = la.lu_factor(L)
    P = la.lu_solve(lu, np.eye(d, dtype=complex) + 0.5 * h * A)
    W = la.lu_solve(lu, 0.5 * h * np.eye(d, dtype=complex))
    return h, P, W


def cn_solve(problem, cfg=None):
    """Crank-Nicolson solve of the coupled problem, sharing no code with the
    exponential path.

    Per-edge trapezoidal one-step maps are composed into a discrete terminal
    propagator; the same boundary equation (I - B E~) c = g + B F~ is then
    solved densely and the trajectory re-propagated on the fine grid.  Second
    order accurate in the step size.
    """
    violations = validate(problem)
    if violations:
        raise ValueError("invalid problem: " + "; ".join(violations))
    cfg = cfg or OracleConfig()
    gr = problem.graph
    N = int(cfg.cn_steps_per_edge)
    off = gr.offsets()
    n = gr.size()

    maps = {}
    E_tilde = np.zeros((n, n), dtype=complex)
    F_parts = {}
    for e in gr.edges:
        A = problem.operator(e)
        h, P, W = _cn_edge_maps(A, gr.lengths[e], N)
        times = np.linspace(0.0, float(gr.lengths[e]), N + 1)
        f = forcing_node_values(problem, e, times)
        maps[e] = (h, P, W, times, f)
        s = off[e]
        d = gr.dims[e]
        E_tilde[s:s + d, s:s + d] = np.linalg.matrix_power(P, N)
        u = np.zeros(d, dtype=complex)
        for k in range(N):
            u = P @ u + W @ (f[k] + f[k + 1])
        F_parts[e] = u

    B = problem.B.assemble(gr)
    M = np.eye(n, dtype=complex) - B @ E_tilde
    sv = np.linalg.svd(M, compute_uv=False)
    rcond = float(sv[-1] / max(float(sv[0]), 1.0)) if sv[0] > 0 else 0.0
    if rcond < solver.SINGULAR_RCOND:
        raise NotWellPosed(rcond)
    g = stack_edge_values(gr, problem.g)
    F_tilde = np.concatenate([F_parts[e] for e in gr.edges])
    c = np.linalg.solve(M, g + B @ F_tilde)

    solutions = {}
    worst_defect = 0.0
    for e in gr.edges:
        h, P, W, times, f = maps[e]
        d = gr.dims[e]
        states = np.empty((N + 1, d), dtype=complex)
        states[0] = c[off[e]:off[e] + d]
        for k in range(N):
            states[k + 1] = P @ states[k] + W @ (f[k] + f[k + 1])
        solutions[e] = EdgeSolution(e, times, states, states[0].copy())
        # defect of the CN recurrence itself, recomputed
        mid = N // 2
        for k in (0, mid, N - 1):
            pred = P @ states[k] + W @ (f[k] + f[k + 1])
            worst_defect = max(worst_defect, float(
                np.linalg.norm(states[k + 1] - pred)
                / (1.0 + np.linalg.norm(states[k]))))

    minus = np.concatenate([solutions[e].states[0] for e in gr.edges])
    plus = np.concatenate([solutions[e].states[-1] for e in gr.edges])
    boundary = float(np.linalg.norm(minus - B @ plus - g)
                     / (1.0 + np.linalg.norm(g)))
    return SolveReport(
        solutions=solutions,
        edge_order=tuple(gr.edges),
        boundary_residual=boundary,
        ode_residual=worst_defect,
        energy_defect=solver.energy_defect_of(problem, solutions),
        monodromy_rcond=rcond,
        ill_conditioned=bool(rcond < solver.ILL_CONDITIONED_RCOND),
        commutator_norm=solver._commutator_norm(problem),
    )


def picard_boundary(problem, cfg=None):
    """Boundary vector by fixed-point iteration c <- B(Ec + F) + g from zero.

    Converges geometrically iff rho(B E) < 1; divergence is raised up front
    from the spectral radius rather than detected by overflow.
    """
    cfg = cfg or OracleConfig()
    mono = solver.assemble_monodromy(problem)
    F = solver.forced_terminal_integrals(problem)
    gr = problem.graph
    B = problem.B.assemble(gr)
    BE = B @ mono.E
    rho = float(np.max(np.abs(np.linalg.eigvals(BE))))
    if rho >= 1.0:
        raise PicardDivergence(rho)
    g = stack_edge_values(gr, problem.g)
    base = B @ F + g
    c = np.zeros(gr.size(), dtype=complex)
    for _ in range(int(cfg.picard_max_iter)):
        nxt = BE @ c + base
        delta = float(np.linalg.norm(nxt - c))
        c = nxt
        if delta <= cfg.picard_tol:
            return c
    raise RuntimeError(
        f"picard iteration did not converge in {cfg.picard_max_iter} steps"
        f" (rho(BE) = {rho:.6f})")


def brute_force_triangularizable(pattern, max_n=8):
    """Ordering that renders the pattern block lower-triangular, or None.

    Exhaustive search over edge permutations (organized as a backtracking
    enumeration so impossible prefixes are discarded early); the first witness
    in lexicographic order is returned.  Diagonal entries never obstruct.
    """
    n = pattern.n
    if n > max_n:
        raise TooLarge(f"pattern size {n} exceeds limit {max_n}")
    needs = [set() for _ in range(n)]  # row -> columns that must come first
    for i, j in pattern.nonzero:
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"pattern index ({i},{j}) outside [0,{n})")
        if i != j:
            needs[i].add(j)
    placed = [False] * n
    order = []

    def extend():
        if len(order) == n:
            return True
        for e in range(n):
            if placed[e]:
                continue
            if all(placed[j] for j in needs[e]):
                placed[e] = True
                order.append(e)
                if extend():
                    return True
                order.pop()
                placed[e] = False
        return False

    if extend():
        return tuple(order)
    return None
