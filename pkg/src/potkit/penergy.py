"""Discrete p-Dirichlet energy on uniform grids and its minimization.

The gradient lives on cells: along axis a it is the forward difference
of node values divided by h, averaged over the 2^(n-1) cell edges
parallel to a.  The energy is

    E(u) = coef * sum over cells of |grad u|^p h^n  -  sum over nodes of w u,

with coef = 1/p for measure-driven solves and coef = 1 (and w = 0) for
capacity problems.  E is convex for every p > 1, so any descent to
first-order stationarity finds the global minimizer subject to the
pinned nodes.  Minimization is limited-memory quasi-Newton descent with
an optional lagged-coefficient (Picard) polish that re-solves the
linearized problem sparsely to push the gradient to machine level on
small grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import minimize as scipy_minimize

from .errors import ResolutionError
from .grid import EvaluationGrid


def cell_gradient(u: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Edge-averaged forward difference along one axis, in cell shape."""
    g = np.diff(u, axis=axis) / h
    for b in range(u.ndim):
        if b == axis:
            continue
        sl0 = [slice(None)] * u.ndim
        sl1 = [slice(None)] * u.ndim
        sl0[b] = slice(None, -1)
        sl1[b] = slice(1, None)
        g = 0.5 * (g[tuple(sl0)] + g[tuple(sl1)])
    return g


def _adjoint_accumulate(w: np.ndarray, h: float, axis: int, out: np.ndarray):
    """Adjoint of cell_gradient: scatter cell weights w back to nodes."""
    t = w
    n = out.ndim
    for b in reversed(range(n)):
        if b == axis:
            continue
        shape = list(t.shape)
        shape[b] += 1
        r = np.zeros(shape)
        sl0 = [slice(None)] * n
        sl1 = [slice(None)] * n
        sl0[b] = slice(None, -1)
        sl1[b] = slice(1, None)
        r[tuple(sl0)] += 0.5 * t
        r[tuple(sl1)] += 0.5 * t
        t = r
    sl0 = [slice(None)] * n
    sl1 = [slice(None)] * n
    sl0[axis] = slice(None, -1)
    sl1[axis] = slice(1, None)
    out[tuple(sl1)] += t / h
    out[tuple(sl0)] -= t / h


@dataclass
class PEnergyProblem:
    """Pinned-node p-energy problem on a grid.

    ``fixed_mask``/``fixed_values`` pin Dirichlet nodes; ``load`` is the
    per-node pairing weight (cell masses already distributed to nodes);
    ``capacity_mode`` drops the 1/p factor and the load term.  ``eps``
    regularizes the gradient magnitude for p < 2.
    """

    grid: EvaluationGrid
    p: float
    fixed_mask: np.ndarray
    fixed_values: np.ndarray
    load: np.ndarray | None = None
    capacity_mode: bool = False
    eps: float = 0.0

    def __post_init__(self):
        if self.p <= 1.0:
            raise ValueError("p must exceed 1")
        shape = self.grid.node_shape
        if self.fixed_mask.shape != shape or self.fixed_values.shape != shape:
            raise ValueError("masks and values must be in node shape")
        if self.load is not None and self.load.shape != shape:
            raise ValueError("load must be in node shape")
        if not np.any(self.fixed_mask):
            raise ValueError("at least one node must be pinned")

    @property
    def coef(self) -> float:
        return 1.0 if self.capacity_mode else 1.0 / self.p

    def full(self, free_values: np.ndarray) -> np.ndarray:
        u = self.fixed_values.copy()
        u[~self.fixed_mask] = free_values
        return u

    def energy_and_grad(self, u: np.ndarray):
        """Energy and its full node gradient at u."""
        grid, p = self.grid, self.p
        n = grid.dim
        hn = grid.cell_volume
        grads = [cell_gradient(u, grid.h, a) for a in range(n)]
        g2 = reduce(np.add, (d * d for d in grads))
        if self.eps > 0.0:
            g2 = g2 + self.eps ** 2
        gp = g2 ** (p / 2.0)
        energy = self.coef * hn * float(gp.sum())
        with np.errstate(divide="ignore"):
            gpm2 = np.where(g2 > 0.0, g2 ** ((p - 2.0) / 2.0), 0.0)
        node_grad = np.zeros_like(u)
        for a in range(n):
            _adjoint_accumulate(self.coef * p * hn * gpm2 * grads[a],
                                grid.h, a, node_grad)
        if self.load is not None:
            energy -= float((self.load * u).sum())
            node_grad = node_grad - self.load
        return energy, node_grad


@dataclass
class PEnergyInfo:
    energy: float
    iterations: int
    grad_norm: float
    converged: bool
    method: str


def minimize_p_energy(problem: PEnergyProblem, u0: np.ndarray | None = None,
                      *, rel_energy_tol: float = 1e-8, maxiter: int = 20000,
                      polish: str | None = None, polish_iters: int = 40):
    """Minimize the pinned p-energy; returns (u, PEnergyInfo).

    ``polish`` may be "newton" (sparse assembled Hessian, quadratic
    convergence, for grids small enough to factor) or "picard" (lagged
    coefficients).  Raises ResolutionError when the descent gives up
    before reaching the relative-energy-change criterion.
    """
    free = ~problem.fixed_mask
    if not np.any(free):
        u = problem.fixed_values.copy()
        energy, _ = problem.energy_and_grad(u)
        return u, PEnergyInfo(float(energy), 0, 0.0, True, "pinned")
    if u0 is None:
        u0 = problem.fixed_values.copy()
        if np.any(problem.fixed_mask):
            u0[free] = float(problem.fixed_values[problem.fixed_mask].mean())
    x0 = np.ascontiguousarray(u0[free], dtype=float)

    def fg(x):
        u = problem.full(x)
        e, g = problem.energy_and_grad(u)
        return e, np.ascontiguousarray(g[free])

    res = scipy_minimize(fg, x0, jac=True, method="L-BFGS-B",
                         options={"maxiter": maxiter, "maxcor": 10,
                                  "ftol": rel_energy_tol,
                                  "gtol": 1e-12})
    u = problem.full(res.x)
    if polish == "newton":
        u = newton_polish(problem, u, iters=polish_iters)
    elif polish == "picard":
        u = picard_polish(problem, u, iters=polish_iters)
    elif polish is not None:
        raise ValueError("polish must be 'newton', 'picard' or None")
    energy, grad = problem.energy_and_grad(u)
    grad_norm = float(np.max(np.abs(grad[free]))) if np.any(free) else 0.0
    converged = bool(res.success or res.status == 1 or polish is not None)
    if not converged:
        raise ResolutionError(
            f"p-energy descent did not converge ({res.message}); "
            "refine the grid or raise the iteration budget")
    method = "lbfgs" if polish is None else f"lbfgs+{polish}"
    info = PEnergyInfo(float(energy), int(res.nit), grad_norm, converged,
                       method)
    return u, info


def _cell_grad_matrix(grid: EvaluationGrid, axis: int) -> sp.csr_matrix:
    mats = []
    for b in range(grid.dim):
        nb = grid.cells[b]
        if b == axis:
            m = sp.diags([-1.0, 1.0], [0, 1], shape=(nb, nb + 1)) / grid.h
        else:
            m = sp.diags([0.5, 0.5], [0, 1], shape=(nb, nb + 1))
        mats.append(m.tocsr())
    return reduce(sp.kron, mats).tocsr()


def picard_polish(problem: PEnergyProblem, u: np.ndarray, *, iters: int = 60,
                  tol: float = 1e-14) -> np.ndarray:
    """Lagged-coefficient refinement: repeatedly solve the linear system
    of the quadratic energy with weights |grad u|^(p-2) frozen at the
    current iterate.  Intended for small grids where a sparse solve is
    cheap; drives the nonlinear gradient to machine precision."""
    grid, p = problem.grid, problem.p
    n = grid.dim
    hn = grid.cell_volume
    ops = [_cell_grad_matrix(grid, a) for a in range(n)]
    free = ~problem.fixed_mask.ravel()
    fixed_vals = problem.fixed_values.ravel()
    load = (problem.load.ravel() if problem.load is not None
            else np.zeros(grid.n_nodes))
    u = u.copy()
    scale = max(1.0, float(np.max(np.abs(problem.fixed_values))))
    for _ in range(iters):
        grads = [cell_gradient(u, grid.h, a) for a in range(n)]
        g2 = reduce(np.add, (d * d for d in grads)).ravel()
        if problem.eps > 0.0:
            g2 = g2 + problem.eps ** 2
        with np.errstate(divide="ignore"):
            w = np.where(g2 > 0.0, g2 ** ((p - 2.0) / 2.0), 0.0)
        # quadratic model: coef * p * sum w |grad v|^2 / ... solves
        # A v = load with A = coef * p * sum B^T diag(w) B * h^n
        A = None
        for a in range(n):
            term = ops[a].T @ sp.diags(w) @ ops[a]
            A = term if A is None else A + term
        A = (problem.coef * p * hn) * A
        A = A.tocsr()
        rhs = load - A[:, ~free] @ fixed_vals[~free]
        A_ff = A[free][:, free]
        v = u.ravel().copy()
        v[free] = spla.spsolve(A_ff.tocsc(), rhs[free])
        v = v.reshape(u.shape)
        delta = float(np.max(np.abs(v - u)))
        u = v
        if delta < tol * scale:
            break
    return u


def newton_polish(problem: PEnergyProblem, u: np.ndarray, *,
                  iters: int = 40, gtol: float = 1e-14) -> np.ndarray:
    """Damped Newton refinement with the exact sparse Hessian.

    The Hessian weights per cell are g^(p-2) I + (p-2) g^(p-4) D D^T
    (eigenvalues g^(p-2) and (p-1) g^(p-2), so it is positive definite
    wherever the gradient magnitude g is nonzero).  A backtracking line
    search on the true energy keeps every step a descent step; tiny
    diagonal damping covers cells where the energy degenerates.
    Intended for grids small enough for a sparse direct solve.
    """
    grid, p = problem.grid, problem.p
    n = grid.dim
    hn = grid.cell_volume
    ops = [_cell_grad_matrix(grid, a) for a in range(n)]
    free = ~problem.fixed_mask.ravel()
    u = u.copy()
    for _ in range(iters):
        e0, grad = problem.energy_and_grad(u)
        gf = np.ascontiguousarray(grad.ravel()[free])
        if np.max(np.abs(gf)) < gtol:
            break
        grads = [cell_gradient(u, grid.h, a) for a in range(n)]
        g2 = reduce(np.add, (d * d for d in grads)).ravel()
        if problem.eps > 0.0:
            g2 = g2 + problem.eps ** 2
        pos = g2 > 0.0
        with np.errstate(divide="ignore"):
            w_iso = np.where(pos, g2 ** ((p - 2.0) / 2.0), 0.0)
            w_dir = np.where(pos, (p - 2.0) * g2 ** ((p - 4.0) / 2.0), 0.0)
        H = None
        for a in range(n):
            for b in range(a, n):
                w = w_dir * grads[a].ravel() * grads[b].ravel()
                if a == b:
                    w = w + w_iso
                term = ops[a].T @ sp.diags(w) @ ops[b]
                if a != b:
                    term = term + term.T
                H = term if H is None else H + term
        H_ff = ((problem.coef * p * hn) * H).tocsr()[free][:, free].tocsc()
        lam = 0.0
        step = None
        for _attempt in range(8):
            try:
                M = H_ff if lam == 0.0 else \
                    H_ff + lam * sp.identity(H_ff.shape[0], format="csc")
                cand = spla.spsolve(M, -gf)
                if np.all(np.isfinite(cand)) and float(gf @ cand) < 0.0:
                    step = cand
                    break
            except Exception:
                pass
            lam = 1e-10 if lam == 0.0 else lam * 100.0
        if step is None:
            break
        slope = float(gf @ step)
        t = 1.0
        v = u.ravel().copy()
        while True:
            v[free] = u.ravel()[free] + t * step
            e1, _ = problem.energy_and_grad(v.reshape(u.shape))
            if e1 <= e0 + 1e-4 * t * slope or t < 1e-12:
                break
            t *= 0.5
        u = v.reshape(u.shape)
    return u


def refine_nodes(u: np.ndarray) -> np.ndarray:
    """Multilinear prolongation of node values to the factor-2 grid."""
    out = u
    for axis in range(u.ndim):
        shape = list(out.shape)
        shape[axis] = 2 * shape[axis] - 1
        r = np.zeros(shape)
        sl_even = [slice(None)] * out.ndim
        sl_even[axis] = slice(None, None, 2)
        r[tuple(sl_even)] = out
        sl_odd = [slice(None)] * out.ndim
        sl_odd[axis] = slice(1, None, 2)
        sl0 = [slice(None)] * out.ndim
        sl0[axis] = slice(None, -1)
        sl1 = [slice(None)] * out.ndim
        sl1[axis] = slice(1, None)
        r[tuple(sl_odd)] = 0.5 * (out[tuple(sl0)] + out[tuple(sl1)])
        out = r
    return out


def affine_fill(grid: EvaluationGrid, boundary_values: np.ndarray,
                fixed_mask: np.ndarray) -> np.ndarray:
    """Initial guess: least-squares affine fit to the pinned values,
    evaluated on all nodes.  Cheap and exact for affine boundary data."""
    axes = grid.node_axes()
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    pinned = fixed_mask.ravel()
    A = np.concatenate([pts[pinned], np.ones((int(pinned.sum()), 1))], axis=1)
    coef, *_ = np.linalg.lstsq(A, boundary_values.ravel()[pinned], rcond=None)
    vals = pts @ coef[:-1] + coef[-1]
    out = vals.reshape(grid.node_shape)
    out[fixed_mask] = boundary_values[fixed_mask]
    return out
