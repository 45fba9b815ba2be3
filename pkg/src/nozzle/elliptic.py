"""Variable-coefficient conormal (Neumann) solver on the grid.

The discretization is flux-form finite volume on the vertex-centered grid:
trapezoid control volumes, arithmetic mean of the coefficient at half-nodes,
natural zero flux at the walls (the parity ghosts make the wall condition
automatic) and prescribed conormal flux at the inlet/outlet faces.  The
operator is symmetric positive semidefinite with the constants as null
space; the solver is Jacobi-preconditioned conjugate gradient restricted to
the mean-free subspace.
"""

from dataclasses import dataclass

import numpy as np

from .grid import Grid, ScalarField, VectorField


class SolverError(RuntimeError):
    pass


class SolvabilityError(SolverError):
    """Discrete Neumann compatibility violated."""


class NonConvergenceError(SolverError):
    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


@dataclass
class ConormalProblem:
    """div(lam grad phi) = div F + source, lam dphi/dn = F.n + g on x1 faces.

    ``flux_minus``/``flux_plus`` hold g on the inlet/outlet planes (the wall
    flux is zero by the ghost policy).  Either or both of ``rhs_div`` (F) and
    ``source`` may be None.
    """

    lam: ScalarField
    rhs_div: VectorField = None
    source: ScalarField = None
    flux_minus: np.ndarray = None
    flux_plus: np.ndarray = None

    def __post_init__(self):
        if np.min(self.lam.values) <= 0.0:
            raise SolverError(
                f"coefficient must be positive, min {np.min(self.lam.values)}")


@dataclass
class SolveInfo:
    iterations: int
    residual_history: list
    converged: bool


class FluxStencil:
    """Transmissibilities of the finite-volume operator A = -div(lam grad).dV."""

    def __init__(self, grid: Grid, lam_values):
        self.grid = grid
        h = grid.spacing
        w = grid.node_weights
        lam = np.asarray(lam_values, dtype=float)
        if lam.ndim == 0:
            lam = np.full(grid.shape, float(lam))
        self.trans = []
        for a in range(3):
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[a] = slice(None, -1)
            hi[a] = slice(1, None)
            lam_half = 0.5 * (lam[tuple(lo)] + lam[tuple(hi)])
            b, c = [ax for ax in range(3) if ax != a]
            area = (w[b] * h[b]).reshape([-1 if ax == b else 1 for ax in range(3)]) \
                * (w[c] * h[c]).reshape([-1 if ax == c else 1 for ax in range(3)])
            self.trans.append(lam_half * area / h[a])

    def matvec(self, x):
        out = np.zeros_like(x)
        for a, t in enumerate(self.trans):
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[a] = slice(None, -1)
            hi[a] = slice(1, None)
            lo, hi = tuple(lo), tuple(hi)
            flux = t * (x[hi] - x[lo])
            out[lo] -= flux
            out[hi] += flux
        return out

    def diagonal(self):
        d = np.zeros(self.grid.shape)
        for a, t in enumerate(self.trans):
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[a] = slice(None, -1)
            hi[a] = slice(1, None)
            d[tuple(lo)] += t
            d[tuple(hi)] += t
        return d


def _pcg(matvec, b, diag, tol, max_iter, x0=None, mask=None, project_mean=False):
    """Jacobi-PCG.  ``mask`` marks pinned (Dirichlet-zero) nodes; with
    ``project_mean`` the iteration is kept orthogonal to the constants."""
    x = np.zeros_like(b) if x0 is None else x0.copy()
    if mask is not None:
        x[mask] = 0.0

    def op(v):
        if mask is None:
            return matvec(v)
        vv = v.copy()
        vv[mask] = 0.0
        out = matvec(vv)
        out[mask] = 0.0
        return out

    def proj(v):
        if project_mean:
            v -= v.mean()

    b = b.copy()
    if mask is not None:
        b[mask] = 0.0
    proj(b)
    b_norm = np.linalg.norm(b)
    history = []
    if b_norm == 0.0:
        return np.zeros_like(b), SolveInfo(0, history, True)
    inv_diag = 1.0 / np.where(diag > 0.0, diag, 1.0)
    r = b - op(x)
    proj(r)
    z = inv_diag * r
    proj(z)
    p = z.copy()
    rz = np.vdot(r, z)
    converged = False
    for it in range(max_iter):
        res = np.linalg.norm(r)
        history.append(float(res))
        if res <= tol * b_norm:
            converged = True
            break
        Ap = op(p)
        alpha = rz / np.vdot(p, Ap)
        x += alpha * p
        r -= alpha * Ap
        proj(r)
        z = inv_diag * r
        proj(z)
        rz_new = np.vdot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    else:
        history.append(float(np.linalg.norm(r)))
        converged = np.linalg.norm(r) <= tol * b_norm
    if mask is not None:
        x[mask] = 0.0
    return x, SolveInfo(len(history), history, converged)


def assemble_rhs(problem: ConormalProblem):
    """Right-hand side of A phi = b (see module docstring for the sign)."""
    grid = problem.lam.grid
    h = grid.spacing
    w = grid.node_weights
    b = np.zeros(grid.shape)
    if problem.rhs_div is not None:
        F = problem.rhs_div.values
        for a in range(3):
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[a] = slice(None, -1)
            hi[a] = slice(1, None)
            lo, hi = tuple(lo), tuple(hi)
            bb, c = [ax for ax in range(3) if ax != a]
            area = (w[bb] * h[bb]).reshape([-1 if ax == bb else 1 for ax in range(3)]) \
                * (w[c] * h[c]).reshape([-1 if ax == c else 1 for ax in range(3)])
            f_half = 0.5 * (F[lo + (a,)] + F[hi + (a,)]) * area
            b[lo] -= f_half
            b[hi] += f_half
    if problem.source is not None:
        b -= problem.source.values * grid.cell_volumes
    ds = grid.plane_weights
    if problem.flux_minus is not None:
        b[0, :, :] += problem.flux_minus * ds
    if problem.flux_plus is not None:
        b[-1, :, :] += problem.flux_plus * ds
    return b


def solve_conormal(problem: ConormalProblem, tol=1e-10, max_iter=None, x0=None):
    """Returns (phi: zero-mean ScalarField, SolveInfo)."""
    grid = problem.lam.grid
    stencil = FluxStencil(grid, problem.lam.values)
    b = assemble_rhs(problem)
    scale = max(float(np.sum(np.abs(b))), 1e-300)
    total = float(np.sum(b))
    if abs(total) > 1e-10 * scale:
        raise SolvabilityError(
            f"incompatible Neumann data: rhs imbalance {total}")
    b -= total / b.size  # exact discrete compatibility
    if max_iter is None:
        max_iter = int(2000 * round(np.prod(grid.shape) ** (1.0 / 3.0)))
    x0v = None if x0 is None else np.asarray(x0, dtype=float)
    x, info = _pcg(stencil.matvec, b, stencil.diagonal(), tol, max_iter,
                   x0=x0v, project_mean=True)
    if not info.converged:
        raise NonConvergenceError(
            f"conjugate gradient stalled after {info.iterations} iterations",
            info.residual_history)
    phi = ScalarField(grid, x).project_zero_mean()
    return phi, info


def residual(problem: ConormalProblem, phi: ScalarField):
    """Exact defect of the discrete system that solve_conormal solves.

    Returns (interior defect as a ScalarField scaled by 1/dV, dict with the
    inlet/outlet plane defects scaled by 1/dS).
    """
    grid = problem.lam.grid
    stencil = FluxStencil(grid, problem.lam.values)
    b = assemble_rhs(problem)
    b -= np.sum(b) / b.size
    defect = stencil.matvec(phi.values) - b
    interior = ScalarField(grid, defect / grid.cell_volumes)
    ds = grid.plane_weights
    flux_res = {"minus": defect[0, :, :] / ds, "plus": defect[-1, :, :] / ds}
    return interior, flux_res


def solve_poisson_mixed(grid: Grid, source_values, dirichlet_axes, tol=1e-10,
                        max_iter=None, x0=None):
    """-Laplace q = source with homogeneous Dirichlet data on the faces of the
    listed axes and natural zero flux on the remaining faces.

    Used componentwise for the vector potential: tangential components are
    pinned to zero, the normal component keeps zero normal derivative.
    Returns (values, SolveInfo).
    """
    stencil = FluxStencil(grid, 1.0)
    mask = np.zeros(grid.shape, dtype=bool)
    for a in dirichlet_axes:
        sl = [slice(None)] * 3
        sl[a] = 0
        mask[tuple(sl)] = True
        sl[a] = -1
        mask[tuple(sl)] = True
    if not mask.any():
        raise SolverError("mixed Poisson solve needs at least one Dirichlet face")
    b = np.asarray(source_values, dtype=float) * grid.cell_volumes
    if max_iter is None:
        max_iter = int(2000 * round(np.prod(grid.shape) ** (1.0 / 3.0)))
    x0v = None if x0 is None else np.asarray(x0, dtype=float)
    x, info = _pcg(stencil.matvec, b, stencil.diagonal(), tol, max_iter,
                   x0=x0v, mask=mask)
    if not info.converged:
        raise NonConvergenceError(
            f"conjugate gradient stalled after {info.iterations} iterations",
            info.residual_history)
    return x, info
