"""Truncated nonlinear potential solver, the max-Mach functional, and the
critical flux multiplier.

The nonlinearity is handled by Picard iteration with a frozen scalar
coefficient rho_m(|grad phi|^2) and under-relaxation, so every step is a
symmetric conormal solve.  The critical multiplier is located by bisection
on the predicate max|grad phi|^2 <= 1 - 1/m, with Picard divergence treated
as predicate failure.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import elliptic
from .boundary import BoundaryData
from .gas import GasModel, Truncation, truncated_density
from .grid import Grid, ScalarField, VectorField
from .operators import gradient


class PicardDivergenceError(RuntimeError):
    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


@dataclass
class PotentialSolution:
    phi: ScalarField
    u: VectorField
    rho: ScalarField
    theta: float
    m: int
    max_speed_sq: float
    mach_max: float
    picard_iters: int
    gas: GasModel
    update_history: list = dc_field(default_factory=list)


@dataclass
class CriticalThetaResult:
    m: int
    bracket: tuple
    mach_trace: list  # (theta, mach_max, max_speed_sq) samples
    open_result: bool = False  # predicate never failed below theta_max

    @property
    def theta_star(self):
        return 0.5 * (self.bracket[0] + self.bracket[1])


def solve_potential(gas: GasModel, grid: Grid, bdata: BoundaryData, theta,
                    m=20, tol=1e-10, max_outer=200, relax=0.7, phi0=None):
    """Solve div(rho_m(|grad phi|^2) grad phi) = 0 with conormal flux theta*f."""
    if theta < 0.0:
        raise ValueError(f"theta must be nonnegative, got {theta}")
    bdata.validate()
    trunc = Truncation(m)
    phi = np.zeros(grid.shape) if phi0 is None else np.asarray(phi0, dtype=float).copy()
    history = []
    if theta == 0.0:
        sol_phi = ScalarField(grid, np.zeros(grid.shape)).project_zero_mean()
        return _finalize(gas, trunc, sol_phi, theta, 0, history)

    g_minus = theta * bdata.f_minus
    g_plus = theta * bdata.f_plus
    scale = max(theta, 1.0)
    iters = 0
    for iters in range(1, max_outer + 1):
        u = gradient(ScalarField(grid, phi))
        q_sq = u.magnitude_sq()
        if not np.all(np.isfinite(q_sq)):
            raise PicardDivergenceError(
                f"Picard iterate blew up at iteration {iters}", history)
        lam = truncated_density(gas, trunc, q_sq)
        problem = elliptic.ConormalProblem(
            ScalarField(grid, lam), flux_minus=g_minus, flux_plus=g_plus)
        phi_new, _ = elliptic.solve_conormal(problem, tol=min(tol, 1e-10),
                                             x0=phi)
        update = float(np.max(np.abs(phi_new.values - phi)))
        history.append(update)
        phi = (1.0 - relax) * phi + relax * phi_new.values
        if update <= tol * scale:
            break
    else:
        raise PicardDivergenceError(
            f"Picard stalled after {max_outer} iterations "
            f"(last update {history[-1]:.3e})", history)
    sol_phi = ScalarField(grid, phi).project_zero_mean()
    return _finalize(gas, trunc, sol_phi, theta, iters, history)


def _finalize(gas, trunc, phi, theta, iters, history):
    grid = phi.grid
    u = gradient(phi)
    q_sq = u.magnitude_sq()
    rho = ScalarField(grid, truncated_density(gas, trunc, q_sq))
    sol = PotentialSolution(
        phi=phi, u=u, rho=rho, theta=theta, m=trunc.m,
        max_speed_sq=float(np.max(q_sq)),
        mach_max=0.0, picard_iters=iters, gas=gas, update_history=history)
    sol.mach_max = max_mach(sol)
    return sol


def max_mach(sol: PotentialSolution):
    """max |u| / c(rho), with the density re-evaluated without truncation
    wherever that is admissible."""
    gas = sol.gas
    q_sq = sol.u.magnitude_sq()
    rho = sol.rho.values.copy()
    # untruncated density where the Bernoulli argument stays in range
    g, A = gas.gamma, gas.entropy_const
    coef = g * A / (g - 1.0)
    ref = gas.enthalpy_ref ** (g - 1.0) if gas.enthalpy_ref > 0.0 else 0.0
    arg = (gas.bernoulli_const - 0.5 * q_sq) / coef + ref
    ok = arg > 0.0
    if ok.any():
        rho[ok] = arg[ok] ** (1.0 / (g - 1.0))
    c = gas.sound_speed(rho)
    return float(np.max(np.sqrt(q_sq) / c))


def check_positivity_u1(sol: PotentialSolution):
    """Nodewise minimum of u1 and its node location."""
    u1 = sol.u.values[..., 0]
    idx = np.unravel_index(np.argmin(u1), u1.shape)
    x = tuple(ax[i] for ax, i in zip(sol.phi.grid.axes, idx))
    return float(u1[idx]), x


def find_critical_theta(gas: GasModel, grid: Grid, bdata: BoundaryData, m,
                        bis_tol=1e-3, theta_max=4.0, tol=1e-10,
                        max_outer=200, relax=0.7):
    """Bisection on the predicate M_m(theta) <= 1 - 1/m.

    The starting bracket is [0, 1] with the upper end doubled until the
    predicate fails (or the solver diverges).  Solves warm-start from the
    nearest converged sample below.
    """
    trunc_cap = 1.0 - 1.0 / m
    mach_trace = []
    warm = {}  # theta -> phi values, for warm starts

    def predicate(theta):
        phi0 = None
        below = [t for t in warm if t <= theta]
        if below:
            phi0 = warm[max(below)]
        try:
            sol = solve_potential(gas, grid, bdata, theta, m=m, tol=tol,
                                  max_outer=max_outer, relax=relax, phi0=phi0)
        except PicardDivergenceError:
            return False
        warm[theta] = sol.phi.values
        mach_trace.append((theta, sol.mach_max, sol.max_speed_sq))
        return sol.max_speed_sq <= trunc_cap

    lo, hi = 0.0, 1.0
    predicate(lo)
    while predicate(hi):
        lo = hi
        hi *= 2.0
        if hi > theta_max:
            return CriticalThetaResult(
                m=m, bracket=(lo, theta_max), mach_trace=sorted(mach_trace),
                open_result=True)
    while hi - lo > bis_tol:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return CriticalThetaResult(m=m, bracket=(lo, hi),
                               mach_trace=sorted(mach_trace))
