"""Isentropic gas thermodynamics: pressure law, sound speed, enthalpy and its
inverse, Bernoulli relation, critical speed, and the near-sonic density
truncation used by the potential solver.

The default model (gamma=2, A=1/2, B=3/2) is normalized so that the enthalpy
is the identity, the critical speed is exactly 1, and the sonic density is
exactly 1.  All operations are pure functions of an immutable model.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq


class GasError(ValueError):
    """Invalid thermodynamic input."""


class EnthalpyRangeError(GasError):
    """Argument of the inverse enthalpy fell below its admissible range."""

    def __init__(self, value):
        self.value = value
        super().__init__(
            f"enthalpy argument {value!r} below the range of h "
            "(vacuum/supersonic overflow)"
        )


class SupercriticalFluxError(GasError):
    """Requested mass flux exceeds the critical (sonic) flux."""


@dataclass(frozen=True)
class GasModel:
    """Polytropic gas p(rho) = A rho^gamma with Bernoulli constant B.

    ``enthalpy_ref`` is the lower limit of the enthalpy integral; the default
    0 makes h(rho) = gamma*A/(gamma-1) * rho^(gamma-1) with no additive
    constant (only differences of h ever matter).
    """

    gamma: float = 2.0
    entropy_const: float = 0.5
    bernoulli_const: float = 1.5
    enthalpy_ref: float = 0.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise GasError(f"gamma must be > 1, got {self.gamma}")
        if not self.entropy_const > 0.0:
            raise GasError(f"entropy_const must be > 0, got {self.entropy_const}")
        if self.enthalpy_ref < 0.0:
            raise GasError(f"enthalpy_ref must be >= 0, got {self.enthalpy_ref}")

    # -- basic laws ---------------------------------------------------------

    def pressure(self, rho):
        self._check_rho(rho)
        return self.entropy_const * np.asarray(rho) ** self.gamma

    def sound_speed(self, rho):
        """c(rho) = sqrt(p'(rho)), strictly increasing in rho."""
        self._check_rho(rho)
        g, A = self.gamma, self.entropy_const
        return np.sqrt(A * g * np.asarray(rho, dtype=float) ** (g - 1.0))

    def enthalpy(self, rho):
        """h(rho) = int_a^rho p'(s)/s ds for the polytropic law."""
        self._check_rho(rho)
        g, A, a = self.gamma, self.entropy_const, self.enthalpy_ref
        coef = g * A / (g - 1.0)
        ref = a ** (g - 1.0) if a > 0.0 else 0.0
        return coef * (np.asarray(rho, dtype=float) ** (g - 1.0) - ref)

    def enthalpy_inverse(self, e):
        """H = h^-1; closed form for the polytropic law."""
        g, A, a = self.gamma, self.entropy_const, self.enthalpy_ref
        coef = g * A / (g - 1.0)
        ref = a ** (g - 1.0) if a > 0.0 else 0.0
        arg = np.asarray(e, dtype=float) / coef + ref
        if np.any(arg <= 0.0):
            bad = np.asarray(e)[np.asarray(arg) <= 0.0]
            raise EnthalpyRangeError(float(np.min(bad)))
        return arg ** (1.0 / (g - 1.0))

    # -- Bernoulli relation -------------------------------------------------

    def density_from_speed(self, q_sq, B=None):
        """rho = H(B - q^2/2); decreasing in q_sq."""
        B = self.bernoulli_const if B is None else B
        return self.enthalpy_inverse(B - 0.5 * np.asarray(q_sq, dtype=float))

    def critical_speed(self, B=None):
        """The q > 0 with q = c(rho(q^2)); flow is sonic at this speed."""
        B = self.bernoulli_const if B is None else B
        # Vacuum bound: density_from_speed needs B - q^2/2 in the range of h.
        g, A, a = self.gamma, self.entropy_const, self.enthalpy_ref
        coef = g * A / (g - 1.0)
        ref = a ** (g - 1.0) if a > 0.0 else 0.0
        q_sq_max = 2.0 * (B + coef * ref)  # rho -> 0 limit
        if q_sq_max <= 0.0:
            raise GasError(f"no sonic state exists for B={B}")

        def fun(q):
            rho = self.density_from_speed(q * q, B)
            return q - float(self.sound_speed(rho))

        lo = 1e-12
        hi = np.sqrt(q_sq_max) * (1.0 - 1e-12)
        if fun(lo) >= 0.0 or fun(hi) <= 0.0:
            raise GasError(f"no sonic state exists for B={B}")
        return brentq(fun, lo, hi, xtol=1e-14, rtol=1e-15)

    def mass_flux(self, q, B=None):
        """j(q) = rho(q^2) * q; increasing on [0, c*], maximal at q = c*."""
        q = np.asarray(q, dtype=float)
        if np.any(q < 0.0):
            raise GasError("speed must be nonnegative")
        return self.density_from_speed(q * q, B) * q

    def subsonic_speed_from_flux(self, j, B=None):
        """Unique q in [0, c*] with mass_flux(q) = j."""
        if j < 0.0:
            raise GasError(f"flux must be nonnegative, got {j}")
        if j == 0.0:
            return 0.0
        c_star = self.critical_speed(B)
        j_max = float(self.mass_flux(c_star, B))
        if j > j_max * (1.0 + 1e-12):
            raise SupercriticalFluxError(
                f"flux {j} exceeds critical flux {j_max}"
            )
        j = min(j, j_max)
        fun = lambda q: float(self.mass_flux(q, B)) - j
        if fun(c_star) <= 0.0:
            return c_star
        return brentq(fun, 0.0, c_star, xtol=1e-14, rtol=1e-15)

    @staticmethod
    def _check_rho(rho):
        if np.any(np.asarray(rho) <= 0.0):
            raise GasError("density must be positive")


@dataclass(frozen=True)
class Truncation:
    """Monotone C^1 clip zeta_m of the speed-squared argument.

    zeta_m(s) = s for s <= 1 - 1/m and 1 - 2/(3m) for s >= 1 - 1/(2m); in
    between a degree-6 bridge whose derivative is nonnegative by construction
    (a plain quintic Hermite dips slightly negative near the right end, so
    the bridge is built by integrating an explicit nonnegative slope profile).
    """

    m: int = 20

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"truncation index must be >= 2, got {self.m}")

    @property
    def s_lo(self):
        return 1.0 - 1.0 / self.m

    @property
    def s_hi(self):
        return 1.0 - 0.5 / self.m

    @property
    def plateau(self):
        return 1.0 - 2.0 / (3.0 * self.m)

    def zeta(self, s):
        s = np.asarray(s, dtype=float)
        w = self.s_hi - self.s_lo
        t = np.clip((s - self.s_lo) / w, 0.0, 1.0)
        # antiderivative of 1 + 5t^2 - 20t^3 + 20t^4 - 6t^5 (slope profile)
        bridge = self.s_lo + w * (
            t + (5.0 / 3.0) * t**3 - 5.0 * t**4 + 4.0 * t**5 - t**6
        )
        out = np.where(s <= self.s_lo, s, np.where(s >= self.s_hi, self.plateau, bridge))
        return out if out.ndim else float(out)

    def zeta_prime(self, s):
        s = np.asarray(s, dtype=float)
        w = self.s_hi - self.s_lo
        t = np.clip((s - self.s_lo) / w, 0.0, 1.0)
        d = 1.0 + 5.0 * t**2 - 20.0 * t**3 + 20.0 * t**4 - 6.0 * t**5
        out = np.where(s <= self.s_lo, 1.0, np.where(s >= self.s_hi, 0.0, d))
        return out if out.ndim else float(out)


def truncated_density(model: GasModel, trunc: Truncation, q_sq, B=None):
    """rho_m(q^2) = rho(zeta_m(q^2)); removes the vacuum singularity."""
    q_sq = np.asarray(q_sq, dtype=float)
    if np.any(q_sq < 0.0):
        raise GasError("speed squared must be nonnegative")
    return model.density_from_speed(trunc.zeta(q_sq), B)
