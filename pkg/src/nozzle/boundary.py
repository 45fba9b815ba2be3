"""Boundary data: normal momentum flux on inlet/outlet, swirl and Bernoulli
data on the inlet, with the compatibility validators and the analytic family
used throughout the test battery.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import Grid


class BoundaryDataError(ValueError):
    """Boundary data violates a compatibility hypothesis."""


@dataclass
class BoundaryData:
    """Normal momentum flux f on the inlet/outlet planes plus inlet data.

    ``f_minus``/``f_plus`` are nodal (N2,N3) arrays of rho*u.n on x1=0 / x1=L
    (outward normal, so f_minus < 0 at inflow).  ``kappa`` and ``b0`` are
    nodal inlet arrays; ``callbacks`` optionally provides closed forms with
    exact tangential derivatives (keys: kappa, b0, db0_dx2, db0_dx3).
    """

    grid: Grid
    f_minus: np.ndarray
    f_plus: np.ndarray
    kappa: np.ndarray
    b0: np.ndarray
    b_bar: float
    callbacks: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        shape = self.grid.shape[1:]
        for name in ("f_minus", "f_plus", "kappa", "b0"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise BoundaryDataError(
                    f"{name} shape {arr.shape} != plane shape {shape}")
            setattr(self, name, arr)

    # -- validators ---------------------------------------------------------

    def flux_integral(self):
        """Discrete integral of f over the whole boundary (walls carry 0)."""
        ds = self.grid.plane_weights
        return float(np.sum(self.f_minus * ds) + np.sum(self.f_plus * ds))

    def validate(self, tol_compat=1e-12, check_edges=True):
        scale = max(np.max(np.abs(self.f_minus)), np.max(np.abs(self.f_plus)), 1e-300)
        if abs(self.flux_integral()) > tol_compat * scale:
            raise BoundaryDataError(
                f"flux compatibility violated: integral {self.flux_integral()}")
        if np.any(self.f_minus >= 0.0):
            raise BoundaryDataError("f must be negative everywhere on the inlet")
        if np.any(self.f_plus <= 0.0):
            raise BoundaryDataError("f must be positive everywhere on the outlet")
        if check_edges:
            self._check_edges()

    def _check_edges(self):
        """Edge conditions: normal derivative of f vanishes on the plane edges;
        B0 = b_bar and kappa = 0 on the inlet plane edge."""
        h2, h3 = self.grid.spacing[1], self.grid.spacing[2]
        for f in (self.f_minus, self.f_plus):
            scale = max(np.max(np.abs(f)), 1e-300)
            d_lo = np.abs(-3.0 * f[0, :] + 4.0 * f[1, :] - f[2, :]) / (2.0 * h2)
            d_hi = np.abs(3.0 * f[-1, :] - 4.0 * f[-2, :] + f[-3, :]) / (2.0 * h2)
            if max(d_lo.max(), d_hi.max()) > 50.0 * h2 * scale:
                raise BoundaryDataError(
                    "normal derivative of f does not vanish on the x2 edges")
            d_lo = np.abs(-3.0 * f[:, 0] + 4.0 * f[:, 1] - f[:, 2]) / (2.0 * h3)
            d_hi = np.abs(3.0 * f[:, -1] - 4.0 * f[:, -2] + f[:, -3]) / (2.0 * h3)
            if max(d_lo.max(), d_hi.max()) > 50.0 * h3 * scale:
                raise BoundaryDataError(
                    "normal derivative of f does not vanish on the x3 edges")
        edge = np.zeros(self.grid.shape[1:], dtype=bool)
        edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
        if np.max(np.abs(self.kappa[edge])) > 1e-12 * max(np.max(np.abs(self.kappa)), 1e-300):
            raise BoundaryDataError("kappa must vanish on the inlet plane edge")
        db = np.abs(self.b0[edge] - self.b_bar)
        if np.max(db, initial=0.0) > 1e-12 * max(np.max(np.abs(self.b0 - self.b_bar)), 1e-300):
            raise BoundaryDataError("B0 must equal B_bar on the inlet plane edge")


def boundary_family(grid, b_bar, a2=0.0, a3=0.0, eps_kappa=0.0, eps_b=0.0):
    """Analytic data family satisfying every hypothesis by construction.

    f(0,.) = -(1 + a2 cos(pi x2) + a3 cos(pi x3)), f(L,.) = +(same profile),
    kappa = eps_kappa sin(pi x2) sin(pi x3),
    B0 = b_bar + eps_b sin^2(pi x2) sin^2(pi x3).
    The outlet profile is rescaled so the discrete flux integral vanishes
    exactly (for the cosine family the factor is 1 to round-off).
    """
    if abs(a2) + abs(a3) >= 1.0:
        raise BoundaryDataError(
            f"amplitudes a2={a2}, a3={a3} make f change sign on a plane")
    _, x2, x3 = grid.axes
    X2, X3 = np.meshgrid(x2, x3, indexing="ij")
    profile = 1.0 + a2 * np.cos(np.pi * X2) + a3 * np.cos(np.pi * X3)
    f_minus = -profile
    f_plus = profile.copy()
    ds = grid.plane_weights
    scale = -np.sum(f_minus * ds) / np.sum(f_plus * ds)
    f_plus *= scale
    kappa = eps_kappa * np.sin(np.pi * X2) * np.sin(np.pi * X3)
    b0 = b_bar + eps_b * np.sin(np.pi * X2) ** 2 * np.sin(np.pi * X3) ** 2

    pi = np.pi
    callbacks = {
        "kappa": lambda y2, y3: eps_kappa * np.sin(pi * y2) * np.sin(pi * y3),
        "b0": lambda y2, y3: (b_bar
                              + eps_b * np.sin(pi * y2) ** 2 * np.sin(pi * y3) ** 2),
        "db0_dx2": lambda y2, y3: (eps_b * pi * np.sin(2.0 * pi * y2)
                                   * np.sin(pi * y3) ** 2),
        "db0_dx3": lambda y2, y3: (eps_b * pi * np.sin(pi * y2) ** 2
                                   * np.sin(2.0 * pi * y3)),
    }
    data = BoundaryData(grid, f_minus, f_plus, kappa, b0, b_bar, callbacks)
    data.validate()
    return data
