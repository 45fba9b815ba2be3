"""Discrete differential operators and reflection-aware interpolation.

All derivatives are second order: central in the interior, one-sided at the
inlet/outlet faces (no extension in x1), and central with parity ghosts at
the walls.  Each axis stencil is a 1-D linear operator, so mixed partials
commute exactly; in particular curl(grad(.)) = 0 and div(curl(.)) = 0 to
round-off for any parity-consistent field.
"""

import numpy as np

from .grid import (DomainError, ScalarField, VectorField, VELOCITY_PARITY)


def _diff_axis(values, axis, h, wall_parity):
    """d/dx_axis with one-sided ends (axis 0) or parity ghosts (axes 1, 2)."""
    v = values
    out = np.empty_like(v)
    sl = [slice(None)] * v.ndim

    def at(idx):
        s = sl.copy()
        s[axis] = idx
        return tuple(s)

    out[at(slice(1, -1))] = (v[at(slice(2, None))] - v[at(slice(None, -2))]) / (2.0 * h)
    if axis == 0:
        out[at(0)] = (-3.0 * v[at(0)] + 4.0 * v[at(1)] - v[at(2)]) / (2.0 * h)
        out[at(-1)] = (3.0 * v[at(-1)] - 4.0 * v[at(-2)] + v[at(-3)]) / (2.0 * h)
    else:
        p = wall_parity
        out[at(0)] = (1.0 - p) * v[at(1)] / (2.0 * h)
        out[at(-1)] = (p - 1.0) * v[at(-2)] / (2.0 * h)
    return out


def diff_scalar(field: ScalarField, axis):
    """Derivative of a scalar field along an axis; flips the wall parity."""
    h = field.grid.spacing[axis]
    p2, p3 = field.parity
    wall_parity = p2 if axis == 1 else p3
    vals = _diff_axis(field.values, axis, h, wall_parity)
    parity = (-p2 if axis == 1 else p2, -p3 if axis == 2 else p3)
    return ScalarField(field.grid, vals, parity)


def gradient(field: ScalarField) -> VectorField:
    comps = [diff_scalar(field, a) for a in range(3)]
    vals = np.stack([c.values for c in comps], axis=-1)
    return VectorField(field.grid, vals, tuple(c.parity for c in comps))


def divergence(field: VectorField) -> ScalarField:
    grid = field.grid
    total = np.zeros(grid.shape)
    parity = None
    for a in range(3):
        d = diff_scalar(field.component(a), a)
        total += d.values
        parity = d.parity if parity is None else parity
    return ScalarField(grid, total, parity)


def curl(field: VectorField) -> VectorField:
    d = [[diff_scalar(field.component(i), j) for j in range(3)] for i in range(3)]
    comps = [
        (d[2][1].values - d[1][2].values,
         (d[2][1].parity)),
        (d[0][2].values - d[2][0].values,
         (d[0][2].parity)),
        (d[1][0].values - d[0][1].values,
         (d[1][0].parity)),
    ]
    vals = np.stack([c[0] for c in comps], axis=-1)
    return VectorField(field.grid, vals, tuple(c[1] for c in comps))


def velocity_gradient(field: VectorField):
    """All nine nodal derivatives d_j u_i as (values[...,i,j], parity[i][j])."""
    vals = np.empty(field.grid.shape + (3, 3))
    pars = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            d = diff_scalar(field.component(i), j)
            vals[..., i, j] = d.values
            pars[i][j] = d.parity
    return vals, pars


# -- reflection extension and interpolation ---------------------------------

def _fold(t, parity):
    """Map extended wall coordinate(s) into [0,1] with reflection parity.

    Returns (position in [0,1], sign multiplier).
    """
    t = np.asarray(t, dtype=float)
    r = np.mod(t, 2.0)
    flip = r > 1.0
    pos = np.where(flip, 2.0 - r, r)
    if parity < 0:
        sign = np.where(flip, -1.0, 1.0)
    else:
        sign = np.ones_like(pos)
    return pos, sign


class ScalarEvaluator:
    """Trilinear evaluator on [0,L] x R^2 via the parity-periodic extension."""

    def __init__(self, field: ScalarField, x1_slack=1e-12):
        self.field = field
        self.grid = field.grid
        self.x1_slack = x1_slack

    def __call__(self, x1, x2, x3):
        f = self.field
        g = self.grid
        L = g.L
        x1 = np.asarray(x1, dtype=float)
        slack = self.x1_slack * max(L, 1.0)
        if np.any(x1 < -slack) or np.any(x1 > L + slack):
            bad = x1[(x1 < -slack) | (x1 > L + slack)]
            raise DomainError(f"x1={float(np.ravel(bad)[0])} outside [0, {L}]")
        x1 = np.clip(x1, 0.0, L)
        p2, s2 = _fold(x2, f.parity[0])
        p3, s3 = _fold(x3, f.parity[1])
        vals = _trilinear(f.values, g, x1, p2, p3)
        return vals * s2 * s3


class VectorEvaluator:
    def __init__(self, field: VectorField, x1_slack=1e-12):
        self.comps = [ScalarEvaluator(field.component(i), x1_slack)
                      for i in range(3)]

    def __call__(self, x1, x2, x3):
        return np.stack([c(x1, x2, x3) for c in self.comps], axis=-1)


def _trilinear(values, grid, x1, x2, x3):
    h1, h2, h3 = grid.spacing
    n1, n2, n3 = grid.shape
    f1 = np.clip(x1 / h1, 0.0, n1 - 1.0 - 1e-12)
    f2 = np.clip(x2 / h2, 0.0, n2 - 1.0 - 1e-12)
    f3 = np.clip(x3 / h3, 0.0, n3 - 1.0 - 1e-12)
    i1 = f1.astype(int)
    i2 = f2.astype(int)
    i3 = f3.astype(int)
    t1 = f1 - i1
    t2 = f2 - i2
    t3 = f3 - i3
    out = np.zeros(np.broadcast(f1, f2, f3).shape)
    for d1, w1 in ((0, 1.0 - t1), (1, t1)):
        for d2, w2 in ((0, 1.0 - t2), (1, t2)):
            for d3, w3 in ((0, 1.0 - t3), (1, t3)):
                out += w1 * w2 * w3 * values[i1 + d1, i2 + d2, i3 + d3]
    return out


class PlaneEvaluator:
    """Bilinear evaluator for an inlet/outlet-plane array with wall parity."""

    def __init__(self, grid, values, parity=(1, 1)):
        self.grid = grid
        self.values = np.asarray(values, dtype=float)
        self.parity = parity

    def __call__(self, x2, x3):
        g = self.grid
        _, h2, h3 = g.spacing
        _, n2, n3 = g.shape
        p2, s2 = _fold(x2, self.parity[0])
        p3, s3 = _fold(x3, self.parity[1])
        f2 = np.clip(p2 / h2, 0.0, n2 - 1.0 - 1e-12)
        f3 = np.clip(p3 / h3, 0.0, n3 - 1.0 - 1e-12)
        i2 = f2.astype(int)
        i3 = f3.astype(int)
        t2 = f2 - i2
        t3 = f3 - i3
        v = self.values
        out = ((1 - t2) * (1 - t3) * v[i2, i3] + t2 * (1 - t3) * v[i2 + 1, i3]
               + (1 - t2) * t3 * v[i2, i3 + 1] + t2 * t3 * v[i2 + 1, i3 + 1])
        return out * s2 * s3


def plane_diff4(values, axis, h, parity=1):
    """Fourth-order first derivative of a plane array with parity ghosts."""
    v = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    n = v.shape[0]
    ext = np.concatenate([parity * v[2:0:-1], v, parity * v[-2:-4:-1]], axis=0)
    d = (-ext[4:] + 8.0 * ext[3:-1] - 8.0 * ext[1:-3] + ext[:-4]) / (12.0 * h)
    assert d.shape[0] == n
    return np.moveaxis(d, 0, axis)


def interpolate(field, point):
    """Value of a scalar/vector field at one point of the extended domain."""
    x1, x2, x3 = point
    if isinstance(field, ScalarField):
        ev = ScalarEvaluator(field)
    else:
        ev = VectorEvaluator(field)
    out = ev(np.asarray(x1, dtype=float), x2, x3)
    return float(out) if np.ndim(out) == 0 else out


def extend_reflect(field):
    """Parity-periodic evaluator on [0,L] x R^2 (Appendix-style extension)."""
    if isinstance(field, ScalarField):
        return ScalarEvaluator(field)
    return VectorEvaluator(field)
