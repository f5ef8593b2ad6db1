"""Sampled vector fields on uniform grids with analytic exterior data.

A field u: R^n -> R^m is represented by node values on a uniform Cartesian
grid covering the interior ball B_R(0) plus a collar of equal width, and by
an exterior rule that evaluates u analytically everywhere beyond the stored
nodes.  The rule is a rule, not stored samples: tail quadrature queries it at
exact points arbitrarily far out.

Grids are centered at the origin.  Non-periodic grids keep every node x with
|x|_inf <= 2R (interior ball plus collar); periodic grids keep one period
[-R, R) per axis and wrap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .enclosing import smallest_enclosing_ball
from .errors import DomainError

__all__ = [
    "GridSpec",
    "ExteriorRule",
    "SampledField",
    "BallStat",
    "zero_rule",
    "constant_rule",
    "sign_rule",
    "radial_projection_rule",
    "callback_rule",
    "periodic_rule",
    "parse_rule",
    "field_from_function",
    "constant_field",
    "field_average",
    "ball_image_stats",
    "restrict_rescale",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid over the interior ball B_R(0).

    h is the spacing, radius the interior-ball radius R, truncation_radius
    the outer cutoff for tail quadrature (at least 4R).  Periodic grids hold
    one period of length 2R per axis.
    """

    dim: int
    h: float
    radius: float
    truncation_radius: float = 0.0
    periodic: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError(f"dimension must be >= 1, got {self.dim}")
        if self.h <= 0:
            raise DomainError("grid spacing must be positive")
        if self.radius <= 0:
            raise DomainError("interior radius must be positive")
        if self.truncation_radius == 0.0:
            object.__setattr__(self, "truncation_radius", 4.0 * self.radius)
        if self.truncation_radius < 4.0 * self.radius - 1e-12:
            raise DomainError("truncation_radius must be at least 4 * radius")
        if self.periodic:
            n = self.period / self.h
            if abs(n - round(n)) > 1e-9 or round(n) < 4:
                raise DomainError("periodic grid needs h dividing the period 2R")

    @property
    def period(self) -> float:
        return 2.0 * self.radius

    @property
    def extent(self) -> float:
        """Outermost stored-node coordinate magnitude."""
        if self.periodic:
            return self.radius
        return 2.0 * self.radius

    def axis(self) -> np.ndarray:
        if self.periodic:
            n = int(round(self.period / self.h))
            return -self.radius + self.h * np.arange(n)
        k = int(np.floor(self.extent / self.h + 1e-9))
        return self.h * np.arange(-k, k + 1)

    @property
    def shape(self) -> tuple:
        return (self.axis().size,) * self.dim

    def points(self) -> np.ndarray:
        """All node coordinates, shape (*shape, dim)."""
        ax = self.axis()
        if self.dim == 1:
            return ax[:, None]
        mesh = np.meshgrid(*([ax] * self.dim), indexing="ij")
        return np.stack(mesh, axis=-1)

    def interior_mask(self) -> np.ndarray:
        """Nodes strictly inside the interior ball (Euclidean)."""
        pts = self.points()
        r = np.sqrt(np.sum(pts * pts, axis=-1))
        if self.periodic:
            return np.ones(self.shape, dtype=bool)
        return r < self.radius - 1e-12

    def index_of(self, x) -> tuple:
        """Grid index of the node at coordinate x; DomainError off-node."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        ax = self.axis()
        idx = []
        for c in x:
            i = (c - ax[0]) / self.h
            if abs(i - round(i)) > 1e-6 or not (0 <= round(i) < ax.size):
                raise DomainError(f"{x} is not a grid node")
            idx.append(int(round(i)))
        return tuple(idx)


@dataclass(frozen=True)
class ExteriorRule:
    """Analytic values of a field outside the stored nodes.

    kind: "zero", "constant", "sign", "radial_projection", "callback",
    "periodic".  "sign" is the one-dimensional +/-1 step; "radial_projection"
    maps x to x/|x| (m = dim).  Callback rules receive points of shape
    (k, dim) and must return (k, m).
    """

    kind: str
    vector: Optional[tuple] = None
    fn: Optional[Callable] = None

    def __post_init__(self):
        known = ("zero", "constant", "sign", "radial_projection", "callback", "periodic")
        if self.kind not in known:
            raise DomainError(f"unknown exterior rule: {self.kind!r}")
        if self.kind == "constant" and self.vector is None:
            raise DomainError("constant rule needs a vector")
        if self.kind == "callback" and self.fn is None:
            raise DomainError("callback rule needs a function")

    def values(self, points: np.ndarray, m: int) -> np.ndarray:
        """Evaluate at points (k, dim) -> (k, m)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        k = pts.shape[0]
        if self.kind == "zero":
            return np.zeros((k, m))
        if self.kind == "constant":
            vec = np.asarray(self.vector, dtype=float).reshape(1, m)
            return np.repeat(vec, k, axis=0)
        if self.kind == "sign":
            if pts.shape[1] != 1 or m != 1:
                raise DomainError("sign rule is scalar and one-dimensional")
            return np.sign(pts[:, :1])
        if self.kind == "radial_projection":
            r = np.linalg.norm(pts, axis=1, keepdims=True)
            if np.any(r == 0.0):
                raise DomainError("radial projection undefined at the origin")
            return pts / r
        if self.kind == "callback":
            out = np.asarray(self.fn(pts), dtype=float)
            out = out.reshape(k, m)
            if not np.all(np.isfinite(out)):
                raise DomainError("exterior rule returned non-finite values")
            return out
        raise DomainError("periodic rule has no free-space values")

    def far_limits(self, m: int):
        """Constant limits (g_left..., g_right...) beyond any finite radius,
        or None when the rule has no closed-form far field.

        For "zero"/"constant" the limit is direction independent; for "sign"
        the two half-line limits are -1 and +1.  Returns a callable
        direction -> limit vector, or None.
        """
        if self.kind == "zero":
            g = np.zeros(m)
            return lambda direction: g
        if self.kind == "constant":
            g = np.asarray(self.vector, dtype=float)
            return lambda direction: g
        if self.kind == "sign":
            return lambda direction: np.sign(np.atleast_1d(direction)[:1])
        return None


def zero_rule() -> ExteriorRule:
    return ExteriorRule("zero")


def constant_rule(vec) -> ExteriorRule:
    return ExteriorRule("constant", vector=tuple(np.atleast_1d(np.asarray(vec, float))))


def sign_rule() -> ExteriorRule:
    return ExteriorRule("sign")


def radial_projection_rule() -> ExteriorRule:
    return ExteriorRule("radial_projection")


def callback_rule(fn) -> ExteriorRule:
    return ExteriorRule("callback", fn=fn)


def periodic_rule() -> ExteriorRule:
    return ExteriorRule("periodic")


def parse_rule(name: str) -> ExteriorRule:
    """Parse a config-style rule name: "zero", "constant:[...]", "sign",
    "radial_projection", "periodic"."""
    if name == "zero":
        return zero_rule()
    if name == "sign":
        return sign_rule()
    if name == "radial_projection":
        return radial_projection_rule()
    if name == "periodic":
        return periodic_rule()
    if name.startswith("constant:"):
        import json

        return constant_rule(json.loads(name.split(":", 1)[1]))
    raise DomainError(f"unknown exterior rule name: {name!r}")


@dataclass(frozen=True, eq=False)
class SampledField:
    """Node values plus exterior rule.  values has shape (*grid.shape, m).

    Instances are immutable snapshots; solvers produce a new snapshot per
    iteration, so concurrent readers never see partial state.  An optional
    pointwise bound M asserts |u(x)| <= M at every node.
    """

    grid: GridSpec
    values: np.ndarray
    exterior: ExteriorRule
    bound: Optional[float] = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape[: self.grid.dim] != self.grid.shape:
            raise DomainError(
                f"values shape {vals.shape} does not match grid {self.grid.shape}"
            )
        if vals.ndim == self.grid.dim:
            vals = vals[..., None]
        if not np.all(np.isfinite(vals)):
            raise DomainError("field values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if (self.exterior.kind == "periodic") != self.grid.periodic:
            raise DomainError("periodic rule requires a periodic grid and vice versa")
        if self.bound is not None:
            mag = np.sqrt(np.sum(vals * vals, axis=-1))
            if np.max(mag) > self.bound * (1 + 1e-9) + 1e-12:
                raise DomainError("attached bound violated by node values")

    @property
    def m(self) -> int:
        return self.values.shape[-1]

    def component(self, i: int) -> "SampledField":
        return SampledField(self.grid, self.values[..., i : i + 1],
                            _component_rule(self.exterior, i, self.m), None)

    def with_values(self, vals) -> "SampledField":
        return SampledField(self.grid, vals, self.exterior, self.bound)

    def with_bound(self, bound) -> "SampledField":
        return SampledField(self.grid, self.values, self.exterior, bound)

    def value_at(self, points) -> np.ndarray:
        """Evaluate at arbitrary points: multilinear interpolation inside the
        stored nodes, exterior rule beyond, periodic wrap on periodic grids."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty((pts.shape[0], self.m))
        ax = self.grid.axis()
        if self.grid.periodic:
            p = self.grid.period
            wrapped = np.mod(pts - ax[0], p) + ax[0]
            out[:] = _interp_grid(ax, self.values, wrapped, periodic=True, period=p)
            return out
        inside = np.max(np.abs(pts), axis=1) <= self.grid.extent + 1e-12
        if np.any(inside):
            out[inside] = _interp_grid(ax, self.values, pts[inside], periodic=False)
        if np.any(~inside):
            out[~inside] = self.exterior.values(pts[~inside], self.m)
        return out

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(np.asarray(self.values) ** 2, axis=-1))


def _component_rule(rule: ExteriorRule, i: int, m: int) -> ExteriorRule:
    if rule.kind in ("zero", "sign", "periodic"):
        return rule
    if rule.kind == "constant":
        return constant_rule([rule.vector[i]])
    base = rule
    return callback_rule(lambda pts: base.values(pts, m)[:, i : i + 1])


def _interp_grid(ax, vals, pts, periodic=False, period=None):
    """Multilinear interpolation of vals (grid shape + m) at pts (k, dim)."""
    dim = pts.shape[1]
    n = ax.size
    h = ax[1] - ax[0]
    t = (pts - ax[0]) / h
    i0 = np.floor(t).astype(int)
    frac = t - i0
    if periodic:
        i0 = np.mod(i0, n)
        i1 = np.mod(i0 + 1, n)
    else:
        i0 = np.clip(i0, 0, n - 1)
        i1 = np.clip(i0 + 1, 0, n - 1)
        frac = np.clip(frac, 0.0, 1.0)
    out = 0.0
    import itertools

    for corner in itertools.product((0, 1), repeat=dim):
        w = np.ones(pts.shape[0])
        idx = []
        for d, c in enumerate(corner):
            w = w * (frac[:, d] if c else (1.0 - frac[:, d]))
            idx.append(i1[:, d] if c else i0[:, d])
        out = out + w[:, None] * vals[tuple(idx)]
    return out


def field_from_function(grid: GridSpec, fn, exterior: ExteriorRule,
                        m: Optional[int] = None, bound=None) -> SampledField:
    """Sample fn(points (k, dim)) -> (k, m) on the grid nodes."""
    pts = grid.points().reshape(-1, grid.dim)
    vals = np.asarray(fn(pts), dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    if m is not None and vals.shape[-1] != m:
        raise DomainError(f"function returned m={vals.shape[-1]}, expected {m}")
    return SampledField(grid, vals.reshape(*grid.shape, vals.shape[-1]), exterior, bound)


def constant_field(grid: GridSpec, vec, exterior=None) -> SampledField:
    vec = np.atleast_1d(np.asarray(vec, dtype=float))
    vals = np.broadcast_to(vec, (*grid.shape, vec.size))
    rule = exterior if exterior is not None else constant_rule(vec)
    return SampledField(grid, vals.copy(), rule,
                        bound=float(np.linalg.norm(vec)))


# -- geometric primitives ----------------------------------------------------


def _ball_node_values(u: SampledField, center, radius):
    pts = u.grid.points().reshape(-1, u.grid.dim)
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if np.linalg.norm(c) + radius > u.grid.extent + 1e-12:
        raise DomainError("ball exceeds the stored-node region")
    mask = np.linalg.norm(pts - c, axis=1) <= radius + 1e-12
    if not np.any(mask):
        raise DomainError("ball contains no grid nodes")
    return np.asarray(u.values).reshape(-1, u.m)[mask]


def field_average(u: SampledField, ball) -> np.ndarray:
    """Mean of u over the grid nodes in the ball (center, radius).

    Uniform node weights: exact for constants, O(h) accurate in general.
    """
    center, radius = ball
    vals = _ball_node_values(u, center, radius)
    return vals.mean(axis=0)


@dataclass(frozen=True)
class BallStat:
    """Image statistics of a field over a ball: mean, oscillation (diameter
    of the image set) and the smallest ball enclosing the sampled values."""

    center: np.ndarray
    radius: float
    mean: np.ndarray
    osc: float
    enclosing_center: np.ndarray
    enclosing_radius: float


def _diameter(vals):
    # exact max pairwise distance, chunked to bound memory
    best = 0.0
    step = 512
    for i in range(0, len(vals), step):
        chunk = vals[i : i + step]
        d2 = np.sum((chunk[:, None, :] - vals[None, :, :]) ** 2, axis=-1)
        best = max(best, float(np.max(d2)))
    return float(np.sqrt(best))


def ball_image_stats(u: SampledField, ball) -> BallStat:
    """Mean, oscillation and smallest enclosing ball of u over ball nodes."""
    center, radius = ball
    vals = _ball_node_values(u, center, radius)
    ec, er = smallest_enclosing_ball(vals)
    return BallStat(
        center=np.atleast_1d(np.asarray(center, dtype=float)),
        radius=float(radius),
        mean=vals.mean(axis=0),
        osc=_diameter(vals),
        enclosing_center=ec,
        enclosing_radius=er,
    )


def restrict_rescale(u: SampledField, mu: float, t: float) -> SampledField:
    """The rescaled field x -> mu * u(t x), resampled on the same grid.

    Interior values come from multilinear interpolation (or the exterior rule
    where t x leaves the stored nodes); the exterior rule is composed
    accordingly, and an attached bound M becomes mu * M.
    """
    if t <= 0:
        raise DomainError("scaling t must be positive")
    if u.grid.periodic:
        raise DomainError("restrict_rescale needs free-space exterior data")
    pts = u.grid.points().reshape(-1, u.grid.dim)
    vals = mu * u.value_at(t * pts)
    base = u

    def outer(p):
        return mu * base.value_at(t * np.asarray(p, dtype=float))

    return SampledField(
        u.grid,
        vals.reshape(*u.grid.shape, u.m),
        callback_rule(outer),
        bound=None if u.bound is None else abs(mu) * u.bound,
    )
