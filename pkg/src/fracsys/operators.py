"""Evaluation of the nonlocal operators L_K, the fractional Laplacian, the
bilinear form and the order-s energy, plus the independent spectral oracle.

All real-space evaluations of one kernel on one grid consume the same
quadrature weights (see quadrature.py), so the pointwise identity

    -L(v^2)(x) + 2 v(x) L v(x) + 2 B(v, v)(x) = 0

holds to rounding for every admissible kernel and grid: per sampled point y,
2 v(x) (v(x) - v(y)) - (v(x) - v(y))^2 equals v(x)^2 - v(y)^2 exactly.

Evaluations are pure functions of immutable inputs; applying them at many
points concurrently needs no shared mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import DomainError
from .fields import ExteriorRule, GridSpec, SampledField
from .kernels import KernelSpec, make_fractional_kernel
from .quadrature import QuadratureScheme, scheme_for

__all__ = [
    "EnergyValue",
    "apply_LK",
    "apply_LK_field",
    "apply_fractional_laplacian",
    "apply_fractional_laplacian_field",
    "bilinear_form",
    "bilinear_form_field",
    "s_energy",
    "spectral_apply",
    "AssembledOperator",
    "assemble_dirichlet",
]


# -- extended value tables ----------------------------------------------------


def _extended_line(u: SampledField, J: int, mask_exterior=False):
    """Values at positions ax[0]-J*h .. ax[-1]+J*h; exterior positions come
    from the rule (or zero with mask_exterior, which also returns the
    interior indicator)."""
    grid = u.grid
    ax = grid.axis()
    pos = np.concatenate([ax[0] + grid.h * np.arange(-J, 0), ax,
                          ax[-1] + grid.h * np.arange(1, J + 1)])
    vals = np.zeros((pos.size, u.m))
    chi = np.abs(pos) < grid.radius - 1e-12
    stored = np.abs(pos) <= grid.extent + 1e-12
    v = np.asarray(u.values).reshape(-1, u.m)
    vals[J : J + ax.size] = v
    out = ~stored
    if np.any(out):
        try:
            vals[out] = u.exterior.values(pos[out, None], u.m)
        except Exception as exc:  # noqa: BLE001 - rule failures become domain errors
            raise DomainError(f"exterior rule undefined at required radii: {exc}")
    if mask_exterior:
        vals = vals * chi[:, None]
        return pos, vals, chi
    return pos, vals


def _extended_plane(u: SampledField, M: int, mask_exterior=False):
    grid = u.grid
    ax = grid.axis()
    n = ax.size
    full = np.concatenate([ax[0] + grid.h * np.arange(-M, 0), ax,
                           ax[-1] + grid.h * np.arange(1, M + 1)])
    P1, P2 = np.meshgrid(full, full, indexing="ij")
    pts = np.stack([P1, P2], axis=-1)
    r = np.sqrt(P1**2 + P2**2)
    chi = r < grid.radius - 1e-12
    stored = np.maximum(np.abs(P1), np.abs(P2)) <= grid.extent + 1e-12
    vals = np.zeros((full.size, full.size, u.m))
    vals[M : M + n, M : M + n] = np.asarray(u.values)
    out = ~stored
    if np.any(out):
        try:
            vals[out] = u.exterior.values(pts[out], u.m)
        except Exception as exc:  # noqa: BLE001
            raise DomainError(f"exterior rule undefined at required radii: {exc}")
    if mask_exterior:
        vals = vals * chi[..., None]
        return pts, vals, chi
    return pts, vals


def _far_magnitude(u: SampledField) -> float:
    """Crude sup bound used only in truncation-error estimates."""
    mags = [float(np.max(u.magnitude()))]
    if u.bound is not None:
        mags.append(float(u.bound))
    T = u.grid.truncation_radius
    probes = T * np.concatenate([np.eye(u.grid.dim), -np.eye(u.grid.dim)])
    try:
        g = u.exterior.values(probes, u.m)
        mags.append(float(np.max(np.sqrt(np.sum(g * g, axis=-1)))))
    except DomainError:
        pass
    return max(mags)


# -- core applications --------------------------------------------------------


def _apply_line(u: SampledField, scheme: QuadratureScheme):
    grid = u.grid
    w = scheme.line_weights
    J = w.size
    _, E = _extended_line(u, J)
    n = grid.axis().size
    center = E[J : J + n]
    acc = np.zeros_like(center)
    for j in range(1, J + 1):
        acc += w[j - 1] * (E[J + j : J + j + n] + E[J - j : J - j + n] - 2.0 * center)
    limits = u.exterior.far_limits(u.m)
    est = 0.0
    if limits is not None:
        gp = limits(np.array([1.0]))
        gm = limits(np.array([-1.0]))
        acc += scheme.tail_mass * (gp + gm - 2.0 * center)
    else:
        est = 4.0 * _far_magnitude(u) * scheme.tail_upper
    return acc, est


def _apply_periodic_line(u: SampledField, scheme: QuadratureScheme):
    W = scheme.torus_weights
    v = np.asarray(u.values)
    Fw = np.conj(np.fft.fft(W))
    S = float(np.sum(W))
    out = np.empty_like(v)
    for c in range(u.m):
        corr = np.real(np.fft.ifft(np.fft.fft(v[:, c]) * Fw))
        out[:, c] = corr - S * v[:, c]
    return out, 0.0


def _apply_plane(u: SampledField, scheme: QuadratureScheme):
    W = scheme.plane_weights
    M = W.shape[0] // 2
    _, E = _extended_plane(u, M)
    S = float(np.sum(W))
    Wf = W[::-1, ::-1]
    v = np.asarray(u.values)
    out = np.empty_like(v)
    for c in range(u.m):
        corr = fftconvolve(E[..., c], Wf, mode="valid")
        out[..., c] = corr - S * v[..., c]
    limits = u.exterior.far_limits(u.m)
    est = 0.0
    if limits is not None:
        g = limits(np.array([1.0, 0.0]))
        out += scheme.tail_mass * (g[None, None, :] - v)
    else:
        est = 4.0 * _far_magnitude(u) * scheme.tail_upper
    return out, est


def _apply_periodic_plane(u: SampledField, scheme: QuadratureScheme):
    W = scheme.torus_weights
    v = np.asarray(u.values)
    Fw = np.conj(np.fft.fft2(W))
    S = float(np.sum(W))
    out = np.empty_like(v)
    for c in range(u.m):
        corr = np.real(np.fft.ifft2(np.fft.fft2(v[..., c]) * Fw))
        out[..., c] = corr - S * v[..., c]
    return out, 0.0


def apply_LK_field(u: SampledField, kernel: KernelSpec):
    """L_K u at every stored node.  Returns (values, truncation_estimate);
    values has the field's shape, the estimate is a scalar bound on the
    neglected tail (0 when the exterior rule has a closed-form far field)."""
    scheme = scheme_for(kernel, u.grid)
    if u.grid.dim == 1:
        fn = _apply_periodic_line if u.grid.periodic else _apply_line
    else:
        fn = _apply_periodic_plane if u.grid.periodic else _apply_plane
    vals, est = fn(u, scheme)
    if u.grid.dim == 1:
        return vals.reshape(*u.grid.shape, u.m), est
    return vals, est


def _interior_node_index(u: SampledField, x):
    idx = u.grid.index_of(x)
    pts = u.grid.points()
    r = float(np.linalg.norm(pts[idx]))
    if not u.grid.periodic and r >= u.grid.radius - 1e-12:
        raise DomainError(f"evaluation point {x} is not an interior node")
    return idx


def apply_LK(u: SampledField, kernel: KernelSpec, x) -> float:
    """L_K u(x) for a scalar field at an interior grid node."""
    if u.m != 1:
        raise DomainError("apply_LK expects a scalar field; use components")
    idx = _interior_node_index(u, x)
    vals, _ = apply_LK_field(u, kernel)
    return float(vals[idx][0])


def apply_fractional_laplacian_field(u: SampledField, s: float):
    """(-Delta)^s u = -L u with the fractional kernel of order 2s."""
    kernel = make_fractional_kernel(u.grid.dim, s)
    vals, est = apply_LK_field(u, kernel)
    return -vals, est


def apply_fractional_laplacian(u: SampledField, s: float, x) -> float:
    if u.m != 1:
        raise DomainError("pointwise evaluation expects a scalar field")
    idx = _interior_node_index(u, x)
    vals, _ = apply_fractional_laplacian_field(u, s)
    return float(vals[idx][0])


# -- bilinear form ------------------------------------------------------------


def _check_same_discretization(u: SampledField, w: SampledField):
    if u.grid != w.grid:
        raise DomainError("fields must share one grid")


def _bilinear_line(u, w, scheme):
    J = scheme.line_weights.size
    _, Eu = _extended_line(u, J)
    _, Ew = _extended_line(w, J)
    n = u.grid.axis().size
    cu, cw = Eu[J : J + n], Ew[J : J + n]
    acc = np.zeros(n)
    for j in range(1, J + 1):
        du_p = cu - Eu[J + j : J + j + n]
        dw_p = cw - Ew[J + j : J + j + n]
        du_m = cu - Eu[J - j : J - j + n]
        dw_m = cw - Ew[J - j : J - j + n]
        acc += scheme.line_weights[j - 1] * 0.5 * (
            np.sum(du_p * dw_p, axis=-1) + np.sum(du_m * dw_m, axis=-1))
    est = 0.0
    lu, lw = u.exterior.far_limits(u.m), w.exterior.far_limits(w.m)
    if lu is not None and lw is not None:
        for d in (1.0, -1.0):
            gu, gw = lu(np.array([d])), lw(np.array([d]))
            acc += scheme.tail_mass * 0.5 * np.sum((cu - gu) * (cw - gw), axis=-1)
    else:
        est = 2.0 * _far_magnitude(u) * _far_magnitude(w) * scheme.tail_upper
    return acc, est


def _bilinear_fft(u, w, scheme):
    """B through correlations: 2 B = S uw - u (W*w) - w (W*u) + W*(uw)."""
    periodic = u.grid.periodic
    if u.grid.dim == 1 and periodic:
        W = scheme.torus_weights
        corr = lambda f: np.real(np.fft.ifft(np.fft.fft(f) * np.conj(np.fft.fft(W))))
        S = float(np.sum(W))
        vu, vw = np.asarray(u.values), np.asarray(w.values)
        acc = np.zeros(u.grid.shape)
        for c in range(u.m):
            a, b = vu[..., c], vw[..., c]
            acc += 0.5 * (S * a * b - a * corr(b) - b * corr(a) + corr(a * b))
        return acc, 0.0
    if u.grid.dim == 2 and periodic:
        W = scheme.torus_weights
        Fw = np.conj(np.fft.fft2(W))
        corr = lambda f: np.real(np.fft.ifft2(np.fft.fft2(f) * Fw))
        S = float(np.sum(W))
        vu, vw = np.asarray(u.values), np.asarray(w.values)
        acc = np.zeros(u.grid.shape)
        for c in range(u.m):
            a, b = vu[..., c], vw[..., c]
            acc += 0.5 * (S * a * b - a * corr(b) - b * corr(a) + corr(a * b))
        return acc, 0.0
    # 2-d free space
    W = scheme.plane_weights
    M = W.shape[0] // 2
    Wf = W[::-1, ::-1]
    _, Eu = _extended_plane(u, M)
    _, Ew = _extended_plane(w, M)
    S = float(np.sum(W))
    vu, vw = np.asarray(u.values), np.asarray(w.values)
    acc = np.zeros(u.grid.shape)
    corr = lambda f: fftconvolve(f, Wf, mode="valid")
    for c in range(u.m):
        a, b = vu[..., c], vw[..., c]
        acc += 0.5 * (S * a * b - a * corr(Ew[..., c]) - b * corr(Eu[..., c])
                      + corr(Eu[..., c] * Ew[..., c]))
    est = 0.0
    lu, lw = u.exterior.far_limits(u.m), w.exterior.far_limits(w.m)
    if lu is not None and lw is not None:
        gu, gw = lu(np.array([1.0, 0.0])), lw(np.array([1.0, 0.0]))
        diff = 0.5 * np.sum((vu - gu[None, None, :]) * (vw - gw[None, None, :]), axis=-1)
        acc += scheme.tail_mass * diff
    else:
        est = 2.0 * _far_magnitude(u) * _far_magnitude(w) * scheme.tail_upper
    return acc, est


def bilinear_form_field(u: SampledField, w: SampledField, kernel: KernelSpec):
    """B_K(u, w) at every stored node; nonnegative for u = w."""
    _check_same_discretization(u, w)
    scheme = scheme_for(kernel, u.grid)
    if u.grid.dim == 1 and not u.grid.periodic:
        vals, est = _bilinear_line(u, w, scheme)
    else:
        vals, est = _bilinear_fft(u, w, scheme)
    return vals, est


def bilinear_form(u: SampledField, w: SampledField, kernel: KernelSpec, x) -> float:
    idx = _interior_node_index(u, x)
    vals, _ = bilinear_form_field(u, w, kernel)
    return float(vals[idx])


# -- energy --------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyValue:
    """Order-s energy split into the domain-domain part and the tail that
    couples the domain with its complement; total = interior + tail."""

    interior_part: float
    tail_part: float

    @property
    def total(self) -> float:
        return self.interior_part + self.tail_part


def s_energy(u: SampledField, s: float) -> EnergyValue:
    """Energy of order s: quarter-weighted double sum over interior pairs
    plus half-weighted interior-exterior sum, diagonal handled by the shared
    near-field moment rule."""
    grid = u.grid
    kernel = make_fractional_kernel(grid.dim, s)
    scheme = scheme_for(kernel, grid)
    hvol = grid.h**grid.dim
    if grid.dim == 1 and not grid.periodic:
        w = scheme.line_weights
        J = w.size
        pos, E, chi = _extended_line(u, J, mask_exterior=True)
        _, Efull = _extended_line(u, J)
        n = grid.axis().size
        ci = chi[J : J + n]
        center = Efull[J : J + n]
        g_int = np.zeros(n)
        g_all = np.zeros(n)
        for j in range(1, J + 1):
            for sl in (slice(J + j, J + j + n), slice(J - j, J - j + n)):
                diff_all = np.sum((center - Efull[sl]) ** 2, axis=-1)
                m = chi[sl]
                g_all += w[j - 1] * diff_all
                g_int += w[j - 1] * diff_all * m
        limits = u.exterior.far_limits(u.m)
        tail_closed = 0.0
        if limits is not None:
            for d in (1.0, -1.0):
                g = limits(np.array([d]))
                tail_closed += float(np.sum(
                    scheme.tail_mass * np.sum((center - g) ** 2, axis=-1)[ci]))
        interior = 0.25 * hvol * float(np.sum(g_int[ci]))
        tail = 0.5 * hvol * (float(np.sum((g_all - g_int)[ci])) + tail_closed)
        return EnergyValue(interior, tail)
    if grid.dim == 1 and grid.periodic:
        # principal-window pairs count as interior, image pairs as tail
        N = grid.axis().size
        base = _line_base_for_periodic(scheme)
        w_per = scheme.line_weights
        v = np.asarray(u.values)
        g_int = np.zeros(N)
        g_img = np.zeros(N)
        for j in range(1, w_per.size + 1):
            diff = np.sum((v - np.roll(v, -j, axis=0)) ** 2, axis=-1)
            diffm = np.sum((v - np.roll(v, j, axis=0)) ** 2, axis=-1)
            both = diff + diffm
            g_int += base[j - 1] * both
            g_img += (w_per[j - 1] - base[j - 1]) * both
        return EnergyValue(0.25 * hvol * float(np.sum(g_int)),
                           0.5 * hvol * float(np.sum(g_img)))
    if grid.dim == 2 and not grid.periodic:
        W = scheme.plane_weights
        M = W.shape[0] // 2
        Wf = W[::-1, ::-1]
        _, Efull = _extended_plane(u, M)
        _, Emask, chi_ext = _extended_plane(u, M, mask_exterior=True)
        n = grid.axis().size
        chi_grid = chi_ext[M : M + n, M : M + n]
        v = np.asarray(u.values)
        S = float(np.sum(W))
        g_all = np.zeros(grid.shape)
        g_int = np.zeros(grid.shape)
        corr = lambda f: fftconvolve(f, Wf, mode="valid")
        chi_f = chi_ext.astype(float)
        for c in range(u.m):
            a = v[..., c]
            E = Efull[..., c]
            g_all += S * a * a - 2.0 * a * corr(E) + corr(E * E)
            g_int += (corr(chi_f) * a * a - 2.0 * a * corr(E * chi_f)
                      + corr(E * E * chi_f))
        limits = u.exterior.far_limits(u.m)
        tail_closed = 0.0
        if limits is not None:
            g = limits(np.array([1.0, 0.0]))
            tail_closed = float(np.sum(
                scheme.tail_mass * np.sum((v - g) ** 2, axis=-1)[chi_grid]))
        interior = 0.25 * hvol * float(np.sum(g_int[chi_grid]))
        tail = 0.5 * hvol * (float(np.sum((g_all - g_int)[chi_grid])) + tail_closed)
        return EnergyValue(interior, max(tail, 0.0))
    raise DomainError("s_energy supports 1-d grids and free-space 2-d grids")


def _line_base_for_periodic(scheme: QuadratureScheme) -> np.ndarray:
    from .quadrature import _Radial1D, _line_base_weights, _near_shell_count

    grid = scheme.grid
    N = int(round(grid.period / grid.h))
    J = N // 2
    q = max(1, min(6, J // 4))
    return _line_base_weights(_Radial1D(scheme.kernel), grid.h, J, q)


# -- spectral oracle -----------------------------------------------------------


def spectral_apply(u: SampledField, s: float) -> SampledField:
    """(-Delta)^s on a periodic field through the Fourier multiplier
    |xi|^(2s).  Exact on trigonometric polynomials; serves as the independent
    oracle for the real-space quadrature."""
    grid = u.grid
    if not grid.periodic:
        raise DomainError("spectral_apply needs a periodic field")
    scale = 2.0 * np.pi / grid.period
    v = np.asarray(u.values)
    out = np.empty_like(v)
    if grid.dim == 1:
        k = np.fft.fftfreq(grid.shape[0], d=1.0 / grid.shape[0]) * scale
        mult = np.abs(k) ** (2.0 * s)
        for c in range(u.m):
            out[..., c] = np.real(np.fft.ifft(mult * np.fft.fft(v[..., c])))
    elif grid.dim == 2:
        n = grid.shape[0]
        k = np.fft.fftfreq(n, d=1.0 / n) * scale
        K2 = k[:, None] ** 2 + k[None, :] ** 2
        mult = K2**s
        for c in range(u.m):
            out[..., c] = np.real(np.fft.ifft2(mult * np.fft.fft2(v[..., c])))
    else:
        raise DomainError("spectral_apply supports dimensions 1 and 2")
    return u.with_values(out)


# -- dense assembly -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AssembledOperator:
    """Dense interior form of -L_K with exterior data folded into a load:

        (-L u)(interior nodes) = A @ u_interior - load

    A is symmetric positive definite (M-matrix: positive diagonal, negative
    off-diagonal, strictly dominant through the tail mass).  interior_flat
    indexes the interior nodes in the flattened grid; hvol is the node
    volume, used by the quadratic energy form."""

    grid: GridSpec
    kernel: KernelSpec
    A: np.ndarray
    load: np.ndarray
    interior_flat: np.ndarray
    hvol: float
    truncation_estimate: float

    def apply_neg_lk(self, u_int: np.ndarray) -> np.ndarray:
        return self.A @ u_int - self.load

    def energy_quadratic(self, u_int: np.ndarray) -> float:
        """(1/2) <u, -L u> h^n up to a u-independent constant; tracks the
        order-s energy along flows on a fixed grid."""
        return self.hvol * (0.5 * float(np.sum(u_int * (self.A @ u_int)))
                            - float(np.sum(u_int * self.load)))


_DENSE_CAP = 6000


def assemble_dirichlet(kernel: KernelSpec, grid: GridSpec, rule: ExteriorRule,
                       m: int = 1) -> AssembledOperator:
    """Assemble -L_K on the interior nodes of the grid ball with the given
    exterior rule supplying all data outside."""
    if grid.periodic:
        raise DomainError("Dirichlet assembly needs a free-space grid")
    scheme = scheme_for(kernel, grid)
    data = SampledField(grid, np.zeros((*grid.shape, m)), rule)
    if grid.dim == 1:
        w = scheme.line_weights
        J = w.size
        pos, Eg, chi = _extended_line(data, J, mask_exterior=True)
        # rule values in the non-interior positions (collar nodes included)
        vals = np.zeros((pos.size, m))
        outside = ~chi
        vals[outside] = rule.values(pos[outside, None], m)
        ax = grid.axis()
        n = ax.size
        chi_grid = chi[J : J + n]
        interior_flat = np.nonzero(chi_grid)[0]
        n_int = interior_flat.size
        if n_int > _DENSE_CAP:
            raise DomainError(f"dense assembly capped at {_DENSE_CAP} unknowns")
        limits = rule.far_limits(m)
        diag = float(np.sum(w)) * 2.0 + (2.0 * scheme.tail_mass if limits else 0.0)
        A = np.zeros((n_int, n_int))
        np.fill_diagonal(A, diag)
        g0 = interior_flat[0]
        for j in range(1, min(J, n_int - 1) + 1):
            ii = np.arange(n_int - j)
            A[ii, ii + j] -= w[j - 1]
            A[ii + j, ii] -= w[j - 1]
        load = np.zeros((n_int, m))
        for j in range(1, J + 1):
            lo = J + g0 - j
            load += w[j - 1] * (vals[lo : lo + n_int] + vals[J + g0 + j : J + g0 + j + n_int])
        est = 0.0
        if limits is not None:
            load += scheme.tail_mass * (limits(np.array([1.0]))
                                        + limits(np.array([-1.0])))[None, :]
        else:
            est = 4.0 * _far_magnitude(data) * scheme.tail_upper
        return AssembledOperator(grid, kernel, A, load, interior_flat,
                                 grid.h, est)
    # 2-d
    W = scheme.plane_weights
    M = W.shape[0] // 2
    pts, Eg, chi = _extended_plane(data, M, mask_exterior=True)
    full = chi.shape[0]
    n = grid.axis().size
    vals = np.zeros((full, full, m))
    outside = ~chi
    vals[outside] = rule.values(pts[outside], m)
    chi_grid = chi[M : M + n, M : M + n]
    interior_flat = np.nonzero(chi_grid.ravel())[0]
    n_int = interior_flat.size
    if n_int > _DENSE_CAP:
        raise DomainError(f"dense assembly capped at {_DENSE_CAP} unknowns")
    ij = np.argwhere(chi_grid)
    di = ij[:, 0][None, :] - ij[:, 0][:, None] + M
    dj = ij[:, 1][None, :] - ij[:, 1][:, None] + M
    limits = rule.far_limits(m)
    S = float(np.sum(W))
    A = -W[di, dj]
    np.fill_diagonal(A, S + (scheme.tail_mass if limits else 0.0))
    Wf = W[::-1, ::-1]
    load_grid = np.stack(
        [fftconvolve(vals[..., c], Wf, mode="valid") for c in range(m)], axis=-1)
    load = load_grid.reshape(-1, m)[interior_flat]
    est = 0.0
    if limits is not None:
        load += scheme.tail_mass * limits(np.array([1.0, 0.0]))[None, :]
    else:
        est = 4.0 * _far_magnitude(data) * scheme.tail_upper
    return AssembledOperator(grid, kernel, A, load, interior_flat,
                             grid.h**2, est)
