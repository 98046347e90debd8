"""Mode functions, horizon wave packets, and Klein-Gordon pairings.

Everything here lives on the initial slice x0 = 0: a solution of the wave
equation is represented by its Cauchy data (value, time derivative) as
functions of the spatial polar coordinates, because the Klein-Gordon
pairing

    <u, v> = i * integral [ (ubar v_t - ubar_t v)
                            + g0r (ubar v_r - ubar_r v)
                            + g0f (ubar v_phi - ubar_phi v) ] rho drho dphi

is time-slice independent.  In the polar chart g0r = A/rho and
g0f = B/rho^2; in the shifted chart rt = rho - rho0(phi) built around a
horizon curve, g0r = A/rho - (B/rho^2) rho0'(phi) and the measure is
(rho0(phi) + rt) drt dphi.

The mode family is indexed by k = (eta, m) with a regularization
parameter a > 0:

    f_k(+) at x0=0:  gamma_k exp(i (rho eta + m phi)),
    d/dt f_k(+)   =  i lambda(-)(k) * value,
    gamma_k = 1 / (2 pi sqrt(2) sqrt(rho) (eta^2 + a^2)^(1/4)),
    lambda(-)(k) = -(A/rho) eta - B m / rho^2 - sqrt(eta^2 + a^2),

and f_k(-) = conjugate(f_(-k)(+)).  Wave packets are supported outside a
horizon radius, carry an endpoint factor t^eps, an exponential cutoff
exp(-a t), and a log phase exp(i nu log t) with rate nu > 0; their time
derivative is i beta * value with beta chosen so the KG norm collapses to
a pure Gamma integral.

Angular integrals are done on uniform grids (exact for trigonometric
polynomials, spectrally accurate in general); radial integrals use
tanh-sinh clustering at the horizon edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from scipy.integrate import quad

from .flowfield import VelocityField
from .numerics import (
    DEFAULT_SPEC,
    QuadratureSpec,
    complex_gamma,
    exp_tail_cutoff,
    fourier_coefficients,
    tanh_sinh_complex,
)

TWO_PI = 2.0 * math.pi


class ChartError(ValueError):
    """Cauchy data passed to a pairing live in incompatible charts."""


@dataclass(frozen=True)
class ModeIndex:
    """Mode label k = (eta, m) plus the frequency regularization a > 0."""

    eta: float
    m: int
    a: float

    def __post_init__(self):
        if self.a <= 0.0:
            raise ValueError("regularization parameter a must be positive")


@dataclass(frozen=True)
class TildeChart:
    """Radial coordinate rt = rho - rho0(phi) around a closed curve rho0.

    ``windows`` holds per-arc transport-coefficient records (see the
    geometry module) for charts built around horizon segments.
    """

    rho0: Callable
    drho0: Callable
    ang_bw: int = 64
    windows: tuple = ()
    curve: object = None


@dataclass
class CauchyData:
    """Initial data (value, d/dt) of a solution, with evaluation metadata.

    The four callables accept broadcastable arrays (r, phi).  When
    ``offset`` is False, r is the chart radial coordinate (rho in the
    polar chart, rt in a tilde chart).  When ``offset`` is True the
    callables expect the exact distance t = r - edge above the horizon
    edge instead; quadrature nodes cluster at t = 0 far below floating-
    point resolution of r itself, so edge-supported data must consume t
    directly to avoid cancellation.  ``decay`` is the exponential decay
    rate beyond the edge, if any; d_r differentiates along the radial
    coordinate (equivalently along t).
    """

    value: Callable
    dt: Callable
    d_r: Callable
    d_phi: Callable
    chart: TildeChart | None = None  # None = polar chart
    edge: float | None = None
    offset: bool = False
    decay: float | None = None
    r_lo: float = 0.0
    r_hi: float = math.inf
    ang_bw: int = 0


# ---------------------------------------------------------------------------
# window profiles
# ---------------------------------------------------------------------------

def _wrap_angle(x):
    return (x + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True)
class SmoothBump:
    """C-infinity bump exp(1 - 1/(1-u^2)) on |u| < 1, u = (phi-center)/halfwidth."""

    center: float
    halfwidth: float
    amplitude: float = 1.0

    def __call__(self, phi):
        u = _wrap_angle(np.asarray(phi, dtype=float) - self.center) / self.halfwidth
        out = np.zeros_like(u)
        inside = np.abs(u) < 1.0
        ui = u[inside]
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - ui * ui))
        return out

    def deriv(self, phi):
        u = _wrap_angle(np.asarray(phi, dtype=float) - self.center) / self.halfwidth
        out = np.zeros_like(u)
        inside = np.abs(u) < 0.9999999
        ui = u[inside]
        w = 1.0 - ui * ui
        out[inside] = (self.amplitude * np.exp(1.0 - 1.0 / w)
                       * (-2.0 * ui / (w * w)) / self.halfwidth)
        return out

    @property
    def support(self) -> tuple[float, float]:
        return (self.center - self.halfwidth, self.center + self.halfwidth)

    def norm_sq(self) -> float:
        """integral |c|^2 dphi over one period."""
        lo, hi = self.support
        val, _ = quad(lambda p: float(self(p)) ** 2, lo, hi, limit=100)
        return val


def angular_tail_bandwidth(profile: Callable, rel_tail: float = 1e-12) -> int:
    """Smallest M with all |gamma_m|, |m| > M, below rel_tail * max."""
    n = 4096
    gam = fourier_coefficients(profile, n // 4, n_grid=n)
    mags = np.abs(gam)
    top = mags.max()
    if top == 0.0:
        return 0
    m_axis = np.abs(np.arange(-(n // 4), n // 4 + 1))
    big = mags > rel_tail * top
    return int(m_axis[big].max()) if np.any(big) else 0


class ChebAntiderivative:
    """Spectrally accurate antiderivative of a smooth function on [lo, hi].

    Stores a Chebyshev interpolant of ``func`` and integrates it term by
    term; ``deriv`` re-evaluates the interpolant itself.
    """

    def __init__(self, func, lo: float, hi: float, base_point: float,
                 degree: int = 128, check_tol: float = 1e-10):
        self.lo, self.hi = lo, hi
        self._mid = 0.5 * (lo + hi)
        self._half = 0.5 * (hi - lo)
        f_mapped = lambda u: func(self._mid + self._half * u)
        coef = _cheb.chebinterpolate(f_mapped, degree)
        probe = np.linspace(-1.0, 1.0, 513)
        err = np.max(np.abs(_cheb.chebval(probe, coef) - f_mapped(probe)))
        scale = max(1.0, np.max(np.abs(f_mapped(probe))))
        if err > check_tol * scale:
            raise ValueError(
                f"Chebyshev interpolation error {err:.2e} too large; "
                "integrand not smooth enough on the window")
        self._coef = coef
        self._icoef = _cheb.chebint(coef) * self._half
        self._offset = self._raw(base_point)

    def _raw(self, phi):
        u = (np.asarray(phi, dtype=float) - self._mid) / self._half
        return _cheb.chebval(u, self._icoef)

    def __call__(self, phi):
        return self._raw(phi) - self._offset

    def deriv(self, phi):
        u = (np.asarray(phi, dtype=float) - self._mid) / self._half
        return _cheb.chebval(u, self._coef)


# ---------------------------------------------------------------------------
# packet specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimplePacket:
    """Horizon packet of a constant flow: single angular harmonic m.

    The log-phase rate is nu = xi0 * |A| with xi0 = eta0 - B m / A^2,
    required positive.
    """

    field: VelocityField
    eta0: float
    m: int
    eps: float
    a: float

    def __post_init__(self):
        if self.eps <= 0.0 or self.a <= 0.0:
            raise ValueError("need eps > 0 and a > 0")
        if self.xi0 <= 0.0:
            raise ValueError("need xi0 = eta0 - B m / A^2 > 0")

    @property
    def abs_a(self) -> float:
        return abs(self.field.drain)

    @property
    def xi0(self) -> float:
        return self.eta0 - self.field.circulation * self.m / self.field.drain**2

    @property
    def nu(self) -> float:
        return self.xi0 * self.abs_a


@dataclass(frozen=True)
class TangentWindow:
    """One angular window (phi_lo, phi_hi) with its profile and phase rate."""

    phi_lo: float
    phi_hi: float
    alpha: float
    profile: SmoothBump
    d0: float = 0.0
    phi0: float | None = None  # default: window midpoint

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError("window rate alpha must be positive")
        lo, hi = self.profile.support
        if lo < self.phi_lo or hi > self.phi_hi:
            raise ValueError("profile support must lie inside the window")

    @property
    def base_point(self) -> float:
        return 0.5 * (self.phi_lo + self.phi_hi) if self.phi0 is None else self.phi0


@dataclass(frozen=True)
class TangentPacket:
    """Sum of windowed horizon packets for a flow with angular circulation."""

    field: VelocityField
    eta0: float
    eps: float
    a: float
    windows: tuple[TangentWindow, ...]

    def __post_init__(self):
        if self.eps <= 0.0 or self.a <= 0.0:
            raise ValueError("need eps > 0 and a > 0")
        # circulation must not vanish on any closed window
        for w in self.windows:
            grid = np.linspace(w.phi_lo, w.phi_hi, 512)
            _, b = self.field.strengths(np.full_like(grid, self.abs_a), grid)
            if np.min(np.abs(b)) < 1e-12:
                raise ValueError(
                    f"circulation vanishes on window [{w.phi_lo:.3f}, {w.phi_hi:.3f}]")
        # disjoint profile supports so cross terms vanish identically
        sup = sorted(w.profile.support for w in self.windows)
        for (l1, h1), (l2, h2) in zip(sup, sup[1:]):
            if h1 > l2:
                raise ValueError("window profiles overlap")
        for w in self.windows:
            if self.eta0 * self.abs_a + w.alpha <= 0.0:
                raise ValueError("need eta0*|A| + alpha > 0 on every window")

    @property
    def abs_a(self) -> float:
        return abs(self.field.drain)

    def rate(self, w: TangentWindow) -> float:
        """Log-phase rate nu_r = eta0 |A| + alpha_r of one window."""
        return self.eta0 * self.abs_a + w.alpha


@dataclass(frozen=True)
class CornerSegmentSpec:
    """Angular window and phase data of one horizon-segment packet."""

    phi_lo: float
    phi_hi: float
    alpha: float
    profile: SmoothBump
    d0: float = 0.0
    phi0: float | None = None

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError("segment rate alpha must be positive")
        lo, hi = self.profile.support
        if lo < self.phi_lo or hi > self.phi_hi:
            raise ValueError("profile support must lie inside the window")

    @property
    def base_point(self) -> float:
        return 0.5 * (self.phi_lo + self.phi_hi) if self.phi0 is None else self.phi0


@dataclass(frozen=True)
class CornerPacket:
    """Two-segment packet in the tilde chart of a cornered horizon."""

    field: VelocityField
    eta0: float
    eps: float
    a: float
    segments: tuple[CornerSegmentSpec, ...]

    def __post_init__(self):
        if self.eps <= 0.0 or self.a <= 0.0:
            raise ValueError("need eps > 0 and a > 0")


# ---------------------------------------------------------------------------
# mode Cauchy data
# ---------------------------------------------------------------------------

def mode_initial_data(k: ModeIndex, fld: VelocityField,
                      chart: TildeChart | None = None,
                      branch: str = "+") -> CauchyData:
    """Cauchy data of the mode f_k(+) (branch '+') or f_k(-) (branch '-').

    The '-' family is the conjugate of the reversed-index '+' family, so
    its value coincides with the '+' value and only the time-derivative
    multiplier flips the sign of its frequency part.
    """
    if branch not in ("+", "-"):
        raise ValueError("branch must be '+' or '-'")
    eta, m, a = k.eta, k.m, k.a
    croot = (eta * eta + a * a) ** 0.25
    freq = math.sqrt(eta * eta + a * a)
    norm = 1.0 / (TWO_PI * math.sqrt(2.0) * croot)
    sgn = 1.0 if branch == "+" else -1.0

    if chart is None:
        def value(r, phi):
            r = np.asarray(r, dtype=float)
            return norm / np.sqrt(r) * np.exp(1j * (r * eta + m * phi))

        def d_r(r, phi):
            return (1j * eta - 0.5 / np.asarray(r, dtype=float)) * value(r, phi)

        def d_phi(r, phi):
            return 1j * m * value(r, phi)

        def dt(r, phi):
            r = np.asarray(r, dtype=float)
            A, B = fld.strengths(r, phi)
            lam = -(A / r) * eta - (B / r**2) * m - sgn * freq
            return 1j * lam * value(r, phi)

        bw = abs(m) + fld.angular_bandwidth
        return CauchyData(value, dt, d_r, d_phi, chart=None, edge=None,
                          decay=None, ang_bw=bw)

    rho0, drho0 = chart.rho0, chart.drho0

    def value_t(rt, phi):
        rho = rho0(phi) + np.asarray(rt, dtype=float)
        return norm / np.sqrt(rho) * np.exp(1j * (np.asarray(rt) * eta + m * phi))

    def d_r_t(rt, phi):
        rho = rho0(phi) + np.asarray(rt, dtype=float)
        return (1j * eta - 0.5 / rho) * value_t(rt, phi)

    def d_phi_t(rt, phi):
        rho = rho0(phi) + np.asarray(rt, dtype=float)
        return (1j * m - 0.5 * drho0(phi) / rho) * value_t(rt, phi)

    def dt_t(rt, phi):
        rt = np.asarray(rt, dtype=float)
        rho = rho0(phi) + rt
        A, B = fld.strengths(rho, phi)
        g0r = A / rho - (B / rho**2) * drho0(phi)
        lam = -g0r * eta - (B / rho**2) * m - sgn * freq
        return 1j * lam * value_t(rt, phi)

    bw = abs(m) + fld.angular_bandwidth + chart.ang_bw
    return CauchyData(value_t, dt_t, d_r_t, d_phi_t, chart=chart, edge=None,
                      decay=None, ang_bw=bw)


def conjugate_mode_data(k: ModeIndex, fld: VelocityField,
                        chart: TildeChart | None = None) -> CauchyData:
    """Data of f_(-k)(-) = conjugate(f_k(+)), used in minus-coefficient pairings."""
    neg = ModeIndex(-k.eta, -k.m, k.a)
    return mode_initial_data(neg, fld, chart=chart, branch="-")


# ---------------------------------------------------------------------------
# packet Cauchy data
# ---------------------------------------------------------------------------

def _log_power(t, w):
    """t^w for t > 0 arrays (w complex), zero where t <= 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(np.shape(t), dtype=complex)
    pos = t > 0.0
    out[pos] = np.exp(w * np.log(t[pos]))
    return out


def packet_initial_data(spec, chart: TildeChart | None = None) -> CauchyData:
    """Cauchy data of a horizon wave packet described by ``spec``."""
    if isinstance(spec, SimplePacket):
        return _simple_packet_data(spec)
    if isinstance(spec, TangentPacket):
        return _tangent_packet_data(spec)
    if isinstance(spec, CornerPacket):
        if chart is None:
            raise ValueError("corner packets need the horizon tilde chart")
        return _corner_packet_data(spec, chart)
    raise TypeError(f"unknown packet spec {type(spec)!r}")


def _simple_packet_data(spec: SimplePacket) -> CauchyData:
    absA, nu, eps, a, m = spec.abs_a, spec.nu, spec.eps, spec.a, spec.m
    B = spec.field.circulation
    w_edge = complex(eps, nu)

    # callables take the exact horizon offset t = rho - |A|
    def value(t, phi):
        t = np.asarray(t, dtype=float)
        rad = _log_power(t, w_edge) * np.exp(-a * np.maximum(t, 0.0)) / np.sqrt(absA + t)
        return rad * np.exp(1j * m * np.asarray(phi, dtype=float))

    def d_r(t, phi):
        t = np.asarray(t, dtype=float)
        fac = np.zeros(np.shape(t), dtype=complex)
        pos = t > 0.0
        fac[pos] = (eps + 1j * nu) / t[pos] - a - 0.5 / (absA + t[pos])
        return fac * value(t, phi)

    def d_phi(t, phi):
        return 1j * m * value(t, phi)

    def dt(t, phi):
        r = absA + np.asarray(t, dtype=float)
        beta = -nu / r - B * m / r**2
        return 1j * beta * value(t, phi)

    return CauchyData(value, dt, d_r, d_phi, chart=None, edge=absA,
                      offset=True, decay=a, ang_bw=abs(m))


def _tangent_packet_data(spec: TangentPacket) -> CauchyData:
    absA, eps, a = spec.abs_a, spec.eps, spec.a
    Bfun = spec.field.circulation
    pieces = []
    bw = 0
    for w in spec.windows:
        nu = spec.rate(w)
        phase = ChebAntiderivative(
            lambda p, _f=Bfun: absA / np.asarray(_f(p), dtype=float),
            w.phi_lo, w.phi_hi, w.base_point)
        # S_r(phi) = -alpha * |A| * integral 1/B + d0 ; S_r' = -alpha |A| / B
        pieces.append((w, nu, phase))
        ang = lambda p, _w=w, _ph=phase: _w.profile(p) * np.exp(
            1j * (-_w.alpha * _ph(p) + _w.d0))
        bw = max(bw, angular_tail_bandwidth(ang))

    def _terms(t, phi):
        t = np.asarray(t, dtype=float)
        phi = np.asarray(phi, dtype=float)
        tb, pb = np.broadcast_arrays(t, phi)
        rb = absA + tb
        pos = tb > 0.0
        out = []
        for w, nu, phase in pieces:
            cv = w.profile(pb)
            mask = pos & (cv != 0.0)
            term = np.zeros(np.shape(tb), dtype=complex)
            if np.any(mask):
                s_ang = -w.alpha * phase(pb[mask]) + w.d0
                term[mask] = (cv[mask] * np.exp(1j * s_ang)
                              * np.exp((eps + 1j * nu) * np.log(tb[mask]))
                              * np.exp(-a * tb[mask]) / np.sqrt(rb[mask]))
            out.append((term, mask, w, nu, phase))
        return rb, tb, pb, out

    def value(t, phi):
        _, _, _, out = _terms(t, phi)
        return sum(term for term, *_ in out)

    def d_r(t, phi):
        rb, tb, pb, out = _terms(t, phi)
        tot = np.zeros(np.shape(tb), dtype=complex)
        for term, mask, w, nu, phase in out:
            fac = np.zeros_like(tot)
            fac[mask] = (eps + 1j * nu) / tb[mask] - a - 0.5 / rb[mask]
            tot += fac * term
        return tot

    def d_phi(t, phi):
        rb, tb, pb, out = _terms(t, phi)
        tot = np.zeros(np.shape(tb), dtype=complex)
        for term, mask, w, nu, phase in out:
            if not np.any(mask):
                continue
            b = np.asarray(Bfun(pb[mask]), dtype=float)
            s_prime = -w.alpha * absA / b
            # c'/c piece evaluated as c' * (term / c); term already carries c
            cv = w.profile(pb[mask])
            dcv = w.profile.deriv(pb[mask])
            grad = np.zeros_like(tot)
            grad[mask] = dcv / cv + 1j * s_prime
            tot += grad * term
        return tot

    def dt(t, phi):
        rb, tb, pb, out = _terms(t, phi)
        tot = np.zeros(np.shape(tb), dtype=complex)
        for term, mask, w, nu, phase in out:
            beta = np.zeros_like(tot)
            beta[mask] = -nu / rb[mask] + w.alpha * absA / rb[mask] ** 2
            tot += 1j * beta * term
        return tot

    return CauchyData(value, dt, d_r, d_phi, chart=None, edge=absA,
                      offset=True, decay=a, ang_bw=bw)


def _corner_packet_data(spec: CornerPacket, chart) -> CauchyData:
    """Two-segment packet in the tilde chart of a cornered horizon.

    ``chart`` must provide rho0/drho0 and, per geodesic window, transport
    coefficients b1(phi), b2(phi) of the near-horizon phase equation
    rt S_rt + b1 eta0 + b2 S_phi = 0, so the angular phase is
    S_ang(phi) = -integral (alpha + b1 eta0)/b2 + d0.
    """
    eps, a, eta0 = spec.eps, spec.a, spec.eta0
    fld = spec.field
    rho0, drho0 = chart.rho0, chart.drho0
    pieces = []
    bw = chart.ang_bw
    for seg, win in zip(spec.segments, chart.windows):
        b1, b2 = win.b1, win.b2
        integrand = lambda p, _b1=b1, _b2=b2, _al=seg.alpha: (
            (_al + _b1(p) * eta0) / _b2(p))
        phase = ChebAntiderivative(integrand, seg.phi_lo, seg.phi_hi,
                                   seg.base_point)
        pieces.append((seg, phase))
        ang = lambda p, _s=seg, _ph=phase: _s.profile(p) * np.exp(
            1j * (-_ph(p) + _s.d0))
        bw = max(bw, angular_tail_bandwidth(ang) + chart.ang_bw)

    def _terms(rt, phi):
        rt = np.asarray(rt, dtype=float)
        phi = np.asarray(phi, dtype=float)
        tb, pb = np.broadcast_arrays(rt, phi)
        pos = tb > 0.0
        out = []
        for seg, phase in pieces:
            cv = seg.profile(pb)
            mask = pos & (cv != 0.0)
            term = np.zeros(np.shape(tb), dtype=complex)
            if np.any(mask):
                rho = rho0(pb[mask]) + tb[mask]
                s_ang = -phase(pb[mask]) + seg.d0
                term[mask] = (cv[mask] * np.exp(1j * s_ang)
                              * np.exp((eps + 1j * seg.alpha) * np.log(tb[mask]))
                              * np.exp(-a * tb[mask]) / np.sqrt(rho))
            out.append((term, mask, seg, phase))
        return tb, pb, out

    def value(rt, phi):
        _, _, out = _terms(rt, phi)
        return sum(term for term, *_ in out)

    def d_r(rt, phi):
        tb, pb, out = _terms(rt, phi)
        tot = np.zeros(np.shape(tb), dtype=complex)
        for term, mask, seg, phase in out:
            if not np.any(mask):
                continue
            rho = rho0(pb[mask]) + tb[mask]
            fac = np.zeros_like(tot)
            fac[mask] = (eps + 1j * seg.alpha) / tb[mask] - a - 0.5 / rho
            tot += fac * term
        return tot

    def d_phi(rt, phi):
        tb, pb, out = _terms(rt, phi)
        tot = np.zeros(np.shape(tb), dtype=complex)
        for term, mask, seg, phase in out:
            if not np.any(mask):
                continue
            rho = rho0(pb[mask]) + tb[mask]
            cv = seg.profile(pb[mask])
            dcv = seg.profile.deriv(pb[mask])
            s_prime = -phase.deriv(pb[mask])
            grad = np.zeros_like(tot)
            grad[mask] = dcv / cv + 1j * s_prime - 0.5 * drho0(pb[mask]) / rho
            tot += grad * term
        return tot

    def dt(rt, phi):
        tb, pb, out = _terms(rt, phi)
        tot = np.zeros(np.shape(tb), dtype=complex)
        for term, mask, seg, phase in out:
            if not np.any(mask):
                continue
            rho = rho0(pb[mask]) + tb[mask]
            A, B = fld.strengths(rho, pb[mask])
            kap = A / rho - (B / rho**2) * drho0(pb[mask])
            s_prime = -phase.deriv(pb[mask])
            beta = np.zeros_like(tot)
            beta[mask] = (-kap * seg.alpha / tb[mask]
                          - (B / rho**2) * s_prime
                          - seg.alpha / tb[mask])
            tot += 1j * beta * term
        return tot

    return CauchyData(value, dt, d_r, d_phi, chart=chart, edge=0.0,
                      offset=True, decay=a, ang_bw=bw)


# ---------------------------------------------------------------------------
# Klein-Gordon pairing
# ---------------------------------------------------------------------------

def _next_pow2(n: int) -> int:
    return 1 << max(6, (n - 1).bit_length())


def kg_inner_product(u: CauchyData, v: CauchyData, fld: VelocityField,
                     spec: QuadratureSpec | None = None,
                     n_ang: int | None = None) -> complex:
    """<u, v> on the initial slice.

    The angular integral runs on a uniform grid sized from the operands'
    angular bandwidths (exact for trigonometric polynomials); the radial
    integral clusters tanh-sinh nodes at a horizon edge when one is
    present, and falls back to adaptive Gauss-Kronrod otherwise.
    """
    spec = spec or QuadratureSpec(rel_tol=1e-9, abs_tol=1e-14, max_levels=11)
    if (u.chart is None) != (v.chart is None) or (
            u.chart is not None and u.chart is not v.chart):
        raise ChartError("operands live in different charts")
    chart = u.chart
    edge = u.edge if u.edge is not None else v.edge
    for d in (u, v):
        if d.offset and d.edge != edge:
            raise ChartError("offset data with mismatched horizon edges")
    n = n_ang or _next_pow2(2 * (u.ang_bw + v.ang_bw) + 16)
    n = min(n, 4096)
    phi = np.arange(n) * (TWO_PI / n)

    def bracket_row(tvec, base):
        # tvec: exact offsets above `base`; rdata per-datum coordinate
        tcol = np.asarray(tvec, dtype=float)[:, None]
        prow = phi[None, :]
        rcol = base + tcol
        if chart is None:
            rho = np.broadcast_to(rcol, (tcol.shape[0], n))
        else:
            rho = chart.rho0(prow) + rcol
        A, B = fld.strengths(rho, prow)
        if chart is None:
            g0r = A / rho
        else:
            g0r = A / rho - (B / rho**2) * chart.drho0(prow)
        g0f = B / rho**2

        def ev(d, which):
            arg = tcol if d.offset else rcol
            return getattr(d, which)(arg, prow)

        uv = ev(u, "value")
        vv = ev(v, "value")
        br = (np.conj(uv) * ev(v, "dt") - np.conj(ev(u, "dt")) * vv
              + g0r * (np.conj(uv) * ev(v, "d_r") - np.conj(ev(u, "d_r")) * vv)
              + g0f * (np.conj(uv) * ev(v, "d_phi") - np.conj(ev(u, "d_phi")) * vv))
        return TWO_PI * np.mean(br * rho, axis=1)

    if edge is not None:
        decay = (u.decay or 0.0) + (v.decay or 0.0)
        if decay <= 0.0:
            raise ValueError("edge integrals need an exponential cutoff")
        T = exp_tail_cutoff(decay, 1.0, spec)
        if math.isfinite(u.r_hi):
            T = min(T, max(u.r_hi - edge, 1e-6))

        val, _ = tanh_sinh_complex(lambda tv: bracket_row(tv, edge), 0.0, T, spec)
        return 1j * val

    # no singular edge: integrate over the finite support window
    lo = max(u.r_lo, v.r_lo)
    hi = min(u.r_hi, v.r_hi)
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise ValueError("need finite radial support for edge-free data")
    val, _ = tanh_sinh_complex(lambda rv: bracket_row(rv - lo, lo), lo, hi, spec)
    return 1j * val


# ---------------------------------------------------------------------------
# closed-form KG norms
# ---------------------------------------------------------------------------

def kg_norm_simple(spec: SimplePacket) -> float:
    """<C, C> of a simple packet: 4 pi Gamma(2 eps) nu / (2a)^(2 eps).

    Exact for every a > 0: in the norm bracket the advective pieces cancel
    against the time-derivative data, leaving 2 nu/(rho - |A|) times
    |C|^2, whose radial integral is a pure Gamma integral.
    """
    g = complex_gamma(2.0 * spec.eps).real
    return 4.0 * math.pi * g * spec.nu / (2.0 * spec.a) ** (2.0 * spec.eps)


def kg_norm_tangent(spec: TangentPacket) -> float:
    """<C, C> of a windowed packet: sum_r 2 Gamma(2 eps) nu_r ||c_r||^2 / (2a)^(2 eps).

    ||c_r||^2 = integral |c_r|^2 dphi.  Exact for real-valued window
    profiles; cross-window terms vanish because the supports are disjoint.
    """
    g = complex_gamma(2.0 * spec.eps).real
    scale = (2.0 * spec.a) ** (2.0 * spec.eps)
    return sum(2.0 * g * spec.rate(w) * w.profile.norm_sq() for w in spec.windows) / scale


def kg_norm_corner(spec: CornerPacket) -> float:
    """<C, C> of a corner packet: sum_j 2 Gamma(2 eps) alpha_j ||s_j||^2 / (2a)^(2 eps)."""
    g = complex_gamma(2.0 * spec.eps).real
    scale = (2.0 * spec.a) ** (2.0 * spec.eps)
    return sum(2.0 * g * seg.alpha * seg.profile.norm_sq()
               for seg in spec.segments) / scale


# ---------------------------------------------------------------------------
# superpositions (for orthonormality diagnostics)
# ---------------------------------------------------------------------------

def superposed_mode_data(weights, eta_grid, m: int, a: float,
                         fld: VelocityField, branch: str = "+",
                         r_support: tuple[float, float] = (1e-3, 80.0)) -> CauchyData:
    """Discretized superposition  sum_j w(eta_j) f_(eta_j, m) d_eta."""
    eta_grid = np.asarray(eta_grid, dtype=float)
    wts = np.asarray(weights, dtype=float)
    d_eta = eta_grid[1] - eta_grid[0]
    croot = (eta_grid**2 + a * a) ** 0.25
    freq = np.sqrt(eta_grid**2 + a * a)
    coef = wts * d_eta / (TWO_PI * math.sqrt(2.0) * croot)
    sgn = 1.0 if branch == "+" else -1.0

    def _sum(r, phi, extra=None):
        r = np.asarray(r, dtype=float)
        phi = np.asarray(phi, dtype=float)
        rb, pb = np.broadcast_arrays(r, phi)
        E = np.exp(1j * rb[..., None] * eta_grid)  # (..., K)
        if extra is not None:
            E = E * extra(rb[..., None], pb[..., None])
        out = E @ coef
        return out / np.sqrt(rb) * np.exp(1j * m * pb)

    value = lambda r, phi: _sum(r, phi)
    d_r = lambda r, phi: _sum(r, phi, extra=lambda rr, pp: (1j * eta_grid - 0.5 / rr))
    d_phi = lambda r, phi: 1j * m * _sum(r, phi)

    def dt(r, phi):
        def lam(rr, pp):
            A, B = fld.strengths(rr, pp)
            return 1j * (-(A / rr) * eta_grid - (B / rr**2) * m - sgn * freq)
        return _sum(r, phi, extra=lam)

    return CauchyData(value, dt, d_r, d_phi, chart=None, edge=None, decay=None,
                      r_lo=r_support[0], r_hi=r_support[1],
                      ang_bw=abs(m) + fld.angular_bandwidth)
