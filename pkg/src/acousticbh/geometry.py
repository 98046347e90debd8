"""Ergosphere, zero-energy null geodesics, and horizon assembly.

The ergosphere is the curve where the flow reaches sound speed,
(A^2 + B^2)/rho^2 = 1.  Inside it, zero-energy characteristics exist:
setting eta0 = 0 and the conormal (eta_rho, eta_phi) = (1, -s) in the
sound-cone symbol H = 0 gives the slope quadratic for phi-graphs
rho(phi) with s = drho/dphi,

    (B^2/rho^4 - 1/rho^2) s^2 - 2 (A B / rho^3) s + (A^2/rho^2 - 1) = 0,

whose discriminant reduces to (4/rho^2) ((A^2+B^2)/rho^2 - 1): real
slopes exist exactly inside the ergosphere and the two root families
merge on it.  Where the merged double root also matches the ergosphere's
own slope the normal is characteristic; those are the tangency points
from which horizon segments of both families emanate.

Horizon construction for a sink-in-crossflow: the two families traced
from the tangency point with the smaller ergosphere radius dive into the
interior on either side and cross on the far side, bounding a sound trap
whose boundary has a single corner at the crossing.  For flows with
constant |A| and B(phi) or constant B the trap is the circle rho = |A|.

A smooth closed reference curve rho0(phi) ("chart curve") equals chosen
sub-arcs of the two geodesic segments and bridges the gaps with quintic
Hermite connectors; the shifted radial coordinate rt = rho - rho0(phi)
makes rt = 0 characteristic on those windows, where the near-horizon
transport coefficients b1, b2 of

    rt S_rt + b1(phi) eta0 + b2(phi) S_phi = 0

follow from linearizing the quadratic's leading coefficient in rt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .flowfield import (
    ConstantVortex,
    CrossflowSink,
    DomainError,
    TangentVortex,
    VelocityField,
)
from .modes import TildeChart

TWO_PI = 2.0 * math.pi


class GeometryError(RuntimeError):
    """A geometric construction failed (no root, no intersection, ...)."""


# ---------------------------------------------------------------------------
# ergosphere
# ---------------------------------------------------------------------------

def ergosphere_radius(fld: VelocityField, phi: float) -> float:
    """Radius r0(phi) where (A^2 + B^2)/r^2 = 1.

    Closed forms: sqrt(A^2 + B^2) for constant strengths and for angular
    circulation; for the sink-in-crossflow the quadratic in r gives

        r0 = -A0 (sqrt(1 - c^2 cos^2 phi) - c sin phi) / (1 - c^2).

    A residual-checked root bracket backs the closed forms up.
    """
    if isinstance(fld, ConstantVortex):
        return math.hypot(fld.drain, fld.circulation)
    if isinstance(fld, TangentVortex):
        return math.hypot(fld.drain, float(fld.circulation(phi)))
    if isinstance(fld, CrossflowSink):
        c = fld.crossflow
        r = -fld.drain / (1.0 - c * c) * (
            math.sqrt(1.0 - (c * math.cos(phi)) ** 2) - c * math.sin(phi))
        return r
    return _ergosphere_radius_generic(fld, phi)


def _ergosphere_radius_generic(fld: VelocityField, phi: float) -> float:
    def gap(r):
        a, b = fld.strengths(r, phi)
        return float(a * a + b * b - r * r)

    r_hi = 2.0
    for _ in range(60):
        if gap(r_hi) < 0.0:
            break
        r_hi *= 1.6
    else:
        raise GeometryError("no ergosphere: flow supersonic at all radii probed")
    try:
        return brentq(gap, 1e-12, r_hi, xtol=1e-14, rtol=1e-15)
    except ValueError as exc:
        raise GeometryError(f"ergosphere root bracketing failed: {exc}") from exc


def ergosphere_slope(fld: VelocityField, phi: float) -> float:
    """dr0/dphi by implicit differentiation of A^2 + B^2 - r^2 = 0."""
    r = ergosphere_radius(fld, phi)
    a, b = fld.strengths(r, phi)
    da_dr, da_df, db_dr, db_df = fld.partials(r, phi)
    fr = 2.0 * (a * da_dr + b * db_dr - r)
    ff = 2.0 * (a * da_df + b * db_df)
    if abs(fr) < 1e-14:
        raise GeometryError("ergosphere is vertical in the (rho, phi) chart here")
    return float(-ff / fr)


@dataclass(frozen=True)
class ErgosphereCurve:
    """Sampled ergosphere r0(phi) on a uniform angular grid."""

    fld: VelocityField
    phi: np.ndarray
    r0: np.ndarray

    @classmethod
    def build(cls, fld: VelocityField, n: int = 720) -> "ErgosphereCurve":
        phi = np.arange(n) * (TWO_PI / n)
        r0 = np.array([ergosphere_radius(fld, p) for p in phi])
        return cls(fld, phi, r0)

    def speed_residuals(self) -> np.ndarray:
        a, b = self.fld.strengths(self.r0, self.phi)
        return (a * a + b * b) / self.r0**2 - 1.0


# ---------------------------------------------------------------------------
# slope quadratic
# ---------------------------------------------------------------------------

def geodesic_slope_roots(fld: VelocityField, rho: float, phi: float,
                         clip_tol: float = 1e-12):
    """Real roots (s1, s2) of the zero-energy slope quadratic, plus discriminant.

    s1 <= s2 labels family 1 and family 2.  Outside the ergosphere the
    roots are complex and a DomainError is raised; on the ergosphere the
    families merge.  The returned discriminant is the scale-reduced
    (4/rho^2)((A^2+B^2)/rho^2 - 1).
    """
    if rho <= 0.0:
        raise DomainError("rho must be positive")
    a, b = fld.strengths(rho, phi)
    a = float(a)
    b = float(b)
    c2 = b * b / rho**4 - 1.0 / rho**2
    c1 = -2.0 * a * b / rho**3
    c0 = a * a / rho**2 - 1.0
    disc = (4.0 / rho**2) * ((a * a + b * b) / rho**2 - 1.0)
    if disc < -clip_tol:
        raise DomainError("outside ergosphere: no real zero-energy slopes")
    disc_c = max(disc, 0.0)
    if abs(c2) < 1e-14 * max(1.0, abs(c1)):
        # leading coefficient vanishes (|B| = rho): one finite root
        if abs(c1) < 1e-300:
            raise GeometryError("degenerate slope equation")
        s = -c0 / c1
        inf_root = math.copysign(math.inf, -c1)
        return (min(s, inf_root), max(s, inf_root), disc)
    root = rho**3 * math.sqrt(disc_c) / 2.0  # sqrt(c1^2 - 4 c2 c0) / (2 |..|) scale
    # stable quadratic roots: q = -(c1 + sign(c1) sqrt(D))/2; s = q/c2, c0/q
    sq = math.sqrt(max(c1 * c1 - 4.0 * c2 * c0, 0.0))
    if c1 >= 0.0:
        q = -0.5 * (c1 + sq)
    else:
        q = -0.5 * (c1 - sq)
    if abs(q) < 1e-300:
        s_pair = (0.0, 0.0)
    else:
        s_pair = (q / c2, c0 / q)
    return (min(s_pair), max(s_pair), disc)


def double_root_slope(fld: VelocityField, rho: float, phi: float) -> float:
    """Merged slope -c1/(2 c2) = A B rho / (B^2 - rho^2) on the ergosphere."""
    a, b = fld.strengths(rho, phi)
    a = float(a)
    b = float(b)
    den = b * b - rho * rho
    if abs(den) < 1e-14:
        raise GeometryError("slope quadratic degenerates (|B| = rho)")
    return a * b * rho / den


def characteristic_points(fld: VelocityField, n_scan: int = 2048,
                          tol: float = 1e-10) -> list[float]:
    """Angles where the ergosphere normal is characteristic.

    On the ergosphere the slope families merge; a point is characteristic
    exactly when the merged slope also equals dr0/dphi, so both families
    are tangent to the ergosphere there.  Found by sign change of
    g(phi) = s_merged - dr0/dphi and refined by brentq.
    """
    def g(phi):
        r0 = ergosphere_radius(fld, phi)
        return double_root_slope(fld, r0, phi) - ergosphere_slope(fld, phi)

    phi_grid = np.linspace(0.0, TWO_PI, n_scan + 1)
    vals = np.array([g(p) for p in phi_grid])
    if np.max(np.abs(vals)) < 1e-12:
        return []  # fully characteristic boundary (purely radial flow)
    roots = []
    for j in range(n_scan):
        va, vb = vals[j], vals[j + 1]
        if va == 0.0:
            roots.append(phi_grid[j])
        elif va * vb < 0.0:
            roots.append(brentq(g, phi_grid[j], phi_grid[j + 1], xtol=tol))
    return sorted(r % TWO_PI for r in roots)


# ---------------------------------------------------------------------------
# geodesic tracing
# ---------------------------------------------------------------------------

@dataclass
class NullGeodesic:
    """One traced zero-energy characteristic rho(phi) of a slope family."""

    family: int
    phi: np.ndarray
    rho: np.ndarray
    slope: np.ndarray
    start: tuple[float, float]  # (phi, rho)
    stop_reason: str
    dense: Callable  # phi -> rho on [phi[0], phi[-1]] (monotone phi)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.phi.min()), float(self.phi.max())


def _family_slope(fld: VelocityField, rho: float, phi: float, family: int,
                  clamp: bool = False) -> float:
    tol = math.inf if clamp else 1e-12
    s1, s2, _ = geodesic_slope_roots(fld, rho, phi, clip_tol=tol)
    return s1 if family == 1 else s2


def trace_zero_energy_geodesic(fld: VelocityField, family: int,
                               start: tuple[float, float], direction: int,
                               phi_span: float = TWO_PI,
                               phi_target: float | None = None,
                               ergo_margin: float = 1e-10,
                               rho_floor: float = 1e-3,
                               nudge_dx: float = 1e-3,
                               rtol: float = 1e-10,
                               atol: float = 1e-12) -> NullGeodesic:
    """Integrate drho/dphi = s_family(rho, phi) from ``start``.

    ``direction`` is +-1 for increasing/decreasing phi.  Stops at a target
    angle, after the angular span, when the trace returns to the
    ergosphere (the slope families merge there and the graph ends), or
    when it falls onto the central sink.  A start on the ergosphere must
    be a characteristic point; the trace then leaves it along the branch
    of the requested family, seeded by a curvature-matched nudge.
    """
    if family not in (1, 2):
        raise ValueError("family must be 1 or 2")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    phi0, rho0 = start
    r_ergo = ergosphere_radius(fld, phi0)
    on_ergo = abs(rho0 - r_ergo) < 1e-8 * max(1.0, r_ergo)
    if rho0 > r_ergo + 1e-12:
        raise DomainError("start lies outside the ergosphere")

    if on_ergo:
        phi0, rho0 = _nudge_off_characteristic(fld, family, phi0, direction,
                                               dx=nudge_dx)
        # the outward branch may start arbitrarily close to the ergosphere;
        # scale the stopping margin to the seed's own supersonic excess
        a0, b0 = fld.strengths(rho0, phi0)
        excess = float((a0 * a0 + b0 * b0) / rho0**2 - 1.0)
        ergo_margin = min(ergo_margin, 0.25 * max(excess, 0.0))

    def rhs(p, y):
        # clamp the discriminant and floor rho: embedded RK stages may poke
        # just outside the ergosphere or past the sink
        rr = max(y[0], 0.5 * rho_floor)
        return [_family_slope(fld, rr, p, family, clamp=True)]

    def hit_ergosphere(p, y):
        # inside the trap region the flow is supersonic: speed^2 - 1 > 0,
        # falling to zero on the ergosphere
        rr = max(y[0], 0.5 * rho_floor)
        a, b = fld.strengths(rr, p)
        return float((a * a + b * b) / rr**2 - 1.0) - ergo_margin
    hit_ergosphere.terminal = True
    hit_ergosphere.direction = -1.0

    def hit_center(p, y):
        return y[0] - rho_floor
    hit_center.terminal = True
    hit_center.direction = -1.0

    p_end = phi0 + direction * phi_span
    if phi_target is not None:
        p_end = phi_target
    sol = solve_ivp(rhs, (phi0, p_end), [rho0], method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True,
                    events=[hit_ergosphere, hit_center], max_step=0.05)
    if not sol.success:
        raise GeometryError(f"geodesic integration failed: {sol.message}")
    if sol.status == 0:
        reason = "target"
    elif len(sol.t_events[0]):
        reason = "ergosphere"
    else:
        reason = "center"
    phis = sol.t
    rhos = sol.y[0]
    slopes = np.array([_family_slope(fld, r, p, family, clamp=True)
                       for p, r in zip(phis, rhos)])

    raw = sol.sol

    def dense(p):
        return raw(np.asarray(p))[0]

    order = np.argsort(phis)
    return NullGeodesic(family=family, phi=phis[order], rho=rhos[order],
                        slope=slopes[order], start=(start[0], start[1]),
                        stop_reason=reason, dense=dense)


def _nudge_off_characteristic(fld: VelocityField, family: int,
                              phi_c: float, direction: int,
                              dx: float = 1e-4) -> tuple[float, float]:
    """Second-order seed just inside the ergosphere at a characteristic point.

    Writes the branch as rho(x) = r0 + s* x + beta x^2 (x the angular
    offset) and solves the slope-consistency equation for beta; each
    family owns one curvature branch.
    """
    r0 = ergosphere_radius(fld, phi_c)
    s_star = double_root_slope(fld, r0, phi_c)
    x = direction * dx

    def mismatch(beta):
        rho_x = r0 + s_star * x + beta * x * x
        try:
            s = _family_slope(fld, rho_x, phi_c + x, family)
        except DomainError:
            return math.nan
        return s - (s_star + 2.0 * beta * x)

    # bracket a root in beta on a two-sided log grid: branch curvatures can
    # be arbitrarily small (they scale with the flow asymmetry), and the
    # outward branch hugs the ergosphere wall beta_wall where rho(x) = r0(x)
    mags = np.logspace(-9.0, 2.3, 240)
    beta_wall = (ergosphere_radius(fld, phi_c + x) - r0 - s_star * x) / (x * x)
    wall_scale = max(1.0, abs(beta_wall))
    wall_pts = beta_wall - wall_scale * np.logspace(-13.0, 0.0, 40)
    betas = np.sort(np.concatenate([-mags, [0.0], mags, wall_pts]))
    vals = np.array([mismatch(b) for b in betas])
    good = np.isfinite(vals)
    roots = []
    for j in range(len(betas) - 1):
        if good[j] and good[j + 1] and vals[j] * vals[j + 1] < 0.0:
            roots.append(brentq(mismatch, betas[j], betas[j + 1], xtol=1e-14))
    if not roots:
        raise GeometryError("no curvature branch found at characteristic point")
    # the requested family's branch is the consistent one; if both families'
    # branches appear, keep the one whose local slope matches the family root
    beta = None
    for cand in roots:
        rho_x = r0 + s_star * x + cand * x * x
        s_here = _family_slope(fld, rho_x, phi_c + x, family)
        if abs(s_here - (s_star + 2.0 * cand * x)) < 1e-8 * max(1.0, abs(s_here)):
            beta = cand
            break
    if beta is None:
        beta = roots[0]
    return phi_c + x, r0 + s_star * x + beta * x * x


# ---------------------------------------------------------------------------
# horizon assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Corner:
    phi: float
    rho: float
    interior_angle: float


@dataclass
class HorizonSegment:
    kind: str  # geodesic-family-1 | geodesic-family-2 | smooth-connector | circle
    phi: np.ndarray
    rho: np.ndarray
    slope: np.ndarray


@dataclass
class HorizonCurve:
    """Closed sound-trap boundary as an ordered list of segments."""

    segments: list[HorizonSegment]
    corners: list[Corner]

    def closure_gap(self) -> float:
        """Largest junction mismatch around the closed chain of segments."""
        worst = 0.0
        n = len(self.segments)
        for j in range(n):
            a = self.segments[j]
            b = self.segments[(j + 1) % n]
            dphi = (b.phi[0] - a.phi[-1]) % TWO_PI
            dphi = min(dphi, TWO_PI - dphi)
            worst = max(worst, math.hypot(dphi, b.rho[0] - a.rho[-1]))
        return worst


def circle_horizon(fld: VelocityField, n: int = 512) -> HorizonCurve:
    """The trap boundary rho = |A| of constant-drain flows."""
    absA = abs(fld.drain)
    phi = np.linspace(0.0, TWO_PI, n + 1)
    seg = HorizonSegment("circle", phi, np.full(n + 1, absA), np.zeros(n + 1))
    return HorizonCurve([seg], [])


def build_corner_horizon(fld: CrossflowSink,
                         bisect_tol: float = 1e-8) -> HorizonCurve:
    """Assemble the cornered trap of a sink-in-crossflow.

    From the characteristic point of smallest ergosphere radius, one slope
    family per direction sweeps around the interior (the other falls onto
    the sink); the two sweeping traces cross on the far side, and the
    crossing angle is located by bisection on the radial gap between the
    dense traces.  The boundary is the two arcs joined at the tangency
    point (smooth) and at the crossing (corner).
    """
    chars = characteristic_points(fld)
    if len(chars) < 2:
        raise GeometryError(f"expected two characteristic points, found {len(chars)}")
    seed = min(chars, key=lambda p: ergosphere_radius(fld, p))
    r_seed = ergosphere_radius(fld, seed)
    s_star = double_root_slope(fld, r_seed, seed)

    # per direction, keep the branch that sweeps around rather than falling in
    traces = {}
    for direction in (1, -1):
        best = None
        for family in (1, 2):
            g = trace_zero_energy_geodesic(fld, family, (seed, r_seed),
                                           direction, phi_span=TWO_PI - 0.02)
            if g.stop_reason == "center":
                continue
            span = g.phi.max() - g.phi.min()
            if best is None or span > best[1]:
                best = (g, span)
        if best is None:
            raise GeometryError("both families fall onto the sink; no trap boundary")
        traces[direction] = best[0]
    fwd, bwd = traces[1], traces[-1]

    # overlap window: forward trace at phi, backward trace at phi - 2 pi
    lo = max(fwd.phi.min(), bwd.phi.min() + TWO_PI) + 1e-9
    hi = min(fwd.phi.max(), bwd.phi.max() + TWO_PI) - 1e-9
    if hi <= lo:
        raise GeometryError("no corner found: traces do not overlap in angle")

    def gap(p):
        return float(fwd.dense(p) - bwd.dense(p - TWO_PI))

    probes = np.linspace(lo, hi, 513)
    gv = [gap(p) for p in probes]
    bracket = None
    for j in range(len(probes) - 1):
        if gv[j] * gv[j + 1] <= 0.0:
            bracket = (probes[j], probes[j + 1])
            break
    if bracket is None:
        raise GeometryError("no corner found: traces do not intersect")
    phi_x = brentq(gap, *bracket, xtol=bisect_tol)
    rho_x = float(fwd.dense(phi_x))

    s_fwd = _family_slope(fld, rho_x, phi_x, fwd.family, clamp=True)
    s_bwd = _family_slope(fld, rho_x, phi_x, bwd.family, clamp=True)
    angle = _tangent_angle(rho_x, s_fwd, s_bwd)

    start_pt = (seed, r_seed, s_star)
    seg1 = _segment_from_trace(fwd, fwd.family, phi_x, fld, start_pt)
    seg2 = _segment_from_trace(bwd, bwd.family, phi_x - TWO_PI, fld, start_pt)
    phi_c = phi_x % TWO_PI
    if phi_c > math.pi:
        phi_c -= TWO_PI
    corner = Corner(phi=phi_c, rho=rho_x, interior_angle=angle)
    return HorizonCurve(segments=[seg1, seg2], corners=[corner])


def _segment_from_trace(g: NullGeodesic, family: int, phi_corner: float,
                        fld, start_pt, n: int = 400) -> HorizonSegment:
    """Arc of a trace from the characteristic start point to the corner.

    The trace itself begins a curvature nudge away from the characteristic
    point; the exact tangency location and merged slope are spliced in.
    """
    phi_c, rho_c, slope_c = start_pt
    if phi_corner > phi_c:
        phis = np.linspace(g.phi.min(), phi_corner, n)
        rhos = g.dense(phis)
        phis = np.concatenate([[phi_c], phis])
        rhos = np.concatenate([[rho_c], rhos])
    else:
        phis = np.linspace(phi_corner, g.phi.max(), n)
        rhos = g.dense(phis)
        phis = np.concatenate([phis, [phi_c]])
        rhos = np.concatenate([rhos, [rho_c]])
    slopes = np.empty_like(phis)
    for j, (p, r) in enumerate(zip(phis, rhos)):
        if p == phi_c and abs(r - rho_c) < 1e-12:
            slopes[j] = slope_c
        else:
            slopes[j] = _family_slope(fld, r, p, family, clamp=True)
    return HorizonSegment(f"geodesic-family-{family}", phis, rhos, slopes)


def _tangent_angle(rho: float, s1: float, s2: float) -> float:
    """Angle between curve tangents (s, rho)/|.| in the orthonormal polar frame."""
    t1 = np.array([s1, rho])
    t2 = np.array([s2, rho])
    c = float(np.dot(t1, t2) / (np.linalg.norm(t1) * np.linalg.norm(t2)))
    return math.acos(max(-1.0, min(1.0, c)))


# ---------------------------------------------------------------------------
# smooth chart curve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChartWindow:
    """A geodesic window of the chart curve with its transport coefficients."""

    phi_lo: float
    phi_hi: float
    family: int
    b1: Callable
    b2: Callable
    kappa0: Callable
    kappa1: Callable


class ChartCurve:
    """Smooth periodic rho0(phi): geodesic arcs bridged by quintic connectors."""

    def __init__(self, pieces, windows):
        # pieces: list of (phi_lo, phi_hi, rho(phi), drho(phi)) covering one period
        self._pieces = pieces
        self.windows = windows
        self._period_lo = pieces[0][0]

    def _eval(self, phi, which):
        phi = np.asarray(phi, dtype=float)
        shifted = (phi - self._period_lo) % TWO_PI + self._period_lo
        out = np.zeros_like(shifted)
        done = np.zeros(shifted.shape, dtype=bool)
        for lo, hi, f, df in self._pieces:
            m = ~done & (shifted >= lo - 1e-12) & (shifted <= hi + 1e-12)
            if np.any(m):
                out[m] = (f if which == 0 else df)(np.clip(shifted[m], lo, hi))
                done[m] = True
        if not np.all(done):
            raise GeometryError("chart curve pieces do not cover the period")
        return out

    def rho0(self, phi):
        return self._eval(phi, 0)

    def drho0(self, phi):
        return self._eval(phi, 1)


def _quintic_connector(p0, v0, d0, c0, p1, v1, d1, c1):
    """Quintic Hermite matching value, slope, curvature at both ends."""
    h = p1 - p0
    A = np.zeros((6, 6))
    b = np.array([v0, d0, c0, v1, d1, c1], dtype=float)
    A[0] = [1, 0, 0, 0, 0, 0]
    A[1] = [0, 1, 0, 0, 0, 0]
    A[2] = [0, 0, 2, 0, 0, 0]
    A[3] = [h**j for j in range(6)]
    A[4] = [j * h ** (j - 1) if j >= 1 else 0.0 for j in range(6)]
    A[5] = [j * (j - 1) * h ** (j - 2) if j >= 2 else 0.0 for j in range(6)]
    coef = np.linalg.solve(A, b)

    def f(p):
        x = np.asarray(p, dtype=float) - p0
        return sum(coef[j] * x**j for j in range(6))

    def df(p):
        x = np.asarray(p, dtype=float) - p0
        return sum(j * coef[j] * x ** (j - 1) for j in range(1, 6))

    return f, df


def smooth_closure(fld: VelocityField, horizon: HorizonCurve,
                   window_fraction: float = 0.7) -> ChartCurve:
    """Build the smooth chart curve through sub-arcs of the trap segments.

    Each geodesic segment contributes its central ``window_fraction``; the
    two gaps (around the tangency point and around the corner) are bridged
    by quintic Hermite connectors with matched value, slope, and
    curvature, so the closed curve is C2 across the junctions and equals
    the geodesics exactly on the windows.
    """
    if not (0.0 < window_fraction < 1.0):
        raise ValueError("window_fraction must lie in (0, 1)")
    geod = [s for s in horizon.segments if s.kind.startswith("geodesic")]
    if len(geod) != 2:
        raise GeometryError("need exactly two geodesic segments")

    pieces = []
    windows = []
    arcs = []
    for seg in geod:
        phis = seg.phi if seg.phi[0] < seg.phi[-1] else seg.phi[::-1]
        rhos = seg.rho if seg.phi[0] < seg.phi[-1] else seg.rho[::-1]
        slopes = seg.slope if seg.phi[0] < seg.phi[-1] else seg.slope[::-1]
        lo, hi = phis[0], phis[-1]
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo) * window_fraction
        w_lo, w_hi = mid - half, mid + half
        spline = CubicHermiteSpline(phis, rhos, slopes)
        fam = int(seg.kind[-1])
        arcs.append((w_lo, w_hi, spline, fam))

    arcs.sort(key=lambda t: t[0])
    for j, (w_lo, w_hi, spline, fam) in enumerate(arcs):
        f = lambda p, _s=spline: _s(p)
        df = lambda p, _s=spline: _s(p, 1)
        pieces.append((w_lo, w_hi, f, df))
        windows.append(_chart_window(fld, spline, w_lo, w_hi, fam))
        # connector to the next arc (wrapping at the end)
        nxt = arcs[(j + 1) % len(arcs)]
        g_lo, g_hi = w_hi, nxt[0] + (TWO_PI if j == len(arcs) - 1 else 0.0)
        sp_next = nxt[2]
        cf, cdf = _quintic_connector(
            g_lo, float(spline(w_hi)), float(spline(w_hi, 1)), float(spline(w_hi, 2)),
            g_hi, float(sp_next(nxt[0])), float(sp_next(nxt[0], 1)),
            float(sp_next(nxt[0], 2)))
        pieces.append((g_lo, g_hi, cf, cdf))

    return ChartCurve(pieces, windows)


def _chart_window(fld: VelocityField, spline, w_lo: float, w_hi: float,
                  family: int) -> ChartWindow:
    """Near-horizon transport coefficients on a geodesic chart window.

    With kappa(rt, phi) = A/rho - (B/rho^2) rho0'(phi) and the leading
    rt-coefficient of the slope quadratic vanishing on the window, its
    rt-derivative a01 = 2 kappa0 kappa1 + 2 rho0'^2 / rho0^3 gives

        b1 = -2 kappa0 / a01,
        b2 = 2 (kappa0 B / rho0^2 + rho0' / rho0^2) / a01,

    which reduce to b1 = -|A|, b2 = B/|A| on a circular trap rho0 = |A|.
    """
    def parts(phi):
        phi = np.asarray(phi, dtype=float)
        r0 = spline(phi)
        dr0 = spline(phi, 1)
        A, B = fld.strengths(r0, phi)
        da_dr, _, db_dr, _ = fld.partials(r0, phi)
        kap0 = A / r0 - (B / r0**2) * dr0
        # d/drho of (A/rho) and (B/rho^2) at rho0, at fixed phi
        d_ar = da_dr / r0 - A / r0**2
        d_br2 = db_dr / r0**2 - 2.0 * B / r0**3
        kap1 = d_ar - dr0 * d_br2
        a01 = 2.0 * kap0 * kap1 + 2.0 * dr0**2 / r0**3
        return r0, dr0, A, B, kap0, kap1, a01

    def b1(phi):
        r0, dr0, A, B, kap0, kap1, a01 = parts(phi)
        return -2.0 * kap0 / a01

    def b2(phi):
        r0, dr0, A, B, kap0, kap1, a01 = parts(phi)
        return 2.0 * (kap0 * B / r0**2 + dr0 / r0**2) / a01

    def kappa0(phi):
        return parts(phi)[4]

    def kappa1(phi):
        return parts(phi)[5]

    return ChartWindow(phi_lo=w_lo, phi_hi=w_hi, family=family,
                       b1=b1, b2=b2, kappa0=kappa0, kappa1=kappa1)


def chart_from_horizon(fld: VelocityField, horizon: HorizonCurve,
                       window_fraction: float = 0.7) -> TildeChart:
    """TildeChart (for mode/packet data) wrapping the smooth chart curve."""
    curve = smooth_closure(fld, horizon, window_fraction)
    return TildeChart(rho0=curve.rho0, drho0=curve.drho0, ang_bw=64,
                      windows=tuple(curve.windows), curve=curve)
