"""Special functions and quadrature engines for horizon wave-packet integrals.

The radial integrals produced by horizon-localized wave packets share one
shape,

    integral_0^T  t^sigma * exp(i*xi*log t) * exp((i*eta - a) t) * g(t) dt,

with an algebraic endpoint factor t^sigma (sigma > -1), a bounded
log-oscillation exp(i*xi*log t), an oscillatory-damped tail, and smooth g.
A double-exponential (tanh-sinh) node set clusters points at the singular
endpoint; node positions and weights are carried in log form so that the
power factor never overflows, and the log-oscillation is evaluated from
log(t) directly.  On top of that sit:

* complex Gamma via a 15-term Lanczos rational approximation with the
  reflection formula on Re z < 1/2;
* the phase-stripped Gamma variant G1(eps + i*xi) = Gamma(eps + i*xi)
  * exp(pi*xi/2), bounded on vertical strips, together with an
  independent oscillatory-integral evaluation of it;
* principal powers (eta + i*a)^w with argument in (0, pi);
* the half-line Laplace-Fourier integral
      integral_0^inf exp(i t eta) t^lam exp(-a t) dt
          = exp(i pi (lam+1)/2) Gamma(lam+1) / (eta + i a)^(lam+1)
  in closed form, plus a tanh-sinh oracle evaluating the left side with
  no contour rotation, so the two sides are independent;
* adaptive Gauss-Kronrod integration (complex-valued wrapper around
  scipy's QUADPACK) and spectrally accurate Fourier coefficients of
  periodic samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

TWO_PI = 2.0 * math.pi


class NumericError(RuntimeError):
    """A numerical routine failed to reach its requested tolerance."""

    def __init__(self, msg: str, achieved: float | None = None):
        super().__init__(msg)
        self.achieved = achieved


class PoleError(ValueError):
    """Evaluation requested at a pole of the Gamma function."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget knobs for the quadrature engines."""

    scheme: str = "tanh-sinh"  # or "adaptive-GK"
    abs_tol: float = 1e-13
    rel_tol: float = 1e-10
    max_levels: int = 12
    max_subdivisions: int = 200
    tail_factor: float = 10.0  # truncate where exp(-a T) < abs_tol / tail_factor

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")


DEFAULT_SPEC = QuadratureSpec()
OSCILLATORY_SPEC = QuadratureSpec(rel_tol=1e-8, abs_tol=1e-13)


# ---------------------------------------------------------------------------
# complex Gamma (Lanczos) and relatives
# ---------------------------------------------------------------------------

# 15-term Lanczos coefficients for g = 607/128 (Godfrey's set; relative
# error below ~1e-14 on Re z > 0 for the strip used here).
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)


def complex_gamma(z) -> complex:
    """Gamma(z) for complex z by the Lanczos approximation.

    The reflection formula handles Re z < 1/2.  Non-positive integers are
    poles and raise PoleError.
    """
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == int(z.real):
        raise PoleError(f"Gamma pole at z={z.real:.0f}")
    if z.real < 0.5:
        # Gamma(z) Gamma(1-z) = pi / sin(pi z)
        s = _sinpi(z)
        if s == 0:
            raise PoleError(f"Gamma pole at z={z}")
        return math.pi / (s * complex_gamma(1.0 - z))
    zm = z - 1.0
    ser = _LANCZOS_C[0]
    for k in range(1, len(_LANCZOS_C)):
        ser += _LANCZOS_C[k] / (zm + k)
    t = zm + _LANCZOS_G + 0.5
    return math.sqrt(TWO_PI) * t ** (zm + 0.5) * np.exp(-t) * ser


def _sinpi(z: complex) -> complex:
    # sin(pi z) with reduced real argument to limit cancellation
    zr = z.real - math.floor(z.real)
    sign = 1.0 if (int(math.floor(z.real)) % 2 == 0) else -1.0
    return sign * complex(np.sin(math.pi * complex(zr, z.imag)))


def gamma1(z) -> complex:
    """Phase-stripped Gamma: G1(z) = Gamma(z) * exp(pi * Im(z) / 2).

    Satisfies Gamma(z + 1) = z * exp(-pi Im(z)/2) * G1(z) and stays bounded
    as Im(z) grows with Re(z) in (0, 1].
    """
    z = complex(z)
    return complex_gamma(z) * math.exp(0.5 * math.pi * z.imag)


def gamma1_integral(z, rel_tol: float = 1e-9) -> complex:
    """G1(z) from its oscillatory integral representation.

    Rotating the Gamma contour onto the imaginary axis gives, for
    z = eps + i*xi with 0 < eps < 1,

        G1(z) = i * exp(i pi (eps-1)/2)
                  * integral_0^inf y^(eps-1) exp(i xi log y) exp(-i y) dy.

    The integral is evaluated with the substitution y = e^u (uniform
    oscillation as u -> -inf) on a finite window plus an integration-by-
    parts asymptotic tail; this route never uses the Lanczos series, so it
    is an independent check of :func:`gamma1`.
    """
    z = complex(z)
    eps, xi = z.real, z.imag
    if not (0.0 < eps < 1.0):
        raise ValueError("integral representation requires 0 < Re z < 1")
    y_cut = max(60.0, 8.0 * abs(z))
    u_lo = min(math.log(1e-14) / eps, -8.0)  # e^(eps*u) below 1e-14
    u_hi = math.log(y_cut)

    def f(u):
        w = complex(eps, xi)
        return np.exp(w * u - 1j * np.exp(u))

    val, err = adaptive_integrate(f, u_lo, u_hi,
                                  QuadratureSpec(rel_tol=rel_tol, max_subdivisions=800))
    # asymptotic tail: I(s) = -i Y^s e^{-iY} - i s I(s-1), s = z - 1
    s = z - 1.0
    tail = 0.0 + 0.0j
    coeff = -1j * np.exp(-1j * y_cut)
    power = y_cut**s
    bound = np.inf
    for k in range(40):
        term = coeff * power
        tail += term
        ratio = abs(s - k) / y_cut
        if ratio >= 1.0:
            raise NumericError("tail recursion diverges; increase cutoff")
        bound = abs(term) * ratio / (1.0 - ratio)
        if bound < rel_tol * max(abs(tail), 1e-300):
            break
        coeff *= -1j * (s - k)
        power /= y_cut
    total = val + tail
    return 1j * np.exp(1j * 0.5 * math.pi * (eps - 1.0)) * total


def principal_power(eta: float, a: float, w) -> complex:
    """(eta + i a)^w on the principal branch, arg(eta + i a) in (0, pi).

    Requires a > 0 so the base stays in the upper half plane, where
    arg = atan2(a, eta) = asin(a / sqrt(eta^2 + a^2)) for eta > 0 and
    pi - asin(...) for eta < 0.
    """
    if a <= 0.0:
        raise ValueError("principal_power requires a > 0")
    w = complex(w)
    logmod = 0.5 * math.log(eta * eta + a * a)
    arg = math.atan2(a, eta)
    return complex(np.exp(w * complex(logmod, arg)))


# ---------------------------------------------------------------------------
# tanh-sinh (double exponential) quadrature
# ---------------------------------------------------------------------------

_TAU_MAX = 6.0  # exp(pi*sinh(tau)) stays in log-representable range


def _ts_raw(level: int):
    """tanh-sinh abscissa data at refinement `level` (new nodes only).

    Returns (lp, lw): log of the left-edge fraction p(tau) in (0, 1/2] and
    log of |dx/dtau| * h for the map x = p * L onto (0, L).  Nodes come in
    mirrored pairs; we return both halves explicitly via lp for the left
    half and 1-p handled by the caller through `lq` (log of the right-edge
    fraction).
    """
    h = 1.0 / (2.0**level)
    if level == 0:
        taus = np.arange(0.0, _TAU_MAX + h, h)
        taus = np.concatenate([-taus[:0:-1], taus])
    else:
        pos = np.arange(h, _TAU_MAX, 2.0 * h)
        taus = np.concatenate([-pos[::-1], pos])
    x = 0.5 * math.pi * np.sinh(taus)
    # p = (1 + tanh x)/2 = 1/(1 + exp(-2x)); log p stable in both directions
    xp = np.clip(x, None, 400.0)
    xn = np.clip(x, -400.0, None)
    lp = np.where(x >= 0, -np.log1p(np.exp(-2.0 * xp)), 2.0 * xn - np.log1p(np.exp(2.0 * xn)))
    lq = np.where(x <= 0, -np.log1p(np.exp(2.0 * xn)), -2.0 * xp - np.log1p(np.exp(-2.0 * xp)))
    # log weight: log(h * (pi/2) cosh tau * sech^2(x) / 2)
    labs = np.abs(x)
    lsech2 = 2.0 * (math.log(2.0) - labs - np.log1p(np.exp(-2.0 * labs)))
    lw = math.log(h * 0.25 * math.pi) + np.log(np.cosh(taus)) + lsech2
    return lp, lq, lw


_TS_CACHE: dict[int, tuple] = {}


def _ts_level(level: int):
    if level not in _TS_CACHE:
        _TS_CACHE[level] = _ts_raw(level)
    return _TS_CACHE[level]


def power_tanh_sinh(g, sigma: float, length: float,
                    spec: QuadratureSpec = DEFAULT_SPEC):
    """integral_0^L t^sigma g(t, log t) dt by tanh-sinh refinement.

    ``g(t, logt)`` must be vectorized, bounded on (0, L], and is given
    log(t) alongside t so bounded log-oscillations exp(i xi log t) can be
    formed without underflow; t itself may round to 0 at extreme nodes.
    Requires sigma > -1.  Returns (value, error_estimate).
    """
    if sigma <= -1.0:
        raise ValueError("power_tanh_sinh requires sigma > -1")
    if length <= 0.0:
        raise ValueError("interval length must be positive")
    lL = math.log(length)
    total = 0.0 + 0.0j
    err = np.inf
    for level in range(spec.max_levels + 1):
        lp, lq, lw = _ts_level(level)
        lt = lL + lp  # log of node position measured from t = 0
        lcontrib = sigma * lt + lw + lL
        keep = lcontrib > -745.0
        new_sum = 0.0 + 0.0j
        if np.any(keep):
            t = np.minimum(np.exp(lt[keep]), length * (1.0 - 1e-16))
            new_sum = np.sum(np.exp(lcontrib[keep]) * g(t, lt[keep]))
        cur = new_sum if level == 0 else 0.5 * total + new_sum
        if level > 0:
            err = abs(cur - total)
            scale = max(abs(cur), spec.abs_tol)
            if err < spec.rel_tol * scale and level >= 3:
                return cur, err
        total = cur
    if err > 100 * spec.rel_tol * max(abs(total), spec.abs_tol):
        raise NumericError(
            f"tanh-sinh did not converge (est. error {err:.3e})", achieved=err)
    return total, err


def tanh_sinh_complex(f, a: float, b: float,
                      spec: QuadratureSpec = DEFAULT_SPEC):
    """integral_a^b f by tanh-sinh with endpoint clustering at both ends.

    ``f`` is vectorized and may be singular (integrably) at either
    endpoint; values are requested only strictly inside (a, b).
    Returns (value, error_estimate).
    """
    L = b - a
    if L <= 0.0:
        raise ValueError("need b > a")
    total = 0.0 + 0.0j
    err = np.inf
    lL = math.log(L)
    for level in range(spec.max_levels + 1):
        lp, lq, lw = _ts_level(level)
        dleft = np.exp(lL + lp)
        dright = np.exp(lL + lq)
        keep = (lw + lL > -745.0) & (dleft > 0.0) & (dright > 0.0)
        new_sum = 0.0 + 0.0j
        if np.any(keep):
            # evaluate from whichever endpoint is nearer, for accuracy
            x = np.where(lp[keep] <= math.log(0.5),
                         a + dleft[keep], b - dright[keep])
            lo = np.nextafter(a, b)
            hi = np.nextafter(b, a)
            vals = f(np.clip(x, lo, hi))
            new_sum = np.sum(np.exp(lw[keep] + lL) * vals)
        cur = new_sum if level == 0 else 0.5 * total + new_sum
        if level > 0:
            err = abs(cur - total)
            scale = max(abs(cur), spec.abs_tol)
            if err < spec.rel_tol * scale and level >= 3:
                return cur, err
        total = cur
    if err > 100 * spec.rel_tol * max(abs(total), spec.abs_tol):
        raise NumericError(
            f"tanh-sinh did not converge (est. error {err:.3e})", achieved=err)
    return total, err


def exp_tail_cutoff(decay: float, scale: float, spec: QuadratureSpec) -> float:
    """Truncation point T with exp(-decay*T) * scale below abs_tol/tail_factor."""
    if decay <= 0.0:
        raise ValueError("need a positive decay rate")
    target = spec.abs_tol / spec.tail_factor
    T = max(1.0 / decay, -math.log(target / max(scale, 1e-300)) / decay)
    return T


# ---------------------------------------------------------------------------
# Laplace-Fourier half-line integrals
# ---------------------------------------------------------------------------

def laplace_power_integral(lam, a: float, eta: float) -> complex:
    """Closed form of integral_0^inf e^{i t eta} t^lam e^{-a t} dt.

    Equals exp(i pi (lam+1)/2) * Gamma(lam+1) / (eta + i a)^(lam+1) for
    Re lam > -1 and a > 0.
    """
    lam = complex(lam)
    if lam.real <= -1.0:
        raise ValueError("requires Re lam > -1")
    if a <= 0.0:
        raise ValueError("requires a > 0")
    w = lam + 1.0
    return (np.exp(1j * 0.5 * math.pi * w) * complex_gamma(w)
            / principal_power(eta, a, w))


def laplace_power_quadrature(lam, a: float, eta: float,
                             spec: QuadratureSpec = OSCILLATORY_SPEC):
    """Brute-force evaluation of integral_0^inf e^{i t eta} t^lam e^{-a t} dt.

    tanh-sinh on a truncated interval; the algebraic factor t^Re(lam) is
    folded into the node weights and the bounded oscillation t^(i Im lam)
    comes from log(t).  No contour rotation, so the result is independent
    of the closed form it is checked against.  Returns (value, err_est)
    where err_est includes the analytic tail bound.
    """
    lam = complex(lam)
    if lam.real <= -1.0:
        raise ValueError("requires Re lam > -1")
    if a <= 0.0:
        raise ValueError("requires a > 0")
    T = exp_tail_cutoff(a, 1.0, spec)
    T = max(T, (lam.real + 2.0) / a)  # past the turning point of t^Re e^{-at}

    def g(t, logt):
        return np.exp(1j * lam.imag * logt + (1j * eta - a) * t)

    val, err = power_tanh_sinh(g, lam.real, T, spec)
    tail = (T ** lam.real) * math.exp(-a * T) / a * 2.0
    return val, err + tail


def oscillatory_log_integral(eps: float, xi: float, a: float, eta: float,
                             sigma: int = 0,
                             spec: QuadratureSpec = OSCILLATORY_SPEC):
    """integral_0^inf t^(eps + i xi - sigma) e^{(i eta - a) t} dt, sigma in {0, 1}.

    The oracle route for the horizon radial integrals: the endpoint power
    t^(eps-sigma), the log-oscillation e^{i xi log t}, and the damped
    oscillatory tail are all handled by the tanh-sinh engine directly.
    """
    if eps <= 0.0 or a <= 0.0:
        raise ValueError("requires eps > 0 and a > 0")
    if sigma not in (0, 1):
        raise ValueError("sigma must be 0 or 1")
    return laplace_power_quadrature(complex(eps - sigma, xi), a, eta, spec)


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod (complex wrapper) and Fourier coefficients
# ---------------------------------------------------------------------------

def adaptive_integrate(f, a: float, b: float,
                       spec: QuadratureSpec = DEFAULT_SPEC):
    """integral_a^b f(x) dx for complex-valued f by adaptive Gauss-Kronrod.

    Wraps QUADPACK on the real and imaginary parts; infinite limits are
    supported.  Returns (value, error_estimate); raises NumericError if
    the requested tolerance is missed badly.
    """
    def fr(x):
        return float(np.real(f(x)))

    def fi(x):
        return float(np.imag(f(x)))

    kw = dict(epsabs=spec.abs_tol, epsrel=spec.rel_tol,
              limit=spec.max_subdivisions)
    vr, er = quad(fr, a, b, **kw)
    vi, ei = quad(fi, a, b, **kw)
    val = complex(vr, vi)
    err = er + ei
    if err > max(1e3 * spec.rel_tol * abs(val), 1e6 * spec.abs_tol):
        raise NumericError(f"adaptive GK error {err:.3e} too large", achieved=err)
    return val, err


def fourier_coefficients(f, m_max: int, n_grid: int | None = None) -> np.ndarray:
    """Coefficients gamma_m = (1/2pi) integral_0^2pi f(phi) e^{i m phi} dphi.

    ``f`` is either a vectorized callable on [0, 2pi) or an array of
    samples on the uniform grid phi_j = 2 pi j / N.  The trapezoid rule on
    that grid is exact for trigonometric polynomials of degree < N - m_max
    and spectrally accurate for smooth f.  Returns gamma_m for
    m = -m_max..m_max (index with m + m_max).
    """
    if callable(f):
        n = n_grid or max(4 * m_max + 4, 256)
        phi = np.arange(n) * (TWO_PI / n)
        samples = np.asarray(f(phi), dtype=complex)
    else:
        samples = np.asarray(f, dtype=complex)
        n = samples.size
    if n < 4 * m_max + 4:
        raise ValueError("grid too coarse for requested bandwidth")
    spec = np.fft.fft(samples) / n
    ms = np.arange(-m_max, m_max + 1)
    return spec[(-ms) % n]


def parseval_mean_square(f, n_grid: int = 4096) -> float:
    """(1/2pi) integral_0^2pi |f|^2 dphi by the same uniform grid."""
    phi = np.arange(n_grid) * (TWO_PI / n_grid)
    vals = np.asarray(f(phi), dtype=complex)
    return float(np.mean(np.abs(vals) ** 2))
