"""Vortex velocity fields and the acoustic wave Hamiltonian.

A planar fluid flow

    v = (A / r) rhat + (B / r) thetahat

drags sound waves.  With sound speed and background density fixed to 1,
the wave operator's principal symbol in polar coordinates (rho, phi)
with dual variables (eta0, eta_rho, eta_phi) is

    H = (eta0 + (A/rho) eta_rho + (B/rho^2) eta_phi)^2
        - eta_rho^2 - eta_phi^2 / rho^2

and factors into the two sound cones H = H(+) * H(-),

    H(+-) = eta0 + (A/rho) eta_rho + (B/rho^2) eta_phi
            +- sqrt(eta_rho^2 + eta_phi^2 / rho^2).

Three flow families are supported: constant strengths, a constant drain
with azimuthally modulated circulation B(phi) (a trigonometric
polynomial with simple zeros), and a point sink superposed on a uniform
crossflow, A = A0 + c*rho*sin(phi), B = c*rho*cos(phi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """Input outside the physical domain (e.g. rho <= 0)."""


@dataclass(frozen=True)
class TrigPoly:
    """Real trigonometric polynomial c0 + sum_k (a_k cos k phi + b_k sin k phi)."""

    const: float = 0.0
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        out = np.full_like(phi, self.const)
        for k, a in enumerate(self.cos, start=1):
            if a:
                out = out + a * np.cos(k * phi)
        for k, b in enumerate(self.sin, start=1):
            if b:
                out = out + b * np.sin(k * phi)
        return out

    def derivative(self) -> "TrigPoly":
        n = max(len(self.cos), len(self.sin))
        cos = [0.0] * n
        sin = [0.0] * n
        for k, a in enumerate(self.cos, start=1):
            sin[k - 1] -= k * a
        for k, b in enumerate(self.sin, start=1):
            cos[k - 1] += k * b
        return TrigPoly(0.0, tuple(cos), tuple(sin))

    @property
    def degree(self) -> int:
        return max(len(self.cos), len(self.sin))

    def zeros(self, n_scan: int = 4096, tol: float = 1e-12) -> list[float]:
        """Simple zeros on [0, 2pi), located by sign change and refined by brentq."""
        phi = np.linspace(0.0, TWO_PI, n_scan, endpoint=False)
        vals = self(phi)
        roots = []
        for j in range(n_scan):
            a, b = phi[j], phi[(j + 1) % n_scan] if j + 1 < n_scan else TWO_PI
            fa, fb = vals[j], vals[(j + 1) % n_scan]
            if fa == 0.0:
                roots.append(a)
            elif fa * fb < 0.0:
                roots.append(brentq(self, a, b, xtol=tol))
        return sorted(r % TWO_PI for r in roots)


@dataclass(frozen=True)
class ConstantVortex:
    """Constant drain A < 0 and circulation B."""

    drain: float
    circulation: float

    kind = "constant"

    def __post_init__(self):
        if self.drain >= 0.0:
            raise ValueError("drain strength must be negative (inflow)")

    def strengths(self, rho, phi):
        rho = np.asarray(rho, dtype=float)
        phi = np.asarray(phi, dtype=float)
        shape = np.broadcast(rho, phi).shape
        return (np.full(shape, self.drain), np.full(shape, self.circulation))

    # partial derivatives of A and B w.r.t. (rho, phi)
    def partials(self, rho, phi):
        shape = np.broadcast(np.asarray(rho), np.asarray(phi)).shape
        z = np.zeros(shape)
        return z, z, z, z  # dA/drho, dA/dphi, dB/drho, dB/dphi

    @property
    def angular_bandwidth(self) -> int:
        return 0


@dataclass(frozen=True)
class TangentVortex:
    """Constant drain A < 0 with azimuthal circulation B(phi).

    B must be a trigonometric polynomial with finitely many simple zeros
    so that tangency points of the flow with the sound cone are isolated.
    """

    drain: float
    circulation: TrigPoly
    _zeros: tuple[float, ...] = field(init=False, default=())

    kind = "tangent"

    def __post_init__(self):
        if self.drain >= 0.0:
            raise ValueError("drain strength must be negative (inflow)")
        zs = self.circulation.zeros()
        dB = self.circulation.derivative()
        for z in zs:
            if abs(float(dB(z))) < 1e-8:
                raise ValueError(f"circulation has a non-simple zero near phi={z:.6f}")
        object.__setattr__(self, "_zeros", tuple(zs))

    @property
    def circulation_zeros(self) -> tuple[float, ...]:
        return self._zeros

    def strengths(self, rho, phi):
        rho = np.asarray(rho, dtype=float)
        phi = np.asarray(phi, dtype=float)
        b = self.circulation(phi)
        a, b = np.broadcast_arrays(np.full_like(np.asarray(rho + b * 0.0), self.drain), b)
        return a, b

    def partials(self, rho, phi):
        rho = np.asarray(rho, dtype=float)
        phi = np.asarray(phi, dtype=float)
        shape = np.broadcast(rho, phi).shape
        z = np.zeros(shape)
        dbdphi = np.broadcast_to(self.circulation.derivative()(phi), shape).copy()
        return z, z.copy(), z.copy(), dbdphi

    @property
    def angular_bandwidth(self) -> int:
        return self.circulation.degree


@dataclass(frozen=True)
class CrossflowSink:
    """Point sink A0 < -1 in a uniform crossflow of speed 0 < crossflow < 1.

    Pointwise strengths: A = A0 + crossflow*rho*sin(phi),
    B = crossflow*rho*cos(phi); the crossflow contributes the constant
    velocity (0, crossflow) while the sink supplies the radial inflow.
    """

    drain: float
    crossflow: float

    kind = "corner"

    def __post_init__(self):
        if self.drain >= -1.0:
            raise ValueError("sink strength must satisfy A0 < -1")
        if not (0.0 < self.crossflow < 1.0):
            raise ValueError("crossflow speed must lie in (0, 1)")

    def strengths(self, rho, phi):
        rho = np.asarray(rho, dtype=float)
        phi = np.asarray(phi, dtype=float)
        a = self.drain + self.crossflow * rho * np.sin(phi)
        b = self.crossflow * rho * np.cos(phi)
        return np.broadcast_arrays(a, b)

    def partials(self, rho, phi):
        rho = np.asarray(rho, dtype=float)
        phi = np.asarray(phi, dtype=float)
        da_dr = self.crossflow * np.sin(phi)
        da_df = self.crossflow * rho * np.cos(phi)
        db_dr = self.crossflow * np.cos(phi)
        db_df = -self.crossflow * rho * np.sin(phi)
        return np.broadcast_arrays(da_dr, da_df, db_dr, db_df)

    @property
    def angular_bandwidth(self) -> int:
        return 1


VelocityField = ConstantVortex | TangentVortex | CrossflowSink


@dataclass(frozen=True)
class CotangentPoint:
    """Phase-space point (rho, phi; eta0, eta_rho, eta_phi), rho > 0."""

    rho: float
    phi: float
    eta0: float
    eta_rho: float
    eta_phi: float

    def __post_init__(self):
        if self.rho <= 0.0:
            raise DomainError("rho must be positive")


def eval_field(fld: VelocityField, rho, phi):
    """Pointwise strengths (A, B) of the flow at (rho, phi); rho > 0."""
    if np.any(np.asarray(rho) <= 0.0):
        raise DomainError("rho must be positive")
    return fld.strengths(rho, phi)


def speed_squared(fld: VelocityField, rho, phi):
    """|v|^2 = (A^2 + B^2) / rho^2."""
    a, b = eval_field(fld, rho, phi)
    rho = np.asarray(rho, dtype=float)
    return (a * a + b * b) / (rho * rho)


def hamiltonian_symbol(fld: VelocityField, p: CotangentPoint) -> float:
    """Principal symbol H at the cotangent point p."""
    a, b = eval_field(fld, p.rho, p.phi)
    adv = p.eta0 + (a / p.rho) * p.eta_rho + (b / p.rho**2) * p.eta_phi
    return float(adv * adv - p.eta_rho**2 - p.eta_phi**2 / p.rho**2)


def hamiltonian_factors(fld: VelocityField, p: CotangentPoint) -> tuple[float, float]:
    """The two cone factors (H(+), H(-)) whose product is the symbol."""
    a, b = eval_field(fld, p.rho, p.phi)
    adv = p.eta0 + (a / p.rho) * p.eta_rho + (b / p.rho**2) * p.eta_phi
    root = math.sqrt(p.eta_rho**2 + p.eta_phi**2 / p.rho**2)
    return float(adv + root), float(adv - root)
