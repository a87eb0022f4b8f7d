"""Deformed Kepler systems, their Jacobi-Maupertuis metrics and normal form.

The shifted Kepler problem at energy parameter h > 0 lives on the punctured
Hill disk 0 < rho <= 2/h.  Its JM metric, and that of every rotationally
invariant deformation, reduces under cos r = 1 - h*rho to the normal form

    (1/h) * ((1 + b(cos r))^2 dr^2 + sin(r)^2 dtheta^2),

with b odd; b = id is Kepler, and a deformation profile f shifts it to
b = id + f.  The quotient B(rho) = 1 + f(1-h*rho)/(2-h*rho) is the radial
kinetic coefficient; at the Hill boundary the 0/0 is removable because
f(-1) = 0 and is resolved here by a shifted jet division.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from . import jets
from .errors import DomainError, InadmissibleProfileError
from .jets import Jet, SmoothFnExpr
from .profiles import (DeformationProfile, ProjectiveProfile, chebyshev_nodes,
                       zero_profile, zero_projective)

_HILL_SLACK = 1e-12


@dataclass(frozen=True)
class RotSystem:
    """Rotationally invariant natural system (h, f, phi) deforming Kepler."""

    h: float
    f: DeformationProfile
    phi: ProjectiveProfile

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("h must be positive")

    @property
    def hill_radius(self) -> float:
        return 2.0 / self.h

    @staticmethod
    def kepler(h: float) -> "RotSystem":
        return RotSystem(h, zero_profile(), zero_projective(h))

    @staticmethod
    def build(h: float, f: Optional[DeformationProfile] = None,
              phi: Optional[ProjectiveProfile] = None) -> "RotSystem":
        return RotSystem(h, f if f is not None else zero_profile(),
                         phi if phi is not None else zero_projective(h))


@dataclass(frozen=True)
class BesseProfile:
    """Normal-form coefficient data: metric (1/h)((1+b(cos r))^2 dr^2 + sin^2 r dth^2)."""

    b: SmoothFnExpr
    h: float = 1.0

    def __call__(self, s: float) -> float:
        return self.b(float(s))

    @property
    def length_scale(self) -> float:
        """Physical lengths are normal-form lengths times this factor."""
        return 1.0 / math.sqrt(self.h)


@dataclass(frozen=True)
class MetricSample:
    g_rr: float
    g_thth: float
    point: float
    chart: str  # "polar-rho" or "normal-form-r"


def rho_to_r(h: float, rho: float) -> float:
    """Chart change r = arccos(1 - h*rho), valid on the closed Hill interval."""
    if not (-_HILL_SLACK <= rho <= 2.0 / h + _HILL_SLACK):
        raise DomainError(f"rho={rho} outside Hill interval [0, {2.0 / h}]")
    return math.acos(min(1.0, max(-1.0, 1.0 - h * rho)))


def r_to_rho(h: float, r: float) -> float:
    if not (-_HILL_SLACK <= r <= math.pi + _HILL_SLACK):
        raise DomainError(f"r={r} outside [0, pi]")
    return (1.0 - math.cos(r)) / h


def metric_coeff_B(h: float, f: DeformationProfile, rho: float, order: int = 0) -> Jet:
    """Jet of B(rho) = 1 + f(1-h*rho)/(2-h*rho).

    At rho = 2/h the quotient f(-1)/0 is removable because f(-1) = 0; the
    denominator is exactly linear there, so the shifted rule is a plain
    coefficient shift.  Needs one extra derivative of f in that case.
    """
    if rho < -_HILL_SLACK or rho > 2.0 / h + _HILL_SLACK:
        raise DomainError(f"rho={rho} outside Hill interval [0, {2.0 / h}]")
    x0 = 1.0 - h * rho
    d0 = 2.0 - h * rho
    if abs(d0) <= 1e-13:
        f_t = f.fn.taylor_at(-1.0, order + 1)
        if abs(f_t[0]) > 1e-9:
            raise InadmissibleProfileError(
                f"profile has f(-1) = {f_t[0]}, quotient not removable at the Hill boundary")
        num = [c * (-h) ** j for j, c in enumerate(f_t)]
        q = [num[j + 1] / (-h) for j in range(order + 1)]
    else:
        f_t = f.fn.taylor_at(x0, order)
        num = [c * (-h) ** j for j, c in enumerate(f_t)]
        den = [d0, -h] + [0.0] * max(0, order - 1)
        q = jets.taylor_div(num, den[: order + 1])
    q[0] += 1.0
    if q[0] <= 0.0:
        raise InadmissibleProfileError(
            f"Besse coefficient B({rho}) = {q[0]} <= 0: profile inadmissible")
    return Jet(order, tuple(jets.taylor_to_derivatives(q)))


def jm_metric(h: float, f: DeformationProfile, rho: float) -> MetricSample:
    """JM metric sample ((2-h rho)/rho)(B^2 drho^2 + rho^2 dtheta^2)."""
    if not (_HILL_SLACK < rho < 2.0 / h - _HILL_SLACK):
        raise DomainError(
            f"JM metric degenerates outside 0 < rho < 2/h (rho={rho}, h={h})")
    w = (2.0 - h * rho) / rho
    B = metric_coeff_B(h, f, rho, 0).value
    return MetricSample(w * B * B, w * rho * rho, rho, "polar-rho")


def to_besse(f: DeformationProfile, h: float = 1.0) -> BesseProfile:
    """Normal-form profile b = id + f; checks 1 + b > 0 on a Chebyshev grid."""
    b = jets.sum_of(jets.identity(), f.fn).with_domain(-1.0, 1.0)
    worst = min(1.0 + b(float(s)) for s in chebyshev_nodes(257, -1.0, 1.0))
    if worst <= 0.0:
        raise InadmissibleProfileError(
            f"normal-form coefficient 1 + b reaches {worst} <= 0")
    return BesseProfile(b, h)


def besse_metric_sample(besse: BesseProfile, r: float) -> MetricSample:
    if not (0.0 < r < math.pi):
        raise DomainError(f"r={r} outside the open chart (0, pi)")
    coeff = 1.0 + besse.b(math.cos(r))
    inv_h = 1.0 / besse.h
    return MetricSample(inv_h * coeff * coeff, inv_h * math.sin(r) ** 2, r,
                        "normal-form-r")


@dataclass(frozen=True)
class LagrangianTerms:
    kin_rr: float      # e^{-phi} B^2
    kin_thth: float    # e^{-phi} rho^2
    potential: float   # e^{phi} (1/rho - h/2)


def lagrangian_terms(sys: RotSystem, rho: float) -> LagrangianTerms:
    if rho <= 0:
        raise DomainError("rho must be positive")
    if rho > sys.hill_radius + _HILL_SLACK:
        raise DomainError(f"rho={rho} beyond the Hill radius {sys.hill_radius}")
    B = metric_coeff_B(sys.h, sys.f, rho, 0).value
    phi = sys.phi(rho)
    e_m = math.exp(-phi)
    return LagrangianTerms(e_m * B * B, e_m * rho * rho,
                           math.exp(phi) * (1.0 / rho - sys.h / 2.0))
