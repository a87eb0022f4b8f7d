"""Deformation and projective profiles with the smoothness boundary checks.

A deformation profile is an odd function on [-1,1] vanishing at the
endpoints; it parametrizes the rotationally invariant deformations of the
Kepler problem at one energy.  The boundary checks certify that the deformed
metric extends smoothly over the origin of the plane: the odd endpoint
derivatives of the profile must be tied to the even ones, and the projective
profile must have vanishing odd derivatives at 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import jets
from .errors import DomainError, JetOrderError
from .jets import SmoothFnExpr

DEFAULT_TOL = 1e-10
SAMPLED_TOL = 1e-6
DEFAULT_GRID = 257
MAX_K = 7  # jet order 2K+1 <= 15


def chebyshev_nodes(n: int, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    """Interior Chebyshev (Gauss) points, clustered toward the endpoints."""
    k = np.arange(n)
    x = np.cos((2 * k + 1) * np.pi / (2 * n))
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * x[::-1]


@dataclass(frozen=True)
class DeformationProfile:
    """Odd profile f on [-1,1] with f(+-1) = 0."""

    fn: SmoothFnExpr
    support: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.support is None and self.fn.support is not None:
            object.__setattr__(self, "support", self.fn.support)

    def __call__(self, x):
        if np.ndim(x) == 0:
            return self.fn(float(x))
        return np.array([self.fn(float(v)) for v in np.asarray(x).ravel()])

    def jet(self, x: float, order: int) -> jets.Jet:
        return jets.eval_jet(self.fn, x, order)


@dataclass(frozen=True)
class ProjectiveProfile:
    """Conformal-factor profile phi on [0, 2/h]."""

    fn: SmoothFnExpr
    h: float

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("projective profile requires h > 0")

    def __call__(self, rho: float) -> float:
        return self.fn(float(rho))

    def jet(self, rho: float, order: int) -> jets.Jet:
        return jets.eval_jet(self.fn, rho, order)


def zero_profile() -> DeformationProfile:
    return DeformationProfile(jets.constant(0.0).with_domain(-1.0, 1.0))


def zero_projective(h: float) -> ProjectiveProfile:
    return ProjectiveProfile(jets.constant(0.0), h)


@dataclass
class ProfileValidation:
    max_odd_violation: float
    endpoint_values: Tuple[float, float]  # (f(1), f(-1))
    min_besse_coeff: float  # min over the grid of 1 + s + f(s)
    tol: float
    grid_size: int

    @property
    def passed(self) -> bool:
        return (self.max_odd_violation < self.tol
                and abs(self.endpoint_values[0]) < self.tol
                and abs(self.endpoint_values[1]) < self.tol
                and self.min_besse_coeff > 0.0)


@dataclass
class BoundaryReport:
    """Per-order residuals of an endpoint smoothness condition."""

    kind: str
    tol: float
    orders: List[int]
    raw: List[float]
    normalized: List[float]

    @property
    def passed(self) -> List[bool]:
        return [abs(r) < self.tol for r in self.normalized]

    @property
    def all_passed(self) -> bool:
        return all(self.passed)

    def passed_through(self, k: int) -> bool:
        return all(abs(r) < self.tol for o, r in zip(self.orders, self.normalized) if o <= k)


def validate_profile(f: DeformationProfile, tol: float = DEFAULT_TOL,
                     grid_size: int = DEFAULT_GRID) -> ProfileValidation:
    """Grid check of oddness, endpoint values and Besse-coefficient positivity."""
    if grid_size < 16:
        raise ValueError("grid_size must be >= 16")
    xs = chebyshev_nodes(grid_size, 0.0, 1.0)
    odd_viol = max(abs(f.fn(float(x)) + f.fn(float(-x))) for x in xs)
    f1 = f.fn(1.0)
    fm1 = f.fn(-1.0)
    ss = chebyshev_nodes(grid_size, -1.0, 1.0)
    besse_min = min(1.0 + float(s) + f.fn(float(s)) for s in ss)
    return ProfileValidation(odd_viol, (f1, fm1), besse_min, tol, grid_size)


def check_boundary_conditions_f(f: DeformationProfile, K: int = MAX_K,
                                tol: float = DEFAULT_TOL) -> BoundaryReport:
    """Residuals f^(2k+1)(1) - (2k+1)/2 * f^(2k)(1) for k = 0..K."""
    if K > MAX_K:
        raise JetOrderError(f"K must be <= {MAX_K} (jet order 2K+1 <= 15)")
    jet = f.jet(1.0, 2 * K + 1)
    raw, normalized = [], []
    for k in range(K + 1):
        even = jet.coeffs[2 * k]
        res = jet.coeffs[2 * k + 1] - (2 * k + 1) / 2.0 * even
        raw.append(res)
        normalized.append(res / max(1.0, abs(even)))
    return BoundaryReport("deformation-endpoint", tol, list(range(K + 1)), raw, normalized)


def check_boundary_conditions_phi(phi: ProjectiveProfile, K: int = MAX_K,
                                  tol: float = DEFAULT_TOL) -> BoundaryReport:
    """Residuals phi^(2k+1)(0) for k = 0..K."""
    if K > MAX_K:
        raise JetOrderError(f"K must be <= {MAX_K}")
    jet = phi.jet(0.0, 2 * K + 1)
    raw = [jet.coeffs[2 * k + 1] for k in range(K + 1)]
    normalized = [r / max(1.0, abs(jet.coeffs[2 * k])) for k, r in enumerate(raw)]
    return BoundaryReport("projective-origin", tol, list(range(K + 1)), raw, normalized)


def check_origin_regularity(h: float, f: DeformationProfile, K: int = MAX_K,
                            tol: float = DEFAULT_TOL) -> BoundaryReport:
    """Odd derivatives at rho=0 of B(rho)^2, B = 1 + f(1-h rho)/(2-h rho).

    Vanishing of these is equivalent (order by order) to the endpoint
    conditions of check_boundary_conditions_f; residuals are normalized by
    h^(2k+1) * max(1, |f^(2k)(1)|) so the two reports are commensurate.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if K > MAX_K:
        raise JetOrderError(f"K must be <= {MAX_K}")
    n = 2 * K + 1
    f_t = f.fn.taylor_at(1.0, n)
    # f(1 - h rho) as a series in rho
    num = [c * (-h) ** j for j, c in enumerate(f_t)]
    den = [2.0, -h] + [0.0] * (n - 1)
    B = jets.taylor_div(num, den[: n + 1])
    B[0] += 1.0
    B2 = jets.taylor_mul(B, B)
    derivs = jets.taylor_to_derivatives(B2)
    f_derivs = jets.taylor_to_derivatives(f_t)
    raw, normalized = [], []
    for k in range(K + 1):
        r = derivs[2 * k + 1]
        raw.append(r)
        normalized.append(r / (h ** (2 * k + 1) * max(1.0, abs(f_derivs[2 * k]))))
    return BoundaryReport("origin-regularity", tol, list(range(K + 1)), raw, normalized)


# ---------------------------------------------------------------------------
# profile sampling (tests, CLI seeds)
# ---------------------------------------------------------------------------

def random_odd_profile(rng: np.random.Generator, n_bumps: int = 2,
                       amplitude: float = 0.1,
                       support: Tuple[float, float] = (-0.6, 0.6)) -> DeformationProfile:
    """Random admissible odd profile: a mixture of antisymmetrized bumps.

    Supports stay inside the given interval so 1 + s + f(s) > 0 holds for
    amplitudes up to roughly 1 + support[0].
    """
    lo, hi = support
    pieces = []
    weights = rng.uniform(0.5, 1.0, size=n_bumps)
    weights *= amplitude / weights.sum()
    for w in weights:
        width = rng.uniform(0.15, min(0.5, hi - lo))
        a = rng.uniform(lo, hi - width)
        sign = 1.0 if rng.uniform() < 0.5 else -1.0
        pieces.append(jets.scaled(
            jets.antisymmetrize(jets.normalized_bump(a, a + width)), sign * float(w)))
    fn = jets.sum_of(*pieces).with_domain(-1.0, 1.0)
    return DeformationProfile(fn)


# ---------------------------------------------------------------------------
# load/save: jets JSON schema plus profile metadata
# ---------------------------------------------------------------------------

def profile_to_dict(p) -> dict:
    if isinstance(p, DeformationProfile):
        d = {"kind": "deformation", "expr": jets.to_dict(p.fn)}
        if p.support is not None:
            d["support"] = list(p.support)
        return d
    if isinstance(p, ProjectiveProfile):
        return {"kind": "projective", "h": p.h, "expr": jets.to_dict(p.fn)}
    raise TypeError(f"cannot serialize {type(p).__name__}")


def profile_from_dict(d: dict):
    kind = d.get("kind")
    expr = jets.from_dict(d["expr"])
    if kind == "deformation":
        sup = tuple(d["support"]) if "support" in d else None
        return DeformationProfile(expr, sup)
    if kind == "projective":
        return ProjectiveProfile(expr, float(d["h"]))
    raise ValueError(f"unknown profile kind {kind!r}")


def save_profile(p, path) -> None:
    Path(path).write_text(json.dumps(profile_to_dict(p), sort_keys=True, indent=1))


def load_profile(path):
    return profile_from_dict(json.loads(Path(path).read_text()))
