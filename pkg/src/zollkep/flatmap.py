"""Exotic central-force potentials on the flat plane, Zoll at one energy.

A deformed system with phi = 0 becomes conformally flat in a coordinate
sigma with rho = A(sigma), where A solves

    A'(sigma) = A (2 - hA) / (sigma (2 - hA + f(1 - hA)))
              = A / (sigma * B(A)),      B = Besse coefficient,

A(0) = 0, A'(0) = 1.  The equation is separable: log sigma = int B(u)/u du,
so A is recovered by quadrature plus monotone inversion, which is exact to
rounding pointwise; no marching error accumulates.  While f vanishes along
the way (its argument 1 - hA near +1, i.e. near the planar origin) the map
is the identity.  The resulting flat-plane potential is
P(sigma) = (A^2/sigma^2)(1/A - h/2) in Lagrangian form (Hamiltonian
potential -P), equal to Kepler's 1/sigma - h/2 wherever A = id.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import geometry, jets
from .errors import DomainError, InadmissibleProfileError, IntegrationError, SupportError
from .dynamics import TWO_PI, default_c_grid
from .geometry import metric_coeff_B
from .profiles import DeformationProfile

_GL16 = np.polynomial.legendre.leggauss(16)


def _B_val(h: float, f: DeformationProfile, u: float) -> float:
    return metric_coeff_B(h, f, u, 0).value


def _panel_integral(h, f, lo, hi) -> float:
    """Gauss-Legendre 16 of B(u)/u over [lo, hi]."""
    x, w = _GL16
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    total = 0.0
    for xi, wi in zip(x, w):
        u = mid + half * xi
        total += wi * _B_val(h, f, u) / u
    return half * total


@dataclass
class ConformalMap:
    """Solved map sigma -> A(sigma) with table, interpolants and exact inverse."""

    h: float
    f: DeformationProfile
    sigma_start: float            # identity holds on [0, sigma_start]
    sigma_max: float
    A_grid: np.ndarray            # Chebyshev-Lobatto in A on [sigma_start, 2/h]
    sigma_grid: np.ndarray
    W_grid: np.ndarray            # accumulated int B/u from sigma_start
    _A_of_sigma: CubicSpline = field(repr=False)
    _sigma_of_A: CubicSpline = field(repr=False)

    def A(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        out = np.where(sigma <= self.sigma_start, sigma, 0.0)
        mask = sigma > self.sigma_start
        if np.any(mask):
            out = np.where(mask, self._A_of_sigma(np.clip(sigma, self.sigma_start,
                                                          self.sigma_max)), out)
        return out if out.ndim else float(out)

    def A_inverse(self, rho):
        rho = np.asarray(rho, dtype=float)
        out = np.where(rho <= self.sigma_start, rho, 0.0)
        mask = rho > self.sigma_start
        if np.any(mask):
            out = np.where(mask, self._sigma_of_A(np.clip(rho, self.sigma_start,
                                                          2.0 / self.h)), out)
        return out if out.ndim else float(out)

    # -- pointwise machine-accurate map (certificates) -----------------------
    def _W_exact(self, a: float) -> float:
        """int_{sigma_start}^{a} B(u)/u du via anchored Gauss panels."""
        if a <= self.sigma_start:
            return math.log(a / self.sigma_start)
        j = int(np.searchsorted(self.A_grid, a)) - 1
        j = max(0, min(j, len(self.A_grid) - 2))
        acc = self.W_grid[j]
        lo = self.A_grid[j]
        n_sub = 4
        for k in range(n_sub):
            acc += _panel_integral(self.h, self.f, lo + (a - lo) * k / n_sub,
                                   lo + (a - lo) * (k + 1) / n_sub)
        return acc

    def A_pointwise(self, sigma: float) -> float:
        """A(sigma) from the separable relation, exact to rounding."""
        if sigma <= self.sigma_start:
            return float(sigma)
        if sigma > self.sigma_max * (1.0 + 1e-12):
            raise DomainError(f"sigma={sigma} beyond sigma_max={self.sigma_max}")
        target = math.log(sigma / self.sigma_start)
        hi = min(2.0 / self.h, float(self._A_of_sigma(min(sigma, self.sigma_max))) * 1.05)
        return brentq(lambda a: self._W_exact(a) - target, self.sigma_start,
                      max(hi, self.sigma_start * (1 + 1e-15)), xtol=1e-15, rtol=8.9e-16)

    def phi_reconstructed(self, rho: float) -> float:
        """Projective profile 2 log(rho / A^{-1}(rho)) realizing the flat system."""
        return 2.0 * math.log(rho / float(self.A_inverse(rho)))


def solve_conformal_map(h: float, f: DeformationProfile,
                        n_grid: int = 2048) -> ConformalMap:
    """Solve the conformal-coordinate equation for the deformation f at level h.

    f must vanish identically near the planar origin, i.e. near argument
    x = 1 (support bounded away from 1), so the singular point sigma = 0 is
    crossed by the exact identity segment.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    sup = f.support if f.support is not None else f.fn.support
    if sup is None:
        raise SupportError("profile must carry a support bounded away from x = 1")
    s_lo, s_hi = sup
    if s_lo > s_hi:  # identically zero: A = id up to the Hill boundary, exactly
        smax = 2.0 / h
        A_grid = np.linspace(smax * (1.0 - 1e-3), smax, 8)
        return ConformalMap(h, f, smax, smax, A_grid, A_grid,
                            np.log(A_grid / A_grid[0]), CubicSpline(A_grid, A_grid),
                            CubicSpline(A_grid, A_grid))
    if s_hi >= 1.0 - 1e-12:
        raise SupportError(
            f"profile support {sup} must stay away from x = 1 (planar origin)")
    sigma_start = (1.0 - s_hi) / h

    # Chebyshev-Lobatto grid in A on [sigma_start, 2/h]
    j = np.arange(n_grid)
    A_grid = sigma_start + (2.0 / h - sigma_start) * 0.5 * (1.0 - np.cos(np.pi * j / (n_grid - 1)))
    W = np.empty(n_grid)
    W[0] = 0.0
    for k in range(1, n_grid):
        W[k] = W[k - 1] + _panel_integral(h, f, A_grid[k - 1], A_grid[k])
    sigma_grid = sigma_start * np.exp(W)
    if not np.all(np.diff(sigma_grid) > 0):
        raise InadmissibleProfileError("conformal map non-monotone (B must stay positive)")
    return ConformalMap(h, f, sigma_start, float(sigma_grid[-1]), A_grid,
                        sigma_grid, W, CubicSpline(sigma_grid, A_grid),
                        CubicSpline(A_grid, sigma_grid))


def conformality_residual(cmap: ConformalMap, sigmas: Sequence[float],
                          fd_step: Optional[float] = None) -> np.ndarray:
    """Pointwise residual A' sigma (2-hA+f(1-hA)) - A(2-hA) of the solved map.

    A' comes from a five-point central difference of the pointwise-rootfound
    A(sigma), which is accurate to rounding, so the residual honestly
    measures whether the constructed map solves the equation.
    """
    h, f = cmap.h, cmap.f
    # step balances the d^4 truncation (bump profiles have large high
    # derivatives) against the ~1e-15 pointwise noise of A
    d = fd_step if fd_step is not None else 3e-5
    out = np.empty(len(sigmas))
    for i, s in enumerate(sigmas):
        s = float(s)
        a0 = cmap.A_pointwise(s)
        if s + 2 * d > cmap.sigma_max:
            d_i = (cmap.sigma_max - s) / 2.001 if cmap.sigma_max - s > 4e-7 else d
        else:
            d_i = d
        vals = [cmap.A_pointwise(s + k * d_i) for k in (-2, -1, 1, 2)]
        Ap = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * d_i)
        fx = f.fn(1.0 - h * a0)
        out[i] = Ap * s * (2.0 - h * a0 + fx) - a0 * (2.0 - h * a0)
    return np.abs(out)


def separable_residual(cmap: ConformalMap, sigmas: Sequence[float]) -> np.ndarray:
    """|W(A(sigma)) - log(sigma/sigma_start)|: integral form of the same identity."""
    out = np.empty(len(sigmas))
    for i, s in enumerate(sigmas):
        s = float(s)
        a = float(cmap.A(s))
        if a <= cmap.sigma_start:
            out[i] = 0.0
        else:
            out[i] = cmap._W_exact(a) - math.log(s / cmap.sigma_start)
    return np.abs(out)


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

@dataclass
class ExoticPotential:
    """Flat-plane central potential P(sigma) = (A^2/sigma^2)(1/A - h/2)."""

    h: float
    sigma_start: float
    sigma_max: float
    sigma_min: float
    cmap: Optional[ConformalMap]
    _P_spline: Optional[CubicSpline] = field(default=None, repr=False)
    _dP_spline: Optional[CubicSpline] = field(default=None, repr=False)

    def P(self, sigma):
        scalar = np.ndim(sigma) == 0
        sig = np.atleast_1d(np.asarray(sigma, dtype=float))
        out = np.empty_like(sig)
        inner = sig <= self.sigma_start
        out[inner] = 1.0 / sig[inner] - self.h / 2.0
        if np.any(~inner):
            out[~inner] = self._P_spline(np.clip(sig[~inner], self.sigma_start,
                                                 self.sigma_max))
        return float(out[0]) if scalar else out

    def dP(self, sigma):
        scalar = np.ndim(sigma) == 0
        sig = np.atleast_1d(np.asarray(sigma, dtype=float))
        out = np.empty_like(sig)
        inner = sig <= self.sigma_start
        out[inner] = -1.0 / sig[inner] ** 2
        if np.any(~inner):
            out[~inner] = self._dP_spline(np.clip(sig[~inner], self.sigma_start,
                                                  self.sigma_max))
        return float(out[0]) if scalar else out

    def p_theta_max(self) -> float:
        """Angular momentum of the circular orbit: max of sigma sqrt(2 P)."""
        sig = np.linspace(self.sigma_min, self.sigma_max * (1 - 1e-9), 4096)
        vals = 2.0 * self.P(sig) * sig ** 2
        return math.sqrt(float(np.max(vals)))

    def export_csv(self, path, n: int = 512) -> None:
        sig = np.linspace(self.sigma_min, self.sigma_max, n)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sigma", "P", "dP_dsigma"])
            for s in sig:
                w.writerow([f"{s:.10g}", f"{self.P(float(s)):.10g}",
                            f"{self.dP(float(s)):.10g}"])

    def export_metadata(self, path, profile_ref: str = "") -> None:
        meta = {"h": self.h, "sigma_start": self.sigma_start,
                "sigma_max": self.sigma_max, "sigma_min": self.sigma_min,
                "profile": profile_ref}
        Path(path).write_text(json.dumps(meta, sort_keys=True, indent=1))


def exotic_potential(cmap: ConformalMap, sigma_min_frac: float = 1e-4) -> ExoticPotential:
    """Tabulated potential of the conformally flattened system."""
    A, sig = cmap.A_grid, cmap.sigma_grid
    P_vals = A * (2.0 - cmap.h * A) / (2.0 * sig ** 2)
    # dP = (A/sigma^3) ((1-hA)/B - (2-hA))
    B_vals = np.array([_B_val(cmap.h, cmap.f, float(a)) for a in A])
    dP_vals = (A / sig ** 3) * ((1.0 - cmap.h * A) / B_vals - (2.0 - cmap.h * A))
    return ExoticPotential(cmap.h, cmap.sigma_start, cmap.sigma_max,
                           sigma_min_frac * cmap.sigma_max, cmap,
                           CubicSpline(sig, P_vals), CubicSpline(sig, dP_vals))


def kepler_potential(h: float, sigma_max_frac: float = 1.0) -> ExoticPotential:
    """The undeformed potential 1/sigma - h/2 wrapped in the same interface."""
    smax = 2.0 / h * sigma_max_frac
    return ExoticPotential(h, smax, smax, 1e-4 * smax, None)


# ---------------------------------------------------------------------------
# flat-plane Zoll verification
# ---------------------------------------------------------------------------

@dataclass
class FlatZollReport:
    h: float
    p_theta_grid: np.ndarray
    delta_thetas: np.ndarray
    periods: np.ndarray           # normal-form periods sqrt(h) * JM length
    max_dtheta_dev: float
    max_period_dev: float
    tolerance: float
    energy_drift: float
    drift_tolerance: float
    failures: List[Tuple[float, str]] = field(default_factory=list)

    @property
    def status(self) -> str:
        if self.failures:
            return "failed"
        if self.energy_drift > self.drift_tolerance:
            return "inconclusive"
        return "complete"

    @property
    def is_zoll(self) -> bool:
        return (self.status == "complete"
                and self.max_dtheta_dev < self.tolerance
                and self.max_period_dev < self.tolerance)


def _flat_orbit(pot: ExoticPotential, p_theta: float, rtol=1e-12, atol=1e-14):
    """One radial period of H = p_sigma^2/2 + p_theta^2/(2 sigma^2) - P at H=0."""
    sig_peak_grid = np.linspace(pot.sigma_min, pot.sigma_max * (1 - 1e-9), 2048)
    vals = 2.0 * pot.P(sig_peak_grid) * sig_peak_grid ** 2
    i_pk = int(np.argmax(vals))
    sig_pk = float(sig_peak_grid[i_pk])

    def turning(s):
        return 2.0 * pot.P(s) * s * s - p_theta ** 2

    lo = pot.sigma_max * 1e-9
    if turning(lo) >= 0 or turning(sig_pk) <= 0:
        raise DomainError(f"no perihelion bracket for p_theta={p_theta}")
    sig0 = brentq(turning, lo, sig_pk, xtol=1e-15, rtol=8.9e-16)

    def rhs(t, y):
        s, th, ps, s_jm = y
        P = pot.P(s)
        return [ps, p_theta / s ** 2, p_theta ** 2 / s ** 3 + pot.dP(s), 2.0 * P]

    def perihelion(t, y):
        return y[2]

    perihelion.direction = 1
    perihelion.terminal = 2
    t_max = 40.0 * TWO_PI * pot.h ** -1.5
    sol = solve_ivp(rhs, (0.0, t_max), [sig0, 0.0, 0.0, 0.0], method="DOP853",
                    dense_output=True, events=[perihelion], rtol=rtol, atol=atol)
    if sol.status == -1:
        raise IntegrationError(sol.message)
    ev_t = sol.t_events[0]
    ev_y = sol.y_events[0]
    keep = ev_t > 1e-9
    ev_t, ev_y = ev_t[keep], ev_y[keep]
    if len(ev_t) < 1:
        raise IntegrationError("no perihelion return found")
    ts = np.linspace(0.0, float(ev_t[0]), 400)
    ys = sol.sol(ts)
    drift = float(np.max(np.abs(ys[2] ** 2 / 2.0 + p_theta ** 2 / (2.0 * ys[0] ** 2)
                                - pot.P(ys[0]))))
    return float(ev_y[0, 1]), float(ev_y[0, 3]), drift


def verify_flat_zoll(pot: ExoticPotential, grid_size: int = 12,
                     tol: float = 1e-5, drift_tol: float = 1e-9) -> FlatZollReport:
    """Apsidal-angle scan of the flat system across a p_theta grid."""
    p_max = pot.p_theta_max()
    p_grid = default_c_grid(grid_size) * p_max
    sqrt_h = math.sqrt(pot.h)
    dthetas, periods, failures = [], [], []
    drift = 0.0
    for p in p_grid:
        try:
            dth, s_jm, dr = _flat_orbit(pot, float(p))
            dthetas.append(dth)
            periods.append(sqrt_h * s_jm)
            drift = max(drift, dr)
        except Exception as exc:  # noqa: BLE001 - reported per sample
            failures.append((float(p), str(exc)))
            dthetas.append(math.nan)
            periods.append(math.nan)
    dthetas = np.array(dthetas)
    periods = np.array(periods)
    ok = ~np.isnan(dthetas)
    dev_t = float(np.max(np.abs(dthetas[ok] - TWO_PI))) if ok.any() else math.inf
    dev_p = float(np.max(np.abs(periods[ok] - TWO_PI))) if ok.any() else math.inf
    return FlatZollReport(pot.h, p_grid, dthetas, periods, dev_t, dev_p, tol,
                          drift, drift_tol, failures)
