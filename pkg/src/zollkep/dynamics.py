"""Zoll verification at a fixed energy: return-angle quadrature and orbits.

Two independent routes certify the Zoll property:

* quadrature in the normal form: the Clairaut integral for the return angle
  and the radial arclength, after the substitution cos r = sqrt(1-c^2) sin t
  that removes both turning-point square-root singularities, integrated with
  Gauss-Legendre;
* direct Hamiltonian integration of the deformed system in polar
  coordinates with perihelion event detection.

For every odd normal-form profile both the return angle and the radial
period equal 2*pi; physical (JM) lengths are the normal-form ones divided
by sqrt(h).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import geometry, jets
from .errors import DomainError, IntegrationError
from .geometry import BesseProfile, RotSystem, metric_coeff_B, to_besse
from .profiles import DeformationProfile

TWO_PI = 2.0 * math.pi
QUAD_TOL = 1e-9
INTEGRATION_TOL = 1e-5

_GL_CACHE: dict = {}


def _gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (x, w)
    return _GL_CACHE[n]


def _nodes_for(c: float, n_nodes: Optional[int]) -> int:
    # the integrand has poles at distance ~c from the endpoints; more nodes
    # keep the 1e-9 quadrature tolerance honest for near-collision samples
    if n_nodes is not None:
        return n_nodes
    return 64 if c >= 0.15 else 192


def ptheta_to_clairaut(h: float, p_theta: float) -> float:
    """Clairaut constant c = sqrt(h) * p_theta of the normal-form geodesic."""
    if not 0.0 < p_theta < 1.0 / math.sqrt(h):
        raise DomainError(
            f"p_theta must lie in (0, 1/sqrt(h)) = (0, {1.0 / math.sqrt(h)}); "
            f"0 is the collision orbit and the endpoint the circular one")
    return math.sqrt(h) * p_theta


def clairaut_to_ptheta(h: float, c: float) -> float:
    if not 0.0 < c < 1.0:
        raise DomainError("Clairaut constant must lie in (0, 1)")
    return c / math.sqrt(h)


def return_angle_quadrature(b: BesseProfile, c: float,
                            n_nodes: Optional[int] = None) -> float:
    """Angle swept per radial oscillation of the normal-form geodesic.

    After cos r = sqrt(1-c^2) sin t the integrand is smooth on [-pi/2, pi/2]:
    c (1 + b(sqrt(1-c^2) sin t)) / (1 - (1-c^2) sin^2 t); the odd part of b
    cancels by parity and the base integral equals pi per half-oscillation.
    """
    if not 0.0 < c < 1.0:
        raise DomainError(f"Clairaut constant must lie in (0,1), got {c}")
    t, w = _gauss_legendre(_nodes_for(c, n_nodes))
    tt = 0.5 * math.pi * t
    m = 1.0 - c * c
    s = math.sqrt(m) * np.sin(tt)
    bv = np.array([b.b(float(x)) for x in s])
    integrand = c * (1.0 + bv) / (1.0 - m * np.sin(tt) ** 2)
    return 2.0 * 0.5 * math.pi * float(np.dot(w, integrand))


def radial_period_quadrature(b: BesseProfile, c: float,
                             n_nodes: Optional[int] = None) -> float:
    """Normal-form arclength of one radial oscillation (2*pi for odd b)."""
    if not 0.0 < c < 1.0:
        raise DomainError(f"Clairaut constant must lie in (0,1), got {c}")
    t, w = _gauss_legendre(_nodes_for(c, n_nodes))
    tt = 0.5 * math.pi * t
    s = math.sqrt(1.0 - c * c) * np.sin(tt)
    bv = np.array([b.b(float(x)) for x in s])
    return 2.0 * 0.5 * math.pi * float(np.dot(w, 1.0 + bv))


# ---------------------------------------------------------------------------
# Hamiltonian flow
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitState:
    rho: float
    theta: float
    p_rho: float
    p_theta: float
    t: float = 0.0


def hamiltonian(sys: RotSystem, state: OrbitState) -> float:
    B = metric_coeff_B(sys.h, sys.f, state.rho, 0).value
    phi = sys.phi(state.rho)
    return math.exp(phi) * (state.p_rho ** 2 / (2.0 * B * B)
                            + state.p_theta ** 2 / (2.0 * state.rho ** 2)
                            - 1.0 / state.rho + sys.h / 2.0)


def hamiltonian_rhs(sys: RotSystem, state: OrbitState) -> Tuple[float, float, float, float]:
    """Exact Hamiltonian vector field of H = e^phi (p_r^2/(2B^2) + p_th^2/(2 rho^2) - 1/rho + h/2)."""
    rho, p_rho, p_theta = state.rho, state.p_rho, state.p_theta
    if not 0.0 < rho < sys.hill_radius:
        raise DomainError(f"rho={rho} outside the open Hill interval")
    Bj = metric_coeff_B(sys.h, sys.f, rho, 1)
    B, Bp = Bj.coeffs
    phij = sys.phi.jet(rho, 1)
    phi, phip = phij.coeffs
    e = math.exp(phi)
    K = p_rho ** 2 / (2.0 * B * B) + p_theta ** 2 / (2.0 * rho ** 2) - 1.0 / rho + sys.h / 2.0
    d_rho = e * p_rho / (B * B)
    d_theta = e * p_theta / (rho * rho)
    d_p_rho = -(phip * e * K + e * (1.0 / rho ** 2 - p_rho ** 2 * Bp / B ** 3
                                    - p_theta ** 2 / rho ** 3))
    return (d_rho, d_theta, d_p_rho, 0.0)


def perihelion_radius(h: float, p_theta: float) -> float:
    """Smaller root of h rho^2 - 2 rho + p_theta^2 = 0 (independent of f, phi)."""
    disc = 1.0 - h * p_theta ** 2
    if disc <= 0:
        raise DomainError("no turning point: p_theta at or above the circular value")
    return (1.0 - math.sqrt(disc)) / h


@dataclass
class OrbitTrace:
    sys: RotSystem
    p_theta: float
    times: np.ndarray
    states: np.ndarray           # rows (rho, theta, p_rho, p_theta, s_jm)
    perihelion_times: np.ndarray
    perihelion_thetas: np.ndarray
    energy_drift: float
    p_theta_drift: float
    jm_lengths: np.ndarray       # JM arclength per radial period
    dense: Callable[[float], np.ndarray]
    t_end: float

    @property
    def delta_thetas(self) -> np.ndarray:
        prev = np.concatenate(([0.0], self.perihelion_thetas[:-1]))
        return self.perihelion_thetas - prev

    def sample_at_jm_length(self, s_values: Sequence[float]) -> np.ndarray:
        """(rho, theta) points at prescribed JM arclengths along the orbit."""
        out = np.empty((len(s_values), 2))
        t_lo = 0.0
        for i, s in enumerate(s_values):
            if s <= 0.0:
                out[i] = self.dense(0.0)[:2]
                continue
            if s >= self.dense(self.t_end)[4]:
                raise ValueError(f"arclength {s} beyond the integrated trace")
            t = brentq(lambda tt: self.dense(tt)[4] - s, t_lo, self.t_end,
                       xtol=1e-14, rtol=8.9e-16)
            out[i] = self.dense(t)[:2]
            t_lo = t
        return out


def integrate_orbit(sys: RotSystem, p_theta: float, n_radial_periods: int = 1,
                    tol: float = 1e-9, rtol: float = 1e-12, atol: float = 1e-14,
                    n_samples: int = 400) -> OrbitTrace:
    """Integrate from perihelion on {H=0} through n radial periods (DOP853).

    The state carries the JM arclength as a quadrature variable
    (ds/dt = 2 e^phi (1/rho - h/2), the on-shell JM speed), which gives the
    geometric period without re-integration.
    """
    if not 0.0 < p_theta < 1.0 / math.sqrt(sys.h):
        raise DomainError(
            f"p_theta={p_theta} not in the open interval (0, {1.0 / math.sqrt(sys.h)})")
    rho0 = perihelion_radius(sys.h, p_theta)
    y0 = np.array([rho0, 0.0, 0.0, p_theta, 0.0])

    def rhs(t, y):
        d = hamiltonian_rhs(sys, OrbitState(y[0], y[1], y[2], y[3], t))
        s_dot = 2.0 * math.exp(sys.phi(y[0])) * (1.0 / y[0] - sys.h / 2.0)
        return [d[0], d[1], d[2], d[3], s_dot]

    def perihelion(t, y):
        return y[2]

    perihelion.direction = 1
    # the start may or may not register as an event; budget one extra
    perihelion.terminal = n_radial_periods + 1

    t_max = 12.0 * (n_radial_periods + 1) * TWO_PI * sys.h ** -1.5
    sol = solve_ivp(rhs, (0.0, t_max), y0, method="DOP853", dense_output=True,
                    events=[perihelion], rtol=rtol, atol=atol)
    if sol.status == -1:
        raise IntegrationError(f"integration failed: {sol.message}")
    ev_t = sol.t_events[0]
    ev_y = sol.y_events[0]
    keep = ev_t > 1e-9
    ev_t, ev_y = ev_t[keep], ev_y[keep]
    if len(ev_t) < n_radial_periods:
        raise IntegrationError(
            f"only {len(ev_t)} perihelion passages found within t={t_max}, "
            f"requested {n_radial_periods}")
    ev_t = ev_t[:n_radial_periods]
    ev_y = ev_y[:n_radial_periods]
    t_end = float(ev_t[-1])

    ts = np.linspace(0.0, t_end, n_samples)
    ys = sol.sol(ts)
    drift = max(abs(hamiltonian(sys, OrbitState(*ys[:4, i], ts[i])))
                for i in range(n_samples))
    p_drift = float(np.max(np.abs(ys[3] - p_theta)))
    if drift > tol:
        raise IntegrationError(f"energy drift {drift} exceeds tolerance {tol}")
    s_events = np.concatenate(([0.0], ev_y[:, 4]))
    return OrbitTrace(sys, p_theta, ts, ys.T, ev_t, ev_y[:, 1], drift, p_drift,
                      np.diff(s_events), sol.sol, t_end)


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------

def default_c_grid(grid_size: int) -> np.ndarray:
    """Strictly interior Clairaut grid mapped into (0.02, 0.98)."""
    u = (np.arange(grid_size) + 0.5) / (grid_size + 1)
    return 0.02 + 0.96 * u


@dataclass
class ZollReport:
    method: str
    h: float
    c_grid: np.ndarray
    p_theta_grid: Optional[np.ndarray]
    delta_thetas: np.ndarray
    periods: np.ndarray          # normal-form radial periods
    max_dtheta_dev: float
    max_period_dev: float
    tolerance: float
    energy_drift: Optional[float]
    failures: List[Tuple[float, str]] = field(default_factory=list)

    @property
    def is_zoll(self) -> bool:
        return (not self.failures and self.max_dtheta_dev < self.tolerance
                and self.max_period_dev < self.tolerance)

    @property
    def status(self) -> str:
        return "failed" if self.failures else "complete"

    @property
    def jm_length_per_period(self) -> np.ndarray:
        return self.periods / math.sqrt(self.h)


def zoll_scan(obj, grid_size: int = 32, method: str = "quadrature",
              tol: Optional[float] = None, n_nodes: Optional[int] = None,
              n_samples: int = 400) -> ZollReport:
    """Scan return angles and radial periods over a Clairaut grid.

    obj is a BesseProfile or a RotSystem for the quadrature method, and a
    RotSystem for the integration method.
    """
    if grid_size < 8:
        raise ValueError("grid_size must be >= 8")
    cs = default_c_grid(grid_size)
    if method == "quadrature":
        besse = obj if isinstance(obj, BesseProfile) else to_besse(obj.f, obj.h)
        tol = QUAD_TOL if tol is None else tol
        dthetas, periods, failures = [], [], []
        for c in cs:
            try:
                dthetas.append(return_angle_quadrature(besse, float(c), n_nodes))
                periods.append(radial_period_quadrature(besse, float(c), n_nodes))
            except Exception as exc:  # noqa: BLE001 - reported per sample
                failures.append((float(c), str(exc)))
                dthetas.append(math.nan)
                periods.append(math.nan)
        dthetas = np.array(dthetas)
        periods = np.array(periods)
        ok = ~np.isnan(dthetas)
        dev_t = float(np.max(np.abs(dthetas[ok] - TWO_PI))) if ok.any() else math.inf
        dev_p = float(np.max(np.abs(periods[ok] - TWO_PI))) if ok.any() else math.inf
        return ZollReport("quadrature", besse.h, cs, None, dthetas, periods,
                          dev_t, dev_p, tol, None, failures)

    if method == "integration":
        if not isinstance(obj, RotSystem):
            raise TypeError("integration scan requires a RotSystem")
        tol = INTEGRATION_TOL if tol is None else tol
        sqrt_h = math.sqrt(obj.h)
        p_grid = cs / sqrt_h
        dthetas, periods, failures = [], [], []
        drift = 0.0
        for c, p in zip(cs, p_grid):
            try:
                trace = integrate_orbit(obj, float(p), 1, n_samples=n_samples)
                dthetas.append(float(trace.delta_thetas[0]))
                periods.append(sqrt_h * float(trace.jm_lengths[0]))
                drift = max(drift, trace.energy_drift)
            except Exception as exc:  # noqa: BLE001
                failures.append((float(c), str(exc)))
                dthetas.append(math.nan)
                periods.append(math.nan)
        dthetas = np.array(dthetas)
        periods = np.array(periods)
        ok = ~np.isnan(dthetas)
        dev_t = float(np.max(np.abs(dthetas[ok] - TWO_PI))) if ok.any() else math.inf
        dev_p = float(np.max(np.abs(periods[ok] - TWO_PI))) if ok.any() else math.inf
        return ZollReport("integration", obj.h, cs, p_grid, dthetas, periods,
                          dev_t, dev_p, tol, drift, failures)

    raise ValueError(f"unknown method {method!r}")
