"""Reflection-law extensions: Zoll deformations shared by several energies.

A deformation at the top level h_1 extends to lower levels h_i < h_1 through
an extension f~ of the profile to [1 - 2 h_1/h_n, 1].  Writing
G(x) = f~(x)/(1-x^2), the induced profile at level h_i is odd exactly when G
is odd under the reflection about -xi_i, xi_i = h_1/h_i - 1.  Everything
here manipulates G as a sum of compactly supported pieces, so reflections
and periodic copies are exact (residuals at rounding level) and the
1/(1-x^2) factor is never evaluated at its poles.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from . import jets
from .errors import LadderError, SupportError
from .jets import SmoothFnExpr, affine, compose, polynomial, product_of, scaled, sum_of
from .profiles import DeformationProfile

Number = Union[int, float, Fraction]

CASE_EQ_RTOL = 1e-12
RATIONAL_MAX_DEN = 10 ** 6
RATIONAL_TOL = 1e-9


class Case(enum.Enum):
    CASE1 = "case1"   # xi > 1
    CASE2 = "case2"   # xi = 1
    CASE3 = "case3"   # 0 < xi < 1


def xi_values(energies: Sequence[Number]) -> tuple:
    """xi_i = h_1/h_i - 1 for a strictly decreasing positive ladder."""
    hs = list(energies)
    if len(hs) < 1 or any(h <= 0 for h in hs):
        raise LadderError("energies must be positive")
    for a, b in zip(hs, hs[1:]):
        if not b < a:
            raise LadderError(f"energies must be strictly decreasing, got {a} -> {b}")
    h1 = hs[0]
    out = []
    for h in hs:
        if isinstance(h1, (int, Fraction)) and isinstance(h, (int, Fraction)):
            out.append(Fraction(h1, 1) / Fraction(h, 1) - 1)
        else:
            out.append(float(h1) / float(h) - 1.0)
    return tuple(out)


def classify_pair(h: float, kappa: float) -> Case:
    if not h > kappa > 0:
        raise LadderError(f"need h > kappa > 0, got h={h}, kappa={kappa}")
    xi = float(h) / float(kappa) - 1.0
    if abs(xi - 1.0) <= CASE_EQ_RTOL:
        return Case.CASE2
    return Case.CASE1 if xi > 1.0 else Case.CASE3


@dataclass(frozen=True)
class EnergyLadder:
    energies: Tuple[Number, ...]

    def __post_init__(self):
        xi_values(self.energies)  # validates

    @property
    def xis(self) -> tuple:
        return xi_values(self.energies)

    @property
    def cases(self) -> List[Case]:
        return [classify_pair(float(a), float(b))
                for a, b in zip(self.energies, self.energies[1:])]


@dataclass
class Stage:
    label: str
    segment: Tuple[float, float]
    sup_norm: float = math.nan


@dataclass
class ExtendedProfile:
    """Extension f~ on [1 - 2 h_1/h_n, 1] together with its G and build log."""

    ftilde: SmoothFnExpr
    G: SmoothFnExpr
    domain: Tuple[float, float]
    energies: Tuple[float, ...]
    xis: Tuple[float, ...]
    stages: List[Stage]
    case: str
    gamma: Optional[Fraction] = None

    def restriction(self) -> DeformationProfile:
        return DeformationProfile(self.ftilde.with_domain(-1.0, 1.0))

    def __call__(self, x: float) -> float:
        return self.ftilde(float(x))


# ---------------------------------------------------------------------------
# G-piece helpers
# ---------------------------------------------------------------------------

def _g_of_core(core_fn: SmoothFnExpr, support: Tuple[float, float]) -> SmoothFnExpr:
    """core/(1-x^2) with the reciprocal certified strictly inside (-1,1)."""
    lo, hi = support
    if lo > hi:  # identically zero core
        return jets.constant(0.0)
    pad_lo = 0.5 * (lo - 1.0)
    pad_hi = 0.5 * (hi + 1.0)
    recip = jets.reciprocal(polynomial([1.0, 0.0, -1.0]), (pad_lo, pad_hi))
    return product_of(core_fn, recip)


def _g_of_extension(ext_fn: SmoothFnExpr, support: Tuple[float, float]) -> SmoothFnExpr:
    lo, hi = support
    if lo > hi:
        return jets.constant(0.0)
    recip = jets.reciprocal(polynomial([1.0, 0.0, -1.0]),
                            (lo - 1e-9, hi + 1e-9))
    return product_of(ext_fn, recip)


def _reflect_piece(piece: SmoothFnExpr, center: float) -> SmoothFnExpr:
    """New G piece y -> -piece(2*center - y) from odd reflection about center."""
    return scaled(compose(piece, affine(2.0 * center, -1.0)), -1.0)


def _require_support(fn: SmoothFnExpr, inside: Tuple[float, float], what: str,
                     closed: bool = False) -> Tuple[float, float]:
    sup = fn.support
    if sup is None:
        raise SupportError(f"{what} must have a known compact support")
    lo, hi = sup
    if lo > hi:  # identically zero
        return sup
    a, b = inside
    ok = (a <= lo and hi <= b) if closed else (a < lo and hi < b)
    if not ok:
        raise SupportError(
            f"{what} support [{lo}, {hi}] must lie {'in' if closed else 'strictly inside'} "
            f"({a}, {b})")
    return sup


def _check_odd(fn: SmoothFnExpr, what: str, n: int = 64, tol: float = 1e-9) -> None:
    xs = np.linspace(0.01, 0.99, n)
    scale = max(1.0, max(abs(fn(float(x))) for x in xs))
    worst = max(abs(fn(float(x)) + fn(float(-x))) for x in xs)
    if worst > tol * scale:
        raise SupportError(f"{what} must be odd; grid violation {worst}")


def _ftilde_from_G(G: SmoothFnExpr, dom_lo: float) -> SmoothFnExpr:
    return product_of(polynomial([1.0, 0.0, -1.0]), G).with_domain(dom_lo, 1.0)


def _fill_sup_norms(ext: ExtendedProfile, n: int = 512) -> None:
    for st in ext.stages:
        lo = max(st.segment[0], ext.domain[0])
        hi = min(st.segment[1], ext.domain[1])
        xs = np.linspace(lo, hi, n)
        st.sup_norm = max(abs(ext.ftilde(float(x))) for x in xs)


def _periodic_odd_G(seed: SmoothFnExpr, half_period: float, dom_lo: float) -> SmoothFnExpr:
    """Sum of 2*half_period-translates of the odd pair seed(x) - seed(-x)."""
    odd_pair = sum_of(seed, scaled(compose(seed, affine(0.0, -1.0)), -1.0))
    lo, hi = odd_pair.support
    step = 2.0 * half_period
    n_min = math.floor((dom_lo - hi) / step)
    n_max = math.ceil((1.0 - lo) / step)
    pieces = []
    for n in range(n_min, n_max + 1):
        s_lo, s_hi = lo + n * step, hi + n * step
        if s_hi < dom_lo or s_lo > 1.0:
            continue
        pieces.append(compose(odd_pair, affine(-n * step, 1.0)) if n else odd_pair)
    return sum_of(*pieces) if pieces else jets.constant(0.0)


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------

def extend_pair(h: float, kappa: float, core: Optional[DeformationProfile] = None,
                seed: Optional[SmoothFnExpr] = None,
                extension: Optional[SmoothFnExpr] = None) -> ExtendedProfile:
    """Two-level extension for the pair (h, kappa), h > kappa.

    Cases with xi = h/kappa - 1 >= 1 take an odd core compactly supported in
    (-1,1) (plus an optional extension piece supported in (-xi,-1)) and
    reflect it about -xi; the close-energy case 0 < xi < 1 takes a seed
    compactly supported in (-xi, 0), read as G restricted there, and builds
    the 2*xi-periodic odd G it generates.
    """
    case = classify_pair(h, kappa)
    xi = float(h) / float(kappa) - 1.0
    dom_lo = -1.0 - 2.0 * xi

    if case in (Case.CASE1, Case.CASE2):
        if core is None:
            raise ValueError(f"{case.value} requires an odd core profile")
        sup = _require_support(core.fn, (-1.0, 1.0), "core")
        _check_odd(core.fn, "core")
        pieces = [_g_of_core(core.fn, sup)]
        if extension is not None:
            if case is Case.CASE2:
                raise SupportError("case 2 leaves no room for an extension piece")
            esup = _require_support(extension, (-xi, -1.0), "extension")
            pieces.append(_g_of_extension(extension, esup))
        pieces += [_reflect_piece(p, -xi) for p in pieces]
        G = sum_of(*pieces)
        stages = [Stage("core on [-1,1]", (-1.0, 1.0)),
                  Stage(f"odd reflection of G about -xi = {-xi:g}", (dom_lo, -xi))]
    else:
        if seed is None:
            raise ValueError("case 3 requires a seed (G restricted to (-xi, 0))")
        _require_support(seed, (-xi, 0.0), "seed", closed=True)
        G = _periodic_odd_G(seed, xi, dom_lo)
        stages = [Stage("core region [-1,1]", (-1.0, 1.0)),
                  Stage(f"reflected region via {2 * xi:g}-periodic odd G", (dom_lo, -1.0))]

    ext = ExtendedProfile(_ftilde_from_G(G, dom_lo), G, (dom_lo, 1.0),
                          (float(h), float(kappa)), (0.0, xi), stages, case.value)
    _fill_sup_norms(ext)
    return ext


def extend_chain(core: DeformationProfile, energies: Sequence[float]) -> ExtendedProfile:
    """Chained reflections for a ladder with ratio >= 2 between adjacent levels."""
    hs = [float(h) for h in energies]
    xis = xi_values(hs)
    if len(hs) < 2:
        raise LadderError("a chain needs at least two energies")
    for i, (a, b) in enumerate(zip(hs, hs[1:])):
        if a < 2.0 * b * (1.0 - 1e-12):
            raise LadderError(
                f"chain requires h_i >= 2 h_(i+1); pair (h_{i + 1}, h_{i + 2}) = "
                f"({a}, {b}) has ratio {a / b:.6g} < 2")
    sup = _require_support(core.fn, (-1.0, 1.0), "core")
    _check_odd(core.fn, "core")
    pieces = [_g_of_core(core.fn, sup)]
    stages = [Stage("core on [-1,1]", (-1.0, 1.0))]
    for i in range(1, len(hs)):
        xi = float(xis[i])
        pieces = pieces + [_reflect_piece(p, -xi) for p in pieces]
        stages.append(Stage(f"odd reflection of G about -xi_{i + 1} = {-xi:g}",
                            (-1.0 - 2.0 * xi, -xi)))
    dom_lo = -1.0 - 2.0 * float(xis[-1])
    G = sum_of(*pieces)
    ext = ExtendedProfile(_ftilde_from_G(G, dom_lo), G, (dom_lo, 1.0),
                          tuple(hs), tuple(float(x) for x in xis), stages, "chain")
    _fill_sup_norms(ext)
    return ext


def rational_gamma(xis: Sequence[Union[int, Fraction]]) -> Fraction:
    """gcd of positive rationals: the minimal positive integer combination."""
    fr = []
    for x in xis:
        if not isinstance(x, (int, Fraction)):
            raise LadderError(f"rational_gamma needs exact rationals, got {x!r}")
        q = Fraction(x)
        if q <= 0:
            raise LadderError(f"xi values must be positive, got {q}")
        fr.append(q)
    if not fr:
        raise LadderError("empty xi list")
    g = fr[0]
    for q in fr[1:]:
        g = Fraction(math.gcd(g.numerator * q.denominator, q.numerator * g.denominator),
                     g.denominator * q.denominator)
    return g


def detect_rational(x: Number, max_den: int = RATIONAL_MAX_DEN,
                    tol: float = RATIONAL_TOL) -> Optional[Fraction]:
    """Continued-fraction reconstruction; None when x looks irrational.

    A float is read as the rational p/q when the minimal-denominator
    approximant within tol has q <= max_den and is anomalously good
    (err * q^2 << 1, i.e. the next partial quotient is huge).  Every double
    admits approximants with err <= tol at q ~ 1/sqrt(err), so the residual
    bound alone cannot decide; the quotient criterion is what discriminates
    floats of true rationals (err at rounding scale) from irrationals.
    """
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    x = float(x)
    full = Fraction(x)
    if abs(float(full.limit_denominator(max_den)) - x) > tol:
        return None
    lo, hi = 1, max_den
    while lo < hi:
        mid = (lo + hi) // 2
        if abs(float(full.limit_denominator(mid)) - x) <= tol:
            hi = mid
        else:
            lo = mid + 1
    cand = full.limit_denominator(lo)
    err = abs(float(cand) - x)
    if err * cand.denominator ** 2 < 1e-3:
        return cand
    return None


def exact_xis(energies: Sequence[Number]) -> tuple:
    """xi values as exact Fractions; raises when some xi resists reconstruction."""
    xis = xi_values(energies)
    out = []
    for i, x in enumerate(xis):
        q = detect_rational(x)
        if q is None:
            raise LadderError(
                f"xi_{i + 1} = {x} is not rational within tolerance "
                f"(denominator bound {RATIONAL_MAX_DEN}, residual {RATIONAL_TOL})")
        out.append(q)
    return tuple(out)


def build_multi_profile(seed: SmoothFnExpr, energies: Sequence[Number]) -> ExtendedProfile:
    """Multi-level profile from a seed supported in (0, gamma) or (-gamma, 0).

    The seed is read as G on its side of 0; oddness about 0 and
    2*gamma-periodicity extend it over the whole domain, which satisfies the
    reflection law about every -xi_i since each xi_i is an integer multiple
    of gamma.  Sign convention: G = f~/(1-x^2).
    """
    xis = exact_xis(energies)
    if len(xis) < 2:
        raise LadderError("need at least two energies")
    gamma = rational_gamma(xis[1:])
    g = float(gamma)
    sup = seed.support
    if sup is None:
        raise SupportError("seed must have a known compact support")
    if not (0.0 <= sup[0] and sup[1] <= g) and not (-g <= sup[0] and sup[1] <= 0.0):
        raise SupportError(
            f"seed support {sup} must lie in (0, gamma) or (-gamma, 0), gamma = {gamma}")
    dom_lo = -1.0 - 2.0 * float(xis[-1])
    G = _periodic_odd_G(seed, g, dom_lo)
    stages = [Stage("core region [-1,1]", (-1.0, 1.0))]
    for i in range(1, len(xis)):
        prev_lo = -1.0 - 2.0 * float(xis[i - 1])
        stages.append(Stage(f"extension to level h_{i + 1} (xi = {float(xis[i]):g})",
                            (-1.0 - 2.0 * float(xis[i]), prev_lo)))
    ext = ExtendedProfile(_ftilde_from_G(G, dom_lo), G, (dom_lo, 1.0),
                          tuple(float(h) for h in energies),
                          tuple(float(x) for x in xis), stages, "periodic", gamma)
    _fill_sup_norms(ext)
    return ext


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def induced_profile(ext: ExtendedProfile, level: int) -> DeformationProfile:
    """Deformation profile F_i at ladder level i (1-based):
    F_i(y) = (1+xi_i)(1-y^2) G((1+xi_i) y - xi_i)."""
    xi = float(ext.xis[level - 1])
    expr = scaled(product_of(polynomial([1.0, 0.0, -1.0]),
                             compose(ext.G, affine(-xi, 1.0 + xi))),
                  1.0 + xi).with_domain(-1.0, 1.0)
    return DeformationProfile(expr)


def verify_F_oddness(ext: ExtendedProfile, grid_size: int = 512) -> List[float]:
    """Max grid residual |F_i(y) + F_i(-y)| per ladder level."""
    need_lo = -1.0 - 2.0 * float(ext.xis[-1])
    if ext.domain[0] > need_lo + 1e-12:
        raise LadderError(
            f"profile domain {ext.domain} does not cover [{need_lo}, 1]")
    ys = np.linspace(0.0, 1.0, grid_size)
    out = []
    for i in range(1, len(ext.xis) + 1):
        F = induced_profile(ext, i).fn
        out.append(max(abs(F(float(y)) + F(float(-y))) for y in ys))
    return out


def reflection_residuals(ext: ExtendedProfile, grid_size: int = 256) -> List[float]:
    """Max residual of the G reflection law about each -xi_i on overlap grids."""
    out = []
    for xi in ext.xis:
        xi = float(xi)
        lo = max(ext.domain[0], -1.0 - 2.0 * xi)
        xs = np.linspace(lo, min(1.0, -2.0 * xi - lo), grid_size)
        worst = 0.0
        for x in xs:
            rx = -2.0 * xi - float(x)
            if rx < ext.domain[0] - 1e-12 or rx > ext.domain[1] + 1e-12:
                continue
            worst = max(worst, abs(ext.G(float(x)) + ext.G(rx)))
        out.append(worst)
    return out


def extension_sup_norms(ext: ExtendedProfile) -> List[float]:
    """Per-stage sup of |f~|, in construction order (base segment first)."""
    return [st.sup_norm for st in ext.stages]


# ---------------------------------------------------------------------------
# dense-orbit rigidity procedure
# ---------------------------------------------------------------------------

@dataclass
class ReflectionOrbit:
    xi_kappa: float
    xi_ell: float
    points: List[float]          # sorted visited points
    gammas: List[float]          # derived step halves, decreasing
    gap: float                   # covering gap of [-1,1] by the visited set
    steps_taken: int
    stalled: bool
    reason: str                  # "target" | "stall" | "max_steps"


def _covering_gap(points: List[float]) -> float:
    pts = sorted(points)
    gap = max(pts[0] - (-1.0), 1.0 - pts[-1])
    for a, b in zip(pts, pts[1:]):
        gap = max(gap, b - a)
    return gap


def reflection_orbit(xi_kappa: Number, xi_ell: Number, target_gap: float,
                     max_steps: int = 100_000) -> ReflectionOrbit:
    """Greedy dense-orbit construction from the rigidity argument.

    Starting from 0, translate by +-2 xi_kappa, +-2 xi_ell and by the derived
    +-2 gamma_m (subtractive-Euclid remainders), never leaving [-1,1].  With
    rationally dependent inputs the Euclid recursion bottoms out and the gap
    stalls at a positive value; otherwise gamma_m decreases to 0 and the
    visited set becomes target_gap-dense.
    """
    exact = isinstance(xi_kappa, (int, Fraction)) and isinstance(xi_ell, (int, Fraction))
    xk = Fraction(xi_kappa) if exact else float(xi_kappa)
    xl = Fraction(xi_ell) if exact else float(xi_ell)
    if not (0 < xl < xk):
        raise LadderError(f"need 0 < xi_ell < xi_kappa, got ({xi_kappa}, {xi_ell})")
    if not xk + xl < 1:
        raise LadderError(
            f"smallness condition xi_kappa + xi_ell < 1 violated: {xk + xl}")

    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    steps = [2 * xk, 2 * xl]
    a, b = xk, xl
    gammas: List[float] = []
    visited = {zero}
    moves = 0
    reason = "max_steps"
    stalled = False

    def closure() -> bool:
        """Expand under the current steps; True once the gap target is met."""
        nonlocal moves
        from collections import deque
        queue = deque(sorted(visited, key=lambda v: (abs(v), -v)))
        since_check = 0
        while queue and moves < max_steps:
            x = queue.popleft()
            cands = []
            for s in steps:
                for c in (x + s, x - s):
                    if -one <= c <= one and c not in visited:
                        cands.append(c)
            cands.sort(key=lambda v: (abs(v), -v))
            for c in cands:
                if c not in visited and moves < max_steps:
                    visited.add(c)
                    moves += 1
                    since_check += 1
                    queue.append(c)
            if since_check >= 256:
                since_check = 0
                if _covering_gap([float(p) for p in visited]) < target_gap:
                    return True
        return _covering_gap([float(p) for p in visited]) < target_gap

    while True:
        if closure():
            reason = "target"
            break
        gap = _covering_gap([float(p) for p in visited])
        if moves >= max_steps:
            reason = "max_steps"
            break
        # derive the next translation from the Euclid recursion on (a, b)
        if exact:
            r = a - (a // b) * b
            if r == 0:
                stalled, reason = True, "stall"
                break
        else:
            q = math.floor(a / b + 1e-12)
            r = a - q * b
            if r <= 1e-12 * max(1.0, float(xk)):
                stalled, reason = True, "stall"
                break
        gammas.append(float(r))
        steps.append(2 * r)
        a, b = b, r

    pts = sorted(float(p) for p in visited)
    return ReflectionOrbit(float(xk), float(xl), pts, gammas,
                           _covering_gap(pts), moves, stalled, reason)


# ---------------------------------------------------------------------------
# rationality / rigidity classification of a ladder (CLI front end)
# ---------------------------------------------------------------------------

@dataclass
class LadderDiagnosis:
    xis: tuple
    rational: List[Optional[Fraction]]
    rigidity_pair: Optional[Tuple[int, int]]   # 1-based xi indices
    all_rational: bool

    @property
    def rigid(self) -> bool:
        return self.rigidity_pair is not None


def diagnose_ladder(energies: Sequence[Number]) -> LadderDiagnosis:
    """Classify a ladder: rationally dependent, or in the rigidity regime.

    A pair (xi_i, xi_j) with irrational ratio and xi_i + xi_j < 1 forces the
    zero profile; pairs are scanned in index order.
    """
    xis = xi_values(energies)
    rats = [detect_rational(x) for x in xis]
    rigidity_pair = None
    for i in range(1, len(xis)):
        for j in range(i + 1, len(xis)):
            xi_i, xi_j = float(xis[i]), float(xis[j])
            if rats[i] is not None and rats[j] is not None:
                continue  # rationally dependent pair
            if 0.0 < xi_i + xi_j < 1.0:
                rigidity_pair = (i + 1, j + 1)
                break
        if rigidity_pair:
            break
    return LadderDiagnosis(xis, rats, rigidity_pair,
                           all(r is not None for r in rats))


def snap_rational(values: Sequence[float], eps: float,
                  max_den: int = RATIONAL_MAX_DEN) -> List[Fraction]:
    """Smallest-denominator rational within eps of each value (continued fractions)."""
    out = []
    for v in values:
        v = float(v)
        den = 1
        while den <= max_den:
            cand = Fraction(v).limit_denominator(den)
            if abs(float(cand) - v) <= eps:
                out.append(cand)
                break
            den *= 2
        else:
            raise LadderError(f"cannot snap {v} to a rational within {eps}")
    return out


# ---------------------------------------------------------------------------
# serialization (jets schema plus construction log)
# ---------------------------------------------------------------------------

def extended_to_dict(ext: ExtendedProfile) -> dict:
    d = {"kind": "extended",
         "expr": jets.to_dict(ext.ftilde),
         "G": jets.to_dict(ext.G),
         "domain": list(ext.domain),
         "energies": list(ext.energies),
         "xis": list(ext.xis),
         "case": ext.case,
         "log": [{"label": s.label, "segment": list(s.segment),
                  "sup_norm": s.sup_norm} for s in ext.stages]}
    if ext.gamma is not None:
        d["gamma"] = str(ext.gamma)
    return d


def extended_from_dict(d: dict) -> ExtendedProfile:
    stages = [Stage(s["label"], tuple(s["segment"]), s["sup_norm"])
              for s in d["log"]]
    gamma = Fraction(d["gamma"]) if "gamma" in d else None
    return ExtendedProfile(jets.from_dict(d["expr"]), jets.from_dict(d["G"]),
                           tuple(d["domain"]), tuple(d["energies"]),
                           tuple(d["xis"]), stages, d["case"], gamma)
