"""Exact derivative evaluation (jets) for closed-form smooth functions.

A jet holds the value and the first K derivatives of a function at a point.
Derivatives are propagated through expression trees by truncated Taylor
arithmetic, so high-order endpoint derivatives (needed by the smoothness
boundary checks) come out to rounding accuracy instead of the catastrophic
cancellation a finite-difference scheme would produce.

Expression nodes: constant, identity, polynomial, bump(a,b), sum, product,
scalar multiple, composition, reciprocal, exponential.  Expressions are
immutable after construction and evaluation is pure, so instances are safe
to share between workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

from .errors import DomainError, JetOrderError

MAX_ORDER = 16

_ENTIRE = (-math.inf, math.inf)

# exp(-z) underflows for z > ~745; beyond ~700 a bump jet is zero to double precision
_BUMP_UNDERFLOW = 700.0

_FACTORIALS = [math.factorial(k) for k in range(MAX_ORDER + 2)]


# ---------------------------------------------------------------------------
# truncated Taylor arithmetic on plain coefficient lists (a[j] = f^(j)(x0)/j!)
# ---------------------------------------------------------------------------

def taylor_add(a: Sequence[float], b: Sequence[float]) -> list:
    return [x + y for x, y in zip(a, b)]


def taylor_scale(a: Sequence[float], c: float) -> list:
    return [c * x for x in a]


def taylor_mul(a: Sequence[float], b: Sequence[float]) -> list:
    n = min(len(a), len(b)) - 1
    out = [0.0] * (n + 1)
    for i in range(n + 1):
        ai = a[i]
        if ai == 0.0:
            continue
        for j in range(n + 1 - i):
            out[i + j] += ai * b[j]
    return out


def taylor_recip(a: Sequence[float]) -> list:
    """Coefficients of 1/f given those of f; requires a[0] != 0."""
    if a[0] == 0.0:
        raise ZeroDivisionError("reciprocal of a series with vanishing constant term")
    n = len(a) - 1
    inv0 = 1.0 / a[0]
    out = [inv0] + [0.0] * n
    for k in range(1, n + 1):
        s = 0.0
        for j in range(1, k + 1):
            s += a[j] * out[k - j]
        out[k] = -inv0 * s
    return out


def taylor_div(num: Sequence[float], den: Sequence[float]) -> list:
    return taylor_mul(num, taylor_recip(den))


def taylor_exp(a: Sequence[float]) -> list:
    n = len(a) - 1
    out = [math.exp(a[0])] + [0.0] * n
    for k in range(1, n + 1):
        s = 0.0
        for j in range(1, k + 1):
            s += j * a[j] * out[k - j]
        out[k] = s / k
    return out


def taylor_compose(outer: Sequence[float], inner: Sequence[float]) -> list:
    """Series of F(G(.)) given the series of F at G(x0) and of G at x0.

    Horner evaluation of the outer polynomial in the nilpotent part of the
    inner series.
    """
    n = min(len(outer), len(inner)) - 1
    u = [0.0] + list(inner[1 : n + 1])
    out = [outer[n]] + [0.0] * n
    for k in range(n - 1, -1, -1):
        out = taylor_mul(out, u)
        out[0] += outer[k]
    return out


def derivatives_to_taylor(derivs: Sequence[float]) -> list:
    return [d / _FACTORIALS[j] for j, d in enumerate(derivs)]


def taylor_to_derivatives(coeffs: Sequence[float]) -> list:
    return [c * _FACTORIALS[j] for j, c in enumerate(coeffs)]


def poly_taylor(coeffs: Sequence[float], x: float, order: int) -> list:
    """Taylor coefficients at x of the polynomial sum(c_k t^k) (repeated Horner)."""
    a = list(coeffs) or [0.0]
    d = len(a) - 1
    for j in range(d + 1):
        for i in range(d - 1, j - 1, -1):
            a[i] += x * a[i + 1]
    a = a[: order + 1]
    return a + [0.0] * (order + 1 - len(a))


# ---------------------------------------------------------------------------
# jets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Jet:
    """Value and derivatives of a function at one point.

    coeffs[j] is the j-th derivative; order = len(coeffs) - 1.
    """

    order: int
    coeffs: Tuple[float, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.order + 1:
            raise ValueError("jet length must equal order + 1")
        if not all(math.isfinite(c) for c in self.coeffs):
            raise ValueError("jet entries must be finite")

    @property
    def value(self) -> float:
        return self.coeffs[0]

    def derivative(self, j: int) -> float:
        return self.coeffs[j]


# ---------------------------------------------------------------------------
# expression trees
# ---------------------------------------------------------------------------

_OPS = ("const", "id", "poly", "bump", "sum", "prod", "scale", "comp", "recip", "exp")


def _support_hull(supports):
    if any(s is None for s in supports):
        return None
    los = [s[0] for s in supports if s[0] <= s[1]]
    his = [s[1] for s in supports if s[0] <= s[1]]
    if not los:
        return (1.0, -1.0)  # empty
    return (min(los), max(his))


def _support_intersect(supports):
    known = [s for s in supports if s is not None]
    if not known:
        return None
    lo = max(s[0] for s in known)
    hi = min(s[1] for s in known)
    return (lo, hi)


@dataclass(frozen=True)
class SmoothFnExpr:
    """Immutable expression over smooth primitives, evaluable to jets.

    support, when not None, is a closed interval outside of which the
    function vanishes identically; products use it to skip factors (and in
    particular never evaluate a reciprocal outside its certified interval).
    """

    op: str
    args: Tuple["SmoothFnExpr", ...] = ()
    c: float = 0.0
    coeffs: Tuple[float, ...] = ()
    a: float = 0.0
    b: float = 0.0
    domain: Tuple[float, float] = _ENTIRE
    support: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.op not in _OPS:
            raise ValueError(f"unknown node kind {self.op!r}")

    # -- construction sugar -------------------------------------------------
    def __add__(self, other):
        other = _as_expr(other)
        return sum_of(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sum_of(self, scaled(_as_expr(other), -1.0))

    def __rsub__(self, other):
        return sum_of(_as_expr(other), scaled(self, -1.0))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scaled(self, float(other))
        return product_of(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return scaled(self, -1.0)

    def with_domain(self, lo: float, hi: float) -> "SmoothFnExpr":
        return SmoothFnExpr(self.op, self.args, self.c, self.coeffs, self.a,
                            self.b, (lo, hi), self.support)

    # -- evaluation ----------------------------------------------------------
    def __call__(self, x: float) -> float:
        return self.taylor_at(x, 0)[0]

    def taylor_at(self, x: float, order: int) -> list:
        """Taylor coefficients of this expression at x, to the given order."""
        if self.op == "const":
            return [self.c] + [0.0] * order
        if self.op == "id":
            out = [x] + [0.0] * order
            if order >= 1:
                out[1] = 1.0
            return out
        if self.op == "poly":
            return poly_taylor(self.coeffs, x, order)
        if self.op == "bump":
            return _bump_taylor(self.a, self.b, x, order)
        if self.op == "sum":
            out = [0.0] * (order + 1)
            for child in self.args:
                out = taylor_add(out, child.taylor_at(x, order))
            return out
        if self.op == "prod":
            for child in self.args:
                s = child.support
                if s is not None and (x < s[0] or x > s[1]):
                    # factor vanishes identically near x: so does the product
                    return [0.0] * (order + 1)
            out = self.args[0].taylor_at(x, order)
            for child in self.args[1:]:
                out = taylor_mul(out, child.taylor_at(x, order))
            return out
        if self.op == "scale":
            return taylor_scale(self.args[0].taylor_at(x, order), self.c)
        if self.op == "comp":
            inner = self.args[1].taylor_at(x, order)
            outer = self.args[0].taylor_at(inner[0], order)
            return taylor_compose(outer, inner)
        if self.op == "recip":
            if not (self.a <= x <= self.b):
                raise DomainError(
                    f"reciprocal evaluated at {x} outside certified interval "
                    f"[{self.a}, {self.b}]")
            child = self.args[0].taylor_at(x, order)
            if child[0] == 0.0:
                raise DomainError(f"reciprocal of a function vanishing at {x}")
            return taylor_recip(child)
        if self.op == "exp":
            return taylor_exp(self.args[0].taylor_at(x, order))
        raise AssertionError(self.op)


def _as_expr(v) -> SmoothFnExpr:
    if isinstance(v, SmoothFnExpr):
        return v
    return constant(float(v))


def _bump_taylor(a: float, b: float, x: float, order: int) -> list:
    if x <= a or x >= b:
        return [0.0] * (order + 1)
    p0 = (x - a) * (b - x)
    if 1.0 / p0 > _BUMP_UNDERFLOW:
        # exp(-1/p) and all its derivatives are below double precision here
        return [0.0] * (order + 1)
    p = [p0, (a + b) - 2.0 * x, -1.0] + [0.0] * max(0, order - 2)
    return taylor_exp(taylor_scale(taylor_recip(p[: order + 1]), -1.0))


# -- node constructors -------------------------------------------------------

def constant(v: float) -> SmoothFnExpr:
    sup = (1.0, -1.0) if v == 0.0 else None
    return SmoothFnExpr("const", c=float(v), support=sup)


def identity() -> SmoothFnExpr:
    return SmoothFnExpr("id")


def polynomial(coeffs: Iterable[float]) -> SmoothFnExpr:
    cs = tuple(float(c) for c in coeffs)
    if not cs:
        cs = (0.0,)
    sup = (1.0, -1.0) if all(c == 0.0 for c in cs) else None
    return SmoothFnExpr("poly", coeffs=cs, support=sup)


def affine(c0: float, c1: float) -> SmoothFnExpr:
    return polynomial([c0, c1])


def make_bump(a: float, b: float) -> SmoothFnExpr:
    """exp(-1/((x-a)(b-x))) on (a,b), identically zero outside."""
    if not a < b:
        raise ValueError(f"bump requires a < b, got a={a}, b={b}")
    return SmoothFnExpr("bump", a=float(a), b=float(b), support=(float(a), float(b)))


def normalized_bump(a: float, b: float) -> SmoothFnExpr:
    """Bump on (a,b) rescaled to peak value 1 at the midpoint."""
    w = b - a
    z = 4.0 / (w * w)
    if z > _BUMP_UNDERFLOW:
        raise ValueError(f"bump width {w} too narrow to normalize in double precision")
    return scaled(make_bump(a, b), math.exp(z))


def sum_of(*fs: SmoothFnExpr) -> SmoothFnExpr:
    fs = tuple(fs)
    return SmoothFnExpr("sum", args=fs, support=_support_hull([f.support for f in fs]))


def product_of(*fs: SmoothFnExpr) -> SmoothFnExpr:
    fs = tuple(fs)
    return SmoothFnExpr("prod", args=fs, support=_support_intersect([f.support for f in fs]))


def scaled(f: SmoothFnExpr, c: float) -> SmoothFnExpr:
    sup = (1.0, -1.0) if c == 0.0 else f.support
    return SmoothFnExpr("scale", args=(f,), c=float(c), support=sup)


def compose(outer: SmoothFnExpr, inner: SmoothFnExpr) -> SmoothFnExpr:
    """outer(inner(x)).  Support is tracked when inner is affine."""
    sup = None
    if outer.support is not None and inner.op == "poly" and len(inner.coeffs) == 2 \
            and inner.coeffs[1] != 0.0:
        c0, c1 = inner.coeffs
        lo = (outer.support[0] - c0) / c1
        hi = (outer.support[1] - c0) / c1
        sup = (min(lo, hi), max(lo, hi)) if outer.support[0] <= outer.support[1] else (1.0, -1.0)
    return SmoothFnExpr("comp", args=(outer, inner), support=sup)


def reciprocal(f: SmoothFnExpr, nonvanishing: Tuple[float, float]) -> SmoothFnExpr:
    """1/f, restricted to a certified interval on which f does not vanish."""
    lo, hi = float(nonvanishing[0]), float(nonvanishing[1])
    if not lo < hi:
        raise ValueError("certified nonvanishing interval must be nonempty")
    return SmoothFnExpr("recip", args=(f,), a=lo, b=hi)


def exponential(f: SmoothFnExpr) -> SmoothFnExpr:
    return SmoothFnExpr("exp", args=(f,))


def shift_arg(f: SmoothFnExpr, delta: float) -> SmoothFnExpr:
    """x -> f(x - delta)."""
    return compose(f, affine(-float(delta), 1.0))


def reflect_arg(f: SmoothFnExpr, center: float) -> SmoothFnExpr:
    """x -> f(2*center - x)."""
    return compose(f, affine(2.0 * float(center), -1.0))


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def eval_jet(fn: SmoothFnExpr, x: float, order: int) -> Jet:
    """Jet of fn at x: value and derivatives up to the requested order."""
    if order < 0 or order > MAX_ORDER:
        raise JetOrderError(f"jet order must be in [0, {MAX_ORDER}], got {order}")
    lo, hi = fn.domain
    if not (lo - 1e-12 <= x <= hi + 1e-12):
        raise DomainError(f"point {x} outside declared domain [{lo}, {hi}]")
    coeffs = fn.taylor_at(float(x), order)
    return Jet(order, tuple(taylor_to_derivatives(coeffs)))


def antisymmetrize(fn: SmoothFnExpr, center: float = 0.0) -> SmoothFnExpr:
    """Odd part of fn about the given center: (fn(x) - fn(2c - x)) / 2."""
    lo, hi = fn.domain
    if math.isfinite(lo) or math.isfinite(hi):
        if abs((lo + hi) - 2.0 * center) > 1e-12:
            raise DomainError(
                f"domain [{lo}, {hi}] is not symmetric about {center}")
    return scaled(sum_of(fn, scaled(reflect_arg(fn, center), -1.0)), 0.5).with_domain(lo, hi)


def fd_validate(fn: SmoothFnExpr, x: float, order: int, step: float) -> float:
    """|jet derivative - central finite difference|; test instrumentation."""
    if step <= 0:
        raise ValueError("step must be positive")
    exact = eval_jet(fn, x, order).coeffs[order]
    if order == 0:
        return 0.0
    acc = 0.0
    for k in range(order + 1):
        acc += (-1.0) ** k * math.comb(order, k) * fn(x + (order / 2.0 - k) * step)
    fd = acc / step ** order
    return abs(exact - fd)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

def to_dict(fn: SmoothFnExpr) -> dict:
    d: dict = {"op": fn.op}
    if fn.op in ("const", "scale"):
        d["c"] = fn.c
    if fn.op == "poly":
        d["coeffs"] = list(fn.coeffs)
    if fn.op in ("bump", "recip"):
        d["a"] = fn.a
        d["b"] = fn.b
    if fn.args:
        d["args"] = [to_dict(ch) for ch in fn.args]
    if fn.domain != _ENTIRE:
        d["domain"] = list(fn.domain)
    if fn.support is not None:
        d["support"] = list(fn.support)
    return d


def from_dict(d: dict) -> SmoothFnExpr:
    op = d["op"]
    args = tuple(from_dict(ch) for ch in d.get("args", ()))
    if op == "const":
        out = constant(d["c"])
    elif op == "id":
        out = identity()
    elif op == "poly":
        out = polynomial(d["coeffs"])
    elif op == "bump":
        out = make_bump(d["a"], d["b"])
    elif op == "sum":
        out = sum_of(*args)
    elif op == "prod":
        out = product_of(*args)
    elif op == "scale":
        out = scaled(args[0], d["c"])
    elif op == "comp":
        out = compose(args[0], args[1])
    elif op == "recip":
        out = reciprocal(args[0], (d["a"], d["b"]))
    elif op == "exp":
        out = exponential(args[0])
    else:
        raise ValueError(f"unknown node kind {op!r}")
    if "domain" in d:
        out = out.with_domain(*d["domain"])
    if "support" in d:
        out = SmoothFnExpr(out.op, out.args, out.c, out.coeffs, out.a, out.b,
                           out.domain, tuple(d["support"]))
    return out


def to_json(fn: SmoothFnExpr) -> str:
    return json.dumps(to_dict(fn), sort_keys=True)


def from_json(s: str) -> SmoothFnExpr:
    return from_dict(json.loads(s))
