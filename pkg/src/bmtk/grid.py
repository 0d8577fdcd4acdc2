"""Real-line functions on finite nonuniform grids with power-law tails.

Everything downstream of this module manipulates real functions known on a
finite, strictly increasing grid.  Between knots the function is the
piecewise-linear interpolant (fixed; interval extraction and tent
constructions are exact on linear pieces).  Outside the grid span the
function is extrapolated by a one-sided power-law model  c * |x|**p,  which
keeps every tail integral in closed form.

The reference measure throughout is the Cauchy weight

    dPi(x) = dx / (1 + x**2),

and ``pi_integral`` evaluates integrals against it exactly on the linear
pieces (arctan/log antiderivatives) plus a convergent tail series.

Phases (continuous arguments of unimodular symbols) are carried by
:class:`PhaseFunction`: a sampled base together with a growth class
``kappa`` and asymptotic slope coefficients, tied to the tail models by
slope ~ s * |x|**kappa  <=>  tail ~ s/(kappa+1) * |x|**(kappa+1).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from .errors import DivergentTail, SingularWeight, TailMismatch

__all__ = [
    "TailModel",
    "SampledFunction",
    "PhaseFunction",
    "evaluate",
    "pi_integral",
    "weighted_l1_norm",
    "geometric_grid",
    "load_sampled_function",
    "save_sampled_function",
]

# Tail series are evaluated directly for cutoffs beyond this; smaller
# cutoffs get an exact quadrature bridge up to it.
_SERIES_SAFE_X = 2.0
_SEAM_RTOL_DEFAULT = 0.10


# ---------------------------------------------------------------------------
# tail models


@dataclass(frozen=True)
class TailModel:
    """One-sided extrapolation model  f(x) ~ coeff * |x|**exponent.

    Valid for |x| >= cutoff on the given side ('plus' or 'minus').
    """

    exponent: float
    coeff: float
    cutoff: float
    side: str  # 'plus' | 'minus'

    def __post_init__(self):
        if self.side not in ("plus", "minus"):
            raise ValueError("side must be 'plus' or 'minus'")
        if not (self.cutoff > 0):
            raise ValueError("cutoff must be positive")

    def value(self, x):
        """Model value at x (array ok); caller guarantees the side."""
        return self.coeff * np.abs(np.asarray(x, dtype=float)) ** self.exponent

    @staticmethod
    def zero(side, cutoff=1.0):
        return TailModel(exponent=0.0, coeff=0.0, cutoff=cutoff, side=side)


def _tail_pi_integral(tail: TailModel, start: float) -> float:
    """integral_start^inf  coeff * t**p / (1+t**2) dt  in closed form.

    ``start`` is the |x| value at which the model takes over (the grid edge,
    never below the model cutoff in normal use).
    """
    if tail.coeff == 0.0:
        return 0.0
    if tail.exponent >= 1.0:
        raise DivergentTail(
            f"tail exponent {tail.exponent} >= 1 is not Pi-integrable"
        )
    return tail.coeff * _power_over_cauchy(tail.exponent, start)


def _power_over_cauchy(p: float, X: float) -> float:
    """integral_X^inf t**p / (1+t**2) dt  for p < 1, X > 0.

    For X >= _SERIES_SAFE_X the alternating series in X**-2 is summed to
    machine precision; below that an exact quadrature bridges up to the
    safe point.
    """
    if X <= 0:
        raise ValueError("X must be positive")
    total = 0.0
    if X < _SERIES_SAFE_X:
        bridge, _ = quad(lambda t: t**p / (1.0 + t * t), X, _SERIES_SAFE_X,
                         epsabs=1e-14, epsrel=1e-13)
        total += bridge
        X = _SERIES_SAFE_X
    # sum_m (-1)^m X^(p-1-2m) / (2m+1-p)
    term_pow = X ** (p - 1.0)
    ratio = X ** (-2.0)
    s = 0.0
    for m in range(400):
        term = term_pow / (2 * m + 1 - p)
        s += term if m % 2 == 0 else -term
        term_pow *= ratio
        if term_pow / max(2 * m + 3 - p, 1.0) < 1e-18 * max(abs(s), 1e-300):
            break
    return total + s


# ---------------------------------------------------------------------------
# sampled functions


@dataclass(frozen=True)
class SampledFunction:
    """Piecewise-linear function on a strictly increasing grid plus tails."""

    xs: np.ndarray
    ys: np.ndarray
    tail_plus: TailModel
    tail_minus: TailModel

    def __post_init__(self):
        xs = np.ascontiguousarray(self.xs, dtype=float)
        ys = np.ascontiguousarray(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape:
            raise ValueError("xs and ys must be 1-d arrays of equal length")
        if xs.size < 2:
            raise ValueError("need at least two grid points")
        if not np.all(np.diff(xs) > 0):
            raise ValueError("xs must be strictly increasing")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValueError("grid data must be finite")
        xs.flags.writeable = False
        ys.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    # -- construction ------------------------------------------------------

    @staticmethod
    def from_samples(xs, ys, tail_plus=None, tail_minus=None, check_seam=True,
                     seam_rtol=_SEAM_RTOL_DEFAULT):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if tail_plus is None:
            tail_plus = TailModel.zero("plus", cutoff=max(abs(xs[-1]), 1e-9))
        if tail_minus is None:
            tail_minus = TailModel.zero("minus", cutoff=max(abs(xs[0]), 1e-9))
        f = SampledFunction(xs, ys, tail_plus, tail_minus)
        if check_seam:
            f.validate_seams(rtol=seam_rtol)
        return f

    @staticmethod
    def from_callable(fn, xs, tail_plus=None, tail_minus=None, check_seam=True):
        xs = np.asarray(xs, dtype=float)
        return SampledFunction.from_samples(xs, fn(xs), tail_plus, tail_minus,
                                            check_seam=check_seam)

    def validate_seams(self, rtol=_SEAM_RTOL_DEFAULT):
        """Enforce the tail/sample consistency contract at both span edges."""
        for tail, x_edge, y_edge in (
            (self.tail_plus, self.xs[-1], self.ys[-1]),
            (self.tail_minus, self.xs[0], self.ys[0]),
        ):
            if tail.coeff == 0.0:
                continue
            span_lo, span_hi = abs(self.xs[0]), abs(self.xs[-1])
            if not (tail.cutoff <= max(span_lo, span_hi)):
                raise TailMismatch("tail cutoff lies outside the grid span")
            model = float(tail.value(x_edge))
            scale = max(abs(model), abs(y_edge))
            if abs(model - y_edge) > rtol * scale:
                raise TailMismatch(
                    f"tail model value {model:.6g} vs sample {y_edge:.6g} "
                    f"at edge {x_edge:.6g} (side {tail.side})"
                )

    # -- basic queries -----------------------------------------------------

    @property
    def span(self):
        return float(self.xs[0]), float(self.xs[-1])

    def __call__(self, x):
        return evaluate(self, x)

    def slopes(self):
        """Per-cell slopes of the interpolant, length len(xs)-1."""
        return np.diff(self.ys) / np.diff(self.xs)

    # -- pointwise algebra (merged grids, compatible tails) -----------------

    def _merged_with(self, other):
        lo = max(self.xs[0], other.xs[0])
        hi = min(self.xs[-1], other.xs[-1])
        if not lo < hi:
            raise ValueError("grids do not overlap")
        xs = np.union1d(self.xs, other.xs)
        xs = xs[(xs >= lo) & (xs <= hi)]
        return xs

    def combine(self, other, ca=1.0, cb=1.0):
        """ca*self + cb*other on the merged grid (tails must be combinable)."""
        xs = self._merged_with(other)
        ys = ca * evaluate(self, xs) + cb * evaluate(other, xs)
        tp = _combine_tails(self.tail_plus, other.tail_plus, ca, cb, "plus")
        tm = _combine_tails(self.tail_minus, other.tail_minus, ca, cb, "minus")
        return SampledFunction(xs, ys, tp, tm)

    def scale(self, c):
        tp = TailModel(self.tail_plus.exponent, c * self.tail_plus.coeff,
                       self.tail_plus.cutoff, "plus")
        tm = TailModel(self.tail_minus.exponent, c * self.tail_minus.coeff,
                       self.tail_minus.cutoff, "minus")
        return SampledFunction(self.xs, c * self.ys, tp, tm)


def _combine_tails(a: TailModel, b: TailModel, ca, cb, side):
    cutoff = max(a.cutoff, b.cutoff)
    if a.coeff == 0.0 and b.coeff == 0.0:
        return TailModel.zero(side, cutoff)
    if a.coeff == 0.0:
        return TailModel(b.exponent, cb * b.coeff, cutoff, side)
    if b.coeff == 0.0:
        return TailModel(a.exponent, ca * a.coeff, cutoff, side)
    if a.exponent != b.exponent:
        raise ValueError(
            "cannot combine tails with different exponents "
            f"({a.exponent} vs {b.exponent})"
        )
    return TailModel(a.exponent, ca * a.coeff + cb * b.coeff, cutoff, side)


def evaluate(f: SampledFunction, x):
    """Interpolant inside the span, tail model outside (array ok)."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.interp(x, f.xs, f.ys)
    hi = x > f.xs[-1]
    lo = x < f.xs[0]
    if np.any(hi):
        out[hi] = f.tail_plus.value(x[hi])
    if np.any(lo):
        out[lo] = f.tail_minus.value(x[lo])
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# integration against the Cauchy measure


def _cell_pi_integrals(xs, ys):
    """Exact per-cell integral of the interpolant against dx/(1+x^2)."""
    x0, x1 = xs[:-1], xs[1:]
    y0, y1 = ys[:-1], ys[1:]
    b = (y1 - y0) / (x1 - x0)
    a = y0 - b * x0
    at = np.arctan(x1) - np.arctan(x0)
    lg = 0.5 * (np.log1p(x1 * x1) - np.log1p(x0 * x0))
    return a * at + b * lg


def pi_integral(f: SampledFunction) -> float:
    """integral of f against dPi = dx/(1+x^2), grid part exact, tails closed form."""
    core = float(np.sum(_cell_pi_integrals(f.xs, f.ys)))
    t_plus = _tail_pi_integral(f.tail_plus, max(f.xs[-1], f.tail_plus.cutoff))
    t_minus = _tail_pi_integral(f.tail_minus, max(-f.xs[0], f.tail_minus.cutoff))
    return core + t_plus + t_minus


def pi_measure(a: float, b: float) -> float:
    """Pi-measure of the interval (a, b)."""
    return math.atan(b) - math.atan(a)


def _insert_knots(f: SampledFunction, pts) -> SampledFunction:
    pts = np.asarray(pts, dtype=float)
    pts = pts[(pts > f.xs[0]) & (pts < f.xs[-1])]
    if pts.size == 0:
        return f
    xs = np.union1d(f.xs, pts)
    return SampledFunction(xs, evaluate(f, xs), f.tail_plus, f.tail_minus)


def absolute(f: SampledFunction) -> SampledFunction:
    """|f| as a sampled function, with knots inserted at sign changes."""
    y0, y1 = f.ys[:-1], f.ys[1:]
    cross = np.nonzero((y0 * y1) < 0)[0]
    roots = f.xs[cross] - y0[cross] * (f.xs[cross + 1] - f.xs[cross]) / (y1[cross] - y0[cross])
    g = _insert_knots(f, roots)
    tp = TailModel(g.tail_plus.exponent, abs(g.tail_plus.coeff),
                   g.tail_plus.cutoff, "plus")
    tm = TailModel(g.tail_minus.exponent, abs(g.tail_minus.coeff),
                   g.tail_minus.cutoff, "minus")
    return SampledFunction(g.xs, np.abs(g.ys), tp, tm)


def restrict(f: SampledFunction, a: float, b: float) -> SampledFunction:
    """f * 1_(a,b) with exact knots at the cut points and zero tails."""
    g = _insert_knots(f, [a, b])
    ys = np.where((g.xs >= a) & (g.xs <= b), g.ys, 0.0)
    # zero just outside the cut knots so the interpolant drops cleanly
    return SampledFunction(g.xs, ys,
                           TailModel.zero("plus", g.tail_plus.cutoff),
                           TailModel.zero("minus", g.tail_minus.cutoff))


def _abs_power_antideriv(q: float):
    """Antiderivative of |x|**q on a fixed-sign interval, as a callable."""
    if q == -1.0:
        return lambda x: math.copysign(1.0, x) * math.log(abs(x))
    return lambda x: math.copysign(1.0, x) * abs(x) ** (q + 1.0) / (q + 1.0)


def _linear_against_abs_power(x0, x1, y0, y1, q):
    """integral_{x0}^{x1} (linear through (x0,y0),(x1,y1)) * |x|**q dx.

    The interval must not contain 0 in its interior.
    """
    if x0 == x1:
        return 0.0
    b = (y1 - y0) / (x1 - x0)
    a = y0 - b * x0
    F1 = _abs_power_antideriv(q)
    F2 = _abs_power_antideriv(q + 1.0)
    sgn = 1.0 if (x0 + x1) > 0 else -1.0  # sign of x on the interval
    return a * (F1(x1) - F1(x0)) + b * sgn * (F2(x1) - F2(x0))


def weighted_l1_norm(f: SampledFunction, kappa: float) -> float:
    """integral |f(x)| |x|**(-2-kappa) dx over the line.

    The function must vanish identically on a neighborhood of 0; the outer
    part (|x| >= 1) and the regularized core part (vanishing-hole to 1) are
    both exact on the linear pieces, tails in closed form.
    """
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    g = absolute(f)
    xs, ys = g.xs, g.ys
    q = -2.0 - kappa
    total = 0.0
    for j in range(xs.size - 1):
        x0, x1 = xs[j], xs[j + 1]
        y0, y1 = ys[j], ys[j + 1]
        if y0 == 0.0 and y1 == 0.0:
            continue
        if x0 < 0.0 < x1 or x0 == 0.0 or x1 == 0.0:
            raise SingularWeight(
                "function does not vanish identically near 0; the weight "
                f"|x|**({q}) is not integrable there"
            )
        total += _linear_against_abs_power(x0, x1, y0, y1, q)
    for tail, edge in ((g.tail_plus, abs(xs[-1])), (g.tail_minus, abs(xs[0]))):
        if tail.coeff == 0.0:
            continue
        p = tail.exponent
        if p >= kappa + 1.0:
            raise DivergentTail(
                f"tail exponent {p} >= kappa+1 = {kappa + 1.0}; weighted "
                "L1 norm diverges"
            )
        X = max(edge, tail.cutoff)
        total += abs(tail.coeff) * X ** (p - 1.0 - kappa) / (kappa + 1.0 - p)
    return total


# ---------------------------------------------------------------------------
# phases


@dataclass(frozen=True)
class PhaseFunction:
    """Continuous phase gamma with growth class kappa and asymptotic slopes.

    The slope coefficients describe gamma'(x) ~ slope_* |x|**kappa at the
    corresponding infinity; the base tails carry the integrated model
    |x|**(kappa+1) with coefficients slope/(kappa+1) (plus side) and
    -slope/(kappa+1) (minus side).
    """

    base: SampledFunction
    kappa: float
    slope_plus: float
    slope_minus: float

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")

    @staticmethod
    def from_samples(xs, ys, kappa, slope_plus, slope_minus,
                     check_seam=False, cutoff_frac=0.5):
        """Build a phase with tails consistent with the declared slopes."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        cut_p = max(abs(xs[-1]) * cutoff_frac, 1e-9)
        cut_m = max(abs(xs[0]) * cutoff_frac, 1e-9)
        tp = TailModel(kappa + 1.0, slope_plus / (kappa + 1.0), cut_p, "plus")
        tm = TailModel(kappa + 1.0, -slope_minus / (kappa + 1.0), cut_m, "minus")
        base = SampledFunction.from_samples(xs, ys, tp, tm, check_seam=check_seam)
        return PhaseFunction(base, float(kappa), float(slope_plus),
                             float(slope_minus))

    @property
    def xs(self):
        return self.base.xs

    @property
    def ys(self):
        return self.base.ys

    def __call__(self, x):
        return evaluate(self.base, x)

    def minus(self, other: "PhaseFunction", a: float) -> "PhaseFunction":
        """self - a*other, defined on the overlap of the two grids."""
        if self.kappa != other.kappa:
            raise ValueError("phases have different growth classes")
        xs = self.base._merged_with(other.base)
        ys = evaluate(self.base, xs) - a * evaluate(other.base, xs)
        return PhaseFunction.from_samples(
            xs, ys, self.kappa,
            self.slope_plus - a * other.slope_plus,
            self.slope_minus - a * other.slope_minus,
        )


def linear_phase(slope, kappa=0.0, window=50.0, n=2001):
    """Phase s*x (kappa=0) or s*sign(x)|x|^(k+1)/(k+1) style power ramp.

    Convenience used across tests and the CLI: the phase whose derivative
    is slope * |x|**kappa on both sides.
    """
    xs = np.linspace(-window, window, n)
    ys = slope * np.sign(xs) * np.abs(xs) ** (kappa + 1.0) / (kappa + 1.0)
    return PhaseFunction.from_samples(xs, ys, kappa, slope, slope)


# ---------------------------------------------------------------------------
# grids and file formats


def geometric_grid(xmax, n_per_side, x0=None, symmetric=True):
    """Symmetric grid geometric away from 0, clustered near the origin.

    Keeps the relative cell size roughly constant so |x|**kappa varies by a
    bounded factor per cell (the recommended layout for phase work).
    """
    if x0 is None:
        x0 = xmax * 1e-4
    pos = np.geomspace(x0, xmax, n_per_side)
    lin = np.linspace(0.0, x0, max(4, n_per_side // 50), endpoint=False)
    pos = np.unique(np.concatenate([lin[1:], pos]))
    if symmetric:
        return np.concatenate([-pos[::-1], [0.0], pos])
    return np.concatenate([[0.0], pos])


def save_sampled_function(f: SampledFunction, csv_path):
    """CSV with header x,value plus a JSON tail sidecar next to it."""
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["x", "value"])
        for x, y in zip(f.xs, f.ys):
            wr.writerow([repr(float(x)), repr(float(y))])
    sidecar = {
        "tail_plus": {"exponent": f.tail_plus.exponent,
                      "coeff": f.tail_plus.coeff,
                      "cutoff": f.tail_plus.cutoff},
        "tail_minus": {"exponent": f.tail_minus.exponent,
                       "coeff": f.tail_minus.coeff,
                       "cutoff": f.tail_minus.cutoff},
    }
    with open(csv_path.with_suffix(".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_sampled_function(csv_path, check_seam=True) -> SampledFunction:
    """Inverse of :func:`save_sampled_function`; sidecar optional (zero tails)."""
    csv_path = Path(csv_path)
    xs, ys = [], []
    with open(csv_path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if [h.strip() for h in header[:2]] != ["x", "value"]:
            raise ValueError(f"unexpected CSV header {header!r}")
        for row in rd:
            if not row:
                continue
            xs.append(float(row[0]))
            ys.append(float(row[1]))
    sidecar_path = csv_path.with_suffix(".json")
    tp = tm = None
    if sidecar_path.exists():
        with open(sidecar_path) as fh:
            sc = json.load(fh)
        tp = TailModel(sc["tail_plus"]["exponent"], sc["tail_plus"]["coeff"],
                       sc["tail_plus"]["cutoff"], "plus")
        tm = TailModel(sc["tail_minus"]["exponent"], sc["tail_minus"]["coeff"],
                       sc["tail_minus"]["cutoff"], "minus")
    return SampledFunction.from_samples(np.asarray(xs), np.asarray(ys), tp, tm,
                                        check_seam=check_seam)
