"""Hilbert transform, Schwarz integral and planar (squared-kernel) transform.

The transform of a real function h (integrable against dPi) is computed from
the compensated singular kernel

    Hh(x) = (1/pi) p.v. integral [ 1/(x-t) + t/(1+t^2) ] h(t) dt,

whose analytic sibling, the Schwarz integral

    Sh(z) = (1/(pi i)) integral [ 1/(t-z) - t/(1+t^2) ] h(t) dt,   Im z > 0,

has real part equal to the Poisson extension of h and imaginary boundary
values Hh.  With this normalization Sh(i) is real and the transform of a
constant is zero.

Quadrature design.  On the grid span the interpolant is piecewise linear, so
every cell integral -- including the principal value across the singular
cell -- has a closed form in logarithms.  Summed over cells and rearranged
by parts, the Cauchy part becomes

    c_first(x) log|x-t_0|  -  c_last(x) log|x-t_M|
        + sum_k (b_k - b_{k-1}) * phi(x - t_k)  -  (h_M - h_0),

with phi(u) = u log|u| (continuous through u = 0), b_k the cell slopes and
c_*(x) the boundary cell lines extended to x.  The log terms at interior
knots cancel exactly, which is what makes the principal value exact for
linear interpolants.  At the two span-edge knots the principal value only
exists if the tail model matches the boundary sample exactly, so those two
points are computed with a finite symmetric exclusion (radius = adjacent
cell width) and flagged low confidence.

Power tails c |t|^p (p < 1) are integrated in closed form after the
regrouping 1/(x-t) + t/(1+t^2) = -x/(t(t-x)) - 1/(t(1+t^2)), both pieces
separately convergent; the remaining one-dimensional profile

    G_q(r) = integral_1^inf s^q / (s-r) ds = 2F1(1, -q; 1-q; r) / (-q)

is evaluated with scipy's Gauss hypergeometric for real r and by
series/quadrature for complex arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import hyp2f1

from .errors import DivergentTail
from .grid import (SampledFunction, TailModel, _power_over_cauchy, absolute,
                   pi_measure)

try:  # pragma: no cover - exercised implicitly
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

__all__ = [
    "HalfPlanePoint",
    "hilbert_transform",
    "schwarz_integral",
    "planar_hilbert",
    "weak_l1_profile",
    "hilbert_matrix",
]


@dataclass(frozen=True)
class HalfPlanePoint:
    """A point x + iy strictly inside the upper half-plane."""

    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError("HalfPlanePoint requires y > 0")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


def _as_upper_point(z) -> complex:
    if isinstance(z, HalfPlanePoint):
        return z.z
    z = complex(z)
    if not z.imag > 0:
        raise ValueError("evaluation point must lie in the open upper half-plane")
    return z


# ---------------------------------------------------------------------------
# kernels


if _HAVE_NUMBA:

    @numba.njit(parallel=True, cache=True)
    def _philog_kernel(x, knots, w):  # pragma: no cover - compiled
        n = x.shape[0]
        m = knots.shape[0]
        out = np.zeros(n)
        for i in numba.prange(n):
            acc = 0.0
            xi = x[i]
            for k in range(m):
                u = xi - knots[k]
                if u != 0.0:
                    acc += w[k] * u * np.log(np.abs(u))
            out[i] = acc
        return out

else:

    def _philog_kernel(x, knots, w, block=1024):
        out = np.zeros(x.shape[0])
        for i0 in range(0, x.shape[0], block):
            u = x[i0:i0 + block, None] - knots[None, :]
            a = np.abs(u)
            np.log(a, out=a, where=a > 0)
            out[i0:i0 + block] = (u * a) @ w
        return out


def _g_profile(q: float, r: np.ndarray) -> np.ndarray:
    """G_q(r) = integral_1^inf s^q/(s-r) ds for q < 0, real r < 1."""
    if q >= 0:
        raise DivergentTail(f"tail profile exponent q={q} must be negative")
    r = np.asarray(r, dtype=float)
    if np.any(r >= 1.0):
        raise ValueError("G_q requires r < 1")
    return hyp2f1(1.0, -q, 1.0 - q, r) / (-q)


def _g_profile_complex(q: float, r: complex) -> complex:
    """G_q(r) for complex r off [1, inf); series for small |r|, else quadrature."""
    if q >= 0:
        raise DivergentTail(f"tail profile exponent q={q} must be negative")
    if abs(r) <= 0.7:
        total = 0.0 + 0.0j
        rk = 1.0 + 0.0j
        for k in range(200):
            term = rk / (k - q)
            total += term
            rk *= r
            if abs(rk) / (k + 1 - q) < 1e-17 * max(abs(total), 1e-300):
                break
        return total
    re = quad(lambda u: (u ** (-q - 1.0) / (1.0 - r * u)).real, 0.0, 1.0,
              epsabs=1e-13, epsrel=1e-12)[0]
    im = quad(lambda u: (u ** (-q - 1.0) / (1.0 - r * u)).imag, 0.0, 1.0,
              epsabs=1e-13, epsrel=1e-12)[0]
    return complex(re, im)


def _g2_profile_complex(q: float, r: complex) -> complex:
    """integral_1^inf s^q/(s-r)^2 ds for q < 1, complex r off [1, inf)."""
    if q >= 1:
        raise DivergentTail(f"squared-kernel tail exponent q={q} must be < 1")
    if abs(r) <= 0.7:
        total = 0.0 + 0.0j
        rk = 1.0 + 0.0j
        for k in range(200):
            term = (k + 1.0) * rk / (k + 1.0 - q)
            total += term
            rk *= r
            if (k + 2.0) * abs(rk) / (k + 2.0 - q) < 1e-17 * max(abs(total), 1e-300):
                break
        return total
    re = quad(lambda u: (u ** (-q) / (1.0 - r * u) ** 2).real, 0.0, 1.0,
              epsabs=1e-13, epsrel=1e-12)[0]
    im = quad(lambda u: (u ** (-q) / (1.0 - r * u) ** 2).imag, 0.0, 1.0,
              epsabs=1e-13, epsrel=1e-12)[0]
    return complex(re, im)


def _require_pi_integrable(f: SampledFunction):
    for tail in (f.tail_plus, f.tail_minus):
        if tail.coeff != 0.0 and tail.exponent >= 1.0:
            raise DivergentTail(
                f"tail exponent {tail.exponent} on side {tail.side} is not "
                "Pi-integrable"
            )


# ---------------------------------------------------------------------------
# Hilbert transform on the grid


def _cauchy_tail_terms(f: SampledFunction, x: np.ndarray,
                       start_plus: float, start_minus: float) -> np.ndarray:
    """Tail part of the compensated kernel integral, vectorized over x."""
    out = np.zeros_like(x)
    tp, tm = f.tail_plus, f.tail_minus
    if tp.coeff != 0.0:
        Xp = start_plus
        q = tp.exponent - 1.0
        out += (-tp.coeff) * x * Xp ** q * _g_profile(q, x / Xp)
        out += (-tp.coeff) * _power_over_cauchy(q, Xp)
    if tm.coeff != 0.0:
        Xm = start_minus
        q = tm.exponent - 1.0
        out += (-tm.coeff) * x * Xm ** q * _g_profile(q, -x / Xm)
        out += tm.coeff * _power_over_cauchy(q, Xm)
    return out


def _grid_compensator(f: SampledFunction) -> float:
    """integral over the span of t*h(t)/(1+t^2), exact per cell."""
    t0, t1 = f.xs[:-1], f.xs[1:]
    y0, y1 = f.ys[:-1], f.ys[1:]
    b = (y1 - y0) / (t1 - t0)
    a = y0 - b * t0
    term = (b * (t1 - t0)
            + 0.5 * a * (np.log1p(t1 * t1) - np.log1p(t0 * t0))
            - b * (np.arctan(t1) - np.arctan(t0)))
    return float(np.sum(term))


def _cauchy_grid_direct(f: SampledFunction, x: float, skip_first=False,
                        skip_last=False) -> float:
    """Direct cell-sum Cauchy part at a single x (used at the seam knots)."""
    t, y = f.xs, f.ys
    j0 = 1 if skip_first else 0
    j1 = t.size - 2 if skip_last else t.size - 1
    total = 0.0
    for j in range(j0, j1):
        b = (y[j + 1] - y[j]) / (t[j + 1] - t[j])
        c = y[j] + b * (x - t[j])
        total += c * (np.log(abs(x - t[j])) - np.log(abs(x - t[j + 1])))
        total -= b * (t[j + 1] - t[j])
    return total


def hilbert_transform(h: SampledFunction, return_info: bool = False):
    """Hilbert transform of h, returned on the same grid.

    The two span-edge knots are computed with a finite symmetric exclusion
    (the principal value across the grid/tail seam does not exist exactly
    unless the models match the samples) and are reported as low confidence
    together with their immediate neighbours when ``return_info`` is set.
    """
    _require_pi_integrable(h)
    t, y = h.xs, h.ys
    M = t.size - 1
    x = t.copy()
    b = (y[1:] - y[:-1]) / (t[1:] - t[:-1])

    # interior points: closed-form principal value
    c_first = y[0] + b[0] * (x - t[0])
    c_last = y[M] + b[M - 1] * (x - t[M])
    with np.errstate(divide="ignore", invalid="ignore"):
        L0 = np.log(np.abs(x - t[0]))
        LM = np.log(np.abs(x - t[M]))
    vals = np.zeros_like(x)
    if M >= 2:
        w = b[1:] - b[:-1]
        vals += _philog_kernel(x, t[1:-1].copy(), w.copy())
    vals[1:] += c_first[1:] * L0[1:]
    vals[:-1] -= c_last[:-1] * LM[:-1]
    vals -= y[M] - y[0]
    vals += _grid_compensator(h)

    Xp = abs(t[-1])
    Xm = abs(t[0])
    # the boundary points get their own exclusion-shifted tails below
    vals[1:-1] += _cauchy_tail_terms(h, x[1:-1], Xp, Xm)

    # seam points: symmetric exclusion of radius = adjacent cell width
    # (_cauchy_grid_direct already carries the per-cell slope terms)
    d_lo = t[1] - t[0]
    v_lo = _cauchy_grid_direct(h, t[0], skip_first=True)
    v_lo += _grid_compensator(h)
    v_lo += float(_cauchy_tail_terms(h, np.array([t[0]]), Xp, Xm + d_lo)[0])
    vals[0] = v_lo

    d_hi = t[M] - t[M - 1]
    v_hi = _cauchy_grid_direct(h, t[M], skip_last=True)
    v_hi += _grid_compensator(h)
    v_hi += float(_cauchy_tail_terms(h, np.array([t[M]]), Xp + d_hi, Xm)[0])
    vals[M] = v_hi

    vals /= np.pi
    # Under the compensated kernel the transform tends to the constant
    # c_inf = (1/pi) integral t h dPi at both infinities; a power model can
    # carry either the plateau or a decay, so pick whichever dominates at
    # the edges (transforming a constant gives zero, so a plateau model
    # feeds correctly into chained transforms).
    c_inf = _transform_plateau(h)
    edge_resid = max(abs(vals[-3] - (c_inf or 0.0)),
                     abs(vals[2] - (c_inf or 0.0)))
    if c_inf is not None and abs(c_inf) > 3.0 * edge_resid:
        tp = TailModel(0.0, c_inf, abs(t[-1]), "plus")
        tm = TailModel(0.0, c_inf, abs(t[0]), "minus")
    else:
        tp = _fit_power_tail(t, vals, "plus")
        tm = _fit_power_tail(t, vals, "minus")
    out = SampledFunction(t, vals, tp, tm)
    if return_info:
        low_conf = np.zeros(t.size, dtype=bool)
        low_conf[:2] = True
        low_conf[-2:] = True
        return out, {"low_confidence": low_conf}
    return out


def _transform_plateau(h: SampledFunction):
    """(1/pi) integral t h dPi: the limit of the transform at infinity.

    None when a tail makes the integral diverge (then no limit exists).
    """
    total = _grid_compensator(h)
    for tail, edge, sgn in ((h.tail_plus, abs(h.xs[-1]), 1.0),
                            (h.tail_minus, abs(h.xs[0]), -1.0)):
        if tail.coeff == 0.0:
            continue
        if tail.exponent >= 0.0:
            return None
        total += sgn * tail.coeff * _power_over_cauchy(tail.exponent + 1.0,
                                                       max(edge, tail.cutoff))
    return total / np.pi


def _fit_power_tail(xs, ys, side) -> TailModel:
    """Log-log fit of the outer clean decade; zero model when unstable."""
    n = xs.size
    k = max(8, n // 8)
    if side == "plus":
        xx, yy = xs[-k - 2:-2], ys[-k - 2:-2]
        cutoff = abs(xs[-1])
    else:
        xx, yy = xs[2:k + 2], ys[2:k + 2]
        cutoff = abs(xs[0])
    cutoff = max(cutoff, 1e-9)
    mask = np.abs(xx) > 0
    xx, yy = xx[mask], yy[mask]
    if xx.size < 4 or np.any(yy == 0.0):
        return TailModel.zero(side, cutoff)
    sign = np.sign(yy)
    if not (np.all(sign == sign[0])):
        return TailModel.zero(side, cutoff)
    lx = np.log(np.abs(xx))
    ly = np.log(np.abs(yy))
    p, logc = np.polyfit(lx, ly, 1)
    if not np.isfinite(p) or p > 0.99:
        return TailModel.zero(side, cutoff)
    return TailModel(float(p), float(sign[0] * np.exp(logc)), cutoff, side)


# ---------------------------------------------------------------------------
# Schwarz integral


def schwarz_integral(h: SampledFunction, z) -> complex:
    """Sh(z) = (1/(pi i)) integral [1/(t-z) - t/(1+t^2)] h(t) dt, Im z > 0."""
    _require_pi_integrable(h)
    z = _as_upper_point(z)
    t, y = h.xs, h.ys
    b = (y[1:] - y[:-1]) / (t[1:] - t[:-1])
    a = y[:-1] - b * t[:-1]
    # per-cell: integral (a+bt)/(t-z) dt = b*dt + (a+bz) log((t1-z)/(t0-z))
    lg = np.log(t[1:] - z) - np.log(t[:-1] - z)
    total = np.sum(b * (t[1:] - t[:-1]) + (a + b * z) * lg)
    total -= _grid_compensator(h)

    tp, tm = h.tail_plus, h.tail_minus
    if tp.coeff != 0.0:
        Xp = abs(t[-1])
        q = tp.exponent - 1.0
        total += tp.coeff * (z * Xp ** q * _g_profile_complex(q, z / Xp)
                             + _power_over_cauchy(q, Xp))
    if tm.coeff != 0.0:
        Xm = abs(t[0])
        q = tm.exponent - 1.0
        total += tm.coeff * (z * Xm ** q * _g_profile_complex(q, -z / Xm)
                             - _power_over_cauchy(q, Xm))
    return complex(total / (np.pi * 1j))


def planar_hilbert(hminus: SampledFunction, z) -> complex:
    """integral hminus(t)/(t-z)^2 dt for nonnegative hminus, Im z > 0."""
    if np.min(hminus.ys) < -1e-12 or hminus.tail_plus.coeff < 0 \
            or hminus.tail_minus.coeff < 0:
        raise ValueError("planar transform requires a nonnegative function")
    _require_pi_integrable(hminus)
    z = _as_upper_point(z)
    t, y = hminus.xs, hminus.ys
    b = (y[1:] - y[:-1]) / (t[1:] - t[:-1])
    a = y[:-1] - b * t[:-1]
    # antiderivative of (a+bt)/(t-z)^2 is -(a+bt)/(t-z) + b log(t-z)
    edge = -(a + b * t[1:]) / (t[1:] - z) + (a + b * t[:-1]) / (t[:-1] - z)
    lg = np.log(t[1:] - z) - np.log(t[:-1] - z)
    total = np.sum(edge + b * lg)

    tp, tm = hminus.tail_plus, hminus.tail_minus
    if tp.coeff != 0.0:
        Xp = abs(t[-1])
        total += tp.coeff * Xp ** (tp.exponent - 1.0) \
            * _g2_profile_complex(tp.exponent, z / Xp)
    if tm.coeff != 0.0:
        Xm = abs(t[0])
        total += tm.coeff * Xm ** (tm.exponent - 1.0) \
            * _g2_profile_complex(tm.exponent, -z / Xm)
    return complex(total)


# ---------------------------------------------------------------------------
# weak-L1 diagnostics


def weak_l1_profile(f: SampledFunction, levels):
    """[(A, Pi{|f| > A})] for each level A, grid part exact, tails closed form."""
    levels = list(levels)
    if any(a <= 0 for a in levels):
        raise ValueError("levels must be positive")
    if levels != sorted(levels):
        raise ValueError("levels must be increasing")
    g = absolute(f)
    out = []
    for A in levels:
        meas = _superlevel_measure_grid(g, A)
        meas += _superlevel_measure_tail(g.tail_plus, abs(g.xs[-1]), A, "plus")
        meas += _superlevel_measure_tail(g.tail_minus, abs(g.xs[0]), A, "minus")
        out.append((float(A), float(meas)))
    return out


def _superlevel_measure_grid(g: SampledFunction, A: float) -> float:
    t, y = g.xs, g.ys
    total = 0.0
    for j in range(t.size - 1):
        y0, y1 = y[j], y[j + 1]
        x0, x1 = t[j], t[j + 1]
        if y0 <= A and y1 <= A:
            continue
        if y0 > A and y1 > A:
            total += pi_measure(x0, x1)
            continue
        xc = x0 + (A - y0) * (x1 - x0) / (y1 - y0)
        if y0 > A:
            total += pi_measure(x0, xc)
        else:
            total += pi_measure(xc, x1)
    return total


def _superlevel_measure_tail(tail: TailModel, edge: float, A: float,
                             side: str) -> float:
    c, p = abs(tail.coeff), tail.exponent
    if c == 0.0:
        return 0.0
    X = max(edge, tail.cutoff)
    if p == 0.0:
        reach = np.inf if c > A else X
    elif p < 0.0:
        # c t^p > A on [X, R), R = (A/c)^(1/p)
        reach = (A / c) ** (1.0 / p)
    else:
        # increasing: superlevel beyond max(X, (A/c)^(1/p)) is unbounded
        start = max(X, (A / c) ** (1.0 / p))
        return float(np.pi / 2 - np.arctan(start))
    if reach <= X:
        return 0.0
    hi = np.pi / 2 if np.isinf(reach) else np.arctan(reach)
    return float(hi - np.arctan(X))


# ---------------------------------------------------------------------------
# dense transform matrix (zero-tail functions on a fixed grid)


def hilbert_matrix(xs) -> np.ndarray:
    """Matrix H with (H y) = Hilbert transform values on the grid.

    Valid for functions with zero tail models; the two seam rows use the
    same finite-exclusion rule as :func:`hilbert_transform`.
    """
    t = np.asarray(xs, dtype=float)
    n = t.size
    M = n - 1
    dt = np.diff(t)
    B = np.zeros((M, n))
    idx = np.arange(M)
    B[idx, idx] = -1.0 / dt
    B[idx, idx + 1] = 1.0 / dt

    H = np.zeros((n, n))
    if M >= 2:
        Wmat = B[1:] - B[:-1]
        U = t[:, None] - t[None, 1:-1]
        A = np.abs(U)
        with np.errstate(divide="ignore"):
            Phi = np.where(A > 0, U * np.log(np.where(A > 0, A, 1.0)), 0.0)
        H += Phi @ Wmat

    with np.errstate(divide="ignore"):
        L0 = np.log(np.abs(t - t[0]))
        LM = np.log(np.abs(t - t[M]))
    L0[0] = np.log(dt[0])   # finite-exclusion seam value
    LM[M] = np.log(dt[M - 1])

    e0 = np.zeros(n); e0[0] = 1.0
    eM = np.zeros(n); eM[M] = 1.0
    H += np.outer(L0, e0) + (L0 * (t - t[0]))[:, None] * B[0][None, :]
    H -= np.outer(LM, eM) + (LM * (t - t[M]))[:, None] * B[M - 1][None, :]
    H += np.outer(np.ones(n), e0 - eM)

    # compensator row: integral t*h/(1+t^2) as a linear functional of y
    dlog = 0.5 * (np.log1p(t[1:] ** 2) - np.log1p(t[:-1] ** 2))
    dat = np.arctan(t[1:]) - np.arctan(t[:-1])
    comp = np.zeros(n)
    for j in range(M):
        comp += (dt[j] - dat[j] + dlog[j] * (-t[j])) * B[j]
        comp[j] += dlog[j]
    H += np.outer(np.ones(n), comp)
    return H / np.pi
