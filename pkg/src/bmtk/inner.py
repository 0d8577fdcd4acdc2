"""Meromorphic inner functions: Blaschke products, level-set models, phases.

Three interchangeable representations, all evaluable on the line and in the
open upper half-plane:

* BlaschkeProduct -- a finite product of half-plane factors
  c_k (z - w_k)/(z - conj(w_k)), zeros w_k in the upper half-plane,
  unimodular constants normalizing each factor to be positive at i (the
  factor with zero exactly i is (i - z)/(i + z)).

* KreinShift -- prescribed intertwining level sets {Theta = 1} = {a_n},
  {Theta = -1} = {b_n}.  With E the union of the (a_n, b_n) and
  u = 1_E - 1/2, the analytic function W = exp(pi i (Su + ic)) has
  positive real part in the upper half-plane, and

      Theta = (W - 1) / (W + 1)

  is inner with exactly the prescribed level sets (worth noting: the
  reciprocal (W+1)/(W-1) has the same level sets but modulus >= 1, so the
  contractive branch is the one used).  Su is a finite sum of compensated
  logarithms, so real-axis values are exactly unimodular and everything
  evaluates in closed form:

      W(x) = -i e^{-pi c} prod_n sqrt((1+a_n^2)/(1+b_n^2)) (b_n-x)/(a_n-x).

* PhasePrescribed -- boundary values e^{i theta(x)} for a given continuous
  phase; half-plane evaluation goes through the Krein construction when
  the phase is strictly increasing.

The phase-matching constructor solves sigma(a_n) = 2 pi n on the grid and
takes midpoints for the b_n.  Point masses of the two boundary measures
(the Herglotz representations of +-(1+Theta)/(1-Theta)) are extracted by
Richardson extrapolation of eps * Re[(1+Theta)/(1-Theta)](a_n + i eps),
whose limit is the mass at a_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (AtLevelPoint, LevelSetMismatch, NotIncreasing,
                     NotIntertwining, ZeroOnBoundary)
from .grid import PhaseFunction

__all__ = [
    "InnerFunctionModel",
    "BlaschkeProduct",
    "KreinShift",
    "PhasePrescribed",
    "blaschke_eval",
    "krein_shift",
    "phase_to_inner",
    "clark_masses",
    "arg_derivative",
    "continuous_argument",
]

_CLARK_EPS = (1e-3, 5e-4, 2.5e-4)


# ---------------------------------------------------------------------------
# Blaschke products


def _factor_constant(w: complex) -> complex:
    """Unimodular constant making the factor positive at i (or (i-z)/(i+z))."""
    if w == 1j:
        return -1.0 + 0.0j  # -(z-i)/(z+i) = (i-z)/(i+z)
    num = 1j - np.conj(w)
    den = 1j - w
    return (num / den) * (abs(den) / abs(num))


def blaschke_eval(zeros, z, multiplicities=None):
    """Finite Blaschke product with zeros in the upper half-plane at z.

    z may be real or in the closed upper half-plane (arrays ok); evaluation
    exactly at a boundary accumulation of zeros is rejected.
    """
    zs = [complex(w) for w in zeros]
    if any(w.imag <= 0 for w in zs):
        raise ValueError("Blaschke zeros must lie in the open upper half-plane")
    if multiplicities is None:
        multiplicities = [1] * len(zs)
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag < -1e-15):
        raise ValueError("evaluation only on the closed upper half-plane")
    out = np.ones_like(z)
    for w, m in zip(zs, multiplicities):
        c = _factor_constant(w)
        fac = c * (z - w) / (z - np.conj(w))
        out = out * fac ** m
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BlaschkeProduct:
    zeros: tuple
    multiplicities: tuple

    @staticmethod
    def from_zeros(zeros, multiplicities=None):
        zs = tuple(complex(w) for w in zeros)
        if multiplicities is None:
            multiplicities = tuple([1] * len(zs))
        return BlaschkeProduct(zs, tuple(int(m) for m in multiplicities))

    def eval(self, z):
        return blaschke_eval(self.zeros, z, self.multiplicities)

    def arg_derivative_exact(self, x):
        """theta'(x) = sum of 2 m y / ((x-x0)^2 + y^2) over zeros."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for w, m in zip(self.zeros, self.multiplicities):
            out = out + 2.0 * m * w.imag / ((x - w.real) ** 2 + w.imag**2)
        return float(out) if out.ndim == 0 else out

    def continuous_argument(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for w, m in zip(self.zeros, self.multiplicities):
            out = out + 2.0 * m * np.arctan((x - w.real) / w.imag)
        return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Krein-shift models


@dataclass(frozen=True)
class KreinShift:
    """Inner function with {Theta=1} = a's and {Theta=-1} = b's."""

    a: tuple
    b: tuple
    c: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.size != b.size or a.size == 0:
            raise NotIntertwining("need equally many a's and b's")
        merged = np.empty(2 * a.size)
        merged[0::2] = a
        merged[1::2] = b
        if not np.all(np.diff(merged) > 0):
            raise NotIntertwining(
                "sequences must strictly intertwine: a_n < b_n < a_{n+1}")
        object.__setattr__(self, "a", tuple(float(x) for x in a))
        object.__setattr__(self, "b", tuple(float(x) for x in b))

    # -- internals ----------------------------------------------------------

    def _log_w(self, z):
        """log W(z) as a stable compensated sum, z in the closed half-plane."""
        z = np.asarray(z, dtype=complex)
        a = np.asarray(self.a)
        b = np.asarray(self.b)
        zz = z[..., None]
        terms = np.log(b - zz) - np.log(a - zz) \
            - 0.5 * (np.log1p(b * b) - np.log1p(a * a))
        return terms.sum(axis=-1) - 1j * np.pi / 2 - np.pi * self.c

    def eval(self, z):
        """Theta(z) = (W-1)/(W+1), contractive on the upper half-plane."""
        z = np.asarray(z, dtype=complex)
        logw = self._log_w(z)
        # evaluate (W-1)/(W+1) = tanh(logw/2) for numerical symmetry
        out = np.tanh(0.5 * logw)
        return complex(out) if out.ndim == 0 else out

    def eval_real(self, x):
        """Boundary values, exactly unimodular away from the level points."""
        x = np.asarray(x, dtype=float)
        a = np.asarray(self.a)
        b = np.asarray(self.b)
        xx = x[..., None]
        with np.errstate(divide="ignore"):
            logmag = (np.log(np.abs(b - xx)) - np.log(np.abs(a - xx))
                      - 0.5 * (np.log1p(b * b) - np.log1p(a * a))).sum(axis=-1)
        inside = ((xx > a) & (xx < b)).any(axis=-1)
        logw = logmag - np.pi * self.c
        # W = +- i e^logw; Theta = (W-1)/(W+1) via tanh for stability;
        # the level points themselves are the +-inf limits
        w_phase = np.where(inside, 0.5j * np.pi, -0.5j * np.pi)
        with np.errstate(invalid="ignore"):
            theta = np.tanh(0.5 * (logw + w_phase))
        theta = np.where(np.isposinf(logw), 1.0 + 0.0j, theta)
        theta = np.where(np.isneginf(logw), -1.0 + 0.0j, theta)
        return complex(theta) if theta.ndim == 0 else theta

    def u_conjugate_derivative(self, x):
        """d/dx of the conjugate function of 1_E - 1/2 (closed form)."""
        x = np.asarray(x, dtype=float)
        a = np.asarray(self.a)
        b = np.asarray(self.b)
        xx = x[..., None]
        out = (1.0 / (xx - a) - 1.0 / (xx - b)).sum(axis=-1) / np.pi
        return float(out) if out.ndim == 0 else out

    def arg_derivative_exact(self, x):
        """theta'(x) = 2 pi u~'(x) rho/(1+rho^2) with the side-correct sign."""
        x = np.asarray(x, dtype=float)
        a = np.asarray(self.a)
        b = np.asarray(self.b)
        xx = x[..., None]
        logmag = (np.log(np.abs(b - xx)) - np.log(np.abs(a - xx))
                  - 0.5 * (np.log1p(b * b) - np.log1p(a * a))).sum(axis=-1)
        logrho = logmag - np.pi * self.c
        inside = ((xx > a) & (xx < b)).any(axis=-1)
        sign = np.where(inside, 1.0, -1.0)
        # rho/(1+rho^2) = 1/(2 cosh(log rho))
        out = 2.0 * np.pi * self.u_conjugate_derivative(x) * sign \
            / (2.0 * np.cosh(logrho))
        return float(out) if np.ndim(out) == 0 else out

    def continuous_argument(self, x):
        """Continuous branch of arg Theta with value 2 pi n at a_n."""
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        a = np.asarray(self.a)
        theta = self.eval_real(x)
        local = np.angle(theta)  # (-pi, pi]
        # index n(x): number of a's at or below x; between consecutive a's
        # the argument climbs exactly 2 pi, entirely within [0, 2 pi) of the
        # local branch, so lifting the negative half suffices
        n_idx = np.searchsorted(a, x, side="right") - 1
        phase = local.copy()
        phase[local < 0] += 2 * np.pi
        out = 2 * np.pi * n_idx + phase
        return float(out[0]) if scalar else out


def krein_shift(a, b, c: float = 0.0) -> KreinShift:
    """Inner function with prescribed intertwining level sets."""
    return KreinShift(tuple(float(x) for x in np.sort(np.asarray(a, float))),
                      tuple(float(x) for x in np.sort(np.asarray(b, float))),
                      float(c))


# ---------------------------------------------------------------------------
# phase-prescribed models and the matching construction


@dataclass(frozen=True)
class PhasePrescribed:
    theta: PhaseFunction

    def eval_real(self, x):
        return np.exp(1j * np.asarray(self.theta(x)))

    def to_krein(self, c: float = 0.0) -> KreinShift:
        model, _ = phase_to_inner(self.theta, c=c)
        return model

    def eval(self, z):
        z = np.asarray(z, dtype=complex)
        if np.all(np.abs(z.imag) < 1e-15):
            return self.eval_real(z.real)
        return self.to_krein().eval(z)


InnerFunctionModel = (BlaschkeProduct, KreinShift, PhasePrescribed)


@dataclass(frozen=True)
class PhaseMatchReport:
    model: KreinShift
    max_phase_deviation: float
    derivative_ratio_band: tuple
    level_count: int


def phase_to_inner(sigma: PhaseFunction, c: float = 0.0,
                   diagnostics_points: int = 512):
    """Inner function whose argument tracks a strictly increasing phase.

    Solves sigma(a_n) = 2 pi n on the grid (monotone inverse interpolation),
    sets b_n to midpoints, and reports max |theta - sigma| over a sample
    grid plus the min/max of theta'(x)/|x|^kappa over 1 <= |x| <= window.
    """
    ys = sigma.ys
    if not np.all(np.diff(ys) > 0):
        raise NotIncreasing("phase must be strictly increasing on its grid")
    xs = sigma.xs
    n_lo = int(math.ceil(ys[0] / (2 * math.pi)))
    n_hi = int(math.floor(ys[-1] / (2 * math.pi)))
    if n_hi - n_lo < 1:
        raise ValueError("phase range must cover at least two level values")
    ns = np.arange(n_lo, n_hi + 1)
    a = np.interp(2 * math.pi * ns, ys, xs)
    b = 0.5 * (a[:-1] + a[1:])
    model = KreinShift(tuple(a[:-1]), tuple(b), float(c))

    probe = np.linspace(a[0], a[-2], diagnostics_points)
    theta = model.continuous_argument(probe) + 2 * math.pi * n_lo
    dev = float(np.max(np.abs(theta - np.interp(probe, xs, ys))))

    # derivative band on the interior: the truncation makes theta' decay
    # within the last few intervals of the finite model
    margin = min(4, max(1, len(a) // 8))
    lo_x = max(1.0, a[margin])
    hi_x = a[-1 - margin]
    if hi_x <= lo_x:
        band = (math.nan, math.nan)
    else:
        pts = np.geomspace(lo_x, hi_x, 128)
        pts = np.concatenate([-pts[::-1], pts])
        pts = pts[(pts > a[margin]) & (pts < a[-1 - margin])]
        pts = pts[np.abs(pts) >= 1.0]
        level_pts = np.concatenate([model.a, model.b])
        keep = np.min(np.abs(pts[:, None] - level_pts[None, :]), axis=1) > 1e-9
        pts = pts[keep]
        ratios = model.arg_derivative_exact(pts) \
            / np.abs(pts) ** sigma.kappa
        band = (float(np.min(ratios)), float(np.max(ratios))) if ratios.size \
            else (math.nan, math.nan)
    return model, PhaseMatchReport(model, dev, band, len(model.a))


# ---------------------------------------------------------------------------
# Clark masses and argument derivatives


def _herglotz_mass(model, x0: float, sign: int) -> float:
    """Richardson-extrapolated eps * Re[(1+sT)/(1-sT)](x0 + i eps), s=+-1.

    At a point mass the quantity equals the mass exactly plus O(eps^2)
    contamination from the neighbouring atoms, so two Richardson steps
    eliminate eps^2 and eps^4.
    """
    vals = []
    for eps in _CLARK_EPS:
        th = model.eval(complex(x0, eps))
        if sign > 0:
            m = (1.0 + th) / (1.0 - th)
        else:
            m = (1.0 - th) / (1.0 + th)
        vals.append(eps * m.real)
    r01 = (4.0 * vals[1] - vals[0]) / 3.0
    r12 = (4.0 * vals[2] - vals[1]) / 3.0
    refined = (16.0 * r12 - r01) / 15.0
    return refined if abs(refined - vals[2]) < abs(vals[2]) else vals[2]


def clark_masses(model: KreinShift, a=None, b=None):
    """Point masses (alphas at the a's, betas at the b's) of the two
    boundary measures."""
    a = np.asarray(model.a if a is None else a, dtype=float)
    b = np.asarray(model.b if b is None else b, dtype=float)
    a_model = np.asarray(model.a)
    b_model = np.asarray(model.b)
    for x in a:
        if np.min(np.abs(a_model - x)) > 1e-9:
            raise LevelSetMismatch(f"{x} is not a prescribed Theta=1 point")
    for x in b:
        if np.min(np.abs(b_model - x)) > 1e-9:
            raise LevelSetMismatch(f"{x} is not a prescribed Theta=-1 point")
    alphas = np.array([_herglotz_mass(model, x, +1) for x in a])
    betas = np.array([_herglotz_mass(model, x, -1) for x in b])
    return alphas, betas


def continuous_argument(model, x):
    """Continuous phase of the model at real x (model-specific branch)."""
    if isinstance(model, BlaschkeProduct):
        return model.continuous_argument(x)
    if isinstance(model, KreinShift):
        return model.continuous_argument(x)
    if isinstance(model, PhasePrescribed):
        return model.theta(x)
    raise TypeError(f"unknown model type {type(model)!r}")


def arg_derivative(model, x: float, initial_step: float = 1e-3,
                   rtol: float = 1e-6) -> float:
    """Numerical d/dx of the continuous argument, adaptive central step.

    The step halves until two successive central differences agree to the
    relative tolerance; evaluation exactly at a level point is rejected.
    """
    if isinstance(model, KreinShift):
        pts = np.concatenate([model.a, model.b])
        if np.min(np.abs(pts - x)) < 1e-12:
            raise AtLevelPoint(f"{x} is a level point of the model")

    def slope(h):
        th1 = continuous_argument(model, np.array([x - h]))
        th2 = continuous_argument(model, np.array([x + h]))
        return (float(np.atleast_1d(th2)[0]) - float(np.atleast_1d(th1)[0])) / (2 * h)

    h = initial_step
    prev = slope(h)
    for _ in range(40):
        h *= 0.5
        cur = slope(h)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-30):
            return cur
        prev = cur
    return prev
