"""Shared builders for test functions and phases."""

import numpy as np

from bmtk.grid import PhaseFunction, SampledFunction, TailModel, geometric_grid


def indicator(a, b, span=30.0, n=12001, ramp=5e-4):
    """Sampled indicator of (a, b) with mean-zero symmetric ramps at the jumps."""
    knots = np.unique(np.concatenate([
        np.linspace(-span, span, n),
        [a - ramp, a + ramp, b - ramp, b + ramp],
    ]))
    vals = np.where((knots > a + ramp) & (knots < b - ramp), 1.0, 0.0)
    up = (knots >= a - ramp) & (knots <= a + ramp)
    vals[up] = (knots[up] - (a - ramp)) / (2 * ramp)
    dn = (knots >= b - ramp) & (knots <= b + ramp)
    vals[dn] = ((b + ramp) - knots[dn]) / (2 * ramp)
    return SampledFunction.from_samples(knots, vals)


def poisson_kernel_function(span=200.0, n_per_side=4000):
    """1/(1+x^2) on a geometric grid with its exact tail models."""
    g = geometric_grid(span, n_per_side)
    return SampledFunction.from_samples(
        g, 1.0 / (1.0 + g**2),
        TailModel(-2.0, 1.0, span / 2, "plus"),
        TailModel(-2.0, 1.0, span / 2, "minus"))


def gaussian_mix(rng, span=300.0, n_per_side=6000, k=3):
    """Random compactly-concentrated smooth bump mix on a geometric grid."""
    g = geometric_grid(span, n_per_side)
    y = np.zeros_like(g)
    for _ in range(k):
        c = rng.uniform(-8, 8)
        w = rng.uniform(0.8, 3.0)
        a = rng.uniform(-1.0, 1.0)
        y += a * np.exp(-((g - c) / w) ** 2)
    return SampledFunction.from_samples(g, y)


def line_with_peaks(peaks, span=None, pad=10.0):
    """Phase -x plus sharp rises creating prescribed intervals.

    Each (position, length) pair produces the piecewise-linear phase whose
    running maximum from the right differs from the phase exactly on
    (position - length, position): the phase rises with slope +1 on the last
    half of that gap and drops steeply after the peak.
    """
    if span is None:
        span = max(abs(p) + 3 * l for p, l in peaks) + pad
    knots = [-span]
    vals = [span]
    for p, l in sorted(peaks):
        r0 = p - l / 2          # rise start
        drop = p + l / 10       # steep rejoin
        knots += [r0, p, drop]
        vals += [-r0, -p + l, -drop]
    knots.append(span)
    vals.append(-span)
    xs = np.asarray(knots, dtype=float)
    ys = np.asarray(vals, dtype=float)
    if np.any(np.diff(xs) <= 0):
        raise ValueError("peaks overlap")
    return PhaseFunction.from_samples(xs, ys, 0.0, -1.0, -1.0)


def densify(ph, n=4001):
    """Resample a piecewise-linear phase on a denser grid (values exact)."""
    from bmtk.grid import evaluate
    xs = np.union1d(ph.xs, np.linspace(ph.xs[0], ph.xs[-1], n))
    return PhaseFunction.from_samples(xs, evaluate(ph.base, xs), ph.kappa,
                                      ph.slope_plus, ph.slope_minus)
