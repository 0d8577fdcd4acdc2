import numpy as np
import pytest
from scipy.integrate import quad

from bmtk.bm import (DivergenceVerdict, Interval, IntervalFamily,
                     almost_decreasing_test, atom_decomposition, basic_witness,
                     bm_intervals, classify_intervals, covering_multiplicity,
                     delta_star, excess_function, select_test_intervals,
                     tent_covering, tent_function_values)
from bmtk.errors import NotAlmostDecreasing, NotDivergent, OutOfSpan
from bmtk.grid import (PhaseFunction, SampledFunction, evaluate, linear_phase,
                       pi_measure)

from util import densify, line_with_peaks


# ---------------------------------------------------------------------------
# dense running-max oracle (deliberately quadratic)


def oracle_bm_intervals(ph):
    xs, ys = ph.xs, ph.ys
    n = xs.size
    mstar = np.empty(n)
    for j in range(n):
        m = -np.inf
        for k in range(j, n):
            if ys[k] > m:
                m = ys[k]
        mstar[j] = m
    pieces = []
    for j in range(n - 1):
        M = mstar[j + 1]
        y0, y1 = ys[j], ys[j + 1]
        x0, x1 = xs[j], xs[j + 1]
        if y0 >= M and y1 >= M:
            continue
        if y0 < M and y1 < M:
            pieces.append((x0, x1))
        elif y0 < M:
            pieces.append((x0, x0 + (M - y0) / (y1 - y0) * (x1 - x0)))
        else:
            pieces.append((x0 + (M - y0) / (y1 - y0) * (x1 - x0), x1))
    if pieces and pieces[0][0] == xs[0] and ys[0] < mstar[0]:
        tail = ph.base.tail_minus
        M = mstar[0]
        x_cross = -((M / tail.coeff) ** (1.0 / tail.exponent))
        a0, b0 = pieces[0]
        pieces[0] = (min(x_cross, a0), b0)
    merged = []
    for a, b in pieces:
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], b)
        else:
            merged.append((a, b))
    return merged


def random_phase(rng, n_max=400):
    n = rng.integers(20, n_max)
    xs = np.sort(rng.uniform(-60, 60, n))
    xs = np.unique(xs)
    # decreasing trend with rough noise
    ys = -xs + rng.normal(0, 2.0, xs.size).cumsum() * 0.1 + rng.normal(0, 1.5, xs.size)
    return PhaseFunction.from_samples(xs, ys, 0.0, -1.0, -1.0)


def test_bm_empty_for_decreasing_phase():
    ph = linear_phase(-1.0)
    assert len(bm_intervals(ph)) == 0


def test_bm_single_peak_exact_endpoints():
    ph = line_with_peaks([(2.0, 1.0)])
    fam = bm_intervals(ph)
    assert len(fam) == 1
    assert fam[0].a == pytest.approx(1.0, abs=1e-14)
    assert fam[0].b == pytest.approx(2.0, abs=1e-14)


def test_bm_hat_bump_oracle_match():
    # -x plus a height-3 hat on [1,2]: the component crosses the origin
    xs = np.array([-20.0, 1.0, 1.5, 2.0, 20.0])
    ys = np.array([20.0, -1.0, 1.5, -2.0, -20.0])
    ph = PhaseFunction.from_samples(xs, ys, 0.0, -1.0, -1.0)
    fam = bm_intervals(ph)
    orc = oracle_bm_intervals(ph)
    assert [(l.a, l.b) for l in fam] == orc
    assert len(fam) == 1
    assert fam[0].b == 1.5                       # the peak
    assert fam[0].a == pytest.approx(-1.5)       # -gamma(peak)


def test_bm_oscillating_phase_matches_oracle():
    xs = np.linspace(-50, 50, 2001)
    ys = -xs + 2 * np.sin(xs)
    ph = PhaseFunction.from_samples(xs, ys, 0.0, -1.0, -1.0)
    fam = [(l.a, l.b) for l in bm_intervals(ph)]
    assert fam == oracle_bm_intervals(ph)
    assert len(fam) > 10


def test_bm_randomized_oracle_match():
    rng = np.random.default_rng(42)
    for _ in range(25):
        ph = random_phase(rng)
        assert [(l.a, l.b) for l in bm_intervals(ph)] == oracle_bm_intervals(ph)


def test_bm_structural_invariant():
    # outside the union gamma = gamma*, inside strictly below
    ph = line_with_peaks([(2.0, 1.0), (8.0, 2.0)])
    dense = densify(ph)
    fam = bm_intervals(dense)
    from bmtk.bm import running_max_from_right
    mstar = running_max_from_right(dense)
    inside = np.zeros(dense.xs.size, dtype=bool)
    for l in fam:
        inside |= (dense.xs > l.a) & (dense.xs < l.b)
    assert np.all(mstar[inside] > dense.ys[inside])
    assert np.allclose(mstar[~inside], dense.ys[~inside], atol=1e-12)


# ---------------------------------------------------------------------------
# almost-decreasing test


def test_strictly_decreasing_is_convergent():
    v = almost_decreasing_test(linear_phase(-2.0), 0.0)
    assert v.is_convergent
    assert v.partial_sums == () or v.partial_sums[-1] == 0.0


def test_wrong_tail_limit_is_divergent():
    v = almost_decreasing_test(linear_phase(+1.0), 0.0)
    assert v.is_divergent
    assert "tail" in v.reason


def test_dyadic_unit_bumps_converge():
    peaks = [(2.0**j + 1.0, 1.0) for j in range(1, 11)]
    ph = line_with_peaks(peaks)
    v = almost_decreasing_test(ph, 0.0)
    assert v.is_convergent
    # explicit series: sum over j of (2^j)^-2
    total = sum((p - 1.0) ** -2.0 for p, _ in peaks)
    assert v.partial_sums[-1] == pytest.approx(total, rel=1e-9)


def test_proportional_bumps_diverge():
    # l_j = d_j / 2 at d_j = 4^j: constant series increments per octave pair
    peaks = [(1.5 * 4.0**j, 0.5 * 4.0**j) for j in range(1, 11)]
    ph = line_with_peaks(peaks)
    v = almost_decreasing_test(ph, 0.0)
    assert v.is_divergent
    assert v.fitted_growth >= 0.1


def test_monotone_in_subtraction_parameter():
    peaks = [(2.0**j + 1.0, 1.0) for j in range(1, 9)]
    gamma = line_with_peaks(peaks)
    sigma = linear_phase(2.0, window=abs(gamma.xs[0]),
                         n=gamma.xs.size)
    seen_convergent = False
    for a in (0.0, 0.25, 0.5, 1.0, 2.0):
        v = almost_decreasing_test(gamma.minus(sigma, -(-a)), 0.0)
        if seen_convergent:
            assert v.is_convergent
        seen_convergent = seen_convergent or v.is_convergent
    assert seen_convergent


# ---------------------------------------------------------------------------
# adjacency gap


def test_delta_star_increasing_linear():
    xs = np.linspace(-10, 10, 201)
    ph = PhaseFunction.from_samples(xs, xs, 0.0, 1.0, 1.0)
    assert delta_star(ph, Interval(0.0, 1.0), 1.0) == pytest.approx(1.0)


def test_delta_star_constant_phase():
    xs = np.linspace(-10, 10, 201)
    ph = PhaseFunction.from_samples(xs, np.zeros_like(xs), 0.0, 0.1, 0.1)
    assert delta_star(ph, Interval(0.0, 1.0), 1.0) == pytest.approx(0.0)


def test_delta_star_decreasing_linear():
    xs = np.linspace(-10, 10, 201)
    ph = PhaseFunction.from_samples(xs, -xs, 0.0, -1.0, -1.0)
    # inf over (1,2) of -x minus sup over (-1,0) of -x = -2 - 1
    assert delta_star(ph, Interval(0.0, 1.0), 1.0) == pytest.approx(-3.0)


def test_delta_star_out_of_span():
    xs = np.linspace(-2, 2, 41)
    ph = PhaseFunction.from_samples(xs, -xs, 0.0, -1.0, -1.0)
    with pytest.raises(OutOfSpan):
        delta_star(ph, Interval(1.0, 1.9), 1.0)


# ---------------------------------------------------------------------------
# test-interval selection


def divergent_instance():
    peaks = [(1.5 * 4.0**j, 0.5 * 4.0**j) for j in range(1, 11)]
    return line_with_peaks(peaks)


def test_select_requires_divergence():
    with pytest.raises(NotDivergent):
        sigma = linear_phase(2.0)
        select_test_intervals(linear_phase(-1.0), sigma, 0.0, 0.5)


def test_select_postconditions():
    gamma = divergent_instance()
    sigma = linear_phase(2.0, window=abs(gamma.xs[0]), n=4001)
    rep = select_test_intervals(gamma, sigma, 0.0, 0.5)
    assert len(rep.family) > 0
    shifted = gamma.minus(sigma, -0.5)
    for l in rep.family:
        assert 10.0 * l.length <= l.distance * (1 + 1e-12)
        gap = delta_star(shifted, l, rep.adjacency)
        assert gap >= rep.realized_constant * max(l.distance, 1.0) ** 0.0 * l.length - 1e-9
    assert rep.realized_constant > 0


def test_select_multiplicity_bound():
    gamma = divergent_instance()
    sigma = linear_phase(2.0, window=abs(gamma.xs[0]), n=4001)
    rep = select_test_intervals(gamma, sigma, 0.0, 0.5)
    assert rep.dilated_multiplicity <= 2


# ---------------------------------------------------------------------------
# type classification


def test_classify_zero_function_all_type_two():
    xs = np.linspace(-50, 50, 501)
    h = SampledFunction.from_samples(xs, np.zeros_like(xs))
    fam = IntervalFamily.from_pairs([(2, 3), (10, 12)])
    assert classify_intervals(h, fam, 10.0, 0.0) == ["TypeII", "TypeII"]


def test_classify_huge_function_type_one():
    xs = np.linspace(-50, 50, 501)
    h = SampledFunction.from_samples(xs, 1e6 * np.ones_like(xs))
    fam = IntervalFamily.from_pairs([(2, 3)])
    assert classify_intervals(h, fam, 10.0, 0.0) == ["TypeI"]


def test_classify_matches_direct_reimplementation():
    rng = np.random.default_rng(3)
    xs = np.linspace(-80, 80, 3001)
    h = SampledFunction.from_samples(xs, rng.normal(0, 1, xs.size))
    fam = IntervalFamily.from_pairs([(1.0, 1.8), (4.0, 4.4), (-9.0, -7.0)])
    C, kappa = 7.0, 1.0
    got = classify_intervals(h, fam, C, kappa)
    # independent route: direct quadrature of |h| dPi over the dilated interval
    exp = []
    for l in fam:
        c = 0.5 * (l.a + l.b)
        half = 2.5 * (l.b - l.a)
        val, _ = quad(lambda x: abs(evaluate(h, x)) / (1 + x * x),
                      c - half, c + half, limit=800)
        lhs = l.distance ** (kappa - 2.0) * (l.b - l.a) ** 2
        exp.append("TypeI" if lhs <= C * val else "TypeII")
    assert got == exp


# ---------------------------------------------------------------------------
# tent covering


def test_tent_requires_convergent_phase():
    with pytest.raises(NotAlmostDecreasing):
        tent_covering(divergent_instance(), 0.0, 1.0)


def test_tent_empty_for_decreasing():
    cov = tent_covering(linear_phase(-1.0), 0.0, 1.0)
    assert len(cov.intervals) == 0


def e3_residual(gamma, cov):
    """Independent quadrature of the mean-zero identity, worst interval.

    The integrand has kinks at every excess knot, so the quadrature runs
    piecewise between consecutive knots (each piece smooth).
    """
    f = excess_function(gamma)
    worst = 0.0
    for l, eps_n in zip(cov.intervals, cov.coefficients):
        cuts = np.unique(np.concatenate(
            [[l.a, l.b, 0.5 * (l.a + l.b)],
             f.xs[(f.xs > l.a) & (f.xs < l.b)]]))
        cuts = cuts[(cuts >= l.a) & (cuts <= l.b)]
        val = 0.0
        for x0, x1 in zip(cuts, cuts[1:]):
            piece, _ = quad(
                lambda x: (evaluate(f, x)
                           - eps_n * abs(x) ** cov.kappa
                           * max(0.0, min(x - l.a, l.b - x))) / (1 + x * x),
                x0, x1, limit=100, epsabs=1e-15, epsrel=1e-13)
            val += piece
        scale = pi_measure(l.a, l.b) * max(
            float(np.max(evaluate(f, np.linspace(l.a, l.b, 200)))), 1e-30)
        worst = max(worst, abs(val) / scale)
    return worst


def test_tent_single_bump():
    gamma = line_with_peaks([(1.5, 1.0)], span=60.0)
    fam = bm_intervals(gamma)
    cov = tent_covering(gamma, 0.0, 1.0)
    assert len(cov.intervals) == 1
    assert cov.intervals[0].a == pytest.approx(fam[0].a)
    assert 0 < cov.coefficients[0] <= 1.0
    assert e3_residual(gamma, cov) <= 1e-8


def test_tent_two_bumps_coverage_and_stopping_rule():
    gamma = line_with_peaks([(3.5, 1.2), (14.0, 1.5)], span=80.0)
    cov = tent_covering(gamma, 0.0, 0.25)
    fam = bm_intervals(gamma)
    for l in fam:
        assert any(c.a <= l.a and l.b <= c.b for c in cov.intervals)
    assert all(0 < e <= 0.25 for e in cov.coefficients)
    assert e3_residual(gamma, cov) <= 1e-8
    # stopping rule re-checked by dense evaluation of F: no admissible
    # earlier endpoint in the excess-free set
    from bmtk.bm import _coverage_F
    f = excess_function(gamma)
    for c in cov.intervals:
        bs = np.linspace(c.a, c.b, 300)[1:-1]
        for b in bs:
            if evaluate(f, b) < 1e-12 and not any(
                    l.a < b < l.b for l in fam):
                assert _coverage_F(f, c.a, b, cov.kappa, cov.eps) > -1e-10


def test_tent_kappa_one_with_pruning():
    # parabola background with one genuine peak and one too-short peak
    xs = np.union1d(np.linspace(-40, 40, 4001), [4.0, 4.3, 10.0, 10.02])
    base = -np.sign(xs) * xs**2 / 2.0
    ys = base.copy()
    ph0 = PhaseFunction.from_samples(xs, ys, 1.0, -1.0, -1.0)

    # genuine peak: height 4 at x=4 (interval length ~ 1.2 > 1/d)
    # short peak: height 0.02 at x=10 (length ~ 0.002 < 1/10)
    def with_peaks():
        yy = base.copy()
        for p, h, w in ((4.0, 4.0, 0.3), (10.0, 0.2, 0.02)):
            rise = (xs >= p - w) & (xs <= p)
            yy[rise] = np.maximum(yy[rise],
                                  evaluate(ph0.base, p) + h
                                  - (p - xs[rise]) * (h / w) * 0.0
                                  - (p - xs[rise]) * 2 * p)
            yy[rise] = np.maximum(base[rise],
                                  (evaluate(ph0.base, p) + h)
                                  - (p - xs[rise]) * (h / w))
        return yy

    ys = with_peaks()
    gamma = PhaseFunction.from_samples(xs, ys, 1.0, -1.0, -1.0)
    fam = bm_intervals(gamma)
    assert len(fam) == 2
    cov = tent_covering(gamma, 1.0, 1.0)
    assert len(cov.pruned) == 1
    assert cov.pruned_excess_bound <= 0.25
    # surviving interval covered, short one pruned
    survivor = max(fam, key=lambda l: l.length)
    assert any(c.a <= survivor.a and survivor.b <= c.b for c in cov.intervals)
    assert all(0 < e <= 1.0 for e in cov.coefficients)
    assert e3_residual(gamma, cov) <= 1e-8


# ---------------------------------------------------------------------------
# atoms


def test_atoms_empty_for_empty_covering():
    cov = tent_covering(linear_phase(-1.0), 0.0, 1.0)
    assert atom_decomposition(linear_phase(-1.0), cov, 0.0) == []


def test_atom_mean_zero_and_normalization():
    gamma = line_with_peaks([(1.5, 1.0)], span=60.0)
    cov = tent_covering(gamma, 0.0, 0.5)
    atoms = atom_decomposition(gamma, cov, 0.0)
    assert len(atoms) == 1
    lam, A = atoms[0]
    l = cov.intervals[0]
    measure = pi_measure(l.a, l.b)
    from bmtk.grid import pi_integral
    assert abs(pi_integral(A)) <= 1e-8 / measure
    assert np.max(np.abs(A.ys)) * measure == pytest.approx(1.0, abs=1e-12)
    assert lam > 0


def test_atom_sum_bounded():
    gamma = line_with_peaks([(2.0**j + 1.0, 1.0) for j in range(1, 9)],
                            span=600.0)
    cov = tent_covering(gamma, 0.0, 1.0)
    atoms = atom_decomposition(gamma, cov, 0.0)
    lam_sum = sum(lam for lam, _ in atoms)
    bound = sum(l.length ** 2 / max(l.distance, 1.0) ** 2
                for l in cov.intervals)
    assert lam_sum <= 20.0 * bound


# ---------------------------------------------------------------------------
# witness


def test_witness_linear_case():
    gamma = linear_phase(-2.0)
    sigma = linear_phase(2.0)
    rep = basic_witness(gamma, sigma, 0.0, 0.1)
    assert rep.min_alpha_increment >= -1e-10
    slopes = np.diff(rep.alpha.ys) / np.diff(rep.alpha.xs)
    assert np.allclose(slopes, 2.2, atol=1e-9)
    assert np.max(np.abs(rep.h.ys)) <= 1e-9
    assert rep.residual_inf <= 1e-9


def test_witness_single_bump():
    gamma = densify(line_with_peaks([(1.5, 1.0)], span=60.0), 12001)
    sigma = linear_phase(2.0, window=60.0, n=12001)
    rep = basic_witness(gamma, sigma, 0.0, 0.5)
    assert rep.min_alpha_increment >= -1e-10
    assert rep.residual_inf <= 1e-2
    assert np.isfinite(rep.h_pi_norm)
