import cmath
import math

import numpy as np
import pytest

from blueep.complex_poly import (
    CubicCoefficients,
    cluster_roots,
    cubic_discriminant,
    poly_roots_oracle,
    solve_cubic,
)
from blueep.errors import InvalidInputError, NotApplicableError, NumericFailureError


def from_roots(*roots) -> CubicCoefficients:
    r1, r2, r3 = roots
    return CubicCoefficients(-(r1 + r2 + r3), r1 * r2 + r1 * r3 + r2 * r3, -r1 * r2 * r3)


def multiset_distance(a, b) -> float:
    # greedy matching is enough for three well-separated roots
    b = list(b)
    worst = 0.0
    for z in a:
        k = min(range(len(b)), key=lambda i: abs(z - b[i]))
        worst = max(worst, abs(z - b.pop(k)))
    return worst


def test_known_real_roots():
    roots = solve_cubic(from_roots(1.0, 2.0, 3.0))
    assert roots == pytest.approx([1.0, 2.0, 3.0], abs=1e-14)
    assert all(z.imag == 0.0 for z in roots)


def test_conjugate_pair_is_exact():
    roots = solve_cubic(from_roots(-2.0, 1 + 3j, 1 - 3j))
    real = [z for z in roots if z.imag == 0]
    pair = [z for z in roots if z.imag != 0]
    assert real == pytest.approx([-2.0], abs=1e-14)
    assert pair[0] == pair[1].conjugate()
    assert abs(pair[0] - (1 - 3j)) < 1e-13


def test_triple_root_and_discriminant():
    c = from_roots(2.0, 2.0, 2.0)
    rep = cubic_discriminant(c)
    assert (rep.A, rep.B, rep.C, rep.D) == (0.0, 0.0, 0.0, 0.0)
    assert solve_cubic(c) == pytest.approx([2.0] * 3, abs=1e-12)


def test_double_root():
    c = from_roots(1.0, 1.0, -2.0)
    assert cubic_discriminant(c).D == pytest.approx(0.0, abs=1e-12)
    assert solve_cubic(c) == pytest.approx([-2.0, 1.0, 1.0], abs=1e-7)


def test_roots_sorted_by_real_then_imag():
    roots = solve_cubic(from_roots(0.5 + 1j, 0.5 - 1j, 0.5))
    assert [z.imag for z in roots] == pytest.approx([-1.0, 0.0, 1.0], abs=1e-12)


@pytest.mark.parametrize(
    "roots",
    [(1.0, -4.0, 7.5), (0.0, 0.0, 5.0), (-3.0, 2 + 1j, 2 - 1j), (1e3, -1e-3, 2.0)],
)
def test_discriminant_matches_vandermonde_form(roots):
    # D = -3 * prod (x_i - x_j)^2 for the monic cubic
    c = from_roots(*roots)
    r1, r2, r3 = roots
    expected = -3 * ((r1 - r2) * (r1 - r3) * (r2 - r3)) ** 2
    assert cubic_discriminant(c).D == pytest.approx(expected.real, rel=1e-9, abs=1e-9)


def test_complex_coefficients():
    roots = (1 + 2j, -0.5j, 3.0 - 1j)
    got = solve_cubic(from_roots(*roots))
    assert multiset_distance(got, roots) < 1e-12


def test_discriminant_rejects_complex_coefficients():
    with pytest.raises(NotApplicableError):
        cubic_discriminant(CubicCoefficients(1.0, 0.5j, 2.0))


def test_discriminant_tolerates_roundoff_imaginary_parts():
    rep = cubic_discriminant(CubicCoefficients(1.0, 2.0 + 1e-15j, 3.0))
    assert rep.A == pytest.approx(1.0 - 6.0)


def test_non_finite_rejected():
    with pytest.raises(InvalidInputError):
        solve_cubic(CubicCoefficients(math.nan, 0.0, 1.0))


def test_evaluation_and_is_real():
    c = CubicCoefficients(0.0, 0.0, -8.0)
    assert c(2.0) == 0
    assert c.is_real()
    assert not CubicCoefficients(1j, 0, 0).is_real()


def test_vieta_random_real():
    rng = np.random.default_rng(7)
    for _ in range(500):
        c2, c1, c0 = rng.uniform(-100, 100, 3)
        x = solve_cubic(CubicCoefficients(c2, c1, c0))
        scale = max(1.0, abs(c2), abs(c1), abs(c0))
        assert abs(sum(x) + c2) <= 1e-9 * scale
        assert abs(x[0] * x[1] + x[0] * x[2] + x[1] * x[2] - c1) <= 1e-9 * scale
        assert abs(x[0] * x[1] * x[2] + c0) <= 1e-9 * scale


def test_sign_rule_random_real():
    rng = np.random.default_rng(11)
    for _ in range(500):
        c = CubicCoefficients(*rng.uniform(-10, 10, 3))
        D = cubic_discriminant(c).D
        real = sum(1 for z in solve_cubic(c) if z.imag == 0)
        if D < -1e-9:
            assert real == 3
        elif D > 1e-9:
            assert real == 1


# -- oracle ------------------------------------------------------------------


def test_oracle_degree_six():
    roots = [-1, -2, -3, 0.5 + 1j, 0.5 - 1j, 4]
    got = poly_roots_oracle(np.poly(roots))
    assert multiset_distance(got, roots) < 1e-10


def test_oracle_agrees_with_solver():
    rng = np.random.default_rng(3)
    for _ in range(200):
        c = rng.normal(size=3) * 10
        got = poly_roots_oracle([1.0, *c])
        ref = solve_cubic(CubicCoefficients(*c))
        assert multiset_distance(got, ref) < 1e-9


def test_oracle_trailing_zeros():
    got = sorted(poly_roots_oracle([1.0, -3.0, 2.0, 0.0, 0.0]), key=lambda z: z.real)
    assert got == pytest.approx([0.0, 0.0, 1.0, 2.0], abs=1e-12)


def test_oracle_multiple_root_accuracy():
    got = poly_roots_oracle(np.poly([1.0] * 6))
    assert max(abs(z - 1.0) for z in got) < 2e-2


@pytest.mark.parametrize("coeffs", [[], [0.0, 1.0], [1.0] * 10, [1.0, math.inf]])
def test_oracle_rejects_bad_input(coeffs):
    with pytest.raises(InvalidInputError):
        poly_roots_oracle(coeffs)


def test_oracle_reports_non_convergence():
    with pytest.raises(NumericFailureError) as info:
        poly_roots_oracle([1.0, 0.0, 0.0, -1.0], max_iter=1)
    assert info.value.residual > 1e-9


def test_cluster_roots():
    groups = cluster_roots([1.0, 1.0 + 1e-8, 2.0, cmath.exp(1j)])
    assert sorted(len(g) for g in groups) == [1, 1, 2]
