import math
from dataclasses import replace

import numpy as np
import pytest

from blueep.com_model import build_h_eff, spectrum
from blueep.complex_poly import poly_roots_oracle
from blueep.ep_locator import (
    EpKind,
    classify_point,
    ep3_criticals,
    eq24_coefficients,
    lambda_ep3,
    line_family,
    normalized_discriminant,
)
from blueep.errors import InvalidInputError
from blueep.pseudo_hermitian import enforce_ph, enforce_ph_balanced
from blueep.sweep import (
    AxisSpec,
    broken_ph_sweep,
    continue_branches,
    eigen_sweep,
    min_gap,
    pairwise_gap,
    phase_diagram,
)

SQRT3 = math.sqrt(3.0)


def balanced_g_family(delta):
    return line_family("G_a", enforce_ph_balanced(delta, 0.0))


def test_continue_branches_follows_crossing():
    t = np.linspace(-1, 1, 21)
    # two straight lines crossing in the real part, distinct imaginary parts
    rows = np.array([[complex(s, 0.1), complex(-s, -0.1), 5.0] for s in t])
    shuffled = np.array([sorted(r, key=lambda z: (z.real, z.imag)) for r in rows])
    out = continue_branches(shuffled)
    # sorting alone would swap the branches at t = 0; continuation must not
    assert np.allclose(out[:, 0], rows[:, 0])
    assert np.allclose(out[:, 1], rows[:, 1])
    assert np.allclose(out[:, 2], 5.0)


def test_continue_branches_skips_nan_rows():
    rows = np.array([[1, 2, 3], [np.nan, np.nan, np.nan], [1.1, 2.1, 3.1]], dtype=complex)
    out = continue_branches(rows)
    assert np.isnan(out[1]).all()
    assert out[2] == pytest.approx([1.1, 2.1, 3.1])


def test_pairwise_gap():
    assert pairwise_gap([0, 3, 1 + 1j]) == pytest.approx(math.sqrt(2.0))


def test_balanced_ep3_sweep_inserts_exact_points():
    bs = eigen_sweep(balanced_g_family(3 * SQRT3), -4.0, 4.0, n=1024)
    ep3 = [c for c in bs.coalescences if c.kind == "EP3"]
    assert [c.axis for c in ep3] == pytest.approx([-2.0, 2.0], abs=1e-9)
    assert all(abs(c.x - 2 * SQRT3) < 1e-6 for c in ep3)
    assert len(bs.axis) == 1024 + 2
    assert np.all(np.diff(bs.axis) > 0)
    k = int(np.argmin(np.abs(bs.axis - 2.0)))
    assert bs.classes[k] == "EP3"
    assert bs.gaps()[k] < 1e-6


def test_ep2_sweep_quartet():
    bs = eigen_sweep(balanced_g_family(10.0), -6.0, 6.0, n=512)
    axes = sorted(c.axis for c in bs.coalescences if c.kind == "EP2")
    assert axes == pytest.approx([-3.60858, -2.98934, 2.98934, 3.60858], abs=1e-5)


def test_sweep_classes_between_ep2s():
    bs = eigen_sweep(balanced_g_family(10.0), 2.0, 4.5, n=64, refine=False)
    cls = dict(zip(np.round(bs.axis, 6), bs.classes))
    assert cls[round(bs.axis[0], 6)] == "OneRealPair"
    mid = int(np.argmin(np.abs(bs.axis - 3.3)))
    assert bs.classes[mid] == "ThreeReal"
    assert np.all(bs.branches[mid].imag == 0)


def test_sweep_records_infeasible_points():
    eta = -1.1
    lam = 1.2 * lambda_ep3(eta)
    bs = eigen_sweep(lambda g: enforce_ph(eta, lam, g), 0.0, 4.0, n=128)
    assert bs.classes[0] == EpKind.INFEASIBLE.value
    assert 0 in bs.errors and "InfeasibleCoupling" in bs.errors[0]
    assert np.isnan(bs.branches[0]).all()
    ep2 = [c for c in bs.coalescences if c.kind == "EP2"]
    assert len(ep2) == 1
    assert ep2[0].axis == pytest.approx(2.438645, abs=1e-5)


def test_sweep_marks_non_ph_points():
    fixed = replace(enforce_ph_balanced(3.0, 0.0), gamma_b=0.3)
    bs = eigen_sweep(line_family("G_a", fixed), 0.0, 3.0, n=16)
    assert set(bs.classes) == {"NA"}
    assert np.isnan(bs.D).all()


def test_sweep_needs_two_points():
    with pytest.raises(InvalidInputError):
        eigen_sweep(balanced_g_family(1.0), 0.0, 1.0, n=1)


def test_broken_sweep_zero_offset_matches_unrefined():
    fam = balanced_g_family(3 * SQRT3)
    a = broken_ph_sweep(fam, 1.5, 2.5, 41, 0.0)
    b = eigen_sweep(fam, 1.5, 2.5, 41, refine=False)
    assert np.array_equal(a.branches, b.branches)


def test_broken_sweep_gap_minimum_near_ep3():
    fam = balanced_g_family(3 * SQRT3)
    bs = broken_ph_sweep(fam, 1.5, 2.5, 201, 0.1)
    g, gap = min_gap(bs)
    assert abs(g - 2.0) <= 0.05
    (c,) = bs.coalescences
    assert c.kind == "NearEP"
    assert c.axis == pytest.approx(1.9997554, abs=1e-5)
    # the broken condition splits the triple root by a finite amount
    assert c.gap == pytest.approx(1.0494133, abs=1e-6)


def test_broken_sweep_gap_agrees_with_oracle():
    fam = balanced_g_family(10.0)
    bs = broken_ph_sweep(fam, 2.0, 4.0, 21, 0.1)
    for g, row in zip(bs.axis, bs.branches):
        r = replace(fam(float(g)), gamma_b=0.1)
        h = build_h_eff(r).matrix + r.omega_b * np.eye(3)
        ref = poly_roots_oracle(np.poly(h))
        assert sorted(abs(z) for z in row) == pytest.approx(sorted(abs(z) for z in ref), abs=1e-9)


def test_axis_spec():
    assert AxisSpec("G_a", 0, 1, 3).values() == pytest.approx([0, 0.5, 1])
    with pytest.raises(InvalidInputError):
        AxisSpec("G_a", 0, 1, 1).values()


@pytest.fixture(scope="module")
def balanced_diagram():
    return phase_diagram("balanced", AxisSpec("G_a", -6, 6, 128), AxisSpec("Delta_a", -20, 20, 128))


def test_phase_diagram_balanced_triple_points(balanced_diagram):
    pd = balanced_diagram
    dx, dy = 12 / 127, 40 / 127
    assert len(pd.ep3_points) == 4
    for px, py in pd.ep3_points:
        assert abs(abs(px) - 2.0) <= dx
        assert abs(abs(py) - 3 * SQRT3) <= dy


def test_phase_diagram_matches_pointwise_classification(balanced_diagram):
    pd = balanced_diagram
    x, y = pd.axis1.values(), pd.axis2.values()
    for i, j in [(10, 100), (70, 90), (64, 64), (100, 20)]:
        cls = classify_point(enforce_ph_balanced(y[j], x[i]))
        assert pd.classes[i, j] == cls.kind.value
        assert pd.D[i, j] == pytest.approx(cls.report.D, rel=1e-9, abs=1e-9)


def test_phase_diagram_contours_lie_on_zero_set(balanced_diagram):
    for px, py in balanced_diagram.contours["A"][0][::10]:
        rep = normalized_discriminant(eq24_coefficients(enforce_ph_balanced(py, px)), 1.0)
        assert abs(rep.A) < 2.0  # linear interpolation error on a 128 grid


@pytest.mark.parametrize("eta", [-1.1, -0.8])
def test_phase_diagram_unbalanced_triple_points(eta):
    pd = phase_diagram("unbalanced", AxisSpec("G_a", -6, 6, 256), AxisSpec("G_c", -6, 6, 256), eta=eta)
    c = ep3_criticals(eta)
    cell = 12 / 255
    assert len(pd.ep3_points) == 4
    for px, py in pd.ep3_points:
        assert abs(abs(px) - c.g_a_ep3) <= cell
        assert abs(abs(py) - c.lambda_ep3 * c.g_a_ep3) <= cell
    assert pd.infeasible.any()


def test_phase_diagram_fixed_delta_reports_r3():
    pd = phase_diagram("unbalanced", AxisSpec("G_a", 0, 4, 16), AxisSpec("G_c", 0, 4, 16),
                       eta=-1.1, Delta_a=5.0)
    assert pd.r3 is not None and pd.r3.shape == (16, 16)
    assert np.isfinite(pd.D).all()


def test_phase_diagram_rejects_bad_mode():
    with pytest.raises(InvalidInputError):
        phase_diagram("sideways", AxisSpec("a", 0, 1, 2), AxisSpec("b", 0, 1, 2))
    with pytest.raises(InvalidInputError):
        phase_diagram("unbalanced", AxisSpec("a", 0, 1, 2), AxisSpec("b", 0, 1, 2), eta=-1.0)


def test_sweep_coalescences_sit_on_phase_contours():
    # every flagged coalescence lies within one cell of D = 0 or of an EP3 marker
    pd = phase_diagram("balanced", AxisSpec("G_a", 0, 6, 121), AxisSpec("Delta_a", 0, 20, 201))
    dx, dy = 6 / 120, 20 / 200
    for delta in (3 * SQRT3, 10.0, 14.0):
        bs = eigen_sweep(balanced_g_family(delta), 0.0, 6.0, n=256)
        for c in bs.coalescences:
            near_d = any(
                np.any((np.abs(line[:, 0] - c.axis) <= dx) & (np.abs(line[:, 1] - delta) <= dy))
                for line in pd.contours["D"]
            )
            near_ep3 = any(abs(px - c.axis) <= dx and abs(py - delta) <= dy for px, py in pd.ep3_points)
            assert near_d or near_ep3, c


def test_ep3_spectrum_is_reproduced_by_branches():
    bs = eigen_sweep(balanced_g_family(3 * SQRT3), 1.0, 3.0, n=33)
    for g, row in zip(bs.axis, bs.branches):
        r = enforce_ph_balanced(3 * SQRT3, float(g))
        ref = spectrum(build_h_eff(r), r.omega_b)
        assert sorted(row, key=lambda z: (z.real, z.imag)) == pytest.approx(list(ref), abs=1e-12)
