"""Phase-diagram rasters and eigenvalue branch sweeps.

Three entry points:

* :func:`phase_diagram` rasters D, A and B over two parameters and
  extracts their zero contours.
* :func:`eigen_sweep` follows the three eigenvalues x = Omega + omega_b
  along a one-parameter family and locates EP2/EP3 coalescences.
* :func:`broken_ph_sweep` does the same with the balance condition
  offset, where the cubic has complex coefficients and EPs are only
  visible as dips of the minimum eigenvalue gap.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .com_model import ReducedParams, build_h_eff, spectrum
from .contours import marching_squares
from .ep_locator import (
    EpKind,
    ParamFamily,
    Tolerances,
    classify_report,
    eq24_coefficients,
    locate_roots_on_grid,
    normalized_discriminant,
)
from .errors import BlueEPError, InvalidInputError
from .pseudo_hermitian import is_balanced, ph_residuals

__all__ = [
    "AxisSpec",
    "PhaseDiagram",
    "Coalescence",
    "BranchSet",
    "phase_diagram",
    "eigen_sweep",
    "broken_ph_sweep",
    "min_gap",
    "pairwise_gap",
    "continue_branches",
]

log = logging.getLogger(__name__)

_PERMS = list(itertools.permutations(range(3)))


@dataclass(frozen=True)
class AxisSpec:
    name: str
    lo: float
    hi: float
    count: int

    def values(self) -> np.ndarray:
        if self.count < 2:
            raise InvalidInputError(f"axis {self.name} needs at least 2 points")
        return np.linspace(self.lo, self.hi, self.count)


@dataclass
class PhaseDiagram:
    mode: str
    axis1: AxisSpec
    axis2: AxisSpec
    D: np.ndarray  # shape (count1, count2), normalised by kappa_c powers
    A: np.ndarray
    B: np.ndarray
    classes: np.ndarray  # EpKind values as strings
    contours: dict[str, list[np.ndarray]]
    ep3_points: list[tuple[float, float]]
    r3: Optional[np.ndarray] = None  # only in the fixed-Delta mode

    @property
    def sign_D(self) -> np.ndarray:
        return np.sign(self.D)

    @property
    def infeasible(self) -> np.ndarray:
        return self.classes == EpKind.INFEASIBLE.value


def _classify_arrays(D, A, B, tol: Tolerances) -> np.ndarray:
    out = np.full(D.shape, EpKind.INFEASIBLE.value, dtype=object)
    ok = np.isfinite(D)
    out[ok & (D < 0)] = EpKind.THREE_REAL.value
    out[ok & (D > 0)] = EpKind.ONE_REAL_PAIR.value
    zero = ok & (np.abs(D) <= tol.eps_D)
    out[zero] = EpKind.EP2.value
    out[zero & (np.abs(A) <= tol.eps_A) & (np.abs(B) <= tol.eps_B)] = EpKind.EP3.value
    return out


def _segments(lines: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    if not lines:
        return np.empty((0, 2)), np.empty((0, 2))
    p = np.concatenate([ln[:-1] for ln in lines])
    q = np.concatenate([ln[1:] for ln in lines])
    return p, q


def _intersections(la: list[np.ndarray], lb: list[np.ndarray]) -> np.ndarray:
    """Crossing points of two polyline sets (vectorised segment test)."""
    p, p2 = _segments(la)
    q, q2 = _segments(lb)
    if len(p) == 0 or len(q) == 0:
        return np.empty((0, 2))
    r = (p2 - p)[:, None, :]
    s = (q2 - q)[None, :, :]
    qp = q[None, :, :] - p[:, None, :]
    denom = r[..., 0] * s[..., 1] - r[..., 1] * s[..., 0]
    with np.errstate(invalid="ignore", divide="ignore"):
        t = (qp[..., 0] * s[..., 1] - qp[..., 1] * s[..., 0]) / denom
        u = (qp[..., 0] * r[..., 1] - qp[..., 1] * r[..., 0]) / denom
    hit = (denom != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
    ii, jj = np.nonzero(hit)
    return p[ii] + t[ii, jj][:, None] * (p2 - p)[ii]


def _triple_points(contours, x, y) -> list[tuple[float, float]]:
    """Crossings of the A = 0 and B = 0 contours.

    A = B = 0 forces D = 0, so each crossing is a point where all three
    level sets meet. The sampled D contour itself can stop a few cells
    short of such a point: near an EP3 the D < 0 region is a cusp
    narrower than the grid spacing.
    """
    pts = _intersections(contours["A"], contours["B"])
    dx, dy = x[1] - x[0], y[1] - y[0]
    out: list[tuple[float, float]] = []
    for px, py in pts:
        if any(abs(px - a) <= dx and abs(py - b) <= dy for a, b in out):
            continue
        out.append((float(px), float(py)))
    return sorted(out)


def phase_diagram(
    mode: str,
    axis1: AxisSpec,
    axis2: AxisSpec,
    eta: float = -1.0,
    kappa_c: float = 1.0,
    sign_of_Delta: int = 1,
    Delta_a: Optional[float] = None,
    tolerances: Optional[Tolerances] = None,
) -> PhaseDiagram:
    """Raster the discriminant quantities over two parameters.

    ``mode="balanced"``: axes are (G_a, Delta_a) with eta = -1, lam = 1.
    ``mode="unbalanced"``: axes are (G_a, G_c) at fixed ``eta``; Delta_a
    follows from the third pseudo-Hermitian condition (cells where that
    is impossible are marked Infeasible). Passing ``Delta_a`` instead
    holds it fixed, enforces only r1 and r2, and records r3 per cell.
    """
    tol = tolerances or Tolerances()
    x = axis1.values()
    y = axis2.values()
    X, Y = np.meshgrid(x, y, indexing="ij")
    k = kappa_c
    r3 = None
    if mode == "balanced":
        e = -1.0
        G2 = X * X
        Gc2 = G2
        Dl = Y
    elif mode == "unbalanced":
        if is_balanced(eta) or eta == 0:
            raise InvalidInputError("unbalanced mode needs eta != -1, 0")
        e = eta
        G2, Gc2 = X * X, Y * Y
        if Delta_a is None:
            d2 = -(G2 + e * Gc2) / (e * (1.0 + e)) - k * k
            with np.errstate(invalid="ignore"):
                Dl = np.where(d2 >= 0, sign_of_Delta * np.sqrt(np.where(d2 >= 0, d2, 0.0)), np.nan)
        else:
            Dl = np.full_like(X, float(Delta_a))
            r3 = G2 + e * Gc2 + e * (1.0 + e) * (Dl * Dl + k * k)
    else:
        raise InvalidInputError(f"unknown phase-diagram mode {mode!r}")
    c2 = (e - 1.0) * Dl
    c1 = G2 + Gc2 - e * Dl * Dl + (1.0 + e + e * e) * k * k
    c0 = (e * G2 - Gc2) * Dl - (1.0 + e) ** 2 * (1.0 - e) * k * k * Dl
    A = (c2 * c2 - 3.0 * c1) / k ** 2
    B = (c1 * c2 - 9.0 * c0) / k ** 3
    C = (c1 * c1 - 3.0 * c0 * c2) / k ** 4
    D = B * B - 4.0 * A * C
    classes = _classify_arrays(D, A, B, tol)
    if not np.isfinite(D).any():
        log.warning("phase diagram: every cell is infeasible")
    contours = {name: marching_squares(f, x, y) for name, f in (("D", D), ("A", A), ("B", B))}
    ep3 = _triple_points(contours, x, y)
    return PhaseDiagram(mode, axis1, axis2, D, A, B, classes, contours, ep3, r3)


@dataclass(frozen=True)
class Coalescence:
    axis: float
    x: complex
    kind: str
    gap: float


@dataclass
class BranchSet:
    axis_name: str
    axis: np.ndarray  # (m,)
    branches: np.ndarray  # (m, 3) complex, NaN where evaluation failed
    classes: list[str]
    D: np.ndarray  # normalised; NaN when not applicable
    A: np.ndarray
    B: np.ndarray
    flagged: np.ndarray  # gap below the threshold
    coalescences: list[Coalescence] = field(default_factory=list)
    errors: dict[int, str] = field(default_factory=dict)
    gap_threshold: float = 1e-3

    def gaps(self) -> np.ndarray:
        return np.array([pairwise_gap(row) for row in self.branches])


def pairwise_gap(xs) -> float:
    xs = list(xs)
    return min(abs(xs[i] - xs[j]) for i in range(3) for j in range(i + 1, 3))


def continue_branches(spectra: np.ndarray) -> np.ndarray:
    """Order each row to minimise total displacement from the previous row.

    Rows containing NaN are left as-is and skipped; matching resumes
    from the last finite row. Ties keep the first permutation in
    lexicographic order of the (Re, Im)-sorted input.
    """
    out = np.array(spectra, dtype=complex, copy=True)
    prev = None
    for k in range(out.shape[0]):
        row = out[k]
        if not np.all(np.isfinite(row)):
            continue
        row = np.array(sorted(row, key=lambda z: (z.real, z.imag)))
        if prev is not None:
            best, best_cost = None, math.inf
            for p in _PERMS:
                cost = float(np.sum(np.abs(row[list(p)] - prev)))
                if cost < best_cost:
                    best, best_cost = p, cost
            row = row[list(best)]
        out[k] = row
        prev = row
    return out


def _evaluate(family: ParamFamily, v: float, tol: Tolerances):
    """Spectrum and discriminant data at one axis value."""
    r = family(v)
    xs = spectrum(build_h_eff(r), r.omega_b)
    res = ph_residuals(r)
    ph = abs(res.r1) <= tol.ph_rate * r.kappa_c and abs(res.r2) <= tol.ph_rate * r.kappa_c
    if not ph:
        return xs, (math.nan, math.nan, math.nan), EpKind.NOT_APPLICABLE.value
    rep = normalized_discriminant(eq24_coefficients(r), r.kappa_c)
    return xs, (rep.D, rep.A, rep.B), classify_report(rep, tol).value


def _run(family, values, tol):
    rows, dab, classes, errors = [], [], [], {}
    for k, v in enumerate(values):
        try:
            xs, d, cls = _evaluate(family, float(v), tol)
        except BlueEPError as exc:
            xs, d = (complex(math.nan, math.nan),) * 3, (math.nan,) * 3
            cls = EpKind.INFEASIBLE.value
            errors[k] = f"{type(exc).__name__}: {exc}"
        rows.append(xs)
        dab.append(d)
        classes.append(cls)
    return np.array(rows, dtype=complex), np.array(dab, dtype=float).reshape(-1, 3), classes, errors


def _assemble(axis_name, values, rows, dab, classes, errors, gap_threshold) -> BranchSet:
    branches = continue_branches(rows)
    gaps = np.array([pairwise_gap(r) if np.all(np.isfinite(r)) else math.nan for r in branches])
    with np.errstate(invalid="ignore"):
        flagged = gaps < gap_threshold
    return BranchSet(
        axis_name=axis_name,
        axis=np.asarray(values, dtype=float),
        branches=branches,
        classes=classes,
        D=dab[:, 0],
        A=dab[:, 1],
        B=dab[:, 2],
        flagged=flagged,
        errors=errors,
        gap_threshold=gap_threshold,
    )


def eigen_sweep(
    family: ParamFamily,
    lo: float,
    hi: float,
    n: int = 1024,
    axis_name: str = "G_a",
    gap_threshold: float = 1e-3,
    tolerances: Optional[Tolerances] = None,
    refine: bool = True,
) -> BranchSet:
    """Follow the spectrum of a pseudo-Hermitian family along one axis.

    With ``refine`` the zeros of D between grid points are located to
    float resolution and inserted as extra sweep points, so exact EP2/EP3
    rows appear in the output. Coalescences are the refined zeros plus
    any other grid point whose minimum eigenvalue gap is below
    ``gap_threshold``. Points where ``family`` raises are kept as NaN
    rows classed Infeasible, with the message in ``errors``.
    """
    if n < 2:
        raise InvalidInputError("a sweep needs n >= 2")
    tol = tolerances or Tolerances()
    grid = np.linspace(lo, hi, n)
    rows, dab, classes, errors = _run(family, grid, tol)
    values = grid
    roots = []
    if refine and lo != hi:
        roots = locate_roots_on_grid(family, grid, dab[:, 0], tol)
        extra = [r.axis for r in roots
                 if np.min(np.abs(grid - r.axis)) > 1e-12 * max(1.0, abs(r.axis))]
        if extra:
            e_rows, e_dab, e_cls, e_err = _run(family, extra, tol)
            by_axis = {r.axis: r for r in roots}
            e_cls = [by_axis[v].kind.value for v in extra]
            values = np.concatenate([grid, extra])
            order = np.argsort(values, kind="stable")
            values = values[order]
            rows = np.concatenate([rows, e_rows])[order]
            dab = np.concatenate([dab, e_dab])[order]
            all_cls = classes + e_cls
            classes = [all_cls[i] for i in order]
            inv = {int(old): new for new, old in enumerate(order)}
            merged = {inv[k]: v for k, v in errors.items()}
            merged.update({inv[n + k]: v for k, v in e_err.items()})
            errors = merged
    bs = _assemble(axis_name, values, rows, dab, classes, errors, gap_threshold)
    coal = [Coalescence(r.axis, r.x, r.kind.value, r.spread) for r in roots]
    step = abs(hi - lo) / max(n - 1, 1)
    gaps = bs.gaps()
    for k in np.nonzero(bs.flagged)[0]:
        v = float(bs.axis[k])
        if any(abs(v - c.axis) <= step for c in coal):
            continue
        row = bs.branches[k]
        i, j = min(((0, 1), (0, 2), (1, 2)), key=lambda p: abs(row[p[0]] - row[p[1]]))
        coal.append(Coalescence(v, 0.5 * (row[i] + row[j]), bs.classes[k], float(gaps[k])))
    bs.coalescences = sorted(coal, key=lambda c: c.axis)
    return bs


def broken_ph_sweep(
    family: ParamFamily,
    lo: float,
    hi: float,
    n: int,
    offset: float,
    axis_name: str = "G_a",
    gap_threshold: float = 1e-3,
    tolerances: Optional[Tolerances] = None,
) -> BranchSet:
    """Sweep with the total rate kappa_a + gamma_b + kappa_c shifted by ``offset``.

    ``offset`` is added to gamma_b of every member of ``family``. The
    characteristic cubic then has complex coefficients, so coalescences
    are reported as the interior local minima of the minimum pairwise
    gap, each refined by a bounded scalar minimisation (kind "NearEP").
    ``offset = 0`` reproduces :func:`eigen_sweep` with ``refine=False``.
    """
    if n < 2:
        raise InvalidInputError("a sweep needs n >= 2")
    tol = tolerances or Tolerances()
    def shifted(v: float) -> ReducedParams:
        r = family(v)
        return replace(r, gamma_b=r.gamma_b + offset) if offset else r

    grid = np.linspace(lo, hi, n)
    rows, dab, classes, errors = _run(shifted, grid, tol)
    bs = _assemble(axis_name, grid, rows, dab, classes, errors, gap_threshold)
    gaps = bs.gaps()

    def gap_at(v: float) -> float:
        try:
            r = shifted(v)
        except BlueEPError:
            return math.inf
        return pairwise_gap(spectrum(build_h_eff(r), r.omega_b))

    coal = []
    for k in range(1, n - 1):
        g0, g1, g2 = gaps[k - 1], gaps[k], gaps[k + 1]
        if not (np.isfinite(g0) and np.isfinite(g1) and np.isfinite(g2)):
            continue
        if g1 <= g0 and g1 < g2:
            res = minimize_scalar(gap_at, bounds=(float(grid[k - 1]), float(grid[k + 1])),
                                  method="bounded", options={"xatol": 1e-10})
            v, gv = (float(res.x), float(res.fun)) if res.fun < g1 else (float(grid[k]), float(g1))
            r = shifted(v)
            xs = spectrum(build_h_eff(r), r.omega_b)
            i, j = min(((0, 1), (0, 2), (1, 2)), key=lambda p: abs(xs[p[0]] - xs[p[1]]))
            coal.append(Coalescence(v, 0.5 * (xs[i] + xs[j]), "NearEP", gv))
    bs.coalescences = coal
    return bs


def min_gap(b: BranchSet) -> tuple[float, float]:
    """(axis value, gap) at the global minimum of the pairwise eigenvalue gap."""
    gaps = b.gaps()
    if gaps.size == 0 or not np.isfinite(gaps).any():
        raise InvalidInputError("min_gap needs at least one finite sweep point")
    k = int(np.nanargmin(gaps))
    return float(b.axis[k]), float(gaps[k])
