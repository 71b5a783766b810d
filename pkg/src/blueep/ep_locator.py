"""EP3 critical parameters, discriminant classification and 1-D EP search."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .com_model import DEFAULT_OMEGA_B, ReducedParams
from .complex_poly import (
    CubicCoefficients,
    DiscriminantReport,
    cubic_discriminant,
    solve_cubic,
)
from .errors import BlueEPError, InvalidInputError, NotApplicableError
from .pseudo_hermitian import is_balanced, mr_regime, ph_residuals

__all__ = [
    "Tolerances",
    "EpKind",
    "EpClass",
    "Ep3Criticals",
    "EpRoot",
    "ParamFamily",
    "lambda_ep3",
    "ep3_criticals",
    "eq24_coefficients",
    "normalized_discriminant",
    "classify_point",
    "classify_report",
    "line_family",
    "find_ep2",
    "locate_roots_on_grid",
]

ParamFamily = Callable[[float], ReducedParams]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerances:
    """Classification thresholds, all in kappa_c-normalised units."""

    eps_D: float = 1e-8
    eps_A: float = 1e-6
    eps_B: float = 1e-6
    ph_rate: float = 1e-10
    ph_r3: float = 1e-10


class EpKind(str, enum.Enum):
    THREE_REAL = "ThreeReal"
    ONE_REAL_PAIR = "OneRealPair"
    EP2 = "EP2"
    EP3 = "EP3"
    # sentinels for rasters and sweeps, never produced by classify_point
    INFEASIBLE = "Infeasible"
    NOT_APPLICABLE = "NA"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class EpClass:
    kind: EpKind
    report: DiscriminantReport  # normalised by powers of kappa_c


@dataclass(frozen=True)
class Ep3Criticals:
    eta: float
    kappa_c: float
    lambda_ep3: float
    g_a_ep3: float
    delta_a_ep3_plus: float
    delta_a_ep3_minus: float
    x_ep3: float  # positive-Delta branch
    x_ep3_minus: float
    g_a_min: Optional[float]  # None when Delta_a is unconstrained (eta = -1)
    regime: str

    def params(self, sign: int = 1, omega_b: float = DEFAULT_OMEGA_B) -> ReducedParams:
        """The pseudo-Hermitian parameter set sitting on this EP3."""
        delta = self.delta_a_ep3_plus if sign > 0 else self.delta_a_ep3_minus
        return ReducedParams(
            eta=self.eta,
            lam=self.lambda_ep3,
            Delta_a=delta,
            Delta_c=-self.eta * delta,
            G_a=self.g_a_ep3,
            G_c=self.lambda_ep3 * self.g_a_ep3,
            kappa_c=self.kappa_c,
            gamma_b=-(1.0 + self.eta) * self.kappa_c,
            omega_b=omega_b,
        )


def lambda_ep3(eta: float) -> float:
    """Coupling ratio G_c / G_a required for an EP3 at this eta."""
    mr_regime(eta)  # range check
    if is_balanced(eta):
        return 1.0
    return ((2.0 * eta + 1.0) / (eta * (eta + 2.0))) ** 1.5


def ep3_criticals(eta: float, kappa_c: float = 1.0) -> Ep3Criticals:
    """Closed-form location of the EP3 for a given gain/loss ratio.

    The triple root x_EP3 = (1 - eta) Delta_a / 3 must also satisfy
    3 x^2 = c1 and x^3 = -c0; together with the third pseudo-Hermitian
    condition this pins lambda, G_a and Delta_a. At eta = -1 that route
    is singular and A = B = 0 is solved directly: G_a = 2 kappa_c,
    Delta_a = +-3 sqrt(3) kappa_c.
    """
    if not kappa_c > 0:
        raise InvalidInputError("kappa_c must be positive")
    regime = mr_regime(eta).value
    if is_balanced(eta):
        d = 3.0 * math.sqrt(3.0) * kappa_c
        x = 2.0 * math.sqrt(3.0) * kappa_c
        return Ep3Criticals(-1.0, kappa_c, 1.0, 2.0 * kappa_c, d, -d, x, -x, None, regime)
    lam = lambda_ep3(eta)
    lam2 = lam * lam
    ph_factor = -(1.0 + lam2 * eta) / (eta * (1.0 + eta))
    bracket = -3.0 * (1.0 + lam2) / (1.0 + eta + eta * eta) + ph_factor
    g = 2.0 * kappa_c / math.sqrt(bracket)
    delta = math.sqrt(ph_factor * g * g - kappa_c * kappa_c)
    x = (1.0 - eta) * delta / 3.0
    g_min = kappa_c * math.sqrt(1.0 / ph_factor)
    return Ep3Criticals(eta, kappa_c, lam, g, delta, -delta, x, -x, g_min, regime)


def eq24_coefficients(r: ReducedParams) -> CubicCoefficients:
    """Real cubic in x = Omega + omega_b for a set obeying r1 = r2 = 0.

    These equal the real parts of H_eff's characteristic coefficients;
    the imaginary part of c0 is kappa_c * r3 and is dropped here.
    """
    eta, k, D = r.eta, r.kappa_c, r.Delta_a
    G2, Gc2 = r.G_a ** 2, r.G_c ** 2
    c2 = (eta - 1.0) * D
    c1 = G2 + Gc2 - eta * D * D + (1.0 + eta + eta * eta) * k * k
    c0 = (eta * G2 - Gc2) * D - (1.0 + eta) ** 2 * (1.0 - eta) * k * k * D
    return CubicCoefficients(c2, c1, c0)


def normalized_discriminant(c: CubicCoefficients, kappa_c: float) -> DiscriminantReport:
    rep = cubic_discriminant(c)
    return DiscriminantReport(
        A=rep.A / kappa_c ** 2,
        B=rep.B / kappa_c ** 3,
        C=rep.C / kappa_c ** 4,
        D=rep.D / kappa_c ** 6,
    )


def classify_report(rep: DiscriminantReport, tol: Tolerances) -> EpKind:
    if abs(rep.D) <= tol.eps_D:
        if abs(rep.A) <= tol.eps_A and abs(rep.B) <= tol.eps_B:
            return EpKind.EP3
        return EpKind.EP2
    return EpKind.THREE_REAL if rep.D < 0 else EpKind.ONE_REAL_PAIR


def classify_point(r: ReducedParams, tolerances: Optional[Tolerances] = None) -> EpClass:
    tol = tolerances or Tolerances()
    res = ph_residuals(r)
    if abs(res.r1) > tol.ph_rate * r.kappa_c or abs(res.r2) > tol.ph_rate * r.kappa_c:
        raise NotApplicableError(
            f"not pseudo-Hermitian: r1 = {res.r1:.3e}, r2 = {res.r2:.3e}"
        )
    rep = normalized_discriminant(eq24_coefficients(r), r.kappa_c)
    return EpClass(classify_report(rep, tol), rep)


_AXES = ("G_a", "Delta_a", "G_c")


def line_family(axis: str, fixed: ReducedParams) -> ParamFamily:
    """Vary one parameter of ``fixed`` while keeping r1 and r2 satisfied.

    ``G_a`` keeps lam (so G_c = lam G_a), ``Delta_a`` keeps
    Delta_c = -eta Delta_a, ``G_c`` keeps G_a and updates lam.
    """
    if axis == "G_a":
        return lambda v: replace(fixed, G_a=v, G_c=fixed.lam * v)
    if axis == "Delta_a":
        return lambda v: replace(fixed, Delta_a=v, Delta_c=-fixed.eta * v)
    if axis == "G_c":
        if fixed.G_a == 0:
            raise InvalidInputError("G_c sweeps need G_a != 0")
        return lambda v: replace(fixed, G_c=v, lam=v / fixed.G_a)
    raise InvalidInputError(f"unknown axis {axis!r}; expected one of {_AXES}")


@dataclass(frozen=True)
class EpRoot:
    """A located coalescence along a 1-D sweep."""

    axis: float
    kind: EpKind
    x: complex  # coalesced eigenvalue (mean of the repeated roots)
    x_other: complex  # the remaining root (equal to x at an EP3)
    pair: tuple[int, int]  # indices of the coalescing roots in (Re, Im) order
    spread: float  # largest distance among the coalescing roots
    report: DiscriminantReport


def _eval_D(family: ParamFamily, v: float) -> float:
    try:
        r = family(v)
    except BlueEPError:
        return math.nan
    return normalized_discriminant(eq24_coefficients(r), r.kappa_c).D


def _bisect(f: Callable[[float], float], a: float, b: float, fa: float, xtol: float) -> float:
    """Sign-change bisection, run to float resolution unless xtol > 0."""
    fb_best = None
    for _ in range(200):
        m = 0.5 * (a + b)
        if m <= min(a, b) or m >= max(a, b) or abs(b - a) <= xtol:
            break
        fm = f(m)
        if fm == 0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b, fb_best = m, fm
    fb = f(b) if fb_best is None else fb_best
    return a if abs(fa) <= abs(fb) else b


def _noise_floor(c: CubicCoefficients, kappa_c: float) -> float:
    s = max(abs(c.c2), abs(c.c1) ** 0.5, abs(c.c0) ** (1.0 / 3.0), kappa_c) / kappa_c
    return 64.0 * _EPS * s ** 6


def _describe(family: ParamFamily, v: float, tol: Tolerances, kind: Optional[EpKind] = None) -> EpRoot:
    r = family(v)
    c = eq24_coefficients(r)
    rep = normalized_discriminant(c, r.kappa_c)
    roots = solve_cubic(c)
    if kind is None:
        kind = EpKind.EP3 if abs(rep.A) <= tol.eps_A and abs(rep.B) <= tol.eps_B else EpKind.EP2
    if kind == EpKind.EP3:
        x = sum(roots) / 3.0
        spread = max(abs(roots[i] - roots[j]) for i in range(3) for j in range(i + 1, 3))
        return EpRoot(v, kind, x, x, (0, 1), spread, rep)
    pairs = [(0, 1), (0, 2), (1, 2)]
    i, j = min(pairs, key=lambda p: abs(roots[p[0]] - roots[p[1]]))
    other = roots[3 - i - j]
    return EpRoot(v, kind, 0.5 * (roots[i] + roots[j]), other, (i, j),
                  abs(roots[i] - roots[j]), rep)


def _polish_ep3(family: ParamFamily, lo: float, hi: float, v: float) -> float:
    """Sharpen a tangency location by bisecting on A or B when either crosses zero."""
    def field(name):
        def f(t):
            try:
                r = family(t)
            except BlueEPError:
                return math.nan
            rep = normalized_discriminant(eq24_coefficients(r), r.kappa_c)
            return getattr(rep, name)
        return f

    for name in ("A", "B"):
        f = field(name)
        fl, fh = f(lo), f(hi)
        if math.isfinite(fl) and math.isfinite(fh) and fl * fh < 0:
            return _bisect(f, lo, hi, fl, 0.0)
    return v


def locate_roots_on_grid(
    family: ParamFamily,
    grid: np.ndarray,
    dvals: np.ndarray,
    tol: Tolerances,
    xtol: float = 0.0,
) -> list[EpRoot]:
    """Refine every zero of D seen on a sampled grid.

    Sign changes are bisected. Interior local minima of |D| without a
    sign change are minimised with a bounded Brent search and kept when
    the minimum is at the round-off floor (D touches zero without
    crossing, as it does at an EP3 reached along a line).
    """
    f = lambda v: _eval_D(family, v)
    found: list[float] = []
    n = len(grid)
    for i in range(n):
        if dvals[i] == 0.0:
            found.append(float(grid[i]))
    for i in range(n - 1):
        a, b = dvals[i], dvals[i + 1]
        if math.isfinite(a) and math.isfinite(b) and a * b < 0:
            found.append(_bisect(f, float(grid[i]), float(grid[i + 1]), a, xtol))
    absd = np.abs(dvals)
    for i in range(1, n - 1):
        a, m, b = absd[i - 1], absd[i], absd[i + 1]
        if not (math.isfinite(a) and math.isfinite(m) and math.isfinite(b)):
            continue
        if m == 0 or not (m <= a and m <= b) or dvals[i - 1] * dvals[i + 1] <= 0:
            continue
        if dvals[i] * dvals[i - 1] <= 0 or dvals[i] * dvals[i + 1] <= 0:
            continue
        sgn = 1.0 if dvals[i] > 0 else -1.0
        lo, hi = float(grid[i - 1]), float(grid[i + 1])
        res = minimize_scalar(lambda t: sgn * f(t), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-13})
        v = float(res.x)
        r = family(v)
        c = eq24_coefficients(r)
        dmin = abs(normalized_discriminant(c, r.kappa_c).D)
        if dmin <= max(tol.eps_D, _noise_floor(c, r.kappa_c)):
            found.append(_polish_ep3(family, lo, hi, v))
    found.sort()
    unique: list[float] = []
    for v in found:
        if not unique or abs(v - unique[-1]) > 1e-12 * max(1.0, abs(v)):
            unique.append(v)
    return [_describe(family, v, tol) for v in unique]


def find_ep2(
    axis: Union[str, ParamFamily],
    lo: float,
    hi: float,
    fixed: Optional[ReducedParams] = None,
    tolerances: Optional[Tolerances] = None,
    n: int = 2048,
    xtol: float = 0.0,
) -> list[EpRoot]:
    """All EP2 (and EP3) locations of a pseudo-Hermitian family on [lo, hi].

    ``axis`` is either an axis name understood by :func:`line_family`
    (then ``fixed`` supplies everything else) or any callable mapping the
    axis value to ReducedParams. Points where the callable raises a
    package error (e.g. an infeasible coupling) are skipped. Roots come
    back in ascending axis order. ``xtol = 0`` bisects to float
    resolution.
    """
    if n < 2:
        raise InvalidInputError("grid needs at least two points")
    tol = tolerances or Tolerances()
    if isinstance(axis, str):
        if fixed is None:
            raise InvalidInputError("a named axis needs the fixed parameter context")
        family = line_family(axis, fixed)
    else:
        family = axis
    grid = np.linspace(lo, hi, n)
    dvals = np.array([_eval_D(family, float(v)) for v in grid])
    return locate_roots_on_grid(family, grid, dvals, tol, xtol)
