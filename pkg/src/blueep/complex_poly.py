"""Cubic solving, a general polynomial root oracle and cubic discriminants.

Complex scalars are plain Python ``complex`` values throughout. All
tolerances assume quantities already expressed in units of kappa_c.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError, NotApplicableError, NumericFailureError

__all__ = [
    "CubicCoefficients",
    "DiscriminantReport",
    "solve_cubic",
    "poly_roots_oracle",
    "cubic_discriminant",
    "cluster_roots",
    "cubic_residual_bound",
    "sort_roots",
]

_SQRT3 = math.sqrt(3.0)
_OMEGA = complex(-0.5, _SQRT3 / 2)  # primitive cube root of unity


@dataclass(frozen=True)
class CubicCoefficients:
    """Coefficients of the monic cubic x^3 + c2 x^2 + c1 x + c0."""

    c2: complex
    c1: complex
    c0: complex

    def __post_init__(self):
        for name in ("c2", "c1", "c0"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    def as_tuple(self) -> tuple[complex, complex, complex]:
        return self.c2, self.c1, self.c0

    def is_real(self, tol: float = 0.0) -> bool:
        return all(abs(c.imag) <= tol for c in self.as_tuple())

    def __call__(self, x: complex) -> complex:
        return ((x + self.c2) * x + self.c1) * x + self.c0


@dataclass(frozen=True)
class DiscriminantReport:
    A: float
    B: float
    C: float
    D: float


def sort_roots(roots: Sequence[complex]) -> tuple[complex, ...]:
    """Deterministic (Re, Im) lexicographic order."""
    return tuple(sorted(roots, key=lambda z: (z.real, z.imag)))


def cubic_residual_bound(c: CubicCoefficients) -> float:
    """Scale used for the |p(x)| acceptance bound of solve_cubic."""
    return max(1.0, abs(c.c2) ** 3, abs(c.c1) ** 1.5, abs(c.c0))


def _check_finite(*values: complex) -> None:
    for v in values:
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise InvalidInputError(f"non-finite coefficient {v!r}")


def _newton_polish(c: CubicCoefficients, x, steps: int = 3):
    """A few guarded Newton steps; a step is kept only if |p| drops."""
    c2, c1, c0 = c.as_tuple()
    if isinstance(x, float):
        c2, c1, c0 = c2.real, c1.real, c0.real
    px = ((x + c2) * x + c1) * x + c0
    for _ in range(steps):
        if px == 0:
            break
        dp = (3 * x + 2 * c2) * x + c1
        if dp == 0:
            break
        xn = x - px / dp
        pn = ((xn + c2) * xn + c1) * xn + c0
        if abs(pn) >= abs(px):
            break
        x, px = xn, pn
    return x


def _real_quadratic(b: float, q: float) -> list[complex]:
    disc = b * b - 4.0 * q
    if disc >= 0.0:
        s = math.sqrt(disc)
        w = -0.5 * (b + math.copysign(s, b))
        if w == 0.0:
            return [0j, 0j]
        return [complex(w), complex(q / w)]
    re = -0.5 * b
    im = 0.5 * math.sqrt(-disc)
    return [complex(re, im), complex(re, -im)]


def _complex_quadratic(b: complex, q: complex) -> list[complex]:
    s = cmath.sqrt(b * b - 4.0 * q)
    if (b.conjugate() * s).real < 0:
        s = -s
    w = -0.5 * (b + s)
    if w == 0:
        return [0j, 0j]
    return [w, q / w]


def _cardano_candidates(c2: complex, c1: complex, c0: complex) -> list[complex]:
    d0 = c2 * c2 - 3.0 * c1
    d1 = 2.0 * c2 ** 3 - 9.0 * c2 * c1 + 27.0 * c0
    s = cmath.sqrt(d1 * d1 - 4.0 * d0 ** 3)
    # larger-magnitude branch of the intermediate avoids cancellation
    cube = 0.5 * (d1 + s) if abs(d1 + s) >= abs(d1 - s) else 0.5 * (d1 - s)
    if cube == 0:
        return [-c2 / 3.0] * 3
    root = cube ** (1.0 / 3.0)
    out = []
    for k in range(3):
        ck = root * _OMEGA ** k
        out.append(-(c2 + ck + d0 / ck) / 3.0)
    return out


def _real_anchor(c2: float, c1: float, c0: float) -> float:
    """One real root of a real monic cubic, before polishing."""
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2 ** 3 / 27.0 - c2 * c1 / 3.0 + c0
    shift = -c2 / 3.0
    if p < 0.0:
        m = math.sqrt(-p / 3.0)
        arg = 3.0 * q / (2.0 * p * m) if m > 0 else 0.0
        if -1.0 <= arg <= 1.0:
            # three real roots; take the largest in magnitude for deflation
            theta = math.acos(arg) / 3.0
            ts = [2.0 * m * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
            return max((t + shift for t in ts), key=abs)
    cands = _cardano_candidates(complex(c2), complex(c1), complex(c0))
    return min(cands, key=lambda z: (abs(z.imag), -abs(z.real))).real


def _deflate(c: CubicCoefficients, r, quadratic):
    """Deflate the root r, choosing the better of two product formulas."""
    c2, c1, c0 = c.as_tuple()
    if isinstance(r, float):
        c2, c1, c0 = c2.real, c1.real, c0.real
    b = c2 + r
    options = [c1 + r * b]
    if r != 0:
        options.append(-c0 / r)
    best, best_res = None, math.inf
    for q in options:
        pair = quadratic(b, q)
        res = max(abs(c(z)) for z in pair)
        if res < best_res:
            best, best_res = pair, res
    return best


def _solve_real(c: CubicCoefficients) -> list[complex]:
    c2, c1, c0 = (v.real for v in c.as_tuple())
    if c0 == 0.0:
        return [0j] + _real_quadratic(c2, c1)
    r = _newton_polish(c, _real_anchor(c2, c1, c0))
    pair = _deflate(c, r, _real_quadratic)
    if pair[0].imag == 0.0:
        pair = [complex(_newton_polish(c, z.real)) for z in pair]
    else:
        z = _newton_polish(c, pair[0])
        if abs(z.imag) > 0.0:
            pair = [z, z.conjugate()]
    return [complex(r)] + pair


def _solve_complex(c: CubicCoefficients) -> list[complex]:
    c2, c1, c0 = c.as_tuple()
    if c0 == 0:
        return [0j] + _complex_quadratic(c2, c1)
    r = max(_cardano_candidates(c2, c1, c0), key=abs)
    r = _newton_polish(c, r)
    pair = _deflate(c, r, _complex_quadratic)
    return [r] + [_newton_polish(c, z) for z in pair]


def solve_cubic(c: CubicCoefficients) -> tuple[complex, complex, complex]:
    """Roots of x^3 + c2 x^2 + c1 x + c0, sorted by (Re, Im).

    Real coefficients take a real-arithmetic path, so a real input yields
    either three exactly real roots or one real root and an exact
    conjugate pair. Complex coefficients use the general Cardano form.
    One root comes from the closed form on its stable branch, the other
    two from the deflated quadratic, and each is Newton-polished.
    """
    _check_finite(*c.as_tuple())
    roots = _solve_real(c) if c.is_real() else _solve_complex(c)
    return sort_roots(roots)  # type: ignore[return-value]


def cubic_discriminant(c: CubicCoefficients, imag_tol: float = 1e-12) -> DiscriminantReport:
    """A = c2^2 - 3c1, B = c1 c2 - 9c0, C = c1^2 - 3c0 c2, D = B^2 - 4AC.

    D < 0 means three distinct real roots, D > 0 one real root and a
    conjugate pair, D = 0 a repeated root (a triple one when A = B = 0).
    """
    _check_finite(*c.as_tuple())
    if not c.is_real(imag_tol):
        raise NotApplicableError(
            "discriminant classification needs real coefficients; "
            f"got imaginary parts {[v.imag for v in c.as_tuple()]}"
        )
    c2, c1, c0 = (v.real for v in c.as_tuple())
    A = c2 * c2 - 3.0 * c1
    B = c1 * c2 - 9.0 * c0
    C = c1 * c1 - 3.0 * c0 * c2
    return DiscriminantReport(A=A, B=B, C=C, D=B * B - 4.0 * A * C)


def _scaled_residuals(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    p = np.polyval(coeffs, z)
    absz = np.abs(z)
    denom = np.polyval(np.abs(coeffs), absz)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.abs(p) / denom
    return np.where(denom == 0, 0.0, out)


def poly_roots_oracle(
    coeffs: Sequence[complex],
    tol: float = 1e-9,
    max_iter: int = 500,
) -> list[complex]:
    """All roots of a polynomial by Aberth-Ehrlich iteration.

    ``coeffs`` run from the highest degree down (numpy.polyval order);
    degree must be at most 8. Initial guesses sit on a circle of radius
    given by the Fujiwara bound, rotated by a fixed 0.4 rad offset, so
    results are deterministic. Convergence is judged on the backward
    error |p(z)| / sum |a_k| |z|^k, which must reach ``tol``.

    Clustered roots (multiplicity m) converge only to about
    eps^(1/m) relative accuracy: a six-fold root lands within ~1e-2.
    """
    a = np.asarray([complex(v) for v in coeffs], dtype=complex)
    if a.size == 0:
        raise InvalidInputError("empty coefficient list")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("non-finite coefficient")
    if a[0] == 0:
        raise InvalidInputError("leading coefficient must be nonzero")
    if a.size - 1 > 8:
        raise InvalidInputError(f"degree {a.size - 1} exceeds 8")
    zeros = 0
    while a.size > 1 and a[-1] == 0:
        a = a[:-1]
        zeros += 1
    n = a.size - 1
    fixed = [0j] * zeros
    if n == 0:
        return fixed
    a = a / a[0]
    if n == 1:
        return fixed + [complex(-a[1])]

    da = np.polyder(a)
    bound = 2.0 * max(abs(a[k]) ** (1.0 / k) for k in range(1, n + 1))
    bound = max(bound, 1e-300)
    z = bound * np.exp(1j * (2.0 * np.pi * np.arange(n) / n + 0.4))
    eps = np.finfo(float).eps
    done = np.zeros(n, dtype=bool)
    for _ in range(max_iter):
        p = np.polyval(a, z)
        dp = np.polyval(da, z)
        res = _scaled_residuals(a, z)
        done |= (res <= 4 * n * eps) | (p == 0)
        if done.all():
            break
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = p / dp
            step = ratio / (1.0 - ratio * inv.sum(axis=1))
        step = np.where(np.isfinite(step), step, 0.0)
        step[done] = 0.0
        z = z - step
        small = np.abs(step) <= 2 * eps * np.maximum(np.abs(z), 1e-300)
        done |= small & (res <= tol)
    worst = float(_scaled_residuals(a, z).max())
    if not np.all(np.isfinite(z)) or worst > tol:
        raise NumericFailureError(
            f"root oracle did not converge in {max_iter} iterations "
            f"(worst scaled residual {worst:.3e})",
            residual=worst,
        )
    return fixed + [complex(v) for v in z]


def cluster_roots(roots: Sequence[complex], radius: float = 1e-6) -> list[list[complex]]:
    """Group roots closer than ``radius`` (single linkage).

    Multiplicity detection is left to callers; solve_cubic never merges
    nearby roots itself.
    """
    groups: list[list[complex]] = []
    for r in roots:
        hits = [g for g in groups if any(abs(r - s) < radius for s in g)]
        merged = [r]
        for g in hits:
            merged.extend(g)
            groups.remove(g)
        groups.append(merged)
    return groups
