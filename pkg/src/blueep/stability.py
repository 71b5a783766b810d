"""Classical stability of the linearised quadrature dynamics.

The drift matrix acts on u = (X_a, Y_a, X_b, Y_b, X_c, Y_c). Stability is
judged twice: by a Routh array on the characteristic coefficients and by
the real parts of the roots found with the Aberth oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .com_model import ReducedParams
from .complex_poly import poly_roots_oracle
from .errors import InvalidInputError, NumericFailureError

__all__ = [
    "ROUTH_EPS",
    "RouthResult",
    "StabilityReport",
    "build_drift_matrix",
    "char_coeffs",
    "routh_hurwitz",
    "stability_report",
]

ROUTH_EPS = 1e-12


def build_drift_matrix(r: ReducedParams) -> np.ndarray:
    """6x6 real drift matrix; the mechanical rate is gamma_b."""
    ka, kb, kc = r.kappa_a, r.gamma_b, r.kappa_c
    da, dc, wb = r.delta_a_eff, r.delta_c_eff, r.omega_b
    Ga, Gc = r.G_a, r.G_c
    return np.array(
        [
            [-ka, da, 0.0, -Ga, 0.0, 0.0],
            [-da, -ka, -Ga, 0.0, 0.0, 0.0],
            [0.0, -Ga, -kb, wb, 0.0, -Gc],
            [-Ga, 0.0, -wb, -kb, -Gc, 0.0],
            [0.0, 0.0, 0.0, -Gc, -kc, dc],
            [0.0, 0.0, -Gc, 0.0, -dc, -kc],
        ],
        dtype=float,
    )


def char_coeffs(m: np.ndarray) -> np.ndarray:
    """Coefficients [c0, ..., c_{n-1}] of the monic det(lambda I - M).

    Faddeev-LeVerrier recurrence, run in exact rational arithmetic on the
    float entries and rounded once at the end. In floating point the
    recurrence loses about |M|^n / |c0| * eps to cancellation, which is
    ~1e-9 relative for the usual omega_b = 50 kappa_c.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if m.ndim != 2 or m.shape != (n, n):
        raise InvalidInputError(f"square matrix required, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix entries must be finite")
    a = np.array([[Fraction(float(v)) for v in row] for row in m], dtype=object)
    eye = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
    coeffs = [Fraction(0)] * n + [Fraction(1)]
    mk = eye * 0
    for k in range(1, n + 1):
        mk = a @ mk + eye * coeffs[n - k + 1]
        coeffs[n - k] = -np.trace(a @ mk) / k
    return np.array([float(c) for c in coeffs[:n]])


@dataclass(frozen=True)
class RouthResult:
    stable: bool
    marginal: bool
    first_column: np.ndarray
    table: np.ndarray

    def __iter__(self):
        # allows ``stable, table = routh_hurwitz(c)``
        return iter((self.stable, self.table))


def routh_hurwitz(coeffs, eps: float = ROUTH_EPS) -> RouthResult:
    """Routh array for the monic polynomial with low-order-first ``coeffs``.

    The polynomial is rescaled (lambda -> s lambda) so its coefficients
    are O(1) before the array is built. A zero pivot is replaced by eps;
    an all-zero row is replaced by the derivative of the auxiliary
    polynomial above it. Either event marks the verdict marginal, and a
    marginal verdict is never stable.
    """
    c = np.asarray(coeffs, dtype=float)
    n = len(c)
    if n == 0 or not np.all(np.isfinite(c)):
        raise InvalidInputError("coefficients must be finite and non-empty")
    nz = np.abs(c) > 0
    s = max((abs(c[k]) ** (1.0 / (n - k)) for k in range(n) if nz[k]), default=1.0)
    # highest power first, monic, scaled
    a = np.array([1.0] + [c[k] / s ** (n - k) for k in range(n - 1, -1, -1)])
    width = n // 2 + 1
    table = np.zeros((n + 1, width))
    table[0, : len(a[0::2])] = a[0::2]
    table[1, : len(a[1::2])] = a[1::2]
    marginal = False
    for i in range(1, n + 1):
        row = table[i]
        if np.all(np.abs(row) <= eps):
            # auxiliary polynomial of degree n - i + 1 from row i - 1
            marginal = True
            deg = n - i + 1
            powers = deg - 2 * np.arange(width)
            row[:] = np.where(powers > 0, table[i - 1] * powers, 0.0)
            if np.all(np.abs(row) <= eps):
                row[0] = eps
        if abs(row[0]) <= eps:
            marginal = True
            row[0] = eps if row[0] >= 0 else -eps
        if i == n:
            break
        up, cur = table[i - 1], table[i]
        nxt = np.zeros(width)
        nxt[:-1] = (cur[0] * up[1:] - up[0] * cur[1:]) / cur[0]
        table[i + 1] = nxt
    first = table[:, 0].copy()
    stable = bool(np.all(first > 0)) and not marginal
    return RouthResult(stable, marginal, first, table)


@dataclass(frozen=True)
class StabilityReport:
    char_coeffs: np.ndarray  # c0..c5
    rh_stable: bool
    eigen_stable: bool | None
    max_real_part: float
    rh_table: np.ndarray  # first column of the Routh array
    marginal: bool = False
    oracle_failed: bool = False


def stability_report(r: ReducedParams) -> StabilityReport:
    m = build_drift_matrix(r)
    c = char_coeffs(m)
    rh = routh_hurwitz(c)
    try:
        roots = poly_roots_oracle(np.concatenate(([1.0], c[::-1])))
    except NumericFailureError:
        return StabilityReport(c, rh.stable, None, float("nan"), rh.first_column,
                               rh.marginal, oracle_failed=True)
    max_re = float(np.max(np.real(roots)))
    return StabilityReport(c, rh.stable, max_re < 0.0, max_re, rh.first_column, rh.marginal)
