"""Three-mode optomechanical model: steady state, reduction, H_eff, spectrum.

Every rate and frequency is a plain float in units of kappa_c (or in any
consistent unit; nothing here assumes kappa_c == 1). Gain is encoded by a
negative rate, so cavity ``a`` with gain has ``kappa_a < 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .complex_poly import CubicCoefficients, solve_cubic
from .errors import (
    InvalidInputError,
    NumericFailureError,
    UndefinedLambdaError,
)

__all__ = [
    "DEFAULT_OMEGA_B",
    "PhysicalParams",
    "SteadyState",
    "ReducedParams",
    "EffectiveHamiltonian",
    "RwaReport",
    "steady_state",
    "reduce",
    "build_h_eff",
    "char_cubic",
    "spectrum",
    "rwa_validity",
]

DEFAULT_OMEGA_B = 50.0


def _finite(name: str, value: complex) -> None:
    v = complex(value)
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class PhysicalParams:
    """Lab-frame inputs of the driven three-mode system."""

    omega_a: float
    omega_c: float
    omega_b: float
    nu_a: float
    nu_c: float
    g_a: float
    g_c: float
    drive_a: complex
    drive_c: complex
    kappa_a: float
    kappa_c: float
    gamma_b: float

    def __post_init__(self):
        for name, value in self.__dict__.items():
            _finite(name, value)
        if not self.kappa_c > 0:
            raise InvalidInputError("kappa_c must be positive")

    @property
    def delta_a(self) -> float:
        return self.omega_a - self.nu_a

    @property
    def delta_c(self) -> float:
        return self.omega_c - self.nu_c


@dataclass(frozen=True)
class SteadyState:
    a_s: complex
    b_s: complex
    c_s: complex
    delta_a_eff: float
    delta_c_eff: float
    G_a: complex
    G_c: complex
    residual: float = 0.0
    iterations: int = 0


@dataclass(frozen=True)
class ReducedParams:
    """The (eta, lambda, Delta, G) parametrisation.

    ``Delta_a = delta'_a + omega_b`` measures the distance from the blue
    sideband; ``eta = kappa_a / kappa_c`` and ``lam = G_c / G_a``.
    ``G_c`` is stored explicitly so G_a = 0 stays representable.
    """

    eta: float
    lam: float
    Delta_a: float
    Delta_c: float
    G_a: float
    G_c: float
    kappa_c: float = 1.0
    gamma_b: float = 0.0
    omega_b: float = DEFAULT_OMEGA_B

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not math.isfinite(value):
                raise InvalidInputError(f"{name} must be finite, got {value!r}")
        if not self.kappa_c > 0:
            raise InvalidInputError("kappa_c must be positive")

    @property
    def kappa_a(self) -> float:
        return self.eta * self.kappa_c

    @property
    def delta_a_eff(self) -> float:
        return self.Delta_a - self.omega_b

    @property
    def delta_c_eff(self) -> float:
        return self.Delta_c - self.omega_b

    def scaled(self, s: float) -> "ReducedParams":
        """All rates and frequencies multiplied by s."""
        return replace(
            self,
            Delta_a=s * self.Delta_a,
            Delta_c=s * self.Delta_c,
            G_a=s * self.G_a,
            G_c=s * self.G_c,
            kappa_c=s * self.kappa_c,
            gamma_b=s * self.gamma_b,
            omega_b=s * self.omega_b,
        )


@dataclass(frozen=True)
class EffectiveHamiltonian:
    matrix: np.ndarray  # 3x3 complex, mode order (a, b, c)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (3, 3):
            raise InvalidInputError(f"H_eff must be 3x3, got {m.shape}")
        object.__setattr__(self, "matrix", m)


def _amplitudes(p: PhysicalParams, d_a: float, d_c: float):
    den_a = complex(p.kappa_a, d_a)
    den_c = complex(p.kappa_c, d_c)
    den_b = complex(p.gamma_b, p.omega_b)
    for name, den in (("kappa_a + i delta'_a", den_a), ("kappa_c + i delta'_c", den_c),
                      ("gamma_b + i omega_b", den_b)):
        if abs(den) < 1e-9:
            raise InvalidInputError(f"near-singular denominator {name} = {den}")
    a_s = p.drive_a / den_a
    c_s = p.drive_c / den_c
    b_s = -1j * (p.g_a * abs(a_s) ** 2 + p.g_c * abs(c_s) ** 2) / den_b
    return a_s, b_s, c_s


def steady_state(
    p: PhysicalParams,
    damping: float = 0.5,
    tol: float = 1e-12,
    max_iter: int = 1000,
) -> SteadyState:
    """Classical fixed point of the mean-field Langevin equations.

    The mechanical displacement shifts each cavity detuning,
    delta' = delta + g (b_s + b_s*), and the cavity amplitudes depend on
    delta'. Solved by damped Picard iteration on (delta'_a, delta'_c).
    """
    d0 = np.array([p.delta_a, p.delta_c])
    gains = np.array([p.g_a, p.g_c])

    def update(d):
        _, b_s, _ = _amplitudes(p, d[0], d[1])
        return d0 + gains * 2.0 * b_s.real

    d = d0.copy()
    scale = max(1.0, float(np.max(np.abs(d0))))
    step = math.inf
    for it in range(1, max_iter + 1):
        d_new = (1.0 - damping) * d + damping * update(d)
        step = float(np.max(np.abs(d_new - d)))
        d = d_new
        if step <= tol * scale:
            break
    else:
        raise NumericFailureError(
            f"steady state did not converge in {max_iter} iterations (last step {step:.3e})",
            residual=step,
        )
    residual = float(np.max(np.abs(update(d) - d))) / scale
    a_s, b_s, c_s = _amplitudes(p, d[0], d[1])
    return SteadyState(
        a_s=complex(a_s),
        b_s=complex(b_s),
        c_s=complex(c_s),
        delta_a_eff=float(d[0]),
        delta_c_eff=float(d[1]),
        G_a=complex(p.g_a * a_s),
        G_c=complex(p.g_c * c_s),
        residual=residual,
        iterations=it,
    )


def reduce(p: PhysicalParams, s: SteadyState, phase_convention: str = "modulus") -> ReducedParams:
    """Map a physical steady state onto ReducedParams.

    ``phase_convention``:
      * ``"modulus"``: laser phases are chosen so each G is real and
        positive, G -> |G|.
      * ``"strict"``: G must already be real (|Im G| <= 1e-12 |G|); its
        sign is kept.
    """
    if s.G_a == 0:
        raise UndefinedLambdaError("G_a = 0: lambda = G_c / G_a is undefined")
    if phase_convention == "modulus":
        G_a, G_c = abs(s.G_a), abs(s.G_c)
    elif phase_convention == "strict":
        for name, g in (("G_a", s.G_a), ("G_c", s.G_c)):
            if abs(g.imag) > 1e-12 * max(abs(g), 1e-300):
                raise InvalidInputError(f"{name} = {g} is not real under the strict convention")
        G_a, G_c = s.G_a.real, s.G_c.real
    else:
        raise InvalidInputError(f"unknown phase convention {phase_convention!r}")
    return ReducedParams(
        eta=p.kappa_a / p.kappa_c,
        lam=G_c / G_a,
        Delta_a=s.delta_a_eff + p.omega_b,
        Delta_c=s.delta_c_eff + p.omega_b,
        G_a=G_a,
        G_c=G_c,
        kappa_c=p.kappa_c,
        gamma_b=p.gamma_b,
        omega_b=p.omega_b,
    )


def build_h_eff(r: ReducedParams) -> EffectiveHamiltonian:
    """Matrix form of the linearised blue-sideband Hamiltonian."""
    ka = r.kappa_a
    G_a, G_c = complex(r.G_a), complex(r.G_c)
    h = np.array(
        [
            [r.delta_a_eff - 1j * ka, G_a, 0.0],
            [-G_a.conjugate(), -r.omega_b - 1j * r.gamma_b, -G_c.conjugate()],
            [0.0, G_c, r.delta_c_eff - 1j * r.kappa_c],
        ],
        dtype=complex,
    )
    return EffectiveHamiltonian(h)


def char_cubic(h: EffectiveHamiltonian, shift: float = 0.0) -> CubicCoefficients:
    """Monic det(x I - (H + shift I)) as (c2, c1, c0).

    Imaginary parts at the round-off level of the entries are dropped so
    pseudo-Hermitian inputs reach the real-coefficient solver.
    """
    m = h.matrix + shift * np.eye(3)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    minors = (
        m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
        + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1]
    )
    det = (
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )
    coeffs = [-tr, minors, -det]
    # the shift cancels against large entries, so rounding scales with both
    s = max(float(np.max(np.abs(m))), float(np.max(np.abs(h.matrix))), abs(shift), 1e-300)
    eps = 8 * np.finfo(float).eps
    cleaned = []
    for k, c in enumerate(coeffs, start=1):
        c = complex(c)
        if abs(c.imag) <= eps * s ** k:
            c = complex(c.real, 0.0)
        cleaned.append(c)
    return CubicCoefficients(*cleaned)


def spectrum(h: EffectiveHamiltonian, omega_b: float) -> tuple[complex, complex, complex]:
    """Eigenvalues x = Omega + omega_b of H_eff, sorted by (Re, Im)."""
    return solve_cubic(char_cubic(h, shift=omega_b))


@dataclass(frozen=True)
class RwaReport:
    ratio1_a: float
    ratio1_c: float
    ratio2_a: float
    ratio2_c: float
    threshold: float
    ok: bool
    undefined: bool = False


def rwa_validity(params, threshold: float = 0.1) -> RwaReport:
    """Check |delta' + omega_b| << |delta' - omega_b| and |G| << |delta'|.

    Accepts ReducedParams directly, or PhysicalParams (the steady state is
    solved first). Each ratio must stay below ``threshold``.
    """
    if isinstance(params, PhysicalParams):
        s = steady_state(params)
        pairs = [
            (s.delta_a_eff, abs(s.G_a)),
            (s.delta_c_eff, abs(s.G_c)),
        ]
        omega_b = params.omega_b
    else:
        pairs = [
            (params.delta_a_eff, abs(params.G_a)),
            (params.delta_c_eff, abs(params.G_c)),
        ]
        omega_b = params.omega_b
    undefined = False
    r1, r2 = [], []
    for d, g in pairs:
        den = abs(d - omega_b)
        if den == 0:
            undefined = True
            r1.append(math.inf)
        else:
            r1.append(abs(d + omega_b) / den)
        if d == 0:
            r2.append(0.0 if g == 0 else math.inf)
        else:
            r2.append(g / abs(d))
    ok = (not undefined) and all(v <= threshold for v in r1 + r2)
    return RwaReport(r1[0], r1[1], r2[0], r2[1], threshold, ok, undefined)
