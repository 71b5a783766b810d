"""Pseudo-Hermiticity conditions and parameter sets that satisfy them."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .com_model import DEFAULT_OMEGA_B, ReducedParams
from .errors import (
    Ep3InfeasibleEtaError,
    InfeasibleCouplingError,
    InfeasibleLambdaError,
    InvalidInputError,
    NotApplicableError,
)

__all__ = [
    "BALANCED_ETA_TOL",
    "PhResiduals",
    "MrRegime",
    "ph_residuals",
    "is_pseudo_hermitian",
    "enforce_ph",
    "enforce_ph_balanced",
    "ph_feasible",
    "mr_regime",
    "min_coupling",
    "is_balanced",
]

BALANCED_ETA_TOL = 1e-9


@dataclass(frozen=True)
class PhResiduals:
    r1: float  # gamma_b + (1 + eta) kappa_c
    r2: float  # Delta_c + eta Delta_a
    r3: float  # (1 + lam^2 eta) G_a^2 + eta (1 + eta)(Delta_a^2 + kappa_c^2)

    def ok(self, tol_rate: float = 1e-10, tol_r3: float = 1e-10) -> bool:
        return abs(self.r1) <= tol_rate and abs(self.r2) <= tol_rate and abs(self.r3) <= tol_r3


class MrRegime(enum.Enum):
    LOSS = "Loss"
    NEUTRAL = "Neutral"
    GAIN = "Gain"


def is_balanced(eta: float) -> bool:
    return abs(eta + 1.0) < BALANCED_ETA_TOL


def ph_residuals(r: ReducedParams) -> PhResiduals:
    eta, k, lam = r.eta, r.kappa_c, r.lam
    return PhResiduals(
        r1=r.gamma_b + (1.0 + eta) * k,
        r2=r.Delta_c + eta * r.Delta_a,
        r3=(1.0 + lam * lam * eta) * r.G_a ** 2 + eta * (1.0 + eta) * (r.Delta_a ** 2 + k ** 2),
    )


def is_pseudo_hermitian(r: ReducedParams, tol_rate: float = 1e-10, tol_r3: float = 1e-10) -> bool:
    return ph_residuals(r).ok(tol_rate, tol_r3)


def ph_feasible(eta: float, lam: float) -> bool:
    """(1 + eta)(1 + lam^2 eta) > 0; undefined in the balanced case."""
    if is_balanced(eta):
        raise NotApplicableError("feasibility inequality does not apply at eta = -1")
    return (1.0 + eta) * (1.0 + lam * lam * eta) > 0.0


def min_coupling(eta: float, lam: float, kappa_c: float = 1.0) -> float:
    """Smallest |G_a| for which the pseudo-Hermitian Delta_a is real.

    Raises InfeasibleCouplingError (with g_min = inf) when no coupling works.
    """
    if is_balanced(eta):
        raise NotApplicableError("Delta_a is free at eta = -1; no minimum coupling")
    if eta == 0:
        raise InvalidInputError("eta = 0 admits no pseudo-Hermitian set")
    ratio = -eta * (1.0 + eta) / (1.0 + lam * lam * eta)
    if ratio <= 0.0:
        # for eta > 0 the required Delta_a^2 is negative at every coupling
        raise InfeasibleCouplingError(
            f"no coupling gives a real Delta_a for eta = {eta}, lam = {lam}", g_min=math.inf
        )
    return kappa_c * math.sqrt(ratio)


def enforce_ph(
    eta: float,
    lam: float,
    G_a: float,
    kappa_c: float = 1.0,
    sign_of_Delta: int = 1,
    omega_b: float = DEFAULT_OMEGA_B,
) -> ReducedParams:
    """Build the pseudo-Hermitian parameter set for (eta, lam, G_a).

    gamma_b balances the total rate, Delta_c = -eta Delta_a, G_c = lam G_a
    and Delta_a^2 = -(1 + lam^2 eta) G_a^2 / (eta (1 + eta)) - kappa_c^2.
    """
    if is_balanced(eta):
        raise InvalidInputError("eta = -1 is singular here; use enforce_ph_balanced")
    if eta == 0:
        raise InvalidInputError("eta = 0 admits no pseudo-Hermitian set")
    if sign_of_Delta not in (1, -1):
        raise InvalidInputError("sign_of_Delta must be +1 or -1")
    if not ph_feasible(eta, lam):
        raise InfeasibleLambdaError(
            f"(1 + eta)(1 + lam^2 eta) = {(1 + eta) * (1 + lam * lam * eta):.6g} <= 0 "
            f"for eta = {eta}, lam = {lam}"
        )
    factor = -(1.0 + lam * lam * eta) / (eta * (1.0 + eta))
    delta_sq = factor * G_a * G_a - kappa_c * kappa_c
    if delta_sq < 0.0:
        g_min = min_coupling(eta, lam, kappa_c)
        raise InfeasibleCouplingError(
            f"|G_a| = {abs(G_a):.6g} is below the minimum {g_min:.6g}", g_min=g_min
        )
    Delta_a = sign_of_Delta * math.sqrt(delta_sq)
    return ReducedParams(
        eta=eta,
        lam=lam,
        Delta_a=Delta_a,
        Delta_c=-eta * Delta_a,
        G_a=G_a,
        G_c=lam * G_a,
        kappa_c=kappa_c,
        gamma_b=-(1.0 + eta) * kappa_c,
        omega_b=omega_b,
    )


def enforce_ph_balanced(
    Delta_a: float,
    G_a: float,
    kappa_c: float = 1.0,
    omega_b: float = DEFAULT_OMEGA_B,
) -> ReducedParams:
    """Gain-loss balanced set: eta = -1, lam = 1, gamma_b = 0, Delta_c = Delta_a."""
    return ReducedParams(
        eta=-1.0,
        lam=1.0,
        Delta_a=Delta_a,
        Delta_c=Delta_a,
        G_a=G_a,
        G_c=G_a,
        kappa_c=kappa_c,
        gamma_b=0.0,
        omega_b=omega_b,
    )


def mr_regime(eta: float) -> MrRegime:
    if not -2.0 < eta < -0.5:
        raise Ep3InfeasibleEtaError(
            f"eta = {eta} outside (-2, -1/2): (eta + 2)(2 eta + 1) < 0 is violated"
        )
    if is_balanced(eta):
        return MrRegime.NEUTRAL
    return MrRegime.LOSS if eta < -1.0 else MrRegime.GAIN
