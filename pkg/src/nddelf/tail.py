"""Closed-form evaluation of the harmonic tail sums.

On the base interval the sums  sum_k cos(alpha_k x)/alpha_k^m  (m even) and
sum_k sin(alpha_k x)/alpha_k^m  (m odd) are polynomials of degree m.  The
quadratic one is known in closed form; the higher ones follow by repeated
integration, with the constant of integration fixed by the value of the sum
at x = 0 (zero for the sine sums, a zeta value for the cosine sums).  For
b > 0 the frequencies are the full harmonics 2*k*pi/tau and the extension is
tau-periodic; for b < 0 they are the odd harmonics (2k-1)*pi/tau and the
extension flips sign every tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .core import NddeProblem
from .residues import ResidueAsymptotics

MAX_POLYNOMIAL_ORDER = 12

FULL_HARMONIC = "full"
ODD_HARMONIC = "odd"


def _poly_integral(coeffs: np.ndarray) -> np.ndarray:
    """Ascending-coefficient antiderivative with zero constant term."""
    return np.concatenate(([0.0], coeffs / np.arange(1, len(coeffs) + 1)))


def _constant_at_zero(parity: str, tau: float, m: int) -> float:
    """Value of the cosine-type sum at x = 0: sum_k alpha_k^(-m)."""
    if parity == FULL_HARMONIC:
        return (tau / (2.0 * math.pi)) ** m * float(zeta(m))
    # odd harmonics: sum over odd integers only
    return (tau / math.pi) ** m * (1.0 - 2.0 ** (-m)) * float(zeta(m))


def trig_kind(m: int) -> str:
    """Which trigonometric sum polys[m] represents."""
    return "cos" if m % 2 == 0 else "sin"


def harmonic_sign(m: int) -> int:
    """Sign sigma_m with Re[(i*alpha)^(-m) e^{i*alpha*x}] = sigma_m * trig_m.

    Derived from i^(-m) rather than hand-written: the pattern is
    +cos, +sin, -cos, -sin for m = 0, 1, 2, 3 (mod 4).
    """
    return 1 if m % 4 in (0, 1) else -1


@dataclass(frozen=True)
class TailPolynomialSet:
    """Polynomials polys[m](x) equal to the harmonic sums on [0, tau]."""

    tau: float
    parity: str  # FULL_HARMONIC (b > 0) | ODD_HARMONIC (b < 0)
    polys: dict[int, np.ndarray]  # m -> ascending coefficients

    @property
    def max_order(self) -> int:
        return max(self.polys)

    def evaluate(self, m: int, x):
        return np.polynomial.polynomial.polyval(x, self.polys[m])


def build_polynomials(tau: float, parity: str, M: int) -> TailPolynomialSet:
    """Polynomials for m = 2..M by integration from the quadratic base case.

    sin-type sums vanish at 0; cos-type sums at 0 equal zeta-value
    constants.  M above 12 is rejected: the closed-form constants lose
    accuracy and the series gains nothing past that order.
    """
    if M < 2:
        raise ValueError(f"need at least the quadratic polynomial, got M = {M}")
    if M > MAX_POLYNOMIAL_ORDER:
        raise ValueError(
            f"M = {M} exceeds the supported maximum {MAX_POLYNOMIAL_ORDER}"
        )
    if parity not in (FULL_HARMONIC, ODD_HARMONIC):
        raise ValueError(f"unknown parity {parity!r}")
    polys: dict[int, np.ndarray] = {}
    if parity == FULL_HARMONIC:
        # sum cos(2k pi x / tau)/alpha_k^2 = (3x^2 - 3x tau + tau^2/2)/12
        polys[2] = np.array([tau * tau / 24.0, -tau / 4.0, 0.25])
    else:
        # odd harmonics: sum cos((2k-1) pi x / tau)/alpha_k^2 = tau(tau-2x)/8
        polys[2] = np.array([tau * tau / 8.0, -tau / 4.0])
    for m in range(3, M + 1):
        integ = _poly_integral(polys[m - 1])
        if trig_kind(m) == "sin":
            # d/dx sin-sum(m) = cos-sum(m-1); starts at zero
            polys[m] = integ
        else:
            # d/dx cos-sum(m) = -sin-sum(m-1); fixed by the zeta value at 0
            integ = -integ
            integ[0] = _constant_at_zero(parity, tau, m)
            polys[m] = integ
    return TailPolynomialSet(tau=tau, parity=parity, polys=polys)


@dataclass(frozen=True)
class PeriodicPiecewise:
    """Periodic (b > 0) or anti-periodic (b < 0) extension of a polynomial.

    The polynomial is valid on [0, tau]; anti-periodic extensions flip sign
    on every successive tau interval, giving a base period of 2*tau.
    """

    tau: float
    coeffs: np.ndarray  # ascending, combined tail polynomial on [0, tau]
    anti_periodic: bool

    @property
    def base_interval_length(self) -> float:
        return 2.0 * self.tau if self.anti_periodic else self.tau

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        cycles = np.floor(t / self.tau)
        x = t - cycles * self.tau
        value = np.polynomial.polynomial.polyval(x, self.coeffs)
        if self.anti_periodic:
            sign = 1.0 - 2.0 * (np.mod(cycles, 2.0))
            value = value * sign
        return value if value.shape else float(value)


def combine(asym: ResidueAsymptotics, polyset: TailPolynomialSet) -> PeriodicPiecewise:
    """Combined polynomial sum_m sigma_m * a_m * polys[m] on the base interval."""
    coeffs = np.zeros(polyset.max_order + 1)
    for m in range(2, polyset.max_order + 1):
        if m - 2 >= len(asym.coefficients):
            break
        term = harmonic_sign(m) * asym.coefficient(m) * polyset.polys[m]
        coeffs[: len(term)] += term
    return PeriodicPiecewise(
        tau=polyset.tau,
        coeffs=coeffs,
        anti_periodic=polyset.parity == ODD_HARMONIC,
    )


def tail_component(asym: ResidueAsymptotics, polyset: TailPolynomialSet,
                   p: NddeProblem, t) -> float:
    """2 * |b|^(t/tau) * P_e(t), the closed-form tail of the series."""
    extension = combine(asym, polyset)
    t = np.asarray(t, dtype=float)
    value = 2.0 * np.exp(p.growth_rate * t) * extension.evaluate(t)
    return value if value.shape else float(value)


def partial_sum(parity: str, tau: float, m: int, x, terms: int) -> np.ndarray:
    """Direct partial sum of the defining series (validation oracle)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k = np.arange(1, terms + 1)
    if parity == FULL_HARMONIC:
        alpha = 2.0 * k * math.pi / tau
    else:
        alpha = (2.0 * k - 1.0) * math.pi / tau
    weights = alpha ** (-float(m))
    phase = np.outer(x, alpha)
    if trig_kind(m) == "cos":
        return np.cos(phase) @ weights
    return np.sin(phase) @ weights
