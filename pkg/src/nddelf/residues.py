"""Exact residues at characteristic roots and their asymptotic expansions.

The residue at a simple root r is N(r)/D'(r).  Along the complex ladder the
residues admit an expansion c_k ~ sum_m a_m / (i*alpha_k)^m with real
coefficients a_m.  Two competing expansions are built here with the series
engine:

* ``modified``: every exp(-s*tau) is replaced by the rational (s-a)/(b*s+c),
  which is exact on the root set, before expanding.
* ``original``: every exp(-s*tau) is replaced by the constant 1/b, its value
  at the asymptotic seed positions.

The two coincide exactly when a*b + c = 0.  Coefficients beyond the second
are never hand-coded: closed-form shortcuts for the higher coefficients in
the literature are inconsistent with each other, so the series engine is
authoritative here and the second coefficient's closed form is kept as an
independent cross-check.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from . import laurent
from .charroots import Pole, characteristic_derivative, ladder_frequency
from .core import NddeProblem, weighted_exp_integral

# Guard terms carried beyond the requested order so that rounding-level
# leading coefficients cannot eat into the reported window.
_GUARD_TERMS = 4

# Imaginary contamination allowed in a coefficient that must be real.
_REAL_ATOL = 1e-9

# Components smaller than this are flagged and reported as absolute errors.
NEAR_ZERO = 1e-14


class MultiplePoleError(ArithmeticError):
    """Residue requested at a (near-)multiple pole."""


@dataclass(frozen=True)
class Residue:
    pole_index: int
    value: complex


@dataclass(frozen=True)
class ResidueAsymptotics:
    """Real coefficients a_2..a_M of c_k ~ sum_m a_m / (i*alpha_k)^m."""

    mode: str  # "original" | "modified"
    coefficients: tuple[float, ...]

    @property
    def order(self) -> int:
        return len(self.coefficients) + 1

    def coefficient(self, m: int) -> float:
        return self.coefficients[m - 2]

    def evaluate(self, alpha):
        """sum_m a_m / (i*alpha)^m for scalar or ndarray alpha."""
        alpha = np.asarray(alpha, dtype=float)
        inv = 1.0 / (1j * alpha)
        acc = np.zeros(alpha.shape, dtype=complex)
        for a_m in reversed(self.coefficients):
            acc = (acc + a_m) * inv
        acc *= inv
        return acc if acc.shape else complex(acc)


def numerator_value(p: NddeProblem, s) -> complex:
    """N(s) = H(0) - b*H(-tau) + (b*s + c) * exp(-s*tau) * I(s)."""
    s = complex(s)
    h0 = p.history.eval_complex(0.0)
    htau = p.history.eval_complex(-p.tau)
    integral = weighted_exp_integral(p.history, s, -p.tau, 0.0)
    return h0 - p.b * htau + (p.b * s + p.c) * cmath.exp(-s * p.tau) * integral


def residue_at(p: NddeProblem, pole: Pole) -> Residue:
    """N(r)/D'(r) at a refined simple pole."""
    deriv = characteristic_derivative(p, pole.value)
    if pole.multiple or abs(deriv) < 1e-9:
        raise MultiplePoleError(
            f"pole {pole.value} is not simple (|D'| = {abs(deriv):.3e})"
        )
    value = numerator_value(p, pole.value) / deriv
    if pole.kind == "real" and abs(value.imag) > 1e-12 * max(1.0, abs(value.real)):
        raise ArithmeticError(
            f"residue at real pole has imaginary part {value.imag:.3e}"
        )
    return Residue(pole_index=pole.index, value=value)


def a2_closed_form(p: NddeProblem) -> float:
    """Closed form of the leading coefficient.

    a_2 = (c*H(-tau) + a*H(0) + b*H'(-tau) - H'(0)) / tau, which equals the
    solution's derivative jump at t = 0 divided by tau.
    """
    h, hp = p.history_derivatives(2)
    return (
        p.c * h(-p.tau) + p.a * h(0.0) + p.b * hp(-p.tau) - hp(0.0)
    ) / p.tau


def _exp_substitute(p: NddeProblem, mode: str, order: int) -> laurent.TruncatedSeries:
    """Series standing in for exp(-s*tau) on the root set."""
    if mode == "modified":
        return laurent.expand_rational((1.0, -p.a), (p.b, p.c), order)
    if mode == "original":
        return laurent.constant_series(1.0 / p.b, order)
    raise ValueError(f"unknown expansion mode {mode!r}")


def _expansion(p: NddeProblem, mode: str, order: int) -> ResidueAsymptotics:
    if order < 2:
        raise ValueError(f"expansion order must be >= 2, got {order}")
    work = order + _GUARD_TERMS
    env = _exp_substitute(p, mode, work)
    env_inv = env.inverse()
    s_inv = laurent.inverse_var(work)
    prefactor = laurent.linear_series(p.b, p.c, work) * env

    derivs = p.history_derivatives(work + 1)
    h_at_0 = [float(d(0.0)) for d in derivs]
    h_at_tau = [float(d(-p.tau)) for d in derivs]

    # N(s) with the history integral continued by parts to matching order:
    # integral = sum_j (H^(j-1)(-tau) e^{s tau} - H^(j-1)(0)) / s^j
    numerator = laurent.constant_series(h_at_0[0] - p.b * h_at_tau[0], work)
    s_power = s_inv
    for j in range(1, work + 1):
        boundary = env_inv * h_at_tau[j - 1] - laurent.constant_series(h_at_0[j - 1], work)
        numerator = numerator + prefactor * s_power * boundary
        s_power = s_power * s_inv

    denominator = laurent.constant_series(1.0, work) + (
        laurent.linear_series(p.b * p.tau, p.c * p.tau - p.b, work) * env
    )
    ratio = numerator / denominator
    recentred = laurent.recentre(ratio, p.growth_rate)

    coefficients = []
    for m in range(2, order + 1):
        value = recentred.coefficient(-m) * (1j) ** m
        if abs(value.imag) > _REAL_ATOL * (1.0 + abs(value.real)):
            raise ArithmeticError(
                f"coefficient a_{m} has imaginary contamination {value.imag:.3e}"
            )
        coefficients.append(value.real)
    asym = ResidueAsymptotics(mode=mode, coefficients=tuple(coefficients))
    if mode == "modified" and not p.history.is_zero():
        closed = a2_closed_form(p)
        if abs(asym.coefficient(2) - closed) > 1e-10 * max(1.0, abs(closed)):
            raise ArithmeticError(
                f"modified a_2 = {asym.coefficient(2)!r} disagrees with its "
                f"closed form {closed!r}"
            )
    return asym


def modified_expansion(p: NddeProblem, order: int) -> ResidueAsymptotics:
    """Expansion with exp(-s*tau) -> (s-a)/(b*s+c) everywhere."""
    return _expansion(p, "modified", order)


def original_expansion(p: NddeProblem, order: int) -> ResidueAsymptotics:
    """Expansion with exp(-s*tau) -> 1/b everywhere."""
    return _expansion(p, "original", order)


def asymptotic_residue(asym: ResidueAsymptotics, k: int, alpha_k: float) -> complex:
    """Truncated expansion value at ladder index k with frequency alpha_k."""
    if k < 1:
        raise ValueError(f"ladder index k must be >= 1, got {k}")
    return asym.evaluate(alpha_k)


@dataclass(frozen=True)
class ResidueErrorRow:
    k: int
    mode: str
    re_err: float
    im_err: float
    re_kind: str  # "relative" | "absolute"
    im_kind: str


def _component_error(exact: float, approx: float) -> tuple[float, str]:
    if abs(exact) < NEAR_ZERO:
        return exact - approx, "absolute"
    return (exact - approx) / exact, "relative"


def residue_error_report(p: NddeProblem, k_range, order: int = 8,
                         refine=None) -> list[ResidueErrorRow]:
    """Component-wise errors of both expansions against exact residues.

    ``refine`` maps a ladder index to a refined Pole; by default the plain
    seeds are refined on the fly.  Components of c_k smaller than NEAR_ZERO
    are reported as absolute errors and flagged.
    """
    from .charroots import asymptotic_pole, refine_pole

    if refine is None:
        refine = lambda k: refine_pole(p, asymptotic_pole(p, k))
    expansions = {
        "original": original_expansion(p, order),
        "modified": modified_expansion(p, order),
    }
    rows: list[ResidueErrorRow] = []
    for k in k_range:
        pole = refine(k)
        exact = residue_at(p, pole).value
        alpha = ladder_frequency(p, k)
        for mode in ("original", "modified"):
            approx = expansions[mode].evaluate(alpha)
            re_err, re_kind = _component_error(exact.real, approx.real)
            im_err, im_kind = _component_error(exact.imag, approx.imag)
            rows.append(ResidueErrorRow(k=k, mode=mode, re_err=re_err,
                                        im_err=im_err, re_kind=re_kind,
                                        im_kind=im_kind))
    return rows
