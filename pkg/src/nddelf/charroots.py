"""Roots of the characteristic function D(s) = s - a - (b*s + c)*exp(-s*tau).

The root set consists of at most two real roots plus an infinite ladder of
complex roots approaching the vertical line Re(s) = ln|b|/tau with uniform
frequency spacing 2*pi/tau.  Ladder roots are seeded by asymptotic formulas
and refined by damped Newton iteration; every returned root carries its
residual |D(root)|.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

from .core import NddeProblem

# Residual acceptance: |D(root)| <= RESIDUAL_RTOL * max(1, |root|).
RESIDUAL_RTOL = 1e-12

_NEWTON_MAX_ITER = 100
_REAL_MAX_ITER = 200
_DAMPING_STEPS = 8


class RefinementError(RuntimeError):
    """Newton refinement failed; carries the last iterate and residual."""

    def __init__(self, message: str, last_iterate: complex, residual: float):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


@dataclass(frozen=True)
class Pole:
    """A refined characteristic root.

    Complex poles are stored with positive imaginary part only; their
    conjugates are implicit in the 2*Re(...) series assembly.  ``index`` is
    the ladder index k for complex poles and a 0-based position for real
    roots.  ``multiple`` marks a (near-)double root, which the series
    solvers refuse.
    """

    value: complex
    index: int
    kind: str  # "real" | "complex"
    residual: float
    multiple: bool = False


@dataclass(frozen=True)
class ImprovedPoleCorrection:
    """Coefficients of the seed correction beta/k^2 + i*gamma/k."""

    beta: float
    gamma: float


@dataclass(frozen=True)
class PoleFamily:
    """Real roots plus the complex ladder k = 1..N with seed bookkeeping."""

    real_poles: tuple[Pole, ...]
    complex_poles: tuple[Pole, ...]
    seeds: tuple[complex, ...]
    improved_seeds: tuple[complex, ...]
    growth_rate: float
    frequencies: tuple[float, ...]


def characteristic_value(p: NddeProblem, s) -> complex:
    """D(s) = s - a - (b*s + c) * exp(-s*tau)."""
    s = complex(s)
    return s - p.a - (p.b * s + p.c) * cmath.exp(-s * p.tau)


def characteristic_derivative(p: NddeProblem, s) -> complex:
    """D'(s) = 1 + (b*s*tau - b + c*tau) * exp(-s*tau)."""
    s = complex(s)
    return 1.0 + (p.b * s * p.tau - p.b + p.c * p.tau) * cmath.exp(-s * p.tau)


def ladder_frequency(p: NddeProblem, k: int) -> float:
    """Imaginary part alpha_k of the k-th ladder seed."""
    if p.b > 0:
        return 2.0 * k * math.pi / p.tau
    return (2.0 * k - 1.0) * math.pi / p.tau


def asymptotic_pole(p: NddeProblem, k: int) -> complex:
    """Leading seed (ln|b| + i*alpha_k*tau)/tau for the k-th ladder root.

    For b > 0 the frequencies are full harmonics 2*k*pi/tau; for b < 0 the
    exponential must reach the negative value 1/b, which shifts the ladder
    onto the odd harmonics (2k - 1)*pi/tau.
    """
    if k < 1:
        raise ValueError(f"ladder index k must be >= 1, got {k}")
    return complex(math.log(abs(p.b)) / p.tau, ladder_frequency(p, k))


def improved_pole_correction(p: NddeProblem) -> ImprovedPoleCorrection:
    """beta and gamma for the refined seed ansatz; both vanish when ab+c = 0.

    The constants come from matching the asymptotic expansions of the two
    sides of exp(-s*tau) = (s - a)/(b*s + c) along the ladder; the same
    matching applies for either sign of b with ln|b| in place of ln b.
    """
    a, b, c, tau = p.a, p.b, p.c, p.tau
    q = a * b + c
    beta = q * (2.0 * b * math.log(abs(b)) - tau * (a * b - c)) / (8.0 * b * b * math.pi**2)
    gamma = -q / (2.0 * b * math.pi)
    return ImprovedPoleCorrection(beta=beta, gamma=gamma)


def improved_asymptotic_pole(p: NddeProblem, k: int) -> complex:
    """Seed plus the beta/k^2 + i*gamma/k correction."""
    corr = improved_pole_correction(p)
    return asymptotic_pole(p, k) + complex(corr.beta / k**2, corr.gamma / k)


def _band_index(p: NddeProblem, s: complex) -> int:
    """Ladder index whose frequency band contains Im(s)."""
    if p.b > 0:
        return round(s.imag * p.tau / (2.0 * math.pi))
    return round((s.imag * p.tau / math.pi + 1.0) / 2.0)


def refine_pole(p: NddeProblem, seed: complex) -> Pole:
    """Damped Newton iteration on D starting from ``seed``.

    The refined root must stay within half a frequency spacing of the
    seed's imaginary part; converging into a neighbouring band is an error
    naming both ladder indices.
    """
    seed = complex(seed)
    if not (math.isfinite(seed.real) and math.isfinite(seed.imag)):
        raise ValueError(f"seed must be finite, got {seed}")
    s = seed
    fval = characteristic_value(p, s)
    for _ in range(_NEWTON_MAX_ITER):
        if abs(fval) <= RESIDUAL_RTOL * max(1.0, abs(s)):
            break
        deriv = characteristic_derivative(p, s)
        if deriv == 0:
            raise RefinementError(
                f"zero characteristic derivative at {s}", s, abs(fval)
            )
        step = fval / deriv
        # step halving when |D| does not decrease: seeds are crude for small k
        for _ in range(_DAMPING_STEPS):
            candidate = s - step
            cval = characteristic_value(p, candidate)
            if abs(cval) < abs(fval):
                break
            step *= 0.5
        else:
            candidate = s - step
            cval = characteristic_value(p, candidate)
        s, fval = candidate, cval
    residual = abs(fval)
    if residual > RESIDUAL_RTOL * max(1.0, abs(s)):
        raise RefinementError(
            f"Newton did not converge from seed {seed}: residual {residual:.3e}",
            s,
            residual,
        )
    half_spacing = math.pi / p.tau
    if abs(s.imag - seed.imag) > half_spacing:
        k_seed = _band_index(p, seed)
        k_hit = _band_index(p, s)
        raise RefinementError(
            f"refinement escaped band k={k_seed} and converged in band k={k_hit}",
            s,
            residual,
        )
    return Pole(value=s, index=_band_index(p, seed), kind="complex", residual=residual)


def real_root_scan_window(p: NddeProblem) -> float:
    """Half-width R of the real-axis scan interval [-R, R]."""
    return 10.0 * (1.0 + abs(p.a) + abs(p.c) + abs(math.log(abs(p.b))) / p.tau)


def _refine_real(p: NddeProblem, lo: float, hi: float) -> tuple[float, float, bool]:
    """Hybrid bisection+Newton on a sign-change bracket; returns (root,
    residual, converged)."""

    def dval(x: float) -> float:
        return characteristic_value(p, x).real

    flo, fhi = dval(lo), dval(hi)
    x = 0.5 * (lo + hi)
    for _ in range(_REAL_MAX_ITER):
        fx = dval(x)
        if abs(fx) <= RESIDUAL_RTOL * max(1.0, abs(x)):
            return x, abs(fx), True
        if flo * fx < 0:
            hi, fhi = x, fx
        else:
            lo, flo = x, fx
        deriv = characteristic_derivative(p, x).real
        x_newton = x - fx / deriv if deriv != 0 else math.nan
        if math.isfinite(x_newton) and lo < x_newton < hi:
            x = x_newton
        else:
            x = 0.5 * (lo + hi)
        if hi - lo < 1e-300:
            break
    fx = dval(x)
    return x, abs(fx), abs(fx) <= RESIDUAL_RTOL * max(1.0, abs(x))


def find_real_roots(p: NddeProblem) -> list[Pole]:
    """All real characteristic roots inside the scan window (at most 2).

    A uniform scan with step tau/50 brackets sign changes, each refined by
    bisection+Newton.  A tangency (double root) is reported as a single
    Pole with the ``multiple`` flag set.
    """
    radius = real_root_scan_window(p)
    step = p.tau / 50.0
    roots: list[Pole] = []
    x = -radius
    fprev = characteristic_value(p, x).real
    while x < radius:
        x_next = min(x + step, radius)
        fnext = characteristic_value(p, x_next).real
        if fprev == 0.0:
            roots.append((x, 0.0, True))
        elif fprev * fnext < 0:
            roots.append(_refine_real(p, x, x_next))
        x, fprev = x_next, fnext
    poles: list[Pole] = []
    for idx, (root, residual, converged) in enumerate(roots):
        if not converged:
            warnings.warn(
                f"real-root bracket near {root:.6g} failed to converge "
                f"(residual {residual:.3e})",
                RuntimeWarning,
                stacklevel=2,
            )
        deriv = abs(characteristic_derivative(p, root))
        multiple = deriv < 1e-6
        poles.append(
            Pole(value=complex(root), index=idx, kind="real", residual=residual,
                 multiple=multiple)
        )
    # a tangency shows up as two brackets collapsing onto one point
    deduped: list[Pole] = []
    for pole in sorted(poles, key=lambda q: q.value.real):
        if deduped and abs(pole.value - deduped[-1].value) < 1e-9 * max(1.0, abs(pole.value)):
            deduped[-1] = Pole(
                value=deduped[-1].value,
                index=deduped[-1].index,
                kind="real",
                residual=deduped[-1].residual,
                multiple=True,
            )
            continue
        deduped.append(pole)
    return [
        Pole(value=q.value, index=i, kind="real", residual=q.residual, multiple=q.multiple)
        for i, q in enumerate(deduped)
    ]


def build_pole_family(p: NddeProblem, N: int) -> PoleFamily:
    """Real roots plus refined ladder roots k = 1..N with their seeds."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if abs(abs(p.b) - 1.0) < 1e-15:
        warnings.warn(
            "|b| = 1 places the pole ladder on the imaginary axis; the tail "
            "growth factor is 1 and the series converges only marginally",
            RuntimeWarning,
            stacklevel=2,
        )
    real_poles = tuple(find_real_roots(p))
    seeds = []
    improved = []
    freqs = []
    complex_poles = []
    for k in range(1, N + 1):
        seed = asymptotic_pole(p, k)
        seeds.append(seed)
        improved.append(improved_asymptotic_pole(p, k))
        freqs.append(ladder_frequency(p, k))
        try:
            pole = refine_pole(p, seed)
        except RefinementError as exc:
            raise RefinementError(f"ladder index k={k}: {exc}", exc.last_iterate,
                                  exc.residual) from exc
        complex_poles.append(Pole(value=pole.value, index=k, kind="complex",
                                  residual=pole.residual))
    for prev, cur in zip(complex_poles, complex_poles[1:]):
        if not cur.value.imag > prev.value.imag:
            raise RefinementError(
                f"ladder not strictly increasing between k={prev.index} and "
                f"k={cur.index}", cur.value, cur.residual,
            )
    return PoleFamily(
        real_poles=real_poles,
        complex_poles=tuple(complex_poles),
        seeds=tuple(seeds),
        improved_seeds=tuple(improved),
        growth_rate=p.growth_rate,
        frequencies=tuple(freqs),
    )
