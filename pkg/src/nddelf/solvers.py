"""Evaluable solutions: exact method of steps and the three series methods.

The method of steps integrates the problem exactly inside the
expo-polynomial class, one delay interval at a time, and serves as the
ground-truth oracle.  The series methods assemble real-pole terms, a
truncated ladder of complex-pole terms, and (for the two accelerated
methods) a closed-form periodic tail with the matching asymptotic terms
subtracted from the ladder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import tail as tail_mod
from .charroots import PoleFamily, build_pole_family
from .core import ExpPolyFunction, NddeProblem
from .residues import (
    ResidueAsymptotics,
    modified_expansion,
    original_expansion,
    residue_at,
)

MOS_ATOM_LIMIT = 10_000

METHODS = ("mos", "pure_laplace", "original_lf", "modified_lf")


class SolverError(RuntimeError):
    pass


class ExpressionSwellError(SolverError):
    """A method-of-steps segment grew past the expression-size guard."""


@dataclass(frozen=True)
class SolverConfig:
    """Truncation choices: N ladder terms, tail polynomials up to order M."""

    N: int = 50
    M: int = 8
    method: str = "modified_lf"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.method in ("original_lf", "modified_lf") and self.M < 2:
            raise ValueError(f"M must be >= 2 for tail-accelerated methods, got {self.M}")


@dataclass(frozen=True)
class MosSolution:
    """Piecewise-exact solution: one expo-polynomial per delay interval."""

    problem: NddeProblem
    segments: tuple[ExpPolyFunction, ...]  # segment m covers [m*tau, (m+1)*tau]

    @property
    def horizon(self) -> int:
        return len(self.segments)

    @property
    def t_end(self) -> float:
        return self.horizon * self.problem.tau

    def segment_index(self, t) -> np.ndarray:
        idx = np.floor(np.asarray(t, dtype=float) / self.problem.tau).astype(int)
        return np.clip(idx, 0, self.horizon - 1)

    def evaluate(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if (t_arr < 0).any() or (t_arr > self.t_end * (1.0 + 1e-12)).any():
            raise SolverError(
                f"time outside the computed horizon [0, {self.t_end:g}]"
            )
        idx = self.segment_index(t_arr)
        out = np.empty_like(t_arr)
        for m in np.unique(idx):
            mask = idx == m
            out[mask] = self.segments[m](t_arr[mask])
        return out if np.ndim(t) else float(out[0])

    def derivative(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        idx = self.segment_index(t_arr)
        out = np.empty_like(t_arr)
        for m in np.unique(idx):
            mask = idx == m
            out[mask] = self.segments[m].derivative()(t_arr[mask])
        return out if np.ndim(t) else float(out[0])


def method_of_steps(p: NddeProblem, horizon_steps: int) -> MosSolution:
    """Exact integration over [0, horizon_steps * tau].

    On each interval the equation reduces to y' - a*y = f with forcing
    f(t) = b*y_prev'(t - tau) + c*y_prev(t - tau) taken from the previous
    interval, solved exactly inside the expo-polynomial class (forcing
    proportional to exp(a*t) raises the polynomial degree instead of
    dividing by zero).  Initial values follow by continuity from
    y(0) = H(0).
    """
    if horizon_steps < 1:
        raise ValueError(f"horizon_steps must be >= 1, got {horizon_steps}")
    a, b, c, tau = p.a, p.b, p.c, p.tau
    segments: list[ExpPolyFunction] = []
    prev = p.history
    left_value = p.history(0.0)
    for m in range(horizon_steps):
        t_left = m * tau
        delayed = prev.shift(-tau)
        forcing = b * delayed.derivative() + c * delayed
        # y(t) = e^{a t} (kappa + F(t)),  F' = e^{-a t} f(t)
        anti = forcing.weighted_antiderivative(a)
        kappa = left_value * math.exp(-a * t_left) - anti.eval_complex(t_left)
        growth = ExpPolyFunction([((1.0 + 0j,), complex(a))])
        segment = growth * (anti + ExpPolyFunction.constant(kappa))
        if segment.atom_count > MOS_ATOM_LIMIT:
            raise ExpressionSwellError(
                f"segment {m} grew to {segment.atom_count} stored terms; "
                "expression swell makes further steps impractical"
            )
        segments.append(segment)
        left_value = segment((m + 1) * tau)
        prev = segment
    return MosSolution(problem=p, segments=tuple(segments))


def mos_residual(sol: MosSolution, t) -> np.ndarray:
    """|y' - a*y - b*y_prev'(t-tau) - c*y_prev(t-tau)| at interior times."""
    p = sol.problem
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    lhs = sol.derivative(t_arr)
    out = np.empty_like(t_arr)
    hist_deriv = p.history.derivative()
    for i, ti in enumerate(t_arr):
        si = ti - p.tau
        if si <= 0:
            delayed = p.b * hist_deriv(si) + p.c * p.history(si)
        else:
            delayed = p.b * sol.derivative(si) + p.c * sol.evaluate(si)
        out[i] = abs(lhs[i] - p.a * sol.evaluate(ti) - delayed)
    return out if np.ndim(t) else float(out[0])


@dataclass(frozen=True)
class ComplexTerm:
    pole: complex
    residue: complex
    seed: complex
    asymptotic_residue: complex


@dataclass(frozen=True)
class SeriesSolution:
    """Evaluable truncated series solution.

    y(t) = sum real c*e^{r t}
         + 2*sum_{k=1..N} Re(c_k e^{r_k t} - c_k^a e^{s_k t})
         + 2*e^{growth*t} * P_e(t)            (tail-accelerated methods)

    The subtracted exponents s_k are the plain asymptotic seeds; they share
    their frequencies with the closed-form tail, which represents the full
    k = 1..infinity asymptotic sum.
    """

    problem: NddeProblem
    method: str
    real_terms: tuple[tuple[float, float], ...]  # (r, c)
    complex_terms: tuple[ComplexTerm, ...]
    tail: tail_mod.PeriodicPiecewise | None = None
    _arrays: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def N(self) -> int:
        return len(self.complex_terms)

    def _packed(self):
        cache = self._arrays
        if not cache:
            cache["poles"] = np.array([ct.pole for ct in self.complex_terms])
            cache["residues"] = np.array([ct.residue for ct in self.complex_terms])
            cache["seeds"] = np.array([ct.seed for ct in self.complex_terms])
            cache["asym"] = np.array([ct.asymptotic_residue for ct in self.complex_terms])
        return cache

    def evaluate(self, t, chunk: int = 2048):
        """Real solution value; cost per point independent of t."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if (t_arr < 0).any():
            raise SolverError("series solutions are defined for t >= 0")
        packed = self._packed()
        out = np.zeros_like(t_arr)
        for r, cval in self.real_terms:
            out += cval * np.exp(r * t_arr)
        for start in range(0, t_arr.size, chunk):
            block = t_arr[start:start + chunk]
            phases = np.exp(np.outer(block, packed["poles"]))
            acc = phases @ packed["residues"]
            if self.tail is not None:
                phases = np.exp(np.outer(block, packed["seeds"]))
                acc -= phases @ packed["asym"]
            out[start:start + chunk] += 2.0 * acc.real
        if self.tail is not None:
            out += 2.0 * np.exp(self.problem.growth_rate * t_arr) * self.tail.evaluate(t_arr)
        return out if np.ndim(t) else float(out[0])


def evaluate_solution(sol, t):
    """Value of either solution kind at time(s) t."""
    return sol.evaluate(t)


def _series_solution(p: NddeProblem, cfg: SolverConfig,
                     asym: ResidueAsymptotics | None) -> SeriesSolution:
    family = build_pole_family(p, cfg.N)
    for pole in family.real_poles:
        if pole.multiple:
            raise SolverError(
                f"real root {pole.value.real:.6g} is (near-)multiple; the "
                "residue series does not apply"
            )
    real_terms = tuple(
        (pole.value.real, residue_at(p, pole).value.real) for pole in family.real_poles
    )
    complex_terms = []
    tail_ext = None
    if asym is not None:
        parity = tail_mod.FULL_HARMONIC if p.b > 0 else tail_mod.ODD_HARMONIC
        polyset = tail_mod.build_polynomials(p.tau, parity, cfg.M)
        tail_ext = tail_mod.combine(asym, polyset)
    for pole, seed, alpha in zip(family.complex_poles, family.seeds,
                                 family.frequencies):
        residue = residue_at(p, pole).value
        cka = asym.evaluate(alpha) if asym is not None else 0j
        complex_terms.append(
            ComplexTerm(pole=pole.value, residue=residue, seed=seed,
                        asymptotic_residue=cka)
        )
    return SeriesSolution(
        problem=p,
        method=cfg.method,
        real_terms=real_terms,
        complex_terms=tuple(complex_terms),
        tail=tail_ext,
    )


def solve_pure_laplace(p: NddeProblem, cfg: SolverConfig) -> SeriesSolution:
    """Truncated residue series with no tail acceleration."""
    cfg = SolverConfig(N=cfg.N, M=cfg.M, method="pure_laplace")
    return _series_solution(p, cfg, None)


def solve_original_lf(p: NddeProblem, cfg: SolverConfig) -> SeriesSolution:
    """Tail-accelerated series using the constant-exponential expansion."""
    cfg = SolverConfig(N=cfg.N, M=cfg.M, method="original_lf")
    return _series_solution(p, cfg, original_expansion(p, cfg.M))


def solve_modified_lf(p: NddeProblem, cfg: SolverConfig) -> SeriesSolution:
    """Tail-accelerated series using the root-exact rational expansion."""
    cfg = SolverConfig(N=cfg.N, M=cfg.M, method="modified_lf")
    return _series_solution(p, cfg, modified_expansion(p, cfg.M))


def solve(p: NddeProblem, cfg: SolverConfig, t_max: float | None = None):
    """Dispatch on cfg.method; mos needs t_max to size its horizon."""
    if cfg.method == "mos":
        if t_max is None:
            raise ValueError("method 'mos' needs t_max to size the horizon")
        return method_of_steps(p, horizon_steps=math.ceil(t_max / p.tau - 1e-12))
    if cfg.method == "pure_laplace":
        return solve_pure_laplace(p, cfg)
    if cfg.method == "original_lf":
        return solve_original_lf(p, cfg)
    return solve_modified_lf(p, cfg)
