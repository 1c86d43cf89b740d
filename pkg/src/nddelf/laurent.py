"""Truncated series arithmetic in inverse powers of an expansion variable.

A TruncatedSeries holds coefficients for powers top_power, top_power-1, ...
down to top_power-order+1 of either s or alpha, with everything below the
window regarded as unknown.  Arithmetic tracks how many coefficients remain
provable, so results never report terms beyond the justified order.  The
``recentre`` operation substitutes s = sigma0 + i*alpha and re-expands in
inverse powers of alpha, which is how expansions along the pole ladder are
turned into real-frequency expansions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class LaurentError(ArithmeticError):
    pass


@dataclass(frozen=True)
class TruncatedSeries:
    """Coefficients for powers top_power, top_power-1, ... of ``var``."""

    top_power: int
    coeffs: tuple[complex, ...]
    var: str = "s"

    def __post_init__(self):
        if not self.coeffs:
            raise LaurentError("a truncated series needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(complex(v) for v in self.coeffs))

    @property
    def order(self) -> int:
        """Number of provable coefficients retained."""
        return len(self.coeffs)

    @property
    def low_power(self) -> int:
        """First power below the provable window."""
        return self.top_power - len(self.coeffs)

    def coefficient(self, power: int) -> complex:
        """Provable coefficient of var**power; error outside the window."""
        idx = self.top_power - power
        if idx < 0 or idx >= len(self.coeffs):
            raise LaurentError(
                f"coefficient of power {power} is outside the provable window "
                f"({self.low_power}, {self.top_power}]"
            )
        return self.coeffs[idx]

    def eval_at(self, z: complex) -> complex:
        """Evaluate the truncation at a concrete value (for cross-checks)."""
        return sum(v * z ** (self.top_power - i) for i, v in enumerate(self.coeffs))

    def _check_var(self, other: "TruncatedSeries"):
        if self.var != other.var:
            raise LaurentError(
                f"incompatible expansion variables {self.var!r} and {other.var!r}"
            )

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        self._check_var(other)
        top = max(self.top_power, other.top_power)
        low = max(self.low_power, other.low_power)
        if top <= low:
            raise LaurentError("sum has no provable coefficients left")
        out = [0j] * (top - low)
        for series in (self, other):
            for i, v in enumerate(series.coeffs):
                power = series.top_power - i
                if power > low:
                    out[top - power] += v
        return TruncatedSeries(top, tuple(out), self.var)

    def __neg__(self):
        return TruncatedSeries(self.top_power, tuple(-v for v in self.coeffs), self.var)

    def __sub__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            z = complex(other)
            return TruncatedSeries(
                self.top_power, tuple(v * z for v in self.coeffs), self.var
            )
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        self._check_var(other)
        n = min(self.order, other.order)
        out = [0j] * n
        for i in range(min(self.order, n)):
            vi = self.coeffs[i]
            if vi == 0:
                continue
            for j in range(min(other.order, n - i)):
                out[i + j] += vi * other.coeffs[j]
        return TruncatedSeries(self.top_power + other.top_power, tuple(out), self.var)

    __rmul__ = __mul__

    def inverse(self) -> "TruncatedSeries":
        """Multiplicative inverse; requires a nonzero leading coefficient."""
        lead = self.coeffs[0]
        if lead == 0:
            raise LaurentError("cannot invert a series with zero leading coefficient")
        n = self.order
        inv = [0j] * n
        inv[0] = 1.0 / lead
        for m in range(1, n):
            acc = 0j
            for j in range(1, m + 1):
                cj = self.coeffs[j] if j < n else 0j
                acc += cj * inv[m - j]
            inv[m] = -acc / lead
        return TruncatedSeries(-self.top_power, tuple(inv), self.var)

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * (1.0 / complex(other))
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self * other.inverse()


def constant_series(value: complex, order: int, var: str = "s") -> TruncatedSeries:
    return TruncatedSeries(0, (complex(value),) + (0j,) * (order - 1), var)


def linear_series(slope: complex, intercept: complex, order: int,
                  var: str = "s") -> TruncatedSeries:
    """slope*var + intercept with ``order`` provable coefficients."""
    coeffs = [0j] * order
    coeffs[0] = complex(slope)
    if order > 1:
        coeffs[1] = complex(intercept)
    return TruncatedSeries(1, tuple(coeffs), var)


def inverse_var(order: int, var: str = "s") -> TruncatedSeries:
    """The series 1/var."""
    return TruncatedSeries(-1, (1.0 + 0j,) + (0j,) * (order - 1), var)


def series_add(x: TruncatedSeries, y: TruncatedSeries) -> TruncatedSeries:
    return x + y


def series_mul(x: TruncatedSeries, y: TruncatedSeries) -> TruncatedSeries:
    return x * y


def series_div(x: TruncatedSeries, y: TruncatedSeries) -> TruncatedSeries:
    return x / y


def expand_rational(num: tuple[float, float], den: tuple[float, float],
                    order: int) -> TruncatedSeries:
    """Expansion of (num1*s + num0)/(den1*s + den0) in powers of 1/s.

    ``num`` and ``den`` are (slope, intercept) pairs; the denominator needs
    a nonzero slope.
    """
    if den[0] == 0:
        raise LaurentError("denominator must have a nonzero leading coefficient")
    numerator = linear_series(num[0], num[1], order)
    denominator = linear_series(den[0], den[1], order)
    return numerator / denominator


def recentre(x: TruncatedSeries, sigma0: float, order: int | None = None) -> TruncatedSeries:
    """Substitute s = sigma0 + i*alpha and re-expand in powers of 1/alpha.

    Positive powers of s expand exactly by the binomial theorem; negative
    powers expand as (i*alpha)^m * (1 + sigma0/(i*alpha))^m truncated at the
    provable order.  The provable window carries over unchanged.
    """
    if x.var != "s":
        raise LaurentError(f"recentre expects a series in s, got {x.var!r}")
    if order is None:
        order = x.order
    top = x.top_power
    low = top - min(order, x.order)
    acc: dict[int, complex] = {}
    for i, v in enumerate(x.coeffs):
        if v == 0:
            continue
        m = x.top_power - i
        if m >= 0:
            for j in range(m + 1):
                power = m - j
                if power <= low:
                    continue
                coef = math.comb(m, j) * sigma0**j * (1j) ** (m - j)
                acc[power] = acc.get(power, 0j) + v * coef
        else:
            mm = -m
            # generalized binomial: C(-mm, j) = (-1)^j * C(mm+j-1, j)
            for j in range(m - low):
                power = m - j
                if power <= low:
                    break
                coef = (-1.0) ** j * math.comb(mm + j - 1, j) * sigma0**j
                acc[power] = acc.get(power, 0j) + v * coef * (1j) ** (m - j)
    coeffs = [acc.get(power, 0j) for power in range(top, low, -1)]
    return TruncatedSeries(top, tuple(coeffs), "alpha")
