"""Problem definition and an exact algebra of expo-polynomial functions.

An expo-polynomial is a finite sum  sum_j p_j(t) * exp(lambda_j * t)  with
complex polynomial coefficients p_j and complex exponents lambda_j.  The
class is closed under addition, products, differentiation, argument shifts
and integration against exp(-s*t), which is what makes exact histories and
exact step-by-step solutions possible.  Real-valued inputs (polynomials,
cos, sin with real parameters) are stored as conjugate pairs of complex
exponentials, so evaluations of such functions are real to rounding.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field

import numpy as np

# |s - lambda| below this (relative) threshold switches integration against
# exp(-s*t) to the plain polynomial branch.
RESONANCE_RTOL = 1e-12

# Imaginary contamination allowed in a real evaluation, relative to the
# natural magnitude of the terms being summed.
IMAG_RTOL = 1e-12


class ParseError(ValueError):
    """Syntax or semantic error in a function expression."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def _poly_trim(coeffs):
    """Drop exactly-zero leading (highest power) coefficients."""
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(complex(v) for v in c)


def _poly_add(p, q):
    n = max(len(p), len(q))
    return tuple(
        (p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)
    )


def _poly_mul(p, q):
    out = [0j] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return tuple(out)


def _poly_deriv(p):
    return tuple(p[i] * i for i in range(1, len(p)))


def _poly_integ(p):
    """Antiderivative with zero constant term."""
    return (0j,) + tuple(p[i] / (i + 1) for i in range(len(p)))


def _poly_shift(p, h):
    """Coefficients of p(t + h)."""
    n = len(p)
    out = [0j] * n
    for i, a in enumerate(p):
        for j in range(i + 1):
            out[j] += a * math.comb(i, j) * h ** (i - j)
    return tuple(out)


def _poly_eval(p, t):
    """Horner evaluation; t may be a scalar or an ndarray."""
    acc = np.zeros_like(t, dtype=complex) if isinstance(t, np.ndarray) else 0j
    for a in reversed(p):
        acc = acc * t + a
    return acc


class ExpPolyFunction:
    """Finite sum of (complex polynomial in t) * exp(lambda * t) terms.

    Immutable.  Terms with equal lambda are merged at construction and zero
    polynomials are dropped, so the zero function has an empty term list.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=()):
        merged: dict[complex, tuple] = {}
        for coeffs, lam in terms:
            lam = complex(lam)
            cur = merged.get(lam)
            merged[lam] = _poly_add(cur, coeffs) if cur is not None else tuple(coeffs)
        cleaned = []
        for lam in sorted(merged, key=lambda z: (z.imag, z.real)):
            coeffs = _poly_trim(merged[lam])
            if coeffs:
                cleaned.append((coeffs, lam))
        object.__setattr__(self, "terms", tuple(cleaned))

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("ExpPolyFunction is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def constant(cls, value):
        return cls([((complex(value),), 0j)])

    @classmethod
    def monomial(cls, degree: int, coeff=1.0):
        return cls([((0j,) * degree + (complex(coeff),), 0j)])

    # -- basic queries -------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def atom_count(self) -> int:
        """Number of stored monomial*exponential atoms (expression size)."""
        return sum(len(coeffs) for coeffs, _ in self.terms)

    # -- algebra -------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, ExpPolyFunction):
            return ExpPolyFunction(self.terms + other.terms)
        return self + ExpPolyFunction.constant(other)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other if isinstance(other, ExpPolyFunction) else -complex(other))

    def __mul__(self, other):
        if isinstance(other, ExpPolyFunction):
            terms = []
            for pc, pl in self.terms:
                for qc, ql in other.terms:
                    terms.append((_poly_mul(pc, qc), pl + ql))
            return ExpPolyFunction(terms)
        z = complex(other)
        return ExpPolyFunction([(tuple(a * z for a in c), lam) for c, lam in self.terms])

    __rmul__ = __mul__

    def derivative(self) -> "ExpPolyFunction":
        """Term-wise (p' + lambda*p) * exp(lambda*t)."""
        terms = []
        for coeffs, lam in self.terms:
            d = _poly_add(_poly_deriv(coeffs), tuple(lam * a for a in coeffs))
            terms.append((d, lam))
        return ExpPolyFunction(terms)

    def shift(self, h: float) -> "ExpPolyFunction":
        """The function t -> f(t + h)."""
        terms = []
        for coeffs, lam in self.terms:
            scale = cmath.exp(lam * h)
            shifted = _poly_shift(coeffs, h)
            terms.append((tuple(scale * a for a in shifted), lam))
        return ExpPolyFunction(terms)

    # -- evaluation ----------------------------------------------------

    def eval_complex(self, t):
        """Full complex value; t may be a scalar or ndarray."""
        if isinstance(t, np.ndarray):
            acc = np.zeros(t.shape, dtype=complex)
            for coeffs, lam in self.terms:
                acc += _poly_eval(coeffs, t.astype(complex)) * np.exp(lam * t)
            return acc
        acc = 0j
        for coeffs, lam in self.terms:
            acc += _poly_eval(coeffs, complex(t)) * cmath.exp(lam * t)
        return acc

    def _magnitude_scale(self, t):
        if isinstance(t, np.ndarray):
            acc = np.zeros(t.shape, dtype=float)
            for coeffs, lam in self.terms:
                acc += np.abs(_poly_eval(coeffs, t.astype(complex))) * np.exp(lam.real * t)
            return acc
        acc = 0.0
        for coeffs, lam in self.terms:
            acc += abs(_poly_eval(coeffs, complex(t))) * math.exp(lam.real * t)
        return acc

    def __call__(self, t):
        """Real value at real t; asserts imaginary contamination is tiny."""
        z = self.eval_complex(t)
        scale = self._magnitude_scale(t)
        if isinstance(z, np.ndarray):
            bad = np.abs(z.imag) > IMAG_RTOL * np.maximum(1.0, scale)
            if bad.any():
                raise ArithmeticError(
                    f"imaginary contamination {np.abs(z.imag)[bad].max():.3e} "
                    "in real evaluation"
                )
            return z.real
        if abs(z.imag) > IMAG_RTOL * max(1.0, scale):
            raise ArithmeticError(
                f"imaginary contamination {abs(z.imag):.3e} in real evaluation"
            )
        return z.real

    # -- integration against exp(-s t) ----------------------------------

    def weighted_antiderivative(self, s) -> "ExpPolyFunction":
        """An expo-polynomial F with F'(t) = f(t) * exp(-s*t).

        When s coincides with a term's exponent (resonance) the plain
        polynomial antiderivative is used for that term, which raises the
        polynomial degree by one instead of dividing by zero.
        """
        s = complex(s)
        terms = []
        for coeffs, lam in self.terms:
            mu = lam - s
            if abs(mu) < RESONANCE_RTOL * max(1.0, abs(s)):
                terms.append((_poly_integ(coeffs), 0j))
                continue
            # integral of p(t) e^{mu t} = e^{mu t} (p/mu - p'/mu^2 + ...)
            g = tuple()
            p = coeffs
            sign = 1.0
            power = mu
            while p:
                g = _poly_add(g, tuple(sign * a / power for a in p))
                p = _poly_deriv(p)
                sign = -sign
                power *= mu
            terms.append((g, mu))
        return ExpPolyFunction(terms)

    def __repr__(self):
        if not self.terms:
            return "ExpPolyFunction(0)"
        parts = []
        for coeffs, lam in self.terms:
            poly = " + ".join(
                f"({a!r})*t^{i}" if i else f"({a!r})" for i, a in enumerate(coeffs)
            )
            parts.append(f"[{poly}]*exp(({lam!r})*t)")
        return "ExpPolyFunction(" + " + ".join(parts) + ")"


# -- spec-level operation names ------------------------------------------


def evaluate(f: ExpPolyFunction, t) -> float:
    return f(t)


def differentiate(f: ExpPolyFunction) -> ExpPolyFunction:
    return f.derivative()


def weighted_exp_integral(f: ExpPolyFunction, s, lo: float, hi: float) -> complex:
    """Exact closed-form value of integral_lo^hi f(v) * exp(-s*v) dv."""
    if not lo < hi:
        raise ValueError(f"lo must be strictly below hi, got [{lo}, {hi}]")
    anti = f.weighted_antiderivative(s)
    return anti.eval_complex(hi) - anti.eval_complex(lo)


# -- expression parser -----------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)

_FUNCTIONS = ("exp", "cos", "sin")


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens = []
        while self.pos < len(text):
            m = _TOKEN_RE.match(text, self.pos)
            if m is None or m.end() == self.pos:
                # skip leading whitespace before reporting
                at = self.pos + len(text[self.pos:]) - len(text[self.pos:].lstrip())
                if at >= len(text):
                    break
                raise ParseError(f"unexpected character {text[at]!r}", at)
            if m.lastgroup is not None:
                self.tokens.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
            self.pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.idx = 0

    def peek(self):
        return self.tokens[self.idx]

    def next(self):
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok


class _Parser:
    """Recursive-descent parser producing an ExpPolyFunction.

    Accepts sums/differences of products of: real literals, t, parenthesised
    subexpressions, integer powers, and exp/cos/sin of an expression affine
    in t.  Division is allowed by constants only.
    """

    def __init__(self, text: str):
        self.toks = _Tokenizer(text)

    def parse(self) -> ExpPolyFunction:
        value = self.expr()
        kind, text, pos = self.toks.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {text!r}", pos)
        return value

    def expr(self) -> ExpPolyFunction:
        kind, text, _ = self.toks.peek()
        negate = False
        if kind == "op" and text in "+-":
            self.toks.next()
            negate = text == "-"
        value = self.term()
        if negate:
            value = -value
        while True:
            kind, text, _ = self.toks.peek()
            if kind == "op" and text in "+-":
                self.toks.next()
                rhs = self.term()
                value = value - rhs if text == "-" else value + rhs
            else:
                return value

    def term(self) -> ExpPolyFunction:
        value = self.power()
        while True:
            kind, text, pos = self.toks.peek()
            if kind == "op" and text in "*/":
                self.toks.next()
                rhs = self.power()
                if text == "*":
                    value = value * rhs
                else:
                    const = _as_constant(rhs)
                    if const is None:
                        raise ParseError("division only by constants", pos)
                    if const == 0:
                        raise ParseError("division by zero", pos)
                    value = value * (1.0 / const)
            else:
                return value

    def power(self) -> ExpPolyFunction:
        base = self.atom()
        kind, text, pos = self.toks.peek()
        if kind == "op" and text in ("^", "**"):
            self.toks.next()
            nkind, ntext, npos = self.toks.next()
            if nkind != "num" or "." in ntext or "e" in ntext.lower():
                raise ParseError("exponent must be a nonnegative integer", npos)
            out = ExpPolyFunction.constant(1.0)
            for _ in range(int(ntext)):
                out = out * base
            return out
        return base

    def atom(self) -> ExpPolyFunction:
        kind, text, pos = self.toks.next()
        if kind == "num":
            return ExpPolyFunction.constant(float(text))
        if kind == "name":
            if text == "t":
                return ExpPolyFunction.monomial(1)
            if text in _FUNCTIONS:
                okind, otext, opos = self.toks.next()
                if okind != "op" or otext != "(":
                    raise ParseError(f"expected '(' after {text}", opos)
                arg = self.expr()
                ckind, ctext, cpos = self.toks.next()
                if ckind != "op" or ctext != ")":
                    raise ParseError("expected ')'", cpos)
                return _apply_function(text, arg, pos)
            raise ParseError(f"unknown name {text!r}", pos)
        if kind == "op" and text == "(":
            value = self.expr()
            ckind, ctext, cpos = self.toks.next()
            if ckind != "op" or ctext != ")":
                raise ParseError("expected ')'", cpos)
            return value
        if kind == "op" and text in "+-":
            value = self.atom()
            return -value if text == "-" else value
        raise ParseError(f"unexpected token {text!r}" if text else "unexpected end of input", pos)


def _as_constant(f: ExpPolyFunction):
    """Return the complex constant if f is constant, else None."""
    if not f.terms:
        return 0j
    if len(f.terms) == 1 and f.terms[0][1] == 0 and len(f.terms[0][0]) == 1:
        return f.terms[0][0][0]
    return None


def _affine_parts(f: ExpPolyFunction, pos: int):
    """Split an argument affine in t into (constant, slope); error otherwise."""
    if not f.terms:
        return 0j, 0j
    if len(f.terms) == 1 and f.terms[0][1] == 0 and len(f.terms[0][0]) <= 2:
        coeffs = f.terms[0][0]
        c0 = coeffs[0]
        c1 = coeffs[1] if len(coeffs) > 1 else 0j
        return c0, c1
    raise ParseError("function argument must be affine in t", pos)


def _apply_function(name: str, arg: ExpPolyFunction, pos: int) -> ExpPolyFunction:
    c0, c1 = _affine_parts(arg, pos)
    if abs(c0.imag) > 0 or abs(c1.imag) > 0:
        raise ParseError("function arguments must have real coefficients", pos)
    if name == "exp":
        return ExpPolyFunction([((cmath.exp(c0),), c1)])
    # cos/sin as conjugate complex-exponential pairs; the +i*omega and
    # -i*omega exponents are generated symmetrically so the pair is an
    # exact bit-level conjugate.
    omega = c1.real
    phase = cmath.exp(1j * c0.real)
    if name == "cos":
        return ExpPolyFunction(
            [((0.5 * phase,), complex(0.0, omega)), ((0.5 * phase.conjugate(),), complex(0.0, -omega))]
        )
    return ExpPolyFunction(
        [((-0.5j * phase,), complex(0.0, omega)), ((0.5j * phase.conjugate(),), complex(0.0, -omega))]
    )


def parse_function(text: str) -> ExpPolyFunction:
    """Parse a function expression into an ExpPolyFunction.

    Grammar: sums of products of real literals, t, integer powers,
    parenthesised subexpressions and exp/cos/sin applied to expressions
    affine in t.  Whitespace-insensitive.  cos and sin are rewritten as
    conjugate complex-exponential pairs.
    """
    return _Parser(text).parse()


# -- problem definition ----------------------------------------------------


@dataclass(frozen=True)
class NddeProblem:
    """y'(t) = a*y(t) + b*y'(t - tau) + c*y(t - tau) with history on [-tau, 0]."""

    a: float
    b: float
    c: float
    tau: float
    history: ExpPolyFunction = field(default_factory=ExpPolyFunction.zero)

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "tau", float(self.tau))
        if self.b == 0.0:
            raise ValueError("coefficient b of the delayed derivative must be nonzero")
        if not self.tau > 0.0:
            raise ValueError(f"delay tau must be strictly positive, got {self.tau}")

    @property
    def growth_rate(self) -> float:
        """Real part ln|b|/tau that the complex pole ladder approaches."""
        return math.log(abs(self.b)) / self.tau

    def history_derivatives(self, count: int):
        """[H, H', ..., H^(count-1)] as ExpPolyFunctions."""
        out = [self.history]
        for _ in range(count - 1):
            out.append(out[-1].derivative())
        return out
