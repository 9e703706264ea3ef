"""Model definition: oscillator-polynomial Hamiltonians.

A model is a one-degree-of-freedom Hamiltonian that is polynomial in the
harmonic-oscillator Hamiltonian H0 = p^2/2m + m omega^2 q^2 / 2:

    H = E * sum_k b[k] * (H0 / E)^k,

with E an energy scale and b dimensionless. In the dimensionless radial
variable u = |alpha|^2 (so H0 = hbar omega u) the classical Hamiltonian is

    H(u) = E * sum_k b[k] * mu^k * u^k,      mu = hbar omega / E.

The quantum Hamiltonian is the Weyl quantization of H, which in the number
basis re-expands as

    H_op = E * sum_k c[k] * mu^k * (n + 1/2)^k,

where c differs from b by star-product corrections computed exactly here
with rational arithmetic. For K = 1 (harmonic oscillator) c == b.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import numpy as np

from .errors import ConfigError

__all__ = [
    "ModelSpec",
    "SymbolPolynomial",
    "number_coefficients",
    "u_star_power",
    "weyl_expansion_matrix",
]


class _BiPoly:
    """Polynomial in (alpha, alphabar) with exact Fraction coefficients.

    Internal helper for star products of radial symbols. Keys are exponent
    pairs (i, j) for alpha^i alphabar^j.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for key, val in terms.items():
                if val:
                    self.terms[key] = Fraction(val)

    @classmethod
    def radial(cls, coeffs) -> "_BiPoly":
        return cls({(k, k): c for k, c in enumerate(coeffs)})

    def dalpha(self) -> "_BiPoly":
        out = {}
        for (i, j), c in self.terms.items():
            if i > 0:
                out[(i - 1, j)] = out.get((i - 1, j), 0) + c * i
        return _BiPoly(out)

    def dalphabar(self) -> "_BiPoly":
        out = {}
        for (i, j), c in self.terms.items():
            if j > 0:
                out[(i, j - 1)] = out.get((i, j - 1), 0) + c * j
        return _BiPoly(out)

    def __mul__(self, other: "_BiPoly") -> "_BiPoly":
        out = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + c1 * c2
        return _BiPoly(out)

    def __add__(self, other: "_BiPoly") -> "_BiPoly":
        out = dict(self.terms)
        for key, val in other.terms.items():
            out[key] = out.get(key, 0) + val
        return _BiPoly(out)

    def scaled(self, factor) -> "_BiPoly":
        return _BiPoly({k: v * factor for k, v in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def to_radial_coeffs(self) -> tuple[Fraction, ...]:
        if any(i != j for (i, j) in self.terms):
            raise ValueError("polynomial is not radial")
        deg = max((i for (i, _) in self.terms), default=0)
        out = [Fraction(0)] * (deg + 1)
        for (i, _), c in self.terms.items():
            out[i] = c
        while len(out) > 1 and out[-1] == 0:
            out.pop()
        return tuple(out)


def _star(f: _BiPoly, g: _BiPoly) -> _BiPoly:
    """Moyal star product in (alpha, alphabar) form, exact for polynomials.

    f * g = sum_s 1/(s! 2^s) * sum_i C(s,i) (-1)^i
            (d_alpha^{s-i} d_albar^i f) (d_albar^{s-i} d_alpha^i g).
    """
    result = _BiPoly()
    s = 0
    while True:
        term = _BiPoly()
        any_nonzero = False
        for i in range(s + 1):
            fa = f
            for _ in range(s - i):
                fa = fa.dalpha()
            for _ in range(i):
                fa = fa.dalphabar()
            if fa.is_zero():
                continue
            gb = g
            for _ in range(s - i):
                gb = gb.dalphabar()
            for _ in range(i):
                gb = gb.dalpha()
            if gb.is_zero():
                continue
            any_nonzero = True
            term = term + (fa * gb).scaled(Fraction((-1) ** i * comb(s, i)))
        if s > 0 and not any_nonzero:
            break
        result = result + term.scaled(Fraction(1, factorial(s) * 2**s))
        s += 1
    return result


@dataclass(frozen=True)
class SymbolPolynomial:
    """Polynomial in the radial phase-space variable u = |alpha|^2.

    Coefficients are exact Fractions; coeffs[k] multiplies u^k. Supports
    the Moyal star product of radial symbols, which is again radial.
    """

    coeffs: tuple[Fraction, ...]

    @classmethod
    def from_coeffs(cls, values) -> "SymbolPolynomial":
        coeffs = tuple(Fraction(v) for v in values)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        return cls(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for c in reversed(self.coeffs):
            out = out * u + float(c)
        return out

    def derivative(self) -> "SymbolPolynomial":
        if len(self.coeffs) == 1:
            return SymbolPolynomial((Fraction(0),))
        return SymbolPolynomial(
            tuple(k * c for k, c in enumerate(self.coeffs) if k > 0)
        )

    def __add__(self, other: "SymbolPolynomial") -> "SymbolPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [Fraction(0)] * (n - len(self.coeffs))
        b = list(other.coeffs) + [Fraction(0)] * (n - len(other.coeffs))
        return SymbolPolynomial.from_coeffs([x + y for x, y in zip(a, b)])

    def scaled(self, factor) -> "SymbolPolynomial":
        return SymbolPolynomial.from_coeffs([Fraction(factor) * c for c in self.coeffs])

    def star(self, other: "SymbolPolynomial") -> "SymbolPolynomial":
        prod = _star(_BiPoly.radial(self.coeffs), _BiPoly.radial(other.coeffs))
        return SymbolPolynomial.from_coeffs(prod.to_radial_coeffs())


def u_star_power(k: int) -> SymbolPolynomial:
    """k-th star power of u: the Weyl symbol of (n + 1/2)^k."""
    if k < 0:
        raise ValueError("k must be >= 0")
    u = SymbolPolynomial.from_coeffs([0, 1])
    out = SymbolPolynomial.from_coeffs([1])
    for _ in range(k):
        out = out.star(u)
    return out


def weyl_expansion_matrix(kmax: int) -> list[list[Fraction]]:
    """Triangular matrix A with u^{*k} = sum_j A[k][j] u^j, exact."""
    rows = []
    for k in range(kmax + 1):
        coeffs = u_star_power(k).coeffs
        row = [Fraction(0)] * (kmax + 1)
        for j, c in enumerate(coeffs):
            row[j] = c
        rows.append(row)
    return rows


def _invert_unit_triangular(a: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(a)
    inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    # forward substitution; a is lower triangular with unit diagonal
    for i in range(n):
        for j in range(i):
            s = sum(a[i][k] * inv[k][j] for k in range(j, i))
            inv[i][j] = -s
    return inv


def number_coefficients(b, mu) -> tuple[Fraction, ...]:
    """Exact coefficients c of the number-operator expansion of H.

    With H = E sum_k b[k] mu^k u^k as a Weyl symbol, the operator is
    H_op = E sum_k c[k] mu^k (n + 1/2)^k where
    c[k] = sum_{j >= k} b[j] mu^(j-k) S[j][k] and S inverts the star-power
    expansion matrix. Floats are converted exactly to Fractions.
    """
    b = [Fraction(x) for x in b]
    mu = Fraction(mu)
    kmax = len(b) - 1
    a = weyl_expansion_matrix(kmax)
    s = _invert_unit_triangular(a)
    return tuple(
        sum((b[j] * mu ** (j - k) * s[j][k] for j in range(k, kmax + 1)), Fraction(0))
        for k in range(kmax + 1)
    )


@dataclass(frozen=True)
class ModelSpec:
    """A concrete model: coefficients b, nonlinearity scale mu, units.

    mu = hbar omega / E fixes hbar = mu E / omega. Every derived quantity
    (spectrum, classical rate, symbol polynomials) hangs off this object.
    """

    b: tuple[float, ...]
    mu: float
    m: float = 1.0
    omega: float = 1.0
    E: float = 1.0

    def __post_init__(self):
        if len(self.b) < 2:
            raise ConfigError("model.b must have at least two entries (K >= 1)")
        if not all(np.isfinite(self.b)):
            raise ConfigError("model.b entries must be finite")
        if self.b[-1] == 0.0:
            raise ConfigError("model.b leading coefficient must be nonzero")
        for name in ("mu", "m", "omega", "E"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ConfigError(f"model.{name} must be positive and finite")

    @classmethod
    def create(
        cls,
        b,
        mu: float | None = None,
        hbar: float | None = None,
        m: float = 1.0,
        omega: float = 1.0,
        E: float = 1.0,
    ) -> "ModelSpec":
        if (mu is None) == (hbar is None):
            raise ConfigError("specify exactly one of model.mu and model.hbar")
        if mu is None:
            mu = hbar * omega / E
        return cls(b=tuple(float(x) for x in b), mu=float(mu), m=m, omega=omega, E=E)

    @classmethod
    def quartic(cls, mu: float, m: float = 1.0, omega: float = 1.0, E: float = 1.0):
        """H = H0^2 / E."""
        return cls(b=(0.0, 0.0, 1.0), mu=mu, m=m, omega=omega, E=E)

    @classmethod
    def sextic(cls, mu: float, m: float = 1.0, omega: float = 1.0, E: float = 1.0):
        """H = H0^3 / E^2."""
        return cls(b=(0.0, 0.0, 0.0, 1.0), mu=mu, m=m, omega=omega, E=E)

    @classmethod
    def harmonic(cls, mu: float, m: float = 1.0, omega: float = 1.0, E: float = 1.0):
        """H = H0 (linear dynamics; all four evolutions coincide)."""
        return cls(b=(0.0, 1.0), mu=mu, m=m, omega=omega, E=E)

    @property
    def K(self) -> int:
        return len(self.b) - 1

    @property
    def hbar(self) -> float:
        return self.mu * self.E / self.omega

    def classical_symbol(self) -> SymbolPolynomial:
        """h(u) = H(u)/E = sum_k b[k] mu^k u^k, exact coefficients."""
        return SymbolPolynomial.from_coeffs(
            [Fraction(bk) * Fraction(self.mu) ** k for k, bk in enumerate(self.b)]
        )

    def number_coefficients(self) -> tuple[float, ...]:
        """c[k] with H_op = E sum_k c[k] mu^k (n + 1/2)^k, as floats."""
        return tuple(float(c) for c in number_coefficients(self.b, self.mu))

    def eigenvalues(self, n_levels: int) -> np.ndarray:
        """Quantum energies E_n for n = 0..n_levels-1."""
        n = np.arange(n_levels, dtype=float)
        c = self.number_coefficients()
        acc = np.zeros(n_levels)
        for k, ck in enumerate(c):
            acc += ck * self.mu**k * (n + 0.5) ** k
        return self.E * acc

    def classical_rate(self, u) -> np.ndarray:
        """Angular frequency of classical phase rotation at radius u = |alpha|^2.

        d alpha / dt = -i * classical_rate(u) * alpha, so
        classical_rate(u) = (omega / mu) * h'(u).
        """
        return (self.omega / self.mu) * self.classical_symbol().derivative()(u)

    def level_frequencies(self, nu: int, n_levels: int) -> np.ndarray:
        """(E_{n+nu} - E_n)/hbar for n = 0..n_levels-1, quantum sector rates."""
        energies = self.eigenvalues(n_levels + abs(nu))
        n = np.arange(n_levels)
        return (energies[n + abs(nu)] - energies[n]) / self.hbar
