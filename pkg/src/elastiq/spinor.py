"""Two-component spinors for isotropic momenta, the matrix Dirac operator,
a spectral semiderivative on exponential sums, and Grassmann-valued
fermionic mode operators.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from numbers import Number
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, OffShell, TruncationTooSmall, UniverseMismatch
from .kinematics import ETA

SHELL_TOL = 1e-10


@dataclass(frozen=True)
class GammaTriple:
    g1: np.ndarray = field(default_factory=lambda: np.array([[0, 1], [-1, 0]], dtype=complex))
    g2: np.ndarray = field(default_factory=lambda: np.array([[0, 1], [1, 0]], dtype=complex))
    g3: np.ndarray = field(default_factory=lambda: np.array([[1, 0], [0, -1]], dtype=complex))

    def as_array(self) -> np.ndarray:
        return np.stack([self.g1, self.g2, self.g3])

    def anticommutators(self) -> np.ndarray:
        """Table {g^mu, g^nu}, shape (3, 3, 2, 2)."""
        return anticommutator_table(self.as_array())


def anticommutator_table(gammas: np.ndarray) -> np.ndarray:
    g = np.asarray(gammas)
    prod = np.einsum("mij,njk->mnik", g, g)
    return prod + prod.transpose(1, 0, 2, 3)


def reduced_gammas(g: GammaTriple | None = None) -> np.ndarray:
    """gamma'^mu = gamma^3 gamma^mu for mu = 1, 2; they realize diag(1, -1)."""
    g = g or GammaTriple()
    return np.stack([g.g3 @ g.g1, g.g3 @ g.g2])


ETA_2D = np.diag([1.0, -1.0])


@dataclass(frozen=True)
class CartanSpinor:
    xi0: complex
    xi1: complex

    @property
    def column(self) -> np.ndarray:
        return np.array([self.xi0, self.xi1], dtype=complex)


def cartan_embed(s: CartanSpinor) -> np.ndarray:
    """Isotropic vector (xi0^2 + xi1^2, xi0^2 - xi1^2, -2 xi0 xi1)."""
    a, b = complex(s.xi0), complex(s.xi1)
    return np.array([a * a + b * b, a * a - b * b, -2 * a * b])


def mass_shell(q) -> float:
    q = np.asarray(q, dtype=float)
    return float(q @ ETA @ q)


def _branch(q) -> CartanSpinor:
    q1, q2, q3 = (float(v) for v in q)
    if q1 < abs(q2):
        raise DomainError(f"need q1 >= |q2|, got q = {tuple(q)}")
    sgn = 1.0 if q3 >= 0 else -1.0
    return CartanSpinor(math.sqrt((q1 + q2) / 2), -sgn * math.sqrt((q1 - q2) / 2))


def spinor_from_momentum(q) -> CartanSpinor:
    """Spinor whose embedding is the on-shell momentum ``q``."""
    q = np.asarray(q, dtype=float)
    if q.shape != (3,):
        raise ValueError("momentum must have three components")
    if q[0] < abs(q[1]):
        raise DomainError(f"need q1 >= |q2|, got q = {tuple(q)}")
    shell = mass_shell(q)
    if abs(shell) > SHELL_TOL:
        raise OffShell(f"-q1^2 + q2^2 + q3^2 = {shell:.3e}")
    return _branch(q)


def dirac_operator(g: GammaTriple, q) -> np.ndarray:
    """sum_mu (i q_mu) gamma^mu, the symbol of sum_mu gamma^mu d_mu."""
    q = np.asarray(q, dtype=float)
    return 1j * np.einsum("m,mij->ij", q, g.as_array())


def dirac_residual_3d(g: GammaTriple, q) -> np.ndarray:
    """Dirac symbol applied to the branch spinor of ``q`` (not required on shell)."""
    return dirac_operator(g, q) @ _branch(q).column


def reduced_dirac_residual_2d(q2: float, q3: int, g: GammaTriple | None = None) -> np.ndarray:
    """(sum_{mu=1,2} i gamma'^mu (i q_mu) - q3) xi at q1 = sqrt(q2^2 + q3^2)."""
    g = g or GammaTriple()
    gp = reduced_gammas(g)
    table = anticommutator_table(gp)
    if not np.array_equal(table, 2 * np.einsum("mn,ij->mnij", ETA_2D, np.eye(2))):
        raise AssertionError("reduced gammas do not realize diag(1, -1)")
    q1 = math.hypot(q2, q3)
    xi = _branch((q1, q2, q3)).column
    op = 1j * (1j * q1) * gp[0] + 1j * (1j * q2) * gp[1] - q3 * np.eye(2)
    return op @ xi


def dirac_factorization_check(g: GammaTriple, q) -> np.ndarray:
    """(q.gamma)^2 + shell * I, identically zero."""
    X = dirac_operator(g, q)
    return X @ X + mass_shell(q) * np.eye(2)


# -- semiderivative --------------------------------------------------------


@dataclass(frozen=True)
class ExponentialSum:
    """sum_k c_k exp(alpha_k x); duplicate exponents are merged, zeros dropped."""

    terms: tuple[tuple[complex, complex], ...] = ()

    def __post_init__(self):
        merged: dict[complex, complex] = {}
        for c, a in self.terms:
            a = complex(a)
            merged[a] = merged.get(a, 0j) + complex(c)
        clean = tuple((c, a) for a, c in sorted(merged.items(), key=lambda t: (t[0].real, t[0].imag)) if c != 0)
        object.__setattr__(self, "terms", clean)

    def __call__(self, x) -> np.ndarray | complex:
        x = np.asarray(x, dtype=complex)
        out = np.zeros_like(x)
        for c, a in self.terms:
            out = out + c * np.exp(a * x)
        return out

    def coefficients(self) -> dict[complex, complex]:
        return {a: c for c, a in self.terms}

    def derivative(self) -> "ExponentialSum":
        return ExponentialSum(tuple((c * a, a) for c, a in self.terms))


def semiderivative(f: ExponentialSum) -> ExponentialSum:
    """Half derivative: (c, alpha) -> (c sqrt(alpha), alpha), principal branch."""
    return ExponentialSum(tuple((c * cmath.sqrt(a), a) for c, a in f.terms))


# -- Grassmann algebra -----------------------------------------------------


def _reorder_sign(a: int, b: int) -> int:
    """Sign from moving the generators of ``b`` past those of ``a``."""
    swaps = 0
    while b:
        low = b & -b
        swaps += bin(a & ~((low << 1) - 1)).count("1")
        b ^= low
    return -1 if swaps & 1 else 1


def _coeff_product(x, y):
    if isinstance(x, np.ndarray) and isinstance(y, np.ndarray):
        return x @ y
    return x * y


def _is_zero(c) -> bool:
    if isinstance(c, np.ndarray):
        return not np.any(c)
    return c == 0


@dataclass(frozen=True)
class GrassmannElement:
    """Element of the exterior algebra on theta_1..theta_n and theta*_1..theta*_n.

    Bit ``k-1`` of a mask is theta_k, bit ``n+k-1`` is theta*_k; a monomial is
    the product of its generators in increasing bit order. Coefficients can be
    any ring elements (ints, Fractions, complex, or square matrices for
    operator-valued elements); no rounding is ever introduced.
    """

    n: int
    coefficients: Mapping[int, object] = field(default_factory=dict)

    def __post_init__(self):
        clean = {int(k): v for k, v in dict(self.coefficients).items() if not _is_zero(v)}
        limit = 1 << (2 * self.n)
        if any(k < 0 or k >= limit for k in clean):
            raise ValueError("mask outside the generator universe")
        object.__setattr__(self, "coefficients", clean)

    @classmethod
    def scalar(cls, n: int, c=1) -> "GrassmannElement":
        return cls(n, {0: c})

    @classmethod
    def theta(cls, n: int, k: int, conjugate: bool = False, c=1) -> "GrassmannElement":
        if not 1 <= k <= n:
            raise ValueError(f"generator index {k} outside 1..{n}")
        bit = (n + k - 1) if conjugate else (k - 1)
        return cls(n, {1 << bit: c})

    def _check(self, other: "GrassmannElement") -> None:
        if not isinstance(other, GrassmannElement) or other.n != self.n:
            raise UniverseMismatch("Grassmann elements over different generator sets")

    def __add__(self, other: "GrassmannElement") -> "GrassmannElement":
        self._check(other)
        out = dict(self.coefficients)
        for k, v in other.coefficients.items():
            out[k] = out[k] + v if k in out else v
        return GrassmannElement(self.n, out)

    def __neg__(self) -> "GrassmannElement":
        return GrassmannElement(self.n, {k: -v for k, v in self.coefficients.items()})

    def __sub__(self, other: "GrassmannElement") -> "GrassmannElement":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (Number, np.ndarray)) and not isinstance(other, GrassmannElement):
            return GrassmannElement(self.n, {k: _coeff_product(v, other) for k, v in self.coefficients.items()})
        return grassmann_multiply(self, other)

    def __rmul__(self, other):
        return GrassmannElement(self.n, {k: _coeff_product(other, v) for k, v in self.coefficients.items()})

    def is_zero(self) -> bool:
        return not self.coefficients

    def conjugate(self) -> "GrassmannElement":
        """theta_k <-> theta*_k with order reversal; coefficients conjugated
        (matrices are conjugate-transposed)."""
        n = self.n
        out: dict[int, object] = {}
        for mask, c in self.coefficients.items():
            bits = [b for b in range(2 * n) if mask >> b & 1]
            # (xy)* = y* x*: walk the swapped generators in reverse order
            sign, acc = 1, 0
            for b in reversed(bits):
                b = b + n if b < n else b - n
                sign *= _reorder_sign(acc, 1 << b)
                acc |= 1 << b
            if isinstance(c, np.ndarray):
                cc = np.conj(c).T
            else:
                cc = c.conjugate() if hasattr(c, "conjugate") else c
            out[acc] = cc if sign > 0 else -cc
        return GrassmannElement(n, out)


def grassmann_multiply(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    """Exterior product with anticommutation signs."""
    a._check(b)
    out: dict[int, object] = {}
    for ma, ca in a.coefficients.items():
        for mb, cb in b.coefficients.items():
            if ma & mb:
                continue
            c = _coeff_product(ca, cb)
            if _reorder_sign(ma, mb) < 0:
                c = -c
            m = ma | mb
            out[m] = out[m] + c if m in out else c
    return GrassmannElement(a.n, out)


def anticommutator(x: GrassmannElement, y: GrassmannElement) -> GrassmannElement:
    return x * y + y * x


def boson_annihilator(k: int, n_modes: int, truncation: int) -> np.ndarray:
    """b_k on the tensor product of ``n_modes`` Fock spaces with ``truncation`` levels."""
    if truncation < 2:
        raise TruncationTooSmall(f"need at least 2 Fock levels, got {truncation}")
    if not 1 <= k <= n_modes:
        raise ValueError(f"mode {k} outside 1..{n_modes}")
    a = np.diag(np.sqrt(np.arange(1, truncation, dtype=float)), 1)
    ops = [a if j == k else np.eye(truncation) for j in range(1, n_modes + 1)]
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def fermionize(k: int, n_modes: int, truncation: int = 3) -> tuple[GrassmannElement, GrassmannElement]:
    """(c_k, c_k^dag) = (theta_k b_k, theta*_k b_k^dag) as operator-valued elements."""
    b = boson_annihilator(k, n_modes, truncation)
    c = GrassmannElement.theta(n_modes, k, c=b)
    cd = GrassmannElement.theta(n_modes, k, conjugate=True, c=b.T.copy())
    return c, cd


def fermion_statistics(n_modes: int, truncation: int = 3) -> dict[str, float]:
    """Largest entries of {c, c}, {c^dag, c^dag} and of {c, c^dag} minus its
    theta theta* [b, b^dag] prediction, over all mode pairs."""
    ops = [fermionize(k, n_modes, truncation) for k in range(1, n_modes + 1)]
    worst = {"cc": 0.0, "cdcd": 0.0, "ccd": 0.0}

    def size(e: GrassmannElement) -> float:
        return max((float(np.abs(v).max()) for v in e.coefficients.values()), default=0.0)

    for i, (ci, cdi) in enumerate(ops, start=1):
        for j, (cj, cdj) in enumerate(ops, start=1):
            worst["cc"] = max(worst["cc"], size(anticommutator(ci, cj)))
            worst["cdcd"] = max(worst["cdcd"], size(anticommutator(cdi, cdj)))
            bi = boson_annihilator(i, n_modes, truncation)
            bj = boson_annihilator(j, n_modes, truncation)
            pred = GrassmannElement.theta(n_modes, i) * GrassmannElement.theta(n_modes, j, conjugate=True)
            pred = pred * (bi @ bj.T - bj.T @ bi)
            worst["ccd"] = max(worst["ccd"], size(anticommutator(ci, cdj) - pred))
    return worst
