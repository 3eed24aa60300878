"""Analytic displacement fields built from finite Fourier sums.

A field is u(x) = sum_n a_n exp(i q_n . x) with a plain Euclidean dot product
and no normalization prefactor. All derivatives are exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateMaterial, DomainError

REALITY_TOL = 1e-12


@dataclass(frozen=True)
class LameParameters:
    """Isotropic stiffnesses (lambda, mu)."""

    lam: float
    mu: float

    def __post_init__(self):
        if not (np.isfinite(self.lam) and np.isfinite(self.mu)):
            raise DegenerateMaterial(f"non-finite Lamé parameters ({self.lam}, {self.mu})")
        if self.mu <= 0 or self.lam <= 0:
            raise DegenerateMaterial(f"need lambda > 0 and mu > 0, got ({self.lam}, {self.mu})")

    @property
    def longitudinal(self) -> float:
        """lambda + 2 mu."""
        return self.lam + 2.0 * self.mu


@dataclass(frozen=True)
class FourierMode:
    wavevector: tuple[float, float, float]
    amplitude: tuple[complex, complex, complex]

    def __post_init__(self):
        q = tuple(float(v) for v in self.wavevector)
        a = tuple(complex(v) for v in self.amplitude)
        if len(q) != 3 or len(a) != 3:
            raise ValueError("wavevector and amplitude must have three components")
        if not all(np.isfinite(q)) or not all(np.isfinite(v) for v in a):
            raise ValueError("mode data must be finite")
        if q[2] != round(q[2]):
            raise DomainError(f"compact wavenumber q3 must be an integer, got {q[2]}")
        object.__setattr__(self, "wavevector", q)
        object.__setattr__(self, "amplitude", a)

    def conjugate(self) -> "FourierMode":
        """The mirror mode (-q, conj(a))."""
        return FourierMode(tuple(-v for v in self.wavevector), tuple(np.conj(self.amplitude)))


@dataclass(frozen=True)
class DisplacementField:
    """Finite Fourier sum with exact evaluation and derivatives.

    With ``real=True`` every mode must have its conjugate partner and
    evaluations return real arrays.
    """

    modes: tuple[FourierMode, ...] = ()
    real: bool = False
    _q: np.ndarray = field(init=False, repr=False, compare=False)
    _a: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        modes = tuple(self.modes)
        object.__setattr__(self, "modes", modes)
        q = np.array([m.wavevector for m in modes], dtype=float).reshape(-1, 3)
        a = np.array([m.amplitude for m in modes], dtype=complex).reshape(-1, 3)
        q.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "_q", q)
        object.__setattr__(self, "_a", a)
        if self.real and not _has_conjugate_pairs(q, a):
            raise ValueError("real field requires conjugate (q, a) / (-q, conj a) pairs")

    @classmethod
    def from_modes(cls, modes: Iterable[FourierMode], real: bool | None = None) -> "DisplacementField":
        """Build a field; ``real=None`` sets the flag when the pairing holds."""
        modes = tuple(modes)
        if real is None:
            q = np.array([m.wavevector for m in modes], dtype=float).reshape(-1, 3)
            a = np.array([m.amplitude for m in modes], dtype=complex).reshape(-1, 3)
            real = _has_conjugate_pairs(q, a)
        return cls(modes, real)

    @classmethod
    def plane_wave(cls, q: Sequence[float], a: Sequence[complex], real: bool = True) -> "DisplacementField":
        """A single mode, plus its mirror when ``real``."""
        m = FourierMode(tuple(q), tuple(a))
        if not real:
            return cls((m,), False)
        if not np.any(m.wavevector):
            amp = tuple(complex(np.real(v)) for v in m.amplitude)
            return cls((FourierMode(m.wavevector, amp),), True)
        return cls((m, m.conjugate()), True)

    def __add__(self, other: "DisplacementField") -> "DisplacementField":
        return DisplacementField(self.modes + other.modes, self.real and other.real)

    @property
    def wavevectors(self) -> np.ndarray:
        return self._q

    @property
    def amplitudes(self) -> np.ndarray:
        return self._a

    def _phases(self, p) -> tuple[np.ndarray, tuple[int, ...]]:
        p = np.asarray(p, dtype=float)
        if p.shape[-1] != 3:
            raise ValueError("points must have a trailing dimension of 3")
        lead = p.shape[:-1]
        ph = np.exp(1j * (p.reshape(-1, 3) @ self._q.T))
        return ph, lead

    def _finish(self, values: np.ndarray):
        if self.real:
            return values.real.copy()
        return values

    def evaluate(self, p) -> np.ndarray:
        """u^mu at one point (shape (3,)) or many (shape (..., 3))."""
        ph, lead = self._phases(p)
        out = ph @ self._a
        return self._finish(out.reshape(*lead, 3))

    def gradient(self, p) -> np.ndarray:
        """G[mu, nu] = du^mu/dx^nu."""
        ph, lead = self._phases(p)
        out = np.einsum("pn,nm,nk->pmk", ph, self._a, 1j * self._q)
        return self._finish(out.reshape(*lead, 3, 3))

    def hessian(self, p) -> np.ndarray:
        """H[mu, nu, rho] = d^2 u^mu / dx^nu dx^rho."""
        ph, lead = self._phases(p)
        out = -np.einsum("pn,nm,nk,nl->pmkl", ph, self._a, self._q, self._q)
        return self._finish(out.reshape(*lead, 3, 3, 3))

    def max_compact_wavenumber(self, tol: float = REALITY_TOL) -> int:
        """Largest |q3| among modes whose amplitude exceeds ``tol``."""
        keep = np.abs(self._a).max(axis=1, initial=0.0) > tol
        if not np.any(keep):
            return 0
        return int(np.abs(self._q[keep, 2]).max())

    def to_json(self) -> list[dict]:
        return [
            {
                "q": list(m.wavevector),
                "amp_re": [float(np.real(v)) for v in m.amplitude],
                "amp_im": [float(np.imag(v)) for v in m.amplitude],
            }
            for m in self.modes
        ]


def _has_conjugate_pairs(q: np.ndarray, a: np.ndarray) -> bool:
    for k in range(len(q)):
        hits = np.all(np.abs(q + q[k]) <= REALITY_TOL, axis=1)
        hits &= np.all(np.abs(a - np.conj(a[k])) <= REALITY_TOL, axis=1)
        if not np.any(hits):
            return False
    return True


def modes_from_json(data) -> list[FourierMode]:
    """Parse the ``[{"q": .., "amp_re": .., "amp_im": ..}, ...]`` layout."""
    if not isinstance(data, list):
        raise ValueError("mode list must be a JSON array")
    modes = []
    for i, entry in enumerate(data):
        if not isinstance(entry, dict) or set(entry) != {"q", "amp_re", "amp_im"}:
            raise ValueError(f"mode {i}: expected exactly the keys q, amp_re, amp_im")
        q, re, im = entry["q"], entry["amp_re"], entry["amp_im"]
        if not all(isinstance(v, list) and len(v) == 3 for v in (q, re, im)):
            raise ValueError(f"mode {i}: each entry must be a list of three numbers")
        try:
            amp = tuple(complex(float(r), float(m)) for r, m in zip(re, im))
            modes.append(FourierMode(tuple(float(v) for v in q), amp))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"mode {i}: {exc}") from exc
    return modes


def load_field(path: str | Path, real: bool | None = None) -> DisplacementField:
    """Read a JSON mode list from disk."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return DisplacementField.from_modes(modes_from_json(data), real=real)
