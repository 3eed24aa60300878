"""Isotropic elastic Lagrangian, canonical momenta, Hamiltonian density and
the classical field equations with coordinate 1 as time.

Lowered displacement gradients ``u_{mu nu} = d u_mu / d x^nu`` are used for the
state variables; ``u_1 = -u^1`` because of the (-,+,+) metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import DisplacementField, LameParameters
from .kinematics import ETA, StrainTensor


@dataclass(frozen=True)
class CanonicalState:
    grad: np.ndarray  # u_{mu nu}, first index lowered
    momenta: np.ndarray  # (P1, P2, P3)


def lower_first_index(grad_upper) -> np.ndarray:
    """u_{mu nu} from G[mu, nu] = du^mu/dx^nu."""
    return ETA @ np.asarray(grad_upper)


def infinitesimal_strain(grad_lower) -> np.ndarray:
    """Linear strain 1/2 (u_{mu nu} + u_{nu mu})."""
    u = np.asarray(grad_lower, dtype=float)
    return 0.5 * (u + u.T)


def lagrangian_density(eps: StrainTensor | np.ndarray, lam: LameParameters) -> float:
    """Isotropic quadratic density in the strain components."""
    e = eps.eps if isinstance(eps, StrainTensor) else np.asarray(eps, dtype=float)
    l, m = lam.lam, lam.mu
    return float(
        (l + 2 * m) * (e[0, 0] ** 2 + e[1, 1] ** 2 + e[2, 2] ** 2)
        + 2 * l * (e[1, 1] * e[2, 2] - e[0, 0] * e[1, 1] - e[0, 0] * e[2, 2])
        + 4 * m * (e[1, 2] ** 2 - e[0, 1] ** 2 - e[0, 2] ** 2)
    )


def canonical_momenta(grad_lower, lam: LameParameters) -> np.ndarray:
    """Momenta conjugate to u_1, u_2, u_3 from the linear strain of ``grad_lower``."""
    e = infinitesimal_strain(grad_lower)
    l, m = lam.lam, lam.mu
    return np.array(
        [
            -2 * l * (e[0, 0] - e[1, 1] - e[2, 2]) - 4 * m * e[0, 0],
            4 * m * e[0, 1],
            4 * m * e[0, 2],
        ]
    )


def hamiltonian_density(state: CanonicalState, lam: LameParameters) -> float:
    """Closed-form density in the momenta and the spatial gradients."""
    P1, P2, P3 = np.asarray(state.momenta, dtype=float)
    u = np.asarray(state.grad, dtype=float)
    l, m = lam.lam, lam.mu
    L = l + 2 * m
    u22, u33 = u[1, 1], u[2, 2]
    return float(
        3 * P1**2 / (4 * L)
        + (P2**2 + P3**2) / (4 * m)
        - l * (u22 + u33) * P1 / L
        - P2 * u[0, 1]
        - P3 * u[0, 2]
        + m * (u[1, 2] + u[2, 1]) ** 2
        - l**2 * (u22 + u33) ** 2 / L
        + 2 * l * u22 * u33
        + L * (u22**2 + u33**2)
    )


def legendre_hamiltonian(grad_lower, lam: LameParameters) -> float:
    """sum_rho P_rho u^rho_1 - L_field with L_field the negative of
    :func:`lagrangian_density`, whose derivatives give the momenta above."""
    u = np.asarray(grad_lower, dtype=float)
    P = canonical_momenta(u, lam)
    velocity_upper = ETA @ u[:, 0]  # u^rho_1
    field_lagrangian = -lagrangian_density(infinitesimal_strain(u), lam)
    return float(P @ velocity_upper - field_lagrangian)


def _mode_terms(u: DisplacementField, p):
    p = np.asarray(p, dtype=float)
    ph = np.exp(1j * (u.wavevectors @ p))
    return u.wavevectors, u.amplitudes, ph


def _box(q: np.ndarray) -> np.ndarray:
    """Symbol of -d1^2 + d2^2 + d3^2 on exp(i q.x)."""
    return q[..., 0] ** 2 - q[..., 1] ** 2 - q[..., 2] ** 2


def field_equation_residual(u: DisplacementField, lam: LameParameters, p) -> np.ndarray:
    """(2 lambda + 2 mu) d^rho sigma + 2 mu box u^rho, exact per mode."""
    q, a, ph = _mode_terms(u, p)
    div = 1j * np.einsum("nk,nk->n", q, a)  # sigma per mode
    grad_up = 1j * q @ ETA  # d^rho = eta^{rho nu} d_nu
    out = (2 * lam.lam + 2 * lam.mu) * grad_up * div[:, None] + 2 * lam.mu * _box(q)[:, None] * a
    return (ph[:, None] * out).sum(axis=0)


def dilatation_wave_identity(u: DisplacementField, lam: LameParameters, p) -> tuple[complex, complex]:
    """(divergence of the field-equation left side, (2 lambda + 4 mu) box sigma)."""
    q, a, ph = _mode_terms(u, p)
    div = 1j * np.einsum("nk,nk->n", q, a)
    grad_up = 1j * q @ ETA
    res = (2 * lam.lam + 2 * lam.mu) * grad_up * div[:, None] + 2 * lam.mu * _box(q)[:, None] * a
    lhs = np.sum(ph * np.einsum("nk,nk->n", 1j * q, res))
    rhs = (2 * lam.lam + 4 * lam.mu) * np.sum(ph * _box(q) * div)
    return complex(lhs), complex(rhs)
