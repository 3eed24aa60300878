"""Strain tensors, the induced metric and its inverse, and the dilatation.

Gradient matrices follow one convention throughout the package:
``G[k, j] = du^k / d(coordinate)^j`` (rows are displacement components,
columns are derivative directions). Coordinate 1 (index 0) is time.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import SingularJacobian

ETA = np.diag([-1.0, 1.0, 1.0])
ETA.setflags(write=False)

DET_TOL = 1e-12


class Perspective(Enum):
    LAGRANGIAN = "lagrangian"
    EULERIAN = "eulerian"


@dataclass(frozen=True)
class StrainTensor:
    eps: np.ndarray
    perspective: Perspective


@dataclass(frozen=True)
class MetricTensor3:
    """A symmetric 3x3 metric; ``contravariant`` marks g^{mu nu}."""

    g: np.ndarray
    contravariant: bool = False

    def inverse(self) -> "MetricTensor3":
        return MetricTensor3(np.linalg.inv(self.g), not self.contravariant)


def _grad(grad) -> np.ndarray:
    g = np.asarray(grad)
    if g.shape != (3, 3):
        raise ValueError(f"gradient must be 3x3, got {g.shape}")
    if np.iscomplexobj(g):
        g = g.real
    return g.astype(float)


def _strain(grad, sign: float) -> np.ndarray:
    G = _grad(grad)
    lin = ETA @ G
    eps = 0.5 * (lin + lin.T + sign * (G.T @ ETA @ G))
    # force exact symmetry against rounding in the quadratic term
    return 0.5 * (eps + eps.T)


def strain_lagrangian(grad) -> StrainTensor:
    """Material-coordinate strain, including the quadratic term."""
    return StrainTensor(_strain(grad, +1.0), Perspective.LAGRANGIAN)


def strain_eulerian(grad) -> StrainTensor:
    """Fixed-space strain; the quadratic term enters with a minus sign."""
    return StrainTensor(_strain(grad, -1.0), Perspective.EULERIAN)


def jacobian(grad_a) -> np.ndarray:
    """J = dx/da = I + du/da."""
    return np.eye(3) + _grad(grad_a)


def metric_from_displacement(grad_a, check: bool = True) -> MetricTensor3:
    """Covariant metric J^T eta J in material coordinates."""
    J = jacobian(grad_a)
    if abs(np.linalg.det(J)) < DET_TOL:
        raise SingularJacobian(f"|det J| = {abs(np.linalg.det(J)):.3e} below {DET_TOL}")
    g = J.T @ ETA @ J
    g = 0.5 * (g + g.T)
    if check:
        ref = ETA + 2.0 * strain_lagrangian(grad_a).eps
        scale = max(1.0, float(np.abs(g).max()))
        if np.abs(g - ref).max() > 1e-12 * scale:
            raise AssertionError("metric disagrees with eta + 2 * Lagrangian strain")
    return MetricTensor3(g)


def inverse_metric_from_displacement(grad_x) -> MetricTensor3:
    """Contravariant metric from fixed-space gradients, term by term."""
    G = _grad(grad_x)
    ginv = ETA - G @ ETA - ETA @ G.T + G @ ETA @ G.T
    return MetricTensor3(0.5 * (ginv + ginv.T), contravariant=True)


def grad_x_from_grad_a(grad_a) -> np.ndarray:
    """Convert du/da into du/dx for the same deformation."""
    G = _grad(grad_a)
    J = np.eye(3) + G
    if abs(np.linalg.det(J)) < DET_TOL:
        raise SingularJacobian("cannot change variables through a singular Jacobian")
    return np.linalg.solve(J.T, G.T).T


def grad_a_from_grad_x(grad_x) -> np.ndarray:
    """Inverse of :func:`grad_x_from_grad_a`."""
    G = _grad(grad_x)
    K = np.eye(3) - G
    if abs(np.linalg.det(K)) < DET_TOL:
        raise SingularJacobian("cannot change variables through a singular Jacobian")
    return np.linalg.solve(K.T, G.T).T


def dilatation(grad) -> float:
    """Divergence sum_k du^k/dx^k.

    Identical to -u_11 + u_22 + u_33 once the first index is lowered with eta.
    """
    return float(np.trace(_grad(grad)))
