"""Curvature of metric fields by central finite differences."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import SingularMetric
from .fields import DisplacementField
from .kinematics import ETA, DET_TOL

DEFAULT_STEP = 1e-3


@dataclass(frozen=True)
class MetricField:
    """A covariant metric g_{ab}(p) in ``dimension`` coordinates.

    ``eval_many`` is an optional batched evaluator mapping (N, d) points to
    (N, d, d) matrices; it is only a speed-up.
    """

    dimension: int
    eval: Callable[[np.ndarray], np.ndarray]
    h: float = DEFAULT_STEP
    eval_many: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        if not self.h > 0:
            raise ValueError("finite-difference step must be positive")

    def with_step(self, h: float) -> "MetricField":
        return MetricField(self.dimension, self.eval, h, self.eval_many)

    def sample(self, points: np.ndarray) -> np.ndarray:
        if self.eval_many is not None:
            return np.asarray(self.eval_many(points), dtype=float)
        return np.array([self.eval(p) for p in points], dtype=float)


@dataclass(frozen=True)
class CurvatureReport:
    point: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    einstein: np.ndarray
    max_abs_riemann: float

    def to_json(self) -> dict:
        return {
            "point": self.point.tolist(),
            "riemann": self.riemann.tolist(),
            "ricci": self.ricci.tolist(),
            "scalar": self.scalar,
            "einstein": self.einstein.tolist(),
            "max_abs_riemann": self.max_abs_riemann,
        }


@dataclass(frozen=True)
class _Jet:
    """Metric, inverse and finite-difference derivatives at a point."""

    g: np.ndarray
    ginv: np.ndarray
    dg: np.ndarray  # dg[k, a, b] = d_k g_ab
    d2g: np.ndarray  # d2g[k, l, a, b] = d_k d_l g_ab


def _stencil(d: int, h: float) -> tuple[np.ndarray, dict]:
    offsets = [np.zeros(d)]
    index = {(): 0}
    eye = np.eye(d)
    for k in range(d):
        for s in (1, -1):
            index[(k, s)] = len(offsets)
            offsets.append(s * h * eye[k])
    for k in range(d):
        for l in range(k + 1, d):
            for s in (1, -1):
                for t in (1, -1):
                    index[(k, s, l, t)] = len(offsets)
                    offsets.append(s * h * eye[k] + t * h * eye[l])
    return np.array(offsets), index


def _invert(g: np.ndarray) -> np.ndarray:
    det = np.linalg.det(g)
    if not np.all(np.isfinite(g)) or np.any(np.abs(det) < DET_TOL):
        raise SingularMetric(f"metric not invertible on the stencil (min |det| = {np.min(np.abs(det)):.3e})")
    return np.linalg.inv(g)


def _jet(m: MetricField, p, second: bool = True) -> _Jet:
    p = np.asarray(p, dtype=float)
    d, h = m.dimension, m.h
    offs, idx = _stencil(d, h)
    if not second:
        offs = offs[: 1 + 2 * d]
    vals = m.sample(p + offs)
    _invert(vals)
    g0 = vals[0]
    dg = np.empty((d, d, d))
    for k in range(d):
        dg[k] = (vals[idx[(k, 1)]] - vals[idx[(k, -1)]]) / (2 * h)
    d2g = np.zeros((d, d, d, d))
    if second:
        for k in range(d):
            d2g[k, k] = (vals[idx[(k, 1)]] - 2 * g0 + vals[idx[(k, -1)]]) / h**2
            for l in range(k + 1, d):
                mixed = (
                    vals[idx[(k, 1, l, 1)]]
                    - vals[idx[(k, 1, l, -1)]]
                    - vals[idx[(k, -1, l, 1)]]
                    + vals[idx[(k, -1, l, -1)]]
                ) / (4 * h**2)
                d2g[k, l] = d2g[l, k] = mixed
    return _Jet(g0, np.linalg.inv(g0), dg, d2g)


def _christoffel_first(dg: np.ndarray) -> np.ndarray:
    """Gamma_{rho, a b} = 1/2 (d_b g_{rho a} + d_a g_{rho b} - d_rho g_{ab})."""
    # dg[k, a, b]; term1[rho, a, b] = dg[b, rho, a]
    t1 = np.einsum("bra->rab", dg)
    t2 = np.einsum("arb->rab", dg)
    return 0.5 * (t1 + t2 - dg)


def christoffel(m: MetricField, p) -> np.ndarray:
    """Gamma^rho_{alpha beta}, indexed [rho, alpha, beta]."""
    jet = _jet(m, p, second=False)
    return np.einsum("rl,lab->rab", jet.ginv, _christoffel_first(jet.dg))


def riemann(m: MetricField, p) -> CurvatureReport:
    """All-lower Riemann tensor with Ricci, scalar and Einstein contractions."""
    jet = _jet(m, p)
    d2 = jet.d2g
    low = _christoffel_first(jet.dg)
    up = np.einsum("rl,lab->rab", jet.ginv, low)
    # second-derivative part: 1/2 (g_{an,bm} - g_{am,bn} + g_{bm,an} - g_{bn,am})
    R = 0.5 * (
        np.einsum("bman->abmn", d2)
        - np.einsum("bnam->abmn", d2)
        + np.einsum("anbm->abmn", d2)
        - np.einsum("ambn->abmn", d2)
    )
    R += np.einsum("rbm,ran->abmn", up, low) - np.einsum("ram,rbn->abmn", up, low)
    ricci = np.einsum("am,abmn->bn", jet.ginv, R)
    ricci = 0.5 * (ricci + ricci.T)
    scalar = float(np.einsum("bn,bn->", jet.ginv, ricci))
    einstein = ricci - 0.5 * jet.g * scalar
    return CurvatureReport(
        point=np.asarray(p, dtype=float),
        riemann=R,
        ricci=ricci,
        scalar=scalar,
        einstein=einstein,
        max_abs_riemann=float(np.abs(R).max()),
    )


def displacement_metric_field(u: DisplacementField, h: float = DEFAULT_STEP) -> MetricField:
    """Metric J^T eta J of ``u`` read as a function of material coordinates."""

    def many(points):
        G = np.real(u.gradient(points))
        J = np.eye(3) + G
        return np.einsum("nki,kl,nlj->nij", J, ETA, J)

    return MetricField(3, lambda p: many(np.asarray(p)[None])[0], h, many)


def compatibility_check(u: DisplacementField, grid: Iterable, h: float) -> float:
    """Largest |R_{abmn}| of the displacement-induced metric over ``grid``."""
    m = displacement_metric_field(u, h)
    worst = 0.0
    for p in grid:
        worst = max(worst, riemann(m, p).max_abs_riemann)
    return worst
