"""Finite-strain reduction from three to two dimensions.

Covers curved gamma matrices in internal coordinates, spin connections,
the normal gamma, the Kaluza-Klein block split, reduced field diagnostics,
the mode-coupled reduced Dirac system and the change of Fourier basis
between fixed and internal coordinates.

Sign conventions. The metric induced by a displacement has a positive
compact entry, so the block split is applied to the orientation-reversed
metric ``-g~`` (signature (+,-,-)). The resulting 2D metric is the one realized
by gamma'' = gamma_perp gamma~, which is diag(1, -1) when unstrained.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DegenerateFrame, MetricMismatch, ModeLeakage, SignatureError, SingularFrame, TruncationError
from .fields import DisplacementField
from .geometry import MetricField, christoffel, riemann
from .kinematics import DET_TOL, ETA, MetricTensor3, grad_x_from_grad_a, inverse_metric_from_displacement
from .spinor import GammaTriple, anticommutator_table

LEAK_TOL = 1e-12
ANTICOMM_TOL = 1e-10


def coordinate_pullback(grad_x) -> np.ndarray:
    """D with d/dx^i = sum_j D[i, j] d/dx'^j, i.e. D = I - G^T."""
    G = np.real(np.asarray(grad_x, dtype=complex))
    return np.eye(3) - G.T


@dataclass(frozen=True)
class CurvedGammaSet:
    gammas: np.ndarray  # (3, 2, 2)
    metric: MetricTensor3  # contravariant g^{mu nu} they realize

    def anticommutators(self) -> np.ndarray:
        return anticommutator_table(self.gammas)

    def metric_residual(self) -> float:
        target = 2 * np.einsum("mn,ij->mnij", self.metric.g, np.eye(2))
        return float(np.abs(self.anticommutators() - target).max())


def curved_gammas(g: GammaTriple, grad_x) -> CurvedGammaSet:
    """gamma'^mu = gamma^mu - sum_a (du^mu/dx^a) gamma^a."""
    G = np.real(np.asarray(grad_x, dtype=complex))
    gp = np.einsum("ma,aij->mij", np.eye(3) - G, g.as_array())
    cg = CurvedGammaSet(gp, inverse_metric_from_displacement(G))
    err = cg.metric_residual()
    if err > ANTICOMM_TOL:
        raise MetricMismatch(f"anticommutators differ from 2 g^(mu nu) by {err:.3e}")
    return cg


def conjugate_gammas(cg: CurvedGammaSet, S: np.ndarray) -> CurvedGammaSet:
    """gamma~ = S^-1 gamma' S."""
    S = np.asarray(S, dtype=complex)
    if abs(np.linalg.det(S)) < DET_TOL:
        raise SingularFrame("similarity matrix is singular")
    Si = np.linalg.inv(S)
    return CurvedGammaSet(np.einsum("ij,mjk,kl->mil", Si, cg.gammas, S), cg.metric)


@dataclass(frozen=True)
class SpinFrame:
    S: np.ndarray
    Gamma: np.ndarray  # (d, 2, 2), Gamma_mu = (d_mu S^-1) S
    inverse_identity_residual: float  # |(dS^-1) S + S^-1 dS|
    gammas: CurvedGammaSet | None = None


def _inv_checked(S: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(S)) or abs(np.linalg.det(S)) < DET_TOL:
        raise SingularFrame("spin frame is not invertible on the stencil")
    return np.linalg.inv(S)


def spin_connection(S_field: Callable[[np.ndarray], np.ndarray], p, h: float, cg: CurvedGammaSet | None = None) -> SpinFrame:
    """Central-difference spin connection; conjugates ``cg`` when given."""
    p = np.asarray(p, dtype=float)
    d = p.shape[0]
    S0 = np.asarray(S_field(p), dtype=complex)
    S0i = _inv_checked(S0)
    Gam = np.empty((d, 2, 2), dtype=complex)
    worst = 0.0
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        Sp, Sm = np.asarray(S_field(p + e), dtype=complex), np.asarray(S_field(p - e), dtype=complex)
        dSi = (_inv_checked(Sp) - _inv_checked(Sm)) / (2 * h)
        dS = (Sp - Sm) / (2 * h)
        Gam[k] = dSi @ S0
        worst = max(worst, float(np.abs(Gam[k] + S0i @ dS).max()))
    tilde = conjugate_gammas(cg, S0) if cg is not None else None
    return SpinFrame(S0, Gam, worst, tilde)


def displacement_gamma_field(u: DisplacementField, g: GammaTriple | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """gamma'(a) for a field read in internal (material) coordinates a."""
    g = g or GammaTriple()
    base = g.as_array()

    def field(a):
        Ga = np.real(u.gradient(np.asarray(a, dtype=float)))
        Jinv = np.linalg.inv(np.eye(3) + Ga)  # I - du/dx
        return np.einsum("ma,aij->mij", Jinv, base)

    return field


def auxiliary_identity_residual(
    gamma_field: Callable[[np.ndarray], np.ndarray],
    S_field: Callable[[np.ndarray], np.ndarray] | None,
    metric_field: MetricField,
    p,
    h: float,
) -> np.ndarray:
    """r[mu, nu] = d_nu g~^mu + g~^b Gamma'^mu_{b nu} - Gamma_nu g~^mu + g~^mu Gamma_nu."""
    p = np.asarray(p, dtype=float)
    if S_field is None:
        S_field = lambda x: np.eye(2, dtype=complex)  # noqa: E731

    def tilde(x):
        S = np.asarray(S_field(x), dtype=complex)
        return np.einsum("ij,mjk,kl->mil", _inv_checked(S), gamma_field(x), S)

    gt = tilde(p)
    dgt = np.empty((3, 3, 2, 2), dtype=complex)  # [nu, mu]
    for nu in range(3):
        e = np.zeros(3)
        e[nu] = h
        dgt[nu] = (tilde(p + e) - tilde(p - e)) / (2 * h)
    chris = christoffel(metric_field.with_step(h), p)  # [mu, b, nu]
    Gam = spin_connection(S_field, p, h).Gamma
    out = np.einsum("nmij->mnij", dgt)
    out = out + np.einsum("bij,mbn->mnij", gt, chris)
    out = out - np.einsum("nij,mjk->mnik", Gam, gt) + np.einsum("mij,njk->mnik", gt, Gam)
    return out


def gamma_perp(cg: CurvedGammaSet) -> np.ndarray:
    """Unit matrix anticommuting with gamma~^1 and gamma~^2.

    v = [gamma~^1, gamma~^2] / 2 is the Minkowski cross product of the two
    frame vectors written in the gamma basis; gamma_perp = v / sqrt(v^2).
    """
    g1, g2 = cg.gammas[0], cg.gammas[1]
    v = 0.5 * (g1 @ g2 - g2 @ g1)
    v2 = 0.5 * np.trace(v @ v)
    if abs(v2) < 1e-12:
        raise DegenerateFrame(f"|v_perp^2| = {abs(v2):.3e}: frame vectors are parallel")
    return v / np.sqrt(complex(v2))


# -- Kaluza-Klein split ----------------------------------------------------


@dataclass(frozen=True)
class KKDecomposition:
    """g~ = [[g - Phi^2 A A^T, -Phi^2 A], [-Phi^2 A^T, -Phi^2]]."""

    g2: np.ndarray
    A: np.ndarray
    Phi: float

    def compose(self) -> np.ndarray:
        g, A, P2 = np.asarray(self.g2, float), np.asarray(self.A, float), self.Phi**2
        out = np.empty((3, 3))
        out[:2, :2] = g - P2 * np.outer(A, A)
        out[:2, 2] = out[2, :2] = -P2 * A
        out[2, 2] = -P2
        return out

    @property
    def A_upper(self) -> np.ndarray:
        return np.linalg.solve(self.g2, self.A)

    def inverse_blocks(self) -> np.ndarray:
        """Inverse of ``compose()`` assembled block by block."""
        gi = np.linalg.inv(self.g2)
        Au = gi @ self.A
        out = np.empty((3, 3))
        out[:2, :2] = gi
        out[:2, 2] = out[2, :2] = -Au
        out[2, 2] = -self.Phi**-2 + self.A @ Au
        return out

    def to_json(self) -> dict:
        return {"g2": np.asarray(self.g2).tolist(), "A": np.asarray(self.A).tolist(), "Phi": float(self.Phi)}


def kk_decompose(g3) -> KKDecomposition:
    """Split a covariant 3-metric with a negative compact entry."""
    g = np.asarray(g3.g if isinstance(g3, MetricTensor3) else g3, dtype=float)
    if g[2, 2] >= 0:
        raise SignatureError(f"compact entry g~_33 = {g[2, 2]:.6g} must be negative")
    Phi = float(np.sqrt(-g[2, 2]))
    A = -g[:2, 2] / Phi**2
    g2 = g[:2, :2] + Phi**2 * np.outer(A, A)
    return KKDecomposition(0.5 * (g2 + g2.T), A, Phi)


def reduce_metric(g_tilde) -> KKDecomposition:
    """Block split of a displacement-induced metric in the reversed orientation."""
    g = np.asarray(g_tilde.g if isinstance(g_tilde, MetricTensor3) else g_tilde, dtype=float)
    return kk_decompose(-g)


def single_mode_fields(u0_grad) -> tuple[np.ndarray, np.ndarray]:
    """(g^{mu nu}, A^mu) for mu, nu in {1, 2} from zero-mode gradients du/dx.

    The 2D inverse metric is returned in the orientation of ``reduce_metric``
    (unstrained value diag(1, -1)); A^mu is the mixed block of the 3D inverse
    metric with derivatives along x^1, x^2 only.
    """
    G = np.real(np.asarray(u0_grad, dtype=complex))
    if np.abs(G[:, 2]).max() > LEAK_TOL:
        raise ModeLeakage("zero-mode gradient has a component along the compact direction")
    eta2 = ETA[:2, :2]
    Gp = G[:2, :2]  # du^mu/dx^a, mu, a in {1, 2}
    block = eta2 - Gp @ eta2 - eta2 @ Gp.T + Gp @ eta2 @ Gp.T
    g_inv = -block
    d3 = G[2, :2]  # du^3/dx^a
    A_up = -eta2 @ d3 + Gp @ eta2 @ d3
    return g_inv, A_up


def single_mode_fields_from_field(u: DisplacementField, a) -> tuple[np.ndarray, np.ndarray]:
    """:func:`single_mode_fields` at internal point ``a``; rejects q3 != 0 content."""
    if u.max_compact_wavenumber(LEAK_TOL) != 0:
        raise ModeLeakage("field has modes with nonzero compact wavenumber")
    Ga = np.real(u.gradient(np.asarray(a, dtype=float)))
    return single_mode_fields(grad_x_from_grad_a(Ga))


@dataclass(frozen=True)
class GammaDecompositionCheck:
    residual: np.ndarray
    square_residual: float  # |combo^2 - g~^{33} I|
    block_residual: float  # |g~^{33} - (Phi^-2 - A_a A^a)|
    gperp: np.ndarray


def gamma3_decomposition_check(cg: CurvedGammaSet, kk: KKDecomposition) -> GammaDecompositionCheck:
    """gamma~^3 against -sum_a gamma~^a A_a + gamma_perp / Phi.

    The minus sign on the A term follows from the block split with g~_{a3} =
    -Phi^2 A_a. The square of the combination is compared with g~^{33} I.
    """
    gp = gamma_perp(cg)
    combo = -np.einsum("a,aij->ij", np.asarray(kk.A, float), cg.gammas[:2]) + gp / kk.Phi
    residual = cg.gammas[2] - combo
    g33 = cg.metric.g[2, 2]
    sq = combo @ combo - g33 * np.eye(2)
    block = g33 - (kk.Phi**-2 - kk.A @ kk.A_upper)
    return GammaDecompositionCheck(residual, float(np.abs(sq).max()), float(abs(block)), gp)


# -- reduced field diagnostics ---------------------------------------------


@dataclass(frozen=True)
class KKFields:
    """Smooth 2D fields g_ab(x), A_a(x), Phi(x)."""

    g: Callable[[np.ndarray], np.ndarray]
    A: Callable[[np.ndarray], np.ndarray]
    Phi: Callable[[np.ndarray], float]

    def at(self, p) -> KKDecomposition:
        return KKDecomposition(np.asarray(self.g(p), float), np.asarray(self.A(p), float), float(self.Phi(p)))

    @classmethod
    def from_metric3(cls, g3: Callable[[np.ndarray], np.ndarray], x3: float = 0.0) -> "KKFields":
        """Fields from the reversed-orientation split of a displacement metric."""

        def split(p):
            return reduce_metric(g3(np.array([p[0], p[1], x3])))

        return cls(lambda p: split(p).g2, lambda p: split(p).A, lambda p: split(p).Phi)


@dataclass(frozen=True)
class ReducedFieldReport:
    F: np.ndarray
    maxwell_residual: np.ndarray
    einstein_residual: np.ndarray
    T_em: np.ndarray
    T_s: np.ndarray
    ricci3_norm: float

    def to_json(self) -> dict:
        return {
            "F": self.F.tolist(),
            "maxwell_residual": self.maxwell_residual.tolist(),
            "einstein_residual": self.einstein_residual.tolist(),
            "T_em": self.T_em.tolist(),
            "T_s": self.T_s.tolist(),
            "ricci3_norm": self.ricci3_norm,
        }


def _d(f: Callable, p: np.ndarray, h: float) -> np.ndarray:
    """Central-difference gradient; leading axis is the derivative index."""
    out = []
    for k in range(len(p)):
        e = np.zeros(len(p))
        e[k] = h
        out.append((np.asarray(f(p + e), float) - np.asarray(f(p - e), float)) / (2 * h))
    return np.array(out)


def _field_strength(A: Callable, p: np.ndarray, h: float) -> np.ndarray:
    dA = _d(A, p, h)  # dA[a, b] = d_a A_b
    return dA - dA.T  # F_ab = d_a A_b - d_b A_a


def reduced_field_diagnostics(kk: KKFields, p, h: float, metric3: Callable | None = None) -> ReducedFieldReport:
    """Field strength, reduced Maxwell and Einstein residuals, and 3D Ricci.

    ``metric3`` overrides the 3D metric whose Ricci tensor is measured; by
    default the block recomposition of ``kk`` (independent of x^3) is used.
    """
    p = np.asarray(p, dtype=float)
    if kk.Phi(p) <= 0:
        raise SignatureError("Phi must be positive")
    m2 = MetricField(2, lambda x: np.asarray(kk.g(x), float), h)
    g = m2.eval(p)
    gi = np.linalg.inv(g)
    chris = christoffel(m2, p)  # [l, a, b]
    Phi = float(kk.Phi(p))

    F = _field_strength(kk.A, p, h)
    # mixed F^l_a as a field, for its covariant divergence
    def F_mixed(x):
        return np.linalg.inv(m2.eval(x)) @ _field_strength(kk.A, x, h)

    Fm = gi @ F
    dFm = _d(F_mixed, p, h)  # [k, l, a]
    div = np.einsum("lla->a", dFm)
    div = div + np.einsum("lls,sa->a", chris, Fm) - np.einsum("sla,ls->a", chris, Fm)
    dPhi = _d(kk.Phi, p, h)
    Phi_up = gi @ dPhi
    maxwell = div + 3.0 / Phi * Phi_up @ F

    F_up = gi @ F @ gi.T
    T_em = -0.5 * Phi**2 * (Fm @ F_up.T - 0.25 * gi * np.sum(F_up * F))
    hess = _d(lambda x: _d(kk.Phi, x, h), p, h)
    cov_hess = 0.5 * (hess + hess.T) - np.einsum("sab,s->ab", chris, dPhi)
    Phi_ab = gi @ cov_hess @ gi
    box = float(np.sum(gi * cov_hess))
    T_s = (Phi_ab - gi * box) / Phi

    G_low = riemann(m2, p).einstein
    G_up = gi @ G_low @ gi
    einstein = G_up - 8 * np.pi * (T_em + T_s)

    if metric3 is None:
        def metric3(x):
            return kk.at(x[:2]).compose()
    m3 = MetricField(3, lambda x: np.asarray(metric3(x), float), h)
    ricci = riemann(m3, np.array([p[0], p[1], 0.0])).ricci
    return ReducedFieldReport(F, maxwell, einstein, T_em, T_s, float(np.linalg.norm(ricci)))


# -- mode-coupled reduced Dirac system -------------------------------------


@dataclass(frozen=True)
class ModeData:
    """Fourier data at one 2D point, indexed by k in -Q..Q.

    gamma2[k]: (2, 2, 2) for mu = 1, 2; A[k]: (2,); Gamma[k]: (3, 2, 2);
    phi_inv[k]: scalar; psi[k]: (2,); dpsi[k]: (2, 2) with d_mu psi in row mu.
    Missing indices are zero.
    """

    Q: int
    gamma2: Mapping[int, np.ndarray]
    A: Mapping[int, np.ndarray]
    Gamma: Mapping[int, np.ndarray]
    phi_inv: Mapping[int, complex]
    psi: Mapping[int, np.ndarray]
    dpsi: Mapping[int, np.ndarray]

    def __post_init__(self):
        if self.Q < 0:
            raise ValueError("truncation must be nonnegative")
        for name in ("gamma2", "A", "Gamma", "phi_inv", "psi", "dpsi"):
            bad = [k for k in getattr(self, name) if abs(k) > self.Q]
            if bad:
                raise TruncationError(f"{name} has modes {bad} beyond truncation {self.Q}")

    def get(self, name: str, k: int, shape):
        table = getattr(self, name)
        if k in table:
            return np.asarray(table[k], dtype=complex)
        return np.zeros(shape, dtype=complex)


def assemble_reduced_dirac(data: ModeData, m: int) -> np.ndarray:
    """Residual of the m-th coupled equation, delta constraints applied exactly."""
    Q = data.Q
    if abs(m) > 4 * Q:
        raise TruncationError(f"mode {m} is not reachable with truncation {Q}")
    ks = range(-Q, Q + 1)
    out = np.zeros(2, dtype=complex)
    for k in ks:
        A_k = data.get("A", k, (2,))
        G_k = data.get("Gamma", k, (3, 2, 2))
        for k1 in ks:
            g_k1 = data.get("gamma2", k1, (2, 2, 2))
            phi_k1 = complex(data.phi_inv.get(k1, 0))
            for k2 in ks:
                q = m - k - k1 - k2
                if abs(q) > Q:
                    continue
                psi = data.get("psi", q, (2,))
                dpsi = data.get("dpsi", q, (2, 2))
                G_k2 = data.get("Gamma", k2, (3, 2, 2))
                d0 = 1.0 if k == 0 else 0.0
                d2 = 1.0 if k2 == 0 else 0.0
                for mu in range(2):
                    term = d0 * d2 * dpsi[mu]
                    term = term + A_k[mu] * (1j * q * d2 * psi - G_k2[2] @ psi)
                    term = term - d2 * (G_k[mu] @ psi)
                    out += g_k1[mu] @ term
                out += d2 * phi_k1 * (1j * q * d0 * psi - G_k[2] @ psi)
    return out


def single_mode_dirac(data: ModeData) -> np.ndarray:
    """Zero-mode equation written directly from the k = 0 data."""
    g = data.get("gamma2", 0, (2, 2, 2))
    A = data.get("A", 0, (2,))
    G = data.get("Gamma", 0, (3, 2, 2))
    psi, dpsi = data.get("psi", 0, (2,)), data.get("dpsi", 0, (2, 2))
    phi = complex(data.phi_inv.get(0, 0))
    out = -phi * (G[2] @ psi)
    for mu in range(2):
        out = out + g[mu] @ (dpsi[mu] - A[mu] * (G[2] @ psi) - G[mu] @ psi)
    return out


def transform_mode_basis(modes: Mapping[int, Sequence[complex]]) -> dict[int, np.ndarray]:
    """Fixed-frame Fourier amplitudes -> internal-frame amplitudes, to second order.

    u'_m = sum_k u_{m-k} (delta_k0 + i (m - k) u_k^3): the wavevector points
    along the compact axis, so only the third amplitude component couples.
    """
    u = {int(k): np.asarray(v, dtype=complex).reshape(3) for k, v in modes.items()}
    out: dict[int, np.ndarray] = {}
    for a, ua in u.items():
        out[a] = out.get(a, np.zeros(3, complex)) + ua
        for k, uk in u.items():
            m = a + k
            out[m] = out.get(m, np.zeros(3, complex)) + ua * (1j * a * uk[2])
    return dict(sorted(out.items()))
