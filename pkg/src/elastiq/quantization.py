"""Per-wavevector quadratic boson Hamiltonian and its canonical diagonalization.

Ladder vector ordering: ``Q = (a_q(3), a_-q(3), a_q^dag(3), a_-q^dag(3))`` and
the Hamiltonian is ``Q^T A Q`` with ``A = [[T, S], [S, T]]``. Field vector
ordering: ``X = (P_q(3), u_q(3), P_-q(3), u_-q(3))``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateMaterial, StructureViolation, UnstableRegime
from .fields import LameParameters

N_LADDER = 12
HALF = 6
ETA_B = np.diag([1.0] * HALF + [-1.0] * HALF)
PI_SWAP = np.block([[np.zeros((HALF, HALF)), np.eye(HALF)], [np.eye(HALF), np.zeros((HALF, HALF))]])
J_CANON = ETA_B @ PI_SWAP  # [[0, I], [-I, 0]]
for _m in (ETA_B, PI_SWAP, J_CANON):
    _m.setflags(write=False)

STRUCTURE_TOL = 1e-10


@dataclass(frozen=True)
class ModeHamiltonian:
    q2: float
    q3: int
    lam: LameParameters
    T: np.ndarray
    S: np.ndarray

    @property
    def A(self) -> np.ndarray:
        return np.block([[self.T, self.S], [self.S, self.T]])

    @property
    def dynamical_matrix(self) -> np.ndarray:
        """eta A, whose eigenvalues are +-omega in the stable regime."""
        return ETA_B @ self.A


@dataclass(frozen=True)
class SpectrumRow:
    q2: float
    q3: int
    E_minus: float
    E_zero: float
    E_plus: float
    stable: bool = True


@dataclass(frozen=True)
class BogoliubovResult:
    """Normal modes of one ModeHamiltonian.

    ``transform`` W is the real ladder-to-ladder map Q = W B; it satisfies
    W J W^T = J. ``field_map`` is C W, sending normal ladders to fields.
    ``signs`` holds the sign of each normal mode's energy in H.
    """

    energies: np.ndarray
    transform: np.ndarray
    field_map: np.ndarray
    symplectic_residual: float
    signs: np.ndarray

    @property
    def signed_energies(self) -> np.ndarray:
        return self.energies * self.signs


def _check_material(lam: LameParameters) -> None:
    if lam.mu <= 0 or lam.lam + 2 * lam.mu <= 0:
        raise DegenerateMaterial(f"need mu > 0 and lambda + 2 mu > 0, got {lam}")


def assemble_mode_hamiltonian(lam: LameParameters, q2: float, q3: int) -> ModeHamiltonian:
    """Fill T and S from the closed-form nonzero entries."""
    _check_material(lam)
    l, m = lam.lam, lam.mu
    L = l + 2 * m
    q2, q3i = float(q2), int(q3)
    if q3i != q3:
        raise ValueError("q3 must be an integer")
    q3 = float(q3i)

    p11 = 3 / (16 * L)
    d2 = (8 * (2 * q2**2 + q3**2) * m**3 + 2 * m + l * (4 * (4 * q2**2 + q3**2) * m**2 + 1)) / (16 * m * L)
    d3 = (8 * (q2**2 + 2 * q3**2) * m**3 + 2 * m + l * (4 * (q2**2 + 4 * q3**2) * m**2 + 1)) / (16 * m * L)
    c23 = m * (3 * l + 2 * m) * q2 * q3 / (4 * L)
    t2, t3 = m * q2 / (4 * L), m * q3 / (4 * L)
    o2 = (2 * m * (4 * m**2 * (2 * q2**2 + q3**2) - 1) + l * (4 * m**2 * (4 * q2**2 + q3**2) - 1)) / (16 * m * L)
    o3 = (2 * m * (4 * m**2 * (q2**2 + 2 * q3**2) - 1) + l * (4 * m**2 * (q2**2 + 4 * q3**2) - 1)) / (16 * m * L)
    k2, k3 = (2 * l + 2 * m) * q2 / (8 * L), (2 * l + 2 * m) * q3 / (8 * L)

    T = np.zeros((HALF, HALF))
    t_entries = {
        (1, 1): p11, (1, 5): t2, (1, 6): t3,
        (2, 2): d2, (2, 3): c23, (2, 4): -t2,
        (3, 2): c23, (3, 3): d3, (3, 4): -t3,
        (4, 2): -t2, (4, 3): -t3, (4, 4): p11,
        (5, 1): t2, (5, 5): d2, (5, 6): c23,
        (6, 1): t3, (6, 5): c23, (6, 6): d3,
    }  # fmt: skip
    for (i, j), v in t_entries.items():
        T[i - 1, j - 1] = v

    # S columns are labelled 7..12 (the creation-operator half)
    S = np.zeros((HALF, HALF))
    s_entries = {
        (1, 8): -k2, (1, 9): -k3, (1, 10): -p11,
        (2, 7): -k2, (2, 11): o2, (2, 12): c23,
        (3, 7): -k3, (3, 11): c23, (3, 12): o3,
        (4, 7): -p11, (4, 11): k2, (4, 12): k3,
        (5, 8): o2, (5, 9): c23, (5, 10): k2,
        (6, 8): c23, (6, 9): o3, (6, 10): k3,
    }  # fmt: skip
    for (i, j), v in s_entries.items():
        S[i - 1, j - 7] = v
    return ModeHamiltonian(q2, q3i, lam, T, S)


def radical_product_form(lam: LameParameters) -> float:
    """4 mu (lambda + mu) / sqrt(mu (lambda + mu) (lambda + 2 mu)^2)."""
    l, m = lam.lam, lam.mu
    return 4 * m * (l + m) / math.sqrt(m * (l + m) * (l + 2 * m) ** 2)


def radical_root_form(lam: LameParameters) -> float:
    """2 sqrt2 sqrt(mu (lambda + 2 mu)^2 (2 lambda + 2 mu)) / (lambda + 2 mu)^2."""
    l, m = lam.lam, lam.mu
    return 2 * math.sqrt(2) * math.sqrt(m * (l + 2 * m) ** 2 * (2 * l + 2 * m)) / (l + 2 * m) ** 2


def stability_threshold(mu: float) -> float:
    """lambda at which the minus branch reaches zero frequency."""
    return (6 + 4 * math.sqrt(3)) * mu


def minus_radicand(lam: LameParameters) -> float:
    """1 - r in factored form, so the threshold gives exactly zero."""
    l, m = lam.lam, lam.mu
    root_hi = stability_threshold(m)
    root_lo = (6 - 4 * math.sqrt(3)) * m
    L = l + 2 * m
    return (l - root_hi) * (l - root_lo) / (L * (L + 4 * math.sqrt(m * (l + m))))


def closed_form_energies(lam: LameParameters, q2: float, q3: int) -> SpectrumRow:
    """E_zero = |q|/4 and E_-+ = sqrt(1 -+ r) |q| / 4."""
    _check_material(lam)
    r_prod, r_root = radical_product_form(lam), radical_root_form(lam)
    if abs(r_prod - r_root) > 1e-12 * max(1.0, abs(r_prod)):
        raise AssertionError(f"radical forms disagree: {r_prod} vs {r_root}")
    rad = minus_radicand(lam)
    if rad < 0:
        raise UnstableRegime(f"minus-branch radicand {rad:.6g} < 0: complex frequency", [rad])
    k = math.hypot(q2, q3)
    return SpectrumRow(
        q2=float(q2),
        q3=int(q3),
        E_minus=0.25 * math.sqrt(rad) * k,
        E_zero=0.25 * k,
        E_plus=0.25 * math.sqrt(1 + r_prod) * k,
    )


def field_matrix() -> np.ndarray:
    """C with X = C Q for P_q = i(a_q^dag - a_-q)/sqrt2, u_q = (a_q + a_-q^dag)/sqrt2."""
    C = np.zeros((N_LADDER, N_LADDER), dtype=complex)
    s = 1 / math.sqrt(2)
    for n in range(3):
        aq, am, adq, adm = n, 3 + n, 6 + n, 9 + n
        C[n, adq], C[n, am] = 1j * s, -1j * s
        C[3 + n, aq], C[3 + n, adm] = s, s
        C[6 + n, adm], C[6 + n, aq] = 1j * s, -1j * s
        C[9 + n, am], C[9 + n, adq] = s, s
    return C


def fourier_hamiltonian_form(lam: LameParameters, q2: float, q3: int) -> np.ndarray:
    """Symmetric G with H_q = X^T G X, read term by term off the mode Hamiltonian."""
    l, m = lam.lam, lam.mu
    L = l + 2 * m
    q2, q3 = float(q2), float(q3)
    names = ["P1q", "P2q", "P3q", "u1q", "u2q", "u3q", "P1m", "P2m", "P3m", "u1m", "u2m", "u3m"]
    at = {n: i for i, n in enumerate(names)}
    G = np.zeros((N_LADDER, N_LADDER), dtype=complex)

    def add(c, a, b):
        G[at[a], at[b]] += c / 2
        G[at[b], at[a]] += c / 2

    i = 1j
    add(-(q2**2) * l**2 / L, "u2m", "u2q")
    add(-q2 * q3 * l**2 / L, "u2q", "u3m")
    add(-q2 * q3 * l**2 / L, "u2m", "u3q")
    add(-(q3**2) * l**2 / L, "u3m", "u3q")
    add(i * q2 * l / (2 * L), "P1q", "u2m")
    add(-i * q2 * l / (2 * L), "P1m", "u2q")
    add(q2**2 * l, "u2m", "u2q")
    add(i * q3 * l / (2 * L), "P1q", "u3m")
    add(q2 * q3 * l, "u2q", "u3m")
    add(-i * q3 * l / (2 * L), "P1m", "u3q")
    add(q2 * q3 * l, "u2m", "u3q")
    add(q3**2 * l, "u3m", "u3q")
    add(3 / (4 * L), "P1m", "P1q")
    add(1 / (4 * m), "P2m", "P2q")
    add(1 / (4 * m), "P3m", "P3q")
    add(i * q2 / 2, "P2q", "u1m")
    add(i * q3 / 2, "P3q", "u1m")
    add(-i * q2 / 2, "P2m", "u1q")
    add(-i * q3 / 2, "P3m", "u1q")
    add(2 * m * q2**2 + m * q3**2, "u2m", "u2q")
    add(m * q2 * q3, "u2q", "u3m")
    add(m * q2 * q3, "u2m", "u3q")
    add(m * q2**2 + 2 * m * q3**2, "u3m", "u3q")
    return G


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    order = np.argsort(-values)
    groups: list[list[int]] = []
    for k in order:
        if groups and abs(values[groups[-1][-1]] - values[k]) <= tol:
            groups[-1].append(int(k))
        else:
            groups.append([int(k)])
    return groups


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v if v[k] >= 0 else -v


def bogoliubov_diagonalize(h: ModeHamiltonian) -> BogoliubovResult:
    """Symplectic normal-mode decomposition of ``Q^T A Q``.

    Eigenvectors of eta A are grouped by |omega|; inside each group the
    eta-Gram matrix separates positive-norm (annihilator) directions from
    negative-norm ones, whose swapped partners become annihilators of the
    mirrored eigenvalue.
    """
    A = h.A
    if h.q2 == 0 and h.q3 == 0:
        eye = np.eye(N_LADDER)
        return BogoliubovResult(np.zeros(HALF), eye, field_matrix(), 0.0, np.ones(HALF))

    D = ETA_B @ A
    w = np.linalg.eigvals(D)
    scale = float(np.abs(w).max())
    if np.abs(w.imag).max() > 1e-8 * scale:
        raise UnstableRegime("dynamical matrix has complex eigenvalues", np.sort_complex(w))
    pos = np.sort(w.real[w.real > 0])[::-1]
    if len(pos) != HALF or pos[-1] < 1e-9 * scale:
        raise UnstableRegime("zero-frequency mode: spectrum is at the stability threshold", np.sort_complex(w))

    cols: list[np.ndarray] = []
    eps: list[float] = []
    for group in _cluster(pos, 1e-8 * scale):
        omega = float(np.mean(pos[group]))
        mult = len(group)
        _, _, vt = np.linalg.svd(D - omega * np.eye(N_LADDER))
        N = vt[-mult:].T
        gram = N.T @ ETA_B @ N
        nval, nvec = np.linalg.eigh(0.5 * (gram + gram.T))
        found = []
        for val, vec in sorted(zip(nval, nvec.T), key=lambda t: -abs(t[0])):
            v = N @ vec / math.sqrt(abs(val))
            if val > 0:
                found.append((v, +1))
            else:
                found.append((PI_SWAP @ v, -1))
        for v, sign in found:
            v = _fix_phase(v)
            cols.append(v)
            eps.append(float(v @ A @ v))

    # descending frequency, then positive sign first
    order = sorted(range(HALF), key=lambda k: (-abs(eps[k]), -np.sign(eps[k])))
    U = np.array([cols[k] for k in order]).T
    W = np.hstack([U, PI_SWAP @ U])
    signed = np.array([eps[k] for k in order])
    residual = float(np.abs(W @ J_CANON @ W.T - J_CANON).max())
    return BogoliubovResult(
        energies=np.abs(signed),
        transform=W,
        field_map=field_matrix() @ W,
        symplectic_residual=residual,
        signs=np.sign(signed),
    )


@dataclass(frozen=True)
class CanonicalReport:
    symplectic_residual: float
    diagonal_leakage: float
    field_reconstruction: float

    @property
    def passed(self) -> bool:
        return max(self.symplectic_residual, self.diagonal_leakage, self.field_reconstruction) < STRUCTURE_TOL


def verify_canonical_structure(r: BogoliubovResult, h: ModeHamiltonian) -> CanonicalReport:
    """Certify (a) W J W^T = J, (b) W^T A W diagonal, (c) C W rebuilds H_q."""
    if h.q2 == 0 and h.q3 == 0:
        raise StructureViolation("q = 0 Hamiltonian has no normal-mode form to certify", float("nan"))
    W = r.transform
    sym = float(np.abs(W @ J_CANON @ W.T - J_CANON).max())
    if sym >= STRUCTURE_TOL:
        raise StructureViolation(f"symplectic residual {sym:.3e}", sym)

    Dg = W.T @ h.A @ W
    diag = np.diag(Dg)
    off = Dg - np.diag(diag)
    leak = float(np.abs(off).max() / max(np.abs(diag).max(), 1e-300))
    if leak >= STRUCTURE_TOL:
        raise StructureViolation(f"off-diagonal leakage {leak:.3e}", leak)

    G = fourier_hamiltonian_form(h.lam, h.q2, h.q3)
    M = r.field_map
    lhs = M.T @ G @ M
    target = PI_SWAP @ np.diag(np.concatenate([r.signed_energies] * 2))
    diff = 0.5 * (lhs + lhs.T) - 0.5 * (target + target.T)
    rec = float(np.abs(diff).max() / max(np.abs(r.energies).max(), 1e-300))
    if rec >= STRUCTURE_TOL:
        raise StructureViolation(f"field reconstruction mismatch {rec:.3e}", rec)
    return CanonicalReport(sym, leak, rec)


def _row(lam: LameParameters, q2: float, q3: int) -> SpectrumRow:
    try:
        return closed_form_energies(lam, q2, q3)
    except UnstableRegime:
        nan = float("nan")
        return SpectrumRow(float(q2), int(q3), nan, 0.25 * math.hypot(q2, q3), nan, stable=False)


def dispersion_sweep(
    lam: LameParameters,
    q2_grid: Sequence[float],
    q3_list: Sequence[int],
    workers: int | None = None,
) -> list[SpectrumRow]:
    """Closed-form rows in grid order (q2 outer, q3 inner); unstable rows are flagged."""
    _check_material(lam)
    pairs = [(float(a), int(b)) for a in q2_grid for b in q3_list]
    if workers is None or workers <= 1:
        return [_row(lam, a, b) for a, b in pairs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda ab: _row(lam, *ab), pairs))
