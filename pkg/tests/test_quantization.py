import math

import numpy as np
import pytest

from elastiq.errors import DegenerateMaterial, StructureViolation, UnstableRegime
from elastiq.fields import LameParameters
from elastiq.quantization import (
    J_CANON,
    BogoliubovResult,
    assemble_mode_hamiltonian,
    bogoliubov_diagonalize,
    closed_form_energies,
    dispersion_sweep,
    field_matrix,
    radical_root_form,
    radical_product_form,
    stability_threshold,
    verify_canonical_structure,
)

STEEL = LameParameters(1.3, 0.1)


def stable_material(rng):
    mu = rng.uniform(0.05, 2.0)
    return LameParameters(mu * rng.uniform(13.5, 40.0), mu)


def test_mode_matrix_entries():
    H = assemble_mode_hamiltonian(STEEL, 1.0, 2)
    assert H.T[0, 0] == pytest.approx(0.125, abs=1e-15)
    assert H.S[0, 3] == pytest.approx(-0.125, abs=1e-15)
    assert H.T[1, 2] == pytest.approx(0.1366667, abs=5e-8)
    np.testing.assert_array_equal(H.T, H.T.T)
    np.testing.assert_array_equal(H.S, H.S.T)


def test_closed_form_reference_row():
    row = closed_form_energies(STEEL, 1.0, 0)
    assert row.E_zero == 0.25
    # 30-digit mpmath evaluation of sqrt(1 -+ r) / 4
    assert row.E_minus == pytest.approx(0.011791673069062065, abs=1e-15)
    assert row.E_plus == pytest.approx(0.35335669860104868, abs=1e-15)
    assert row.E_zero / row.E_minus > 20


def test_numeric_energies_at_q_3_4():
    r = bogoliubov_diagonalize(assemble_mode_hamiltonian(STEEL, 3.0, 4))
    expected = [1.7667834930052434] * 2 + [1.25] * 2 + [0.058958365345310324] * 2
    np.testing.assert_allclose(r.energies, expected, atol=1e-12)


def test_dynamical_matrix_eigenvalues_are_plus_minus_energies(rng):
    # oracle: plain eigenvalues of eta A
    for _ in range(20):
        lam = stable_material(rng)
        q2, q3 = rng.uniform(-3, 3), int(rng.integers(-3, 4))
        H = assemble_mode_hamiltonian(lam, q2, q3)
        ev = np.linalg.eigvals(H.dynamical_matrix)
        assert np.abs(ev.imag).max() < 1e-9
        row = closed_form_energies(lam, q2, q3)
        ref = sorted([row.E_minus, row.E_zero, row.E_plus] * 2 + [-row.E_minus, -row.E_zero, -row.E_plus] * 2)
        np.testing.assert_allclose(np.sort(ev.real), ref, atol=1e-9)


def test_threshold_and_instability():
    for mu in (0.1, 1.0, 3.0):
        row = closed_form_energies(LameParameters(stability_threshold(mu), mu), 1.0, 0)
        assert row.E_minus < 1e-10
    with pytest.raises(UnstableRegime):
        closed_form_energies(LameParameters(2.0, 1.0), 1.0, 0)
    with pytest.raises(UnstableRegime):
        bogoliubov_diagonalize(assemble_mode_hamiltonian(LameParameters(2.0, 1.0), 1.0, 0))


def test_zero_wavevector():
    row = closed_form_energies(STEEL, 0.0, 0)
    assert (row.E_minus, row.E_zero, row.E_plus) == (0, 0, 0)
    r = bogoliubov_diagonalize(assemble_mode_hamiltonian(STEEL, 0.0, 0))
    assert np.array_equal(r.energies, np.zeros(6))
    assert np.array_equal(r.transform, np.eye(12))


def test_radical_forms_agree(rng):
    for _ in range(1000):
        lam = LameParameters(rng.uniform(1e-3, 10), rng.uniform(1e-3, 10))
        assert abs(radical_product_form(lam) - radical_root_form(lam)) < 1e-12


def test_certificate_passes_for_stable_modes(rng):
    for _ in range(30):
        lam = stable_material(rng)
        H = assemble_mode_hamiltonian(lam, rng.uniform(-3, 3), int(rng.integers(-3, 4)))
        r = bogoliubov_diagonalize(H)
        rep = verify_canonical_structure(r, H)
        assert rep.passed
        W = r.transform
        assert np.abs(W @ J_CANON @ W.T - J_CANON).max() < 1e-10


def test_perturbed_transform_is_rejected():
    H = assemble_mode_hamiltonian(STEEL, 1.0, 1)
    r = bogoliubov_diagonalize(H)
    W = r.transform.copy()
    W[0, 0] += 1e-3
    bad = BogoliubovResult(r.energies, W, field_matrix() @ W, r.symplectic_residual, r.signs)
    with pytest.raises(StructureViolation):
        verify_canonical_structure(bad, H)


def test_identity_transform_is_rejected():
    H = assemble_mode_hamiltonian(STEEL, 1.0, 1)
    r = bogoliubov_diagonalize(H)
    bad = BogoliubovResult(r.energies, np.eye(12), field_matrix(), 0.0, r.signs)
    with pytest.raises(StructureViolation):
        verify_canonical_structure(bad, H)


def test_minus_branch_enters_with_negative_sign():
    r = bogoliubov_diagonalize(assemble_mode_hamiltonian(STEEL, 1.0, 0))
    np.testing.assert_array_equal(r.signs, [1, 1, 1, 1, -1, -1])


def test_sweep_order_and_homogeneity():
    rows = dispersion_sweep(STEEL, [1, 2], [0, 1])
    assert [(r.q2, r.q3) for r in rows] == [(1, 0), (1, 1), (2, 0), (2, 1)]
    for a, b in ((0, 2),):
        for attr in ("E_minus", "E_zero", "E_plus"):
            assert getattr(rows[b], attr) == pytest.approx(2 * getattr(rows[a], attr), rel=1e-14)
    assert all(r.E_minus < r.E_zero < r.E_plus for r in rows)
    assert rows[0] == closed_form_energies(STEEL, 1, 0)


def test_sweep_threads_match_serial():
    assert dispersion_sweep(STEEL, np.linspace(-2, 2, 9), [0, 1, 2], workers=4) == dispersion_sweep(STEEL, np.linspace(-2, 2, 9), [0, 1, 2])


def test_sweep_flags_unstable_rows():
    rows = dispersion_sweep(LameParameters(2.0, 1.0), [1.0], [0, 1])
    assert not any(r.stable for r in rows)
    assert all(math.isnan(r.E_minus) for r in rows)

