"""Seeded invariant suites run by ``elastiq verify``.

Each suite returns a list of :class:`PropertyResult`; a suite passes when
every property's worst residual is within its tolerance.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .elastodynamics import (
    CanonicalState,
    canonical_momenta,
    dilatation_wave_identity,
    hamiltonian_density,
    legendre_hamiltonian,
)
from .fields import DisplacementField, FourierMode, LameParameters
from .geometry import MetricField, compatibility_check, displacement_metric_field, riemann
from .kinematics import (
    inverse_metric_from_displacement,
    metric_from_displacement,
    strain_lagrangian,
)
from .quantization import (
    assemble_mode_hamiltonian,
    bogoliubov_diagonalize,
    closed_form_energies,
    radical_root_form,
    radical_product_form,
    verify_canonical_structure,
)
from .reduction import (
    KKFields,
    auxiliary_identity_residual,
    curved_gammas,
    displacement_gamma_field,
    gamma_perp,
    kk_decompose,
    reduce_metric,
    reduced_field_diagnostics,
    single_mode_fields,
)
from .spinor import (
    ExponentialSum,
    GammaTriple,
    dirac_factorization_check,
    dirac_residual_3d,
    fermion_statistics,
    reduced_dirac_residual_2d,
    semiderivative,
)

SUITES = ("kinematics", "geometry", "elastodynamics", "quantization", "spinor", "reduction")


@dataclass
class PropertyResult:
    name: str
    samples: int
    worst: float
    tolerance: float
    passed: bool = field(init=False)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.worst <= self.tolerance)

    def to_json(self) -> dict:
        out = asdict(self)
        out.update(out.pop("extra"))
        return out


def _order(coarse: float, fine: float) -> float:
    if fine <= 0:
        return math.inf
    return math.log2(coarse / fine)


def random_field(rng: np.random.Generator, n_modes: int = 2, amp: float = 0.05, compact: bool = True) -> DisplacementField:
    """Real field with a few modes of small amplitude."""
    modes = []
    for _ in range(n_modes):
        q = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1), float(rng.integers(-1, 2)) if compact else 0.0])
        a = amp * (rng.standard_normal(3) + 1j * rng.standard_normal(3))
        modes.append(FourierMode(q, a))
    u = DisplacementField.from_modes(modes + [m.conjugate() for m in modes], real=True)
    return u


def _random_material(rng: np.random.Generator) -> LameParameters:
    mu = rng.uniform(0.05, 2.0)
    return LameParameters(mu * rng.uniform(13.5, 40.0), mu)


# -- suites ---------------------------------------------------------------


def suite_kinematics(rng: np.random.Generator, h: float, lam: LameParameters) -> list[PropertyResult]:
    n = 500
    two_route = inv = 0.0
    for _ in range(n):
        G = 0.2 * rng.standard_normal((3, 3))
        g = metric_from_displacement(G, check=False).g
        two_route = max(two_route, float(np.abs(g - (np.diag([-1.0, 1, 1]) + 2 * strain_lagrangian(G).eps)).max()))
        Gx = np.linalg.solve((np.eye(3) + G).T, G.T).T
        inv = max(inv, float(np.abs(inverse_metric_from_displacement(Gx).g @ g - np.eye(3)).max()))
    return [
        PropertyResult("metric_equals_eta_plus_twice_strain", n, two_route, 1e-12),
        PropertyResult("eulerian_inverse_metric", n, inv, 1e-10),
    ]


def _sphere_metric(p):
    return np.diag([1.0, math.sin(p[0]) ** 2])


def suite_geometry(rng: np.random.Generator, h: float, lam: LameParameters) -> list[PropertyResult]:
    n = 5
    worst_order, worst_coarse = math.inf, 0.0
    for _ in range(n):
        u = random_field(rng)
        p = [rng.uniform(-1, 1, 3)]
        c, f = compatibility_check(u, p, h), compatibility_check(u, p, h / 2)
        worst_order = min(worst_order, _order(c, f))
        worst_coarse = max(worst_coarse, c)
    m = MetricField(2, _sphere_metric, 1e-3)
    einstein = max(float(np.abs(riemann(m, np.array([t, 0.3])).einstein).max()) for t in (0.5, 1.0, 1.3))
    return [
        PropertyResult("riemann_vanishes_for_displacement_metrics", n, worst_coarse, 1e-4),
        PropertyResult("riemann_convergence_order", n, max(0.0, 1.8 - worst_order), 0.0, extra={"order": worst_order}),
        PropertyResult("einstein_2d_vanishes", 3, einstein, 1e-8),
    ]


def suite_elastodynamics(rng: np.random.Generator, h: float, lam: LameParameters) -> list[PropertyResult]:
    n = 200
    leg = 0.0
    for _ in range(n):
        u = rng.standard_normal((3, 3))
        P = canonical_momenta(u, lam)
        a = legendre_hamiltonian(u, lam)
        b = hamiltonian_density(CanonicalState(u, P), lam)
        leg = max(leg, abs(a - b) / max(1.0, abs(a)))
    wave = 0.0
    for _ in range(20):
        u = random_field(rng)
        lhs, rhs = dilatation_wave_identity(u, lam, rng.uniform(-1, 1, 3))
        wave = max(wave, abs(lhs - rhs))
    return [
        PropertyResult("legendre_transform_matches_closed_form", n, leg, 1e-12),
        PropertyResult("dilatation_wave_equation", 20, wave, 1e-12),
    ]


def suite_quantization(rng: np.random.Generator, h: float, lam: LameParameters) -> list[PropertyResult]:
    n = 200
    dE = cert = 0.0
    for _ in range(n):
        mat = _random_material(rng)
        q2, q3 = rng.uniform(-3, 3), int(rng.integers(-3, 4))
        H = assemble_mode_hamiltonian(mat, q2, q3)
        r = bogoliubov_diagonalize(H)
        row = closed_form_energies(mat, q2, q3)
        ref = np.array([row.E_plus, row.E_zero, row.E_minus])
        dE = max(dE, float(np.abs(r.energies - np.repeat(ref, 2)).max()))
        rep = verify_canonical_structure(r, H)
        cert = max(cert, rep.symplectic_residual, rep.diagonal_leakage)
    dual = 0.0
    for _ in range(1000):
        mat = LameParameters(rng.uniform(1e-3, 10), rng.uniform(1e-3, 10))
        dual = max(dual, abs(radical_product_form(mat) - radical_root_form(mat)))
    row = closed_form_energies(LameParameters(13 * lam.mu, lam.mu), 1.0, 0)
    r0, rp = row.E_zero / row.E_minus, row.E_plus / row.E_minus
    return [
        PropertyResult("spectrum_matches_closed_form", n, dE, 1e-9),
        PropertyResult("symplectic_certificate", n, cert, 1e-10),
        PropertyResult("radical_forms_agree", 1000, dual, 1e-12),
        PropertyResult(
            "energy_hierarchy_at_lambda_13mu",
            1,
            max(0.0, 20 - min(r0, rp)),
            0.0,
            extra={"ratio_zero_to_minus": r0, "ratio_plus_to_minus": rp},
        ),
    ]


def _on_shell(rng: np.random.Generator) -> np.ndarray:
    q2, q3 = rng.uniform(-5, 5, 2)
    return np.array([math.hypot(q2, q3), q2, q3])


def suite_spinor(rng: np.random.Generator, h: float, lam: LameParameters) -> list[PropertyResult]:
    g = GammaTriple()
    n = 100
    dirac = fact = red = 0.0
    moms = [np.array([5.0, 3.0, 4.0])] + [_on_shell(rng) for _ in range(n - 1)]
    for q in moms:
        dirac = max(dirac, float(np.abs(dirac_residual_3d(g, q)).max()))
        fact = max(fact, float(np.abs(dirac_factorization_check(g, rng.standard_normal(3))).max()))
        q2, q3 = rng.uniform(-5, 5), int(rng.integers(-5, 6))
        red = max(red, float(np.abs(reduced_dirac_residual_2d(q2, q3, g)).max()))
    semi = 0.0
    for _ in range(n):
        f = ExponentialSum(tuple((complex(*rng.standard_normal(2)), complex(*rng.uniform(-2, 2, 2))) for _ in range(3)))
        lhs, rhs = semiderivative(semiderivative(f)).coefficients(), f.derivative().coefficients()
        for k in set(lhs) | set(rhs):
            semi = max(semi, abs(lhs.get(k, 0) - rhs.get(k, 0)))
    grass = max(fermion_statistics(2, 3).values())
    return [
        PropertyResult("dirac_on_shell_residual", n, dirac, 1e-12),
        PropertyResult("dirac_factorization", n, fact, 1e-12),
        PropertyResult("reduced_dirac_residual", n, red, 1e-12),
        PropertyResult("semiderivative_composes_to_derivative", n, semi, 1e-12),
        PropertyResult("grassmann_anticommutators_vanish", 1, grass, 0.0),
    ]


def suite_reduction(rng: np.random.Generator, h: float, lam: LameParameters) -> list[PropertyResult]:
    g = GammaTriple()
    n = 500
    anti = perp = rt = inv = single = 0.0
    for _ in range(n):
        G = 0.2 * rng.standard_normal((3, 3))
        cg = curved_gammas(g, G)
        anti = max(anti, cg.metric_residual())
        gp = gamma_perp(cg)
        perp = max(perp, float(np.abs(gp @ gp - np.eye(2)).max()))
        for x in cg.gammas[:2]:
            perp = max(perp, float(np.abs(gp @ x + x @ gp).max()))
        low = np.linalg.inv(cg.metric.g)
        kk = reduce_metric(low)
        back = kk_decompose(kk.compose())
        rt = max(rt, float(np.abs(kk.compose() + low).max()))
        rt = max(rt, float(np.abs(back.g2 - kk.g2).max()), float(np.abs(back.A - kk.A).max()), abs(back.Phi - kk.Phi))
        inv = max(inv, float(np.abs(kk.inverse_blocks() - np.linalg.inv(kk.compose())).max()))
        G0 = G.copy()
        G0[:, 2] = 0
        gi, Au = single_mode_fields(G0)
        kk0 = reduce_metric(np.linalg.inv(inverse_metric_from_displacement(G0).g))
        single = max(single, float(np.abs(np.linalg.inv(kk0.g2) - gi).max()), float(np.abs(kk0.A_upper - Au).max()))
    aux_order, ricci_order = math.inf, math.inf
    aux_c = 0.0
    for _ in range(3):
        u = random_field(rng)
        p = rng.uniform(-1, 1, 3)
        m = displacement_metric_field(u)
        gf = displacement_gamma_field(u, g)
        a1, a2 = (float(np.abs(auxiliary_identity_residual(gf, None, m, p, s)).max()) for s in (h, h / 2))
        aux_c = max(aux_c, a1)
        aux_order = min(aux_order, _order(a1, a2))
        u0 = random_field(rng, compact=False)
        kkf = KKFields.from_metric3(displacement_metric_field(u0).eval)
        r1, r2 = (reduced_field_diagnostics(kkf, p[:2], s).ricci3_norm for s in (h, h / 2))
        ricci_order = min(ricci_order, _order(r1, r2))
    return [
        PropertyResult("curved_anticommutators_match_inverse_metric", n, anti, 1e-12),
        PropertyResult("gamma_perp_laws", n, perp, 1e-12),
        PropertyResult("kk_round_trip", n, rt, 1e-14),
        PropertyResult("kk_inverse_blocks", n, inv, 1e-10),
        PropertyResult("single_mode_formulas_match_blocks", n, single, 1e-10),
        PropertyResult("auxiliary_identity_order", 3, max(0.0, 1.8 - aux_order), 0.0, extra={"order": aux_order, "worst_residual": aux_c}),
        PropertyResult("ricci3_order", 3, max(0.0, 1.8 - ricci_order), 0.0, extra={"order": ricci_order}),
    ]


REGISTRY: dict[str, Callable[[np.random.Generator, float, LameParameters], list[PropertyResult]]] = {
    "kinematics": suite_kinematics,
    "geometry": suite_geometry,
    "elastodynamics": suite_elastodynamics,
    "quantization": suite_quantization,
    "spinor": suite_spinor,
    "reduction": suite_reduction,
}


def run_suite(name: str, seed: int, h: float, lam: LameParameters) -> dict[str, list[PropertyResult]]:
    names = SUITES if name == "all" else (name,)
    rng = np.random.default_rng(seed)
    return {s: REGISTRY[s](rng, h, lam) for s in names}
