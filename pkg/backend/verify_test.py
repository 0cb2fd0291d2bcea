from __future__ import annotations

import numpy as np
import pytest

from backend.bloch import bloch_generator, to_bloch
from backend.channels import SIGMA_Z, ChannelSpec, channel_preset, gksl_generator
from backend.dynamics import SimulationConfig, simulate
from backend.errors import DegenerateChannelError, InvalidDimensionError, PreconditionError
from backend.liealg import (
    ad_matrix,
    commutator,
    haar_unitary,
    make_rng,
    random_density,
    random_hermitian,
)
from backend.verify import (
    BilinearMapTensor,
    adjoint_rotation,
    ad_squared_spectrum,
    bracket_line_residual,
    bracket_tensor,
    curvature_bound_check,
    curvature_ratios,
    equivariance_defect,
    factorization_residual,
    fit_decay_rates,
    isotropy_commutant,
    ladder_identity_defect,
    liouvillian,
    matrix_exponential_oracle,
    restricted_fit,
    torsion_tensor,
    transport,
    twirl,
    uniqueness_check,
    unvec,
    vec,
)

LAMBDA_3 = np.diag([1.0, -1.0, 0.0]).astype(complex)


def _random_tensor(n, rng):
    d = n * n - 1
    return BilinearMapTensor(n, rng.standard_normal((d, d, d)))


def test_bracket_tensor_matches_commutator():
    xi = BilinearMapTensor.from_map(lambda X, Y: -1j * commutator(X, Y), 3)
    np.testing.assert_allclose(xi.c, bracket_tensor(3).c, atol=1e-14)
    X, Y = random_hermitian(3, 1), random_hermitian(3, 2)
    X = X - np.trace(X) / 3 * np.eye(3)
    Y = Y - np.trace(Y) / 3 * np.eye(3)
    np.testing.assert_allclose(xi.apply(X, Y), -1j * commutator(X, Y), atol=1e-12)


def test_section_is_ad_matrix():
    L = random_hermitian(3, 3)
    np.testing.assert_allclose(bracket_tensor(3).section(L), ad_matrix(L), atol=1e-12)


def test_tensor_shape_is_checked():
    with pytest.raises(InvalidDimensionError):
        BilinearMapTensor(2, np.zeros((3, 3, 2)))


def test_adjoint_rotation_is_orthogonal():
    rng = make_rng(4)
    for n in (2, 3):
        R = adjoint_rotation(haar_unitary(n, rng, count=5))
        for Rg in R:
            np.testing.assert_allclose(Rg @ Rg.T, np.eye(n * n - 1), atol=1e-8)


def test_torsion_tensor_is_fixed_by_twirl():
    xi = torsion_tensor(2)
    assert equivariance_defect(xi, probes=20, seed=5) <= 1e-12
    out = twirl(xi, 2, 10_000, seed=6)
    assert np.max(np.abs(out.c - xi.c)) <= 1e-3


def test_twirl_of_zero_is_zero():
    zero = BilinearMapTensor(2, np.zeros((3, 3, 3)))
    np.testing.assert_array_equal(twirl(zero, 2, 100, seed=0).c, np.zeros((3, 3, 3)))
    with pytest.raises(PreconditionError):
        twirl(zero, 2, 0, seed=0)


def test_twirl_defect_decreases_with_samples():
    rng = make_rng(7)
    xi = _random_tensor(2, rng)
    before = equivariance_defect(xi, probes=100, seed=8)
    defects = []
    for k, samples in enumerate((100, 1_000, 10_000)):
        out = twirl(xi, 2, samples, seed=100 + k)
        defects.append(equivariance_defect(out, probes=100, seed=200 + k) * out.norm() / xi.norm())
    assert defects[0] > defects[1] > defects[2]
    assert defects[2] <= 10.0 * before / np.sqrt(10_000)


def test_random_tensors_twirl_to_the_bracket_line():
    rng = make_rng(9)
    for k in range(20):
        xi = _random_tensor(2, rng)
        out = twirl(xi, 2, 10_000, seed=300 + k)
        _, residual = bracket_line_residual(out, reference_norm=xi.norm())
        assert residual <= 1e-2


def test_transport_by_identity_is_noop():
    c = _random_tensor(3, make_rng(10)).c
    np.testing.assert_allclose(transport(c, np.eye(8)), c, atol=1e-15)


def test_factorization_of_double_commutator_is_exact():
    gamma = 0.7
    for L in (SIGMA_Z, random_hermitian(3, 11)):
        result = factorization_residual(lambda X: -0.5 * gamma * commutator(L, commutator(L, X)), L)
        assert result.residual <= 1e-12
        rho = random_density(L.shape[0], 12)
        for image in (commutator(L, rho), 1j * commutator(L, rho), rho):
            np.testing.assert_allclose(commutator(L, result.apply(image)), -0.5 * gamma * commutator(L, commutator(L, image)), atol=1e-10)


def test_factorization_apply_is_complex_linear():
    result = factorization_residual(lambda X: -0.35 * commutator(SIGMA_Z, commutator(SIGMA_Z, X)), SIGMA_Z)
    rho = random_density(2, 18)
    image = commutator(SIGMA_Z, rho)
    assert np.linalg.norm(result.apply(image)) > 0.1 * np.linalg.norm(image)
    np.testing.assert_allclose(result.apply(image), -1j * result.apply(1j * image), atol=1e-14)


def test_factorization_edge_cases():
    zero = factorization_residual(np.zeros((3, 3)), SIGMA_Z)
    assert zero.residual == 0.0
    np.testing.assert_array_equal(zero.S, np.zeros((3, 3)))
    # maps into the commutant of sigma_z cannot be written as commutators with sigma_z
    into_kernel = np.zeros((3, 3))
    into_kernel[2, 0] = 1.0
    assert factorization_residual(into_kernel, SIGMA_Z).residual == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DegenerateChannelError):
        factorization_residual(np.zeros((3, 3)), 2.0 * np.eye(2))


def test_torsion_generated_maps_factorise():
    rng = make_rng(13)
    twirled = twirl(torsion_tensor(2), 2, 1_000, seed=14)
    for _ in range(5):
        L = random_hermitian(2, rng)
        assert factorization_residual(twirled.section(L), L).residual <= 1e-6


def test_uniqueness_qubit_single_family():
    report = uniqueness_check(2, SIGMA_Z, samples=10, seed=15)
    assert report.max_residual <= 1e-10
    assert report.single_family
    assert report.block_scalars().shape == (10, 1)
    assert report.blocks[0][0].dim == 2
    assert all(abs(fit.lamb) <= 1e-12 for fits in report.blocks for fit in fits)


def test_restricted_fit_counts_the_antisymmetric_part():
    M = ad_matrix(SIGMA_Z)
    rotation = restricted_fit(M, SIGMA_Z)[0]
    assert rotation.scalar == pytest.approx(0.0, abs=1e-14)
    assert rotation.residual == pytest.approx(1.0, abs=1e-12)
    mixed = restricted_fit(-M @ M + M, SIGMA_Z)[0]
    assert mixed.scalar == pytest.approx(1.0, abs=1e-12)
    assert 1e-3 < mixed.residual < 1.0


def test_uniqueness_zero_candidate_is_in_family():
    fits = restricted_fit(np.zeros((3, 3)), SIGMA_Z)
    assert fits[0].scalar == 0.0 and fits[0].residual == 0.0


def test_uniqueness_qutrit_reports_block_scalars():
    report = uniqueness_check(3, LAMBDA_3, samples=5, seed=16)
    assert report.block_scalars().shape == (5, 3)
    assert report.max_residual <= 1e-8
    assert not report.single_family
    degenerate = uniqueness_check(3, np.diag([1.0, -1.0, 1.0]), samples=5, seed=17)
    assert degenerate.block_scalars().shape == (5, 1)
    assert degenerate.blocks[0][0].dim == 4
    assert degenerate.max_residual <= 1e-8


def test_isotropy_commutant_contains_identity():
    basis = isotropy_commutant(SIGMA_Z)
    assert basis.shape == (3, 3, 3)
    flat = basis.reshape(3, -1)
    coeffs, *_ = np.linalg.lstsq(flat.T, np.eye(3).reshape(-1), rcond=None)
    np.testing.assert_allclose(flat.T @ coeffs, np.eye(3).reshape(-1), atol=1e-12)


def test_uniqueness_rejects_scalar_channel():
    with pytest.raises(DegenerateChannelError):
        uniqueness_check(2, np.eye(2))


def test_curvature_bound_holds():
    for n in (2, 3, 4):
        report = curvature_bound_check(n, 10_000, seed=18 + n)
        assert report.passed
        assert report.max_ratio < 1.0


def test_curvature_ratio_edge_cases():
    assert curvature_ratios(SIGMA_Z, np.diag([0.3, 0.7])) == 0.0
    rng = make_rng(22)
    L, rho = random_hermitian(3, rng), random_density(3, rng)
    assert curvature_ratios(2.5 * L, 0.3 * rho) == pytest.approx(curvature_ratios(L, rho), abs=1e-12)


def test_ad_squared_spectrum_examples():
    np.testing.assert_allclose(ad_squared_spectrum(LAMBDA_3), [4, 4, 1, 1, 1, 1, 0, 0], atol=1e-10)
    np.testing.assert_allclose(ad_squared_spectrum(SIGMA_Z), [4, 4, 0], atol=1e-12)
    np.testing.assert_allclose(ad_squared_spectrum(np.zeros((3, 3))), np.zeros(8), atol=1e-15)


def test_matrix_exponential_oracle():
    G = random_hermitian(3, 23) * 1j
    np.testing.assert_allclose(matrix_exponential_oracle(G, 0.0), np.eye(3), atol=1e-15)
    gamma, t = 0.6, 1.3
    A, _ = bloch_generator(np.zeros((2, 2)), channel_preset("dephasing", gamma))
    expected = np.diag([np.exp(-2 * gamma * t), np.exp(-2 * gamma * t), 1.0])
    np.testing.assert_allclose(matrix_exponential_oracle(A, t), expected, atol=1e-12)
    small = make_rng(24).standard_normal((4, 4)) * 0.3
    np.testing.assert_allclose(
        matrix_exponential_oracle(small, 0.7),
        matrix_exponential_oracle(small, 0.3) @ matrix_exponential_oracle(small, 0.4),
        atol=1e-10,
    )


def test_liouvillian_matches_generator_and_integrator():
    rng = make_rng(25)
    H = random_hermitian(3, rng)
    channels = [ChannelSpec(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)), 0.4)]
    rho = random_density(3, rng)
    G = liouvillian(H, channels)
    np.testing.assert_allclose(unvec(G @ vec(rho), 3), gksl_generator(H, channels, rho), atol=1e-12)

    hermitian = channel_preset("qutrit_dephasing_l3", 0.5)
    traj = simulate(rho, (H, hermitian), SimulationConfig(t_final=0.5, dt=1e-3))
    exact = unvec(matrix_exponential_oracle(liouvillian(H, hermitian), 0.5) @ vec(rho), 3)
    np.testing.assert_allclose(traj.final_state, exact, atol=1e-10)


def test_qutrit_rates_from_spectrum_and_simulation():
    gamma = 0.8
    rho0 = random_density(3, 26)
    traj = simulate(rho0, (np.zeros((3, 3)), channel_preset("qutrit_dephasing_l3", gamma)), SimulationConfig(t_final=1.0, record_every=10))
    rates = fit_decay_rates(traj.times, traj.bloch())
    predicted = 0.5 * gamma * np.diag(-ad_matrix(LAMBDA_3) @ ad_matrix(LAMBDA_3))
    for index in (0, 1, 3, 4, 5, 6):
        assert rates[index] == pytest.approx(predicted[index], rel=1e-4)
    assert abs(rates[2]) <= 1e-8 and abs(rates[7]) <= 1e-8
    assert sorted(set(np.round(rates, 6))) == pytest.approx([0.0, gamma / 2, 2 * gamma], abs=1e-6)
    spectrum_rates = np.sort(0.5 * gamma * ad_squared_spectrum(LAMBDA_3))
    np.testing.assert_allclose(np.sort(rates), spectrum_rates, rtol=1e-4, atol=1e-8)


def test_fit_decay_rates_single_series():
    t = np.linspace(0.0, 2.0, 50)
    assert fit_decay_rates(t, 3.0 * np.exp(-0.7 * t)) == pytest.approx(0.7, abs=1e-12)
    assert np.isnan(fit_decay_rates(t, np.zeros_like(t)))


def test_ladder_identity_holds_on_upper_block_only():
    rho = random_density(3, 27)
    defect = ladder_identity_defect(rho)
    assert defect.upper_block <= 1e-14
    assert defect.oracle <= 1e-14
    assert defect.full > 1e-3
    with pytest.raises(InvalidDimensionError):
        ladder_identity_defect(np.eye(2) / 2)


def test_diagonal_channel_contracts_off_block_coherences():
    gamma = 0.9
    L = np.diag([1.0, -1.0, 1.0])
    A, b = bloch_generator(np.zeros((3, 3)), [ChannelSpec(L, gamma)])
    M = ad_matrix(L)
    perp = -M @ M / 4.0
    np.testing.assert_allclose(A, -2.0 * gamma * perp, atol=1e-12)
    np.testing.assert_allclose(b, np.zeros(8), atol=1e-15)
    rho = random_density(3, 28)
    kept = to_bloch(rho) - perp @ to_bloch(rho)
    np.testing.assert_allclose(A @ kept, np.zeros(8), atol=1e-12)
    np.testing.assert_allclose(to_bloch(np.diag([0.2, 0.3, 0.5])) @ perp, np.zeros(8), atol=1e-15)
