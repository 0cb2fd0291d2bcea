from __future__ import annotations

import numpy as np
import pytest

from backend.acsp import (
    ACSPSystem,
    AdjointTuple,
    advected,
    coadjoint_term,
    decomposed_system,
    diamond,
    ep_general_field,
    ep_vector_field,
    left_action,
    right_action,
    torsion,
)
from backend.channels import SIGMA_X, SIGMA_Y, SIGMA_Z, ChannelSpec, channel_preset, gksl_generator
from backend.errors import InvalidDimensionError, PreconditionError
from backend.liealg import (
    coefficients,
    commutator,
    from_coefficients,
    haar_unitary,
    hs_inner,
    make_rng,
    random_density,
    random_hermitian,
    standard_basis,
)


def _double_commutator_field(H, lindblads, rates, rho):
    out = -1j * commutator(H, rho)
    for L, g in zip(lindblads, rates):
        out = out - 0.5 * g * commutator(L, commutator(L, rho))
    return out


def test_torsion_of_commuting_pair_vanishes():
    v = AdjointTuple.of(SIGMA_Z, 2 * SIGMA_Z)
    np.testing.assert_array_equal(torsion(SIGMA_Z, v).components, np.zeros((2, 2, 2)))


def test_torsion_pauli_example():
    out = torsion(SIGMA_Z, AdjointTuple.of(SIGMA_X))
    np.testing.assert_allclose(out[0], 4j * SIGMA_Y, atol=1e-15)


def test_torsion_is_left_minus_right_action():
    rng = make_rng(2)
    xi = random_hermitian(3, rng)
    v = AdjointTuple(random_hermitian(3, rng, count=3))
    expected = left_action(xi, v).components - right_action(v, xi).components
    np.testing.assert_array_equal(torsion(xi, v).components, 2.0 * left_action(xi, v).components)
    np.testing.assert_allclose(torsion(xi, v).components, expected, atol=1e-14)


def test_torsion_dimension_mismatch():
    with pytest.raises(InvalidDimensionError):
        torsion(np.eye(3), AdjointTuple.of(SIGMA_X))


def test_torsion_is_equivariant():
    rng = make_rng(4)
    for n in (2, 3, 4):
        xi = random_hermitian(n, rng)
        v = AdjointTuple(random_hermitian(n, rng, count=2))
        g = haar_unitary(n, rng)
        gd = g.conj().T
        rotated = torsion(g @ xi @ gd, AdjointTuple(g @ v.components @ gd)).components
        np.testing.assert_allclose(rotated, g @ torsion(xi, v).components @ gd, atol=1e-10)


def test_diamond_identities():
    rng = make_rng(5)
    L = random_hermitian(3, rng)
    rho = random_density(3, rng)
    np.testing.assert_allclose(
        diamond(AdjointTuple.of(L), AdjointTuple.of(commutator(L, rho))),
        commutator(L, commutator(L, rho)),
        atol=1e-14,
    )
    np.testing.assert_array_equal(diamond(AdjointTuple.of(L), AdjointTuple.of(np.zeros((3, 3)))), np.zeros((3, 3)))
    v = AdjointTuple(random_hermitian(3, rng, count=2))
    alpha = AdjointTuple(random_hermitian(3, rng, count=2))
    expected = commutator(v[0], alpha[0]) + commutator(v[1], alpha[1])
    np.testing.assert_allclose(diamond(v, alpha), expected, atol=1e-14)
    with pytest.raises(InvalidDimensionError):
        diamond(v, AdjointTuple.of(alpha[0]))


def test_diamond_is_dual_to_left_action():
    rng = make_rng(6)
    for n in (2, 3, 4):
        xi = random_hermitian(n, rng)
        v = AdjointTuple(random_hermitian(n, rng, count=2))
        alpha = AdjointTuple(random_hermitian(n, rng, count=2))
        lhs = hs_inner(diamond(v, alpha), xi)
        moved = left_action(xi, v)
        rhs = -sum(hs_inner(a, b) for a, b in zip(alpha, moved))
        assert abs(lhs - rhs) <= 1e-10


def test_diamond_of_advected_cancels_double_commutator():
    rng = make_rng(7)
    for n in (2, 3, 4):
        L = random_hermitian(n, rng)
        rho = random_density(n, rng)
        gamma = 0.8
        system = ACSPSystem(np.zeros((n, n)), AdjointTuple.of(L), (gamma,))
        total = diamond(AdjointTuple.of(L), advected(rho, system)) + 0.5 * gamma * commutator(L, commutator(L, rho))
        assert np.max(np.abs(total)) <= 1e-14 * max(1.0, np.linalg.norm(L) ** 2)


def test_advected_examples():
    rho = 0.5 * (np.eye(2) + SIGMA_X)
    system = ACSPSystem(np.zeros((2, 2)), AdjointTuple.of(SIGMA_Z), (2.0,))
    alpha = advected(rho, system)
    np.testing.assert_allclose(alpha[0], -1j * SIGMA_Y, atol=1e-15)
    np.testing.assert_allclose(commutator(SIGMA_Z, alpha[0]), -commutator(SIGMA_Z, commutator(SIGMA_Z, rho)), atol=1e-15)
    still = advected(np.diag([0.3, 0.7]), system)
    np.testing.assert_array_equal(still.components, np.zeros((1, 2, 2)))


def test_ep_field_fixed_point():
    system = ACSPSystem(np.zeros((2, 2)), AdjointTuple.of(SIGMA_Z), (1.0,))
    np.testing.assert_allclose(ep_vector_field(np.diag([0.25, 0.75]), system), np.zeros((2, 2)), atol=1e-15)


def test_ep_field_equals_gksl_single_and_qutrit_channels():
    rho = random_density(2, 8)
    H = random_hermitian(2, 9)
    channels = channel_preset("dephasing", 0.6)
    system = ACSPSystem.from_channels(H, channels)
    np.testing.assert_allclose(ep_vector_field(rho, system), gksl_generator(H, channels, rho), atol=1e-14)

    rho3 = random_density(3, 10)
    H3 = random_hermitian(3, 11)
    qutrit = channel_preset("qutrit_dephasing_l3", 0.4) + channel_preset("qutrit_dephasing_l8", 0.9)
    system3 = ACSPSystem.from_channels(H3, qutrit)
    np.testing.assert_allclose(ep_vector_field(rho3, system3), gksl_generator(H3, qutrit, rho3), atol=1e-14)


def test_ep_field_generator_equivalence_sweep():
    rng = make_rng(12)
    worst = 0.0
    for trial in range(1000):
        n = (2, 3, 4)[trial % 3]
        m = 1 + trial % 3
        H = random_hermitian(n, rng)
        Ls = random_hermitian(n, rng, count=m)
        rates = tuple(rng.uniform(0.0, 2.0, size=m))
        rho = random_density(n, rng)
        system = ACSPSystem(H, AdjointTuple(Ls), rates)
        diff = ep_vector_field(rho, system) - _double_commutator_field(H, Ls, rates, rho)
        worst = max(worst, float(np.max(np.abs(diff))))
    assert worst <= 1e-13


def test_coadjoint_term_examples():
    rho = np.eye(3) / 3
    np.testing.assert_allclose(coadjoint_term(random_hermitian(3, 1), rho), np.zeros((3, 3)), atol=1e-15)
    omega = np.array([0.3, -1.1, 0.7])
    r = np.array([0.2, 0.5, -0.4])
    basis = standard_basis(2)
    H = from_coefficients(omega, basis)
    rate = coefficients(coadjoint_term(H, from_coefficients(r, basis, trace=1.0)), basis)
    np.testing.assert_allclose(rate, np.cross(omega, r), atol=1e-12)
    out = coadjoint_term(random_hermitian(4, 2), random_density(4, 3))
    np.testing.assert_allclose(out, out.conj().T, atol=1e-12)


def test_system_validation():
    with pytest.raises(PreconditionError):
        ACSPSystem(np.zeros((2, 2)), AdjointTuple.of(SIGMA_Z), (-1.0,))
    with pytest.raises(PreconditionError):
        ACSPSystem(np.zeros((2, 2)), AdjointTuple.of(SIGMA_Z, SIGMA_X), (1.0,))
    with pytest.raises(PreconditionError):
        ACSPSystem.from_channels(np.zeros((2, 2)), channel_preset("amplitude_damping", 1.0))
    with pytest.raises(InvalidDimensionError):
        ACSPSystem(np.zeros((3, 3)), AdjointTuple.of(SIGMA_Z), (1.0,))


def test_general_field_covers_non_hermitian_channels():
    rng = make_rng(13)
    for n in (2, 3):
        H = random_hermitian(n, rng)
        channels = [
            ChannelSpec(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)), rng.uniform(0.1, 1.0))
            for _ in range(2)
        ]
        rho = random_density(n, rng)
        system = decomposed_system(H, channels)
        assert len(system.lindblads) == 4
        np.testing.assert_allclose(ep_general_field(rho, H, channels), gksl_generator(H, channels, rho), atol=1e-12)
    rho = random_density(2, 14)
    damping = channel_preset("amplitude_damping", 0.5)
    np.testing.assert_allclose(
        ep_general_field(rho, np.zeros((2, 2)), damping), gksl_generator(np.zeros((2, 2)), damping, rho), atol=1e-14
    )
