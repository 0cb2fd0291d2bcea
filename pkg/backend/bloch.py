"""Bloch coordinates rho = I/n + 1/2 sum_a r_a l_a, r_a = Tr(rho l_a), and the closed-form channel solutions."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from backend.channels import CHANNEL_CATALOG, ChannelSpec, gksl_generator
from backend.errors import InvalidDimensionError, PreconditionError, StateDomainError
from backend.liealg import (
    HERMITIAN_TOL,
    PSD_TOL,
    Basis,
    as_matrix,
    coefficients,
    from_coefficients,
    hermiticity_defect,
    standard_basis,
)

UNIT_TOL = 1e-10


def _basis_for(n: int, basis: Basis | None) -> Basis:
    basis = basis or standard_basis(n)
    if basis.n != n:
        raise InvalidDimensionError(f"state dimension {n} does not match basis dimension {basis.n}")
    return basis


def _dim_from_length(d: int) -> int:
    n = int(round(np.sqrt(d + 1)))
    if n * n - 1 != d or n < 2:
        raise InvalidDimensionError(f"a Bloch vector has n*n - 1 entries, got {d}")
    return n


def to_bloch(rho, basis: Basis | None = None) -> np.ndarray:
    rho = as_matrix(rho, "rho")
    defect = hermiticity_defect(rho)
    if defect > HERMITIAN_TOL:
        raise StateDomainError(f"rho is not Hermitian (|rho - rho^dag|_max = {defect:.3e})")
    return coefficients(rho, _basis_for(rho.shape[0], basis))


def from_bloch(r, basis: Basis | None = None) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 1:
        raise InvalidDimensionError(f"Bloch vector must be one-dimensional, got shape {r.shape}")
    basis = _basis_for(_dim_from_length(r.size), basis)
    rho = from_coefficients(r, basis, trace=1.0)
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    if min_eig < -PSD_TOL:
        raise StateDomainError(f"Bloch vector {r.tolist()} is outside the state space (min eigenvalue {min_eig:.3e})")
    return rho


def purity_from_bloch(r, n: int | None = None) -> float:
    r = np.asarray(r, dtype=np.float64)
    n = n or _dim_from_length(r.size)
    return 1.0 / n + 0.5 * float(r @ r)


def bloch_generator(H, channels: Sequence[ChannelSpec], basis: Basis | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Affine Bloch-space generator: r' = A r + b for the GKSL generator of (H, channels)."""
    H = as_matrix(H, "H")
    n = H.shape[0]
    basis = _basis_for(n, basis)
    drift = coefficients(gksl_generator(H, channels, np.eye(n, dtype=np.complex128) / n), basis)
    images = np.stack([gksl_generator(H, channels, E) for E in basis.elements])
    return 0.5 * coefficients(images, basis).T, drift


# -----------------------------
# SU(2) fields
# -----------------------------
def _vec3(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.shape != (3,):
        raise InvalidDimensionError(f"{name} must be a 3-vector, got shape {v.shape}")
    return v


def hamiltonian_field_su2(Omega, r) -> np.ndarray:
    """r' = Omega x r for H = 1/2 Omega . sigma."""
    return np.cross(_vec3(Omega, "Omega"), _vec3(r, "r"))


def dissipative_field_su2(ell, gamma: float, r) -> np.ndarray:
    """r' = -2 gamma (r - (r . ell) ell), the Bloch image of -(gamma/2)[L, [L, rho]] for L = ell . sigma.

    With the half-normalised operator L = 1/2 ell . sigma the same field needs rate 4 gamma.
    """
    ell = _vec3(ell, "ell")
    r = _vec3(r, "r")
    norm = float(np.linalg.norm(ell))
    if abs(norm - 1.0) > UNIT_TOL:
        raise PreconditionError(f"ell must be a unit vector, |ell| = {norm:.12g}")
    return -2.0 * float(gamma) * (r - (r @ ell) * ell)


# -----------------------------
# Closed forms
# -----------------------------
def analytic_dephasing(r0, gamma: float, t: float) -> np.ndarray:
    r0 = _vec3(r0, "r0")
    decay = np.exp(-2.0 * float(gamma) * float(t))
    return np.array([r0[0] * decay, r0[1] * decay, r0[2]])


def analytic_amplitude_damping(r0, gamma: float, t: float) -> np.ndarray:
    r0 = _vec3(r0, "r0")
    half = np.exp(-0.5 * float(gamma) * float(t))
    full = np.exp(-float(gamma) * float(t))
    return np.array([r0[0] * half, r0[1] * half, -1.0 + (r0[2] + 1.0) * full])


def analytic_depolarizing(r0, kappa: float, t: float) -> np.ndarray:
    """r(t) = r0 exp(-kappa t); the depolarizing preset at rate gamma has kappa = 2 gamma."""
    return _vec3(r0, "r0") * np.exp(-float(kappa) * float(t))


def depolarizing_kappa(gamma: float) -> float:
    """Isotropic decay rate of the depolarizing preset, read off the generator at r = (1, 0, 0)."""
    A, _ = bloch_generator(np.zeros((2, 2)), CHANNEL_CATALOG["depolarizing"](gamma))
    return float(-(A @ np.array([1.0, 0.0, 0.0]))[0])


def qutrit_dephasing_rates(channel: str, gamma: float) -> dict[int, float]:
    """Per-component exponential rates, keyed by 1-based Bloch index, for lambda_3 or lambda_8 dephasing."""
    key = str(channel).strip().lower()
    aliases = {"l3": "qutrit_dephasing_l3", "lambda_3": "qutrit_dephasing_l3", "l8": "qutrit_dephasing_l8", "lambda_8": "qutrit_dephasing_l8"}
    key = aliases.get(key, key)
    if key not in {"qutrit_dephasing_l3", "qutrit_dephasing_l8"}:
        raise PreconditionError(f"qutrit dephasing channel must be lambda_3 or lambda_8, got {channel!r}")
    A, _ = bloch_generator(np.zeros((3, 3)), CHANNEL_CATALOG[key](gamma))
    # diagonal L keeps every Gell-Mann element an eigenvector of the generator
    return {index + 1: float(-A[index, index]) for index in range(A.shape[0])}
