"""Metriplectic structure of the Hermitian-channel GKSL flow.

Functional gradients are Hermitian matrices X = dF/drho under the pairing
Tr(X rho). The dissipation potential is S(rho) = 1/2 Tr(rho^2).
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import null_space
from scipy.special import xlogy

from backend.errors import PreconditionError
from backend.liealg import (
    HERMITIAN_TOL,
    as_matrix,
    dagger,
    from_coefficients,
    hermiticity_defect,
    require_hermitian,
    same_shape,
    standard_basis,
)

EIGEN_CLUSTER_TOL = 1e-8


def _comm(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


def _require_gradient(X, name: str) -> np.ndarray:
    X = as_matrix(X, name)
    defect = hermiticity_defect(X)
    if defect > HERMITIAN_TOL:
        raise PreconditionError(f"functional gradient {name} must be Hermitian (|X - X^dag|_max = {defect:.3e})")
    return X


# -----------------------------
# Brackets
# -----------------------------
def lie_poisson(Xf, Xh, rho) -> float:
    """{F, H}(rho) = Re Tr(rho (-i)[X_f, X_h])."""
    Xf = _require_gradient(Xf, "Xf")
    Xh = _require_gradient(Xh, "Xh")
    Xf, rho = same_shape(Xf, rho, ("Xf", "rho"))
    return float((-1j * np.trace(rho @ _comm(Xf, Xh))).real)


def acsp_metric(Xf, Xs, L, gamma: float) -> float:
    """(F, S) = -(gamma/2) Re Tr([L, X_f]^dag [L, X_s])."""
    L = require_hermitian(L, "L")
    Xf = _require_gradient(Xf, "Xf")
    Xs = _require_gradient(Xs, "Xs")
    same_shape(L, Xf, ("L", "Xf"))
    return -0.5 * float(gamma) * float(np.vdot(_comm(L, Xf), _comm(L, Xs)).real)


def acsp_metric_double_commutator(Xf, Xs, L, gamma: float) -> float:
    """Same bracket written as -(gamma/2) Re <X_f, [L, [L, X_s]]>."""
    L = require_hermitian(L, "L")
    Xf, Xs = same_shape(Xf, Xs, ("Xf", "Xs"))
    return -0.5 * float(gamma) * float(np.vdot(Xf, _comm(L, _comm(L, Xs))).real)


def lie_poisson_field(rho, H) -> np.ndarray:
    """Field induced by the Lie-Poisson bracket on the linear functionals F_a = Tr(l_a rho)."""
    rho = as_matrix(rho, "rho")
    basis = standard_basis(rho.shape[0])
    rates = np.array([lie_poisson(E, H, rho) for E in basis.elements])
    return from_coefficients(rates, basis)


def metric_field(rho, L, gamma: float) -> np.ndarray:
    """Field induced by the ACSP metric bracket with dS/drho = rho."""
    rho = as_matrix(rho, "rho")
    basis = standard_basis(rho.shape[0])
    grad_s = 0.5 * (rho + dagger(rho))
    rates = np.array([acsp_metric(E, grad_s, L, gamma) for E in basis.elements])
    return from_coefficients(rates, basis)


def metriplectic_field(rho, H, L, gamma: float) -> np.ndarray:
    """-i[H, rho] - (gamma/2)[L, [L, rho]]."""
    H = require_hermitian(H, "H")
    L = require_hermitian(L, "L")
    H, rho = same_shape(H, rho, ("H", "rho"))
    return -1j * _comm(H, rho) - 0.5 * float(gamma) * _comm(L, _comm(L, rho))


# -----------------------------
# Commutant of L
# -----------------------------
def eigen_clusters(L, tol: float = EIGEN_CLUSTER_TOL) -> tuple[np.ndarray, np.ndarray, list[np.ndarray]]:
    """Eigenvalues, eigenvectors and index groups of numerically equal eigenvalues of Hermitian L."""
    L = require_hermitian(L, "L")
    values, vectors = np.linalg.eigh(0.5 * (L + dagger(L)))
    clusters: list[list[int]] = [[0]]
    for index in range(1, values.size):
        if values[index] - values[clusters[-1][-1]] <= tol:
            clusters[-1].append(index)
        else:
            clusters.append([index])
    return values, vectors, [np.array(c) for c in clusters]


def commutant_projection(L, A, tol: float = EIGEN_CLUSTER_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Split A into A_par in ker ad_L and the Hilbert-Schmidt orthogonal rest A_perp."""
    _, U, clusters = eigen_clusters(L, tol)
    A = np.asarray(A, dtype=np.complex128)
    same_shape(U, A, ("L", "A"))
    rotated = dagger(U) @ A @ U
    pinched = np.zeros_like(rotated)
    for group in clusters:
        block = np.ix_(group, group)
        pinched[block] = rotated[block]
    A_par = U @ pinched @ dagger(U)
    return A_par, A - A_par


def _kernel_projector(L: np.ndarray) -> np.ndarray:
    n = L.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    # row-major vec: vec(L X - X L) = (L (x) I - I (x) L^T) vec(X)
    superop = np.kron(L, eye) - np.kron(eye, L.T)
    kernel = null_space(superop)
    return kernel @ dagger(kernel)


def transverse_part(L, rho) -> np.ndarray:
    """rho_perp for any L: orthogonal complement of the projection onto ker ad_L."""
    L = as_matrix(L, "L")
    rho = np.asarray(rho, dtype=np.complex128)
    if hermiticity_defect(L) <= HERMITIAN_TOL:
        return commutant_projection(L, rho)[1]
    n = L.shape[0]
    projected = (_kernel_projector(L) @ rho.reshape(-1)).reshape(n, n)
    return rho - projected


def transverse_norm(L, rho) -> float:
    return float(np.linalg.norm(transverse_part(L, rho)))


def contraction_rate(rho, L, gamma: float) -> tuple[float, float]:
    """(2 <rho_perp, -(gamma/2)[L, [L, rho_perp]]>, -gamma |[L, rho_perp]|^2)."""
    L = require_hermitian(L, "L")
    _, rho_perp = commutant_projection(L, rho)
    flow = -0.5 * float(gamma) * _comm(L, _comm(L, rho_perp))
    lhs = 2.0 * float(np.vdot(rho_perp, flow).real)
    commuted = _comm(L, rho_perp)
    rhs = -float(gamma) * float(np.vdot(commuted, commuted).real)
    return lhs, rhs


# -----------------------------
# Double brackets
# -----------------------------
def bkmr_field(M, gradH, gradC, lam: float) -> np.ndarray:
    """M' = [M, grad H] - lambda [M, [M, grad C]]; tangent to the isospectral orbit of M."""
    M = as_matrix(M, "M")
    gradH, gradC = same_shape(gradH, gradC, ("gradH", "gradC"))
    same_shape(M, gradH, ("M", "gradH"))
    return _comm(M, gradH) - float(lam) * _comm(M, _comm(M, gradC))


def casimir_double_bracket(M, gradC, lam: float) -> np.ndarray:
    """-lambda ad*_{grad C} ad*_{grad C} M = -lambda [grad C, [grad C, M]] with ad*_X M = [M, X]."""
    M, gradC = same_shape(M, gradC, ("M", "gradC"))
    return -float(lam) * _comm(gradC, _comm(gradC, M))


# -----------------------------
# Read-only diagnostics
# -----------------------------
def purity(rho) -> float:
    rho = np.asarray(rho, dtype=np.complex128)
    return float(np.vdot(rho, rho).real)


def purity_entropy(rho) -> float:
    """S_p = 1 - Tr(rho^2)."""
    return 1.0 - purity(rho)


def purity_entropy_rate(rho, L, gamma: float) -> float:
    """dS_p/dt = gamma |[L, rho]|^2 along the Hermitian-channel flow."""
    L = require_hermitian(L, "L")
    commuted = _comm(L, np.asarray(rho, dtype=np.complex128))
    return float(gamma) * float(np.vdot(commuted, commuted).real)


def energy_rate(rho, H, L, gamma: float) -> float:
    """dTr(H rho)/dt = (H, S): vanishes for every rho when [L, H] = 0."""
    return acsp_metric(H, 0.5 * (rho + dagger(np.asarray(rho, dtype=np.complex128))), L, gamma)


def von_neumann_entropy(rho) -> float:
    rho = as_matrix(rho, "rho")
    values = np.clip(np.linalg.eigvalsh(0.5 * (rho + dagger(rho))), 0.0, None)
    return float(-np.sum(xlogy(values, values)))
