from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from backend.errors import InvalidDimensionError, PreconditionError, StateDomainError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-8
ORTHOGONALITY_TOL = 1e-12
BASIS_NORM = 2.0

Seed = int | np.random.Generator


@dataclass(frozen=True, eq=False)
class Basis:
    """Trace-orthogonal Hermitian basis of su(n), Tr(l_a l_b) = norm * delta_ab.

    `elements` is a read-only (n*n - 1, n, n) complex array.
    """

    n: int
    elements: np.ndarray
    norm: float = BASIS_NORM

    @property
    def dim(self) -> int:
        return int(self.elements.shape[0])

    def __len__(self) -> int:
        return self.dim

    def __getitem__(self, index: int) -> np.ndarray:
        return self.elements[index]


@dataclass(frozen=True, eq=False)
class StructureConstants:
    n: int
    f: np.ndarray


# -----------------------------
# Validation helpers
# -----------------------------
def as_matrix(A, name: str = "matrix") -> np.ndarray:
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InvalidDimensionError(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise PreconditionError(f"{name} has non-finite entries")
    return M


def same_shape(A, B, names: tuple[str, str] = ("A", "B")) -> tuple[np.ndarray, np.ndarray]:
    A = np.asarray(A, dtype=np.complex128)
    B = np.asarray(B, dtype=np.complex128)
    if A.shape != B.shape or A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise InvalidDimensionError(
            f"dimension mismatch: {names[0]} has shape {A.shape}, {names[1]} has shape {B.shape}"
        )
    return A, B


def dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def hermiticity_defect(A) -> float:
    A = np.asarray(A, dtype=np.complex128)
    return float(np.max(np.abs(A - dagger(A)))) if A.size else 0.0


def is_hermitian(A, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_defect(A) <= tol


def require_hermitian(A, name: str = "operator") -> np.ndarray:
    M = as_matrix(A, name)
    defect = hermiticity_defect(M)
    if defect > HERMITIAN_TOL:
        raise PreconditionError(f"{name} must be Hermitian (|M - M^dag|_max = {defect:.3e})")
    return M


def require_density(rho, name: str = "rho") -> np.ndarray:
    M = as_matrix(rho, name)
    defect = hermiticity_defect(M)
    if defect > HERMITIAN_TOL:
        raise StateDomainError(f"{name} is not Hermitian (|M - M^dag|_max = {defect:.3e})")
    trace_err = abs(np.trace(M).real - 1.0)
    if trace_err > TRACE_TOL:
        raise StateDomainError(f"{name} does not have unit trace (|Tr - 1| = {trace_err:.3e})")
    min_eig = float(np.linalg.eigvalsh(0.5 * (M + dagger(M)))[0])
    if min_eig < -PSD_TOL:
        raise StateDomainError(f"{name} is not positive semidefinite (min eigenvalue {min_eig:.3e})")
    return M


def _check_dim(n: int) -> int:
    if int(n) != n or int(n) < 2:
        raise InvalidDimensionError(f"su(n) needs n >= 2, got {n!r}")
    return int(n)


# -----------------------------
# Bases and structure constants
# -----------------------------
@lru_cache(maxsize=None)
def standard_basis(n: int) -> Basis:
    """Pauli matrices for n=2, generalized Gell-Mann matrices for n>=3.

    For each k = 2..n the symmetric and antisymmetric pairs (j, k), j < k, come
    first and the k-th diagonal element closes the group, so n=3 yields the
    familiar l1..l8 ordering.
    """
    n = _check_dim(n)
    elements = []
    for k in range(1, n):
        for j in range(k):
            sym = np.zeros((n, n), dtype=np.complex128)
            sym[j, k] = sym[k, j] = 1.0
            elements.append(sym)
            anti = np.zeros((n, n), dtype=np.complex128)
            anti[j, k] = -1j
            anti[k, j] = 1j
            elements.append(anti)
        diag = np.zeros(n, dtype=np.float64)
        diag[:k] = 1.0
        diag[k] = -float(k)
        elements.append(np.diag(np.sqrt(2.0 / (k * (k + 1))) * diag).astype(np.complex128))

    stacked = np.stack(elements)
    stacked.setflags(write=False)
    return Basis(n=n, elements=stacked)


def structure_constants(basis: Basis) -> StructureConstants:
    """f_abc = Tr([l_a, l_b] l_c) / (4i) for a basis normalised to Tr(l_a l_b) = 2 delta_ab."""
    E = basis.elements
    d = basis.dim
    gram = np.einsum("aij,bji->ab", E, E)
    if abs(basis.norm - BASIS_NORM) > ORTHOGONALITY_TOL or not np.allclose(
        gram, BASIS_NORM * np.eye(d), rtol=0.0, atol=ORTHOGONALITY_TOL
    ):
        raise PreconditionError("structure constants need a trace-orthogonal basis with Tr(l_a l_b) = 2 delta_ab")

    f = np.empty((d, d, d), dtype=np.complex128)
    for a in range(d):
        comm = E[a] @ E - E @ E[a]
        f[a] = np.einsum("bij,cji->bc", comm, E) / 4j

    imag = float(np.max(np.abs(f.imag))) if f.size else 0.0
    if imag > ORTHOGONALITY_TOL:
        raise PreconditionError(f"structure constants are not real (max imaginary part {imag:.3e})")
    return StructureConstants(n=basis.n, f=np.ascontiguousarray(f.real))


# -----------------------------
# Brackets and pairings
# -----------------------------
def commutator(A, B) -> np.ndarray:
    A, B = same_shape(A, B)
    return A @ B - B @ A


def anticommutator(A, B) -> np.ndarray:
    A, B = same_shape(A, B)
    return A @ B + B @ A


def hs_inner(A, B) -> complex:
    A, B = same_shape(A, B)
    return complex(np.vdot(A, B))


def hs_norm(A) -> float:
    A = np.asarray(A, dtype=np.complex128)
    return float(np.sqrt(max(np.vdot(A, A).real, 0.0)))


# -----------------------------
# Coefficient coordinates
# -----------------------------
def coefficients(X, basis: Basis | None = None) -> np.ndarray:
    """r_a = Tr(X l_a); leading batch axes are kept."""
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim < 2 or X.shape[-1] != X.shape[-2]:
        raise InvalidDimensionError(f"expected square matrices, got shape {X.shape}")
    basis = basis or standard_basis(X.shape[-1])
    if X.shape[-1] != basis.n:
        raise InvalidDimensionError(f"matrix dimension {X.shape[-1]} does not match basis dimension {basis.n}")
    return np.einsum("...ij,aji->...a", X, basis.elements).real


def from_coefficients(r, basis: Basis, trace: float = 0.0) -> np.ndarray:
    """(trace / n) I + 1/2 sum_a r_a l_a."""
    r = np.asarray(r, dtype=np.float64)
    if r.shape[-1:] != (basis.dim,):
        raise InvalidDimensionError(f"expected {basis.dim} coefficients, got shape {r.shape}")
    X = 0.5 * np.einsum("...a,aij->...ij", r.astype(np.complex128), basis.elements)
    if trace:
        X = X + (float(trace) / basis.n) * np.eye(basis.n, dtype=np.complex128)
    return X


def coefficient_matrix(linear_map: Callable[[np.ndarray], np.ndarray], basis: Basis) -> np.ndarray:
    """Real matrix M_ab = 1/2 Re Tr(l_a F(l_b)) of a Hermiticity-preserving map F on su(n)."""
    images = np.stack([np.asarray(linear_map(E), dtype=np.complex128) for E in basis.elements])
    return 0.5 * coefficients(images, basis).T


def ad_matrix(L, basis: Basis | None = None) -> np.ndarray:
    """Coefficient matrix of X -> -i[L, X]; real and antisymmetric for Hermitian L."""
    L = require_hermitian(L, "L")
    basis = basis or standard_basis(L.shape[0])
    if basis.n != L.shape[0]:
        raise InvalidDimensionError(f"L has dimension {L.shape[0]}, basis has {basis.n}")
    E = basis.elements
    images = -1j * (L @ E - E @ L)
    return 0.5 * np.einsum("aij,bji->ab", E, images).real


# -----------------------------
# Random sampling
# -----------------------------
def make_rng(seed: Seed) -> np.random.Generator:
    """Counter-based Philox stream; the same integer seed gives the same draws on every platform."""
    if isinstance(seed, np.random.Generator):
        return seed
    if int(seed) != seed or int(seed) < 0:
        raise PreconditionError(f"seed must be a non-negative integer, got {seed!r}")
    return np.random.Generator(np.random.Philox(int(seed)))


def _complex_gaussian(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _shape(n: int, count: int | None) -> tuple[int, ...]:
    return (n, n) if count is None else (int(count), n, n)


def random_hermitian(n: int, seed: Seed, count: int | None = None) -> np.ndarray:
    n = _check_dim(n)
    G = _complex_gaussian(make_rng(seed), _shape(n, count))
    return 0.5 * (G + dagger(G))


def random_density(n: int, seed: Seed, count: int | None = None) -> np.ndarray:
    n = _check_dim(n)
    G = _complex_gaussian(make_rng(seed), _shape(n, count))
    W = G @ dagger(G)
    W = 0.5 * (W + dagger(W))
    trace = np.trace(W, axis1=-2, axis2=-1).real
    return W / np.asarray(trace)[..., None, None]


def haar_unitary(n: int, seed: Seed, count: int | None = None) -> np.ndarray:
    """Haar-distributed unitaries: QR of a complex Gaussian, phases of diag(R) moved into Q."""
    n = _check_dim(n)
    Z = _complex_gaussian(make_rng(seed), _shape(n, count))
    Q, R = np.linalg.qr(Z)
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    phases = diag / np.abs(diag)
    return Q * phases[..., None, :]
