"""Numerical checks of the structural results behind the ACSP construction.

Bilinear maps su(n) x su(n) -> su(n) are stored as real tensors in Bloch
coefficients: Xi(X, Y)_c = sum_ab c_abc x_a y_b with x_a = Tr(X l_a). Linear
maps are real d x d coefficient matrices, d = n*n - 1.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm, null_space

from backend.brackets import eigen_clusters
from backend.channels import ChannelSpec
from backend.errors import DegenerateChannelError, InvalidDimensionError, PreconditionError
from backend.liealg import (
    Seed,
    ad_matrix,
    as_matrix,
    coefficient_matrix,
    coefficients,
    dagger,
    from_coefficients,
    haar_unitary,
    make_rng,
    random_density,
    random_hermitian,
    require_hermitian,
    standard_basis,
    structure_constants,
)

logger = logging.getLogger(__name__)

TWIRL_BATCH = 1000
RIDGE = 1e-12
DEGENERATE_TOL = 1e-12
CURVATURE_SLACK = 1e-12
KERNEL_TOL = 1e-10


# -----------------------------
# Bilinear maps and adjoint rotations
# -----------------------------
@dataclass(frozen=True, eq=False)
class BilinearMapTensor:
    n: int
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        d = self.n * self.n - 1
        if c.shape != (d, d, d):
            raise InvalidDimensionError(f"bilinear tensor for su({self.n}) needs shape {(d, d, d)}, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise PreconditionError("bilinear tensor has non-finite entries")
        object.__setattr__(self, "c", c)

    @property
    def dim(self) -> int:
        return int(self.c.shape[0])

    @classmethod
    def from_map(cls, fn: Callable[[np.ndarray, np.ndarray], np.ndarray], n: int) -> "BilinearMapTensor":
        """c_abc = 1/4 Re Tr(l_c Xi(l_a, l_b)) for a Hermitian-valued bilinear Xi."""
        E = standard_basis(n).elements
        images = np.stack([np.stack([np.asarray(fn(A, B), dtype=np.complex128) for B in E]) for A in E])
        return cls(n, 0.25 * coefficients(images))

    def apply(self, X, Y) -> np.ndarray:
        basis = standard_basis(self.n)
        out = np.einsum("abc,a,b->c", self.c, coefficients(X, basis), coefficients(Y, basis))
        return from_coefficients(out, basis)

    def section(self, L) -> np.ndarray:
        """Coefficient matrix of rho -> Xi(L, rho)."""
        ell = coefficients(as_matrix(L, "L"), standard_basis(self.n))
        return np.einsum("a,abc->cb", ell, self.c)

    def norm(self) -> float:
        return float(np.linalg.norm(self.c))


def bracket_tensor(n: int) -> BilinearMapTensor:
    """Tensor of -i[X, Y]; its entries are the structure constants f_abc."""
    return BilinearMapTensor(n, structure_constants(standard_basis(n)).f)


def torsion_tensor(n: int) -> BilinearMapTensor:
    """Hermitian form of the adjoint torsion 2[xi, v]: (X, Y) -> -2i[X, Y]."""
    return BilinearMapTensor(n, 2.0 * structure_constants(standard_basis(n)).f)


def adjoint_rotation(g) -> np.ndarray:
    """R_ab = 1/2 Re Tr(l_a g l_b g^dag); batched over leading axes of g."""
    g = np.asarray(g, dtype=np.complex128)
    E = standard_basis(g.shape[-1]).elements
    rotated = np.einsum("...ij,bjk,...lk->...bil", g, E, g.conj())
    return 0.5 * np.einsum("aij,...bji->...ab", E, rotated).real


def transport(c: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Tensor of Ad_g^-1 Xi(Ad_g X, Ad_g Y); a batch of rotations is averaged."""
    if R.ndim == 2:
        return np.einsum("ia,jb,kc,ijk->abc", R, R, R, c, optimize=True)
    return np.einsum("Nia,Njb,Nkc,ijk->abc", R, R, R, c, optimize=True) / R.shape[0]


def weyl_heisenberg(n: int) -> np.ndarray:
    """The n*n clock-and-shift unitaries X^a Z^b."""
    shift = np.roll(np.eye(n, dtype=np.complex128), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(n) / n))
    out = []
    for a in range(n):
        Xa = np.linalg.matrix_power(shift, a)
        for b in range(n):
            out.append(Xa @ np.linalg.matrix_power(clock, b))
    return np.stack(out)


def twirl(xi: BilinearMapTensor, n: int, samples: int, seed: Seed, batch: int = TWIRL_BATCH) -> BilinearMapTensor:
    """Monte-Carlo projection onto the Ad-equivariant bilinear maps.

    The tensor is averaged exactly over the Weyl-Heisenberg group before and
    after the average over `samples` Haar rotations; Haar invariance keeps the
    estimate unbiased.
    """
    if int(samples) < 1:
        raise PreconditionError(f"samples must be >= 1, got {samples!r}")
    if xi.n != n:
        raise InvalidDimensionError(f"tensor acts on su({xi.n}), twirl asked for su({n})")
    rng = make_rng(seed)
    wh_rotations = adjoint_rotation(weyl_heisenberg(n))
    c = transport(xi.c, wh_rotations)
    total = np.zeros_like(c)
    done = 0
    while done < samples:
        size = min(int(batch), int(samples) - done)
        R = adjoint_rotation(haar_unitary(n, rng, count=size))
        total += size * transport(c, R)
        done += size
        logger.debug("twirl: %d/%d Haar samples", done, samples)
    return BilinearMapTensor(n, transport(total / samples, wh_rotations))


def equivariance_defect(xi: BilinearMapTensor, probes: int = 100, seed: Seed = 0) -> float:
    """max_g |transport(c, R_g) - c| / |c| over fresh Haar probes; 0 for the zero tensor."""
    scale = xi.norm()
    if scale == 0.0:
        return 0.0
    R = adjoint_rotation(haar_unitary(xi.n, make_rng(seed), count=int(probes)))
    worst = max(float(np.linalg.norm(transport(xi.c, Rg) - xi.c)) for Rg in R)
    return worst / scale


def bracket_line_residual(xi: BilinearMapTensor, reference_norm: float | None = None) -> tuple[float, float]:
    """(scale, residual): least-squares multiple of f and the remainder relative to reference_norm."""
    f = bracket_tensor(xi.n).c
    scale = float(np.vdot(f, xi.c) / np.vdot(f, f))
    rest = float(np.linalg.norm(xi.c - scale * f))
    ref = xi.norm() if reference_norm is None else float(reference_norm)
    return scale, (rest / ref if ref > 0.0 else 0.0)


# -----------------------------
# Commutator factorisation
# -----------------------------
@dataclass(frozen=True, eq=False)
class Factorization:
    """Xi_L = [L, T(.)] with T = -i S in coefficients."""

    n: int
    S: np.ndarray
    residual: float

    def apply(self, X) -> np.ndarray:
        """Complex-linear: X = A + iB with A, B Hermitian maps to T(A) + i T(B)."""
        basis = standard_basis(self.n)
        X = as_matrix(X, "X")
        A = 0.5 * (X + dagger(X))
        B = -0.5j * (X - dagger(X))

        def T(Y):
            return -1j * from_coefficients(self.S @ coefficients(Y, basis), basis)

        return T(A) + 1j * T(B)


def _section_matrix(xi_L, n: int) -> np.ndarray:
    if callable(xi_L):
        return coefficient_matrix(xi_L, standard_basis(n))
    M = np.asarray(xi_L, dtype=np.float64)
    d = n * n - 1
    if M.shape != (d, d):
        raise InvalidDimensionError(f"linear map on su({n}) needs shape {(d, d)}, got {M.shape}")
    return M


def factorization_residual(xi_L, L) -> Factorization:
    """Least-squares T minimising |Xi_L(rho) - [L, T(rho)]| over a basis of rho."""
    L = require_hermitian(L, "L")
    n = L.shape[0]
    M = ad_matrix(L)
    if float(np.linalg.norm(M)) <= DEGENERATE_TOL:
        raise DegenerateChannelError("ad_L vanishes identically (L is a multiple of the identity)")
    Xi = _section_matrix(xi_L, n)
    gram = M.T @ M
    regulariser = gram + RIDGE * float(np.linalg.norm(gram, 2)) * np.eye(gram.shape[0])
    S = np.linalg.solve(regulariser, M.T @ Xi)
    # one refinement sweep removes the ridge bias on Im(ad_L)
    S = S + np.linalg.solve(regulariser, M.T @ (Xi - M @ S))
    scale = float(np.linalg.norm(Xi))
    residual = float(np.linalg.norm(Xi - M @ S)) / scale if scale > 0.0 else 0.0
    return Factorization(n=n, S=S, residual=residual)


# -----------------------------
# Uniqueness on Im(ad_L)
# -----------------------------
@dataclass(frozen=True)
class BlockFit:
    eigenvalues: tuple[float, float]
    dim: int
    scalar: float
    lamb: float
    residual: float


@dataclass(frozen=True)
class UniquenessReport:
    n: int
    candidates: int
    blocks: list[list[BlockFit]] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max((fit.residual for fits in self.blocks for fit in fits), default=0.0)

    def block_scalars(self) -> np.ndarray:
        """(candidates, blocks) array of symmetric-part scalars."""
        return np.array([[fit.scalar for fit in fits] for fits in self.blocks])

    @property
    def single_family(self) -> bool:
        scalars = self.block_scalars()
        if scalars.size == 0:
            return True
        spread = np.max(scalars, axis=1) - np.min(scalars, axis=1)
        scale = np.maximum(np.max(np.abs(scalars), axis=1), 1.0)
        return bool(np.all(spread <= 1e-8 * scale))


def _block_projectors(L: np.ndarray) -> list[tuple[tuple[float, float], np.ndarray]]:
    values, U, clusters = eigen_clusters(L)
    basis = standard_basis(L.shape[0])
    projectors = [U[:, group] @ dagger(U[:, group]) for group in clusters]
    out = []
    for p in range(len(clusters)):
        for q in range(p + 1, len(clusters)):
            Pp, Pq = projectors[p], projectors[q]
            Pi = coefficient_matrix(lambda X, Pp=Pp, Pq=Pq: Pp @ X @ Pq + Pq @ X @ Pp, basis)
            eig = (float(values[clusters[p][0]]), float(values[clusters[q][0]]))
            out.append((eig, Pi))
    return out


def restricted_fit(C: np.ndarray, L) -> list[BlockFit]:
    """Fit a coefficient-space map, block by block on Im(ad_L), to a D with D = -M_L^2.

    The residual is the distance of the whole block to that line; b records the
    antisymmetric part along M_L for reference only.
    """
    L = require_hermitian(L, "L")
    M = ad_matrix(L)
    D = -M @ M
    fits = []
    for eig, Pi in _block_projectors(L):
        block = Pi @ C @ Pi
        sym = 0.5 * (block + block.T)
        anti = 0.5 * (block - block.T)
        Dp = Pi @ D @ Pi
        Mp = M @ Pi
        a = float(np.vdot(Dp, sym) / np.vdot(Dp, Dp))
        b = float(np.vdot(Mp, anti) / np.vdot(Mp, Mp))
        norm = float(np.linalg.norm(block))
        residual = float(np.linalg.norm(block - a * Dp)) / norm if norm > 0.0 else 0.0
        fits.append(BlockFit(eig, int(round(np.trace(Pi))), a, b, residual))
    return fits


def isotropy_commutant(L) -> np.ndarray:
    """Basis (k, d, d) of coefficient maps commuting with ad_Y for every Y in the centraliser of L."""
    L = require_hermitian(L, "L")
    basis = standard_basis(L.shape[0])
    M = ad_matrix(L, basis)
    d = M.shape[0]
    centraliser = null_space(M, rcond=KERNEL_TOL)
    eye = np.eye(d)
    constraints = []
    for y in centraliser.T:
        My = ad_matrix(from_coefficients(y, basis), basis)
        constraints.append(np.kron(My, eye) - np.kron(eye, My.T))
    if not constraints:
        return np.eye(d * d).reshape(d * d, d, d)
    kernel = null_space(np.vstack(constraints), rcond=KERNEL_TOL)
    return kernel.T.reshape(-1, d, d)


def uniqueness_check(n: int, L, samples: int = 20, seed: Seed = 0) -> UniquenessReport:
    """Random candidates [L, K [L, .]] with K a symmetric element of the isotropy commutant, fitted per Im(ad_L) block."""
    L = require_hermitian(L, "L")
    if L.shape != (n, n):
        raise InvalidDimensionError(f"L has shape {L.shape}, expected {(n, n)}")
    if float(np.linalg.norm(ad_matrix(L))) <= DEGENERATE_TOL:
        raise DegenerateChannelError("ad_L vanishes identically (L is a multiple of the identity)")
    rng = make_rng(seed)
    M = ad_matrix(L)
    commutant = isotropy_commutant(L)
    logger.debug("uniqueness: n=%d, commutant dimension %d, %d Im(ad_L) blocks", n, len(commutant), len(_block_projectors(L)))
    reports = []
    for _ in range(int(samples)):
        K = np.einsum("k,kij->ij", rng.standard_normal(len(commutant)), commutant)
        # M K M is symmetric iff K is; the commutant is closed under transpose
        K = 0.5 * (K + K.T)
        reports.append(restricted_fit(M @ K @ M, L))
    return UniquenessReport(n=n, candidates=int(samples), blocks=reports)


# -----------------------------
# Bounds and spectra
# -----------------------------
@dataclass(frozen=True)
class CurvatureReport:
    n: int
    trials: int
    max_ratio: float

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1.0 + CURVATURE_SLACK


def curvature_ratios(L, rho) -> np.ndarray:
    """|[L, [L, rho]]| / (2 |L|^2 |rho|), batched over leading axes."""
    L = np.asarray(L, dtype=np.complex128)
    rho = np.asarray(rho, dtype=np.complex128)
    inner = L @ rho - rho @ L
    outer = L @ inner - inner @ L
    num = np.linalg.norm(outer, axis=(-2, -1))
    den = 2.0 * np.linalg.norm(L, axis=(-2, -1)) ** 2 * np.linalg.norm(rho, axis=(-2, -1))
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0.0)


def curvature_bound_check(n: int, trials: int, seed: Seed) -> CurvatureReport:
    rng = make_rng(seed)
    L = random_hermitian(n, rng, count=int(trials))
    rho = random_density(n, rng, count=int(trials))
    ratios = curvature_ratios(L, rho)
    return CurvatureReport(n=n, trials=int(trials), max_ratio=float(np.max(ratios)) if ratios.size else 0.0)


def ad_squared_spectrum(L, basis=None) -> np.ndarray:
    """Eigenvalues, descending, of the coefficient matrix of [L, [L, .]]."""
    M = ad_matrix(L, basis)
    return np.sort(np.linalg.eigvalsh(-M @ M))[::-1]


def matrix_exponential_oracle(generator, t: float) -> np.ndarray:
    G = np.asarray(generator)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise InvalidDimensionError(f"generator must be square, got shape {G.shape}")
    return expm(float(t) * G)


def vec(X) -> np.ndarray:
    return np.asarray(X, dtype=np.complex128).reshape(-1, order="F")


def unvec(v, n: int) -> np.ndarray:
    return np.asarray(v, dtype=np.complex128).reshape((n, n), order="F")


def liouvillian(H, channels: Sequence[ChannelSpec]) -> np.ndarray:
    """n^2 x n^2 matrix of the GKSL generator acting on column-stacked rho."""
    H = require_hermitian(H, "H")
    n = H.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    out = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for channel in channels:
        if channel.n != n:
            raise InvalidDimensionError(f"channel {channel.label or '?'} has dimension {channel.n}, H has {n}")
        L = channel.L
        LdL = dagger(L) @ L
        out = out + channel.gamma * (np.kron(L.conj(), L) - 0.5 * np.kron(eye, LdL) - 0.5 * np.kron(LdL.T, eye))
    return out


def fit_decay_rates(times, values, floor: float = 1e-300) -> np.ndarray:
    """Exponential rates k in |v(t)| ~ exp(-k t) by log-linear least squares, one per column."""
    times = np.asarray(times, dtype=np.float64)
    values = np.abs(np.asarray(values, dtype=np.float64))
    squeeze = values.ndim == 1
    values = values.reshape(values.shape[0], -1)
    rates = np.full(values.shape[1], np.nan)
    for j in range(values.shape[1]):
        column = values[:, j]
        if np.all(column > floor):
            rates[j] = -np.polyfit(times, np.log(column), 1)[0]
    return rates[0] if squeeze else rates


@dataclass(frozen=True)
class LadderDefect:
    upper_block: float
    full: float
    oracle: float


def ladder_identity_defect(rho) -> LadderDefect:
    """Measure [l1, [l1, rho]] against 2(rho - swap12 rho swap12) on the upper 2x2 block and on the full matrix."""
    rho = as_matrix(rho, "rho")
    if rho.shape != (3, 3):
        raise InvalidDimensionError(f"the ladder identity is stated for qutrits, got shape {rho.shape}")
    l1 = np.array(standard_basis(3)[0])
    swap = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=np.complex128)
    inner = l1 @ rho - rho @ l1
    double = l1 @ inner - inner @ l1
    stated = 2.0 * (rho - swap @ rho @ swap)
    P = np.diag([1.0, 1.0, 0.0]).astype(np.complex128)
    expanded = P @ rho + rho @ P - 2.0 * l1 @ rho @ l1
    return LadderDefect(
        upper_block=float(np.max(np.abs((double - stated)[:2, :2]))),
        full=float(np.max(np.abs(double - stated))),
        oracle=float(np.max(np.abs(double - expanded))),
    )
