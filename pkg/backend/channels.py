from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from backend.errors import InvalidDimensionError, PreconditionError
from backend.liealg import HERMITIAN_TOL, as_matrix, dagger, hermiticity_defect, require_hermitian, same_shape, standard_basis

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """One Lindblad operator with its rate; gamma multiplies L rho L^dag - 1/2 {L^dag L, rho}."""

    L: np.ndarray
    gamma: float
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "L", as_matrix(self.L, f"channel {self.label or '?'} L"))
        gamma = float(self.gamma)
        if not np.isfinite(gamma) or gamma < 0.0:
            raise PreconditionError(f"channel {self.label or '?'}: rate must be finite and >= 0, got {self.gamma!r}")
        object.__setattr__(self, "gamma", gamma)

    @property
    def n(self) -> int:
        return int(self.L.shape[0])

    @property
    def is_hermitian(self) -> bool:
        return hermiticity_defect(self.L) <= HERMITIAN_TOL


# -----------------------------
# Dissipators
# -----------------------------
def _double_commutator(L: np.ndarray, rho: np.ndarray) -> np.ndarray:
    inner = L @ rho - rho @ L
    return L @ inner - inner @ L


def dissipator_hermitian(L, gamma: float, rho) -> np.ndarray:
    """-(gamma/2) [L, [L, rho]] for Hermitian L."""
    L = require_hermitian(L, "L")
    L, rho = same_shape(L, rho, ("L", "rho"))
    if float(gamma) < 0.0:
        raise PreconditionError(f"rate must be >= 0, got {gamma!r}")
    return -0.5 * float(gamma) * _double_commutator(L, rho)


def dissipator_general(L, rho, gamma: float = 1.0) -> np.ndarray:
    """gamma * (L rho L^dag - 1/2 {L^dag L, rho}) for any L."""
    L, rho = same_shape(L, rho, ("L", "rho"))
    Ld = dagger(L)
    LdL = Ld @ L
    return float(gamma) * (L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL))


def cartesian_decompose(L) -> tuple[np.ndarray, np.ndarray]:
    """L = A + iB with A = (L + L^dag)/2 and B = (L - L^dag)/(2i), both Hermitian."""
    L = as_matrix(L, "L")
    Ld = dagger(L)
    return 0.5 * (L + Ld), (L - Ld) / 2j


def mixed_term(L, rho) -> np.ndarray:
    """Cross term -(i/2)[A, {B, rho}] + (i/2)[B, {A, rho}] of the Cartesian expansion."""
    A, B = cartesian_decompose(L)
    A, rho = same_shape(A, rho, ("L", "rho"))
    anti_b = B @ rho + rho @ B
    anti_a = A @ rho + rho @ A
    return -0.5j * (A @ anti_b - anti_b @ A) + 0.5j * (B @ anti_a - anti_a @ B)


def dissipator_decomposed(L, rho) -> np.ndarray:
    A, B = cartesian_decompose(L)
    A, rho = same_shape(A, rho, ("L", "rho"))
    return -0.5 * _double_commutator(A, rho) - 0.5 * _double_commutator(B, rho) + mixed_term(L, rho)


def gksl_generator(H, channels: Sequence[ChannelSpec], rho) -> np.ndarray:
    """-i[H, rho] + sum_j gamma_j (L_j rho L_j^dag - 1/2 {L_j^dag L_j, rho})."""
    H, rho = same_shape(H, rho, ("H", "rho"))
    out = -1j * (H @ rho - rho @ H)
    for channel in channels:
        if channel.n != rho.shape[0]:
            raise InvalidDimensionError(
                f"channel {channel.label or '?'} has dimension {channel.n}, state has {rho.shape[0]}"
            )
        if channel.gamma:
            out = out + dissipator_general(channel.L, rho, channel.gamma)
    return out


# -----------------------------
# Preset catalog
# -----------------------------
@dataclass(frozen=True)
class ChannelCatalogEntry:
    name: str
    n: int
    convention: str
    description: str
    build: Callable[[float], list[ChannelSpec]] = field(repr=False)

    def __call__(self, gamma: float) -> list[ChannelSpec]:
        return self.build(float(gamma))


def _gell_mann(n: int, index: int) -> np.ndarray:
    return np.array(standard_basis(n)[index])


def _dephasing(gamma: float) -> list[ChannelSpec]:
    return [ChannelSpec(SIGMA_Z, gamma, "dephasing")]


def _amplitude_damping(gamma: float) -> list[ChannelSpec]:
    return [ChannelSpec(SIGMA_MINUS, gamma, "amplitude_damping")]


def _depolarizing(gamma: float) -> list[ChannelSpec]:
    return [
        ChannelSpec(SIGMA_X, 0.5 * gamma, "depolarizing_x"),
        ChannelSpec(SIGMA_Y, 0.5 * gamma, "depolarizing_y"),
        ChannelSpec(SIGMA_Z, 0.5 * gamma, "depolarizing_z"),
    ]


def _qutrit(index: int, label: str) -> Callable[[float], list[ChannelSpec]]:
    def build(gamma: float) -> list[ChannelSpec]:
        return [ChannelSpec(_gell_mann(3, index), gamma, label)]

    return build


CHANNEL_CATALOG: dict[str, ChannelCatalogEntry] = {
    entry.name: entry
    for entry in (
        ChannelCatalogEntry(
            name="dephasing",
            n=2,
            convention="L = sigma_z at rate gamma; r_x, r_y decay at 2*gamma, r_z fixed",
            description="qubit pure dephasing (transverse relaxation)",
            build=_dephasing,
        ),
        ChannelCatalogEntry(
            name="depolarizing",
            n=2,
            convention="L_i = sigma_i (i = x, y, z), each at rate gamma/2; isotropic Bloch decay kappa = 2*gamma",
            description="qubit depolarizing, relaxation to I/2",
            build=_depolarizing,
        ),
        ChannelCatalogEntry(
            name="amplitude_damping",
            n=2,
            convention="L = sigma_minus = [[0,0],[1,0]] at rate gamma; r_x, r_y decay at gamma/2, r_z -> -1 at gamma",
            description="qubit energy relaxation toward the south pole",
            build=_amplitude_damping,
        ),
        ChannelCatalogEntry(
            name="qutrit_dephasing_l3",
            n=3,
            convention="L = lambda_3 at rate gamma; r_1, r_2 decay at 2*gamma, r_4..r_7 at gamma/2",
            description="qutrit dephasing between levels 1 and 2",
            build=_qutrit(2, "qutrit_dephasing_l3"),
        ),
        ChannelCatalogEntry(
            name="qutrit_dephasing_l8",
            n=3,
            convention="L = lambda_8 at rate gamma; r_4..r_7 decay at 3*gamma/2",
            description="qutrit dephasing of level 3 against levels 1 and 2",
            build=_qutrit(7, "qutrit_dephasing_l8"),
        ),
        ChannelCatalogEntry(
            name="qutrit_ladder_l1",
            n=3,
            convention="L = lambda_1 at rate gamma; drives rho toward states symmetric under exchange of levels 1 and 2",
            description="qutrit exchange (ladder) channel",
            build=_qutrit(0, "qutrit_ladder_l1"),
        ),
    )
}


def channel_preset(name: str, gamma: float) -> list[ChannelSpec]:
    key = str(name or "").strip().lower()
    if key not in CHANNEL_CATALOG:
        raise PreconditionError(f"unknown channel preset {name!r}; choose one of {sorted(CHANNEL_CATALOG)}")
    return CHANNEL_CATALOG[key](gamma)
