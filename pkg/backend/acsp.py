"""Adjoint-coupled semidirect product (ACSP) on SU(n) x su(n)^m.

Generators are stored as Hermitian matrices; the Lie-algebra element is
xi = -iH and the factor -i is applied where it is used. The advected variable
is not integrated on its own: alpha_k = (gamma_k / 2)[rho, L_k] is re-derived
from rho whenever the reduced field is evaluated.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from backend.channels import ChannelSpec, cartesian_decompose, mixed_term
from backend.errors import InvalidDimensionError, PreconditionError
from backend.liealg import HERMITIAN_TOL, as_matrix, hermiticity_defect, require_hermitian, same_shape


@dataclass(frozen=True, eq=False)
class AdjointTuple:
    """Element (v_1, ..., v_m) of V = su(n)^m, stored as an (m, n, n) array."""

    components: np.ndarray

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=np.complex128)
        if comps.ndim == 2:
            comps = comps[None]
        if comps.ndim != 3 or comps.shape[0] < 1 or comps.shape[1] != comps.shape[2]:
            raise InvalidDimensionError(f"adjoint tuple needs shape (m, n, n) with m >= 1, got {comps.shape}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def of(cls, *matrices) -> "AdjointTuple":
        return cls(np.stack([as_matrix(M, f"component {k}") for k, M in enumerate(matrices)]))

    @property
    def n(self) -> int:
        return int(self.components.shape[1])

    def __len__(self) -> int:
        return int(self.components.shape[0])

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.components)

    def __getitem__(self, index: int) -> np.ndarray:
        return self.components[index]


@dataclass(frozen=True, eq=False)
class ACSPSystem:
    H: np.ndarray
    lindblads: AdjointTuple
    rates: tuple[float, ...]

    def __post_init__(self):
        H = require_hermitian(self.H, "H")
        lindblads = self.lindblads if isinstance(self.lindblads, AdjointTuple) else AdjointTuple(self.lindblads)
        rates = tuple(float(g) for g in self.rates)
        if len(rates) != len(lindblads):
            raise PreconditionError(f"{len(lindblads)} Lindblad operators but {len(rates)} rates")
        if any(not np.isfinite(g) or g < 0.0 for g in rates):
            raise PreconditionError(f"rates must be finite and >= 0, got {rates}")
        if lindblads.n != H.shape[0]:
            raise InvalidDimensionError(f"H has dimension {H.shape[0]}, Lindblad operators have {lindblads.n}")
        for k, L in enumerate(lindblads):
            defect = hermiticity_defect(L)
            if defect > HERMITIAN_TOL:
                raise PreconditionError(f"Lindblad operator {k} is not Hermitian (|L - L^dag|_max = {defect:.3e})")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "lindblads", lindblads)
        object.__setattr__(self, "rates", rates)

    @classmethod
    def from_channels(cls, H, channels: Sequence[ChannelSpec]) -> "ACSPSystem":
        H = as_matrix(H, "H")
        if not channels:
            return cls(H, AdjointTuple(np.zeros((1,) + H.shape, dtype=np.complex128)), (0.0,))
        return cls(H, AdjointTuple.of(*(c.L for c in channels)), tuple(c.gamma for c in channels))

    @property
    def n(self) -> int:
        return int(self.H.shape[0])

    def channels(self) -> list[ChannelSpec]:
        return [ChannelSpec(L, g, f"L{k + 1}") for k, (L, g) in enumerate(zip(self.lindblads, self.rates))]


def _as_tuple(v) -> AdjointTuple:
    return v if isinstance(v, AdjointTuple) else AdjointTuple(v)


def _check_dim(xi: np.ndarray, v: AdjointTuple) -> None:
    if xi.shape != (v.n, v.n):
        raise InvalidDimensionError(f"generator has shape {xi.shape}, tuple components are {v.n}x{v.n}")


# -----------------------------
# Actions, torsion and diamond
# -----------------------------
def left_action(xi, v) -> AdjointTuple:
    """xi . v = ([xi, v_1], ..., [xi, v_m])."""
    xi = as_matrix(xi, "xi")
    v = _as_tuple(v)
    _check_dim(xi, v)
    return AdjointTuple(xi @ v.components - v.components @ xi)


def right_action(v, xi) -> AdjointTuple:
    """v . xi = ([v_1, xi], ..., [v_m, xi])."""
    xi = as_matrix(xi, "xi")
    v = _as_tuple(v)
    _check_dim(xi, v)
    return AdjointTuple(v.components @ xi - xi @ v.components)


def torsion(xi, v) -> AdjointTuple:
    """K(xi, v) = xi . v - v . xi = 2[xi, v_k] componentwise."""
    xi = as_matrix(xi, "xi")
    v = _as_tuple(v)
    _check_dim(xi, v)
    return AdjointTuple(2.0 * (xi @ v.components - v.components @ xi))


def diamond(v, alpha) -> np.ndarray:
    """v <> alpha = sum_k [v_k, alpha_k]."""
    v = _as_tuple(v)
    alpha = _as_tuple(alpha)
    if v.components.shape != alpha.components.shape:
        raise InvalidDimensionError(
            f"diamond needs tuples of equal shape, got {v.components.shape} and {alpha.components.shape}"
        )
    return np.sum(v.components @ alpha.components - alpha.components @ v.components, axis=0)


def advected(rho, system: ACSPSystem) -> AdjointTuple:
    """alpha_k = (gamma_k / 2)[rho, L_k]."""
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (system.n, system.n):
        raise InvalidDimensionError(f"rho has shape {rho.shape}, system dimension is {system.n}")
    L = system.lindblads.components
    half_rates = 0.5 * np.asarray(system.rates)[:, None, None]
    return AdjointTuple(half_rates * (rho @ L - L @ rho))


def coadjoint_term(H, mu) -> np.ndarray:
    """-i[H, mu], the coadjoint motion generated by xi = -iH."""
    H, mu = same_shape(H, mu, ("H", "mu"))
    return -1j * (H @ mu - mu @ H)


def ep_vector_field(rho, system: ACSPSystem) -> np.ndarray:
    """Reduced Euler-Poincare field rho' = -i[H, rho] + L <> alpha(rho)."""
    return coadjoint_term(system.H, rho) + diamond(system.lindblads, advected(rho, system))


# -----------------------------
# Arbitrary channels through the Cartesian split
# -----------------------------
def decomposed_system(H, channels: Sequence[ChannelSpec]) -> ACSPSystem:
    """ACSP system whose Hermitian channels are the parts A_k, B_k of each L_k = A_k + iB_k."""
    H = as_matrix(H, "H")
    hermitian_parts = []
    rates = []
    for channel in channels:
        A, B = cartesian_decompose(channel.L)
        hermitian_parts.extend([0.5 * (A + A.conj().T), 0.5 * (B + B.conj().T)])
        rates.extend([channel.gamma, channel.gamma])
    if not hermitian_parts:
        return ACSPSystem.from_channels(H, [])
    return ACSPSystem(H, AdjointTuple.of(*hermitian_parts), tuple(rates))


def ep_general_field(rho, H, channels: Sequence[ChannelSpec], system: ACSPSystem | None = None) -> np.ndarray:
    """ACSP field of the Cartesian parts plus the mixed term; equals the GKSL generator for any L."""
    system = system or decomposed_system(H, channels)
    out = ep_vector_field(rho, system)
    for channel in channels:
        if channel.gamma and not channel.is_hermitian:
            out = out + channel.gamma * mixed_term(channel.L, rho)
    return out
