from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence, TypeVar

import numpy as np

from backend.acsp import ACSPSystem, decomposed_system, ep_general_field, ep_vector_field
from backend.brackets import transverse_norm
from backend.channels import ChannelSpec, gksl_generator
from backend.errors import IntegrationError, InvalidDimensionError, PreconditionError
from backend.liealg import coefficients, dagger, require_density, require_hermitian

logger = logging.getLogger(__name__)

PSD_FLOOR = -1e-6
GROWTH_LIMIT = 10.0
DRIFT_LOG_TOL = 1e-12
# ceil(t_final / dt) must not add a sliver step when the ratio lands a hair above an integer
STEP_COUNT_SLACK = 1e-9

State = TypeVar("State")
System = ACSPSystem | tuple[np.ndarray, Sequence[ChannelSpec]]


@dataclass(frozen=True)
class SimulationConfig:
    t_final: float = 1.0
    dt: float = 1e-3
    record_every: int = 1
    renormalize: bool = False

    def __post_init__(self):
        t_final = float(self.t_final)
        dt = float(self.dt)
        if not math.isfinite(t_final) or t_final < 0.0:
            raise PreconditionError(f"t_final must be finite and >= 0, got {self.t_final!r}")
        if not math.isfinite(dt) or dt <= 0.0:
            raise PreconditionError(f"dt must be finite and > 0, got {self.dt!r}")
        if int(self.record_every) != self.record_every or int(self.record_every) < 1:
            raise PreconditionError(f"record_every must be a positive integer, got {self.record_every!r}")
        object.__setattr__(self, "t_final", t_final)
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "record_every", int(self.record_every))
        object.__setattr__(self, "renormalize", bool(self.renormalize))

    @property
    def steps(self) -> int:
        return max(0, int(math.ceil(self.t_final / self.dt - STEP_COUNT_SLACK)))


@dataclass(frozen=True, eq=False)
class ContactState:
    """Extended state (rho, z); z is the purity-ledger coordinate."""

    rho: np.ndarray
    z: float

    def __add__(self, other: "ContactState") -> "ContactState":
        return ContactState(self.rho + other.rho, self.z + other.z)

    def __mul__(self, scale: float) -> "ContactState":
        return ContactState(self.rho * scale, self.z * scale)

    __rmul__ = __mul__

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.rho)) and math.isfinite(self.z))


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    purity: np.ndarray
    trace_error: np.ndarray
    min_eigenvalue: np.ndarray
    transverse_norm: np.ndarray
    contact_z: np.ndarray | None = None

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def n(self) -> int:
        return int(self.states.shape[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def bloch(self) -> np.ndarray:
        """(k, n*n - 1) Bloch vectors of the recorded states."""
        return coefficients(self.states)


@dataclass(frozen=True)
class ComparisonReport:
    max_deviation: float
    times_checked: int
    n: int
    m: int

    def passed(self, threshold: float) -> bool:
        return self.max_deviation <= float(threshold)

    def as_dict(self) -> dict:
        return {"max_deviation": self.max_deviation, "times_checked": self.times_checked, "n": self.n, "m": self.m}


# -----------------------------
# Integrator
# -----------------------------
def _finite(x) -> bool:
    if isinstance(x, ContactState):
        return x.is_finite()
    return bool(np.all(np.isfinite(x)))


def rk4_step(field: Callable[[State], State], state: State, dt: float, t: float = 0.0) -> State:
    """One classical fourth-order Runge-Kutta step of x' = field(x)."""
    if not dt > 0.0:
        raise PreconditionError(f"dt must be > 0, got {dt!r}")
    half = 0.5 * dt
    k1 = field(state)
    if not _finite(k1):
        logger.error("non-finite derivative at t=%.6g", t)
        raise IntegrationError("non-finite derivative", t)
    k2 = field(state + k1 * half)
    k3 = field(state + k2 * half)
    k4 = field(state + k3 * dt)
    if not (_finite(k2) and _finite(k3) and _finite(k4)):
        logger.error("non-finite derivative at t=%.6g", t + dt)
        raise IntegrationError("non-finite derivative", t + dt)
    return state + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0)


def _march(
    field: Callable[[State], State],
    state: State,
    config: SimulationConfig,
    after_step: Callable[[float, State], State] | None = None,
) -> Iterator[tuple[float, State]]:
    """Yield (t, state) at t = 0, every record_every steps, and at t_final."""
    steps = config.steps
    yield 0.0, state
    t = 0.0
    for k in range(1, steps + 1):
        h = config.dt if k < steps else config.t_final - (steps - 1) * config.dt
        state = rk4_step(field, state, h, t)
        t = config.t_final if k == steps else k * config.dt
        if after_step is not None:
            state = after_step(t, state)
        if k % config.record_every == 0 or k == steps:
            yield t, state


def _system_parts(system: System) -> tuple[np.ndarray, list[ChannelSpec], Callable[[np.ndarray], np.ndarray]]:
    if isinstance(system, ACSPSystem):
        return system.H, system.channels(), lambda rho: ep_vector_field(rho, system)
    try:
        H, channels = system
    except (TypeError, ValueError) as exc:
        raise PreconditionError("system must be an ACSPSystem or an (H, channels) pair") from exc
    H = require_hermitian(H, "H")
    channels = list(channels)
    return H, channels, lambda rho: gksl_generator(H, channels, rho)


def _hermitian_channels(channels: Sequence[ChannelSpec]) -> list[ChannelSpec]:
    for channel in channels:
        if not channel.is_hermitian:
            raise PreconditionError(
                f"the contact ledger needs Hermitian Lindblad operators; channel {channel.label or '?'} is not"
            )
    return list(channels)


def purity_loss_rate(rho, channels: Sequence[ChannelSpec]) -> float:
    """z' = -sum_k (gamma_k / 2) |[L_k, rho]|_HS^2."""
    rho = np.asarray(rho, dtype=np.complex128)
    total = 0.0
    for channel in channels:
        commuted = channel.L @ rho - rho @ channel.L
        total += 0.5 * channel.gamma * float(np.vdot(commuted, commuted).real)
    return -total


def contact_vector_field(system: ACSPSystem) -> Callable[[ContactState], ContactState]:
    channels = system.channels()

    def field(state: ContactState) -> ContactState:
        return ContactState(ep_vector_field(state.rho, system), purity_loss_rate(state.rho, channels))

    return field


# -----------------------------
# Trajectories
# -----------------------------
def _min_eigenvalue(rho: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[0])


def _guard(reference_norm: float, renormalize: bool) -> Callable[[float, np.ndarray], np.ndarray]:
    limit = GROWTH_LIMIT * max(reference_norm, 1e-300)

    def check(t: float, rho: np.ndarray) -> np.ndarray:
        norm = float(np.linalg.norm(rho))
        if norm > limit:
            logger.error("integration unstable at t=%.6g: |rho| = %.3e", t, norm)
            raise IntegrationError(f"state norm grew to {norm:.3e}, more than {GROWTH_LIMIT:g}x the initial norm", t)
        min_eig = _min_eigenvalue(rho)
        if min_eig < PSD_FLOOR:
            logger.error("positivity lost at t=%.6g: min eigenvalue %.3e", t, min_eig)
            raise IntegrationError(f"state left the PSD cone (min eigenvalue {min_eig:.3e} < {PSD_FLOOR:g})", t)
        if renormalize:
            trace = np.trace(rho).real
            logger.debug("renormalising trace %.16e at t=%.6g", trace, t)
            rho = rho / trace
        return rho

    return check


def simulate(
    rho0,
    system: System,
    config: SimulationConfig | None = None,
    z0: float | None = None,
) -> Trajectory:
    """Integrate rho' = F(rho) and record diagnostics.

    An ACSPSystem integrates the reduced Euler-Poincare field; an (H, channels)
    pair integrates the GKSL generator directly. With z0 the contact ledger
    z' = -sum (gamma_k / 2)|[L_k, rho]|^2 is integrated alongside.
    """
    config = config or SimulationConfig()
    rho0 = require_density(rho0, "rho0")
    H, channels, field = _system_parts(system)
    if H.shape != rho0.shape:
        raise InvalidDimensionError(f"rho0 has shape {rho0.shape}, H has shape {H.shape}")

    logger.info(
        "simulate: n=%d channels=%d steps=%d dt=%g generator=%s",
        rho0.shape[0],
        len(channels),
        config.steps,
        config.dt,
        "ep" if isinstance(system, ACSPSystem) else "gksl",
    )
    guard = _guard(float(np.linalg.norm(rho0)), config.renormalize)

    if z0 is None:
        marched = _march(field, rho0, config, guard)
        records = [(t, rho, None) for t, rho in marched]
    else:
        contact_system = system if isinstance(system, ACSPSystem) else ACSPSystem.from_channels(
            H, _hermitian_channels(channels)
        )

        def contact_guard(t: float, state: ContactState) -> ContactState:
            return ContactState(guard(t, state.rho), state.z)

        start = ContactState(rho0, float(z0))
        marched = _march(contact_vector_field(contact_system), start, config, contact_guard)
        records = [(t, state.rho, state.z) for t, state in marched]

    trajectory = _collect(records, channels, with_z=z0 is not None)
    drift = float(np.max(trajectory.trace_error))
    if drift > DRIFT_LOG_TOL and not config.renormalize:
        logger.info("trace drift %.3e left uncorrected (renormalize=false)", drift)
    logger.info("simulate: %d records, final purity %.12f, max trace drift %.3e", len(trajectory), trajectory.purity[-1], drift)
    return trajectory


def _collect(records: list, channels: Sequence[ChannelSpec], with_z: bool) -> Trajectory:
    times = np.array([t for t, _, _ in records], dtype=np.float64)
    states = np.stack([rho for _, rho, _ in records])
    purity = np.einsum("kij,kij->k", states.conj(), states).real
    trace_error = np.abs(np.trace(states, axis1=1, axis2=2).real - 1.0)
    min_eigenvalue = np.array([_min_eigenvalue(rho) for rho in states])
    transverse = np.array([[transverse_norm(c.L, rho) for c in channels] for rho in states]).reshape(len(records), len(channels))
    contact_z = np.array([z for _, _, z in records], dtype=np.float64) if with_z else None
    return Trajectory(times, states, purity, trace_error, min_eigenvalue, transverse, contact_z)


def simulate_contact(rho0, z0: float | None, H, L, gamma: float, config: SimulationConfig | None = None) -> Trajectory:
    """Single-channel contact flow; z0 defaults to 1/2 Tr(rho0^2)."""
    rho0 = require_density(rho0, "rho0")
    if z0 is None:
        z0 = 0.5 * float(np.vdot(rho0, rho0).real)
    system = ACSPSystem.from_channels(H, [ChannelSpec(require_hermitian(L, "L"), gamma, "L")])
    return simulate(rho0, system, config, z0=z0)


def compare_generators(
    rho0, H, channels: Sequence[ChannelSpec], config: SimulationConfig | None = None
) -> ComparisonReport:
    """Integrate the Euler-Poincare and GKSL fields with identical steps; report max |rho_EP - rho_GKSL|_max."""
    config = config or SimulationConfig()
    rho0 = require_density(rho0, "rho0")
    H = require_hermitian(H, "H")
    channels = list(channels)
    system = decomposed_system(H, channels)
    guard = _guard(float(np.linalg.norm(rho0)), config.renormalize)

    ep = _march(lambda rho: ep_general_field(rho, H, channels, system), rho0, config, guard)
    gksl = _march(lambda rho: gksl_generator(H, channels, rho), rho0, config, guard)
    worst = 0.0
    checked = 0
    for (_, a), (_, b) in zip(ep, gksl):
        worst = max(worst, float(np.max(np.abs(a - b))))
        checked += 1
    logger.info("compare: n=%d m=%d times=%d max deviation %.3e", rho0.shape[0], len(channels), checked, worst)
    return ComparisonReport(max_deviation=worst, times_checked=checked, n=int(rho0.shape[0]), m=len(channels))
