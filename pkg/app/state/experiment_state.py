from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from backend.channels import ChannelSpec
from backend.dynamics import SimulationConfig

GENERATORS = ("gksl", "ep")
DEFAULT_THRESHOLD = 1e-10


@dataclass
class ExperimentConfig:
    n: int = 2
    H: np.ndarray | None = None
    channels: list[ChannelSpec] = field(default_factory=list)
    rho0: np.ndarray | None = None
    initial_bloch: np.ndarray | None = None
    t_final: float = 1.0
    dt: float = 1e-3
    record_every: int = 1
    renormalize: bool = False
    contact: bool = False
    z0: float | None = None
    generator: str = "gksl"
    seed: int = 0
    output_path: Path | None = None
    threshold: float = DEFAULT_THRESHOLD

    @property
    def m(self) -> int:
        return len(self.channels)

    def hamiltonian(self) -> np.ndarray:
        if self.H is None:
            return np.zeros((self.n, self.n), dtype=np.complex128)
        return self.H

    def simulation(self) -> SimulationConfig:
        return SimulationConfig(
            t_final=self.t_final,
            dt=self.dt,
            record_every=self.record_every,
            renormalize=self.renormalize,
        )


@dataclass
class VerificationRequest:
    suite: str
    n: int = 2
    seed: int = 0
    trials: int | None = None


@dataclass
class PropertyResult:
    name: str
    passed: bool
    value: float
    threshold: float

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "value": float(self.value),
            "threshold": float(self.threshold),
        }
