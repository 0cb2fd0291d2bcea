from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any

import numpy as np

from backend.acsp import ACSPSystem
from backend.bloch import from_bloch, to_bloch
from backend.channels import CHANNEL_CATALOG, ChannelSpec
from backend.dynamics import ComparisonReport, Trajectory, compare_generators, simulate
from backend.errors import ConfigError, LindbladError
from backend.liealg import from_coefficients, random_density, require_density, standard_basis

from ..state import DEFAULT_THRESHOLD, GENERATORS, ExperimentConfig

logger = logging.getLogger(__name__)

CONFIG_KEYS = frozenset(
    {
        "n",
        "hamiltonian",
        "channels",
        "initial",
        "t_final",
        "dt",
        "record_every",
        "renormalize",
        "contact",
        "z0",
        "generator",
        "seed",
        "output_path",
        "threshold",
    }
)
NAMED_STATES = ("plus_x", "ground", "excited", "maximally_mixed", "random")


class ExperimentService:
    """Turns JSON experiment files into ExperimentConfig objects and runs them."""

    def __init__(self, root: Path | None = None):
        self.root = root

    # ---- Loading
    def load(self, path: Path | str) -> ExperimentConfig:
        path = Path(path).expanduser()
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror or exc}") from exc
        return self.parse_text(text, base_dir=path.resolve().parent)

    def parse_text(self, text: str, base_dir: Path | None = None) -> ExperimentConfig:
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from exc
        return self.parse(payload, base_dir=base_dir)

    def parse(self, payload: Any, base_dir: Path | None = None) -> ExperimentConfig:
        if not isinstance(payload, dict):
            raise ConfigError("config", f"top level must be a JSON object, got {type(payload).__name__}")
        unknown = sorted(set(payload) - CONFIG_KEYS)
        if unknown:
            raise ConfigError(unknown[0], f"unknown key; allowed keys are {sorted(CONFIG_KEYS)}")

        n = self._integer(payload.get("n", 2), "n", minimum=2)
        seed = self._integer(payload.get("seed", 0), "seed", minimum=0)
        config = ExperimentConfig(
            n=n,
            seed=seed,
            t_final=self._number(payload.get("t_final", 1.0), "t_final", minimum=0.0),
            dt=self._number(payload.get("dt", 1e-3), "dt", minimum=0.0, strict=True),
            record_every=self._integer(payload.get("record_every", 1), "record_every", minimum=1),
            renormalize=self._flag(payload.get("renormalize", False), "renormalize"),
            contact=self._flag(payload.get("contact", False), "contact"),
            threshold=self._number(payload.get("threshold", DEFAULT_THRESHOLD), "threshold", minimum=0.0),
        )
        config.H = self._hamiltonian(payload.get("hamiltonian"), n)
        config.channels = self._channels(payload.get("channels", []), n)
        config.rho0, config.initial_bloch = self._initial(payload.get("initial", "maximally_mixed"), n, seed)

        generator = payload.get("generator", "gksl")
        if generator not in GENERATORS:
            raise ConfigError("generator", f"must be one of {list(GENERATORS)}, got {generator!r}")
        config.generator = generator
        non_hermitian = [c.label for c in config.channels if not c.is_hermitian]
        if generator == "ep" and non_hermitian:
            raise ConfigError("generator", f"'ep' needs Hermitian Lindblad operators; {non_hermitian} are not")
        if config.contact and non_hermitian:
            raise ConfigError("contact", f"the contact ledger needs Hermitian Lindblad operators; {non_hermitian} are not")

        if payload.get("z0") is not None:
            config.z0 = self._number(payload["z0"], "z0")
        output = payload.get("output_path")
        if output is not None:
            if not isinstance(output, str) or not output:
                raise ConfigError("output_path", "must be a non-empty string")
            output_path = Path(output).expanduser()
            if not output_path.is_absolute():
                output_path = (base_dir or self.root or Path.cwd()) / output_path
            config.output_path = output_path
        return config

    # ---- Running
    def simulate(self, config: ExperimentConfig) -> Trajectory:
        H = config.hamiltonian()
        if config.generator == "ep":
            system = ACSPSystem.from_channels(H, config.channels)
        else:
            system = (H, config.channels)
        z0 = None
        if config.contact:
            z0 = config.z0 if config.z0 is not None else 0.5 * float(np.vdot(config.rho0, config.rho0).real)
        logger.info("experiment: n=%d m=%d generator=%s contact=%s", config.n, config.m, config.generator, config.contact)
        return simulate(config.rho0, system, config.simulation(), z0=z0)

    def compare(self, config: ExperimentConfig) -> ComparisonReport:
        return compare_generators(config.rho0, config.hamiltonian(), config.channels, config.simulation())

    # ---- Field parsers
    def _hamiltonian(self, value: Any, n: int) -> np.ndarray:
        if value is None:
            return np.zeros((n, n), dtype=np.complex128)
        if isinstance(value, list):
            H = self._matrix(value, n, "hamiltonian")
        elif isinstance(value, dict):
            H = self._hamiltonian_spec(value, n)
        else:
            raise ConfigError("hamiltonian", "expected null, a matrix literal or an object")
        if np.max(np.abs(H - H.conj().T)) > 1e-10:
            raise ConfigError("hamiltonian", "matrix is not Hermitian")
        return H

    def _hamiltonian_spec(self, value: dict, n: int) -> np.ndarray:
        basis = standard_basis(n)
        if "vector" in value:
            self._only_keys(value, {"vector"}, "hamiltonian")
            omega = self._vector(value["vector"], basis.dim, "hamiltonian.vector")
            return from_coefficients(omega, basis)
        self._only_keys(value, {"preset", "omega"}, "hamiltonian")
        preset = value.get("preset")
        if preset != "omega_z":
            raise ConfigError("hamiltonian.preset", f"unknown preset {preset!r}; supported: 'omega_z'")
        omega = self._number(value.get("omega"), "hamiltonian.omega")
        return 0.5 * omega * np.array(basis[2])

    def _channels(self, value: Any, n: int) -> list[ChannelSpec]:
        if value is None:
            return []
        if not isinstance(value, list):
            raise ConfigError("channels", "expected a list")
        out: list[ChannelSpec] = []
        for i, item in enumerate(value):
            where = f"channels[{i}]"
            if not isinstance(item, dict):
                raise ConfigError(where, "expected an object")
            gamma = self._number(item.get("gamma"), f"{where}.gamma", minimum=0.0)
            if "name" in item:
                self._only_keys(item, {"name", "gamma"}, where)
                name = str(item["name"]).strip().lower()
                entry = CHANNEL_CATALOG.get(name)
                if entry is None:
                    raise ConfigError(f"{where}.name", f"unknown preset {item['name']!r}; choose one of {sorted(CHANNEL_CATALOG)}")
                if entry.n != n:
                    raise ConfigError(f"{where}.name", f"preset {name!r} acts on n={entry.n}, config has n={n}")
                out.extend(entry(gamma))
            elif "matrix" in item:
                self._only_keys(item, {"matrix", "gamma", "label"}, where)
                L = self._matrix(item["matrix"], n, f"{where}.matrix")
                out.append(ChannelSpec(L, gamma, str(item.get("label") or f"L{i + 1}")))
            else:
                raise ConfigError(where, "needs either 'name' or 'matrix'")
        return out

    def _initial(self, value: Any, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
        try:
            if isinstance(value, str):
                rho = self._named_state(value, n, seed)
                return rho, to_bloch(rho)
            if isinstance(value, list) and value and all(not isinstance(v, list) for v in value):
                r = self._vector(value, n * n - 1, "initial")
                return from_bloch(r), r
            if isinstance(value, list):
                rho = require_density(self._matrix(value, n, "initial"), "initial")
                return rho, to_bloch(rho)
        except ConfigError:
            raise
        except LindbladError as exc:
            raise ConfigError("initial", str(exc)) from exc
        raise ConfigError("initial", "expected a Bloch vector, a matrix literal or a named state")

    @staticmethod
    def _named_state(name: str, n: int, seed: int) -> np.ndarray:
        key = name.strip().lower()
        if key == "maximally_mixed":
            return np.eye(n, dtype=np.complex128) / n
        if key == "random":
            return random_density(n, seed)
        psi = np.zeros(n, dtype=np.complex128)
        if key == "plus_x":
            psi[0] = psi[1] = 1.0 / math.sqrt(2.0)
        elif key == "ground":
            psi[-1] = 1.0
        elif key == "excited":
            psi[0] = 1.0
        else:
            raise ConfigError("initial", f"unknown named state {name!r}; choose one of {list(NAMED_STATES)}")
        return np.outer(psi, psi.conj())

    # ---- Scalars and literals
    @staticmethod
    def _only_keys(value: dict, allowed: set[str], where: str) -> None:
        extra = sorted(set(value) - allowed)
        if extra:
            raise ConfigError(f"{where}.{extra[0]}", f"unknown key; allowed keys are {sorted(allowed)}")

    @staticmethod
    def _number(value: Any, field: str, minimum: float | None = None, strict: bool = False) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(field, f"expected a number, got {value!r}")
        x = float(value)
        if not math.isfinite(x):
            raise ConfigError(field, f"must be finite, got {value!r}")
        if minimum is not None and (x <= minimum if strict else x < minimum):
            raise ConfigError(field, f"must be {'>' if strict else '>='} {minimum:g}, got {value!r}")
        return x

    @staticmethod
    def _integer(value: Any, field: str, minimum: int | None = None) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(field, f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise ConfigError(field, f"must be >= {minimum}, got {value}")
        return int(value)

    @staticmethod
    def _flag(value: Any, field: str) -> bool:
        if not isinstance(value, bool):
            raise ConfigError(field, f"expected true or false, got {value!r}")
        return value

    def _vector(self, value: Any, length: int, field: str) -> np.ndarray:
        if not isinstance(value, list) or len(value) != length:
            raise ConfigError(field, f"expected a list of {length} numbers")
        return np.array([self._number(v, f"{field}[{i}]") for i, v in enumerate(value)], dtype=np.float64)

    def _matrix(self, value: Any, n: int, field: str) -> np.ndarray:
        """Nested rows of entries; an entry is a real number or a [re, im] pair."""
        if not isinstance(value, list) or len(value) != n:
            raise ConfigError(field, f"expected {n} rows")
        out = np.zeros((n, n), dtype=np.complex128)
        for i, row in enumerate(value):
            if not isinstance(row, list) or len(row) != n:
                raise ConfigError(f"{field}[{i}]", f"expected {n} entries")
            for j, entry in enumerate(row):
                where = f"{field}[{i}][{j}]"
                if isinstance(entry, list):
                    if len(entry) != 2:
                        raise ConfigError(where, "complex entries are [re, im] pairs")
                    out[i, j] = complex(self._number(entry[0], where), self._number(entry[1], where))
                else:
                    out[i, j] = self._number(entry, where)
        return out
