from __future__ import annotations

import logging
from typing import Callable

import numpy as np

from backend.acsp import ACSPSystem, AdjointTuple, advected, diamond, ep_vector_field
from backend.bloch import analytic_dephasing, bloch_generator, depolarizing_kappa, from_bloch, qutrit_dephasing_rates
from backend.brackets import acsp_metric, contraction_rate, metriplectic_field, transverse_norm
from backend.channels import (
    CHANNEL_CATALOG,
    ChannelSpec,
    channel_preset,
    dissipator_decomposed,
    dissipator_general,
    gksl_generator,
)
from backend.dynamics import SimulationConfig, simulate
from backend.errors import ConfigError
from backend.liealg import Seed, commutator, make_rng, random_density, random_hermitian, standard_basis
from backend.verify import (
    BilinearMapTensor,
    ad_squared_spectrum,
    bracket_line_residual,
    curvature_bound_check,
    equivariance_defect,
    factorization_residual,
    fit_decay_rates,
    torsion_tensor,
    twirl,
    uniqueness_check,
)

from ..state import PropertyResult, VerificationRequest

logger = logging.getLogger(__name__)

SUITES = ("brackets", "equivariance", "bounds", "rates")
DEFAULT_TRIALS = {"brackets": 1_000, "equivariance": 20, "bounds": 10_000, "rates": 1}
TWIRL_SAMPLES = 10_000


class VerificationService:
    """Property suites over the backend; each property reports its extremal measured value."""

    def __init__(self, twirl_samples: int = TWIRL_SAMPLES):
        self.twirl_samples = int(twirl_samples)
        self._suites: dict[str, Callable[[int, int, Seed], list[PropertyResult]]] = {
            "brackets": self.brackets,
            "equivariance": self.equivariance,
            "bounds": self.bounds,
            "rates": self.rates,
        }

    def run(self, request: VerificationRequest) -> dict:
        suite = str(request.suite or "").strip().lower()
        if suite != "all" and suite not in self._suites:
            raise ConfigError("suite", f"unknown suite {request.suite!r}; choose one of {list(SUITES) + ['all']}")
        if int(request.n) < 2:
            raise ConfigError("n", f"must be >= 2, got {request.n}")
        if request.trials is not None and int(request.trials) < 1:
            raise ConfigError("trials", f"must be >= 1, got {request.trials}")

        names = SUITES if suite == "all" else (suite,)
        properties: list[PropertyResult] = []
        for name in names:
            trials = int(request.trials) if request.trials is not None else DEFAULT_TRIALS[name]
            logger.info("verify: suite=%s n=%d seed=%d trials=%d", name, request.n, request.seed, trials)
            results = self._suites[name](int(request.n), trials, int(request.seed))
            if suite == "all":
                results = [PropertyResult(f"{name}.{r.name}", r.passed, r.value, r.threshold) for r in results]
            properties.extend(results)

        failed = [p.name for p in properties if not p.passed]
        if failed:
            logger.warning("verify: failed properties %s", failed)
        return {
            "suite": suite,
            "n": int(request.n),
            "seed": int(request.seed),
            "passed": not failed,
            "properties": [p.as_dict() for p in properties],
        }

    # ---- brackets
    def brackets(self, n: int, trials: int, seed: Seed) -> list[PropertyResult]:
        rng = make_rng(seed)
        symmetry = 0.0
        worst_self = -np.inf
        metriplectic = 0.0
        ep = 0.0
        diamond_defect = 0.0
        contraction = 0.0
        strict = -np.inf
        decomposed = 0.0
        for _ in range(trials):
            H, L = random_hermitian(n, rng), random_hermitian(n, rng)
            X, Y = random_hermitian(n, rng), random_hermitian(n, rng)
            rho = random_density(n, rng)
            gamma = float(rng.uniform(0.1, 2.0))
            scale = max(1.0, float(np.linalg.norm(L)) ** 2)

            symmetry = max(symmetry, abs(acsp_metric(X, Y, L, gamma) - acsp_metric(Y, X, L, gamma)))
            worst_self = max(worst_self, acsp_metric(X, X, L, gamma))
            deviation = metriplectic_field(rho, H, L, gamma) - gksl_generator(H, [ChannelSpec(L, gamma)], rho)
            metriplectic = max(metriplectic, float(np.max(np.abs(deviation))) / scale)

            system = ACSPSystem.from_channels(H, [ChannelSpec(L, gamma)])
            pair = diamond(AdjointTuple.of(L), advected(rho, system)) + 0.5 * gamma * commutator(L, commutator(L, rho))
            diamond_defect = max(diamond_defect, float(np.max(np.abs(pair))) / scale)

            m = int(rng.integers(1, 4))
            channels = [ChannelSpec(random_hermitian(n, rng), float(rng.uniform(0.1, 2.0))) for _ in range(m)]
            multi = ACSPSystem.from_channels(H, channels)
            multi_scale = max(1.0, max(float(np.linalg.norm(c.L)) ** 2 for c in channels))
            ep = max(ep, float(np.max(np.abs(ep_vector_field(rho, multi) - gksl_generator(H, channels, rho)))) / multi_scale)

            lhs, rhs = contraction_rate(rho, L, gamma)
            contraction = max(contraction, abs(lhs - rhs))
            if transverse_norm(L, rho) > 1e-8:
                strict = max(strict, rhs)

            G = random_hermitian(n, rng) + 1j * random_hermitian(n, rng)
            general = dissipator_general(G, rho)
            decomposed = max(decomposed, float(np.max(np.abs(dissipator_decomposed(G, rho) - general))) / max(1.0, float(np.linalg.norm(G)) ** 2))

        strict = float(strict) if np.isfinite(strict) else 0.0
        return [
            PropertyResult("metric_symmetry", symmetry <= 1e-12, symmetry, 1e-12),
            PropertyResult("metric_nonpositive", worst_self <= 0.0, float(worst_self), 0.0),
            PropertyResult("metriplectic_equals_gksl", metriplectic <= 1e-13, metriplectic, 1e-13),
            PropertyResult("diamond_identity", diamond_defect <= 1e-14, diamond_defect, 1e-14),
            PropertyResult("ep_equals_gksl", ep <= 1e-13, ep, 1e-13),
            PropertyResult("contraction_identity", contraction <= 1e-12, contraction, 1e-12),
            PropertyResult("contraction_strict", strict < 0.0, strict, 0.0),
            PropertyResult("decomposed_dissipator", decomposed <= 1e-12, decomposed, 1e-12),
        ]

    # ---- equivariance
    def equivariance(self, n: int, trials: int, seed: Seed) -> list[PropertyResult]:
        rng = make_rng(seed)
        torsion = torsion_tensor(n)
        torsion_defect = equivariance_defect(torsion, probes=20, seed=rng)

        d = n * n - 1
        line = 0.0
        for _ in range(trials):
            c = rng.standard_normal((d, d, d))
            # only the antisymmetric invariants are multiples of the bracket once n >= 3
            xi = BilinearMapTensor(n, 0.5 * (c - c.transpose(1, 0, 2)))
            _, residual = bracket_line_residual(twirl(xi, n, self.twirl_samples, rng), reference_norm=xi.norm())
            line = max(line, residual)

        factor = 0.0
        for _ in range(5):
            L = random_hermitian(n, rng)
            factor = max(factor, factorization_residual(torsion.section(L), L).residual)

        L = np.array(standard_basis(n)[2])
        report = uniqueness_check(n, L, samples=10, seed=rng)
        results = [
            PropertyResult("torsion_equivariance_defect", torsion_defect <= 1e-12, torsion_defect, 1e-12),
            PropertyResult("twirl_bracket_line_residual", line <= 1e-2, line, 1e-2),
            PropertyResult("torsion_factorization_residual", factor <= 1e-6, factor, 1e-6),
            PropertyResult("restricted_map_residual", report.max_residual <= 1e-8, report.max_residual, 1e-8),
        ]
        if n == 2:
            scalars = report.block_scalars()
            spread = float(np.max(np.ptp(scalars, axis=1))) if scalars.size else 0.0
            results.append(PropertyResult("restricted_map_single_family", report.single_family, spread, 1e-8))
        return results

    # ---- bounds
    def bounds(self, n: int, trials: int, seed: Seed) -> list[PropertyResult]:
        rng = make_rng(seed)
        curvature = curvature_bound_check(n, trials, rng)
        lowest = min(float(ad_squared_spectrum(random_hermitian(n, rng))[-1]) for _ in range(10))
        return [
            PropertyResult("curvature_max_ratio", curvature.passed, curvature.max_ratio, 1.0 + 1e-12),
            PropertyResult("ad_squared_nonnegative", lowest >= -1e-10, lowest, -1e-10),
        ]

    # ---- rates
    def rates(self, n: int, trials: int, seed: Seed, gamma: float = 1.0) -> list[PropertyResult]:
        zero2 = np.zeros((2, 2), dtype=np.complex128)
        r0 = np.array([1.0, 0.0, 0.0])
        dephasing = simulate(from_bloch(r0), (zero2, channel_preset("dephasing", gamma)), SimulationConfig(t_final=3.0))
        expected = np.array([analytic_dephasing(r0, gamma, t) for t in dephasing.times])
        closed_form = float(np.max(np.abs(dephasing.bloch() - expected)))

        damping = simulate(from_bloch(r0), (zero2, channel_preset("amplitude_damping", gamma)), SimulationConfig(t_final=3.0, record_every=10))
        transverse = float(fit_decay_rates(damping.times, damping.bloch()[:, 0]))
        transverse_error = abs(transverse - 0.5 * gamma) / (0.5 * gamma)

        A, _ = bloch_generator(zero2, CHANNEL_CATALOG["depolarizing"](gamma))
        kappa = depolarizing_kappa(gamma)
        isotropy = float(np.max(np.abs(A + kappa * np.eye(3))))
        kappa_error = abs(kappa - 2.0 * gamma)

        spectrum = ad_squared_spectrum(np.array(standard_basis(3)[2]))
        spectrum_error = float(np.max(np.abs(spectrum - np.array([4, 4, 1, 1, 1, 1, 0, 0]))))

        rho0 = random_density(3, seed)
        qutrit = simulate(rho0, (np.zeros((3, 3)), channel_preset("qutrit_dephasing_l3", gamma)), SimulationConfig(t_final=1.0, record_every=10))
        fitted = fit_decay_rates(qutrit.times, qutrit.bloch())
        predicted = qutrit_dephasing_rates("l3", gamma)
        qutrit_error = max(abs(fitted[k - 1] - rate) / max(rate, 1.0) for k, rate in predicted.items())

        return [
            PropertyResult("dephasing_closed_form", closed_form <= 1e-7, closed_form, 1e-7),
            PropertyResult("amplitude_damping_transverse_rate", transverse_error <= 1e-4, transverse_error, 1e-4),
            PropertyResult("depolarizing_isotropy", isotropy <= 1e-12, isotropy, 1e-12),
            PropertyResult("depolarizing_kappa", kappa_error <= 1e-12, kappa_error, 1e-12),
            PropertyResult("qutrit_l3_ad_squared_spectrum", spectrum_error <= 1e-10, spectrum_error, 1e-10),
            PropertyResult("qutrit_l3_fitted_rates", qutrit_error <= 1e-4, qutrit_error, 1e-4),
        ]
