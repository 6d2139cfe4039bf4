"""Cross-module invariant suites, runnable without a test harness.

Four suites cover the load-bearing identities: the overall = detection *
conditional product law (with a post-update certainty leg), the reduction to
unmodified quantum values at unit detection, the exhaustive and randomized
CHSH strategy bound, and the GHZ LP feasibility certificate.  The random
instance generators here are shared with the pytest suite.

``run_self_test`` accepts an alternative Lueders updater so a deliberately
broken update can be injected to prove the suites have teeth; production code
never passes it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .correlations import (
    GHZScenario,
    brute_force_trichotomic_bound,
    ghz_local_model_search,
)
from .hidden_variables import enumerate_local_strategies, strategy_outcome_array
from .linalg import DensityOperator, SpectralObservable, validate_density_operator
from .measurement import (
    DetectionModel,
    GeneralizedObservable,
    Property,
    luders_update,
    probability_triple,
)

__all__ = [
    "SuiteResult",
    "SelfTestReport",
    "run_self_test",
    "random_density",
    "random_pure_density",
    "random_observable",
    "random_detection_model",
    "fundamental_equation_suite",
    "qm_reduction_suite",
    "chsh_bound_suite",
    "lp_certificate_suite",
]


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng: np.random.Generator, dim: int) -> DensityOperator:
    """Random full-rank mixed state from normalized squared Gaussians."""
    weights = rng.random(dim) + 1e-3
    weights /= weights.sum()
    u = random_unitary(rng, dim)
    return DensityOperator(u @ np.diag(weights) @ u.conj().T)


def random_pure_density(rng: np.random.Generator, dim: int) -> DensityOperator:
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return DensityOperator.from_state_vector(vec)


def random_observable(
    rng: np.random.Generator, dim: int, blocks: int | None = None
) -> SpectralObservable:
    """Random spectral observable with ``blocks`` distinct eigenvalues."""
    if blocks is None:
        blocks = int(rng.integers(2, dim + 1)) if dim > 1 else 1
    u = random_unitary(rng, dim)
    cuts = sorted(rng.choice(np.arange(1, dim), size=blocks - 1, replace=False)) if blocks > 1 else []
    bounds = [0, *cuts, dim]
    projectors = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        cols = u[:, lo:hi]
        projectors.append(cols @ cols.conj().T)
    eigenvalues = np.sort(rng.uniform(-3.0, 3.0, size=blocks))[::-1]
    while blocks > 1 and np.min(-np.diff(eigenvalues)) < 1e-6:
        eigenvalues = np.sort(rng.uniform(-3.0, 3.0, size=blocks))[::-1]
    return SpectralObservable(eigenvalues=tuple(eigenvalues), projectors=projectors)


def random_detection_model(
    rng: np.random.Generator, state_label, eigenvalues
) -> DetectionModel:
    table = {(state_label, float(ev)): float(rng.random()) for ev in eigenvalues}
    return DetectionModel(assignment=table)


def random_sigma(rng: np.random.Generator, eigenvalues) -> tuple[float, ...]:
    k = int(rng.integers(1, len(eigenvalues) + 1))
    chosen = rng.choice(len(eigenvalues), size=k, replace=False)
    return tuple(float(eigenvalues[i]) for i in sorted(chosen))


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    checks: int
    max_deviation: float
    detail: str = ""


@dataclass(frozen=True)
class SelfTestReport:
    suites: tuple[SuiteResult, ...]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)


def fundamental_equation_suite(
    n: int = 1000,
    seed: int = 20240401,
    luders: Callable = luders_update,
) -> SuiteResult:
    """overall = detection * conditional on random instances, plus the
    post-update certainty check Tr[rho' P(sigma)] = 1 on the yes branch."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    checks = 0
    for _ in range(n):
        dim = int(rng.integers(2, 9))
        rho = random_density(rng, dim)
        obs = GeneralizedObservable(random_observable(rng, dim))
        dm = random_detection_model(rng, "S", obs.base.eigenvalues)
        prop = Property(obs, random_sigma(rng, obs.base.eigenvalues))
        triple = probability_triple(rho, prop, dm)
        if triple.conditional is not None and triple.conditional > 1e-12:
            residual = triple.product_law_residual()
            if residual is None:
                return SuiteResult(
                    "fundamental-equation", False, checks, np.inf,
                    "detection undefined despite conditional > 1e-12",
                )
            worst = max(worst, residual)
            checks += 1
        if triple.overall > 1e-6:
            updated = luders(rho, prop, dm)
            report = validate_density_operator(updated.matrix)
            if not report.valid:
                return SuiteResult(
                    "fundamental-equation", False, checks, np.inf,
                    f"post-update state invalid: {report.describe()}",
                )
            p_sigma = obs.base.restriction(prop.sigma)
            certainty = float(np.trace(updated.matrix @ p_sigma).real)
            dev = abs(certainty - 1.0)
            if dev > 1e-10:
                return SuiteResult(
                    "fundamental-equation", False, checks, dev,
                    f"post-update probability of sigma is {certainty}, expected 1",
                )
            checks += 1
    passed = worst <= 1e-12
    return SuiteResult("fundamental-equation", passed, checks, worst)


def qm_reduction_suite(
    n: int = 200,
    seed: int = 20240402,
    luders: Callable = luders_update,
) -> SuiteResult:
    """At unit detection, probabilities and updates match plain quantum values."""
    rng = np.random.default_rng(seed)
    unit = DetectionModel.uniform(1.0)
    worst = 0.0
    checks = 0
    for _ in range(n):
        dim = int(rng.integers(2, 9))
        rho = random_density(rng, dim)
        obs = GeneralizedObservable(random_observable(rng, dim))
        prop = Property(obs, random_sigma(rng, obs.base.eigenvalues))
        p_sigma = obs.base.restriction(prop.sigma)
        born = float(np.trace(rho.matrix @ p_sigma).real)
        triple = probability_triple(rho, prop, unit)
        worst = max(worst, abs(triple.overall - born), abs(triple.conditional - born))
        checks += 1
        if born > 1e-6:
            updated = luders(rho, prop, unit)
            projected = p_sigma @ rho.matrix @ p_sigma
            standard = projected / float(np.trace(projected).real)
            worst = max(worst, float(np.max(np.abs(updated.matrix - standard))))
            checks += 1
    passed = worst <= 1e-10
    return SuiteResult("qm-reduction", passed, checks, worst)


def chsh_bound_suite(n_mixtures: int = 1000, seed: int = 20240403) -> SuiteResult:
    """Exhaustive strategy bound equals 2; random mixtures never exceed it."""
    bound = brute_force_trichotomic_bound("chsh")
    if bound.value != 2.0:
        return SuiteResult(
            "chsh-bound", False, 1, abs(bound.value - 2.0),
            f"exhaustive maximum is {bound.value}, expected 2",
        )
    strategies = enumerate_local_strategies(parties=2, settings=2)
    outcomes = strategy_outcome_array(strategies)
    e_ab = (outcomes[:, 0, 0] * outcomes[:, 1, 0]).astype(float)
    e_ac = (outcomes[:, 0, 0] * outcomes[:, 1, 1]).astype(float)
    e_db = (outcomes[:, 0, 1] * outcomes[:, 1, 0]).astype(float)
    e_dc = (outcomes[:, 0, 1] * outcomes[:, 1, 1]).astype(float)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_mixtures):
        w = rng.random(len(strategies))
        w /= w.sum()
        lhs = abs(w @ e_ab - w @ e_ac) + abs(w @ e_db + w @ e_dc)
        worst = max(worst, lhs - 2.0)
    passed = worst <= 1e-12
    return SuiteResult("chsh-bound", passed, n_mixtures + 1, max(worst, 0.0))


def lp_certificate_suite() -> SuiteResult:
    """GHZ local-model LP is feasible with tiny residuals, infeasible at unit efficiency."""
    scenario = GHZScenario.standard()
    found = ghz_local_model_search(scenario)
    if not found.feasible:
        return SuiteResult("lp-certificate", False, 1, np.inf, "expected feasible")
    worst = found.max_residual
    for got, want in zip(found.correlations, (1.0, -1.0, -1.0, -1.0)):
        worst = max(worst, abs(got - want))
    forced = ghz_local_model_search(scenario, min_efficiency=1.0)
    if forced.feasible:
        return SuiteResult(
            "lp-certificate", False, 2, worst,
            "unit-efficiency search unexpectedly feasible",
        )
    passed = worst <= 1e-9
    return SuiteResult("lp-certificate", passed, 2, worst)


def run_self_test(luders: Callable = luders_update) -> SelfTestReport:
    suites = (
        fundamental_equation_suite(luders=luders),
        qm_reduction_suite(luders=luders),
        chsh_bound_suite(),
        lp_certificate_suite(),
    )
    return SelfTestReport(suites=suites)
