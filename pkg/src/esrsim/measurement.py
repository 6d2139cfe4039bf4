"""Detection-conditioned measurement calculus.

A quantum observable is extended with a no-registration outcome ``a0``; every
measurement then carries three probabilities bound by the product law

    overall = detection * conditional

where ``conditional`` is the Born value among detected objects and
``detection`` is derived as overall/conditional (it reduces to the
per-eigenvalue detection probability whenever that is constant on the outcome
subset).  Detection probabilities per eigenvalue are free empirical parameters
supplied by a :class:`DetectionModel`; the property-level effect is assembled
as T = sum_{ev in sigma} p_detect(state, ev) * P_ev, which drives both the
overall probability Tr[rho T] and the generalized Lueders update
T rho T^dagger / Tr[T rho T^dagger].  A measurement returning the
no-registration outcome ends the trajectory: no post-a0 state update is
defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping

import numpy as np

from .linalg import (
    DEFAULT_POLICY,
    DensityOperator,
    NumericPolicy,
    SpectralObservable,
    as_complex_matrix,
    asymmetry,
    validate_spectral_observable,
)

__all__ = [
    "GeneralizedObservable",
    "Property",
    "DetectionModel",
    "Effect",
    "ProbabilityTriple",
    "build_effect",
    "probability_triple",
    "no_detection_probability",
    "detection_mass",
    "outcome_distribution",
    "luders_update",
    "unitary_evolve",
    "sample_outcome",
    "sample_outcomes",
    "DEFAULT_STATE_LABEL",
    "NO_REGISTRATION",
]

DEFAULT_STATE_LABEL = "S"
NO_REGISTRATION = "a0"


def _clamp_probability(x: float, tol: float, what: str) -> float:
    """Clamp roundoff excursions outside [0, 1]; reject anything larger."""
    if -tol <= x < 0.0:
        return 0.0
    if 1.0 < x <= 1.0 + tol:
        return 1.0
    if 0.0 <= x <= 1.0:
        return float(x)
    raise ValueError(f"{what} = {x} is outside [0, 1]")


@dataclass(frozen=True, eq=False)
class GeneralizedObservable:
    """A validated spectral observable plus the distinguished no-registration token.

    The value set is the base spectrum together with ``a0_label``, which must
    not collide with any eigenvalue.
    """

    base: SpectralObservable
    a0_label: Hashable = NO_REGISTRATION

    def __post_init__(self):
        report = validate_spectral_observable(self.base)
        if not report.valid:
            raise ValueError(f"base observable invalid: {report.describe()}")
        if any(self.a0_label == ev for ev in self.base.eigenvalues):
            raise ValueError(
                f"no-registration label {self.a0_label!r} collides with an eigenvalue"
            )

    @property
    def dimension(self) -> int:
        return self.base.dimension

    @property
    def outcome_set(self) -> tuple:
        return self.base.eigenvalues + (self.a0_label,)


@dataclass(frozen=True, eq=False)
class Property:
    """A generalized observable with an outcome subset sigma (a0 excluded)."""

    observable: GeneralizedObservable
    sigma: tuple[float, ...]

    def __init__(self, observable: GeneralizedObservable, sigma):
        values = tuple(float(x) for x in sigma)
        spectrum = observable.base.eigenvalues
        for ev in values:
            if ev not in spectrum:
                raise ValueError(f"sigma value {ev} not in spectrum {spectrum}")
        if len(set(values)) != len(values):
            raise ValueError("sigma contains duplicates")
        object.__setattr__(self, "observable", observable)
        object.__setattr__(self, "sigma", values)


@dataclass(frozen=True, eq=False)
class DetectionModel:
    """Per-eigenvalue detection probabilities keyed by (state label, eigenvalue).

    Unlisted pairs fall back to ``default_value``.  Detection is an empirical
    parameter of the model, so the table is plain data; the only requirement
    is that every value lies in [0, 1].
    """

    assignment: Mapping[tuple[Hashable, float], float] = field(default_factory=dict)
    default_value: float = 1.0

    def __post_init__(self):
        normalized = {}
        for (label, ev), value in dict(self.assignment).items():
            v = float(value)
            if not 0.0 <= v <= 1.0:
                raise ValueError(
                    f"detection probability {v} for ({label!r}, {ev}) outside [0, 1]"
                )
            normalized[(label, float(ev))] = v
        if not 0.0 <= float(self.default_value) <= 1.0:
            raise ValueError(f"default detection {self.default_value} outside [0, 1]")
        object.__setattr__(self, "assignment", normalized)
        object.__setattr__(self, "default_value", float(self.default_value))

    def value(self, state_label: Hashable, eigenvalue: float) -> float:
        return self.assignment.get((state_label, float(eigenvalue)), self.default_value)

    @classmethod
    def uniform(cls, value: float) -> "DetectionModel":
        return cls(assignment={}, default_value=value)

    @classmethod
    def per_state(cls, values: Mapping[Hashable, float], eigenvalues) -> "DetectionModel":
        """Expand a per-state table to all listed eigenvalues."""
        table = {
            (label, float(ev)): float(v)
            for label, v in values.items()
            for ev in eigenvalues
        }
        return cls(assignment=table)

    @classmethod
    def per_eigenvalue(
        cls, values: Mapping[float, float], state_label: Hashable = DEFAULT_STATE_LABEL
    ) -> "DetectionModel":
        table = {(state_label, float(ev)): float(v) for ev, v in values.items()}
        return cls(assignment=table)


@dataclass(frozen=True, eq=False)
class Effect:
    """Positive operator bounded between 0 and the identity."""

    matrix: np.ndarray

    def __init__(self, matrix, policy: NumericPolicy = DEFAULT_POLICY):
        a = as_complex_matrix(matrix)
        asym = asymmetry(a)
        if asym > policy.structural_tol:
            raise ValueError(f"effect not Hermitian: asymmetry {asym:.3e}")
        eigenvalues = np.linalg.eigvalsh((a + a.conj().T) / 2.0)
        lo = float(np.min(eigenvalues))
        hi = float(np.max(eigenvalues))
        if lo < -policy.structural_tol or hi > 1.0 + policy.structural_tol:
            raise ValueError(f"effect spectrum [{lo:.3e}, {hi:.3e}] not within [0, 1]")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)


@dataclass(frozen=True)
class ProbabilityTriple:
    """(overall, detection, conditional) bound by overall = detection * conditional.

    ``detection`` and ``conditional`` are ``None`` when the respective ratio is
    undefined (denominator at or below the arithmetic tolerance).
    """

    overall: float
    detection: float | None
    conditional: float | None

    def __post_init__(self):
        tol = DEFAULT_POLICY.arithmetic_tol
        object.__setattr__(
            self, "overall", _clamp_probability(float(self.overall), tol, "overall")
        )
        for name in ("detection", "conditional"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, _clamp_probability(float(v), tol, name))
        if self.detection is not None and self.conditional is not None:
            residual = abs(self.overall - self.detection * self.conditional)
            if residual > tol:
                raise ValueError(
                    f"product law violated: |overall - detection*conditional| = {residual:.3e}"
                )

    def product_law_residual(self) -> float | None:
        if self.detection is None or self.conditional is None:
            return None
        return abs(self.overall - self.detection * self.conditional)


def _check_dimensions(rho: DensityOperator, obs: GeneralizedObservable) -> None:
    if rho.dimension != obs.dimension:
        raise ValueError(
            f"dimension mismatch: state is {rho.dimension}-dim, "
            f"observable is {obs.dimension}-dim"
        )


def build_effect(
    state_label: Hashable,
    prop: Property,
    dm: DetectionModel,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> Effect:
    """Assemble T = sum_{ev in sigma} p_detect(state, ev) P_ev."""
    base = prop.observable.base
    t = np.zeros((base.dimension, base.dimension), dtype=complex)
    for ev in prop.sigma:
        t = t + dm.value(state_label, ev) * base.projector_for(ev)
    return Effect(t, policy)


def probability_triple(
    rho: DensityOperator,
    prop: Property,
    dm: DetectionModel,
    state_label: Hashable = DEFAULT_STATE_LABEL,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> ProbabilityTriple:
    """Compute (overall, detection, conditional) for a state/property pair.

    conditional = Tr[rho P(sigma)] (the Born value), overall = Tr[rho T(sigma)],
    and detection = overall / conditional whenever conditional exceeds the
    arithmetic tolerance, else it is reported undefined.
    """
    _check_dimensions(rho, prop.observable)
    p_sigma = prop.observable.base.restriction(prop.sigma)
    conditional = _clamp_probability(
        float(np.trace(rho.matrix @ p_sigma).real), policy.arithmetic_tol, "conditional"
    )
    effect = build_effect(state_label, prop, dm, policy)
    overall = _clamp_probability(
        float(np.trace(rho.matrix @ effect.matrix).real), policy.arithmetic_tol, "overall"
    )
    detection = overall / conditional if conditional > policy.arithmetic_tol else None
    return ProbabilityTriple(overall=overall, detection=detection, conditional=conditional)


def no_detection_probability(
    rho: DensityOperator,
    obs: GeneralizedObservable,
    dm: DetectionModel,
    state_label: Hashable = DEFAULT_STATE_LABEL,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> float:
    """Probability of the a0 outcome: 1 - sum_ev p_detect(ev) Tr[rho P_ev]."""
    return 1.0 - detection_mass(rho, obs, dm, state_label, policy)


def detection_mass(
    rho: DensityOperator,
    obs: GeneralizedObservable,
    dm: DetectionModel,
    state_label: Hashable = DEFAULT_STATE_LABEL,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> float:
    """Probability that the object is detected at all in a measurement of ``obs``."""
    _check_dimensions(rho, obs)
    total = 0.0
    for ev, p in zip(obs.base.eigenvalues, obs.base.projectors):
        weight = float(np.trace(rho.matrix @ p).real)
        total += dm.value(state_label, ev) * weight
    return _clamp_probability(total, policy.arithmetic_tol, "detection mass")


def outcome_distribution(
    rho: DensityOperator,
    obs: GeneralizedObservable,
    dm: DetectionModel,
    state_label: Hashable = DEFAULT_STATE_LABEL,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> tuple[tuple, np.ndarray]:
    """Outcome values (eigenvalues then a0) with their probabilities.

    The distribution must sum to 1 within the arithmetic tolerance, which
    holds by construction for any valid state and detection model.
    """
    _check_dimensions(rho, obs)
    probs = []
    for ev, p in zip(obs.base.eigenvalues, obs.base.projectors):
        weight = float(np.trace(rho.matrix @ p).real)
        probs.append(
            _clamp_probability(
                dm.value(state_label, ev) * weight, policy.arithmetic_tol, f"p({ev})"
            )
        )
    a0_prob = 1.0 - sum(probs)
    probs.append(_clamp_probability(a0_prob, policy.arithmetic_tol, "p(a0)"))
    arr = np.asarray(probs, dtype=float)
    if abs(float(arr.sum()) - 1.0) > policy.arithmetic_tol:
        raise ValueError(f"outcome distribution sums to {arr.sum()}, not 1")
    return obs.outcome_set, arr


def luders_update(
    rho: DensityOperator,
    prop: Property,
    dm: DetectionModel,
    state_label: Hashable = DEFAULT_STATE_LABEL,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> DensityOperator:
    """Post-measurement state on the yes branch: T rho T^dagger / Tr[...].

    With unit detection this reduces to the standard projective update
    P rho P / Tr[P rho P].  Raises when the yes outcome has no weight.
    """
    effect = build_effect(state_label, prop, dm, policy)
    t = effect.matrix
    updated = t @ rho.matrix @ t.conj().T
    norm = float(np.trace(updated).real)
    if norm <= policy.arithmetic_tol:
        raise ValueError(
            f"yes-outcome impossible: Tr[T rho T^dagger] = {norm:.3e}"
        )
    updated = (updated + updated.conj().T) / 2.0
    return DensityOperator(updated / norm, policy)


def unitary_evolve(
    rho: DensityOperator,
    hamiltonian: SpectralObservable,
    t: float,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> DensityOperator:
    """Evolve rho by U = sum_k exp(-i E_k t) P_k (hbar = 1).

    The Hamiltonian arrives spectrally, so no matrix exponential is needed;
    trace and eigenvalue multiset are preserved.
    """
    report = validate_spectral_observable(hamiltonian, policy)
    if not report.valid:
        raise ValueError(f"hamiltonian invalid: {report.describe()}")
    if rho.dimension != hamiltonian.dimension:
        raise ValueError(
            f"dimension mismatch: state is {rho.dimension}-dim, "
            f"hamiltonian is {hamiltonian.dimension}-dim"
        )
    u = np.zeros((rho.dimension, rho.dimension), dtype=complex)
    for energy, proj in zip(hamiltonian.eigenvalues, hamiltonian.projectors):
        u = u + np.exp(-1j * energy * float(t)) * proj
    evolved = u @ rho.matrix @ u.conj().T
    evolved = (evolved + evolved.conj().T) / 2.0
    return DensityOperator(evolved, policy)


def sample_outcome(
    rho: DensityOperator,
    obs: GeneralizedObservable,
    dm: DetectionModel,
    rng: np.random.Generator,
    state_label: Hashable = DEFAULT_STATE_LABEL,
):
    """Draw one outcome from the exact distribution over eigenvalues and a0."""
    outcomes, probs = outcome_distribution(rho, obs, dm, state_label)
    u = rng.random()
    cumulative = 0.0
    for outcome, p in zip(outcomes, probs):
        cumulative += p
        if u < cumulative:
            return outcome
    return outcomes[-1]


def sample_outcomes(
    rho: DensityOperator,
    obs: GeneralizedObservable,
    dm: DetectionModel,
    rng: np.random.Generator,
    n: int,
    state_label: Hashable = DEFAULT_STATE_LABEL,
) -> list:
    """Draw ``n`` outcomes at once; same stream as ``n`` single draws."""
    outcomes, probs = outcome_distribution(rho, obs, dm, state_label)
    cumulative = np.cumsum(probs)
    draws = rng.random(int(n))
    indices = np.searchsorted(cumulative, draws, side="right")
    indices = np.minimum(indices, len(outcomes) - 1)
    return [outcomes[i] for i in indices]
