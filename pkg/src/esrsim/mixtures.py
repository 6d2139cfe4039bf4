"""Improper versus proper mixtures.

Improper mixtures (reduced states) keep their density-operator representation
and go through the same computation path as pure states.  Proper mixtures are
epistemic weighted families of pure states and get their own aggregation:
overall probabilities average component overalls, while the
conditional-on-detection value renormalizes by the aggregate detected mass.
The two treatments disagree exactly when the components' detection
probabilities differ, which is what makes proper mixtures an experimental
discriminator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable

import numpy as np

from .linalg import DEFAULT_POLICY, DensityOperator, NumericPolicy
from .measurement import (
    DEFAULT_STATE_LABEL,
    DetectionModel,
    ProbabilityTriple,
    Property,
    detection_mass,
    probability_triple,
)

__all__ = [
    "ImproperMixture",
    "ProperComponent",
    "ProperMixture",
    "improper_probability_triple",
    "proper_overall_probability",
    "proper_conditional_probability",
    "esr_qm_divergence",
]

MIN_COMPONENT_WEIGHT = 1e-9


@dataclass(frozen=True, eq=False)
class ImproperMixture:
    """A density operator with the label used for detection-model lookup."""

    rho: DensityOperator
    state_label: Hashable = DEFAULT_STATE_LABEL


@dataclass(frozen=True, eq=False)
class ProperComponent:
    weight: float
    state: DensityOperator
    state_label: Hashable


@dataclass(frozen=True, eq=False)
class ProperMixture:
    """Weighted family of pure states with per-component labels.

    Weights must be positive (>= 1e-9; smaller weights are rejected rather
    than silently dropped) and sum to 1; every component must be pure.
    """

    components: tuple[ProperComponent, ...]

    def __init__(self, components, policy: NumericPolicy = DEFAULT_POLICY):
        comps = tuple(components)
        if not comps:
            raise ValueError("proper mixture needs at least one component")
        total = 0.0
        dim = comps[0].state.dimension
        for c in comps:
            if c.weight < MIN_COMPONENT_WEIGHT or c.weight > 1.0:
                raise ValueError(f"component weight {c.weight} outside [1e-9, 1]")
            if c.state.dimension != dim:
                raise ValueError("component dimensions differ")
            purity = c.state.purity()
            if abs(purity - 1.0) > policy.structural_tol:
                raise ValueError(
                    f"component {c.state_label!r} is not pure: Tr[rho^2] = {purity}"
                )
            total += c.weight
        if abs(total - 1.0) > DEFAULT_POLICY.arithmetic_tol:
            raise ValueError(f"component weights sum to {total}, not 1")
        object.__setattr__(self, "components", comps)

    @property
    def dimension(self) -> int:
        return self.components[0].state.dimension

    def averaged_density(self) -> DensityOperator:
        """The density operator QM would assign to the same preparation."""
        acc = np.zeros((self.dimension, self.dimension), dtype=complex)
        for c in self.components:
            acc = acc + c.weight * c.state.matrix
        return DensityOperator(acc)


def improper_probability_triple(
    m: ImproperMixture,
    prop: Property,
    dm: DetectionModel,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> ProbabilityTriple:
    """Improper mixtures behave as generalized pure states: same path as usual."""
    return probability_triple(m.rho, prop, dm, state_label=m.state_label, policy=policy)


def proper_overall_probability(
    m: ProperMixture,
    prop: Property,
    dm: DetectionModel,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> float:
    """Epistemic average of component overall probabilities."""
    return sum(
        c.weight
        * probability_triple(c.state, prop, dm, c.state_label, policy).overall
        for c in m.components
    )


def _aggregate_detection(
    m: ProperMixture, prop: Property, dm: DetectionModel, policy: NumericPolicy
) -> float:
    obs = prop.observable
    return sum(
        c.weight * detection_mass(c.state, obs, dm, c.state_label, policy)
        for c in m.components
    )


def proper_conditional_probability(
    m: ProperMixture,
    prop: Property,
    dm: DetectionModel,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> float | None:
    """Yes-fraction among detected objects of the whole family.

    Numerator is the weighted overall probability; denominator the weighted
    detected mass per component.  Unlike the improper path, component weights
    are reweighted by how detectable each component is, so the result can
    differ from the Born value of the averaged density operator.  Returns
    ``None`` when the aggregate detected mass vanishes.
    """
    denominator = _aggregate_detection(m, prop, dm, policy)
    if denominator <= policy.arithmetic_tol:
        return None
    numerator = proper_overall_probability(m, prop, dm, policy)
    value = numerator / denominator
    return min(max(value, 0.0), 1.0)


def esr_qm_divergence(
    m: ProperMixture,
    prop: Property,
    dm: DetectionModel,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> float | None:
    """|proper conditional - Born value of the averaged density operator|.

    Zero under uniform detection; propagates ``None`` when the conditional is
    undefined.
    """
    conditional = proper_conditional_probability(m, prop, dm, policy)
    if conditional is None:
        return None
    p_sigma = prop.observable.base.restriction(prop.sigma)
    born = float(np.trace(m.averaged_density().matrix @ p_sigma).real)
    return abs(conditional - born)
