"""Noncontextual hidden-variable machinery.

A microscopic state is the subset of microscopic properties an individual
object possesses; detection probabilities attach to the microscopic state, and
the macroscopic probability triple is recovered by averaging, which reproduces
the overall = detection * conditional product law by construction.

For correlation scenarios the microstates specialize to deterministic local
strategies assigning each (party, setting) an outcome in {-1, 0, +1}, with 0
encoding no detection.  Reproducing target conditional correlations with a
distribution over strategies is a linear feasibility problem: the conditional
constraints (ratios of linear forms) are cross-multiplied by the
joint-detection mass, which is kept away from zero by an explicit lower bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .linalg import DEFAULT_POLICY, NumericPolicy
from .measurement import ProbabilityTriple
from .simplex import FeasibilityProblem

__all__ = [
    "MicroPropertySet",
    "MicrostateModel",
    "macro_from_micro",
    "LocalStrategy",
    "enumerate_local_strategies",
    "CorrelationTarget",
    "build_feasibility_lp",
    "strategy_outcome_array",
    "MAX_ENUMERATION_SLOTS",
    "DEFAULT_MIN_JOINT_DETECTION",
]

MAX_ENUMERATION_SLOTS = 12
DEFAULT_MIN_JOINT_DETECTION = 1e-6


@dataclass(frozen=True)
class MicroPropertySet:
    """Labels of the microscopic properties, one per macroscopic property."""

    labels: tuple[Hashable, ...]

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("microscopic property labels must be distinct")


@dataclass(frozen=True, eq=False)
class MicrostateModel:
    """Finite microstate family with weights and micro-level detection.

    ``microstates`` are subsets of the property labels, ``weights`` the
    distribution p(state | macrostate), and ``micro_detection`` maps a
    (microstate index, property label) pair to a detection probability;
    unlisted pairs use ``default_detection``.
    """

    property_set: MicroPropertySet
    microstates: tuple[frozenset, ...]
    weights: tuple[float, ...]
    micro_detection: Mapping[tuple[int, Hashable], float] = field(default_factory=dict)
    default_detection: float = 1.0

    def __post_init__(self):
        states = tuple(frozenset(s) for s in self.microstates)
        labels = set(self.property_set.labels)
        for s in states:
            unknown = s - labels
            if unknown:
                raise ValueError(f"microstate uses unknown properties {sorted(unknown)}")
        weights = tuple(float(w) for w in self.weights)
        if len(weights) != len(states):
            raise ValueError(f"{len(states)} microstates but {len(weights)} weights")
        if any(w < 0 for w in weights):
            raise ValueError("weights must be nonnegative")
        if abs(sum(weights) - 1.0) > DEFAULT_POLICY.arithmetic_tol:
            raise ValueError(f"weights sum to {sum(weights)}, not 1")
        detection = {}
        for (idx, label), value in dict(self.micro_detection).items():
            if not 0 <= int(idx) < len(states):
                raise ValueError(f"micro_detection references microstate {idx}")
            if label not in labels:
                raise ValueError(f"micro_detection references unknown property {label!r}")
            v = float(value)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"micro detection {v} outside [0, 1]")
            detection[(int(idx), label)] = v
        if not 0.0 <= float(self.default_detection) <= 1.0:
            raise ValueError("default_detection outside [0, 1]")
        object.__setattr__(self, "microstates", states)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "micro_detection", detection)
        object.__setattr__(self, "default_detection", float(self.default_detection))

    def detection(self, index: int, label: Hashable) -> float:
        return self.micro_detection.get((index, label), self.default_detection)


def macro_from_micro(
    model: MicrostateModel,
    property_label: Hashable,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> ProbabilityTriple:
    """Deduce the macroscopic probability triple for one property.

    An object in microstate s answers yes iff the property's micro counterpart
    belongs to s; all stochasticity sits in the weights and in the micro-level
    detection.  The product law holds by construction.
    """
    if property_label not in model.property_set.labels:
        raise ValueError(f"unknown property {property_label!r}")
    overall = 0.0
    detection = 0.0
    for i, (state, weight) in enumerate(zip(model.microstates, model.weights)):
        d = model.detection(i, property_label)
        detection += weight * d
        if property_label in state:
            overall += weight * d
    conditional = overall / detection if detection > policy.arithmetic_tol else None
    return ProbabilityTriple(overall=overall, detection=detection, conditional=conditional)


@dataclass(frozen=True)
class LocalStrategy:
    """Deterministic outcomes per (party, setting); 0 means undetected."""

    outcomes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for row in self.outcomes:
            for o in row:
                if o not in (-1, 0, 1):
                    raise ValueError(f"outcome {o} not in {{-1, 0, +1}}")

    def outcome(self, party: int, setting: int) -> int:
        return self.outcomes[party][setting]

    def joint_product(self, settings: Sequence[int]) -> int:
        value = 1
        for party, setting in enumerate(settings):
            value *= self.outcomes[party][setting]
        return value

    def all_detected(self, settings: Sequence[int]) -> bool:
        return all(self.outcomes[p][s] != 0 for p, s in enumerate(settings))


def enumerate_local_strategies(parties: int, settings: int) -> list[LocalStrategy]:
    """All 3^(parties*settings) assignments, lexicographic in (-1, 0, +1).

    Slots are ordered party-major, setting-minor.
    """
    slots = parties * settings
    if parties < 1 or settings < 1:
        raise ValueError("parties and settings must be positive")
    if slots > MAX_ENUMERATION_SLOTS:
        raise ValueError(
            f"{parties} parties x {settings} settings = {slots} slots "
            f"exceeds the enumeration bound {MAX_ENUMERATION_SLOTS}"
        )
    strategies = []
    for flat in itertools.product((-1, 0, 1), repeat=slots):
        rows = tuple(
            tuple(flat[p * settings : (p + 1) * settings]) for p in range(parties)
        )
        strategies.append(LocalStrategy(rows))
    return strategies


def strategy_outcome_array(strategies: Sequence[LocalStrategy]) -> np.ndarray:
    """(n_strategies, parties, settings) integer array of outcomes."""
    return np.asarray([s.outcomes for s in strategies], dtype=int)


@dataclass(frozen=True)
class CorrelationTarget:
    """Target conditional-on-detection correlation for one setting context."""

    settings: tuple[int, ...]
    value: float
    tolerance: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(int(s) for s in self.settings))
        if not -1.0 <= self.value <= 1.0:
            raise ValueError(f"target correlation {self.value} outside [-1, 1]")
        if self.tolerance < 0.0:
            raise ValueError(f"inconsistent tolerance sign: {self.tolerance}")


def build_feasibility_lp(
    strategies: Sequence[LocalStrategy],
    targets: Sequence[CorrelationTarget] = (),
    min_joint_detection: float = DEFAULT_MIN_JOINT_DETECTION,
    min_efficiency: float | Mapping[tuple[int, int], float] | None = None,
) -> FeasibilityProblem:
    """LP whose feasible points are strategy distributions hitting the targets.

    For a context c with target t and joint-detection indicator det_c(s), the
    conditional correlation sum_s w_s prod_c(s) / sum_s w_s det_c(s) = t is
    cross-multiplied into sum_s w_s (prod_c(s) - t det_c(s)) = 0 (a tolerance
    splits it into two inequalities).  Every referenced context keeps
    joint-detection mass >= ``min_joint_detection`` so the all-undetected
    distribution cannot satisfy the constraints vacuously.  ``min_efficiency``
    lower-bounds the per-(party, setting) marginal detection probability,
    either uniformly (a float) or per slot (a mapping).
    """
    if not strategies:
        raise ValueError("no strategies supplied")
    if min_joint_detection < 0.0:
        raise ValueError("min_joint_detection must be nonnegative")
    outcomes = strategy_outcome_array(strategies)
    n, parties, settings = outcomes.shape

    a_eq_rows = [np.ones(n)]
    b_eq = [1.0]
    eq_labels = ["normalization"]
    a_ub_rows: list[np.ndarray] = []
    b_ub: list[float] = []
    ub_labels: list[str] = []

    contexts: dict[tuple[int, ...], np.ndarray] = {}

    def _detection_column(settings_tuple: tuple[int, ...]) -> np.ndarray:
        if settings_tuple not in contexts:
            if len(settings_tuple) != parties:
                raise ValueError(
                    f"context {settings_tuple} does not match {parties} parties"
                )
            sel = outcomes[:, np.arange(parties), list(settings_tuple)]
            contexts[settings_tuple] = np.all(sel != 0, axis=1).astype(float)
        return contexts[settings_tuple]

    for target in targets:
        sel = outcomes[:, np.arange(parties), list(target.settings)]
        prod = np.prod(sel, axis=1).astype(float)
        det = _detection_column(target.settings)
        name = f"corr{target.settings}"
        if target.tolerance == 0.0:
            a_eq_rows.append(prod - target.value * det)
            b_eq.append(0.0)
            eq_labels.append(f"{name}={target.value}")
        else:
            a_ub_rows.append(prod - (target.value + target.tolerance) * det)
            b_ub.append(0.0)
            ub_labels.append(f"{name}<={target.value}+{target.tolerance}")
            a_ub_rows.append(-(prod - (target.value - target.tolerance) * det))
            b_ub.append(0.0)
            ub_labels.append(f"{name}>={target.value}-{target.tolerance}")

    if min_joint_detection > 0.0:
        for settings_tuple, det in contexts.items():
            a_ub_rows.append(-det)
            b_ub.append(-min_joint_detection)
            ub_labels.append(f"joint-detection{settings_tuple}>={min_joint_detection}")

    if min_efficiency is not None:
        if isinstance(min_efficiency, Mapping):
            slots = dict(min_efficiency)
        else:
            bound = float(min_efficiency)
            slots = {(p, s): bound for p in range(parties) for s in range(settings)}
        for (party, setting), bound in sorted(slots.items()):
            if not 0.0 <= bound <= 1.0:
                raise ValueError(f"efficiency bound {bound} outside [0, 1]")
            if bound == 0.0:
                continue
            marginal = (outcomes[:, party, setting] != 0).astype(float)
            a_ub_rows.append(-marginal)
            b_ub.append(-bound)
            ub_labels.append(f"efficiency[party={party},setting={setting}]>={bound}")

    return FeasibilityProblem(
        n_vars=n,
        a_eq=np.vstack(a_eq_rows),
        b_eq=np.asarray(b_eq),
        a_ub=np.vstack(a_ub_rows) if a_ub_rows else None,
        b_ub=np.asarray(b_ub) if a_ub_rows else None,
        eq_labels=eq_labels,
        ub_labels=ub_labels,
    )
