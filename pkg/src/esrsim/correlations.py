"""Correlation experiments with trichotomic observables.

Outcomes per wing are {+1, -1, a0}; the no-registration outcome contributes 0
to product expectations, so an overall correlation factorizes as
(wing detection) x (wing detection) x (Born correlation) whenever detection is
outcome-independent.  The conditional-on-detection correlation divides out the
joint-detection mass and recovers the Born correlation exactly, which is why
post-selected experiments cannot distinguish the detection-conditioned model
from unmodified quantum predictions.

The classical side is covered by exhaustive enumeration of deterministic
trichotomic strategies (the inequality bounds) and by the LP search for local
models of the GHZ correlations under detection-efficiency constraints.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .hidden_variables import (
    DEFAULT_MIN_JOINT_DETECTION,
    CorrelationTarget,
    LocalStrategy,
    build_feasibility_lp,
    enumerate_local_strategies,
    strategy_outcome_array,
)
from .linalg import DEFAULT_POLICY, DensityOperator, SpectralObservable, tensor_product
from .measurement import DEFAULT_STATE_LABEL, DetectionModel
from .simplex import feasibility_residuals, solve_lp_simplex

__all__ = [
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "singlet_state",
    "ghz_state",
    "spin_observable",
    "pauli_observable",
    "TwoPartyScenario",
    "CorrelationResult",
    "InequalityReport",
    "trichotomic_expectation",
    "conditional_expectation",
    "modified_bell_report",
    "modified_chsh_report",
    "EfficiencyScan",
    "efficiency_scan",
    "GHZScenario",
    "ghz_quantum_correlations",
    "ghz_overall_correlations",
    "GHZLocalModelResult",
    "ghz_local_model_search",
    "BruteForceBound",
    "brute_force_trichotomic_bound",
    "GHZ_CONTEXTS",
]

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_ID2 = np.eye(2, dtype=complex)

# Setting index 0 is X, 1 is Y; the four standard GHZ contexts.
GHZ_CONTEXTS = ((0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0))
GHZ_CONTEXT_NAMES = ("XXX", "XYY", "YXY", "YYX")


def singlet_state() -> DensityOperator:
    """(|01> - |10>)/sqrt(2) as a 4x4 density operator."""
    vec = np.zeros(4, dtype=complex)
    vec[1] = 1.0 / math.sqrt(2.0)
    vec[2] = -1.0 / math.sqrt(2.0)
    return DensityOperator.from_state_vector(vec)


def ghz_state(sign: int = +1) -> DensityOperator:
    """(|000> + sign |111>)/sqrt(2) as an 8x8 density operator."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    vec = np.zeros(8, dtype=complex)
    vec[0] = 1.0 / math.sqrt(2.0)
    vec[7] = sign / math.sqrt(2.0)
    return DensityOperator.from_state_vector(vec)


def spin_observable(angle: float) -> SpectralObservable:
    """Spin along cos(angle) Z + sin(angle) X, eigenvalues +1 and -1."""
    direction = math.cos(angle) * PAULI_Z + math.sin(angle) * PAULI_X
    return SpectralObservable(
        eigenvalues=(1.0, -1.0),
        projectors=((_ID2 + direction) / 2.0, (_ID2 - direction) / 2.0),
    )


def pauli_observable(axis: str) -> SpectralObservable:
    sigma = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}.get(axis.upper())
    if sigma is None:
        raise ValueError(f"unknown axis {axis!r}")
    return SpectralObservable(
        eigenvalues=(1.0, -1.0),
        projectors=((_ID2 + sigma) / 2.0, (_ID2 - sigma) / 2.0),
    )


@dataclass(frozen=True, eq=False)
class TwoPartyScenario:
    """Bipartite state with labelled measurement angles and per-wing detection.

    Each setting label maps to a polar angle; the wing observable is
    cos(angle) Z + sin(angle) X.
    """

    joint_state: DensityOperator
    settings: Mapping[str, float]
    detection_a: DetectionModel
    detection_b: DetectionModel
    state_label: Hashable = DEFAULT_STATE_LABEL

    def __post_init__(self):
        if self.joint_state.dimension != 4:
            raise ValueError(
                f"two-party state must be 4-dimensional, got {self.joint_state.dimension}"
            )
        angles = dict(self.settings)
        for label, angle in angles.items():
            if not math.isfinite(float(angle)):
                raise ValueError(f"angle for setting {label!r} is not finite")
        object.__setattr__(self, "settings", angles)

    def angle(self, label: str) -> float:
        if label not in self.settings:
            raise ValueError(f"unknown setting {label!r}; have {sorted(self.settings)}")
        return float(self.settings[label])


@dataclass(frozen=True)
class CorrelationResult:
    value: float
    kind: str  # "overall" | "conditional-on-detection"

    def __post_init__(self):
        if abs(self.value) > 1.0 + DEFAULT_POLICY.arithmetic_tol:
            raise ValueError(f"correlation {self.value} outside [-1, 1]")
        object.__setattr__(self, "value", float(min(max(self.value, -1.0), 1.0)))


@dataclass(frozen=True)
class InequalityReport:
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def satisfied(self) -> bool:
        return self.margin >= -DEFAULT_POLICY.arithmetic_tol


def _wing_operators(
    sc: TwoPartyScenario, label: str, dm: DetectionModel
) -> tuple[np.ndarray, np.ndarray]:
    """(weighted outcome operator, detection operator) for one wing setting."""
    obs = spin_observable(sc.angle(label))
    weighted = np.zeros((2, 2), dtype=complex)
    detect = np.zeros((2, 2), dtype=complex)
    for ev, proj in zip(obs.eigenvalues, obs.projectors):
        d = dm.value(sc.state_label, ev)
        weighted = weighted + ev * d * proj
        detect = detect + d * proj
    return weighted, detect


def trichotomic_expectation(sc: TwoPartyScenario, a: str, b: str) -> CorrelationResult:
    """Overall expectation of the product, with a0 counted as 0."""
    m_a, _ = _wing_operators(sc, a, sc.detection_a)
    m_b, _ = _wing_operators(sc, b, sc.detection_b)
    value = float(np.trace(sc.joint_state.matrix @ tensor_product(m_a, m_b)).real)
    return CorrelationResult(value=value, kind="overall")


def conditional_expectation(sc: TwoPartyScenario, a: str, b: str) -> CorrelationResult:
    """Expectation restricted to both-detected events."""
    m_a, n_a = _wing_operators(sc, a, sc.detection_a)
    m_b, n_b = _wing_operators(sc, b, sc.detection_b)
    rho = sc.joint_state.matrix
    numerator = float(np.trace(rho @ tensor_product(m_a, m_b)).real)
    mass = float(np.trace(rho @ tensor_product(n_a, n_b)).real)
    if mass <= DEFAULT_POLICY.arithmetic_tol:
        raise ValueError(f"zero joint-detection mass ({mass:.3e})")
    return CorrelationResult(value=numerator / mass, kind="conditional-on-detection")


def _check_correlation_inputs(**values: float) -> None:
    for name, v in values.items():
        if abs(v) > 1.0 + DEFAULT_POLICY.arithmetic_tol:
            raise ValueError(f"{name} = {v} outside [-1, 1]")


def modified_bell_report(e_ab: float, e_ac: float, e_bc: float) -> InequalityReport:
    """|E(a,b) - E(a,c)| <= 1 + E(b,c)."""
    _check_correlation_inputs(e_ab=e_ab, e_ac=e_ac, e_bc=e_bc)
    return InequalityReport(lhs=abs(e_ab - e_ac), rhs=1.0 + e_bc)


def modified_chsh_report(
    e_ab: float, e_ac: float, e_db: float, e_dc: float
) -> InequalityReport:
    """|E(a,b) - E(a,c)| + |E(d,b) + E(d,c)| <= 2."""
    _check_correlation_inputs(e_ab=e_ab, e_ac=e_ac, e_db=e_db, e_dc=e_dc)
    return InequalityReport(lhs=abs(e_ab - e_ac) + abs(e_db + e_dc), rhs=2.0)


def _chsh_lhs_at_efficiency(
    joint_state: DensityOperator, angles: Mapping[str, float], d: float
) -> InequalityReport:
    dm = DetectionModel.uniform(d)
    sc = TwoPartyScenario(
        joint_state=joint_state, settings=angles, detection_a=dm, detection_b=dm
    )
    e_ab = trichotomic_expectation(sc, "a", "b").value
    e_ac = trichotomic_expectation(sc, "a", "c").value
    e_db = trichotomic_expectation(sc, "d", "b").value
    e_dc = trichotomic_expectation(sc, "d", "c").value
    return modified_chsh_report(e_ab, e_ac, e_db, e_dc)


@dataclass(frozen=True)
class ScanRow:
    efficiency: float
    lhs: float
    satisfied: bool


@dataclass(frozen=True)
class EfficiencyScan:
    rows: tuple[ScanRow, ...]
    threshold: float | None
    threshold_tolerance: float


def efficiency_scan(
    joint_state: DensityOperator,
    angles: Mapping[str, float],
    d_grid: Sequence[float],
    threshold_tolerance: float = 1e-6,
) -> EfficiencyScan:
    """Sweep a uniform wing efficiency over the modified CHSH expression.

    ``angles`` must provide the four settings a, d (first wing) and b, c
    (second wing).  The overall lhs is monotone in the efficiency, so the
    satisfied/violated threshold (if any) is located by bisection on
    lhs(d) = 2 to the requested tolerance.
    """
    grid = [float(d) for d in d_grid]
    if not grid:
        raise ValueError("empty efficiency grid")
    for d in grid:
        if not 0.0 <= d <= 1.0:
            raise ValueError(f"efficiency {d} outside [0, 1]")
    missing = {"a", "d", "b", "c"} - set(angles)
    if missing:
        raise ValueError(f"angle set missing settings {sorted(missing)}")

    rows = []
    for d in grid:
        report = _chsh_lhs_at_efficiency(joint_state, angles, d)
        rows.append(ScanRow(efficiency=d, lhs=report.lhs, satisfied=report.satisfied))

    threshold = None
    top = _chsh_lhs_at_efficiency(joint_state, angles, 1.0)
    if not top.satisfied:
        lo, hi = 0.0, 1.0  # lhs(0) = 0 <= 2 < lhs(1)
        while hi - lo > threshold_tolerance:
            mid = (lo + hi) / 2.0
            if _chsh_lhs_at_efficiency(joint_state, angles, mid).satisfied:
                lo = mid
            else:
                hi = mid
        threshold = (lo + hi) / 2.0
    return EfficiencyScan(
        rows=tuple(rows), threshold=threshold, threshold_tolerance=threshold_tolerance
    )


@dataclass(frozen=True, eq=False)
class GHZScenario:
    """Three qubits measured along X or Y per party, with per-party efficiencies."""

    joint_state: DensityOperator
    efficiencies: tuple[float, float, float] = (1.0, 1.0, 1.0)
    state_label: Hashable = DEFAULT_STATE_LABEL

    def __post_init__(self):
        if self.joint_state.dimension != 8:
            raise ValueError(
                f"GHZ state must be 8-dimensional, got {self.joint_state.dimension}"
            )
        effs = tuple(float(e) for e in self.efficiencies)
        if len(effs) != 3 or any(not 0.0 <= e <= 1.0 for e in effs):
            raise ValueError(f"efficiencies {effs} must be three values in [0, 1]")
        object.__setattr__(self, "efficiencies", effs)

    @classmethod
    def standard(cls) -> "GHZScenario":
        return cls(joint_state=ghz_state(+1))


def _ghz_product_operator(context: Sequence[int]) -> np.ndarray:
    sigmas = [PAULI_X, PAULI_Y]
    op = sigmas[context[0]]
    for setting in context[1:]:
        op = np.kron(op, sigmas[setting])
    return op


def _clamp_correlation(value: float) -> float:
    if abs(value) > 1.0 + DEFAULT_POLICY.arithmetic_tol:
        raise ValueError(f"correlation {value} outside [-1, 1]")
    return float(min(max(value, -1.0), 1.0))


def ghz_quantum_correlations(g: GHZScenario) -> tuple[float, float, float, float]:
    """Conditional correlations for the XXX, XYY, YXY, YYX contexts.

    With outcome-independent per-party efficiencies the detection factors
    cancel between numerator and joint-detection mass, so these are the plain
    operator expectations.
    """
    rho = g.joint_state.matrix
    return tuple(
        _clamp_correlation(float(np.trace(rho @ _ghz_product_operator(ctx)).real))
        for ctx in GHZ_CONTEXTS
    )


def ghz_overall_correlations(g: GHZScenario) -> tuple[float, float, float, float]:
    """Overall correlations: conditional values scaled by the detection product."""
    scale = g.efficiencies[0] * g.efficiencies[1] * g.efficiencies[2]
    return tuple(scale * value for value in ghz_quantum_correlations(g))


@dataclass(frozen=True, eq=False)
class GHZLocalModelResult:
    feasible: bool
    weights: np.ndarray | None
    correlations: tuple[float, ...] | None
    efficiencies: dict | None  # (party, setting) -> marginal detection
    joint_detection: dict | None  # context -> mass
    max_residual: float | None
    support_size: int | None
    phase1_objective: float
    pivots: int


def ghz_local_model_search(
    g: GHZScenario,
    min_efficiency: float = 0.0,
    min_joint_detection: float = DEFAULT_MIN_JOINT_DETECTION,
    tolerance: float = 0.0,
) -> GHZLocalModelResult:
    """Search for a strategy distribution reproducing the GHZ conditional correlations.

    Enumerates the 729 deterministic trichotomic strategies and solves the
    cross-multiplied feasibility LP.  ``min_efficiency`` lower-bounds every
    (party, setting) marginal detection probability; at 1.0 every supported
    strategy must always detect, which contradicts the four perfect GHZ
    correlations, so the verdict flips to infeasible.  Feasible outputs are
    re-verified by direct constraint evaluation, independent of the solver.
    """
    strategies = enumerate_local_strategies(parties=3, settings=2)
    target_values = ghz_quantum_correlations(g)
    targets = [
        CorrelationTarget(settings=ctx, value=val, tolerance=tolerance)
        for ctx, val in zip(GHZ_CONTEXTS, target_values)
    ]
    problem = build_feasibility_lp(
        strategies,
        targets,
        min_joint_detection=min_joint_detection,
        min_efficiency=min_efficiency if min_efficiency > 0.0 else None,
    )
    result = solve_lp_simplex(problem)
    if not result.feasible:
        return GHZLocalModelResult(
            feasible=False,
            weights=None,
            correlations=None,
            efficiencies=None,
            joint_detection=None,
            max_residual=None,
            support_size=None,
            phase1_objective=result.phase1_objective,
            pivots=result.pivots,
        )

    weights = result.x
    certificate = feasibility_residuals(problem, weights)
    outcomes = strategy_outcome_array(strategies)

    correlations = []
    joint = {}
    for ctx in GHZ_CONTEXTS:
        sel = outcomes[:, np.arange(3), list(ctx)]
        prod = np.prod(sel, axis=1).astype(float)
        det = np.all(sel != 0, axis=1).astype(float)
        mass = float(weights @ det)
        joint[ctx] = mass
        correlations.append(float(weights @ prod) / mass if mass > 0 else math.nan)

    efficiencies = {}
    for party in range(3):
        for setting in range(2):
            marginal = (outcomes[:, party, setting] != 0).astype(float)
            efficiencies[(party, setting)] = float(weights @ marginal)

    max_residual = max(
        certificate.max_equality_residual, certificate.max_inequality_violation
    )
    return GHZLocalModelResult(
        feasible=True,
        weights=weights,
        correlations=tuple(correlations),
        efficiencies=efficiencies,
        joint_detection=joint,
        max_residual=max_residual,
        support_size=int(np.sum(weights > 1e-12)),
        phase1_objective=result.phase1_objective,
        pivots=result.pivots,
    )


@dataclass(frozen=True)
class BruteForceBound:
    value: float
    tight: tuple[tuple[int, ...], ...]


def brute_force_trichotomic_bound(
    expression: str, outcomes: Sequence[int] = (-1, 0, 1)
) -> BruteForceBound:
    """Exact extremum of an inequality expression over deterministic strategies.

    ``"chsh"`` maximizes |A(a)B(b) - A(a)B(c)| + |A(d)B(b) + A(d)B(c)| over all
    assignments of (A(a), A(d), B(b), B(c)); ``"bell"`` maximizes
    lhs - rhs = |E(a,b) - E(a,c)| - 1 - E(b,c) over the anticorrelation-
    constrained assignments B(x) = -A(x).  Ties are all reported.
    """
    best = -math.inf
    tight: list[tuple[int, ...]] = []
    if expression == "chsh":
        for assignment in itertools.product(outcomes, repeat=4):
            a_a, a_d, b_b, b_c = assignment
            lhs = abs(a_a * b_b - a_a * b_c) + abs(a_d * b_b + a_d * b_c)
            if lhs > best + 1e-15:
                best = lhs
                tight = [assignment]
            elif abs(lhs - best) <= 1e-15:
                tight.append(assignment)
    elif expression == "bell":
        for assignment in itertools.product(outcomes, repeat=3):
            a_a, a_b, a_c = assignment
            e_ab = -a_a * a_b
            e_ac = -a_a * a_c
            e_bc = -a_b * a_c
            slack = abs(e_ab - e_ac) - (1.0 + e_bc)
            if slack > best + 1e-15:
                best = slack
                tight = [assignment]
            elif abs(slack - best) <= 1e-15:
                tight.append(assignment)
    else:
        raise ValueError(f"unknown expression {expression!r}; use 'chsh' or 'bell'")
    return BruteForceBound(value=float(best), tight=tuple(tight))
