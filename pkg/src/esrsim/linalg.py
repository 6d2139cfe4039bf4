"""Dense complex Hermitian linear algebra for small quantum models.

Matrices are plain ``numpy.ndarray`` objects with dtype ``complex128`` in
row-major layout; a complex entry is a pair of IEEE doubles.  Everything here
is sized for desk-scale problems (dimension <= 64): dense storage, a cyclic
Jacobi eigensolver, and report-style validators for density operators and
projector-valued spectral decompositions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NumericPolicy",
    "DEFAULT_POLICY",
    "DensityOperator",
    "SpectralObservable",
    "InvariantViolation",
    "ValidityReport",
    "tensor_product",
    "hermitian_eigendecomposition",
    "validate_density_operator",
    "validate_spectral_observable",
    "asymmetry",
    "as_complex_matrix",
]


@dataclass(frozen=True)
class NumericPolicy:
    """Global numeric tolerances.

    ``arithmetic_tol`` guards exact identities (traces, probability sums),
    ``structural_tol`` guards structural invariants (idempotence,
    orthogonality, positivity).  The Jacobi parameters bound the eigensolver
    sweep loop.
    """

    arithmetic_tol: float = 1e-12
    structural_tol: float = 1e-10
    jacobi_off_norm_tol: float = 1e-13
    jacobi_max_sweeps: int = 100


DEFAULT_POLICY = NumericPolicy()


def as_complex_matrix(m) -> np.ndarray:
    """Coerce to a finite 2-D complex128 array (copy)."""
    a = np.array(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("matrix contains non-finite entries")
    return a


def asymmetry(m: np.ndarray) -> float:
    """Max entrywise deviation |M - M^dagger|."""
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product with row-major index convention.

    The composite index of (i (x) j) is i * dim(b) + j, which is exactly
    numpy's ``kron`` ordering.
    """
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def hermitian_eigendecomposition(
    m, policy: NumericPolicy = DEFAULT_POLICY
) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues real and sorted
    descending and eigenvectors as orthonormal columns, so that
    ``m = V diag(w) V^dagger``.  Sweeps run until the off-diagonal Frobenius
    norm drops below ``policy.jacobi_off_norm_tol`` or the sweep budget is
    exhausted.

    Raises ``ValueError`` for non-Hermitian input, reporting the measured
    asymmetry.
    """
    a = as_complex_matrix(m)
    n, n2 = a.shape
    if n != n2:
        raise ValueError(f"matrix must be square, got {n}x{n2}")
    asym = asymmetry(a)
    if asym > policy.structural_tol:
        raise ValueError(f"matrix is not Hermitian: max asymmetry {asym:.3e}")
    a = (a + a.conj().T) / 2.0
    v = np.eye(n, dtype=complex)

    for _ in range(policy.jacobi_max_sweeps):
        if _off_diagonal_norm(a) <= policy.jacobi_off_norm_tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if tau == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # Unitary plane rotation G: G[p,p]=c, G[p,q]=s*phase,
                # G[q,p]=-s*conj(phase), G[q,q]=c; apply a <- G^dagger a G.
                gpq = s * phase
                gqp = -s * np.conj(phase)
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p + gqp * col_q
                a[:, q] = gpq * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p + np.conj(gqp) * row_q
                a[q, :] = np.conj(gpq) * row_p + c * row_q
                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p + gqp * vec_q
                v[:, q] = gpq * vec_p + c * vec_q

    w = np.real(np.diag(a))
    order = np.argsort(-w, kind="stable")
    return w[order].copy(), v[:, order].copy()


@dataclass(frozen=True)
class InvariantViolation:
    invariant: str
    deviation: float
    message: str


@dataclass(frozen=True)
class ValidityReport:
    """Outcome of a structural validation pass; never raised, only reported."""

    valid: bool
    violations: tuple[InvariantViolation, ...] = field(default=())

    def describe(self) -> str:
        if self.valid:
            return "valid"
        return "; ".join(v.message for v in self.violations)


def validate_density_operator(
    m, policy: NumericPolicy = DEFAULT_POLICY
) -> ValidityReport:
    """Check hermiticity, unit trace, and positivity of a candidate density matrix.

    Positivity is measured on the Hermitian part via the Jacobi eigensolver so
    the report stays meaningful even when hermiticity itself fails.
    """
    a = as_complex_matrix(m)
    violations: list[InvariantViolation] = []
    n, n2 = a.shape
    if n != n2:
        violations.append(
            InvariantViolation("shape", float(abs(n - n2)), f"not square: {n}x{n2}")
        )
        return ValidityReport(False, tuple(violations))

    asym = asymmetry(a)
    if asym > policy.arithmetic_tol:
        violations.append(
            InvariantViolation(
                "hermiticity", asym, f"not Hermitian: max |M - M^dagger| = {asym:.3e}"
            )
        )
    trace_dev = abs(float(np.trace(a).real) - 1.0) + abs(float(np.trace(a).imag))
    if trace_dev > policy.arithmetic_tol:
        violations.append(
            InvariantViolation("trace", trace_dev, f"trace deviates from 1 by {trace_dev:.3e}")
        )
    herm = (a + a.conj().T) / 2.0
    eigenvalues, _ = hermitian_eigendecomposition(herm, policy)
    min_eig = float(np.min(eigenvalues))
    if min_eig < -policy.structural_tol:
        violations.append(
            InvariantViolation(
                "positivity", -min_eig, f"negative eigenvalue {min_eig:.3e}"
            )
        )
    return ValidityReport(not violations, tuple(violations))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Positive unit-trace Hermitian matrix: a pure state or improper mixture.

    Construction enforces the invariants (raising ``ValueError``); use
    ``validate_density_operator`` when a non-aborting report is wanted.
    """

    matrix: np.ndarray

    def __init__(self, matrix, policy: NumericPolicy = DEFAULT_POLICY):
        a = as_complex_matrix(matrix)
        n, n2 = a.shape
        if n != n2:
            raise ValueError(f"density operator must be square, got {n}x{n2}")
        asym = asymmetry(a)
        if asym > policy.arithmetic_tol:
            raise ValueError(f"density operator not Hermitian: asymmetry {asym:.3e}")
        trace = complex(np.trace(a))
        if abs(trace - 1.0) > policy.arithmetic_tol:
            raise ValueError(f"density operator trace {trace} deviates from 1")
        # Fast positivity gate; the full Jacobi path lives in the validator.
        min_eig = float(np.min(np.linalg.eigvalsh((a + a.conj().T) / 2.0)))
        if min_eig < -policy.structural_tol:
            raise ValueError(f"density operator has negative eigenvalue {min_eig:.3e}")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    @classmethod
    def from_state_vector(cls, vec) -> "DensityOperator":
        v = np.asarray(vec, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("zero state vector")
        v = v / norm
        return cls(np.outer(v, v.conj()))


@dataclass(frozen=True, eq=False)
class SpectralObservable:
    """Discrete spectral decomposition: distinct real eigenvalues with projectors.

    Construction checks only shapes and finiteness so that defective inputs can
    still be inspected; ``validate_spectral_observable`` reports on the
    projector-valued-measure invariants (idempotence, orthogonality,
    completeness, distinctness).
    """

    eigenvalues: tuple[float, ...]
    projectors: tuple[np.ndarray, ...]

    def __init__(self, eigenvalues, projectors):
        evs = tuple(float(x) for x in eigenvalues)
        if not evs:
            raise ValueError("observable needs at least one eigenvalue")
        if any(not math.isfinite(x) for x in evs):
            raise ValueError("eigenvalues must be finite")
        projs = tuple(as_complex_matrix(p) for p in projectors)
        if len(projs) != len(evs):
            raise ValueError(
                f"{len(evs)} eigenvalues but {len(projs)} projectors"
            )
        dim = projs[0].shape[0]
        for p in projs:
            if p.shape != (dim, dim):
                raise ValueError("projectors must be square and equal-dimensional")
            p.setflags(write=False)
        object.__setattr__(self, "eigenvalues", evs)
        object.__setattr__(self, "projectors", projs)

    @property
    def dimension(self) -> int:
        return self.projectors[0].shape[0]

    def projector_for(self, eigenvalue: float) -> np.ndarray:
        for ev, p in zip(self.eigenvalues, self.projectors):
            if ev == float(eigenvalue):
                return p
        raise ValueError(f"eigenvalue {eigenvalue} not in spectrum {self.eigenvalues}")

    def restriction(self, sigma) -> np.ndarray:
        """Sum of the projectors for the eigenvalues in ``sigma``."""
        out = np.zeros((self.dimension, self.dimension), dtype=complex)
        for ev in sigma:
            out = out + self.projector_for(ev)
        return out


def validate_spectral_observable(
    o: SpectralObservable, policy: NumericPolicy = DEFAULT_POLICY
) -> ValidityReport:
    """Report on idempotence, orthogonality, completeness and eigenvalue distinctness."""
    violations: list[InvariantViolation] = []
    tol = policy.structural_tol

    seen: set[float] = set()
    for ev in o.eigenvalues:
        if ev in seen:
            violations.append(
                InvariantViolation("distinctness", 0.0, f"duplicate eigenvalue {ev}")
            )
        seen.add(ev)

    for ev, p in zip(o.eigenvalues, o.projectors):
        herm_dev = asymmetry(p)
        idem_dev = float(np.max(np.abs(p @ p - p)))
        dev = max(herm_dev, idem_dev)
        if dev > tol:
            violations.append(
                InvariantViolation(
                    "idempotence",
                    dev,
                    f"projector for {ev} fails P^2 = P = P^dagger by {dev:.3e}",
                )
            )

    k = len(o.projectors)
    for i in range(k):
        for j in range(i + 1, k):
            dev = float(np.max(np.abs(o.projectors[i] @ o.projectors[j])))
            if dev > tol:
                violations.append(
                    InvariantViolation(
                        "orthogonality",
                        dev,
                        f"projectors for {o.eigenvalues[i]} and {o.eigenvalues[j]} "
                        f"are non-orthogonal by {dev:.3e}",
                    )
                )

    total = sum(o.projectors)
    dev = float(np.max(np.abs(total - np.eye(o.dimension))))
    if dev > tol:
        violations.append(
            InvariantViolation(
                "completeness", dev, f"projectors sum deviates from identity by {dev:.3e}"
            )
        )

    return ValidityReport(not violations, tuple(violations))
