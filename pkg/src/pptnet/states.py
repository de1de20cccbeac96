"""Construction, validation, and JSON serialization of bipartite density matrices."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import linalg

VALIDATION_TOL = 1e-9

_BELL_VECTORS = {
    "phi+": np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2),
    "phi-": np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2),
    "psi+": np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2),
    "psi-": np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2),
}


class StateFormatError(ValueError):
    """Structural problem with a state file or matrix/dims mismatch."""


class PhysicalityError(ValueError):
    """State fails Hermiticity / trace / positivity checks; carries the report."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__(f"state is not physical: {report.summary()}")


@dataclass(frozen=True)
class DensityMatrix:
    """A bipartite state: local dims (d_a, d_b) plus a (d_a*d_b)^2 matrix, A-major basis."""

    dims: tuple[int, int]
    matrix: np.ndarray

    def __post_init__(self):
        d_a, d_b = self.dims
        if d_a < 2 or d_b < 2:
            raise StateFormatError(f"local dimensions must be >= 2, got {self.dims}")
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape != (d_a * d_b, d_a * d_b):
            raise StateFormatError(
                f"matrix shape {m.shape} does not match dims {d_a}x{d_b}"
            )
        object.__setattr__(self, "matrix", m)

    @property
    def d_a(self) -> int:
        return self.dims[0]

    @property
    def d_b(self) -> int:
        return self.dims[1]

    @property
    def d(self) -> int:
        return self.dims[0] * self.dims[1]

    def reduced(self, keep: str) -> np.ndarray:
        """Reduced state of subsystem 'A' or 'B'."""
        return linalg.partial_trace(self.matrix, [self.d_a, self.d_b], 0 if keep == "A" else 1)


@dataclass(frozen=True)
class ValidationReport:
    hermiticity_dev: float
    trace_dev: float
    min_eigenvalue: float
    tol: float

    @property
    def ok(self) -> bool:
        return (
            self.hermiticity_dev <= self.tol
            and self.trace_dev <= self.tol
            and self.min_eigenvalue >= -self.tol
        )

    def summary(self) -> str:
        return (
            f"hermiticity_dev={self.hermiticity_dev:.3e} trace_dev={self.trace_dev:.3e} "
            f"min_eigenvalue={self.min_eigenvalue:.3e} tol={self.tol:.1e} "
            f"-> {'pass' if self.ok else 'fail'}"
        )


def validate(rho: DensityMatrix, tol: float = VALIDATION_TOL) -> ValidationReport:
    """Check Hermiticity, unit trace, and positive semidefiniteness within tol."""
    m = rho.matrix
    herm_dev = float(np.max(np.abs(m - m.conj().T)))
    trace_dev = float(abs(np.trace(m) - 1.0))
    # eigvalsh on the Hermitian part; the deviation itself is reported separately
    min_eig = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])
    return ValidationReport(herm_dev, trace_dev, min_eig, tol)


def bell_state(which: str = "phi+") -> DensityMatrix:
    """Rank-1 projector onto one of the four Bell vectors, dims 2x2."""
    key = which.lower()
    if key not in _BELL_VECTORS:
        raise ValueError(f"unknown Bell state {which!r}; choose from {sorted(_BELL_VECTORS)}")
    v = _BELL_VECTORS[key]
    return DensityMatrix((2, 2), np.outer(v, v.conj()))


def werner(p: float) -> DensityMatrix:
    """p * |psi-><psi-| + (1-p) * I/4; entangled exactly when p > 1/3."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing parameter must lie in [0, 1], got {p}")
    singlet = bell_state("psi-").matrix
    return DensityMatrix((2, 2), p * singlet + (1.0 - p) * np.eye(4) / 4)


def random_density(dims: tuple[int, int], seed: int) -> DensityMatrix:
    """Ginibre-induced random state G G^dagger / Tr, deterministic per seed."""
    d = dims[0] * dims[1]
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    m = g @ g.conj().T
    return DensityMatrix(tuple(dims), m / np.trace(m).real)


def random_separable(dims: tuple[int, int], terms: int, seed: int) -> DensityMatrix:
    """Convex mixture of `terms` random pure product states with simplex weights."""
    if terms < 1:
        raise ValueError(f"terms must be >= 1, got {terms}")
    d_a, d_b = dims
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(terms))
    m = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
    for w in weights:
        psi_a = rng.standard_normal(d_a) + 1j * rng.standard_normal(d_a)
        psi_b = rng.standard_normal(d_b) + 1j * rng.standard_normal(d_b)
        psi_a /= np.linalg.norm(psi_a)
        psi_b /= np.linalg.norm(psi_b)
        m += w * linalg.kron(np.outer(psi_a, psi_a.conj()), np.outer(psi_b, psi_b.conj()))
    return DensityMatrix(tuple(dims), m)


def save(rho: DensityMatrix, path) -> None:
    """Write the JSON state format: {"dims": [dA, dB], "matrix": [[[re, im], ...], ...]}."""
    payload = {
        "dims": [rho.d_a, rho.d_b],
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in rho.matrix],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load(path, tol: float = VALIDATION_TOL) -> DensityMatrix:
    """Read and validate a state file; structural and physicality errors are distinct."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(payload, dict) or "dims" not in payload or "matrix" not in payload:
        raise StateFormatError(f"{path}: expected object with 'dims' and 'matrix'")
    dims = payload["dims"]
    if not (isinstance(dims, list) and len(dims) == 2):
        raise StateFormatError(f"{path}: dims must be a two-element list")
    try:
        raw = np.asarray(payload["matrix"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise StateFormatError(f"{path}: matrix entries must be [re, im] pairs") from exc
    d = int(dims[0]) * int(dims[1])
    if raw.ndim != 3 or raw.shape != (d, d, 2):
        raise StateFormatError(
            f"{path}: matrix shape {raw.shape} does not match dims {dims[0]}x{dims[1]}"
        )
    rho = DensityMatrix((int(dims[0]), int(dims[1])), raw[..., 0] + 1j * raw[..., 1])
    report = validate(rho, tol)
    if not report.ok:
        raise PhysicalityError(report)
    return rho
