"""Two-stage local interferometer network evaluated two ways: an analytic fast
path from trace functionals, and a full unitary-evolution oracle that builds
the actual circuit on small instances.

Outcome-bit convention (used for ancilla states and four-outcome
distributions alike): the B-side control qubit is the leading tensor factor,
so label (xy) means x = B-side bit, y = A-side bit, basis index 2x + y.
Under this ordering the first-bit marginal difference reads Tr(rho_B^k) and
the second-bit one Tr(rho_A^k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg, permnet
from .states import DensityMatrix

FULL_EVOLUTION_GUARD = 4096

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# the two controlled rotations of the second stage
R_PLUS = (PAULI_Z + PAULI_Y) / np.sqrt(2)
R_MINUS = (PAULI_Z - PAULI_Y) / np.sqrt(2)


@dataclass(frozen=True)
class InterferencePattern:
    visibility: float
    phase: float
    degenerate_phase: bool = False


@dataclass(frozen=True)
class MuParameters:
    k: int
    mu1: float
    mu2: float
    mu3: float
    mu4: float
    mu5: float = 0.0


@dataclass(frozen=True)
class AncillaState:
    which: str  # "stage1_a1b1" or "stage2_a2b2"
    matrix: np.ndarray


@dataclass(frozen=True)
class OutcomeDistribution:
    k: int
    p00: float
    p01: float
    p10: float
    p11: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p00, self.p01, self.p10, self.p11])

    def alternating_sum(self) -> float:
        return self.p00 - self.p01 - self.p10 + self.p11


def _real_checked(z: complex, what: str, tol: float = 1e-10) -> float:
    if abs(z.imag) > tol:
        raise ValueError(f"{what} has imaginary part {z.imag:.3e} beyond {tol}")
    return float(z.real)


def outcome_distribution(k: int, probs: np.ndarray) -> OutcomeDistribution:
    """Validated four-outcome distribution (nonnegative within -1e-12, unit sum)."""
    probs = np.asarray(probs, dtype=float)
    if probs.min() < -1e-12:
        raise RuntimeError(f"negative outcome probability {probs.min():.3e}")
    if abs(probs.sum() - 1.0) > 1e-12:
        raise RuntimeError(f"outcome probabilities sum to {probs.sum()!r}")
    probs = np.clip(probs, 0.0, None)
    return OutcomeDistribution(k, *(float(p) for p in probs))


def interference_pattern(u: np.ndarray, rho) -> InterferencePattern:
    """Visibility |Tr(u rho)| and phase arg Tr(u rho) of the interferometer readout."""
    u = np.asarray(u, dtype=complex)
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if u.shape != m.shape:
        raise ValueError(f"operator shape {u.shape} does not match state shape {m.shape}")
    dev = np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))
    if dev > 1e-9:
        raise ValueError(f"u is not unitary within 1e-9 (deviation {dev:.3e})")
    t = complex(np.trace(u @ m))
    v = abs(t)
    if v < 1e-12:
        return InterferencePattern(0.0, 0.0, degenerate_phase=True)
    return InterferencePattern(v, float(np.angle(t)), degenerate_phase=False)


def mu_parameters(rho: DensityMatrix, k: int, subsystem: str = "B") -> MuParameters:
    """The trace functionals parameterizing the stage-one ancilla state,
    computed analytically from reduced states, matrix powers, and the partial
    transpose (never from rho^⊗k):

        mu1 = Tr(rho_A^k) + Tr(rho_B^k)     mu3 = (Tr(rho^k) + eta) / 2
        mu2 = Tr(rho_A^k) - Tr(rho_B^k)     mu4 = (Tr(rho^k) - eta) / 2

    with eta = Tr[(rho^T_subsystem)^k]; mu5 is identically zero.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    t_a = _real_checked(complex(np.trace(linalg.mat_power(rho.reduced("A"), k))), "Tr(rho_A^k)")
    t_b = _real_checked(complex(np.trace(linalg.mat_power(rho.reduced("B"), k))), "Tr(rho_B^k)")
    r = _real_checked(complex(np.trace(linalg.mat_power(rho.matrix, k))), "Tr(rho^k)")
    pt = linalg.partial_transpose(rho.matrix, rho.d_a, rho.d_b, subsystem)
    eta = _real_checked(complex(np.trace(linalg.mat_power(pt, k))), "transpose power trace")
    return MuParameters(k, t_a + t_b, t_a - t_b, (r + eta) / 2, (r - eta) / 2, 0.0)


def _stage_one_analytic(mu: MuParameters) -> np.ndarray:
    m = np.array(
        [
            [1 + mu.mu1 + mu.mu3, 0, 0, -mu.mu4],
            [0, 1 - mu.mu2 - mu.mu3, mu.mu4, 0],
            [0, mu.mu4, 1 + mu.mu2 - mu.mu3, 0],
            [-mu.mu4, 0, 0, 1 - mu.mu1 + mu.mu3],
        ],
        dtype=complex,
    )
    return m / 4.0


def _tensor_power(m: np.ndarray, k: int) -> np.ndarray:
    out = m
    for _ in range(k - 1):
        out = np.kron(out, m)
    return out


def _check_guard(rho: DensityMatrix, k: int) -> None:
    size = 4 * rho.d**k
    if size > FULL_EVOLUTION_GUARD:
        raise ValueError(
            f"full-evolution space size {size} exceeds guard {FULL_EVOLUTION_GUARD}"
        )


def _stage_one_circuit(rho: DensityMatrix, k: int, subsystem: str) -> np.ndarray:
    """Build the stage-one circuit explicitly: two control qubits, Hadamards,
    controlled cyclic shifts on the A- and B-factors of rho^⊗k, Hadamards,
    then trace out everything but the controls."""
    _check_guard(rho, k)
    d_a, d_b = rho.dims
    dims = [2, 2] + [d_a, d_b] * k  # (b-control, a-control, A1, B1, ..., Ak, Bk)
    a_positions = [2 + 2 * c for c in range(k)]
    b_positions = [3 + 2 * c for c in range(k)]
    # the B-side control applies the forward shift and the A-side control the
    # inverse shift; swapping the two directions targets the other transpose
    dir_a, dir_b = ("inverse", "forward") if subsystem == "B" else ("forward", "inverse")
    c_shift_a = permnet.permutation_matrix(
        permnet.digit_shift_permutation(dims, a_positions, dir_a, control=1)
    )
    c_shift_b = permnet.permutation_matrix(
        permnet.digit_shift_permutation(dims, b_positions, dir_b, control=0)
    )
    size_sys = rho.d**k
    h_pair = np.kron(np.kron(HADAMARD, HADAMARD), np.eye(size_sys))
    u = h_pair @ c_shift_a @ c_shift_b @ h_pair
    anc0 = np.zeros((4, 4), dtype=complex)
    anc0[0, 0] = 1.0
    rho_in = np.kron(anc0, _tensor_power(rho.matrix, k))
    rho_out = u @ rho_in @ u.conj().T
    return linalg.partial_trace(rho_out, dims, [0, 1])


def stage_one_state(
    rho: DensityMatrix, k: int, mode: str = "analytic", subsystem: str = "B"
) -> AncillaState:
    """Joint state of the two stage-one control qubits after the interference round."""
    if mode == "analytic":
        return AncillaState("stage1_a1b1", _stage_one_analytic(mu_parameters(rho, k, subsystem)))
    if mode == "full_evolution":
        return AncillaState("stage1_a1b1", _stage_one_circuit(rho, k, subsystem))
    raise ValueError(f"mode must be 'analytic' or 'full_evolution', got {mode!r}")


def _embed_controlled_qubit_gate(n: int, control: int, target: int, u: np.ndarray) -> np.ndarray:
    """Controlled-u on an n-qubit register, given control/target factor positions."""
    proj = [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]
    out = np.zeros((2**n, 2**n), dtype=complex)
    for x in (0, 1):
        factors = [np.eye(2, dtype=complex)] * n
        factors[control] = proj[x]
        if x == 1:
            factors[target] = u
        term = factors[0]
        for f in factors[1:]:
            term = np.kron(term, f)
        out += term
    return out


def stage_two_state(
    rho: DensityMatrix, k: int, mode: str = "analytic", subsystem: str = "B"
) -> AncillaState:
    """Joint state of the two stage-two readout qubits.

    In analytic mode this is the diagonal matrix of the four outcome
    probabilities; in full-evolution mode the second-stage circuit (Hadamards,
    controlled R+ / R- onto the stage-one controls, Hadamards) is applied
    explicitly and the readout pair is traced out.
    """
    if mode == "analytic":
        return AncillaState(
            "stage2_a2b2",
            np.diag(_stage_two_analytic(rho, k, subsystem).as_array()).astype(complex),
        )
    if mode != "full_evolution":
        raise ValueError(f"mode must be 'analytic' or 'full_evolution', got {mode!r}")
    stage_one = _stage_one_circuit(rho, k, subsystem)
    # factors: (b-readout, a-readout, b-control, a-control)
    anc0 = np.zeros((4, 4), dtype=complex)
    anc0[0, 0] = 1.0
    rho_in = np.kron(anc0, stage_one)
    h_pair = np.kron(np.kron(HADAMARD, HADAMARD), np.eye(4))
    c_plus = _embed_controlled_qubit_gate(4, control=1, target=3, u=R_PLUS)
    c_minus = _embed_controlled_qubit_gate(4, control=0, target=2, u=R_MINUS)
    u = h_pair @ c_plus @ c_minus @ h_pair
    rho_out = u @ rho_in @ u.conj().T
    return AncillaState("stage2_a2b2", linalg.partial_trace(rho_out, [2, 2, 2, 2], [0, 1]))


def _stage_two_analytic(rho: DensityMatrix, k: int, subsystem: str) -> OutcomeDistribution:
    mu = mu_parameters(rho, k, subsystem)
    eta = mu.mu3 - mu.mu4
    return outcome_distribution(
        k,
        np.array(
            [1 + mu.mu1 + eta, 1 - mu.mu2 - eta, 1 + mu.mu2 - eta, 1 - mu.mu1 + eta]
        )
        / 4.0,
    )


def _stage_two(rho: DensityMatrix, k: int, mode: str, subsystem: str) -> OutcomeDistribution:
    if mode == "analytic":
        return _stage_two_analytic(rho, k, subsystem)
    if mode == "full_evolution":
        reduced = stage_two_state(rho, k, mode, subsystem).matrix
        off = reduced - np.diag(np.diag(reduced))
        if np.max(np.abs(off)) > 1e-10:
            raise RuntimeError(
                f"stage-two readout state is not diagonal (max off-diagonal "
                f"{np.max(np.abs(off)):.3e})"
            )
        return outcome_distribution(k, np.real(np.diag(reduced)))
    raise ValueError(f"mode must be 'analytic' or 'full_evolution', got {mode!r}")


def stage_two_distribution(rho: DensityMatrix, k: int, mode: str = "analytic") -> OutcomeDistribution:
    """Four-outcome readout distribution whose alternating sum encodes
    Tr[(rho^T_B)^k]: exactly in analytic mode, up to the measured calibration
    constant in full-evolution mode."""
    return _stage_two(rho, k, mode, "B")


def stage_two_distribution_TA(
    rho: DensityMatrix, k: int, mode: str = "analytic"
) -> OutcomeDistribution:
    """Variant with the two shift directions swapped; encodes Tr[(rho^T_A)^k]."""
    return _stage_two(rho, k, mode, "A")
