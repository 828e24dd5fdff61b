"""Entanglement dilution: preparing shared states from singlets by teleportation.

Alice prepares the target locally as Psi(A, C) and teleports C to Bob.  The
plain protocol costs ceil(log2 d) singlets for a d-dimensional C; compressing
n copies of C to their likely subspace first brings the cost down to about
n (H + delta).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .locc import LocalOperation, Party, Referee, Transcript, int_to_bits
from .qcore import (
    PureBipartiteState,
    binary_entropy,
    schmidt_coefficients,
    singlet,
)
from .qdc import build_likely_subspace
from .schmidt_projection import expected_concentrated_entanglement, PairEnsembleSpec, n_pair_state

DENSE_CAP = 10
EXPLICIT_CAP = 256


class NotMaximallyEntangled(ValueError):
    pass


class InsufficientSinglets(RuntimeError):
    pass


@dataclass(frozen=True)
class TeleportationLedger:
    singlets_consumed: int
    classical_bits_sent: int
    target_dimension: int


def qubits_for(d: int) -> int:
    return max(0, (d - 1).bit_length())


def ledger_for(d: int) -> TeleportationLedger:
    q = qubits_for(d)
    return TeleportationLedger(q, 2 * q, d)


def shift_operator(d: int) -> np.ndarray:
    """X|m> = |m+1 mod d>."""
    return np.roll(np.eye(d), 1, axis=0).astype(complex)


def clock_operator(d: int) -> np.ndarray:
    """Z|m> = w^m |m>."""
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def bell_unitary(d: int, j: int, k: int) -> np.ndarray:
    return np.linalg.matrix_power(clock_operator(d), j) @ np.linalg.matrix_power(shift_operator(d), k)


def bell_basis(d: int) -> list:
    """Generalized Bell vectors (U_jk x I) sum_m |mm>/sqrt(d), index j*d + k, as d x d amplitude matrices."""
    return [bell_unitary(d, j, k) / math.sqrt(d) for j in range(d) for k in range(d)]


def singlet_resource(q: int) -> PureBipartiteState:
    """q singlets, Alice holding all the A halves and Bob all the B halves."""
    amps = np.ones((1, 1), dtype=complex)
    for _ in range(q):
        amps = np.kron(amps, singlet().amplitudes)
    return PureBipartiteState(amps)


@dataclass
class SingletSupply:
    available: int
    consumed: int = 0

    def draw(self, q: int) -> PureBipartiteState:
        if q > self.available:
            raise InsufficientSinglets(f"need {q} singlets, {self.available} left")
        self.available -= q
        self.consumed += q
        return singlet_resource(q)


@dataclass
class TeleportResult:
    output: PureBipartiteState | np.ndarray
    ledger: TeleportationLedger
    outcome: int
    probability: float
    transcript: Transcript = field(default_factory=Transcript)
    bob_marginal_deviation: float | None = None
    ac_correlation: float | None = None


def _as_joint(inp) -> tuple[np.ndarray, bool]:
    if isinstance(inp, PureBipartiteState):
        return inp.amplitudes, True
    v = np.asarray(inp, dtype=complex).reshape(1, -1)
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError("input state must be normalized")
    return v, False


def _check_resource(resource: PureBipartiteState, d: int) -> np.ndarray:
    if resource.dim_a != d or resource.dim_b != d:
        raise ValueError(f"resource must be {d} x {d}, got {resource.dim_a} x {resource.dim_b}")
    c = schmidt_coefficients(resource)
    if np.max(np.abs(c - 1 / math.sqrt(d))) > 1e-10:
        raise NotMaximallyEntangled("resource is not maximally entangled")
    return resource.amplitudes * math.sqrt(d)


def generalized_teleport(
    inp,
    resource: PureBipartiteState,
    rng: np.random.Generator | None = None,
    *,
    outcome: int | None = None,
    method: str = "auto",
) -> TeleportResult:
    """Teleport the C part of ``inp`` (a vector, or Psi(A, C)) to Bob.

    Alice measures C and her half of the resource in the generalized Bell
    basis, sends the outcome as 2 ceil(log2 d) bits, and Bob applies
    ``U_jk conj(V)`` where the resource is V / sqrt(d).
    """
    t, bipartite = _as_joint(inp)
    d_a, d = t.shape
    v = _check_resource(resource, d)
    if method == "auto":
        method = "explicit" if d_a * d * d <= EXPLICIT_CAP else "fast"
    ledger = ledger_for(d)
    if method == "explicit":
        res = _teleport_explicit(t, resource, v, rng, outcome)
    elif method == "fast":
        res = _teleport_fast(t, v, rng, outcome)
    else:
        raise ValueError(f"unknown method {method!r}")
    out_amps, j, p, transcript, dev, corr = res
    output = PureBipartiteState(out_amps) if bipartite else out_amps.reshape(-1)
    return TeleportResult(output, ledger, j, p, transcript, dev, corr)


def _teleport_explicit(t, resource, v, rng, outcome):
    d_a, d = t.shape
    # Alice holds (A, C, A'), Bob holds B
    joint = PureBipartiteState(np.kron(t.reshape(-1, 1), resource.amplitudes))
    bells = bell_basis(d)
    projectors = [np.kron(np.eye(d_a), np.outer(b.reshape(-1), b.reshape(-1).conj())) for b in bells]
    ref = Referee(joint, rng=rng)
    res = ref.apply(LocalOperation.projective(Party.ALICE, projectors, label="bell"), outcome=outcome)
    j = res.outcome
    # before the message Bob's averaged marginal is what it was: maximally mixed
    dev = max(ref.signaling_deviations[-1],
              float(np.max(np.abs(np.eye(d) / d - _bob_prior(joint)))))
    ref.send(Party.ALICE, int_to_bits(j, 2 * qubits_for(d)))
    u = bell_unitary(d, j // d, j % d)
    ref.apply(LocalOperation.unitary(Party.BOB, u @ v.conj(), label="correction"), outcome=0)
    final = ref.state.amplitudes.reshape(d_a, d, d, d)
    b = bells[j]
    out = np.einsum("ca,xcab->xb", b.conj(), final)
    return out / np.linalg.norm(out), j, res.probability, ref.transcript, dev, _ac_correlation(final)


def _bob_prior(joint: PureBipartiteState) -> np.ndarray:
    m = joint.amplitudes
    return m.T @ m.conj()


def _ac_correlation(final: np.ndarray) -> float:
    """max |rho_AC - rho_A x rho_C| after teleportation (A, C on Alice's side)."""
    d_a, d = final.shape[0], final.shape[1]
    rho_ac = np.einsum("xcab,ydab->xcyd", final, final.conj()).reshape(d_a * d, d_a * d)
    r = rho_ac.reshape(d_a, d, d_a, d)
    rho_a = np.einsum("xcyc->xy", r)
    rho_c = np.einsum("xcxd->cd", r)
    return float(np.max(np.abs(rho_ac - np.kron(rho_a, rho_c))))


def _teleport_fast(t, v, rng, outcome):
    d_a, d = t.shape
    if outcome is None:
        if rng is None:
            raise ValueError("either rng or a forced outcome is required")
        outcome = int(rng.integers(d * d))
    j, k = divmod(outcome, d)
    # (t conj(U_jk))[a, a'] = t[a, a'+k] w^(-j(a'+k))
    cols = (np.arange(d) + k) % d
    phase = np.exp(-2j * np.pi * j * cols / d)
    r = (t[:, cols] * phase) @ v / d
    p = float(np.sum(np.abs(r) ** 2))
    if abs(p - 1 / d**2) > 1e-9:
        raise AssertionError(f"Bell outcome probability {p} differs from 1/d^2")
    corr = bell_unitary(d, j, k) @ v.conj() if d <= 64 else _correction_fast(d, j, k, v)
    out = r @ corr.T
    transcript = Transcript()
    transcript.record_measurement(Party.ALICE, "projective", outcome, p, "bell")
    transcript.record_message(Party.ALICE, int_to_bits(outcome, 2 * qubits_for(d)))
    transcript.record_measurement(Party.BOB, "unitary", 0, 1.0, "correction")
    return out / np.linalg.norm(out), outcome, p, transcript, None, None


def _correction_fast(d, j, k, v):
    # Z^j X^k conj(V) without forming matrix powers
    xv = np.roll(v.conj(), k, axis=0)
    return np.exp(2j * np.pi * j * np.arange(d) / d)[:, None] * xv


@dataclass
class RemotePreparation:
    state: PureBipartiteState
    ledger: TeleportationLedger
    teleport: TeleportResult


def prepare_entangled_remote(
    target: PureBipartiteState,
    supply: SingletSupply,
    rng: np.random.Generator | None = None,
    *,
    outcome: int | None = None,
) -> RemotePreparation:
    """Prepare ``target`` between Alice (A) and Bob (B) from singlets, uncompressed."""
    d = target.dim_b
    q = qubits_for(d)
    resource = supply.draw(q)
    padded = np.zeros((target.dim_a, 2**q), dtype=complex)
    padded[:, :d] = target.amplitudes
    tele = generalized_teleport(PureBipartiteState(padded), resource, rng, outcome=outcome)
    out = tele.output.amplitudes
    if np.max(np.abs(out[:, d:]), initial=0.0) > 1e-10:
        raise AssertionError("teleported state leaked outside the target dimension")
    return RemotePreparation(PureBipartiteState.normalized(out[:, :d]), tele.ledger, tele)


@dataclass
class DilutionResult:
    theta: float
    n: int
    delta: float
    ledger: TeleportationLedger
    fidelity: float
    retained_dim: int
    log2_retained_dim: float
    register_qubits: int
    attempts: int
    state: PureBipartiteState | None = None
    dense_fidelity: float | None = None
    outcome: int | None = None


def register_size(theta: float, n: int, delta: float) -> int:
    """Qubits of the compressed register: ceil(n (H + delta)), never more than n."""
    h = binary_entropy(math.cos(theta) ** 2)
    return min(n, math.ceil(n * (h + delta) - 1e-9))


def prepare_entangled_compressed(
    theta: float,
    n: int,
    delta: float,
    rng: np.random.Generator,
    dense: bool | None = None,
) -> DilutionResult:
    """Prepare n copies of the pair state, teleporting a compressed C block.

    Alice projects her local C block onto its likely subspace.  The
    projection is local, so on failure she simply prepares again; the state
    she ends up teleporting always has fidelity equal to the retained mass.
    The retained strings are packed in lexicographic order into a register of
    ``register_size`` qubits, which is teleported and expanded again by Bob.
    """
    rho_c = np.diag([math.sin(theta) ** 2, math.cos(theta) ** 2])
    sub = build_likely_subspace(rho_c, n, delta)
    reg = register_size(theta, n, delta)
    if 2**reg < sub.dimension:
        raise AssertionError("register smaller than the likely subspace")
    attempts = int(rng.geometric(sub.retained_mass)) if sub.retained_mass < 1 else 1
    ledger = ledger_for(2**reg)
    result = DilutionResult(theta, n, delta, ledger, sub.retained_mass, sub.dimension,
                            math.log2(sub.dimension), reg, attempts)
    if dense is None:
        dense = n <= DENSE_CAP
    if not dense:
        return result
    if n > DENSE_CAP:
        raise ValueError(f"dense dilution is limited to n <= {DENSE_CAP}")
    target = n_pair_state(theta, n).amplitudes
    keep = sub.basis_indices()
    u_c = sub.eigenbasis_n()
    # C strings in the eigenbasis; project, then pack into the register
    t_eig = target @ u_c.conj()
    projected = t_eig[:, keep]
    mass = float(np.sum(np.abs(projected) ** 2))
    if abs(mass - sub.retained_mass) > 1e-10:
        raise AssertionError("projection success differs from the retained mass")
    packed = np.zeros((target.shape[0], 2**reg), dtype=complex)
    packed[:, : keep.size] = projected / math.sqrt(mass)
    supply = SingletSupply(reg)
    tele = generalized_teleport(PureBipartiteState(packed), supply.draw(reg), rng, method="fast")
    received = tele.output.amplitudes
    expanded = np.zeros_like(t_eig)
    expanded[:, keep] = received[:, : keep.size]
    out = expanded @ u_c.T
    result.state = PureBipartiteState.normalized(out)
    result.dense_fidelity = float(abs(np.vdot(target.reshape(-1), result.state.vector)) ** 2)
    result.outcome = tele.outcome
    return result


def interconversion_ratio(theta_source: float, theta_target: float, n: int,
                          delta: float, epsilon: float) -> float:
    """Target pairs obtainable per source pair by concentrating then diluting.

    Concentration supplies the expected concentrated entanglement per batch
    of n, discounted by the worst-case standardization factor 1/(1+eps);
    dilution spends ``register_size`` singlets per n target pairs.
    """
    conc = expected_concentrated_entanglement(PairEnsembleSpec(theta_source, n)) / n / (1 + epsilon)
    cost = register_size(theta_target, n, delta) / n
    return conc / cost

