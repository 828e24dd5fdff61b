"""Quantum data compression and its relation to Schmidt projection.

A source is an ensemble of pure qubit states.  Block compression projects n
emitted qubits onto the span of the eigenvectors of rho^(n) with the largest
eigenvalues.  Since rho^(n) is a tensor power, its eigenvectors are strings
over the eigenbasis of rho and an eigenvalue only depends on how many
minority symbols the string has, so the subspace is kept as a set of such
weight classes.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .locc import LocalOperation, Party, branches
from .qcore import (
    DensityMatrix,
    PureBipartiteState,
    fidelity,
    pair_state,
    shannon_entropy,
)
from .schmidt_projection import binomial_pmf, n_pair_state

DENSE_CAP = 12


@dataclass(frozen=True, eq=False)
class QuantumSource:
    signal_states: tuple
    probabilities: tuple

    def __post_init__(self):
        states = tuple(np.asarray(v, dtype=complex).reshape(-1) for v in self.signal_states)
        probs = tuple(float(p) for p in self.probabilities)
        if len(states) != len(probs) or not states:
            raise ValueError("need one probability per signal state")
        if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        for v in states:
            if abs(np.vdot(v, v).real - 1.0) > 1e-12:
                raise ValueError("signal states must be normalized")
        object.__setattr__(self, "signal_states", states)
        object.__setattr__(self, "probabilities", probs)

    @property
    def dim(self) -> int:
        return self.signal_states[0].size

    @property
    def density_matrix(self) -> DensityMatrix:
        rho = sum(p * np.outer(v, v.conj()) for p, v in zip(self.probabilities, self.signal_states))
        return DensityMatrix((rho + rho.conj().T) / 2)

    @property
    def entropy(self) -> float:
        return self.density_matrix.entropy()


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v) > 1e-12))
    return v * (abs(v[k]) / v[k])


def bob_updown_measurement() -> LocalOperation:
    return LocalOperation.projective(Party.BOB, [np.diag([0.0, 1.0]), np.diag([1.0, 0.0])],
                                     label="bob-updown")


def bob_diagonal_measurement() -> LocalOperation:
    minus = np.array([-1.0, 1.0]) / math.sqrt(2)
    plus = np.array([1.0, 1.0]) / math.sqrt(2)
    return LocalOperation.projective(Party.BOB, [np.outer(minus, minus), np.outer(plus, plus)],
                                     label="bob-diagonal")


def source_from_entangled_state(state: PureBipartiteState, bob_measurement: LocalOperation) -> QuantumSource:
    """Ensemble of pure states Bob's outcomes leave on Alice's side.

    Every outcome with nonzero probability has to leave Alice in a pure state
    (rank-one conditional amplitudes).
    """
    if bob_measurement.party is not Party.BOB:
        raise ValueError("the source measurement must be performed by Bob")
    states, probs = [], []
    for p, residual in branches(state, bob_measurement):
        if residual is None:
            continue
        u, s, _ = np.linalg.svd(residual.amplitudes)
        if s.size > 1 and s[1] > 1e-10:
            raise ValueError("measurement does not leave Alice in a pure state")
        states.append(_fix_phase(u[:, 0]))
        probs.append(p)
    total = sum(probs)
    return QuantumSource(tuple(states), tuple(p / total for p in probs))


def source_q(theta: float) -> QuantumSource:
    """Orthogonal states up, down with probabilities cos^2, sin^2."""
    return source_from_entangled_state(pair_state(theta), bob_updown_measurement())


def source_q_prime(theta: float) -> QuantumSource:
    """cos|up> + sin|down> and cos|up> - sin|down>, equally likely."""
    return source_from_entangled_state(pair_state(theta), bob_diagonal_measurement())


@dataclass(frozen=True)
class SequenceLabel:
    bits: str

    def __post_init__(self):
        if not self.bits or any(b not in "01" for b in self.bits):
            raise ValueError(f"not a bit string: {self.bits!r}")

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def complement(self) -> "SequenceLabel":
        return SequenceLabel(self.bits.translate(str.maketrans("01", "10")))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "SequenceLabel":
        return cls("".join(str(b) for b in rng.integers(0, 2, size=n)))


def sequence_state(source: QuantumSource, x: SequenceLabel | str) -> np.ndarray:
    """Product of the signal states indexed by the bits of x (first bit = most significant qubit)."""
    bits = x.bits if isinstance(x, SequenceLabel) else x
    return reduce(np.kron, (source.signal_states[int(b)] for b in bits))


@dataclass(frozen=True, eq=False)
class LikelySubspace:
    n: int
    delta: float
    eigenvalues: tuple  # (majority, minority) eigenvalues of rho
    eigenbasis: np.ndarray  # columns: majority, minority eigenvector
    weights: tuple  # retained numbers of minority symbols
    dimension: int
    retained_mass: float
    log2_cap: float

    def basis_indices(self) -> np.ndarray:
        """Retained eigenbasis strings as integers (bit 1 = minority eigenvector)."""
        if self.n > DENSE_CAP:
            raise ValueError(f"explicit enumeration is limited to n <= {DENSE_CAP}")
        idx = np.arange(2**self.n)
        w = np.array([bin(i).count("1") for i in idx])
        return idx[np.isin(w, self.weights)]

    def eigenbasis_n(self) -> np.ndarray:
        return reduce(np.kron, [self.eigenbasis] * self.n)

    def projector(self) -> np.ndarray:
        mask = np.zeros(2**self.n)
        mask[self.basis_indices()] = 1.0
        u = self.eigenbasis_n()
        return (u * mask) @ u.conj().T

    def junk_state(self) -> np.ndarray:
        """Fallback output: the all-majority eigenvector string (largest eigenvalue)."""
        return reduce(np.kron, [self.eigenbasis[:, 0]] * self.n)


def _rho_of(source_or_rho) -> np.ndarray:
    if isinstance(source_or_rho, QuantumSource):
        return source_or_rho.density_matrix.matrix
    if isinstance(source_or_rho, DensityMatrix):
        return source_or_rho.matrix
    return np.asarray(source_or_rho, dtype=complex)


def build_likely_subspace(source_or_rho, n: int, delta: float) -> LikelySubspace:
    """Largest-eigenvalue weight classes of rho^(n) fitting in dimension 2^(n(H+delta)).

    Whole classes are kept so that no tie among equal eigenvalues has to be
    broken; the dimension cap is therefore met from below.
    """
    rho = _rho_of(source_or_rho)
    if rho.shape != (2, 2):
        raise ValueError("block compression is implemented for qubit sources")
    vals, vecs = np.linalg.eigh(rho)
    vals, vecs = np.clip(vals[::-1].real, 0.0, 1.0), vecs[:, ::-1]
    lam0, lam1 = float(vals[0]), float(vals[1])
    h = shannon_entropy(vals)
    log2_cap = n * (h + delta)
    if abs(lam0 - lam1) < 1e-15:
        # a single eigenvalue class containing every string
        if n > log2_cap + 1e-12:
            raise ValueError("likely subspace is empty for these parameters")
        return LikelySubspace(n, delta, (lam0, lam1), vecs, tuple(range(n + 1)), 2**n, 1.0, log2_cap)
    weights, dim = [], 0
    for w in range(n + 1):
        size = math.comb(n, w)
        if math.log2(dim + size) > log2_cap + 1e-12:
            break
        weights.append(w)
        dim += size
    if not weights:
        raise ValueError("likely subspace is empty for these parameters")
    mass = math.fsum(binomial_pmf(n, w, lam1) for w in weights)
    return LikelySubspace(n, delta, (lam0, lam1), vecs, tuple(weights), dim, min(mass, 1.0), log2_cap)


def compress_block(psi_x: np.ndarray, subspace: LikelySubspace) -> DensityMatrix:
    """Output of block compression: the projected state, or the junk state on failure."""
    psi = np.asarray(psi_x, dtype=complex).reshape(-1)
    if psi.size != 2**subspace.n:
        raise ValueError("block length does not match the subspace")
    proj = subspace.projector() @ psi
    p_in = float(np.vdot(proj, proj).real)
    junk = subspace.junk_state()
    w = np.outer(proj, proj.conj()) + (1.0 - p_in) * np.outer(junk, junk.conj())
    return DensityMatrix((w + w.conj().T) / 2)


def _eigen_profile(source: QuantumSource, subspace: LikelySubspace) -> np.ndarray:
    """Squared moduli of each signal state in the eigenbasis, one row per signal."""
    return np.array([np.abs(subspace.eigenbasis.conj().T @ v) ** 2 for v in source.signal_states])


def block_fidelity(source: QuantumSource, n: int, delta: float, method: str = "closed") -> float:
    """Average fidelity sum_x p(x) <Psi^x|W^x|Psi^x> of block compression.

    ``closed`` uses that ||P Psi^x||^2 does not depend on x whenever all
    signal states have the same squared moduli in the eigenbasis of rho
    (true for both sources built from the pair state); ``enumerate`` builds
    W^x for every x.
    """
    sub = build_likely_subspace(source, n, delta)
    if method == "enumerate":
        if n > DENSE_CAP:
            raise ValueError(f"enumeration is limited to n <= {DENSE_CAP}")
        total = 0.0
        for bits in itertools.product("01", repeat=n):
            x = "".join(bits)
            px = math.prod(source.probabilities[int(b)] for b in x)
            if px == 0:
                continue
            psi = sequence_state(source, x)
            total += px * fidelity(psi, compress_block(psi, sub))
        return total
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    prof = _eigen_profile(source, sub)
    if np.max(np.abs(prof - prof[0])) > 1e-12:
        raise ValueError("projection success depends on x for this source; use method='enumerate'")
    q0, q1 = float(prof[0][0]), float(prof[0][1])
    m = min(1.0, math.fsum(binomial_pmf(n, w, q1 / (q0 + q1)) for w in sub.weights))
    return m * m + (1.0 - m) * q0**n


@dataclass(frozen=True)
class TwoSidedReport:
    theta: float
    n: int
    delta: float
    retained_dim: int
    retained_mass: float
    max_entangled_fidelity: float
    dispersion: float
    log_coefficient_variance: float


def _two_sided_classes(theta: float, n: int, delta: float):
    rho_a = np.diag([math.cos(theta) ** 2, math.sin(theta) ** 2])
    sub = build_likely_subspace(rho_a, n, delta)
    lam0, lam1 = sub.eigenvalues
    return sub, lam0, lam1


def two_sided_compression_analysis(theta: float, n: int, delta: float) -> TwoSidedReport:
    """Both parties compress their halves of n pairs; how far is the result from maximal entanglement?

    The retained Schmidt coefficients are sqrt(lam0^(n-w) lam1^w) for the kept
    weights w, renormalized.  Dispersion is the ratio of the largest to the
    smallest retained squared coefficient; the variance is that of
    log2 of the squared coefficients under their own distribution.
    """
    sub, lam0, lam1 = _two_sided_classes(theta, n, delta)
    m = sub.retained_mass
    log_sq, wts, root_sum = [], [], 0.0
    for w in sub.weights:
        lsq = (n - w) * math.log2(lam0) + (w * math.log2(lam1) if w else 0.0)
        log_sq.append(lsq - math.log2(m))
        wts.append(binomial_pmf(n, w, lam1) / m)
        root_sum += math.comb(n, w) * 2.0 ** (lsq / 2)
    log_sq, wts = np.array(log_sq), np.array(wts)
    mean = float(np.dot(wts, log_sq))
    var = float(np.dot(wts, (log_sq - mean) ** 2))
    fid = root_sum**2 / m / sub.dimension
    return TwoSidedReport(theta, n, delta, sub.dimension, m, min(fid, 1.0),
                          float(2.0 ** (log_sq.max() - log_sq.min())), var)


def two_sided_compressed_state(theta: float, n: int, delta: float) -> PureBipartiteState:
    """Dense Psi_c: both halves of n pair states projected onto their likely subspaces.

    Rows and columns are restricted to the retained strings of each side, in
    the order of Alice's strings and their Schmidt partners on Bob's side.
    """
    if n > 10:
        raise ValueError("dense two-sided compression is limited to n <= 10")
    joint = n_pair_state(theta, n).amplitudes
    rho_a = np.diag([math.cos(theta) ** 2, math.sin(theta) ** 2])
    rho_b = np.diag([math.sin(theta) ** 2, math.cos(theta) ** 2])
    sub_a = build_likely_subspace(rho_a, n, delta)
    sub_b = build_likely_subspace(rho_b, n, delta)
    ua, ub = sub_a.eigenbasis_n(), sub_b.eigenbasis_n()
    # express both halves in their eigenbases, keep the likely strings
    m = ua.conj().T @ joint @ ub.conj()
    m = m[np.ix_(sub_a.basis_indices(), sub_b.basis_indices())]
    return PureBipartiteState.normalized(m)


@dataclass(frozen=True)
class CounterexampleReport:
    theta: float
    x: str
    x_bar: str
    amplitude_deviation: float
    encoding_deviation: float
    overlap: complex
    fidelity_ceiling: float


def schmidt_coding_counterexample(theta: float, x: SequenceLabel | str) -> CounterexampleReport:
    """Measuring the number of down spins cannot tell Psi^x from Psi^(x bar).

    Checks that the amplitudes differ by (-1)^(weight of the basis string),
    that the k-measurement outputs (probability and post-measurement state
    for every k) coincide, and reports the overlap of the two inputs.
    """
    x = x if isinstance(x, SequenceLabel) else SequenceLabel(x)
    n = x.n
    if n > 14:
        raise ValueError("dense counterexample is limited to n <= 14")
    src = source_q_prime(theta)
    a = sequence_state(src, x)
    b = sequence_state(src, x.complement)
    downs = np.array([bin(i).count("1") for i in range(2**n)])
    sign = (-1.0) ** downs
    amp_dev = float(np.max(np.abs(b - sign * a)))
    enc_dev = 0.0
    for k in range(n + 1):
        sel = downs == k
        u, v = a[sel], b[sel]
        enc_dev = max(enc_dev, float(np.max(np.abs(np.outer(u, u.conj()) - np.outer(v, v.conj())))))
    overlap = complex(np.vdot(a, b))
    return CounterexampleReport(theta, x.bits, x.complement.bits, amp_dev, enc_dev, overlap,
                                (1.0 + abs(overlap)) / 2.0)


@dataclass(frozen=True)
class ExpansionReport:
    roundtrip_error: float
    marginal_eigenvalues: tuple
    marginal_entropies: tuple


# 2-qubit basis index -> 3-qubit string with at most one down spin
MAJORITY_UP_STRINGS = (0b000, 0b001, 0b010, 0b100)


def expansion_isometry() -> np.ndarray:
    v = np.zeros((8, 4))
    for i, s in enumerate(MAJORITY_UP_STRINGS):
        v[s, i] = 1.0
    return v


def _qubit_marginal(rho: np.ndarray, qubit: int, n: int) -> np.ndarray:
    t = rho.reshape([2] * (2 * n))
    keep = qubit
    letters = "abcdefghijklmnop"
    ins = list(letters[:n])
    outs = list(letters[:n])
    outs[keep] = letters[n]
    spec = "".join(ins) + "".join(outs) + "->" + letters[keep] + letters[n]
    return np.einsum(spec, t)


def data_expansion_demo(rng: np.random.Generator | None = None, samples: int = 20) -> ExpansionReport:
    """Encode two qubits into the majority-up subspace of three qubits."""
    rng = np.random.default_rng(0) if rng is None else rng
    v = expansion_isometry()
    err = 0.0
    for _ in range(samples):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        err = max(err, float(np.max(np.abs(v.T @ (v @ psi) - psi))))
    rho3 = v @ (np.eye(4) / 4) @ v.T
    eigs, ents = [], []
    for q in range(3):
        dm = DensityMatrix(_qubit_marginal(rho3, q, 3))
        eigs.append(tuple(float(e) for e in dm.eigenvalues()))
        ents.append(dm.entropy())
    return ExpansionReport(err, tuple(eigs), tuple(ents))


@dataclass(frozen=True)
class QDCRow:
    theta: float
    n: int
    delta: float
    retained_dim: int
    retained_mass: float
    fidelity: float
    max_ent_fidelity: float
    overlap: float


def qdc_row(theta: float, n: int, delta: float) -> QDCRow:
    src = source_q_prime(theta)
    sub = build_likely_subspace(src, n, delta)
    two = two_sided_compression_analysis(theta, n, delta)
    return QDCRow(theta, n, delta, sub.dimension, sub.retained_mass, block_fidelity(src, n, delta),
                  two.max_entangled_fidelity, abs(math.cos(2 * theta)) ** n)

