"""Schmidt projection concentration of n identical partly entangled pairs.

Measuring k (the number of down spins on one side) leaves a maximally
entangled state of two C(n, k)-dimensional subsystems.  Repeating on batches
and multiplying the C(n, k) values gives D_m; once log2 D_m is within
log2(1 + eps) above an integer l, a final two-outcome projection extracts l
singlets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from .locc import (
    AUDIT_TOL,
    AuditResult,
    LOCCViolation,
    LocalOperation,
    Party,
    Referee,
    Transcript,
    int_to_bits,
)
from .qcore import PureBipartiteState, binary_entropy, pair_state, schmidt_coefficients, shannon_entropy

DENSE_CAP = 12
EQUAL_TOL = 1e-10


@dataclass(frozen=True)
class PairEnsembleSpec:
    """n copies of cos(theta)|up down> - sin(theta)|down up>."""

    theta: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not 0.0 <= self.theta <= math.pi / 2:
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")

    @classmethod
    def from_cos2(cls, cos2: float, n: int) -> "PairEnsembleSpec":
        return cls(math.acos(math.sqrt(cos2)), n)

    @property
    def cos2(self) -> float:
        return math.cos(self.theta) ** 2

    @property
    def sin2(self) -> float:
        return math.sin(self.theta) ** 2

    @property
    def entropy_per_pair(self) -> float:
        return binary_entropy(self.cos2)


@dataclass(frozen=True)
class KOutcome:
    k: int
    probability: float
    residual_dimension: int
    residual_entanglement: float


def binomial_pmf(n: int, k: int, q: float) -> float:
    """C(n, k) (1-q)^(n-k) q^k, evaluated in log space so large n does not overflow."""
    if q <= 0.0:
        return 1.0 if k == 0 else 0.0
    if q >= 1.0:
        return 1.0 if k == n else 0.0
    log2p = math.log2(math.comb(n, k)) + (n - k) * math.log2(1 - q) + k * math.log2(q)
    return 2.0 ** log2p


def outcome_distribution(spec: PairEnsembleSpec) -> list[KOutcome]:
    out = []
    for k in range(spec.n + 1):
        c = math.comb(spec.n, k)
        out.append(KOutcome(k, binomial_pmf(spec.n, k, spec.sin2), c, math.log2(c)))
    return out


def expected_concentrated_entanglement(spec: PairEnsembleSpec) -> float:
    """Expected ebits left in the residual after measuring k (the k = 0, n terms vanish)."""
    return sum(o.probability * o.residual_entanglement for o in outcome_distribution(spec)[1:-1])


def per_pair_yield(cos2: float, n: int) -> float:
    return expected_concentrated_entanglement(PairEnsembleSpec.from_cos2(cos2, n)) / n


def predicted_rate(spec: PairEnsembleSpec, epsilon: float) -> float:
    """Per-pair singlet rate with the worst-case standardization success factor 1/(1+eps)."""
    return expected_concentrated_entanglement(spec) / spec.n / (1 + epsilon)


def symbolic_audit(spec: PairEnsembleSpec) -> AuditResult:
    dist = outcome_distribution(spec)
    return AuditResult(
        spec.n * spec.entropy_per_pair,
        expected_concentrated_entanglement(spec),
        shannon_entropy([o.probability for o in dist]),
    )


def symbolic_no_signaling(spec: PairEnsembleSpec) -> float:
    """Deviation of Bob's averaged marginal, one weight class at a time.

    Outcome k leaves Bob uniformly mixed over the C(n, k) weight-k strings;
    averaged, each string must keep its prior weight cos^2(n-k) sin^2k.
    """
    dev = 0.0
    for o in outcome_distribution(spec):
        prior = binomial_pmf(spec.n, o.k, spec.sin2) / o.residual_dimension
        dev = max(dev, abs(o.probability / o.residual_dimension - prior))
    return dev


def sample_k(spec: PairEnsembleSpec, rng: np.random.Generator) -> int:
    p = np.array([o.probability for o in outcome_distribution(spec)])
    return int(rng.choice(spec.n + 1, p=p / p.sum()))


def k_source(spec: PairEnsembleSpec, rng: np.random.Generator) -> Iterator[int]:
    """Endless i.i.d. stream of k outcomes."""
    p = np.array([o.probability for o in outcome_distribution(spec)])
    p = p / p.sum()
    while True:
        yield int(rng.choice(spec.n + 1, p=p))


# --- dense simulation -------------------------------------------------------


def n_pair_state(theta: float, n: int) -> PureBipartiteState:
    if n > DENSE_CAP:
        raise ValueError(f"dense states are limited to n <= {DENSE_CAP}")
    return _n_pair_state(float(theta), int(n))


@lru_cache(maxsize=16)
def _n_pair_state(theta: float, n: int) -> PureBipartiteState:
    amps = np.ones((1, 1), dtype=complex)
    pair = pair_state(theta).amplitudes
    for _ in range(n):
        amps = np.kron(amps, pair)
    return PureBipartiteState(amps)


def _down_counts(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    return np.array([bin(i).count("1") for i in idx])


@lru_cache(maxsize=16)
def k_measurement(n: int, party: Party = Party.ALICE) -> LocalOperation:
    """Projectors onto the sin(theta)^k coefficient subspaces, on one party's n spins.

    The sin term of each pair carries Alice's down spin and Bob's up spin, so
    Alice counts downs and Bob counts ups.
    """
    downs = _down_counts(n)
    weight = downs if party is Party.ALICE else n - downs
    projectors = [np.diag((weight == k).astype(float)) for k in range(n + 1)]
    return LocalOperation.projective(party, projectors, label="k-measure")


@dataclass
class KMeasurement:
    k: int
    probability: float
    residual: PureBipartiteState
    transcript: Transcript
    audits: list = field(default_factory=list)
    signaling_deviations: list = field(default_factory=list)


def _n_from_dim(dim: int) -> int:
    n = dim.bit_length() - 1
    if 2**n != dim:
        raise ValueError(f"subsystem dimension {dim} is not a power of two")
    return n


def measure_k(
    joint: PureBipartiteState,
    rng: np.random.Generator | None = None,
    *,
    outcome: int | None = None,
    variant: str = "message",
    audit: bool = True,
) -> KMeasurement:
    """Alice measures k on her n spins of a dense n-pair state.

    With ``variant="message"`` she tells Bob the outcome.  With
    ``variant="correlated"`` no message is sent and Bob measures his own
    version of k, which always agrees with hers.
    """
    n = _n_from_dim(joint.dim_a)
    ref = Referee(joint, rng=rng, audit=audit)
    res = ref.apply(k_measurement(n, Party.ALICE), outcome=outcome)
    width = max(1, (n).bit_length())
    if variant == "message":
        ref.send(Party.ALICE, int_to_bits(res.outcome, width))
    elif variant == "correlated":
        # a forced outcome with zero probability would raise, so this still checks agreement
        bob = ref.apply(k_measurement(n, Party.BOB), outcome=None if rng is not None else res.outcome)
        if bob.outcome != res.outcome:
            raise AssertionError("Bob's k disagrees with Alice's")
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return KMeasurement(res.outcome, res.probability, ref.state, ref.transcript,
                        ref.audits, ref.signaling_deviations)


def residual_is_maximally_entangled(state: PureBipartiteState, rank: int, tol: float = EQUAL_TOL) -> bool:
    c = schmidt_coefficients(state)
    nz = c[c > tol]
    return nz.size == rank and bool(np.all(np.abs(nz - 1 / math.sqrt(rank)) <= tol))


# --- standardization --------------------------------------------------------


@dataclass
class ConcentrationRun:
    epsilon: float
    batch_n: int
    k_sequence: list = field(default_factory=list)
    d_m: int = 1
    z_sequence: list = field(default_factory=list)
    status: str = "running"
    ell: int = 0
    success_probability: float = 1.0
    singlets: int = 0

    @property
    def steps(self) -> int:
        return len(self.k_sequence)

    @property
    def pairs_consumed(self) -> int:
        return self.steps * self.batch_n

    @property
    def stopped(self) -> bool:
        return self.status in ("stopped", "success", "failure")


def mantissa(d: int) -> float:
    """log2(d) - floor(log2(d)) for a positive integer of any size."""
    ell = d.bit_length() - 1
    z = math.log2(d) - ell
    return min(max(z, 0.0), math.nextafter(1.0, 0.0))


def within_tolerance(d: int, epsilon: float) -> bool:
    """2^l <= d <= 2^l (1 + eps) for l = floor(log2 d), in exact arithmetic."""
    eps = Fraction(epsilon)
    ell = d.bit_length() - 1
    return d * eps.denominator <= (1 << ell) * (eps.denominator + eps.numerator)


def standardize(
    k_values: Iterable[int],
    batch_n: int,
    epsilon: float,
    max_steps: int = 10**6,
    rng: np.random.Generator | None = None,
    replay: bool = False,
) -> ConcentrationRun:
    """Accumulate D_m until its base-2 mantissa lies in [0, log2(1 + eps)].

    A stop needs D_m >= 2: batches with k = 0 or n have C(n, k) = 1 and leave
    the walk at its starting point.  With ``replay=True`` the whole supplied
    sequence is taken as a finished walk and the stop test is applied to its
    end only.  If ``rng`` is given (or the projection is certain) the final
    two-outcome projection is carried out; otherwise the run stays
    ``"stopped"`` until :func:`project` is called.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if batch_n < 1:
        raise ValueError("batch_n must be positive")
    run = ConcentrationRun(epsilon=epsilon, batch_n=batch_n)
    it = iter(k_values)
    while run.steps < max_steps:
        try:
            k = int(next(it))
        except StopIteration:
            break
        if not 0 <= k <= batch_n:
            raise ValueError(f"k={k} outside 0..{batch_n}")
        run.k_sequence.append(k)
        run.d_m *= math.comb(batch_n, k)
        run.z_sequence.append(mantissa(run.d_m))
        if not replay and run.d_m >= 2 and within_tolerance(run.d_m, epsilon):
            run.status = "stopped"
            break
    else:
        if not replay:
            run.status = "exhausted"
    if replay and run.d_m >= 2 and within_tolerance(run.d_m, epsilon):
        run.status = "stopped"
    if run.status == "stopped":
        run.ell = run.d_m.bit_length() - 1
        run.success_probability = float(Fraction(1 << run.ell, run.d_m))
        if run.success_probability == 1.0 or rng is not None:
            project(run, rng)
    return run


def read_k_sequence(path) -> list[int]:
    """k values for a deterministic replay, one integer per line (blank lines and # comments skipped)."""
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                out.append(int(text))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not an integer: {text!r}") from None
    return out


def project(run: ConcentrationRun, rng: np.random.Generator | None = None,
            success: bool | None = None) -> ConcentrationRun:
    """Split the D_m Schmidt indices into 2^l (success) and D_m - 2^l (failure)."""
    if run.status != "stopped":
        raise ValueError(f"cannot project a run with status {run.status!r}")
    if success is None:
        if run.d_m == 1 << run.ell:
            success = True
        elif rng is None:
            raise ValueError("rng required for a probabilistic projection")
        else:
            success = bool(rng.random() < run.success_probability)
    run.status = "success" if success else "failure"
    run.singlets = run.ell if success else 0
    return run


# --- full protocol ----------------------------------------------------------


@dataclass
class ProtocolResult:
    spec: PairEnsembleSpec
    run: ConcentrationRun
    transcript: Transcript
    audits: list
    signaling_deviations: list
    final_coefficient_spread: float | None = None

    @property
    def singlets(self) -> int:
        return self.run.singlets

    @property
    def pairs_consumed(self) -> int:
        return self.run.pairs_consumed

    @property
    def yield_rate(self) -> float:
        return self.singlets / self.pairs_consumed if self.pairs_consumed else 0.0


def _final_spread(batch_coeffs: list, ell: int, d_m: int) -> float:
    """Spread of the renormalized Schmidt coefficients kept by a successful projection.

    The joint residual is a tensor product of the batch residuals, so its
    coefficients are products of theirs.  The success branch keeps 2^l of
    them (the first ones, in lexicographic order).
    """
    keep = 1 << ell
    if d_m <= 1 << 16:
        c = np.ones(1)
        for v in batch_coeffs:
            c = np.outer(c, v).ravel()
        kept = c[:keep]
        kept = kept / np.linalg.norm(kept)
        return float(kept.max() - kept.min())
    lo = math.prod(float(v.min()) for v in batch_coeffs)
    hi = math.prod(float(v.max()) for v in batch_coeffs)
    return (hi / lo - lo / hi) / math.sqrt(keep)


def run_full_protocol(
    spec: PairEnsembleSpec,
    epsilon: float,
    max_batches: int,
    rng: np.random.Generator,
    dense: bool = False,
) -> ProtocolResult:
    """Measure k batch by batch, standardize, and extract singlets.

    ``dense=True`` simulates every batch as a full 2^n x 2^n state through the
    referee (n <= 12) and cross-checks the residuals' Schmidt coefficients.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    transcript = Transcript()
    audits: list = []
    deviations: list = []
    batch_coeffs: list = []
    width = max(1, spec.n.bit_length())

    if dense:
        start = n_pair_state(spec.theta, spec.n)

        def stream():
            while True:
                m = measure_k(start, rng)
                if not residual_is_maximally_entangled(m.residual, math.comb(spec.n, m.k)):
                    raise AssertionError(f"residual for k={m.k} is not maximally entangled")
                c = schmidt_coefficients(m.residual)
                batch_coeffs.append(c[c > EQUAL_TOL])
                transcript.events.extend(_renumber(m.transcript.events, len(transcript.events)))
                audits.extend(m.audits)
                deviations.extend(m.signaling_deviations)
                yield m.k
    else:
        audit = symbolic_audit(spec)
        dev = symbolic_no_signaling(spec)
        if not audit.holds or dev >= AUDIT_TOL:
            raise LOCCViolation(f"symbolic audit failed: {audit}, deviation {dev:g}")
        dist = outcome_distribution(spec)
        source = k_source(spec, rng)

        def stream():
            for k in source:
                transcript.record_measurement(Party.ALICE, "projective", k, dist[k].probability,
                                              "k-measure")
                transcript.record_message(Party.ALICE, int_to_bits(k, width))
                audits.append(audit)
                deviations.append(dev)
                yield k

    run = standardize(stream(), spec.n, epsilon, max_steps=max_batches)
    spread = None
    if run.status == "stopped":
        project(run, rng)
    if run.status in ("success", "failure"):
        # an exact power of two is already resolved by standardize, with certainty
        p = run.success_probability
        ok = run.status == "success"
        transcript.record_measurement(Party.ALICE, "projective", 0 if ok else 1, p if ok else 1 - p,
                                      "standardize")
        transcript.record_message(Party.ALICE, "1" if ok else "0")
        if dense and ok:
            spread = _final_spread(batch_coeffs, run.ell, run.d_m)
    return ProtocolResult(spec, run, transcript, audits, deviations, spread)


def _renumber(events, offset):
    return [replace(e, step=e.step + offset) for e in events]
