"""Two-party LOCC harness.

A :class:`Referee` owns the joint pure state.  Alice and Bob can only hand it
:class:`LocalOperation` objects built from operators on their own subsystem,
plus classical messages.  Every measurement is logged to a
:class:`Transcript` and, unless disabled, audited for no-signaling and for
the nonincrease of expected entanglement.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .qcore import PureBipartiteState, entanglement_entropy, partial_trace, shannon_entropy

OP_TOL = 1e-10
AUDIT_TOL = 1e-9

KINDS = ("unitary", "projective", "povm")


class Party(enum.Enum):
    ALICE = "Alice"
    BOB = "Bob"

    @property
    def side(self) -> str:
        return "A" if self is Party.ALICE else "B"

    @property
    def other(self) -> "Party":
        return Party.BOB if self is Party.ALICE else Party.ALICE


class ZeroProbabilityOutcome(ValueError):
    pass


class LOCCViolation(RuntimeError):
    """An audit found signaling or an increase of expected entanglement."""


@dataclass(frozen=True, eq=False)
class LocalOperation:
    """Measurement operators M_j acting on one party's subsystem only.

    A unitary is a one-outcome measurement.  Projective measurements take
    orthogonal projectors summing to the identity; generalized measurements
    take operators with ``sum_j M_j^dag M_j = I``.
    """

    party: Party
    kind: str
    operators: tuple
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operation kind {self.kind!r}")
        ops = tuple(np.array(m, dtype=complex) for m in self.operators)
        if not ops:
            raise ValueError("at least one operator is required")
        d = ops[0].shape[0]
        for m in ops:
            if m.shape != (d, d):
                raise ValueError("operators must be square and of equal dimension")
            m.setflags(write=False)
        eye = np.eye(d)
        if self.kind == "unitary":
            if len(ops) != 1:
                raise ValueError("a unitary operation has exactly one operator")
            if np.max(np.abs(ops[0] @ ops[0].conj().T - eye)) > OP_TOL:
                raise ValueError("operator is not unitary")
        elif self.kind == "projective":
            if np.max(np.abs(sum(ops) - eye)) > OP_TOL:
                raise ValueError("projectors do not sum to the identity")
            for i, p in enumerate(ops):
                if np.max(np.abs(p @ p - p)) > OP_TOL or np.max(np.abs(p - p.conj().T)) > OP_TOL:
                    raise ValueError(f"operator {i} is not an orthogonal projector")
        else:
            completeness = sum(m.conj().T @ m for m in ops)
            if np.max(np.abs(completeness - eye)) > OP_TOL:
                raise ValueError("measurement operators are not complete")
        object.__setattr__(self, "operators", ops)
        diag = all(np.count_nonzero(m - np.diag(np.diag(m))) == 0 for m in ops)
        object.__setattr__(self, "_diagonals", tuple(np.diag(m) for m in ops) if diag else None)

    @classmethod
    def unitary(cls, party: Party, u, label: str = "") -> "LocalOperation":
        return cls(party, "unitary", (u,), label)

    @classmethod
    def projective(cls, party: Party, projectors: Iterable, label: str = "") -> "LocalOperation":
        return cls(party, "projective", tuple(projectors), label)

    @classmethod
    def povm(cls, party: Party, operators: Iterable, label: str = "") -> "LocalOperation":
        return cls(party, "povm", tuple(operators), label)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.operators)


@dataclass(frozen=True)
class MeasurementOutcome:
    outcome: int
    probability: float
    residual: PureBipartiteState


@dataclass(frozen=True)
class AuditResult:
    e_before: float
    expected_e_after: float
    outcome_entropy: float

    @property
    def holds(self) -> bool:
        lo = self.e_before - self.outcome_entropy - AUDIT_TOL
        return lo <= self.expected_e_after <= self.e_before + AUDIT_TOL


def _check_dims(joint: PureBipartiteState, op: LocalOperation):
    d = joint.dim_a if op.party is Party.ALICE else joint.dim_b
    if op.dim != d:
        raise ValueError(f"{op.party.value}'s subsystem has dimension {d}, operator has {op.dim}")


def _apply_operator(amps: np.ndarray, op: LocalOperation, j: int) -> np.ndarray:
    if op._diagonals is not None:
        d = op._diagonals[j]
        return d[:, None] * amps if op.party is Party.ALICE else amps * d[None, :]
    m = op.operators[j]
    return m @ amps if op.party is Party.ALICE else amps @ m.T


def _reduced(amps: np.ndarray, side: str) -> np.ndarray:
    m = amps if side == "A" else amps.T
    rows = np.flatnonzero(np.any(m != 0, axis=1))
    cols = np.flatnonzero(np.any(m != 0, axis=0))
    out = np.zeros((m.shape[0], m.shape[0]), dtype=complex)
    if rows.size * 2 > m.shape[0] or cols.size * 2 > m.shape[1]:
        return m @ m.conj().T
    sub = m[np.ix_(rows, cols)]
    out[np.ix_(rows, rows)] = sub @ sub.conj().T
    return out


def branches(joint: PureBipartiteState, op: LocalOperation) -> list:
    """All outcomes as ``(p_j, residual or None)``; zero-probability outcomes get ``None``."""
    _check_dims(joint, op)
    out = []
    for j in range(op.n_outcomes):
        amps = _apply_operator(joint.amplitudes, op, j)
        p = float(np.sum(np.abs(amps) ** 2))
        out.append((p, PureBipartiteState.normalized(amps) if p > 1e-15 else None))
    return out


def _sample(probabilities: Sequence[float], rng: np.random.Generator) -> int:
    p = np.asarray(probabilities, dtype=float)
    cdf = np.cumsum(p)
    j = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    j = min(j, len(p) - 1)
    while p[j] <= 0:  # never land on an impossible outcome through round-off
        j -= 1
    return j


def apply_local_operation(
    joint: PureBipartiteState,
    op: LocalOperation,
    rng: np.random.Generator | None = None,
    outcome: int | None = None,
    _branches: list | None = None,
) -> MeasurementOutcome:
    """Apply ``op`` and return the sampled (or forced) outcome with its residual state."""
    _check_dims(joint, op)
    if outcome is None and op.n_outcomes == 1:
        outcome = 0
    if outcome is None and rng is None:
        raise ValueError("either rng or a forced outcome is required")
    if outcome is not None:
        if not 0 <= outcome < op.n_outcomes:
            raise ValueError(f"outcome {outcome} out of range")
        amps = _apply_operator(joint.amplitudes, op, outcome)
        p = float(np.sum(np.abs(amps) ** 2))
        if p <= 1e-15:
            raise ZeroProbabilityOutcome(f"outcome {outcome} has probability {p:g}")
        return MeasurementOutcome(outcome, p, PureBipartiteState.normalized(amps))
    br = branches(joint, op) if _branches is None else _branches
    j = _sample([p for p, _ in br], rng)
    return MeasurementOutcome(j, br[j][0], br[j][1])


def audit_expected_entanglement(joint: PureBipartiteState, op: LocalOperation,
                                _branches: list | None = None) -> AuditResult:
    br = branches(joint, op) if _branches is None else _branches
    probs = [p for p, _ in br]
    expected = sum(p * entanglement_entropy(r) for p, r in br if r is not None)
    return AuditResult(entanglement_entropy(joint), expected, shannon_entropy(probs))


def verify_no_signaling(joint: PureBipartiteState, op: LocalOperation,
                        _branches: list | None = None) -> float:
    """Max-entry deviation of the other party's averaged marginal from its prior marginal."""
    other = op.party.other.side
    before = _reduced(joint.amplitudes, other)
    after = np.zeros_like(before)
    for p, r in branches(joint, op) if _branches is None else _branches:
        if r is not None:
            after += p * _reduced(r.amplitudes, other)
    return float(np.max(np.abs(after - before)))


@dataclass(frozen=True)
class MeasurementEvent:
    step: int
    party: Party
    kind: str
    outcome: int
    probability: float
    label: str = ""


@dataclass(frozen=True)
class MessageEvent:
    step: int
    sender: Party
    bits: str


@dataclass
class Transcript:
    events: list = field(default_factory=list)

    def record_measurement(self, party: Party, kind: str, outcome: int, probability: float,
                           label: str = "") -> MeasurementEvent:
        ev = MeasurementEvent(len(self.events), party, kind, outcome, probability, label)
        self.events.append(ev)
        return ev

    def record_message(self, sender: Party, bits: str) -> MessageEvent:
        if any(b not in "01" for b in bits):
            raise ValueError(f"message must be a bit string, got {bits!r}")
        ev = MessageEvent(len(self.events), sender, bits)
        self.events.append(ev)
        return ev

    @property
    def measurements(self) -> list:
        return [e for e in self.events if isinstance(e, MeasurementEvent)]

    @property
    def messages(self) -> list:
        return [e for e in self.events if isinstance(e, MessageEvent)]

    def classical_bits(self) -> int:
        return sum(len(e.bits) for e in self.messages)

    def to_log(self) -> str:
        """One event per line: step, party, kind, outcome, probability[, label]."""
        lines = []
        for e in self.events:
            if isinstance(e, MeasurementEvent):
                row = [str(e.step), e.party.value, e.kind, str(e.outcome), repr(e.probability)]
                if e.label:
                    row.append(e.label)
            else:
                row = [str(e.step), e.sender.value, "message", e.bits or "-", "1.0"]
            lines.append(" ".join(row))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_log(cls, text: str) -> "Transcript":
        t = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            parts = line.split()
            party = Party(parts[1])
            if parts[2] == "message":
                t.record_message(party, "" if parts[3] == "-" else parts[3])
            else:
                label = parts[5] if len(parts) > 5 else ""
                t.record_measurement(party, parts[2], int(parts[3]), float(parts[4]), label)
        return t


class Referee:
    """Holds the joint state and serializes the parties' local operations.

    ``replay`` forces the outcomes recorded in an earlier transcript, in order.
    """

    def __init__(self, state: PureBipartiteState, rng: np.random.Generator | None = None,
                 audit: bool = True, replay: Transcript | None = None):
        self._state = state
        self.rng = rng
        self.audit = audit
        self.transcript = Transcript()
        self.audits: list = []
        self.signaling_deviations: list = []
        self._replay = iter(replay.measurements) if replay is not None else None

    @property
    def state(self) -> PureBipartiteState:
        return self._state

    def marginal(self, party: Party):
        return partial_trace(self._state, party.side)

    def apply(self, op: LocalOperation, outcome: int | None = None) -> MeasurementOutcome:
        if self._replay is not None and outcome is None:
            ev = next(self._replay)
            if ev.party is not op.party:
                raise ValueError(f"replay expected an operation by {ev.party.value}")
            outcome = ev.outcome
        br = None
        if self.audit:
            br = branches(self._state, op)
            res = audit_expected_entanglement(self._state, op, br)
            dev = verify_no_signaling(self._state, op, br)
            self.audits.append(res)
            self.signaling_deviations.append(dev)
            if not res.holds:
                raise LOCCViolation(f"entanglement audit failed: {res}")
            if dev >= AUDIT_TOL:
                raise LOCCViolation(f"signaling deviation {dev:g}")
        result = apply_local_operation(self._state, op, self.rng, outcome, br)
        self._state = result.residual
        self.transcript.record_measurement(op.party, op.kind, result.outcome, result.probability,
                                           op.label)
        return result

    def send(self, sender: Party, bits: str) -> str:
        self.transcript.record_message(sender, bits)
        return bits


def int_to_bits(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width > 0 else ""
