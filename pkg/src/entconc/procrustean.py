"""Single-pair Procrustean concentration.

Alice passes her particle through a filter that attenuates the amplitude of
the more likely spin direction by tan(theta) (for theta < pi/4) so both
Schmidt terms end up equal.  If the particle gets through, the pair is a
perfect singlet up to a local phase; otherwise both parties discard it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .locc import LocalOperation, Party, Referee, Transcript
from .qcore import DOWN, UP, PureBipartiteState, pair_state


@dataclass(frozen=True, eq=False)
class ProcrusteanFilter:
    theta: float
    pass_operator: np.ndarray
    fail_operator: np.ndarray

    @property
    def operation(self) -> LocalOperation:
        return LocalOperation.povm(Party.ALICE, (self.pass_operator, self.fail_operator),
                                   label="procrustean")

    @property
    def success_probability(self) -> float:
        return expected_yield(self.theta)


def build_filter(theta: float) -> ProcrusteanFilter:
    if not 0.0 < theta < math.pi / 2:
        raise ValueError(f"theta must lie in the open interval (0, pi/2), got {theta}")
    c, s = math.cos(theta), math.sin(theta)
    transmit = np.ones(2)
    # Alice's up amplitude is cos(theta), her down amplitude sin(theta)
    if c > s:
        transmit[UP] = s / c
    elif s > c:
        transmit[DOWN] = c / s
    pass_op = np.diag(transmit).astype(complex)
    fail_op = np.diag(np.sqrt(np.clip(1.0 - transmit**2, 0.0, None))).astype(complex)
    return ProcrusteanFilter(theta, pass_op, fail_op)


@dataclass
class ProcrusteanOutcome:
    passed: bool
    probability: float
    residual: PureBipartiteState | None
    transcript: Transcript


def apply_procrustean(
    pair: PureBipartiteState | None,
    theta: float,
    rng: np.random.Generator | None = None,
    *,
    outcome: int | None = None,
    audit: bool = True,
) -> ProcrusteanOutcome:
    """Filter Alice's half of one pair; she reports the result and Bob keeps or discards.

    ``pair`` defaults to the ideal pair state for ``theta``.  Bob never
    measures.  A failed pair is discarded, so no residual is returned.
    """
    pair = pair_state(theta) if pair is None else pair
    filt = build_filter(theta)
    ref = Referee(pair, rng=rng, audit=audit)
    res = ref.apply(filt.operation, outcome=outcome)
    passed = res.outcome == 0
    ref.send(Party.ALICE, "1" if passed else "0")
    return ProcrusteanOutcome(passed, res.probability, ref.state if passed else None, ref.transcript)


def expected_yield(theta: float) -> float:
    """Ebits per input pair: the pass probability 2 min(sin^2, cos^2) times one ebit."""
    return 2.0 * min(math.sin(theta) ** 2, math.cos(theta) ** 2)


def expected_yield_cos2(cos2: float) -> float:
    return 2.0 * min(cos2, 1.0 - cos2)
