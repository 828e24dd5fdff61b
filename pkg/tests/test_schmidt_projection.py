from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entconc.locc import AUDIT_TOL, Party, branches
from entconc.qcore import binary_entropy, entanglement_entropy, schmidt_coefficients
from entconc.schmidt_projection import (
    PairEnsembleSpec,
    binomial_pmf,
    expected_concentrated_entanglement,
    k_measurement,
    k_source,
    mantissa,
    measure_k,
    n_pair_state,
    outcome_distribution,
    per_pair_yield,
    predicted_rate,
    project,
    read_k_sequence,
    residual_is_maximally_entangled,
    run_full_protocol,
    standardize,
    symbolic_audit,
    symbolic_no_signaling,
    within_tolerance,
)

thetas = st.floats(min_value=0.05, max_value=math.pi / 2 - 0.05)


def eq_oracle(cos2: float, n: int) -> float:
    """Sum_k C(n,k) cos2^(n-k) sin2^k log2 C(n,k), straight from the definition."""
    s2 = 1 - cos2
    return sum(math.comb(n, k) * cos2 ** (n - k) * s2**k * math.log2(math.comb(n, k))
               for k in range(n + 1))


def dense_oracle(theta: float, n: int) -> float:
    """Same quantity from forced dense measurements and residual entropies."""
    psi = n_pair_state(theta, n)
    total = 0.0
    for k in range(n + 1):
        m = measure_k(psi, outcome=k)
        total += m.probability * entanglement_entropy(m.residual)
    return total


def test_frozen_yield_values():
    # hand evaluation: (4*2 + 6*log2 6 + 4*2) / 16 = 1.969361...
    assert expected_concentrated_entanglement(PairEnsembleSpec.from_cos2(0.5, 4)) == pytest.approx(
        (16 + 6 * math.log2(6)) / 16, abs=1e-12)
    assert per_pair_yield(0.5, 4) == pytest.approx(0.4923402, abs=1e-7)
    assert per_pair_yield(0.5, 2) == pytest.approx(0.25, abs=1e-15)
    assert per_pair_yield(0.75, 8) == pytest.approx(0.5234898, abs=1e-7)


@given(st.floats(min_value=0.01, max_value=0.99), st.integers(1, 40))
def test_yield_matches_definition(cos2, n):
    assert expected_concentrated_entanglement(PairEnsembleSpec.from_cos2(cos2, n)) == pytest.approx(
        eq_oracle(cos2, n), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_yield_matches_dense_simulation(n):
    theta = math.pi / 6
    assert expected_concentrated_entanglement(PairEnsembleSpec(theta, n)) == pytest.approx(
        dense_oracle(theta, n), abs=1e-9)


def test_outcome_distribution_examples():
    p = [o.probability for o in outcome_distribution(PairEnsembleSpec(math.pi / 4, 2))]
    assert np.allclose(p, [0.25, 0.5, 0.25], atol=1e-15)
    spec = PairEnsembleSpec(0.4, 1)
    assert np.allclose([o.probability for o in outcome_distribution(spec)], [spec.cos2, spec.sin2])


@given(thetas, st.integers(1, 200))
def test_outcome_distribution_normalized(theta, n):
    dist = outcome_distribution(PairEnsembleSpec(theta, n))
    assert len(dist) == n + 1
    assert math.fsum(o.probability for o in dist) == pytest.approx(1.0, abs=1e-12)
    assert all(o.residual_dimension == math.comb(n, o.k) for o in dist)


def test_binomial_pmf_large_n_no_overflow():
    assert math.isfinite(binomial_pmf(5000, 2500, 0.5))
    assert binomial_pmf(4, 0, 0.0) == 1.0 and binomial_pmf(4, 4, 1.0) == 1.0


def test_sampled_k_frequencies_match():
    spec = PairEnsembleSpec(math.pi / 6, 8)
    rng = np.random.default_rng(11)
    src = k_source(spec, rng)
    trials = 100_000
    counts = np.bincount([next(src) for _ in range(trials)], minlength=9)
    for o in outcome_distribution(spec):
        sigma = math.sqrt(trials * o.probability * (1 - o.probability))
        assert abs(counts[o.k] - trials * o.probability) <= 3 * sigma + 1


def test_dense_and_symbolic_distributions_agree():
    theta, n = 0.7, 8
    psi = n_pair_state(theta, n)
    op = k_measurement(n)
    dense = [p for p, _ in branches(psi, op)]
    sym = [o.probability for o in outcome_distribution(PairEnsembleSpec(theta, n))]
    assert np.allclose(dense, sym, atol=1e-9)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 6])
@pytest.mark.parametrize("theta", [0.2, math.pi / 6, 1.1])
def test_every_residual_is_maximally_entangled(n, theta):
    psi = n_pair_state(theta, n)
    for k in range(n + 1):
        m = measure_k(psi, outcome=k)
        assert residual_is_maximally_entangled(m.residual, math.comb(n, k))
        assert entanglement_entropy(m.residual) == pytest.approx(math.log2(math.comb(n, k)), abs=1e-9)


def test_spot_residuals():
    assert entanglement_entropy(measure_k(n_pair_state(0.3, 3), outcome=1).residual) == pytest.approx(
        math.log2(3), abs=1e-9)
    assert entanglement_entropy(measure_k(n_pair_state(0.3, 3), outcome=0).residual) == pytest.approx(
        0.0, abs=1e-12)
    for theta in np.linspace(0.1, 1.4, 7):
        c = schmidt_coefficients(measure_k(n_pair_state(theta, 2), outcome=1).residual)
        assert np.allclose(c[c > 1e-12], [2**-0.5] * 2, atol=1e-10)


def test_variants_agree():
    psi = n_pair_state(0.5, 4)
    for k in range(5):
        a = measure_k(psi, outcome=k, variant="message")
        b = measure_k(psi, outcome=k, variant="correlated")
        assert a.probability == pytest.approx(b.probability)
        assert np.allclose(a.residual.amplitudes, b.residual.amplitudes)
        assert a.transcript.classical_bits() == 3 and b.transcript.classical_bits() == 0
    rng = np.random.default_rng(5)
    ks = [measure_k(psi, rng, variant="correlated").k for _ in range(50)]
    assert all(0 <= k <= 4 for k in ks)


def test_bob_counts_up_spins():
    op = k_measurement(2, Party.BOB)
    # Bob's index 0 is two up spins, which pairs with Alice's two downs (k = 2)
    assert op.operators[2][0, 0] == 1


def test_symbolic_audits():
    for theta in (0.1, 0.5, math.pi / 4):
        for n in (1, 4, 64):
            spec = PairEnsembleSpec(theta, n)
            assert symbolic_audit(spec).holds
            assert symbolic_no_signaling(spec) < AUDIT_TOL


def test_yield_below_entropy_with_log_gap():
    theta = math.pi / 6
    e = binary_entropy(math.cos(theta) ** 2)
    gaps = []
    for n in [2**j for j in range(1, 11)]:
        val = expected_concentrated_entanglement(PairEnsembleSpec(theta, n))
        assert val < n * e
        gaps.append((n * e - val) / math.log2(n))
    assert max(gaps) < 2.0
    assert abs(per_pair_yield(0.75, 1024) - binary_entropy(0.75)) < 0.02


# --- standardization --------------------------------------------------------


def test_power_of_two_replay():
    run = standardize([1, 1, 1], 2, 0.1, replay=True)
    assert run.d_m == 8 and run.ell == 3
    assert run.status == "success" and run.success_probability == 1.0 and run.singlets == 3


def test_first_stop_with_batch_two():
    run = standardize([1, 1, 1], 2, 0.5)
    assert run.steps == 1 and run.d_m == 2 and run.ell == 1 and run.status == "success"


def test_batch_two_terminates_with_zero_epsilon():
    run = standardize([1], 2, 0.0)
    assert run.status == "success" and run.ell == 1


def test_trivial_batches_do_not_stop():
    run = standardize([0, 2, 0], 2, 0.1)
    assert run.status == "running" and run.d_m == 1
    run = standardize(iter(lambda: 0, 1), 2, 0.1, max_steps=50)
    assert run.status == "exhausted" and run.steps == 50


def test_negative_epsilon_rejected():
    with pytest.raises(ValueError):
        standardize([1], 2, -0.1)
    with pytest.raises(ValueError):
        run_full_protocol(PairEnsembleSpec(0.5, 4), 0.0, 10, np.random.default_rng(0))


@given(st.lists(st.integers(0, 6), min_size=1, max_size=60), st.floats(0.001, 0.5))
def test_walk_invariants(ks, eps):
    run = standardize(ks, 6, eps, replay=True)
    assert run.d_m == math.prod(math.comb(6, k) for k in ks)
    logsum = math.fsum(math.log2(math.comb(6, k)) for k in ks)
    assert math.log2(run.d_m) == pytest.approx(logsum, rel=1e-6, abs=1e-9)
    assert all(0.0 <= z < 1.0 for z in run.z_sequence)
    if run.status in ("success", "failure") or run.status == "stopped":
        assert 2**run.ell <= run.d_m <= 2**run.ell * (1 + eps) + 1e-9 * run.d_m


@given(st.integers(1, 2**80))
def test_mantissa_and_tolerance(d):
    z = mantissa(d)
    assert 0.0 <= z < 1.0
    ell = d.bit_length() - 1
    if within_tolerance(d, 0.1):
        assert d <= 2**ell * 1.1 * (1 + 1e-12)


def test_projection_success_rate():
    run0 = standardize([2], 4, 0.6)  # D = 6 and 4 <= 6 <= 6.4
    assert run0.status == "stopped" and run0.success_probability == pytest.approx(4 / 6)
    rng = np.random.default_rng(2)
    wins = 0
    for _ in range(4000):
        run = standardize([2], 4, 0.6)
        wins += project(run, rng).status == "success"
    assert wins / 4000 == pytest.approx(2 / 3, abs=0.03)
    with pytest.raises(ValueError):
        project(standardize([0], 4, 0.1))


def test_termination_rate_small_batches():
    spec = PairEnsembleSpec(math.pi / 6, 3)
    done = 0
    for t in range(1000):
        run = standardize(k_source(spec, np.random.default_rng([99, t])), 3, 0.01, max_steps=10**6)
        done += run.status == "stopped"
    assert done >= 990


def test_full_protocol_symbolic_transcript():
    res = run_full_protocol(PairEnsembleSpec(math.pi / 6, 8), 0.1, 1000, np.random.default_rng(4))
    assert res.run.status in ("success", "failure")
    assert len(res.audits) == res.run.steps and all(a.holds for a in res.audits)
    assert res.transcript.classical_bits() == 4 * res.run.steps + 1
    assert res.yield_rate <= 1.0


def test_full_protocol_dense_final_state():
    rng = np.random.default_rng(8)
    for _ in range(5):
        res = run_full_protocol(PairEnsembleSpec(math.pi / 6, 6), 0.1, 200, rng, dense=True)
        assert max(res.signaling_deviations) < AUDIT_TOL
        if res.run.status == "success":
            assert res.final_coefficient_spread < 1e-10


def test_maximally_entangled_pairs_yield_at_most_one():
    rng = np.random.default_rng(1)
    for n in (1, 2, 5, 16):
        res = run_full_protocol(PairEnsembleSpec(math.pi / 4, n), 0.1, 500, rng)
        assert res.yield_rate <= 1.0


def test_small_batches_lose_to_filtering():
    assert per_pair_yield(0.9, 2) < 0.2
    rng = np.random.default_rng(6)
    rates = [run_full_protocol(PairEnsembleSpec.from_cos2(0.9, 2), 0.1, 2000, rng).yield_rate
             for _ in range(300)]
    assert np.mean(rates) < 0.2


def test_predicted_rate():
    spec = PairEnsembleSpec.from_cos2(0.75, 8)
    assert predicted_rate(spec, 0.1) == pytest.approx(0.5234898 / 1.1, abs=1e-7)


def test_read_k_sequence(tmp_path):
    p = tmp_path / "ks.txt"
    p.write_text("1\n\n# comment\n2  \n")
    assert read_k_sequence(p) == [1, 2]
    p.write_text("x\n")
    with pytest.raises(ValueError):
        read_k_sequence(p)
