from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entconc.locc import LocalOperation, Party
from entconc.qcore import binary_entropy, max_entangled_fidelity, pair_state, partial_trace, random_unitary
from entconc.qdc import (
    LikelySubspace,
    QuantumSource,
    SequenceLabel,
    block_fidelity,
    build_likely_subspace,
    compress_block,
    data_expansion_demo,
    expansion_isometry,
    qdc_row,
    schmidt_coding_counterexample,
    sequence_state,
    source_from_entangled_state,
    source_q,
    source_q_prime,
    two_sided_compressed_state,
    two_sided_compression_analysis,
)

PI6 = math.pi / 6


def brute_fidelity(source: QuantumSource, n: int, delta: float) -> float:
    """Enumerate every x and use an explicit projector built from sorted eigenvalues of rho^(n)."""
    rho = source.density_matrix.matrix
    rho_n = rho
    for _ in range(n - 1):
        rho_n = np.kron(rho_n, rho)
    vals, vecs = np.linalg.eigh(rho_n)
    sub = build_likely_subspace(source, n, delta)
    keep = vecs[:, np.argsort(vals)[::-1][: sub.dimension]]
    proj = keep @ keep.conj().T
    total = 0.0
    for bits in itertools.product("01", repeat=n):
        x = "".join(bits)
        px = math.prod(source.probabilities[int(b)] for b in x)
        psi = sequence_state(source, x)
        pp = float(np.vdot(psi, proj @ psi).real)
        # fidelity of W^x: |<psi|P psi>|^2 + (1 - p) |<psi|junk>|^2
        junk = sub.junk_state()
        total += px * (pp**2 + (1 - pp) * abs(np.vdot(psi, junk)) ** 2)
    return total


def test_source_q_is_orthogonal_with_binomial_weights():
    src = source_q(PI6)
    assert np.allclose(sorted(src.probabilities), [0.25, 0.75])
    a, b = src.signal_states
    assert abs(np.vdot(a, b)) < 1e-12


def test_source_q_prime_states():
    src = source_q_prime(PI6)
    assert np.allclose(src.probabilities, [0.5, 0.5])
    c, s = math.cos(PI6), math.sin(PI6)
    targets = [np.array([c, s]), np.array([c, -s])]
    for v in src.signal_states:
        assert min(abs(abs(np.vdot(v, t)) - 1) for t in targets) < 1e-12
    assert abs(np.vdot(*src.signal_states)) == pytest.approx(math.cos(2 * PI6))


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 1.5))
def test_any_bob_measurement_gives_the_same_rho(seed, theta):
    u = random_unitary(2, np.random.default_rng(seed))
    op = LocalOperation.projective(Party.BOB, [np.outer(u[:, j], u[:, j].conj()) for j in range(2)])
    src = source_from_entangled_state(pair_state(theta), op)
    assert np.max(np.abs(src.density_matrix.matrix - partial_trace(pair_state(theta), "A").matrix)) < 1e-10


def test_source_requires_bob():
    op = LocalOperation.projective(Party.ALICE, [np.diag([1, 0]), np.diag([0, 1])])
    with pytest.raises(ValueError):
        source_from_entangled_state(pair_state(0.3), op)


def test_source_validation():
    with pytest.raises(ValueError):
        QuantumSource((np.array([1, 0]),), (0.5,))


def test_likely_subspace_binomial_tail():
    sub = build_likely_subspace(source_q_prime(PI6), 8, 0.1)
    cut = max(sub.weights)
    assert sub.weights == tuple(range(cut + 1))
    tail = sum(math.comb(8, w) * 0.75 ** (8 - w) * 0.25**w for w in range(cut + 1))
    assert sub.retained_mass == pytest.approx(tail, abs=1e-14)
    assert sub.dimension == sum(math.comb(8, w) for w in range(cut + 1))


@given(st.floats(0.05, math.pi / 4 - 0.01), st.integers(1, 200), st.floats(0.01, 0.5))
def test_dimension_bound(theta, n, delta):
    sub = build_likely_subspace(source_q_prime(theta), n, delta)
    assert math.log2(sub.dimension) <= n * (binary_entropy(math.cos(theta) ** 2) + delta) + 1e-9
    assert 0 < sub.retained_mass <= 1.0


def test_retaining_everything_gives_fidelity_one():
    src = source_q_prime(PI6)
    sub = build_likely_subspace(src, 6, 0.5)
    assert sub.dimension == 64 and sub.retained_mass == pytest.approx(1.0)
    assert block_fidelity(src, 6, 0.5) == pytest.approx(1.0)
    psi = sequence_state(src, "010011")
    w = compress_block(psi, sub)
    assert np.allclose(w.matrix, np.outer(psi, psi.conj()), atol=1e-12)


def test_projection_mass_independent_of_x():
    src = source_q_prime(PI6)
    sub = build_likely_subspace(src, 8, 0.1)
    p = sub.projector()
    masses = [float(np.vdot(v, p @ v).real) for v in
              (sequence_state(src, "".join(b)) for b in itertools.product("01", repeat=8))]
    assert max(masses) - min(masses) < 1e-12
    assert masses[0] == pytest.approx(sub.retained_mass, abs=1e-12)


def test_compressed_output_has_unit_trace():
    src = source_q_prime(PI6)
    sub = build_likely_subspace(src, 6, 0.1)
    w = compress_block(sequence_state(src, "011010"), sub)
    assert np.trace(w.matrix).real == pytest.approx(1.0, abs=1e-10)


def test_block_fidelity_matches_brute_force():
    src = source_q_prime(PI6)
    closed = block_fidelity(src, 8, 0.1)
    assert block_fidelity(src, 8, 0.1, method="enumerate") == pytest.approx(closed, abs=1e-10)
    assert brute_fidelity(src, 8, 0.1) == pytest.approx(closed, abs=1e-10)
    assert closed == pytest.approx(0.7967176912352447, abs=1e-12)


def test_block_fidelity_trend():
    src = source_q_prime(PI6)
    assert block_fidelity(src, 10, 0.25) >= 0.9
    f = [block_fidelity(src, n, 0.1) for n in (8, 16, 32, 64, 128, 256)]
    assert all(b >= a for a, b in zip(f, f[1:]))
    assert f[-1] > 0.99


def test_block_fidelity_rejects_unknown_method():
    with pytest.raises(ValueError):
        block_fidelity(source_q_prime(PI6), 4, 0.1, method="guess")


def test_two_sided_max_entangled_pairs_stay_maximal():
    rep = two_sided_compression_analysis(math.pi / 4, 8, 0.1)
    assert rep.max_entangled_fidelity == pytest.approx(1.0)
    assert rep.dispersion == pytest.approx(1.0)


def test_two_sided_degrades_with_n():
    reps = [two_sided_compression_analysis(PI6, n, 0.2) for n in (4, 8, 16, 32)]
    fids = [r.max_entangled_fidelity for r in reps]
    disp = [r.dispersion for r in reps]
    assert all(b < a for a, b in zip(fids, fids[1:]))
    assert all(b > a for a, b in zip(disp, disp[1:]))


@pytest.mark.parametrize("n,delta", [(4, 0.2), (6, 0.05), (8, 0.1)])
def test_two_sided_closed_form_matches_dense(n, delta):
    rep = two_sided_compression_analysis(PI6, n, delta)
    psi_c = two_sided_compressed_state(PI6, n, delta)
    assert psi_c.dim_a == rep.retained_dim == psi_c.dim_b
    assert max_entangled_fidelity(psi_c) == pytest.approx(rep.max_entangled_fidelity, abs=1e-10)


def test_sequence_label():
    x = SequenceLabel("011")
    assert x.complement.bits == "100" and x.n == 3
    with pytest.raises(ValueError):
        SequenceLabel("012")
    src = source_q_prime(PI6)
    psi0, psi1 = src.signal_states
    assert np.allclose(sequence_state(src, x.complement), np.kron(np.kron(psi1, psi0), psi0))


def test_counterexample_certificate():
    rng = np.random.default_rng(31)
    for _ in range(10):
        rep = schmidt_coding_counterexample(PI6, SequenceLabel.random(10, rng))
        assert rep.amplitude_deviation < 1e-10 and rep.encoding_deviation < 1e-10
        assert abs(rep.overlap) == pytest.approx(2.0**-10, abs=1e-12)
        assert rep.fidelity_ceiling == pytest.approx((1 + 2.0**-10) / 2, abs=1e-12)


def test_counterexample_orthogonal_at_quarter_turn():
    rep = schmidt_coding_counterexample(math.pi / 4, "0110")
    assert abs(rep.overlap) < 1e-15


def test_data_expansion():
    v = expansion_isometry()
    assert np.allclose(v.T @ v, np.eye(4))
    rep = data_expansion_demo(np.random.default_rng(0))
    assert rep.roundtrip_error < 1e-10
    for eig, ent in zip(rep.marginal_eigenvalues, rep.marginal_entropies):
        assert np.allclose(eig, (0.75, 0.25), atol=1e-12)
        assert ent == pytest.approx(0.8113, abs=1e-3)


def test_qdc_row_columns():
    row = qdc_row(PI6, 8, 0.1)
    assert row.fidelity == pytest.approx(block_fidelity(source_q_prime(PI6), 8, 0.1))
    assert row.overlap == pytest.approx(0.5**8)
    rows = [qdc_row(PI6, n, 0.25) for n in (4, 8, 16)]
    assert all(b.max_ent_fidelity < a.max_ent_fidelity for a, b in zip(rows, rows[1:]))
    assert isinstance(build_likely_subspace(source_q_prime(PI6), 4, 0.1), LikelySubspace)
