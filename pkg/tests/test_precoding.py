"""ZF precoding, the two-stage phased-array scheme, and beam selection."""

import numpy as np
import pytest

from hybridsim import (
    ArrayGeometry,
    BeamSet,
    PhaseCodebookConfig,
    ScenarioConfig,
    beam_subset_rate,
    dft_matrix,
    direction_dictionary,
    gen_scenario,
    hybrid_factorize_omp,
    lahp_precoder,
    matched_codeword,
    select_beams_exhaustive,
    select_beams_ia,
    select_beams_incremental,
    select_beams_mm,
    to_beamspace,
    two_stage_full_pahp,
    zf_precoder,
)
from hybridsim.channel import _steer
from hybridsim.precoding import ZFRegularizationWarning


def _random_channel(rng, n_users, n):
    return rng.standard_normal((n_users, n)) + 1j * rng.standard_normal((n_users, n))


def _small_beamspaces(n_instances, n_users, n, seed=0):
    rng = np.random.default_rng(seed)
    bt = dft_matrix(ArrayGeometry(n))
    out = []
    for _ in range(n_instances):
        rows = []
        for _ in range(n_users):
            psi = rng.uniform(-0.5, 0.5, size=2)
            gains = np.array([1.0, 0.3]) * np.exp(
                1j * rng.uniform(0, 2 * np.pi, size=2)
            )
            rows.append(np.sum(gains[:, None] * _steer(n, psi).conj().T, axis=0))
        out.append(np.array(rows) @ bt.matrix)
    return out


def test_zf_identity_channel():
    d = zf_precoder(np.eye(4, dtype=complex))
    assert np.max(np.abs(d - np.eye(4))) < 1e-12


def test_zf_off_diagonal_and_power():
    rng = np.random.default_rng(0)
    h = _random_channel(rng, 4, 16)
    d = zf_precoder(h)
    g = h @ d
    off = g - np.diag(np.diag(g))
    assert np.max(np.abs(off)) < 1e-9
    assert abs(np.linalg.norm(d) ** 2 - 4.0) < 1e-9
    # every user gets the same transmit power
    assert np.allclose(np.linalg.norm(d, axis=0), 1.0)


def test_zf_rank_deficient_flagged():
    h = np.ones((3, 8), dtype=complex)
    with pytest.warns(ZFRegularizationWarning):
        d = zf_precoder(h)
    assert np.all(np.isfinite(d))


def test_matched_codeword_array_gain():
    n = 64
    h = np.sqrt(n) * _steer(n, 0.2).conj()
    a_exact = matched_codeword(h, PhaseCodebookConfig(bits=None))
    assert abs(np.abs(h @ a_exact) ** 2 - n) < 1e-9
    a_quant = matched_codeword(h, PhaseCodebookConfig(bits=4))
    assert np.abs(h @ a_quant) ** 2 >= 0.98 * n


def test_matched_codeword_constant_modulus_and_phase_set():
    rng = np.random.default_rng(1)
    h = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    a = matched_codeword(h, PhaseCodebookConfig(bits=4))
    assert np.allclose(np.abs(a), 1 / np.sqrt(32))
    steps = np.angle(a) / (2 * np.pi / 16)
    assert np.max(np.abs(steps - np.round(steps))) < 1e-9


def test_two_stage_analog_properties():
    rng = np.random.default_rng(2)
    h = _random_channel(rng, 4, 32)
    pair = two_stage_full_pahp(h, 4)
    assert np.allclose(np.abs(pair.analog), 1 / np.sqrt(32))
    combined = pair.combined
    assert abs(np.linalg.norm(combined) ** 2 - 4.0) < 1e-9
    # ZF on the effective channel: no inter-user interference
    g = h @ combined
    off = g - np.diag(np.diag(g))
    assert np.max(np.abs(off)) < 1e-9


def test_two_stage_collision_resolved():
    rng = np.random.default_rng(3)
    row = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    h = np.vstack([row, row * np.exp(0.3j)])  # identical quantized codewords
    with pytest.warns(ZFRegularizationWarning):
        pair = two_stage_full_pahp(h, 2)
    assert not np.allclose(pair.analog[:, 0], pair.analog[:, 1])


def test_two_stage_requires_one_chain_per_user():
    with pytest.raises(ValueError):
        two_stage_full_pahp(np.ones((4, 16), dtype=complex), 3)


def test_beam_set_distinct():
    with pytest.raises(ValueError):
        BeamSet(indices=(1, 1, 2))


def test_mm_single_user_strongest_first():
    bt = dft_matrix(ArrayGeometry(16))
    h = bt.matrix[:, 7].conj()[None, :]
    beams = select_beams_mm(to_beamspace(h, bt), 3)
    assert beams.indices[0] == 7


def test_mm_two_users_disjoint():
    bt = dft_matrix(ArrayGeometry(16))
    h = np.vstack([bt.matrix[:, 2].conj(), bt.matrix[:, 9].conj()])
    beams = select_beams_mm(to_beamspace(h, bt), 2)
    assert set(beams.indices) == {2, 9}


def test_mm_matches_brute_force_norms():
    rng = np.random.default_rng(4)
    ht = _random_channel(rng, 4, 16)
    beams = select_beams_mm(ht, 4)
    norms = np.linalg.norm(ht, axis=0)
    assert sorted(beams.indices) == sorted(np.argsort(-norms)[:4].tolist())


def test_incremental_diagonal_dominant():
    ht = np.zeros((2, 8), dtype=complex)
    ht[0, 1] = 1.0
    ht[1, 6] = 1.0
    beams = select_beams_incremental(ht, 2, 10.0)
    assert set(beams.indices) == {1, 6}


def test_incremental_beats_mm_usually():
    wins = 0
    for ht in _small_beamspaces(100, 2, 8, seed=5):
        inc = select_beams_incremental(ht, 2, 10.0)
        mm = select_beams_mm(ht, 2)
        nv = 2 / 10.0
        if beam_subset_rate(ht, inc.indices, nv) >= beam_subset_rate(
            ht, mm.indices, nv
        ) - 1e-12:
            wins += 1
    assert wins >= 95


def test_incremental_near_exhaustive():
    ratios = []
    for ht in _small_beamspaces(100, 2, 8, seed=6):
        nv = 2 / 10.0
        inc = beam_subset_rate(
            ht, select_beams_incremental(ht, 2, 10.0).indices, nv
        )
        opt = beam_subset_rate(ht, select_beams_exhaustive(ht, 2, 10.0).indices, nv)
        ratios.append(inc / opt)
    assert np.mean(ratios) > 0.95


def test_ia_no_collision_equals_mm():
    ht = np.zeros((2, 8), dtype=complex)
    ht[0, 1] = 1.0
    ht[1, 6] = 0.8
    ia = select_beams_ia(ht, 2, 10.0)
    mm = select_beams_mm(ht, 2)
    assert set(ia.indices) == set(mm.indices)


def test_ia_collision_at_least_mm():
    better = 0
    total = 0
    for ht in _small_beamspaces(100, 2, 8, seed=8):
        strongest = np.argmax(np.abs(ht), axis=1)
        if strongest[0] != strongest[1]:
            continue
        total += 1
        nv = 2 / 10.0
        r_ia = beam_subset_rate(ht, select_beams_ia(ht, 2, 10.0).indices, nv)
        r_mm = beam_subset_rate(ht, select_beams_mm(ht, 2).indices, nv)
        if r_ia >= r_mm - 1e-12:
            better += 1
    assert total > 0 and better == total


def test_ia_requires_enough_chains():
    with pytest.raises(ValueError):
        select_beams_ia(np.ones((4, 8), dtype=complex), 2, 10.0)


def test_ia_at_least_mm_default_scenario():
    bt = dft_matrix(ArrayGeometry(64))
    r_ia, r_mm = [], []
    for t in range(50):
        h = gen_scenario(
            ScenarioConfig(n_antennas=64, n_users=8, seed=(9, t))
        ).serving(0)
        ht = to_beamspace(h, bt)
        nv = 8 / 100.0
        r_ia.append(beam_subset_rate(ht, select_beams_ia(ht, 8, 20.0).indices, nv))
        r_mm.append(beam_subset_rate(ht, select_beams_mm(ht, 8).indices, nv))
    assert np.mean(r_ia) >= np.mean(r_mm)


def test_exhaustive_single_user_strongest():
    ht = np.array([[0.1, 0.9, 0.2, 0.05]], dtype=complex)
    beams = select_beams_exhaustive(ht, 1, 10.0)
    assert beams.indices == (1,)


def test_exhaustive_guard():
    with pytest.raises(ValueError):
        select_beams_exhaustive(np.ones((2, 256), dtype=complex), 16, 10.0)


def test_selection_ordering_small_instances():
    for ht in _small_beamspaces(50, 2, 10, seed=10):
        nv = 2 / 10.0
        r_ex = beam_subset_rate(ht, select_beams_exhaustive(ht, 3, 10.0).indices, nv)
        r_inc = beam_subset_rate(
            ht, select_beams_incremental(ht, 3, 10.0).indices, nv
        )
        r_mm = beam_subset_rate(ht, select_beams_mm(ht, 3).indices, nv)
        assert r_ex >= r_inc - 1e-9
        assert r_ex >= r_mm - 1e-9


def test_lahp_all_beams_equals_fully_digital():
    rng = np.random.default_rng(11)
    ht = _random_channel(rng, 3, 8)
    pair = lahp_precoder(ht, BeamSet(tuple(range(8))), 10.0)
    nv = 3 / 10.0
    from hybridsim import sum_rate

    full = sum_rate(ht, zf_precoder(ht), nv).sum_rate
    reduced = sum_rate(ht, pair.combined, nv).sum_rate
    assert abs(full - reduced) < 1e-8


def test_lahp_diagonal_support_zero_interference():
    ht = np.zeros((2, 8), dtype=complex)
    ht[0, 1] = 1.0
    ht[1, 5] = 2.0
    pair = lahp_precoder(ht, BeamSet((1, 5)), 10.0)
    g = ht @ pair.combined
    off = g - np.diag(np.diag(g))
    assert np.max(np.abs(off)) < 1e-12


def test_lahp_analog_is_selection_matrix():
    rng = np.random.default_rng(12)
    ht = _random_channel(rng, 2, 8)
    pair = lahp_precoder(ht, BeamSet((3, 6)), 10.0)
    assert set(np.unique(pair.analog)) <= {0.0, 1.0}
    assert np.allclose(pair.analog.T @ pair.analog, np.eye(2))
    assert abs(np.linalg.norm(pair.combined) ** 2 - 2.0) < 1e-9


def test_factorize_single_atom():
    dictionary = direction_dictionary(ArrayGeometry(16), 32)
    target = dictionary.atoms[:, 5][:, None]
    pair, residual = hybrid_factorize_omp(target, dictionary, 1)
    assert residual < 1e-10


def test_factorize_residual_non_increasing():
    rng = np.random.default_rng(13)
    dictionary = direction_dictionary(ArrayGeometry(16), 32)
    target = rng.standard_normal((16, 2)) + 1j * rng.standard_normal((16, 2))
    residuals = [
        hybrid_factorize_omp(target, dictionary, n_rf)[1] for n_rf in (1, 2, 4, 8)
    ]
    assert all(b <= a + 1e-12 for a, b in zip(residuals, residuals[1:]))


def test_factorize_exact_rank3():
    rng = np.random.default_rng(14)
    dictionary = direction_dictionary(ArrayGeometry(16), 32)
    mix = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    target = dictionary.atoms[:, [4, 12, 20]] @ mix
    _, residual = hybrid_factorize_omp(target, dictionary, 3)
    assert residual < 1e-8


def test_factorize_too_many_chains():
    dictionary = direction_dictionary(ArrayGeometry(16), 8)
    with pytest.raises(ValueError):
        hybrid_factorize_omp(np.ones((16, 2), dtype=complex), dictionary, 9)
