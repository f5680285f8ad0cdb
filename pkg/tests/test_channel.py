from dataclasses import replace

import numpy as np
import pytest

from irs_tdma.channel import (Scenario, build_channels, free_space_gain, generate_scenario,
                              load_scenario, nlos_gain, steering_vector_upa)
from irs_tdma.config import ConfigError
from tests.oracles import friis

SMALL = Scenario(K=20, n_g=(2, 2), n_i=(4, 8), seed=3)


def test_generate_is_deterministic():
    a = generate_scenario(SMALL)
    b = generate_scenario(SMALL)
    np.testing.assert_array_equal(a.ue_positions, b.ue_positions)
    c = generate_scenario(replace(SMALL, seed=4))
    assert not np.array_equal(a.ue_positions, c.ue_positions)


def test_positions_lie_in_sector():
    s = generate_scenario(replace(SMALL, K=2000))
    r = np.linalg.norm(s.ue_positions, axis=1)
    ang = np.degrees(np.arctan2(s.ue_positions[:, 1], s.ue_positions[:, 0]))
    assert r.max() <= 167.0 and np.all(np.abs(ang) <= 60.0)
    # area-uniform sampling gives E[r] = 2R/3
    assert r.mean() == pytest.approx(2 * 167.0 / 3, rel=0.02)
    # no UE collocated with the IRS
    assert np.linalg.norm(s.ue_positions - np.array([75.0, 100.0]), axis=1).min() >= 1.0


def test_channel_shapes_and_determinism():
    s = generate_scenario(SMALL)
    a, b = build_channels(s), build_channels(s)
    assert a.h.shape == (32, 4)
    assert len(a.g) == 20 and a.g[0].shape == (2, 32)
    for x, y in zip(a.g, b.g):
        np.testing.assert_array_equal(x, y)


def test_gnb_irs_link_is_rank_one():
    ch = build_channels(generate_scenario(Scenario(K=2, n_i=(6, 8), n_g=(4, 4))))
    sv = np.linalg.svd(ch.h, compute_uv=False)
    assert sv[1] <= 1e-10 * sv[0]
    d = np.hypot(75.0, 100.0)
    assert sv[0] ** 2 == pytest.approx(friis(d, 28e9) * 48 * 16, rel=1e-9)


def test_friis_reference_value():
    # (lambda / 4 pi d)^2 at 100 m and 28 GHz
    assert free_space_gain(100.0, 28e9) == pytest.approx(7.26e-11, rel=1e-3)
    assert free_space_gain(100.0, 28e9) == pytest.approx(friis(100.0, 28e9), rel=1e-12)
    assert free_space_gain(200.0, 28e9) * 4 == pytest.approx(free_space_gain(100.0, 28e9), rel=1e-12)


def test_nlos_loss_exponent():
    assert nlos_gain(10.0, 28e9, 3.19) / nlos_gain(20.0, 28e9, 3.19) == pytest.approx(2 ** 3.19, rel=1e-12)


def test_steering_examples():
    np.testing.assert_allclose(steering_vector_upa(1, 4, 0.0, 0.0), np.ones(4))
    np.testing.assert_allclose(steering_vector_upa(1, 3, np.pi / 2, 0.0), [1, -1, 1], atol=1e-12)
    np.testing.assert_allclose(steering_vector_upa(2, 1, 0.0, np.pi / 6), [1, 1j], atol=1e-12)
    a = steering_vector_upa(3, 5, 0.4, 0.2)
    np.testing.assert_allclose(np.abs(a), 1.0)
    assert a.shape == (15,)


def test_average_power_matches_path_loss():
    s = replace(Scenario(K=1, n_g=(2, 2), n_i=(4, 4), n_u=2), ue_positions=np.array([[75.0, 60.0]]))
    pl = nlos_gain(40.0, 28e9, 3.19)
    energy = []
    for seed in range(1500):
        g = build_channels(replace(s, seed=seed)).g[0]
        energy.append(np.sum(np.abs(g) ** 2))
    assert np.mean(energy) == pytest.approx(pl * 2 * 16, rel=0.05)


def test_doubling_distance_with_common_randomness():
    base = Scenario(K=1, n_g=(2, 2), n_i=(4, 4), seed=11)
    near = build_channels(replace(base, ue_positions=np.array([[75.0, 80.0]]))).g[0]
    far = build_channels(replace(base, ue_positions=np.array([[75.0, 60.0]]))).g[0]
    ratio = np.sum(np.abs(near) ** 2) / np.sum(np.abs(far) ** 2)
    assert ratio == pytest.approx(2 ** 3.19, rel=1e-9)


def test_common_random_numbers_across_irs_sizes():
    a = generate_scenario(replace(SMALL, n_i=(4, 8)))
    b = generate_scenario(replace(SMALL, n_i=(10, 20)))
    np.testing.assert_array_equal(a.ue_positions, b.ue_positions)


def test_collocated_ue_is_rejected():
    s = replace(SMALL, K=1, ue_positions=np.array([[75.0, 100.5]]))
    with pytest.raises(ValueError, match="collocated"):
        build_channels(s)


def test_missing_positions_rejected():
    with pytest.raises(ValueError):
        build_channels(SMALL)


def test_invalid_scenario_rejected():
    with pytest.raises(ValueError):
        generate_scenario(replace(SMALL, K=0))


def test_load_scenario_text():
    s = load_scenario("K = 12\nn_i = 4x8\n[scenario]\ntx_power_dbm = 30\n")
    assert (s.K, s.n_i, s.tx_power_dbm) == (12, (4, 8), 30.0)


def test_load_scenario_unknown_key():
    with pytest.raises(ConfigError) as err:
        load_scenario("K = 12\nfrobnicate = 1\n")
    assert err.value.key == "frobnicate"


def test_load_scenario_bad_value():
    with pytest.raises(ConfigError) as err:
        load_scenario("K = 1.5\n")
    assert err.value.key == "K"


def test_link_budget():
    s = Scenario()
    assert s.signal_power == pytest.approx(10 ** 0.3 * 1.0, rel=1e-12)
    assert s.noise_power == pytest.approx(10 ** (-20.4) * 1e8, rel=1e-12)
