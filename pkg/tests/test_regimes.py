"""Behaviour at the raw link budget (no lumped gain on the small desk panel).

The desk profile adds ``link_gain_db`` so that a 10x20 panel sees the SNR of
the full-size one. These checks run the same sweep without it: the SNR is
then so low that log2(1+x) is nearly linear and clustering matters less,
but the structural properties must still hold.
"""
from dataclasses import replace

import pytest

from irs_tdma.clustering import Policy
from irs_tdma.config import load_profile
from irs_tdma.evaluation import mean_rate_table, run_sweep

ZS = (1, 5, 10, 25, 50)


@pytest.fixture(scope="module")
def table():
    s = replace(load_profile("desk").scenario, link_gain_db=0.0)
    return mean_rate_table(run_sweep(s, list(Policy), ZS, 10, master_seed=0))


def _at(table, p, z):
    return table[(Policy(p).value, z, None, (10, 20))]


def test_low_snr_regime(table):
    assert _at(table, Policy.UNCLUSTERED, 1) < 0.1


def test_every_policy_meets_the_bound_at_full_budget(table):
    un = _at(table, Policy.UNCLUSTERED, 1)
    for p in Policy:
        assert _at(table, p, 50) == pytest.approx(un, abs=1e-12)
        for z in ZS:
            assert _at(table, p, z) <= un + 1e-12


def test_cwc_curve_and_ordering(table):
    cwc = [_at(table, Policy.CWC, z) for z in ZS]
    assert all(b >= a - 1e-12 for a, b in zip(cwc, cwc[1:]))
    for z in ZS:
        assert _at(table, Policy.CWC, z) >= _at(table, Policy.OSCWC, z) - 1e-12
        assert _at(table, Policy.OSCWC, z) >= _at(table, Policy.HC, z)
        assert _at(table, Policy.HC, z) >= _at(table, Policy.RANDOM, z) - 1e-12
