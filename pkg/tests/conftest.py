"""Shared corpora for the test suite.

Session-scoped simulations keep the suite fast: the small corpus backs
linkage/audit/empirics unit tests, the larger frozen corpora back the
acceptance gates.
"""

import pytest

from linecall.core import AttentionCost
from linecall.simulator import SimConfig, simulate


@pytest.fixture(scope="session")
def small_sim():
    """Small mixed pre/post corpus with frequent near-line balls."""
    cfg = SimConfig(
        master_seed=7,
        n_tournaments_pre=2,
        n_tournaments_post=3,
        matches_per_tournament=2,
        share_within_20mm=0.08,
        share_within_100mm=0.40,
        c_in=-1.2,
        c_out=-0.8,
        eta_in=0.4,
        eta_out=0.4,
    )
    return simulate(cfg)


@pytest.fixture(scope="session")
def lets_sim():
    """Same corpus shape but with lets enabled (audit false-positive mode)."""
    cfg = SimConfig(
        master_seed=7,
        n_tournaments_pre=2,
        n_tournaments_post=3,
        matches_per_tournament=2,
        share_within_20mm=0.08,
        share_within_100mm=0.40,
        c_in=-1.2,
        c_out=-0.8,
        eta_in=0.4,
        eta_out=0.4,
        lets_enabled=True,
        let_prob=0.05,
    )
    return simulate(cfg)


@pytest.fixture(scope="session")
def linkage_sim():
    """Frozen ~150-challenge corpus for the linkage acceptance gate."""
    cfg = SimConfig(
        master_seed=31,
        n_tournaments_pre=0,
        n_tournaments_post=26,
        matches_per_tournament=6,
        c_in=-2.0,
        c_out=-1.2,
        eta_in=0.427,
        eta_out=0.410,
    )
    return simulate(cfg)


@pytest.fixture(scope="session")
def behavior_sim():
    """Paper-calibrated corpus for the behavioral-pattern acceptance gate."""
    cfg = SimConfig(
        master_seed=5,
        n_tournaments_pre=6,
        n_tournaments_post=12,
        matches_per_tournament=6,
        c_in=-2.0,
        c_out=-1.2,
        eta_in=0.427,
        eta_out=0.410,
    )
    return simulate(cfg)


@pytest.fixture(scope="session")
def roundtrip_sim():
    """Frozen ~200k/200k-bounce corpus for the estimator round-trip gate."""
    cfg = SimConfig(
        master_seed=314159,
        n_tournaments_pre=14,
        n_tournaments_post=12,
        matches_per_tournament=36,
        share_within_20mm=0.1,
        share_within_100mm=0.5,
        in_share_20mm=0.55,
        in_share_20_100mm=0.55,
        bin_kappas=tuple(AttentionCost(2.0, 1.0) for _ in range(5)),
        c_in=-1.5,
        c_out=-0.5,
        eta_in=0.4,
        eta_out=0.4,
    )
    return simulate(cfg)
