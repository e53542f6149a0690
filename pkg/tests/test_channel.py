"""Noise-model tests, with brute-force event samplers as oracles."""

import numpy as np
import pytest

from phocs import channel
from phocs.channel import (ErrorConfig, PhysicalParams, effective_flip_prob,
                           effective_loss_prob, link_success_prob,
                           phenomenological_config, qubit_channel,
                           sample_error_config)
from phocs.lattice import QubitRole, build


def test_link_success_values():
    assert link_success_prob(1) == 0.5
    assert link_success_prob(7) == 127 / 128
    assert link_success_prob(0) == 0.0
    with pytest.raises(ValueError):
        link_success_prob(-1)


def test_identified_params():
    p = PhysicalParams.identified(1e-3, 2e-4, 7)
    assert p.p1 == p.p2 == p.p2_prime == 1e-3 == p.p_C
    assert p.p_dot == p.p_det == 2e-4 == p.p_L
    assert p.R == 7


def test_params_validated():
    with pytest.raises(ValueError):
        PhysicalParams.identified(1.5, 0, 7)
    with pytest.raises(ValueError):
        PhysicalParams.identified(0.1, 0, -1)


def test_flip_prob_zero_params():
    role = QubitRole(4)
    assert effective_flip_prob(role, PhysicalParams.identified(0, 0, 7)) == 0


def test_flip_prob_single_photon_formula():
    # one photon, no links: one precession event, one emission event, one
    # measurement event; p2_prime set to zero so link events drop out
    p = 1e-3
    params = PhysicalParams(p1=p, p2=p, p2_prime=0, p_dot=0, p_det=0, R=0)
    role = QubitRole(2)
    assert role.photons(0) == 1
    got = effective_flip_prob(role, params)
    want = 0.5 * (1 - (1 - 4 * p / 3) * (1 - 16 * p / 15) * (1 - 4 * p / 3))
    assert got == pytest.approx(want, rel=1e-12)
    # small-p slope: sum of the per-event Z rates, 2/3 + 8/15 + 2/3 = 28/15
    p_small = 1e-8
    prod = ((1 - 4 * p_small / 3) * (1 - 16 * p_small / 15)
            * (1 - 4 * p_small / 3))
    assert 0.5 * (1 - prod) / p_small == pytest.approx(28 / 15, rel=1e-6)


def test_flip_prob_event_sampler_oracle():
    # XOR-accumulation must agree with sampling the individual depolarizing
    # events and keeping their Z components
    rng = np.random.default_rng(2024)
    role = QubitRole(2)
    params = PhysicalParams.identified(1.14e-3, 0, 7)
    n = role.photons(params.R)
    links = role.fusion_bonds
    want = effective_flip_prob(role, params)
    N = 400_000
    flips = np.zeros(N, dtype=bool)
    for _ in range(n):  # precession + emission per photon
        flips ^= (rng.random(N) < params.p1) & (rng.random(N) < 2 / 3)
        flips ^= (rng.random(N) < params.p2) & (rng.random(N) < 8 / 15)
    for _ in range(links):
        flips ^= (rng.random(N) < params.p2_prime) & (rng.random(N) < 8 / 15)
    flips ^= (rng.random(N) < params.p1) & (rng.random(N) < 2 / 3)
    got = flips.mean()
    sigma = np.sqrt(want * (1 - want) / N)
    assert abs(got - want) < 4 * sigma


@pytest.mark.parametrize("seed", range(5))
def test_flip_prob_oracle_random_points(seed):
    rng = np.random.default_rng(seed)
    p1, p2, p2p = rng.uniform(0, 0.05, size=3)
    R = int(rng.integers(0, 4))
    bonds = int(rng.choice([2, 4]))
    params = PhysicalParams(p1=p1, p2=p2, p2_prime=p2p, p_dot=0, p_det=0,
                            R=R)
    role = QubitRole(bonds)
    want = effective_flip_prob(role, params)
    n = role.photons(R)
    N = 150_000
    flips = np.zeros(N, dtype=bool)
    for _ in range(n):
        flips ^= (rng.random(N) < p1) & (rng.random(N) < 2 / 3)
        flips ^= (rng.random(N) < p2) & (rng.random(N) < 8 / 15)
    for _ in range(bonds):
        flips ^= (rng.random(N) < p2p) & (rng.random(N) < 8 / 15)
    flips ^= (rng.random(N) < p1) & (rng.random(N) < 2 / 3)
    got = flips.mean()
    sigma = max(np.sqrt(want * (1 - want) / N), 1e-9)
    assert abs(got - want) < 5 * sigma


def test_flip_prob_monotone_and_bounded():
    role = QubitRole(4)
    base = PhysicalParams(p1=0.01, p2=0.02, p2_prime=0.005, p_dot=0,
                          p_det=0, R=7)
    f0 = effective_flip_prob(role, base)
    assert 0 < f0 <= 0.5
    for name in ("p1", "p2", "p2_prime"):
        kw = {"p1": base.p1, "p2": base.p2, "p2_prime": base.p2_prime,
              "p_dot": 0, "p_det": 0, "R": 7}
        kw[name] = kw[name] * 2
        assert effective_flip_prob(role, PhysicalParams(**kw)) >= f0
    worst = PhysicalParams(p1=0.75, p2=0.75, p2_prime=0.75, p_dot=0,
                           p_det=0, R=7)
    assert effective_flip_prob(role, worst) <= 0.5 + 1e-12


def test_loss_prob_values():
    role = QubitRole(2)
    assert effective_loss_prob(role, PhysicalParams.identified(0, 0, 7)) == 0
    p = PhysicalParams.identified(0, 5.3e-4, 7)
    want = 1 - (1 - 5.3e-4) ** 30
    assert effective_loss_prob(role, p) == pytest.approx(want, rel=1e-12)
    assert want == pytest.approx(1.58e-2, rel=2e-2)
    # single photon, certain loss at emission
    sure = PhysicalParams(p1=0, p2=0, p2_prime=0, p_dot=1.0, p_det=0, R=0)
    assert effective_loss_prob(role, sure) == 1.0


def test_loss_prob_bernoulli_oracle():
    rng = np.random.default_rng(5)
    role = QubitRole(4)
    params = PhysicalParams.identified(0, 2e-3, 3)
    want = effective_loss_prob(role, params)
    n = role.photons(params.R)
    N = 200_000
    survived = np.ones(N, dtype=bool)
    for _ in range(n):
        survived &= rng.random(N) >= params.p_dot
        survived &= rng.random(N) >= params.p_det
    got = 1 - survived.mean()
    sigma = np.sqrt(want * (1 - want) / N)
    assert abs(got - want) < 4 * sigma


def test_loss_prob_monotone():
    role2, role4 = QubitRole(2), QubitRole(4)
    lo = PhysicalParams.identified(0, 1e-4, 7)
    hi = PhysicalParams.identified(0, 2e-4, 7)
    assert effective_loss_prob(role2, lo) < effective_loss_prob(role2, hi)
    assert effective_loss_prob(role2, lo) < effective_loss_prob(role4, lo)


def test_qubit_channel_linkfail():
    qc = qubit_channel(QubitRole(4), PhysicalParams.identified(0, 0, 7))
    assert qc.p_linkfail == pytest.approx(2.0 ** -7)
    assert qc.p_lost == 0.0


# ---- sampling -----------------------------------------------------------------


def test_sample_zero_params_is_clean():
    lat = build(3)
    rng = np.random.default_rng(0)
    params = PhysicalParams.identified(0, 0, 60)  # links essentially certain
    cfg = sample_error_config(lat, params, rng)
    assert cfg.flips.sum() == 0
    assert cfg.lost.sum() == 0
    assert cfg.lost_outcomes.sum() == 0


def test_sample_r0_loses_everything():
    lat = build(3)
    rng = np.random.default_rng(0)
    params = PhysicalParams.identified(0, 0, 0)
    cfg = sample_error_config(lat, params, rng)
    assert cfg.lost.sum() == lat.n_faces
    assert cfg.flips.sum() == 0


def test_sample_flip_count_matches_expectation():
    lat = build(5)
    params = PhysicalParams.identified(1e-3, 0, 7)
    tables = channel.face_tables(lat, params)
    expect = ((1 - tables.p_lost) * tables.p_flip).sum()
    var = ((1 - tables.p_lost) * tables.p_flip
           * (1 - (1 - tables.p_lost) * tables.p_flip)).sum()
    n_samp = 10_000
    total = 0
    for i in range(n_samp):
        rng = np.random.default_rng(1000 + i)
        total += sample_error_config(lat, params, rng, tables).flips.sum()
    mean = total / n_samp
    sigma = np.sqrt(var / n_samp)
    assert abs(mean - expect) < 5 * sigma


def test_lost_faces_draw_fair_outcomes():
    lat = build(4)
    params = PhysicalParams.identified(0, 0, 2)  # heavy link loss
    n_lost = 0
    n_flipped = 0
    for i in range(300):
        rng = np.random.default_rng(i)
        cfg = sample_error_config(lat, params, rng)
        assert not (cfg.flips & cfg.lost).any()
        assert not (cfg.lost_outcomes & ~cfg.lost.astype(bool)).any()
        n_lost += int(cfg.lost.sum())
        n_flipped += int(cfg.lost_outcomes.sum())
    frac = n_flipped / n_lost
    assert abs(frac - 0.5) < 5 * np.sqrt(0.25 / n_lost)


def test_identified_zero_rates_leave_only_link_failures():
    # with p_C = p_L = 0 and finite R, heralded loss occurs at exactly the
    # all-attempts-fail rate per bond
    lat = build(4)
    params = PhysicalParams.identified(0.0, 0.0, 3)
    per_bond = 2.0 ** -3
    want = {b: 1 - (1 - per_bond) ** b for b in (2, 4)}
    counts = {2: 0, 4: 0}
    faces = {b: int((lat.fusion_bonds == b).sum()) for b in (2, 4)}
    n_samp = 400
    for i in range(n_samp):
        cfg = sample_error_config(lat, params, np.random.default_rng(i))
        assert cfg.flips.sum() == 0
        for b in (2, 4):
            counts[b] += int(cfg.lost[lat.fusion_bonds == b].sum())
    for b in (2, 4):
        n = faces[b] * n_samp
        got = counts[b] / n
        sigma = np.sqrt(want[b] * (1 - want[b]) / n)
        assert abs(got - want[b]) < 5 * sigma


def test_error_config_invariants_enforced():
    lat = build(2)
    ones = np.ones(lat.n_faces, dtype=np.uint8)
    zeros = np.zeros(lat.n_faces, dtype=np.uint8)
    with pytest.raises(ValueError):
        ErrorConfig(flips=ones, lost=ones, lost_outcomes=zeros,
                    mode="photonic")
    with pytest.raises(ValueError):
        ErrorConfig(flips=zeros, lost=zeros, lost_outcomes=ones,
                    mode="photonic")


def test_phenomenological_empty_and_counts():
    lat = build(5)
    rng = np.random.default_rng(0)
    cfg = phenomenological_config(lat, 0.0, 0.0, rng)
    assert cfg.flips.sum() == 0 and cfg.lost.sum() == 0
    assert cfg.mode == "phenomenological"

    p = 1e-2
    counts = []
    for i in range(4000):
        rng = np.random.default_rng(i)
        counts.append(
            phenomenological_config(lat, p, 0.0, rng).flips.sum())
    counts = np.asarray(counts, dtype=float)
    n, N = lat.n_faces, len(counts)
    mean_want = n * p
    var_want = n * p * (1 - p)
    assert abs(counts.mean() - mean_want) < 5 * np.sqrt(var_want / N)
    # variance consistent with a binomial (chi-square-style ratio bound)
    ratio = counts.var() / var_want
    assert 0.85 < ratio < 1.15


def test_phenomenological_validates_probabilities():
    lat = build(2)
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        phenomenological_config(lat, 1.5, 0.0, rng)
