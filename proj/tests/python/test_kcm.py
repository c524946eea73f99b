import itertools
from fractions import Fraction

import pytest

import kcm


def bernoulli_weight(bits, rho):
    w = Fraction(1)
    for v in bits:
        w *= rho if v else 1 - rho
    return w


def antisymmetric_current_m2(eta, b):
    # eta maps sites -1..2; constraint eta(-1) + eta(2).
    activity = eta[0] + eta[1] - 2 * eta[0] * eta[1]
    return Fraction(b) / 2 * activity * (eta[-1] + eta[2])


@pytest.mark.parametrize("rho", [Fraction(1, 3), Fraction(2, 3), Fraction(3, 7)])
def test_decomposition_matches_orthogonal_expansion(rho):
    b = Fraction(3, 2)
    sites = [-1, 0, 1, 2]
    chi = rho * (1 - rho)
    patterns = [dict(zip(sites, bits)) for bits in itertools.product([0, 1], repeat=4)]
    weights = [bernoulli_weight(p.values(), rho) for p in patterns]
    expected = {}
    for size in range(1, 5):
        for subset in itertools.combinations(sites, size):
            inner = sum(
                w * antisymmetric_current_m2(p, b) * _product(p[x] - rho for x in subset)
                for p, w in zip(patterns, weights)
            )
            if inner != 0:
                expected[subset] = inner / chi**size
    parts = kcm.asym_polynomials(2, rho, b)
    assert parts[0] == {}
    got = {}
    for part in parts:
        got.update(part)
    assert got == expected


def _product(values):
    out = Fraction(1)
    for v in values:
        out *= v
    return out


def test_centering_coefficients():
    rho = Fraction(2, 5)
    parts = kcm.center_monomial([0, 2, 3], rho)
    for degree, part in enumerate(parts):
        for sites, coeff in part.items():
            assert len(sites) == degree
            assert coeff == rho ** (3 - degree)
    assert len(parts[1]) == 3


def _good_box_m2(bits):
    ones = [i for i, v in enumerate(bits) if v]
    return any(b - a <= 2 for a, b in zip(ones, ones[1:]))


@pytest.mark.parametrize("rho", [Fraction(1, 4), Fraction(1, 2), Fraction(2, 3)])
def test_bad_box_probability_by_enumeration(rho):
    for ell in range(2, 11):
        bad = sum(
            bernoulli_weight(bits, rho)
            for bits in itertools.product([0, 1], repeat=ell)
            if not _good_box_m2(bits)
        )
        assert kcm.exact_bad_box_probability(rho, ell, 2) == bad
        assert bad <= kcm.bad_box_bound(rho, ell, 2) == (1 - rho**2) ** (ell // 2)
    assert kcm.exact_bad_box_probability(rho, 2, 2) == kcm.bad_box_bound(rho, 2, 2)


def test_exact_identities():
    assert kcm.flux_second(2, Fraction(3, 2), Fraction(2, 3)) == -6
    for m in (2, 3, 4):
        assert kcm.verify_gradient_condition(m)["passed"]
    assert kcm.verify_stationarity(2, Fraction(1, 2))["passed"]
    assert not kcm.verify_stationarity(2, Fraction(1, 2), corrupted=True)["passed"]
    with pytest.raises(OverflowError):
        kcm.verify_gradient_condition(5)


def test_trajectory_replays_legally_and_is_reproducible():
    params = kcm.ModelParams(2, "2/3", 1.0, 1.0, 8)
    assert params.ring_size == 64
    a = kcm.run(params, 0.2, 0.05, seed=3, stream_id=1)
    b = kcm.run(params, 0.2, 0.05, seed=3, stream_id=1)
    assert a.events == b.events
    assert len(a.events) > 100
    snaps = a.snapshots()
    assert len(snaps) == len(a.sampling_times) == 5
    eta = [int(c) for c in a.initial]
    L = len(eta)
    for _, bond, direction in a.events:
        x, y = bond, (bond + 1) % L
        assert (eta[(x - 1) % L] + eta[(y + 1) % L]) > 0
        assert eta[x] != eta[y]
        assert direction == (1 if eta[x] == 1 else -1)
        eta[x], eta[y] = eta[y], eta[x]
    assert "".join(map(str, eta)) == snaps[-1]


def test_exchange_path():
    eta = "0110000100000000"
    out = kcm.exchange_path(eta, 7, 12, 0, 4, 2)
    assert out["legal"] and out["exact"] and out["restored"]
    assert len(out["moves"]) <= out["length_bound"]
    with pytest.raises(ValueError):
        kcm.exchange_path("1000100010001000", 5, 10, 0, 3, 2)


def test_mean_current_and_ou_oracle():
    params = kcm.ModelParams(2, Fraction(2, 3), 1.0, 1.0, 16)
    rho = 2 / 3
    assert kcm.exact_mean_current(params) == pytest.approx(2 * rho**2 * (1 - rho) / 16)
    est, se = kcm.estimate_mean_current(params, 0.5, 64, seed=2)
    assert abs(est - kcm.exact_mean_current(params)) < 4 * se
    for t in (0.0, 0.3, 1.0):
        assert kcm.ou_covariance_gaussian(0.5, t, rho, 2) == pytest.approx(
            kcm.gaussian_ou_covariance(0.5, t, rho, 2), rel=1e-9
        )


def test_pipeline_outputs_are_deterministic():
    settings = dict(ns=[8, 16], times=[0.05, 0.1], n_traj=16, terms=["bgp2-inner", "rest"], seed=4)
    summary, csv, passed = kcm.run_pipeline("bgp2", **settings)
    again = kcm.run_pipeline("bgp2", **settings)
    assert (summary, csv, passed) == again
    assert summary["schema_version"] == 1
    assert summary["config"]["ns"] == [8, 16]
    assert summary["bgp2"][0]["fitted_constant"] > 0
    assert csv.startswith("# schema_version=1")
    summary, csv, _ = kcm.run_pipeline("simulate", n=8, t_max=0, n_traj=2)
    assert len(csv.strip().splitlines()) == 4 + 1 + 2
    with pytest.raises(ValueError):
        kcm.run_pipeline("simulate", bogus=1)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        kcm.ModelParams(2, "3/2", 1.0, 1.0, 8)
    with pytest.raises(ValueError):
        kcm.ModelParams(2, "1/2", 1.0, 1.0, 8, ring_size=20)
