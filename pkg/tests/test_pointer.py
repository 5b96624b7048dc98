import math
import warnings

import numpy as np
import pytest

from wvlab.hilbert import OperatorMatrix, identity, pauli, pauli_on, product_state, qubit, qubit_projector, tensor
from wvlab.pointer import (
    CHUNK_ATTEMPTS,
    PointerConfig,
    RegimeError,
    RegimeWarning,
    attempts_for,
    estimate_weak_value,
    post_selected_pointer,
    sample,
    strong_outcome_frequencies,
)
from wvlab.scenarios import all_builtins, build_epr_bohm, build_hardy, build_cheshire, build_pigeonhole
from wvlab.tsvf import TwoStateVector, abl_distribution, weak_value

from conftest import random_hermitian, random_state

PIGEON = build_pigeonhole(2)
Z1 = pauli_on("Z", 0, (2, 2))


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(epsilon=0), dict(epsilon=-1), dict(epsilon=0.1, sigma=0),
                                    dict(epsilon=float("inf")), dict(epsilon=0.1, grid_points=100),
                                    dict(epsilon=0.1, readout="phase")])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            PointerConfig(**kw)


class TestPostSelectedPointer:
    def test_vanishing_coupling_gives_overlap(self, rng):
        for _ in range(50):
            tsv = TwoStateVector(random_state(rng, [2, 2]), random_state(rng, [2, 2]))
            ps = post_selected_pointer(tsv, random_hermitian(rng, [2, 2]), PointerConfig(1e-9))
            assert ps.success_prob == pytest.approx(abs(tsv.overlap) ** 2, abs=1e-10)

    def test_vanishing_coupling_no_shift(self):
        ps = post_selected_pointer(PIGEON.tsv, Z1, PointerConfig(1e-9))
        assert ps.exact_mean("position") == pytest.approx(0, abs=1e-12)
        assert ps.exact_mean("momentum") == pytest.approx(0, abs=1e-8)

    def test_single_branch(self):
        tsv = TwoStateVector(qubit("up"), qubit("up"))
        cfg = PointerConfig(0.3, 1.0)
        ps = post_selected_pointer(tsv, pauli("Z"), cfg)
        assert ps.success_prob == pytest.approx(1, abs=1e-12)
        assert ps.exact_mean() == pytest.approx(0.3, abs=1e-12)
        g = ps.grid(cfg)
        assert g[np.argmax(ps.density(g))] == pytest.approx(0.3, abs=g[1] - g[0])

    def test_orthogonal_selection_is_not_an_error(self):
        tsv = TwoStateVector(qubit("up"), qubit("down"))
        ps = post_selected_pointer(tsv, pauli("X"), PointerConfig(0.5))
        assert 0 < ps.success_prob < 0.1

    def test_requires_hermitian(self):
        with pytest.raises(ValueError):
            post_selected_pointer(PIGEON.tsv, OperatorMatrix(np.triu(np.ones((4, 4))), (2, 2)),
                                  PointerConfig(0.1))

    @pytest.mark.parametrize("readout", ["position", "momentum"])
    def test_closed_form_matches_quadrature(self, rng, readout):
        for _ in range(30):
            tsv = TwoStateVector(random_state(rng, [2, 2]), random_state(rng, [2, 2]))
            op = random_hermitian(rng, [2, 2])
            cfg = PointerConfig(float(rng.uniform(0.01, 3)), float(rng.uniform(0.5, 2)),
                                readout=readout, grid_points=8192, grid_pad=10)
            ps = post_selected_pointer(tsv, op, cfg)
            norm, mean, _ = ps.grid_moments(cfg)
            assert norm == pytest.approx(ps.success_prob, rel=1e-8, abs=1e-12)
            assert mean == pytest.approx(ps.exact_mean(readout), abs=1e-8)
            assert ps.success_prob <= 1 + 1e-9

    def test_momentum_calibration(self):
        # mean momentum -> eps * Im(A_w) / (2 sigma^2) with O(eps^2) relative error
        w = weak_value(PIGEON.tsv, Z1)
        assert w == pytest.approx(1j)
        for sigma in (0.5, 1.0, 2.0):
            errs = []
            for eps in (0.2, 0.1, 0.05, 0.01):
                cfg = PointerConfig(eps * sigma, sigma, "momentum")
                ps = post_selected_pointer(PIGEON.tsv, Z1, cfg)
                _, grid_mean, _ = ps.grid_moments(cfg)
                first_order = cfg.epsilon * w.imag / (2 * sigma ** 2)
                errs.append(abs(grid_mean / first_order - 1))
                assert errs[-1] <= eps ** 2
            assert errs == sorted(errs, reverse=True)

    def test_position_calibration(self):
        hardy = build_hardy()
        op = hardy.observables["NO.NO"]
        errs = []
        for eps in (0.2, 0.1, 0.05, 0.01):
            cfg = PointerConfig(eps)
            ps = post_selected_pointer(hardy.tsv, op, cfg)
            _, grid_mean, _ = ps.grid_moments(cfg)
            errs.append(abs(grid_mean / eps - (-1)))
            assert errs[-1] <= eps ** 2
        assert errs == sorted(errs, reverse=True)

    def test_bias_shrinks_with_coupling(self):
        for s in all_builtins():
            for label, op in s.observables.items():
                w = weak_value(s.tsv, op)
                prev = None
                for eps in (0.1, 0.05, 0.01):
                    ps = post_selected_pointer(s.tsv, op, PointerConfig(eps))
                    est = complex(ps.exact_mean("position"), 2 * ps.exact_mean("momentum")) / eps
                    bias = abs(est - w)
                    if prev is not None:
                        assert bias <= prev + 1e-12, (s.name, label, eps)
                    prev = bias


class TestSample:
    def test_gaussian_sanity(self):
        tsv = TwoStateVector(qubit("up"), qubit("up"))
        cfg = PointerConfig(0.7, 1.3)
        ps = post_selected_pointer(tsv, pauli("Z"), cfg)
        b = sample(ps, cfg, 200_000, seed=3)
        assert b.accepted == b.attempted == 200_000
        assert abs(b.mean() - 0.7) <= 4 * 1.3 / math.sqrt(b.accepted)
        assert np.std(b.readings) == pytest.approx(1.3, rel=0.01)

    def test_acceptance_rate(self):
        hardy = build_hardy()
        cfg = PointerConfig(0.05)
        ps = post_selected_pointer(hardy.tsv, hardy.observables["NO.NO"], cfg)
        b = sample(ps, cfg, 500_000, seed=5)
        p = ps.success_prob
        assert abs(b.accepted - p * 5e5) <= 5 * math.sqrt(5e5 * p * (1 - p))
        assert len(b.readings) == b.accepted <= b.attempted

    @pytest.mark.parametrize("readout", ["position", "momentum"])
    def test_distribution_ks(self, readout):
        # strong coupling so the interference structure is visible in the density
        hardy = build_hardy()
        cfg = PointerConfig(1.5, 1.0, readout)
        ps = post_selected_pointer(hardy.tsv, hardy.observables["NO.NO"] + hardy.observables["O.NO"], cfg)
        b = sample(ps, cfg, 400_000, seed=11)
        grid = np.linspace(-15, 15, 20001)
        rho = ps.density(grid, readout)
        cdf = np.concatenate([[0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(grid))])
        cdf /= cdf[-1]
        xs = np.sort(b.readings)
        model = np.interp(xs, grid, cdf)
        n = len(xs)
        d = max(np.max(np.arange(1, n + 1) / n - model), np.max(model - np.arange(n) / n))
        assert d <= 1.63 / math.sqrt(n)

    def test_hardy_weak_shift(self):
        hardy = build_hardy()
        cfg = PointerConfig(0.05)
        ps = post_selected_pointer(hardy.tsv, hardy.observables["NO.NO"], cfg)
        b = sample(ps, cfg, attempts_for(ps, 100_000), seed=42)
        assert b.accepted >= 100_000
        assert abs(b.mean() - (-0.05)) <= 5 * b.std_error() + abs(ps.exact_mean() + 0.05)

    def test_cheshire_smile_right_shift(self):
        ches = build_cheshire()
        cfg = PointerConfig(0.05)
        ps = post_selected_pointer(ches.tsv, ches.observables["sigma_z Pi_R"], cfg)
        b = sample(ps, cfg, attempts_for(ps, 100_000), seed=42)
        assert abs(b.mean()) <= 5 * b.std_error()

    def test_deterministic(self):
        cfg = PointerConfig(0.05)
        ps = post_selected_pointer(PIGEON.tsv, Z1, cfg)
        n = 3 * CHUNK_ATTEMPTS + 17
        a = sample(ps, cfg, n, seed=99, workers=1)
        b = sample(ps, cfg, n, seed=99, workers=4)
        c = sample(ps, cfg, n, seed=99, workers=3)
        np.testing.assert_array_equal(a.readings, b.readings)
        np.testing.assert_array_equal(a.readings, c.readings)
        d = sample(ps, cfg, n, seed=100)
        assert not np.array_equal(a.readings[:100], d.readings[:100])

    def test_thread_env(self, monkeypatch):
        cfg = PointerConfig(0.05)
        ps = post_selected_pointer(PIGEON.tsv, Z1, cfg)
        monkeypatch.setenv("WVLAB_THREADS", "1")
        a = sample(ps, cfg, 2 * CHUNK_ATTEMPTS, seed=1)
        monkeypatch.setenv("WVLAB_THREADS", "4")
        b = sample(ps, cfg, 2 * CHUNK_ATTEMPTS, seed=1)
        np.testing.assert_array_equal(a.readings, b.readings)

    def test_rejects_zero_attempts(self):
        cfg = PointerConfig(0.05)
        with pytest.raises(ValueError):
            sample(post_selected_pointer(PIGEON.tsv, Z1, cfg), cfg, 0, seed=1)


def _estimate(s, op, eps=0.05, seed=42, accepted=100_000):
    cfg = PointerConfig(eps)
    ps = post_selected_pointer(s.tsv, op, cfg)
    return estimate_weak_value(s.tsv, op, cfg, attempts_for(ps, accepted), seed)


class TestEstimateWeakValue:
    def test_imaginary_sigma_z(self):
        est = _estimate(PIGEON, Z1)
        assert abs(est.value - 1j) <= 5 * est.combined_error
        assert est.position.accepted >= 100_000 and est.momentum.accepted >= 100_000

    def test_hardy(self):
        hardy = build_hardy()
        est = _estimate(hardy, hardy.observables["NO.NO"])
        assert abs(est.value - (-1)) <= 5 * est.combined_error

    def test_epr_negative_half(self):
        epr = build_epr_bohm()
        est = _estimate(epr, epr.observables["A:up_y B:up_x"])
        assert abs(est.value - (-0.5)) <= 5 * est.combined_error

    @pytest.mark.parametrize("eps", [0.01, 0.05, 0.1])
    def test_weak_regime_consistency(self, eps):
        for s in (build_hardy(), build_cheshire(), build_epr_bohm(), PIGEON):
            for label, op in s.observables.items():
                est = _estimate(s, op, eps=eps, seed=7, accepted=50_000)
                assert abs(est.value - weak_value(s.tsv, op)) <= 5 * est.combined_error, label

    def test_regime_guard(self):
        cfg = PointerConfig(0.5)
        with pytest.raises(RegimeError):
            estimate_weak_value(PIGEON.tsv, Z1, cfg, 1000, 1)
        with pytest.warns(RegimeWarning):
            estimate_weak_value(PIGEON.tsv, Z1, cfg, 1000, 1, force=True)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            estimate_weak_value(PIGEON.tsv, Z1, cfg, 1000, 1, max_ratio=1.0)


def _within_3se(freqs, dist):
    n = sum(c for _, _, c in freqs)
    for a, f, _ in freqs:
        p = dist.probability(a)
        assert abs(f - p) <= 3 * math.sqrt(p * (1 - p) / n) + 1e-12, (a, f, p)


class TestStrong:
    def test_pigeonhole_parity(self):
        zz = PIGEON.observables["Z1Z2"]
        cfg = PointerConfig(50.0)
        freqs = strong_outcome_frequencies(PIGEON.tsv, zz, cfg, 100_000, 42)
        assert dict((a, f) for a, f, _ in freqs)[-1.0] == 1.0
        _within_3se(freqs, abl_distribution(PIGEON.tsv, zz))

    def test_preselected_up(self):
        tsv = TwoStateVector(qubit("up"), qubit("+x"))
        freqs = strong_outcome_frequencies(tsv, pauli("Z"), PointerConfig(50.0), 50_000, 1)
        assert dict((a, f) for a, f, _ in freqs) == {-1.0: 0.0, 1.0: 1.0}

    def test_x_to_y_even(self):
        tsv = TwoStateVector(qubit("+x"), qubit("+y"))
        freqs = strong_outcome_frequencies(tsv, pauli("Z"), PointerConfig(50.0), 100_000, 2)
        _within_3se(freqs, abl_distribution(tsv, pauli("Z")))

    def test_calibrated_across_seeds(self, rng):
        # the spread of the total-variation statistic over many seeds must
        # match direct multinomial draws from the ABL probabilities
        op = OperatorMatrix(np.diag([-2.0, 1.0, 2.0]), (3,))
        tsv = TwoStateVector(random_state(rng, (3,)), random_state(rng, (3,)))
        p = np.array([q for _, q in abl_distribution(tsv, op).outcomes])
        cfg = PointerConfig(50.0)
        attempts = attempts_for(post_selected_pointer(tsv, op, cfg), 5000)

        def ratio(f, n):
            return np.abs(f - p).sum() / np.sqrt(p * (1 - p) / n).sum()

        sampled, pooled = [], np.zeros(3)
        for seed in range(300):
            freqs = strong_outcome_frequencies(tsv, op, cfg, attempts, seed)
            counts = np.array([c for _, _, c in freqs])
            pooled += counts
            sampled.append(ratio(counts / counts.sum(), counts.sum()))
        n = int(pooled.sum() / 300)
        draws = rng.multinomial(n, p, size=20_000) / n
        reference = np.abs(draws - p).sum(axis=1) / np.sqrt(p * (1 - p) / n).sum()
        assert abs(np.mean(sampled) - reference.mean()) < 0.12
        se = np.sqrt(p * (1 - p) / pooled.sum())
        assert np.all(np.abs(pooled / pooled.sum() - p) <= 4 * se)

    def test_separation_guard(self):
        cfg = PointerConfig(5.0)
        with pytest.raises(RegimeError):
            strong_outcome_frequencies(PIGEON.tsv, Z1, cfg, 100, 1)
        with pytest.warns(RegimeWarning):
            strong_outcome_frequencies(PIGEON.tsv, Z1, cfg, 100, 1, force=True)
