from itertools import product

import numpy as np
import pytest

from cimsim.arrays import GeometrySpec, element_positions
from cimsim.channel import ChannelConfig, sample_realization, steering_matrix
from cimsim.codebook import (FpsBank, best_effective_path,
                             build_codebook, compose_switch_vector,
                             quantize_phase, quantize_weights, realized_phase)

LAM = 0.0107068735


def exhaustive_best_phase(theta: float, bank: FpsBank) -> float:
    wrapped = float(np.mod(theta, 2 * np.pi))
    sums = np.array(list(product((0, 1), repeat=bank.n_shifters))) @ bank.phases
    return float(sums[sums <= wrapped].max())


def make_realization(seed=1, clusters=8, paths=10, n=8):
    pos = element_positions(GeometrySpec.ula(n, LAM))
    cfg = ChannelConfig(clusters=clusters, paths_per_cluster=paths)
    return sample_realization(cfg, pos, pos, seed=seed), pos


class TestFpsBank:
    def test_phase_vector_structure(self):
        bank = FpsBank(4)
        np.testing.assert_allclose(bank.phases,
                                   [0.0, np.pi / 4, np.pi / 2, np.pi])
        assert bank.phases[0] == 0.0
        ratios = bank.phases[2:] / bank.phases[1:-1]
        np.testing.assert_allclose(ratios, 2.0)

    def test_rejects_single_shifter(self):
        with pytest.raises(ValueError):
            FpsBank(1)


class TestComposeSwitchVector:
    def test_zero_phase(self):
        for n_f in (2, 4, 8):
            omega = quantize_phase(0.0, FpsBank(n_f))
            assert omega == 0.0

    def test_three_quarter_pi_exact(self):
        bank = FpsBank(4)
        switches = compose_switch_vector(3 * np.pi / 4, bank)
        # pi/2 and pi/4 shifters closed (plus the free zero shifter)
        assert switches[2] == 1 and switches[1] == 1 and switches[3] == 0
        omega = realized_phase(switches, bank)
        assert abs(omega - 3 * np.pi / 4) < 1e-15
        assert abs(omega - exhaustive_best_phase(3 * np.pi / 4, bank)) < 1e-15

    def test_just_below_full_turn(self):
        bank = FpsBank(3)
        theta = 2 * np.pi - 1e-6
        omega = realized_phase(compose_switch_vector(theta, bank), bank)
        assert abs(omega - 3 * np.pi / 2) < 1e-12
        assert abs(omega - exhaustive_best_phase(theta, bank)) < 1e-12
        assert theta - omega < np.pi / 2

    def test_matches_exhaustive_subset_sum(self):
        thetas = np.linspace(0, 2 * np.pi, 500, endpoint=False)
        for n_f in range(2, 7):
            bank = FpsBank(n_f)
            for theta in thetas:
                omega = realized_phase(compose_switch_vector(theta, bank), bank)
                assert abs(omega - exhaustive_best_phase(theta, bank)) <= 1e-12

    def test_quantization_bound_exact(self):
        thetas = np.linspace(-2 * np.pi, 4 * np.pi, 1000)
        for n_f in (2, 3, 5, 8):
            bank = FpsBank(n_f)
            for theta in thetas:
                wrapped = float(np.mod(theta, 2 * np.pi))
                omega = realized_phase(compose_switch_vector(theta, bank), bank)
                assert 0.0 <= wrapped - omega < bank.phase_step

    def test_realized_phase_on_grid(self):
        rng = np.random.default_rng(8)
        for n_f in (3, 5):
            bank = FpsBank(n_f)
            for theta in rng.uniform(0, 2 * np.pi, 200):
                omega = quantize_phase(theta, bank)
                steps = omega / bank.phase_step
                assert abs(steps - round(steps)) < 1e-9

    def test_error_halves_per_added_shifter(self):
        thetas = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
        worst = []
        for n_f in (3, 4, 5, 6):
            bank = FpsBank(n_f)
            errs = [np.mod(t, 2 * np.pi) - quantize_phase(t, bank)
                    for t in thetas]
            worst.append(max(errs))
        for a, b in zip(worst, worst[1:]):
            assert abs(b / a - 0.5) < 0.02


class TestQuantizeWeights:
    def test_uniform_vector_unchanged(self):
        w = np.full(16, 1 / 4.0, dtype=complex)
        np.testing.assert_allclose(quantize_weights(w, FpsBank(4)), w,
                                   atol=1e-15)

    def test_magnitudes_preserved_and_error_bounded(self):
        rng = np.random.default_rng(2)
        w = np.exp(1j * rng.uniform(0, 2 * np.pi, 64)) / 8.0
        for n_f in (2, 4, 8):
            bank = FpsBank(n_f)
            q = quantize_weights(w, bank)
            np.testing.assert_allclose(np.abs(q), np.abs(w), atol=1e-15)
            err = np.mod(np.angle(w) - np.angle(q), 2 * np.pi)
            assert np.all(err < bank.phase_step + 1e-12)

    def test_matches_per_entry_switch_composition(self):
        rng = np.random.default_rng(11)
        w = np.exp(1j * rng.uniform(-np.pi, np.pi, 128)) / np.sqrt(128)
        bank = FpsBank(5)
        q = quantize_weights(w, bank)
        per_entry = np.array([quantize_phase(t, bank)
                              for t in np.mod(np.angle(w), 2 * np.pi)])
        circular_gap = np.angle(q * np.exp(-1j * per_entry) * np.sqrt(128))
        np.testing.assert_allclose(circular_gap, 0.0, atol=1e-12)

    def test_eight_shifters_alignment_bound(self):
        rng = np.random.default_rng(4)
        bank = FpsBank(8)
        bound = np.cos(2 * np.pi / 2 ** 7)   # 0.99879...
        for _ in range(20):
            w = np.exp(1j * rng.uniform(0, 2 * np.pi, 82)) / np.sqrt(82)
            q = quantize_weights(w, bank)
            assert abs(np.vdot(q, w)) >= bound


class TestBestEffectivePath:
    def test_single_path_cluster(self):
        realization, _ = make_realization(clusters=2, paths=1)
        assert best_effective_path(realization, 0) == 0
        assert best_effective_path(realization, 1) == 0

    def test_dominant_path_wins(self):
        realization, pos = make_realization(seed=21, clusters=1, paths=2, n=8)
        realization.gains = np.array([[10.0 + 0j, 0.1 + 0j]])
        from cimsim.channel import assemble_matrix
        realization.matrix = assemble_matrix(
            realization.gains, realization.aod_az, realization.aod_el,
            realization.aoa_az, realization.aoa_el, pos, pos, LAM)
        # exhaustive evaluation of both candidates
        gains = []
        for l in range(2):
            f = steering_matrix(pos, realization.aod_az[0, l],
                                realization.aod_el[0, l], LAM)[:, 0]
            w = steering_matrix(pos, realization.aoa_az[0, l],
                                realization.aoa_el[0, l], LAM)[:, 0]
            gains.append(abs(w.conj() @ realization.matrix @ f) ** 2)
        assert gains[0] > gains[1]
        assert best_effective_path(realization, 0) == 0

    def test_matches_bruteforce_on_random_instances(self):
        pos = element_positions(GeometrySpec.ula(4, LAM))
        cfg = ChannelConfig(clusters=3, paths_per_cluster=5)
        for seed in range(20):
            realization = sample_realization(cfg, pos, pos, seed=seed)
            for c in range(3):
                metrics = []
                for l in range(5):
                    f = steering_matrix(pos, realization.aod_az[c, l],
                                        realization.aod_el[c, l], LAM)[:, 0]
                    w = steering_matrix(pos, realization.aoa_az[c, l],
                                        realization.aoa_el[c, l], LAM)[:, 0]
                    metrics.append(abs(w.conj() @ realization.matrix @ f) ** 2)
                assert best_effective_path(realization, c) == int(np.argmax(metrics))

    def test_bad_cluster_index(self):
        realization, _ = make_realization(clusters=2, paths=2)
        with pytest.raises(ValueError):
            best_effective_path(realization, 5)


class TestBuildCodebook:
    def test_single_cluster_codeword_is_best_path_steering(self):
        realization, pos = make_realization(clusters=1, paths=4)
        cb = build_codebook(realization, 1)
        p = cb.best_paths[0]
        expected = steering_matrix(pos, realization.aod_az[0, p],
                                   realization.aod_el[0, p], LAM)[:, 0]
        np.testing.assert_allclose(cb.beamformers[:, 0], expected, atol=1e-13)

    def test_top2_matches_exhaustive_scan(self):
        realization, pos = make_realization(seed=5)
        cb = build_codebook(realization, 2)
        # oracle: full scan of all clusters at their best paths, then sort
        scan = []
        for c in range(8):
            metrics = []
            for l in range(10):
                f = steering_matrix(pos, realization.aod_az[c, l],
                                    realization.aod_el[c, l], LAM)[:, 0]
                w = steering_matrix(pos, realization.aoa_az[c, l],
                                    realization.aoa_el[c, l], LAM)[:, 0]
                metrics.append(abs(w.conj() @ realization.matrix @ f) ** 2)
            scan.append(max(metrics))
        expected = tuple(int(i) for i in np.argsort(scan)[::-1][:2])
        assert cb.clusters == expected

    def test_greedy_gains_non_increasing(self):
        realization, _ = make_realization(seed=13)
        cb = build_codebook(realization, 8)
        assert np.all(np.diff(cb.effective_gains) <= 1e-12)

    def test_he_codewords_on_phase_grid(self):
        realization, _ = make_realization(seed=3)
        cb = build_codebook(realization, 4, bank=FpsBank(8))
        step = 2 * np.pi / 2 ** 7
        for w in (cb.beamformers, cb.combiners):
            phases = np.mod(np.angle(w), 2 * np.pi)
            steps = phases / step
            assert np.all(np.abs(steps - np.round(steps)) < 1e-6)

    def test_he_selection_matches_ideal_selection(self):
        realization, _ = make_realization(seed=7)
        ideal = build_codebook(realization, 4)
        quantized = build_codebook(realization, 4, bank=FpsBank(4))
        assert ideal.clusters == quantized.clusters
        assert np.array_equal(ideal.best_paths, quantized.best_paths)

    def test_order_validation(self):
        realization, _ = make_realization(clusters=4, paths=2)
        with pytest.raises(ValueError):
            build_codebook(realization, 8)
        with pytest.raises(ValueError):
            build_codebook(realization, 3)
