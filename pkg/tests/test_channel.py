import numpy as np
import pytest

from antopt.channel import (ChannelRealization, PathAngles, assemble_channel,
                            field_response_vector, sample_geometric_channel)


def single_path_angles(theta, phi):
    return PathAngles([theta], [phi], [theta], [phi])


class TestFieldResponse:
    def test_origin_gives_ones(self):
        rng = np.random.default_rng(0)
        real = sample_geometric_channel(8, 1.0, rng)
        f = field_response_vector((0, 0), real.angles, "rx")
        assert np.allclose(f, 1.0)

    def test_half_wavelength_x(self):
        angles = single_path_angles(np.pi / 2, 0.0)
        f = field_response_vector((0.5, 0), angles, "rx")
        assert np.allclose(f, [-1.0], atol=1e-12)

    def test_half_wavelength_y(self):
        angles = single_path_angles(0.0, 0.3)
        f = field_response_vector((0, 0.5), angles, "rx")
        assert np.allclose(f, [-1.0], atol=1e-12)

    def test_unit_modulus_norm(self):
        rng = np.random.default_rng(1)
        real = sample_geometric_channel(10, 1.0, rng)
        for _ in range(20):
            pos = rng.uniform(-5, 5, 2)
            f = field_response_vector(pos, real.angles, "tx")
            assert abs(np.linalg.norm(f) - np.sqrt(10)) < 1e-12

    def test_invalid_side(self):
        angles = single_path_angles(0.1, 0.1)
        with pytest.raises(ValueError):
            field_response_vector((0, 0), angles, "up")


class TestAssemble:
    def test_all_ones(self):
        angles = single_path_angles(0.2, 0.4)
        real = ChannelRealization(angles=angles, sigma=[[1.0]])
        h = assemble_channel(np.zeros((3, 2)), np.zeros((4, 2)), real)
        assert h.shape == (4, 3)
        assert np.allclose(h, 1.0)

    def test_single_path_modulus(self):
        angles = single_path_angles(1.0, 0.7)
        real = ChannelRealization(angles=angles, sigma=[[0.3 - 0.4j]])
        rng = np.random.default_rng(3)
        for _ in range(10):
            h = assemble_channel(rng.uniform(-2, 2, (1, 2)),
                                 rng.uniform(-2, 2, (1, 2)), real)
            assert abs(abs(h[0, 0]) - 0.5) < 1e-12

    def test_entrywise_oracle(self):
        rng = np.random.default_rng(4)
        real = sample_geometric_channel(6, 1.0, rng)
        tx = rng.uniform(-2, 2, (3, 2))
        rx = rng.uniform(-2, 2, (5, 2))
        h = assemble_channel(tx, rx, real)
        for m in range(5):
            for n in range(3):
                f = field_response_vector(rx[m], real.angles, "rx")
                g = field_response_vector(tx[n], real.angles, "tx")
                expected = np.sum(np.conj(f)[:, None] * real.sigma
                                  * g[None, :])
                assert abs(h[m, n] - expected) < 1e-12

    def test_translation_leaves_modulus_for_single_path(self):
        angles = single_path_angles(0.9, 1.3)
        real = ChannelRealization(angles=angles, sigma=[[1.1 + 0.2j]])
        rng = np.random.default_rng(5)
        tx = rng.uniform(-1, 1, (2, 2))
        rx = rng.uniform(-1, 1, (3, 2))
        h1 = np.abs(assemble_channel(tx, rx, real))
        h2 = np.abs(assemble_channel(tx, rx + np.array([0.37, -1.4]), real))
        assert np.allclose(h1, h2, atol=1e-12)

    def test_dimension_mismatch(self):
        angles = PathAngles([0.1, 0.2], [0.1, 0.2], [0.1], [0.1])
        real = ChannelRealization(angles=angles, sigma=[[1.0, 0.0]])
        with pytest.raises(ValueError):
            # sigma is 1x2 but the rx side raster has 2 paths
            bad = ChannelRealization(angles=angles, sigma=np.eye(2))
            assemble_channel(np.zeros((1, 2)), np.zeros((1, 2)), bad)


class TestSampler:
    def test_variance_structure(self):
        rng = np.random.default_rng(6)
        draws = [sample_geometric_channel(10, 1.0, np.random.default_rng(s))
                 for s in range(4000)]
        first = np.array([abs(d.sigma[0, 0]) ** 2 for d in draws])
        rest = np.array([abs(d.sigma[3, 3]) ** 2 for d in draws])
        assert abs(first.mean() - 0.5) < 0.05
        assert abs(rest.mean() - 1 / 18) < 0.01

    def test_total_power_normalized(self):
        # mean total path power stays within 2% of unity
        total = 0.0
        n = 100000
        for s in range(n):
            real = sample_geometric_channel(10, 1.0,
                                            np.random.default_rng(70000 + s))
            total += float(np.sum(np.abs(np.diag(real.sigma)) ** 2))
        assert abs(total / n - 1.0) < 0.02

    def test_deterministic_given_seed(self):
        a = sample_geometric_channel(7, 2.0, np.random.default_rng(42))
        b = sample_geometric_channel(7, 2.0, np.random.default_rng(42))
        assert np.array_equal(a.sigma, b.sigma)
        assert np.array_equal(a.angles.theta_rx, b.angles.theta_rx)

    def test_single_path(self):
        real = sample_geometric_channel(1, 3.0, np.random.default_rng(0))
        assert real.sigma.shape == (1, 1)
        assert real.num_paths == 1

    def test_angles_in_range(self):
        real = sample_geometric_channel(50, 1.0, np.random.default_rng(9))
        for arr in (real.angles.theta_tx, real.angles.phi_tx,
                    real.angles.theta_rx, real.angles.phi_rx):
            assert np.all(arr >= 0) and np.all(arr < np.pi)

    def test_validation(self):
        with pytest.raises(ValueError):
            sample_geometric_channel(0, 1.0, np.random.default_rng(0))
        with pytest.raises(ValueError):
            sample_geometric_channel(4, -0.5, np.random.default_rng(0))
        with pytest.raises(ValueError):
            PathAngles([3.2], [0.1], [0.1], [0.1])
