import math
import unittest

import numpy as np
import pytest

from nodba.errors import AllMaskedError, DimensionMismatchError, PolicyParseError
from nodba.policy_network import (GREEDY, SAMPLE, NetArch, PolicyParams, forward, params_from_dict, params_to_dict,
                                  select_action, softmax)
from nodba.utils.seeding import derive_rng


class NetArchTest(unittest.TestCase):

    def test_default_shape(self):
        arch = NetArch.for_env(m=16, n_fixed=5)

        assert arch.input_dim == 96
        assert arch.output_dim == 16
        assert arch.layer_shapes == [(96, 8), (8, 8), (8, 8), (8, 8), (8, 16)]
        assert arch.param_count == 96 * 8 + 8 + 3 * (8 * 8 + 8) + 8 * 16 + 16

    def test_dimensions_must_be_positive(self):
        with pytest.raises(DimensionMismatchError):
            NetArch(input_dim=0, output_dim=4)

    def test_theta_size_checked(self):
        with pytest.raises(DimensionMismatchError):
            PolicyParams(NetArch(input_dim=2, output_dim=2), np.zeros(3))


class ForwardTest(unittest.TestCase):

    def test_zero_weights_give_uniform(self):
        arch = NetArch.for_env(m=16, n_fixed=5)
        dist = forward(PolicyParams.zeros(arch), np.ones(96))

        assert np.array_equal(dist, np.full(16, 1.0 / 16))

    def test_random_parameters_give_distributions(self):
        arch = NetArch.for_env(m=16, n_fixed=5)
        rng = np.random.default_rng(0)
        for _ in range(1000):
            params = PolicyParams(arch, rng.standard_normal(arch.param_count))
            dist = forward(params, rng.random(96))
            assert abs(dist.sum() - 1.0) <= 1e-9
            assert dist.min() >= 0.0

    def test_hand_computed_network(self):
        arch = NetArch(input_dim=2, output_dim=2, hidden_layers=1, hidden_width=2)
        theta = [1.0, -1.0, 0.5, 2.0,  # W1, row-major
                 0.0, -4.0,            # b1
                 1.0, 0.0, 0.0, 1.0,   # W2
                 0.0, 0.5]             # b2
        # h = relu([2, -1]) = [2, 0], logits = [2, 0.5]
        dist = forward(PolicyParams(arch, theta), np.array([1.0, 2.0]))

        assert abs(dist[0] - 1.0 / (1.0 + math.exp(-1.5))) <= 1e-12
        assert abs(dist[1] - 1.0 / (1.0 + math.exp(1.5))) <= 1e-12

    def test_input_length_checked(self):
        params = PolicyParams.zeros(NetArch.for_env(m=4, n_fixed=5))

        with pytest.raises(DimensionMismatchError):
            forward(params, np.ones(20))

    def test_softmax_is_shift_invariant(self):
        logits = np.array([1000.0, 1001.0, 999.0])

        assert np.allclose(softmax(logits), softmax(logits - 1000.0))


class SelectActionTest(unittest.TestCase):

    def test_sampling_never_picks_masked(self):
        rng = np.random.default_rng(1)
        dist = softmax(rng.standard_normal(16))
        mask = np.zeros(16, dtype=np.int8)
        mask[[1, 4, 9]] = 1
        for _ in range(10000):
            assert select_action(dist, mask, mode=SAMPLE, rng=rng).column in (1, 4, 9)

    def test_greedy_takes_best_permitted(self):
        dist = np.array([0.5, 0.3, 0.2])

        assert select_action(dist, np.array([1, 1, 1]), mode=GREEDY).column == 0
        assert select_action(dist, np.array([0, 1, 1]), mode=GREEDY).column == 1
        assert select_action(np.full(3, 1 / 3), np.array([0, 1, 1]), mode=GREEDY).column == 1

    def test_underflowed_probabilities(self):
        dist = np.array([1.0, 0.0, 0.0])

        assert select_action(dist, np.array([0, 0, 1]), mode=GREEDY).column == 2
        assert select_action(dist, np.array([0, 1, 1]), mode=SAMPLE, rng=np.random.default_rng(0)).column in (1, 2)

    def test_underflow_falls_back_to_uniform_over_permitted(self):
        dist = np.array([1.0, 0.0, 0.0, 0.0])
        mask = np.array([0, 1, 1, 1])
        rng = derive_rng(4)
        counts = np.bincount([select_action(dist, mask, mode=SAMPLE, rng=rng).column for _ in range(3000)],
                             minlength=4)

        assert counts[0] == 0
        assert all(800 <= c <= 1200 for c in counts[1:])

    def test_random_networks_never_pick_masked(self):
        arch = NetArch.for_env(m=16, n_fixed=5)
        rng = derive_rng(2024, 0)
        sample_rng = derive_rng(2024, 1)
        underflows = 0
        for _ in range(10000):
            # scale 100 saturates the softmax, so the permitted mass often underflows to zero
            scale = rng.choice([0.1, 1.0, 10.0, 100.0])
            params = PolicyParams(arch, scale * rng.standard_normal(arch.param_count))
            bits = (rng.random(16) < rng.random()).astype(np.float64)
            bits[rng.integers(16)] = 0.0
            state = np.concatenate([rng.random(80), bits])
            mask = (bits == 0).astype(np.int8)
            dist = forward(params, state)
            underflows += int(np.where(mask == 1, dist, 0.0).sum() == 0.0)

            assert mask[select_action(dist, mask, mode=GREEDY).column] == 1
            assert mask[select_action(dist, mask, mode=SAMPLE, rng=sample_rng).column] == 1

        assert underflows > 0

    def test_all_masked(self):
        with pytest.raises(AllMaskedError):
            select_action(np.full(3, 1 / 3), np.zeros(3))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            select_action(np.full(3, 1 / 3), np.ones(4))

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            select_action(np.full(3, 1 / 3), np.ones(3), mode='epsilon')


class ParamsDictTest(unittest.TestCase):

    def test_round_trip(self):
        arch = NetArch.for_env(m=4, n_fixed=2)
        params = PolicyParams(arch, np.random.default_rng(3).standard_normal(arch.param_count))
        loaded = params_from_dict(params_to_dict(params))

        assert loaded.arch == arch
        assert np.array_equal(loaded.theta, params.theta)

    def test_malformed(self):
        raw = params_to_dict(PolicyParams.zeros(NetArch.for_env(m=4, n_fixed=2)))

        with pytest.raises(PolicyParseError):
            params_from_dict({'theta': raw['theta']})
        with pytest.raises(PolicyParseError):
            params_from_dict({**raw, 'theta': raw['theta'][:-1]})
        with pytest.raises(PolicyParseError):
            params_from_dict({**raw, 'theta': ['a'] * len(raw['theta'])})
