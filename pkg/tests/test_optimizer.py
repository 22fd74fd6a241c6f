"""Tests for the Adam update."""

import numpy as np
import pytest

from minmax_bnn.errors import MirrorViolationError
from minmax_bnn.stochastic.params import ParamSet
from minmax_bnn.training.optimizer import OptimizerState, adam_update

LR = 1e-3


def step(params, grads, state, direction="descend"):
    return adam_update(params, grads, state, LR, 0.5, 0.999, 1e-8, direction)


class TestAdamUpdate:
    def test_first_step_moves_by_lr(self, rng):
        params = ParamSet({"w": np.zeros(6)})
        grads = ParamSet({"w": rng.choice([-1.0, 1.0], 6) * rng.uniform(0.1, 10.0, 6)})
        step(params, grads, OptimizerState.for_params(params), "ascend")
        np.testing.assert_allclose(np.abs(params["w"]), LR, rtol=1e-6)
        np.testing.assert_array_equal(np.sign(params["w"]), np.sign(grads["w"]))

    def test_zero_gradient_leaves_params(self):
        params = ParamSet({"w": np.array([0.5, -2.0])})
        step(params, ParamSet.zeros_like(params), OptimizerState.for_params(params))
        np.testing.assert_array_equal(params["w"], [0.5, -2.0])

    def test_two_constant_steps_descend(self):
        params = ParamSet({"w": np.zeros(1)})
        grads = ParamSet({"w": np.ones(1)})
        state = OptimizerState.for_params(params)
        step(params, grads, state)
        step(params, grads, state)
        assert params["w"][0] == pytest.approx(-0.002, abs=1e-6)
        assert state.t == 2

    def test_directions_are_opposite(self):
        grads = ParamSet({"w": np.array([0.3, -0.7])})
        up = ParamSet({"w": np.zeros(2)})
        down = ParamSet({"w": np.zeros(2)})
        step(up, grads, OptimizerState.for_params(up), "ascend")
        step(down, grads, OptimizerState.for_params(down), "descend")
        np.testing.assert_array_equal(up["w"], -down["w"])

    def test_updates_in_place(self):
        array = np.zeros(2)
        params = ParamSet({"w": array})
        returned = step(params, ParamSet({"w": np.ones(2)}), OptimizerState.for_params(params))
        assert returned is params
        assert array[0] != 0.0

    def test_mirror_violation(self):
        params = ParamSet({"w": np.zeros(2)})
        with pytest.raises(MirrorViolationError):
            step(params, ParamSet({"w": np.zeros(3)}), OptimizerState.for_params(params))

    def test_bad_direction(self):
        params = ParamSet({"w": np.zeros(2)})
        with pytest.raises(ValueError):
            step(params, ParamSet.zeros_like(params), OptimizerState.for_params(params), "sideways")
