import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from icregime.errors import NumericError
from icregime.measures import (JointPMF, _clamp, batch_conditional_mi, binary_entropy,
                               conditional_mutual_information, entropy, gaussian_mac_mi,
                               mutual_information_channel)
from icregime.model import DiscretePMF, GaussianIC, bsc


def test_entropy_of_uniform_law():
    assert entropy(DiscretePMF.uniform(4)) == pytest.approx(2.0, abs=1e-12)


def test_entropy_of_dyadic_law():
    assert entropy([0.5, 0.25, 0.25]) == pytest.approx(1.5, abs=1e-12)


def test_entropy_ignores_zero_mass():
    assert entropy([1.0, 0.0, 0.0]) == 0.0


def _bsc_joint(p):
    return JointPMF(("A", "B"), 0.5 * bsc(p))


def test_independent_bits_share_no_information():
    j = JointPMF(("A", "B"), np.full((2, 2), 0.25))
    assert conditional_mutual_information(j, ["A"], ["B"]) == pytest.approx(0.0, abs=1e-12)


def test_identical_bits_share_one_bit():
    j = JointPMF(("A", "B"), np.diag([0.5, 0.5]))
    assert conditional_mutual_information(j, ["A"], ["B"]) == pytest.approx(1.0, abs=1e-12)


def test_bsc_mutual_information_with_uniform_input():
    value = conditional_mutual_information(_bsc_joint(0.1), ["A"], ["B"])
    assert value == pytest.approx(0.531004, abs=1e-6)
    assert value == pytest.approx(1.0 - binary_entropy(0.1), abs=1e-12)


def test_conditioning_on_the_xor():
    # A, B independent bits, C = A xor B: I(A;B) = 0 but I(A;B|C) = 1
    probs = np.zeros((2, 2, 2))
    for a in range(2):
        for b in range(2):
            probs[a, b, a ^ b] = 0.25
    j = JointPMF(("A", "B", "C"), probs)
    assert conditional_mutual_information(j, ["A"], ["B"]) == pytest.approx(0.0, abs=1e-12)
    assert conditional_mutual_information(j, ["A"], ["B"], ["C"]) == pytest.approx(1.0, abs=1e-12)


def test_overlapping_groups_are_rejected():
    with pytest.raises(ValueError, match="not disjoint"):
        conditional_mutual_information(_bsc_joint(0.1), ["A"], ["A", "B"])


def test_unknown_axis():
    with pytest.raises(KeyError):
        _bsc_joint(0.1).entropy_of(["Z"])


def test_clamp_rejects_large_negative_values():
    assert _clamp(-1e-13) == 0.0
    with pytest.raises(NumericError):
        _clamp(-1e-6)


def test_batch_matches_single_law():
    rng = np.random.default_rng(7)
    joints = rng.dirichlet(np.ones(2 * 3 * 2), size=5).reshape(5, 2, 3, 2)
    batch = batch_conditional_mi(joints)
    for k in range(5):
        j = JointPMF(("V", "C", "Y"), joints[k])
        assert batch[k] == pytest.approx(conditional_mutual_information(j, ["V"], ["Y"], ["C"]), abs=1e-12)


def test_mutual_information_channel_single_and_batch():
    w = bsc(0.1)
    assert mutual_information_channel(np.array([0.5, 0.5]), w) == pytest.approx(0.531004, abs=1e-6)
    batch = mutual_information_channel(np.array([[0.5, 0.5], [1.0, 0.0]]), w)
    assert batch.shape == (2,)
    assert batch[1] == pytest.approx(0.0, abs=1e-12)


@given(st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=2, max_size=6))
def test_entropy_bounds(weights):
    p = np.array(weights) / sum(weights)
    h = entropy(p)
    assert -1e-12 <= h <= math.log2(len(p)) + 1e-12


@given(st.integers(min_value=0, max_value=10_000))
def test_conditional_mi_is_nonnegative_and_symmetric(seed):
    probs = np.random.default_rng(seed).dirichlet(np.ones(12)).reshape(2, 3, 2)
    j = JointPMF(("A", "B", "C"), probs)
    forward = conditional_mutual_information(j, ["A"], ["B"], ["C"])
    backward = conditional_mutual_information(j, ["B"], ["A"], ["C"])
    assert forward >= 0.0
    assert forward == pytest.approx(backward, abs=1e-12)


def test_gaussian_mac_single_user():
    ic = GaussianIC(np.ones((3, 3)), np.ones(3))
    assert gaussian_mac_mi(ic, 1, {1}) == pytest.approx(0.5, abs=1e-12)


def test_gaussian_mac_uses_cross_gains():
    ic = GaussianIC([[1.0, 2.0], [2.0, 1.0]], [1.0, 1.0])
    assert gaussian_mac_mi(ic, 1, {2}) == pytest.approx(0.5 * math.log2(5.0), abs=1e-12)
    assert gaussian_mac_mi(ic, 1, {2}) == pytest.approx(1.160964, abs=1e-6)
    assert gaussian_mac_mi(ic, 1, {1, 2}) == pytest.approx(0.5 * math.log2(6.0), abs=1e-12)


def test_gaussian_mac_full_set():
    ic = GaussianIC(np.ones((3, 3)), np.ones(3))
    assert gaussian_mac_mi(ic, 2, {1, 2, 3}) == pytest.approx(1.0, abs=1e-12)


def test_gaussian_mac_empty_subset():
    with pytest.raises(ValueError, match="empty subset"):
        gaussian_mac_mi(GaussianIC(np.eye(2), np.ones(2)), 1, set())


def test_marginal_keeps_the_named_axes_in_tensor_order():
    probs = np.random.default_rng(3).dirichlet(np.ones(12)).reshape(2, 3, 2)
    j = JointPMF(("A", "B", "C"), probs)
    m = j.marginal(["C", "A"])
    assert m.axes == ("A", "C")
    assert np.allclose(m.probs, probs.sum(axis=1))


@given(st.integers(min_value=0, max_value=10_000))
def test_chain_rule(seed):
    probs = np.random.default_rng(seed).dirichlet(np.ones(12)).reshape(2, 3, 2)
    j = JointPMF(("A", "B", "C"), probs)
    joint = conditional_mutual_information(j, ["A", "B"], ["C"])
    split = (conditional_mutual_information(j, ["A"], ["C"])
             + conditional_mutual_information(j, ["B"], ["C"], ["A"]))
    assert joint == pytest.approx(split, abs=1e-12)


@given(st.integers(min_value=0, max_value=10_000))
def test_data_processing_through_a_degraded_output(seed):
    rng = np.random.default_rng(seed)
    px = rng.dirichlet(np.ones(3))
    w = rng.dirichlet(np.ones(3), size=3)
    garble = rng.dirichlet(np.ones(2), size=3)
    # X -> Y2 -> Y1
    probs = px[:, None, None] * w[:, :, None] * garble[None, :, :]
    j = JointPMF(("X", "Y2", "Y1"), probs)
    assert (conditional_mutual_information(j, ["X"], ["Y1"])
            <= conditional_mutual_information(j, ["X"], ["Y2"]) + 1e-12)
    assert conditional_mutual_information(j, ["X"], ["Y1"], ["Y2"]) == pytest.approx(0.0, abs=1e-12)


_GAIN = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


@given(st.lists(_GAIN, min_size=6, max_size=6), st.lists(st.floats(min_value=0.01, max_value=10.0), min_size=3,
                                                          max_size=3))
def test_gaussian_mac_bound_is_submodular(off_diagonal, powers):
    gains = np.eye(3)
    gains[~np.eye(3, dtype=bool)] = off_diagonal
    ic = GaussianIC(gains, powers)
    subsets = [frozenset(s) for r in range(1, 4) for s in itertools.combinations((1, 2, 3), r)]

    def f(s):
        return gaussian_mac_mi(ic, 2, s) if s else 0.0

    for s in subsets:
        for t in subsets:
            assert f(s) + f(t) >= f(s | t) + f(s & t) - 1e-12
