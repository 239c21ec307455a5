"""Tests for SDMA set enumeration and the beam precompute."""

import numpy as np
import pytest

from zfbound.exceptions import InvalidInputError
from zfbound.model import ChannelTensor
from zfbound.precompute import SdmaSet, enumerate_sdma_sets, precompute_all

from .conftest import random_channels


class TestSdmaSets:
    def test_small_system_count(self):
        sets = enumerate_sdma_sets(4, 3)
        assert len(sets) == 14
        assert sets[0] == SdmaSet((0,))
        assert SdmaSet((0, 1, 2)) in sets

    def test_default_system_count(self):
        assert len(enumerate_sdma_sets(16, 3)) == 16 + 120 + 560

    def test_lexicographic_order(self):
        sets = enumerate_sdma_sets(4, 2)
        keys = [s.members for s in sets]
        assert keys == sorted(keys)

    def test_sizes_capped_by_users(self):
        sets = enumerate_sdma_sets(2, 4)
        assert max(s.size for s in sets) == 2

    def test_rejects_unsorted_members(self):
        with pytest.raises(InvalidInputError):
            SdmaSet((2, 1))

    def test_rejects_empty_set(self):
        with pytest.raises(InvalidInputError):
            SdmaSet(())

    def test_str(self):
        assert str(SdmaSet((0, 3))) == "{0,3}"


class TestPrecompute:
    def test_unit_gain_and_zero_forcing(self):
        channels = random_channels(4, 3, 3, seed=9)
        pre = precompute_all(channels, enumerate_sdma_sets(4, 3))
        for n in range(pre.num_subcarriers):
            for i, s in enumerate(pre.sets):
                for pos, k in enumerate(s.members):
                    d = pre.directions[n, i, pos]
                    for j in s.members:
                        gain = np.dot(channels.h[j, n], d)
                        expected = 1.0 if j == k else 0.0
                        assert abs(gain - expected) < 1e-9
                    assert pre.gamma[n, i, pos] == pytest.approx(np.linalg.norm(d))

    def test_singleton_gamma(self):
        channels = random_channels(2, 2, 2, seed=1)
        pre = precompute_all(channels, enumerate_sdma_sets(2, 2))
        i = pre.set_index([1])
        assert pre.gamma[0, i, 0] == pytest.approx(1.0 / np.linalg.norm(channels.h[1, 0]))

    def test_gamma_grows_with_the_set(self):
        channels = random_channels(5, 4, 3, seed=13)
        pre = precompute_all(channels, enumerate_sdma_sets(5, 3))
        for n in range(pre.num_subcarriers):
            for i, s in enumerate(pre.sets):
                for pos, k in enumerate(s.members):
                    for j, sub in enumerate(pre.sets):
                        if k in sub.members and set(sub.members) < set(s.members):
                            inner = pre.gamma[n, j, sub.members.index(k)]
                            assert pre.gamma[n, i, pos] >= inner * (1 - 1e-9)

    def test_mean_gamma_by_set_size(self):
        means = {1: [], 2: [], 3: []}
        for seed in range(50):
            channels = random_channels(4, 2, 3, seed=seed)
            pre = precompute_all(channels, enumerate_sdma_sets(4, 3))
            for i, s in enumerate(pre.sets):
                means[s.size].append(float(np.mean(pre.gamma[:, i, : s.size] ** 2)))
        averages = [np.mean(means[size]) for size in (1, 2, 3)]
        assert averages[0] < averages[1] < averages[2]

    def test_rank_deficient_set_unusable(self):
        h = np.zeros((2, 1, 2), dtype=complex)
        h[0, 0] = [1.0, 1j]
        h[1, 0] = [2.0, 2j]
        pre = precompute_all(ChannelTensor(h), enumerate_sdma_sets(2, 2), rank_tol=1e-10)
        assert pre.usable[0, pre.set_index([0])]
        assert pre.usable[0, pre.set_index([1])]
        assert not pre.usable[0, pre.set_index([0, 1])]
        assert pre.usable_counts() == [2]

    def test_usable_counts(self):
        pre = precompute_all(random_channels(4, 2, 3), enumerate_sdma_sets(4, 3))
        assert pre.usable_counts() == [14, 14]
        assert pre.num_sets == 14
        assert pre.num_users == 4

    def test_set_index_lookup(self):
        pre = precompute_all(random_channels(3, 1, 2), enumerate_sdma_sets(3, 2))
        for i, s in enumerate(pre.sets):
            assert pre.set_index(s.members) == i
        assert pre.set_index([2, 0]) == pre.set_index([0, 2])
        with pytest.raises(InvalidInputError):
            pre.set_index([0, 1, 2])

    def test_arrays_are_read_only(self):
        pre = precompute_all(random_channels(2, 1, 2), enumerate_sdma_sets(2, 2))
        with pytest.raises(ValueError):
            pre.gamma[0, 0, 0] = 1.0

    def test_rejects_oversized_set(self):
        with pytest.raises(InvalidInputError):
            precompute_all(random_channels(3, 1, 2), [SdmaSet((0, 1, 2))])

    def test_rejects_unknown_user(self):
        with pytest.raises(InvalidInputError):
            precompute_all(random_channels(2, 1, 2), [SdmaSet((0, 2))])
