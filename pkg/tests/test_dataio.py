from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matrixda.dataio import (SplitMix64, SplitSpec, as_fraction, load_mts, random_split,
                             save_mts, synth_separable)
from matrixda.exceptions import InputError, MtsParseError
from matrixda.features import nn1_error, project
from matrixda.rblda import rblda_fit_v2
from matrixda.scatter import MtsDataset, bilinear_scatters


def write(path, text):
    path.write_bytes(text.encode())
    return path


class TestSplitMix64:
    def test_reference_vectors(self):
        assert SplitMix64(0).next() == 0xE220A8397B1DCDAF
        g = SplitMix64(1234567)
        assert [g.next() for _ in range(3)] == [
            6457827717110365317, 3203168211198807973, 9817491932198370423]

    def test_shuffle_is_a_permutation(self):
        items = list(range(20))
        SplitMix64(5).shuffle(items)
        assert sorted(items) == list(range(20))
        assert items != list(range(20))


class TestFormat:
    def test_minimal_file(self, tmp_path):
        data = load_mts(write(tmp_path / "a.mts", "2 1 1 2\n0\n1.0\n1\n2.0\n"))
        assert (data.n, data.shape, data.n_classes) == (2, (1, 1), 2)
        np.testing.assert_array_equal(data.observations.ravel(), [1.0, 2.0])

    def test_round_trip(self, tmp_path):
        data = synth_separable(4, 3, 5, 3, 1.0, 0.7, seed=2)
        data = data.with_observations(data.observations * np.pi * 1e-7)
        save_mts(tmp_path / "d.mts", data)
        assert load_mts(tmp_path / "d.mts").equals(data)

    def test_byte_stable(self, tmp_path):
        data = synth_separable(3, 2, 2, 2, 1.0, 1.0, seed=3)
        save_mts(tmp_path / "a.mts", data)
        save_mts(tmp_path / "b.mts", load_mts(tmp_path / "a.mts"))
        assert (tmp_path / "a.mts").read_bytes() == (tmp_path / "b.mts").read_bytes()

    def test_empty_class_rejected(self, tmp_path):
        path = write(tmp_path / "e.mts", "2 1 1 3\n0\n1.0\n1\n2.0\n")
        with pytest.raises(MtsParseError, match="class 2"):
            load_mts(path)

    @pytest.mark.parametrize("text, line", [
        ("2 1 1 2\n0\n1.0\n1\n2.0", 5),
        ("2 1 1\n0\n1.0\n1\n2.0\n", 1),
        ("2 1 1 2\n0\n1.0\n2\n2.0\n", 4),
        ("2 1 2 2\n0\n1.0 2.0\n1\n2.0\n", 5),
        ("2 1 1 2\n0\nnan\n1\n2.0\n", 3),
        ("2 1 1 2\n0\nabc\n1\n2.0\n", 3),
        ("2 1 1 2\n0\n1.0\n1\n", 5),
        ("2 1 1 2\r\n0\n1.0\n1\n2.0\n", 1),
        ("2 1 1 2\nx\n1.0\n1\n2.0\n", 2),
    ])
    def test_malformed(self, tmp_path, text, line):
        with pytest.raises(MtsParseError) as info:
            load_mts(write(tmp_path / "bad.mts", text))
        assert info.value.lineno == line
        assert str(info.value).startswith(f"line {line}:")

    def test_non_finite_not_saved(self, tmp_path):
        data = MtsDataset(np.zeros((1, 1, 1)), [0])
        object.__setattr__(data, "observations", np.array([[[np.inf]]]))
        with pytest.raises(InputError):
            save_mts(tmp_path / "x.mts", data)


class TestSplit:
    def test_arithmetic(self):
        data = synth_separable(2, 2, 10, 2, 1.0, 1.0, seed=0)
        train, test = random_split(data, SplitSpec("1/5", seed=1))
        assert train.class_counts.tolist() == [2, 2]
        assert test.n == 16

    def test_proportion_one(self):
        data = synth_separable(2, 2, 4, 3, 1.0, 1.0, seed=0)
        train, test = random_split(data, SplitSpec(1, seed=1))
        assert train.n == 12 and test.n == 0

    def test_sign_language_sizes(self):
        spec = SplitSpec("1/9", seed=0)
        assert spec.n_train(27) == 3

    def test_at_least_one_per_class(self):
        assert SplitSpec("1/10", 0).n_train(3) == 1

    def test_deterministic(self):
        data = synth_separable(2, 2, 9, 3, 1.0, 1.0, seed=0)
        a = random_split(data, SplitSpec("1/3", 42))
        b = random_split(data, SplitSpec("1/3", 42))
        assert a[0].equals(b[0]) and a[1].equals(b[1])

    def test_golden_indices(self):
        labels = np.repeat([0, 1], 6)
        data = MtsDataset(np.arange(12.0)[:, None, None], labels)
        train, _ = random_split(data, SplitSpec("1/2", 2024))
        members = [list(range(6)), list(range(6, 12))]
        g = SplitMix64(2024)
        expected = []
        for m in members:
            for i in range(5, 0, -1):
                j = g.next() % (i + 1)
                m[i], m[j] = m[j], m[i]
            expected.extend(sorted(m[:3]))
        assert train.observations.ravel().tolist() == [float(i) for i in sorted(expected)]

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2 ** 64 - 1), num=st.integers(1, 9))
    def test_union_preserved(self, seed, num):
        data = synth_separable(2, 1, 7, 3, 1.0, 1.0, seed=1)
        train, test = random_split(data, SplitSpec(Fraction(num, 9), seed))
        merged = sorted(train.observations.ravel().tolist() + test.observations.ravel().tolist())
        assert merged == sorted(data.observations.ravel().tolist())
        assert np.array_equal(np.sort(np.concatenate([train.labels, test.labels])),
                              np.sort(data.labels))

    @pytest.mark.parametrize("bad", ["0", "3/2", "x", -0.5])
    def test_bad_proportion(self, bad):
        with pytest.raises(InputError):
            as_fraction(bad)


class TestSynth:
    def test_null_construction(self):
        data = synth_separable(4, 3, 200, 3, 0.0, 1.0, seed=4)
        sc = bilinear_scatters(data)
        assert np.linalg.norm(sc.s1b) < np.linalg.norm(sc.s1w)
        assert np.linalg.norm(sc.s2b) < np.linalg.norm(sc.s2w)

    def test_margin_construction(self):
        data = synth_separable(6, 4, 20, 2, 10.0, 1.0, seed=5)
        train, test = random_split(data, SplitSpec("1/2", 6))
        model = rblda_fit_v2(train, 0.5, 0.5)
        assert nn1_error(project(model, train), project(model, test)) == 0.0

    def test_deterministic(self):
        a = synth_separable(3, 3, 4, 2, 1.0, 1.0, seed=9)
        b = synth_separable(3, 3, 4, 2, 1.0, 1.0, seed=9)
        assert a.equals(b)

    def test_bad_arguments(self):
        with pytest.raises(InputError):
            synth_separable(3, 3, 4, 2, 1.0, 0.0, seed=0)
