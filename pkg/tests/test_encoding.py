import io
import math
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randfnn.encoding import (
    CodingVars,
    TrainingSet,
    build_training_set,
    decode,
    encode_x,
    encode_y,
    write_pairs_csv,
)
from randfnn.errors import DegenerateDispersion, EmptyTrainingSet, ParameterError

from conftest import make_sequences


class TestEncodeX:
    def test_constant_sequence_rejected(self):
        with pytest.raises(DegenerateDispersion):
            encode_x([2.0, 2.0, 2.0, 2.0])

    def test_direct_arithmetic(self):
        x, coding = encode_x([1.0, 2.0, 3.0, 4.0])
        assert coding.mean == 2.5
        assert coding.dispersion == pytest.approx(math.sqrt(5.0), rel=1e-15)
        np.testing.assert_allclose(
            x, np.array([-1.5, -0.5, 0.5, 1.5]) / math.sqrt(5.0), atol=1e-12)
        np.testing.assert_allclose(x, [-0.67082, -0.22361, 0.22361, 0.67082],
                                   atol=5e-6)

    @given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=2, max_size=48))
    @settings(max_examples=200)
    def test_unit_norm_zero_mean(self, values):
        e = np.asarray(values)
        try:
            x, _ = encode_x(e)
        except DegenerateDispersion:
            return
        assert abs(x.mean()) < 1e-10
        assert abs(np.linalg.norm(x) - 1.0) < 1e-10

    def test_scale_shift_equivariance(self):
        rng = np.random.default_rng(0)
        e = rng.normal(100.0, 5.0, 24)
        x1, _ = encode_x(e)
        x2, _ = encode_x(3.5 * e + 40.0)
        np.testing.assert_allclose(x1, x2, atol=1e-10)

    def test_accepts_sequence_object(self):
        seq = make_sequences(date(2015, 1, 5), 1)[0]
        x1, c1 = encode_x(seq)
        x2, c2 = encode_x(seq.values)
        np.testing.assert_array_equal(x1, x2)
        assert c1 == c2


class TestEncodeY:
    def test_same_day_reduces_to_x(self):
        e = [3.0, 1.0, 4.0, 1.0, 5.0]
        x, coding = encode_x(e)
        np.testing.assert_array_equal(encode_y(e, coding), x)

    def test_direct_arithmetic(self):
        y = encode_y([12.0, 8.0], CodingVars(10.0, 2.0))
        np.testing.assert_array_equal(y, [1.0, -1.0])

    def test_identity_coding(self):
        e = np.array([1.5, -2.0, 0.25])
        np.testing.assert_array_equal(encode_y(e, CodingVars(0.0, 1.0)), e)

    def test_not_normalized_in_general(self):
        y = encode_y([50.0, 60.0], CodingVars(10.0, 2.0))
        assert abs(y.mean()) > 1.0  # carries the level difference


class TestDecode:
    def test_inverse_of_encode_y(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            e_in = rng.normal(100, 10, 24)
            e_fut = rng.normal(120, 15, 24)
            _, coding = encode_x(e_in)
            back = decode(encode_y(e_fut, coding), coding)
            np.testing.assert_allclose(back, e_fut, rtol=1e-12)

    def test_direct_arithmetic(self):
        np.testing.assert_array_equal(
            decode([0.5, -0.5], CodingVars(10.0, 2.0)), [11.0, 9.0])

    def test_identity_coding(self):
        y = np.array([0.3, -1.2])
        np.testing.assert_array_equal(decode(y, CodingVars(0.0, 1.0)), y)


def test_coding_vars_requires_positive_dispersion():
    with pytest.raises(ParameterError):
        CodingVars(0.0, 0.0)
    with pytest.raises(ParameterError):
        CodingVars(0.0, -1.0)


class TestBuildTrainingSet:
    # 2015-01-05 is a Monday; three full weeks starting there
    START = date(2015, 1, 5)

    def test_three_mondays(self):
        seqs = make_sequences(self.START, 22)  # covers Mondays of weeks 2..4
        cutoff = self.START + timedelta(days=22)
        phi = build_training_set(seqs, target_weekday=0, tau=1, cutoff=cutoff)
        # manual enumeration: Mondays at offsets 7, 14, 21; inputs are Sundays
        assert len(phi) == 3
        assert [p.target_date for p in phi.pairs] == [
            self.START + timedelta(days=o) for o in (7, 14, 21)]
        assert all(p.input_date.weekday() == 6 for p in phi.pairs)
        assert all(p.target_weekday == 0 for p in phi.pairs)
        assert phi.target_weekday == 0

    def test_excluded_input_day_drops_pair(self):
        omit = {self.START + timedelta(days=13)}  # Sunday of week 2
        seqs = make_sequences(self.START, 22, omit=omit)
        phi = build_training_set(seqs, 0, 1, self.START + timedelta(days=22))
        assert len(phi) == 2
        assert self.START + timedelta(days=14) not in [p.target_date for p in phi.pairs]

    def test_cutoff_before_first_target(self):
        seqs = make_sequences(self.START, 22)
        with pytest.raises(EmptyTrainingSet):
            build_training_set(seqs, 0, 1, self.START + timedelta(days=7))

    def test_anti_leakage(self):
        seqs = make_sequences(self.START, 40)
        cutoff = self.START + timedelta(days=25)
        phi = build_training_set(seqs, 3, 1, cutoff)
        assert all(p.target_date < cutoff for p in phi.pairs)
        assert all(p.input_date < cutoff for p in phi.pairs)

    def test_pair_coding_comes_from_input_day(self):
        seqs = make_sequences(self.START, 22)
        by_date = {s.date: s for s in seqs}
        phi = build_training_set(seqs, 0, 1, self.START + timedelta(days=22))
        for p in phi.pairs:
            x, coding = encode_x(by_date[p.input_date])
            np.testing.assert_array_equal(p.x, x)
            assert p.coding == coding
            np.testing.assert_array_equal(
                p.y, encode_y(by_date[p.target_date], coding))

    def test_tau_two_uses_exact_gap(self):
        seqs = make_sequences(self.START, 22)
        phi = build_training_set(seqs, 0, 2, self.START + timedelta(days=22))
        assert all((p.target_date - p.input_date).days == 2 for p in phi.pairs)
        assert all(p.input_date.weekday() == 5 for p in phi.pairs)

    def test_degenerate_input_counted(self):
        seqs = make_sequences(self.START, 22)
        flat = np.full(24, 42.0)
        seqs = [s if s.date != self.START + timedelta(days=13)
                else type(s)(flat, s.date, s.weekday, s.index) for s in seqs]
        phi = build_training_set(seqs, 0, 1, self.START + timedelta(days=22))
        assert len(phi) == 2
        assert phi.n_skipped_degenerate == 1

    def test_bad_tau(self):
        with pytest.raises(ParameterError):
            build_training_set(make_sequences(self.START, 22), 0, 0, self.START)


class TestTrainingSet:
    def test_from_arrays(self):
        phi = TrainingSet.from_arrays(np.ones((3, 4)), np.zeros((3, 2)))
        assert len(phi) == 3 and phi.n == 4
        assert phi.pairs is None

    def test_rejects_empty_and_mismatch(self):
        with pytest.raises(EmptyTrainingSet):
            TrainingSet.from_arrays(np.empty((0, 4)), np.empty((0, 4)))
        with pytest.raises(Exception):
            TrainingSet.from_arrays(np.ones((3, 4)), np.ones((2, 4)))

    def test_arrays_read_only(self):
        phi = TrainingSet.from_arrays(np.ones((2, 3)), np.ones((2, 3)))
        with pytest.raises(ValueError):
            phi.x[0, 0] = 9.0


def test_write_pairs_csv_round_readable():
    seqs = make_sequences(date(2015, 1, 5), 22)
    phi = build_training_set(seqs, 0, 1, date(2015, 1, 27))
    buf = io.StringIO()
    write_pairs_csv(phi, buf)
    lines = buf.getvalue().strip().splitlines()
    assert len(lines) == 1 + len(phi)
    header = lines[0].split(",")
    assert header[:2] == ["input_date", "target_date"]
    assert header[-2:] == ["mean", "dispersion"]
    row = lines[1].split(",")
    assert float(row[2]) == pytest.approx(phi.pairs[0].x[0])
    phi_arrays = TrainingSet.from_arrays(phi.x, phi.y)
    with pytest.raises(ParameterError):
        write_pairs_csv(phi_arrays, io.StringIO())
