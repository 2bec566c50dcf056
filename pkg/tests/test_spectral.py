import io
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from tailproc.asymvar import example_law
from tailproc.exceptions import InvalidLaw, InvalidPath, ZeroPivot
from tailproc.spectral import (IntervalSet, Path, SpectralLaw, alpha_norm, dump_law, format_law,
                               load_law, marginal_prob, parse_law, shift_scale)

finite = st.floats(-1e3, 1e3, allow_nan=False).filter(lambda v: abs(v) > 1e-3)
paths = st.builds(lambda lo, vals: Path.from_window(lo, vals),
                  st.integers(-3, 3), st.lists(finite, min_size=1, max_size=6))


class TestPath:
    def test_trimming_keeps_index_zero(self):
        p = Path(-2, (0.0, 0.0, 1.0, 0.0, 2.0, 0.0))
        assert (p.lo, p.values) == (0, (1.0, 0.0, 2.0))

    def test_zero_at_origin_is_kept(self):
        p = Path(-1, (3.0, 0.0))
        assert (p.lo, p.hi, p.values) == (-1, 0, (3.0, 0.0))

    @pytest.mark.parametrize("lo,vals", [(0, ()), (1, (1.0,)), (-3, (1.0, 2.0)), (0, (0.0, 0.0))])
    def test_invalid(self, lo, vals):
        with pytest.raises(InvalidPath):
            Path(lo, vals)

    def test_getitem_outside_support(self):
        p = Path(-1, (0.5, 1.0))
        assert p[-2] == 0.0 and p[1] == 0.0 and p[-1] == 0.5

    def test_from_window_pads(self):
        assert Path.from_window(2, [1.0]) == Path(0, (0.0, 0.0, 1.0))
        assert Path.from_window(-3, [1.0]) == Path(-3, (1.0, 0.0, 0.0, 0.0))

    def test_repr(self):
        assert repr(Path(-1, (0.1, -1.0))) == "Path{-1:[0.1, -1]}"

    def test_negative_zero_equals_zero(self):
        assert Path(0, (1.0, -0.0)) == Path(0, (1.0,))


class TestAlphaNorm:
    @pytest.mark.parametrize("path,alpha,expected", [
        (Path(0, (1.0,)), 2.6, 1.0),
        (Path(0, (3.0, 4.0)), 2.0, 5.0),
        (Path(-1, (0.1, -1.0)), 1.0, 1.1),
    ])
    def test_examples(self, path, alpha, expected):
        assert alpha_norm(path, alpha) == pytest.approx(expected, rel=1e-15)

    def test_large_alpha_no_overflow(self):
        assert alpha_norm(Path(0, (1e200, 1e200)), 4.0) == pytest.approx(1e200 * 2**0.25)

    @given(paths, st.floats(0.1, 8), st.floats(-50, 50).filter(lambda c: abs(c) > 1e-2))
    def test_homogeneity(self, p, alpha, c):
        assert alpha_norm(p.scaled(c), alpha) == pytest.approx(abs(c) * alpha_norm(p, alpha), rel=1e-12)


class TestShiftScale:
    def test_examples(self):
        assert shift_scale(Path(0, (1.0,)), 0) == Path(0, (1.0,))
        assert shift_scale(Path(0, (0.1, -1.0)), 1) == Path(-1, (0.1, -1.0))
        assert shift_scale(Path(0, (0.1, -1.0)), 0).key() == Path(0, (1.0, -10.0)).key()

    def test_zero_pivot(self):
        with pytest.raises(ZeroPivot):
            shift_scale(Path(0, (1.0, 0.0, 2.0)), 1)

    @given(paths, st.data())
    def test_round_trip(self, p, data):
        assume(p[0] != 0)  # the inverse shift pivots on p_0
        j = data.draw(st.sampled_from([p.lo + k for k, v in enumerate(p.values) if v != 0]))
        q = shift_scale(shift_scale(p, j), -j)
        sup_p = max(map(abs, p.values))
        sup_q = max(map(abs, q.values))
        assert q.lo == p.lo
        np.testing.assert_allclose(np.array(q.values) / sup_q, np.array(p.values) / sup_p, rtol=1e-12)

    @given(paths, st.data())
    def test_unit_modulus_at_origin(self, p, data):
        j = data.draw(st.sampled_from([p.lo + k for k, v in enumerate(p.values) if v != 0]))
        assert abs(shift_scale(p, j)[0]) == 1.0


class TestIntervalSet:
    def test_membership(self):
        assert IntervalSet.le(0.5).contains(0.5) and not IntervalSet.gt(0.5).contains(0.5)
        assert IntervalSet.all().contains(0.0) and not IntervalSet.empty().contains(0.0)
        np.testing.assert_array_equal(IntervalSet.gt(0).contains(np.array([-1.0, 0.0, 1.0])),
                                      [False, False, True])

    @pytest.mark.parametrize("text", ["le:0.5", "gt:-3", "all", "empty"])
    def test_parse_round_trip(self, text):
        assert str(IntervalSet.parse(text)) == text

    def test_parse_rejects(self):
        with pytest.raises(ValueError):
            IntervalSet.parse("lt:1")


class TestSpectralLaw:
    def test_merges_duplicates(self):
        law = SpectralLaw(((Path(0, (1.0,)), 0.25), (Path(-1, (0.0, 1.0)), 0.75)), 1.0)
        assert len(law) == 1 and law.probs[0] == 1.0

    def test_renormalizes_close_sums(self):
        law = SpectralLaw(((Path(0, (1.0,)), 0.5 + 4e-10), (Path(0, (-1.0,)), 0.5)), 2.0)
        assert math.fsum(law.probs) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("probs", [(0.5, 0.4), (0.7, -0.1)])
    def test_rejects_bad_probabilities(self, probs):
        with pytest.raises(InvalidLaw):
            SpectralLaw(((Path(0, (1.0,)), probs[0]), (Path(0, (-1.0,)), probs[1])), 1.0)

    def test_rejects_bad_alpha(self):
        with pytest.raises(InvalidLaw):
            SpectralLaw.point_mass(Path(0, (1.0,)), 0.0)


class TestMarginalProb:
    def test_all_is_one(self):
        assert marginal_prob(example_law(0.3, 10, 2), 2, IntervalSet.all()) == pytest.approx(1.0)

    def test_example_gt(self):
        assert marginal_prob(example_law(0.5, 10, 2), 1, IntervalSet.gt(0.4)) == pytest.approx(1 / 3, abs=1e-15)

    @pytest.mark.parametrize("p,a", [(0.2, 10), (0.7, 3)])
    def test_example_le(self, p, a):
        law = example_law(p, a, 2)
        assert marginal_prob(law, 0, IntervalSet.le(-0.5)) == pytest.approx(p * a / (a + 1), abs=1e-15)

    @given(st.floats(0, 1), st.lists(st.floats(-20, 20), min_size=1, max_size=8))
    def test_monotone_and_partition(self, p, xs):
        law = example_law(p, 10, 2)
        xs = sorted(xs)
        for i in (-1, 0, 1):
            vals = [marginal_prob(law, i, IntervalSet.le(x)) for x in xs]
            assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))
            x = xs[0]
            total = marginal_prob(law, i, IntervalSet.le(x)) + marginal_prob(law, i, IntervalSet.gt(x))
            assert total == pytest.approx(1.0, abs=1e-12)


class TestSerialization:
    @given(st.floats(0, 1), st.floats(1.01, 50), st.floats(1.01, 50))
    def test_round_trip_bit_exact(self, p, a, b):
        law = example_law(p, a, b)
        back = parse_law(format_law(law))
        assert back.alpha == law.alpha
        assert [(q.lo, q.values, w) for q, w in back] == [(q.lo, q.values, w) for q, w in law]

    def test_file_objects_and_comments(self):
        buf = io.StringIO()
        dump_law(example_law(0.5, 10, 2), buf)
        text = "# comment\n\n" + buf.getvalue()
        law = load_law(io.StringIO(text))
        assert len(law) == 4

    @pytest.mark.parametrize("text", ["1 0 1\n", "alpha=1\n1 0\n", "alpha=1\nx 0 1\n"])
    def test_malformed(self, text):
        with pytest.raises(InvalidLaw):
            parse_law(text)
