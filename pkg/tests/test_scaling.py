import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempcal import AffineParams, affine_transform, rescale_logits, tempered_softmax

finite_logits = st.lists(
    st.lists(st.floats(-50, 50), min_size=3, max_size=3),
    min_size=1, max_size=8,
).map(np.asarray)


def closed_form_binary(a: float, b: float, temperature: float):
    """High-precision softmax of a 2-logit row; independent oracle."""
    with mpmath.workdps(50):
        ea = mpmath.exp(mpmath.mpf(a) / temperature)
        eb = mpmath.exp(mpmath.mpf(b) / temperature)
        return float(ea / (ea + eb)), float(eb / (ea + eb))


class TestTemperedSoftmax:
    def test_symmetric_row(self):
        pm = tempered_softmax(np.array([[0.0, 0.0]]), 1.0)
        assert np.allclose(pm.probs, [[0.5, 0.5]], atol=0)

    def test_binary_closed_form(self):
        expected = closed_form_binary(2.0, 0.0, 2.0)
        pm = tempered_softmax(np.array([[2.0, 0.0]]), 2.0)
        assert pm.probs[0] == pytest.approx(expected, abs=1e-12)
        assert pm.probs[0, 0] == pytest.approx(0.731059, abs=1e-6)

    def test_high_temperature_uniform_limit(self):
        pm = tempered_softmax(np.array([[5.0, 1.0, 0.0]]), 1e6)
        assert np.abs(pm.probs - 1.0 / 3.0).max() < 1e-5

    def test_stable_at_huge_logits(self):
        pm = tempered_softmax(np.array([[1e4, 0.0, -1e4]]), 1.0)
        assert np.isfinite(pm.probs).all()
        assert pm.probs[0, 0] == pytest.approx(1.0)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError, match="temperature"):
            tempered_softmax(np.zeros((1, 2)), 0.0)
        with pytest.raises(ValueError, match="non-finite"):
            tempered_softmax(np.array([[np.inf, 0.0]]), 1.0)

    @given(logits=finite_logits, temperature=st.floats(1e-2, 1e3))
    @settings(max_examples=100, deadline=None)
    def test_rows_sum_to_one_and_argmax_invariant(self, logits, temperature):
        pm = tempered_softmax(logits, temperature)
        assert np.abs(pm.probs.sum(axis=1) - 1.0).max() <= 1e-9
        # logit gaps below float resolution can collapse to equal
        # probabilities, which legitimately moves the tie-break
        top_two = np.sort(logits, axis=1)[:, -2:]
        separated = (top_two[:, 1] - top_two[:, 0]) > 1e-9
        assert np.array_equal(pm.probs.argmax(axis=1)[separated],
                              logits.argmax(axis=1)[separated])

    @given(logits=finite_logits, t1=st.floats(0.05, 50), factor=st.floats(1.01, 20))
    @settings(max_examples=60, deadline=None)
    def test_max_entry_non_increasing_in_temperature(self, logits, t1, factor):
        lo = tempered_softmax(logits, t1).probs.max(axis=1)
        hi = tempered_softmax(logits, t1 * factor).probs.max(axis=1)
        assert (hi <= lo + 1e-12).all()


class TestRescale:
    def test_elementwise(self):
        assert np.array_equal(rescale_logits(np.array([[1.0, 0.0]]), 2.0), [[2.0, 0.0]])

    def test_identity(self):
        f = np.array([[1.0, -3.0, 0.5]])
        assert np.array_equal(rescale_logits(f, 1.0), f)

    def test_inverse_pair(self):
        f = np.array([[0.3, -1.7, 2.2]])
        back = rescale_logits(rescale_logits(f, 2.0), 0.5)
        assert np.abs(back - f).max() < 1e-15

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError, match="scale"):
            rescale_logits(np.zeros((1, 2)), -1.0)

    @given(logits=finite_logits, scale=st.floats(0.05, 20))
    @settings(max_examples=100, deadline=None)
    def test_rescale_then_matching_temperature_is_identity(self, logits, scale):
        direct = tempered_softmax(logits, 1.0).probs
        undone = tempered_softmax(rescale_logits(logits, scale), scale).probs
        assert np.abs(direct - undone).max() < 1e-12


class TestAffineTransform:
    def test_identity(self):
        f = np.array([[1.0, 2.0], [-1.0, 0.0]])
        params = AffineParams.identity(2)
        assert np.array_equal(affine_transform(f, params), f)

    def test_constant_bias_preserves_softmax(self):
        f = np.array([[1.0, 2.0, -0.5]])
        params = AffineParams(np.eye(3), np.full(3, 3.7))
        shifted = affine_transform(f, params)
        assert np.abs(tempered_softmax(shifted, 1.0).probs
                      - tempered_softmax(f, 1.0).probs).max() < 1e-12

    def test_permutation(self):
        params = AffineParams(np.array([[0.0, 1.0], [1.0, 0.0]]), np.zeros(2))
        assert np.array_equal(affine_transform(np.array([[2.0, 0.0]]), params),
                              [[0.0, 2.0]])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            affine_transform(np.zeros((1, 3)), AffineParams.identity(2))

    def test_vector_mode_diagonal_flag(self):
        assert AffineParams(np.diag([1.0, 2.0]), np.zeros(2)).is_diagonal()
        assert not AffineParams(np.array([[1.0, 0.1], [0.0, 1.0]]), np.zeros(2)).is_diagonal()

    def test_rejects_non_finite_params(self):
        with pytest.raises(ValueError, match="finite"):
            AffineParams(np.array([[np.nan, 0.0], [0.0, 1.0]]), np.zeros(2))
