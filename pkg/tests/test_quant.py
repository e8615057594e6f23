import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tinyecg.nn import model_forward, standard_model
from tinyecg.quant import (
    DegenerateRangeError,
    QuantParams,
    QuantizedModel,
    compute_qparams,
    dequantize,
    dequantize_model,
    flops_report,
    format_cost_report,
    forward_quantized_only,
    forward_temporary_dequantized,
    memory_report,
    memory_report_from_shapes,
    quantize,
    quantize_model,
)

# Regression fixture from the reference sigmoid-sigmoid checkpoint: its
# largest parameter magnitude and four recorded code/value trips.
REFERENCE_MAX_ABS = 64.74442
REFERENCE_SCALE = 2 * REFERENCE_MAX_ABS / 254
REFERENCE_TRIPS = [
    # (real value, int8 code, dequantized value)
    (-56.74, -111, -56.59),
    (-1.58, -3, -1.53),
    (14.58, 29, 14.78),
    (-17.0, -33, -16.82),
]


def reference_qparams():
    return QuantParams(
        scale=REFERENCE_SCALE,
        zero_point=0,
        alpha=-REFERENCE_MAX_ABS,
        beta=REFERENCE_MAX_ABS,
        mode="symmetric",
    )


def model_with_params(values, variant="sigmoid-sigmoid"):
    """61->10->4 model whose first weights are `values`, rest tiny."""
    model = standard_model(variant, seed=0)
    for p in model.parameters:
        p *= 1e-3
    flat = model.layer1.weights.ravel()
    flat[: len(values)] = values
    return model


class TestComputeQparams:
    def test_reference_scale(self):
        model = model_with_params([REFERENCE_MAX_ABS, -12.0])
        q = compute_qparams(model, "symmetric")
        assert q.scale == pytest.approx(0.509799, abs=1e-6)
        assert q.zero_point == 0
        assert q.beta == REFERENCE_MAX_ABS and q.alpha == -REFERENCE_MAX_ABS

    def test_unit_range(self):
        model = model_with_params([1.0, -1.0, 0.3])
        q = compute_qparams(model, "symmetric")
        assert q.scale == pytest.approx(2 / 254)

    def test_asymmetric_zero_point(self):
        # params in [0, 10]: code -127 must dequantize back to 0.0
        model = model_with_params([10.0, 5.0])
        model.layer1.weights[:] = np.abs(model.layer1.weights)
        for p in model.parameters:
            p[...] = np.abs(p)
        q = compute_qparams(model, "asymmetric")
        assert q.scale == pytest.approx(10 / 254)
        assert q.zero_point == 127
        assert quantize(0.0, q) == -127
        assert dequantize(quantize(0.0, q), q) == pytest.approx(0.0)
        assert dequantize(quantize(10.0, q), q) == pytest.approx(10.0, abs=q.scale / 2)

    def test_all_zero_model_rejected(self):
        model = standard_model("relu-sigmoid")
        for p in model.parameters:
            p[...] = 0.0
        with pytest.raises(DegenerateRangeError):
            compute_qparams(model)


class TestQuantizeDequantize:
    @pytest.mark.parametrize("x,code,approx", REFERENCE_TRIPS)
    def test_reference_trips(self, x, code, approx):
        q = reference_qparams()
        assert quantize(x, q) == code
        assert dequantize(code, q) == pytest.approx(approx, abs=0.01)

    def test_zero_maps_to_zero_exactly(self):
        q = reference_qparams()
        assert quantize(0.0, q) == 0
        assert dequantize(0, q) == 0.0

    def test_half_away_rounding(self):
        q = QuantParams(scale=1.0, zero_point=0, alpha=-127, beta=127, mode="symmetric")
        assert quantize(0.5, q) == 1
        assert quantize(-0.5, q) == -1
        assert quantize(1.5, q) == 2
        assert quantize(-2.5, q) == -3

    def test_clamping(self):
        q = QuantParams(scale=1.0, zero_point=0, alpha=-127, beta=127, mode="symmetric")
        assert quantize(500.0, q) == 127
        assert quantize(-500.0, q) == -127

    @given(st.floats(-64.74442, 64.74442, allow_nan=False))
    def test_roundtrip_bound(self, x):
        q = reference_qparams()
        assert abs(x - dequantize(quantize(x, q), q)) <= q.scale / 2

    @given(
        st.floats(-200, 200, allow_nan=False),
        st.floats(-200, 200, allow_nan=False),
    )
    def test_monotonic(self, x, y):
        q = reference_qparams()
        lo, hi = min(x, y), max(x, y)
        assert quantize(lo, q) <= quantize(hi, q)

    @given(st.floats(0.0, 1.0, allow_nan=False))
    def test_asymmetric_roundtrip_bound(self, frac):
        # skewed clip range [-2, 10]: zero point is nonzero, yet every
        # in-range value must still come back within half a step
        alpha, beta = -2.0, 10.0
        scale = (beta - alpha) / 254
        q = QuantParams(scale=scale, zero_point=round(alpha / scale) + 127,
                        alpha=alpha, beta=beta, mode="asymmetric")
        x = alpha + frac * (beta - alpha)
        assert abs(x - dequantize(quantize(x, q), q)) <= q.scale / 2 + 1e-12
        assert quantize(alpha, q) == -127
        assert quantize(beta, q) == 127

    def test_vectorized(self):
        q = reference_qparams()
        xs = np.array([-56.74, -1.58, 14.58, -17.0])
        np.testing.assert_array_equal(quantize(xs, q), [-111, -3, 29, -33])
        assert quantize(xs, q).dtype == np.int8


class TestQuantizeModel:
    def test_param_count_preserved(self):
        qm = quantize_model(standard_model("sigmoid-sigmoid", seed=1))
        assert qm.param_count == 664
        assert [w.shape for w in (qm.w1, qm.w2)] == [(61, 10), (10, 4)]

    def test_roundtrip_bound_every_parameter(self):
        model = standard_model("sigmoid-softmax", seed=2)
        model.layer1.weights *= 30  # widen the range
        qm = quantize_model(model)
        s = qm.qparams.scale
        back = dequantize_model(qm)
        for orig, rec in zip(model.parameters, back.parameters):
            assert np.max(np.abs(orig - rec)) <= s / 2 + 1e-12

    def test_code_below_minimum_rejected(self):
        w1 = np.zeros((61, 10), dtype=np.int8)
        w1[0, 0] = -128  # representable in int8 but outside the code range
        with pytest.raises(ValueError, match="below"):
            QuantizedModel(
                w1, np.zeros(10), np.zeros((10, 4)), np.zeros(4),
                reference_qparams(), "sigmoid-sigmoid",
            )

    def test_exact_zeros_stored_as_zero(self):
        model = standard_model("sigmoid-sigmoid", seed=3)
        model.layer1.weights[0, :] = 0.0
        qm = quantize_model(model, "symmetric")
        assert (qm.w1[0, :] == 0).all()

    def test_symmetric_beats_asymmetric_quantized_only(self):
        # directional property: with raw int8 codes as weights, a nonzero
        # zero point shifts every code (real 0.0 no longer stored as 0)
        # and accuracy drops; the zero-preserving symmetric mapping holds up
        from tinyecg.quant import predict_labels_quantized
        from tinyecg.synthetic import separable_beatset
        from tinyecg.train import TrainConfig, fit

        beats = separable_beatset(100, seed=5)
        model, _ = fit(
            beats, None, TrainConfig(epochs=600, variant="sigmoid-softmax", seed=5)
        )
        for p in model.parameters:
            p[p > 0] *= 0.5  # skew the trained range so asymmetric z != 0
        sym = quantize_model(model, "symmetric")
        asym = quantize_model(model, "asymmetric")
        assert sym.qparams.zero_point == 0
        assert asym.qparams.zero_point != 0
        acc_sym = np.mean(
            predict_labels_quantized(sym, beats.windows, temporary=False) == beats.labels
        )
        acc_asym = np.mean(
            predict_labels_quantized(asym, beats.windows, temporary=False) == beats.labels
        )
        assert acc_sym - acc_asym >= 0.1


class TestForwardTemporaryDequantized:
    def test_zero_model(self):
        qm = QuantizedModel(
            np.zeros((61, 10)), np.zeros(10), np.zeros((10, 4)), np.zeros(4),
            reference_qparams(), "sigmoid-sigmoid",
        )
        out = forward_temporary_dequantized(qm, np.zeros(61))
        assert out == pytest.approx([0.5] * 4)

    @pytest.mark.parametrize("variant", ["sigmoid-sigmoid", "relu-softmax"])
    def test_matches_fully_dequantized_oracle(self, variant, rng):
        for trial in range(20):
            qm = random_qmodel(rng, variant)
            beat = rng.uniform(0, 2, 61)
            got = forward_temporary_dequantized(qm, beat)
            oracle = model_forward(dequantize_model(qm), beat)
            np.testing.assert_allclose(got, oracle, atol=1e-6)

    def test_asymmetric_also_matches(self, rng):
        model = standard_model("relu-sigmoid", seed=9)
        model.layer2.bias += 1.5
        qm = quantize_model(model, "asymmetric")
        beat = rng.uniform(0, 1, 61)
        np.testing.assert_allclose(
            forward_temporary_dequantized(qm, beat),
            model_forward(dequantize_model(qm), beat),
            atol=1e-6,
        )

    def test_shape_mismatch_rejected(self, rng):
        qm = random_qmodel(rng)
        with pytest.raises(ValueError):
            forward_temporary_dequantized(qm, np.zeros(60))


def random_qmodel(rng, variant="sigmoid-sigmoid") -> QuantizedModel:
    q = QuantParams(
        scale=float(rng.uniform(0.01, 1.0)),
        zero_point=0,
        alpha=-10.0,
        beta=10.0,
        mode="symmetric",
    )
    ints = lambda shape: rng.integers(-127, 128, size=shape).astype(np.int8)
    return QuantizedModel(
        ints((61, 10)), ints(10), ints((10, 4)), ints(4), q, variant
    )


class TestForwardQuantizedOnly:
    def test_codes_used_verbatim(self):
        # one unit weight on input 0, everything else zero: the raw code
        # value must appear unscaled in the preactivation
        w1 = np.zeros((61, 10), dtype=np.int8)
        w1[0, 0] = 50
        qm = QuantizedModel(
            w1, np.zeros(10), np.zeros((10, 4)), np.zeros(4),
            reference_qparams(), "relu-sigmoid",
        )
        beat = np.zeros(61)
        beat[0] = 1.0
        # hidden = relu([50, 0, ...]); output = sigmoid(0) = 0.5
        out = forward_quantized_only(qm, beat)
        assert out == pytest.approx([0.5] * 4)
        hidden_probe = QuantizedModel(
            w1, np.zeros(10), np.zeros((10, 4)), np.zeros(4),
            reference_qparams(), "relu-softmax",
        )
        assert forward_quantized_only(hidden_probe, beat) == pytest.approx([0.25] * 4)

    def test_zero_codes_match_zero_model(self, rng):
        qm = QuantizedModel(
            np.zeros((61, 10)), np.zeros(10), np.zeros((10, 4)), np.zeros(4),
            reference_qparams(), "sigmoid-sigmoid",
        )
        beat = rng.uniform(0, 1, 61)
        assert forward_quantized_only(qm, beat) == pytest.approx([0.5] * 4)


class TestCostReports:
    def test_flops_exact(self):
        report = flops_report([(61, 10), (10, 4)])
        assert report.layers == ((61, 10, 1230), (10, 4, 84))
        assert report.total == 1314

    def test_memory_exact(self, rng):
        report = memory_report(random_qmodel(rng))
        assert report.layer_param_counts == (620, 44)
        assert report.model_param_bytes == 664
        assert report.temp_dequant_bytes == 3
        assert report.temp_dequant_bytes_actual == 4
        assert report.model_bytes == 667
        assert report.buffer_bytes == 600
        assert report.total_bytes == 1267
        assert report.budget_bytes == 2048
        assert not report.over_budget

    def test_over_budget_flagged(self):
        report = memory_report_from_shapes([(61, 128), (128, 64), (64, 4)])
        assert report.over_budget

    def test_report_text_contains_totals(self, rng):
        qm = random_qmodel(rng)
        text = format_cost_report(flops_report(qm.shapes), memory_report(qm))
        for token in ("1230", "84", "1314", "664", "667", "600", "1267", "2048"):
            assert token in text
