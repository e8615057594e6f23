import json

import numpy as np
import pytest

from tinyecg.modelio import (
    ChecksumError,
    load_any,
    load_model,
    load_qmodel,
    model_to_json,
    save_json_mirror,
    save_model,
    save_qmodel,
)
from tinyecg.nn import standard_model
from tinyecg.quant import quantize_model


@pytest.fixture
def model():
    return standard_model("relu-softmax", seed=4)


@pytest.fixture
def qmodel(model):
    return quantize_model(model)


class TestFloatFormat:
    def test_bit_exact_round_trip(self, model, tmp_path):
        path = tmp_path / "m.tnn"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.variant == model.variant
        for a, b in zip(loaded.parameters, model.parameters):
            np.testing.assert_array_equal(a, b)  # bitwise, not approx
        # a second save produces identical bytes
        path2 = tmp_path / "m2.tnn"
        save_model(loaded, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_corruption_detected(self, model, tmp_path):
        path = tmp_path / "m.tnn"
        save_model(model, path)
        blob = bytearray(path.read_bytes())
        blob[100] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(ChecksumError, match="checksum"):
            load_model(path)

    def test_truncation_detected(self, model, tmp_path):
        path = tmp_path / "m.tnn"
        save_model(model, path)
        path.write_bytes(path.read_bytes()[:50])
        with pytest.raises(ChecksumError):
            load_model(path)

    def test_wrong_magic_rejected(self, model, qmodel, tmp_path):
        path = tmp_path / "q.tnq"
        save_qmodel(qmodel, path)
        with pytest.raises(ChecksumError, match="magic"):
            load_model(path)


class TestQuantFormat:
    def test_bit_exact_round_trip(self, qmodel, tmp_path):
        path = tmp_path / "q.tnq"
        save_qmodel(qmodel, path)
        loaded = load_qmodel(path)
        assert loaded.variant == qmodel.variant
        assert loaded.qparams == qmodel.qparams
        for a, b in zip(loaded.parameters, qmodel.parameters):
            np.testing.assert_array_equal(a, b)
            assert a.dtype == np.int8

    def test_corruption_detected(self, qmodel, tmp_path):
        path = tmp_path / "q.tnq"
        save_qmodel(qmodel, path)
        blob = bytearray(path.read_bytes())
        blob[-10] ^= 0x01
        path.write_bytes(bytes(blob))
        with pytest.raises(ChecksumError):
            load_qmodel(path)


class TestLoadAny:
    def test_dispatch_on_magic(self, model, qmodel, tmp_path):
        from tinyecg.nn import DenseModel
        from tinyecg.quant import QuantizedModel

        save_model(model, tmp_path / "a")
        save_qmodel(qmodel, tmp_path / "b")
        assert isinstance(load_any(tmp_path / "a"), DenseModel)
        assert isinstance(load_any(tmp_path / "b"), QuantizedModel)

    def test_garbage_rejected(self, tmp_path):
        p = tmp_path / "junk"
        p.write_bytes(b"not a model at all")
        with pytest.raises(ChecksumError):
            load_any(p)


class TestJsonMirror:
    def test_mirror_matches_binary(self, model, tmp_path):
        doc = model_to_json(model)
        assert doc["variant"] == "relu-softmax"
        assert len(doc["layers"]) == 2
        np.testing.assert_allclose(doc["layers"][0]["weights"], model.layer1.weights)

        save_json_mirror(model, tmp_path / "m.json")
        parsed = json.loads((tmp_path / "m.json").read_text())
        assert parsed["layers"][1]["fan_out"] == 4

    def test_quantized_mirror(self, qmodel, tmp_path):
        save_json_mirror(qmodel, tmp_path / "q.json")
        parsed = json.loads((tmp_path / "q.json").read_text())
        assert parsed["mode"] == "symmetric"
        assert parsed["zero_point"] == 0
        assert np.array(parsed["layers"][0]["weights"]).shape == (61, 10)
