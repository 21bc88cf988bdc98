import io
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from distread.sentiment import (
    BaselineModel,
    ModelConfig,
    SentimentModel,
    load_scorer,
    load_weights,
    save_weights,
)
from distread.weights import WeightFormatError, read_tensors, write_tensors


def dump(tensors):
    buf = io.BytesIO()
    write_tensors(buf, tensors)
    return buf.getvalue()


def saved(model):
    buf = io.BytesIO()
    save_weights(model, buf)
    return buf.getvalue()


def test_layout_by_hand():
    data = dump({"ab": np.array([[1.0, 2.0, 3.0]])})
    expected = (
        b"MLSW" + struct.pack("<II", 1, 1)
        + struct.pack("<H", 2) + b"ab" + struct.pack("<B", 2) + struct.pack("<II", 1, 3)
        + struct.pack("<3f", 1.0, 2.0, 3.0)
    )
    assert data == expected


def test_scalar_rank_zero():
    out = read_tensors(io.BytesIO(dump({"s": np.array(2.5)})))
    assert out["s"].shape == () and out["s"] == 2.5


def test_model_round_trip_byte_identical():
    model = SentimentModel.init(ModelConfig(5, 3), seed=0)
    first = saved(model)
    again = load_weights(io.BytesIO(first))
    assert saved(again) == first
    assert list(again.params) == list(ModelConfig(5, 3).shapes())
    for name, value in model.params.items():
        np.testing.assert_array_equal(again.params[name], value.astype(np.float32))


def test_config_inferred():
    cfg = ModelConfig(6, 2, layers=3, bidirectional=False)
    again = load_weights(io.BytesIO(saved(SentimentModel.init(cfg))))
    assert again.config == cfg


def test_truncated():
    data = saved(SentimentModel.init(ModelConfig(4, 2)))
    with pytest.raises(WeightFormatError, match="unexpected end of tensor data"):
        load_weights(io.BytesIO(data[:-3]))


def test_renamed_tensor():
    model = SentimentModel.init(ModelConfig(4, 2))
    params = dict(model.params)
    params["head.bias"] = params.pop("head.b")
    with pytest.raises(WeightFormatError, match="missing tensor 'head.b'"):
        load_weights(io.BytesIO(dump(params)))


def test_bad_magic():
    with pytest.raises(WeightFormatError, match="magic"):
        read_tensors(io.BytesIO(b"XXXX" + b"\0" * 8))


def test_bad_version():
    with pytest.raises(WeightFormatError, match="version 2"):
        read_tensors(io.BytesIO(b"MLSW" + struct.pack("<II", 2, 0)))


def test_shape_mismatch_against_config():
    data = saved(SentimentModel.init(ModelConfig(4, 2)))
    with pytest.raises(WeightFormatError, match="l1.fwd.W_ih"):
        load_weights(io.BytesIO(data), ModelConfig(5, 2))


def test_trailing_bytes():
    with pytest.raises(WeightFormatError, match="trailing"):
        read_tensors(io.BytesIO(dump({"a": np.zeros(2)}) + b"\0"))


def test_duplicate_name():
    one = dump({"a": np.zeros(1)})
    body = one[12:]
    data = b"MLSW" + struct.pack("<II", 1, 2) + body + body
    with pytest.raises(WeightFormatError, match="duplicate"):
        read_tensors(io.BytesIO(data))


def test_load_scorer_dispatch():
    base = BaselineModel.zeros(3)
    scorer = load_scorer(io.BytesIO(dump(base.params)))
    assert isinstance(scorer, BaselineModel)
    lstm = load_scorer(io.BytesIO(saved(SentimentModel.init(ModelConfig(3, 2)))))
    assert isinstance(lstm, SentimentModel)


@settings(max_examples=50, deadline=None)
@given(
    st.dictionaries(
        st.text(min_size=1, max_size=8),
        arrays(np.float32, st.lists(st.integers(0, 4), max_size=3).map(tuple),
               elements=st.floats(width=32, allow_nan=False)),
        max_size=4,
    )
)
def test_round_trip_property(tensors):
    data = dump(tensors)
    back = read_tensors(io.BytesIO(data))
    assert list(back) == list(tensors)
    for name, arr in tensors.items():
        np.testing.assert_array_equal(back[name].astype(np.float32), arr)
    assert dump(back) == data
