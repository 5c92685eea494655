"""Forward-pass behaviour of the three model families."""

import numpy as np
import pytest

from signbox.core.errors import InputError
from signbox.core.models import (
    ModelParams,
    RnnLayer,
    build,
    dense_projection,
    forward,
    forward_encoder,
    gru_cell_step,
    lstm_cell_step,
    predict,
    predict_proba,
    run_rnn_layer,
)
from signbox.core.tensor import Mode, Tensor, no_grad
from signbox.core.types import ReadoutMode, RnnCellKind


def batch_of(rng, lengths, steps):
    """Random scaled data with rows valid up to the given lengths."""
    data = rng.uniform(0.0, 1.0, size=(len(lengths), steps, 5)).astype(np.float32)
    mask = np.zeros((len(lengths), steps), dtype=np.float32)
    for row, length in enumerate(lengths):
        mask[row, :length] = 1.0
        data[row, length:] = 0.0
    return data, mask


@pytest.fixture(
    params=[
        "tiny_stacked_gru",
        "tiny_stacked_lstm",
        "tiny_dense_lstm",
        "tiny_dense_gru",
        "tiny_dense_stacked_gru",
        "tiny_encoder",
    ]
)
def any_config(request):
    return request.getfixturevalue(request.param)


def test_logit_shape(any_config, rng):
    params = build(any_config, seed=0)
    data, mask = batch_of(rng, [3, 7, 5], steps=8)
    assert forward(params, data, mask).shape == (3, 4)


def test_padding_content_is_ignored(any_config, rng):
    """Values behind the mask do not change a row's logits."""
    params = build(any_config, seed=1)
    data, mask = batch_of(rng, [4, 7], steps=9)
    noisy = data.copy()
    noisy[0, 4:] = rng.uniform(0.0, 1.0, size=(5, 5))

    clean_logits = forward(params, data, mask).data
    noisy_logits = forward(params, noisy, mask).data
    np.testing.assert_allclose(clean_logits, noisy_logits, atol=1e-5)


def test_rows_are_independent(any_config, rng):
    """A row's logits do not depend on the rest of the batch or on extra padding."""
    params = build(any_config, seed=2)
    data, mask = batch_of(rng, [5, 9, 2], steps=10)
    together = forward(params, data, mask).data
    alone = forward(params, data[2:3, :5], mask[2:3, :5]).data
    np.testing.assert_allclose(together[2:3], alone, atol=1e-5)


def test_empty_mask_row_rejected(any_config, rng):
    params = build(any_config, seed=0)
    data, mask = batch_of(rng, [3, 4], steps=6)
    mask[1] = 0.0
    with pytest.raises(InputError, match=r"\[1\]"):
        forward(params, data, mask)


def test_mask_batch_mismatch_rejected(tiny_stacked_gru, rng):
    params = build(tiny_stacked_gru, seed=0)
    data, _ = batch_of(rng, [3, 4], steps=6)
    with pytest.raises(InputError):
        forward(params, data, np.ones((3, 6), dtype=np.float32))


def test_eval_mode_is_deterministic(any_config, rng):
    params = build(any_config, seed=0)
    data, mask = batch_of(rng, [6, 6], steps=6)
    first = forward(params, data, mask, Mode.EVAL).data
    second = forward(params, data, mask, Mode.EVAL).data
    np.testing.assert_array_equal(first, second)


def test_train_mode_applies_dropout(any_config, rng):
    params = build(any_config, seed=0)
    data, mask = batch_of(rng, [6, 6], steps=6)
    evaluated = forward(params, data, mask, Mode.EVAL).data
    trained = forward(params, data, mask, Mode.TRAIN, np.random.default_rng(0)).data
    assert not np.allclose(evaluated, trained)


class TestReadout:
    """LAST_VALID and LAST_INDEX readouts of the recurrent families."""

    def _with_readout(self, params: ModelParams, readout: ReadoutMode) -> ModelParams:
        config = params.config.model_copy(update={"readout": readout})
        return ModelParams(config=config, tensors=params.tensors)

    def test_agree_on_full_rows(self, tiny_stacked_lstm, rng):
        params = build(tiny_stacked_lstm, seed=3)
        data, mask = batch_of(rng, [6, 6], steps=6)
        last_valid = forward(params, data, mask).data
        last_index = forward(self._with_readout(params, ReadoutMode.LAST_INDEX), data, mask).data
        np.testing.assert_allclose(last_valid, last_index, atol=1e-6)

    def test_last_index_sees_padding(self, tiny_stacked_gru, rng):
        params = build(tiny_stacked_gru, seed=3)
        data, mask = batch_of(rng, [2, 8], steps=8)
        last_valid = forward(params, data, mask).data
        last_index = forward(self._with_readout(params, ReadoutMode.LAST_INDEX), data, mask).data

        np.testing.assert_allclose(last_valid[1], last_index[1], atol=1e-6)
        assert not np.allclose(last_valid[0], last_index[0], atol=1e-6)


@pytest.mark.parametrize("cell", [RnnCellKind.LSTM, RnnCellKind.GRU])
def test_layer_matches_single_steps(cell, rng, tiny_stacked_lstm, tiny_stacked_gru):
    """Running a layer equals stepping its cell by hand."""
    config = tiny_stacked_lstm if cell is RnnCellKind.LSTM else tiny_stacked_gru
    params = build(config, seed=4)
    layer = RnnLayer.from_params(params, 0)
    inputs = Tensor(rng.uniform(size=(2, 5, 5)).astype(np.float32))

    outputs = run_rnn_layer(cell, layer, inputs, keep=None).data

    h = Tensor(np.zeros((2, 8), dtype=np.float32))
    c = Tensor(np.zeros((2, 8), dtype=np.float32))
    for t in range(5):
        if cell is RnnCellKind.LSTM:
            h, c = lstm_cell_step(layer, inputs[:, t, :], h, c)
        else:
            h = gru_cell_step(layer, inputs[:, t, :], h)
        np.testing.assert_allclose(outputs[:, t, :], h.data, atol=1e-6)


@pytest.mark.parametrize("cell", [RnnCellKind.LSTM, RnnCellKind.GRU])
def test_inference_loop_matches_recorded_loop(cell, rng, tiny_stacked_lstm, tiny_stacked_gru):
    """The no-grad loop gives the recorded outputs, and final_only keeps the last of them."""
    config = tiny_stacked_lstm if cell is RnnCellKind.LSTM else tiny_stacked_gru
    params = build(config, seed=6)
    layer = RnnLayer.from_params(params, 0)
    inputs = Tensor(rng.uniform(size=(3, 7, 5)).astype(np.float32))
    keep = np.ones((3, 7), dtype=bool)
    keep[0, 4:] = False
    keep[2, 2:] = False

    recorded = run_rnn_layer(cell, layer, inputs, keep).data
    recorded_final = run_rnn_layer(cell, layer, inputs, keep, final_only=True).data
    with no_grad():
        inferred = run_rnn_layer(cell, layer, inputs, keep).data
        inferred_final = run_rnn_layer(cell, layer, inputs, keep, final_only=True).data

    np.testing.assert_allclose(inferred, recorded, atol=1e-6)
    np.testing.assert_allclose(recorded_final, recorded[:, -1, :], atol=1e-6)
    np.testing.assert_allclose(inferred_final, recorded[:, -1, :], atol=1e-6)
    np.testing.assert_allclose(recorded[0, -1], recorded[0, 3], atol=1e-6)


def test_lstm_state_is_bounded(tiny_stacked_lstm, rng):
    params = build(tiny_stacked_lstm, seed=0)
    layer = RnnLayer.from_params(params, 0)
    inputs = Tensor(rng.uniform(size=(3, 40, 5)).astype(np.float32) * 10.0)
    outputs = run_rnn_layer(RnnCellKind.LSTM, layer, inputs, keep=None).data
    assert np.abs(outputs).max() < 1.0


def zero_layer(cell: RnnCellKind, inputs: int, hidden: int) -> RnnLayer:
    gates = 4 if cell is RnnCellKind.LSTM else 3
    return RnnLayer(
        w_input=Tensor(np.zeros((inputs, gates * hidden))),
        w_hidden=Tensor(np.zeros((hidden, gates * hidden))),
        bias=Tensor(np.zeros(gates * hidden)),
    )


class TestZeroWeightCells:
    """With all weights zero every gate sits at sigmoid(0) = 0.5."""

    def test_lstm_halves_the_cell_state(self, rng):
        layer = zero_layer(RnnCellKind.LSTM, inputs=5, hidden=3)
        x_t = Tensor(rng.uniform(-2.0, 2.0, size=(2, 5)))
        h_prev = Tensor(rng.uniform(-1.0, 1.0, size=(2, 3)))
        c_prev = Tensor(np.ones((2, 3)))

        h, c = lstm_cell_step(layer, x_t, h_prev, c_prev)

        np.testing.assert_allclose(c.data, 0.5)
        np.testing.assert_allclose(h.data, 0.2310585, atol=1e-6)

    def test_gru_moves_halfway_to_zero(self, rng):
        layer = zero_layer(RnnCellKind.GRU, inputs=5, hidden=3)
        x_t = Tensor(rng.uniform(-2.0, 2.0, size=(2, 5)))

        h = gru_cell_step(layer, x_t, Tensor(np.ones((2, 3))))

        np.testing.assert_allclose(h.data, 0.5)


def test_dense_projection_commutes_with_step_order(tiny_dense_lstm, rng):
    """The projection acts on each step alone, so swapping steps swaps output rows."""
    params = build(tiny_dense_lstm, seed=0)
    data = rng.uniform(0.0, 1.0, size=(1, 6, 5)).astype(np.float32)
    swapped = data[:, [0, 4, 2, 3, 1, 5], :]

    projected = dense_projection(params, Tensor(data)).data
    projected_swapped = dense_projection(params, Tensor(swapped)).data

    assert projected.shape == (1, 6, 6)
    np.testing.assert_allclose(projected_swapped, projected[:, [0, 4, 2, 3, 1, 5], :], atol=1e-6)


class TestEncoder:
    """Attention masking and length limits of the encoder."""

    def test_padded_keys_get_zero_attention(self, tiny_encoder, rng):
        params = build(tiny_encoder, seed=0)
        data, mask = batch_of(rng, [3, 6], steps=6)
        trace: list[np.ndarray] = []
        forward_encoder(params, data, mask, attention_trace=trace)

        assert len(trace) == tiny_encoder.num_layers
        for weights in trace:
            assert weights.shape == (2, 2, 7, 7)
            # row 0: [CLS] plus three frames are valid, keys 4..6 are padding
            assert (weights[0, :, :, 4:] == 0.0).all()
            np.testing.assert_allclose(weights.sum(axis=-1), 1.0, atol=1e-5)
            assert (weights[1] > 0.0).all()

    def test_trailing_padding_is_trimmed(self, tiny_encoder, rng):
        """Padding past the longest row never reaches the position table."""
        params = build(tiny_encoder, seed=0)
        data, mask = batch_of(rng, [4, 5], steps=30)
        trace: list[np.ndarray] = []
        forward_encoder(params, data, mask, attention_trace=trace)
        assert trace[0].shape[-1] == 6

    def test_over_long_input_rejected(self, tiny_encoder, rng):
        params = build(tiny_encoder, seed=0)
        data, mask = batch_of(rng, [13], steps=13)
        with pytest.raises(InputError, match="max_len"):
            forward_encoder(params, data, mask)

    def test_wrong_family_rejected(self, tiny_stacked_gru, rng):
        params = build(tiny_stacked_gru, seed=0)
        data, mask = batch_of(rng, [3], steps=3)
        with pytest.raises(InputError, match="encoder"):
            forward_encoder(params, data, mask)


def test_predict_proba_rows_sum_to_one(tiny_dense_lstm, rng):
    params = build(tiny_dense_lstm, seed=0)
    data, mask = batch_of(rng, [3, 5, 8, 1, 2], steps=8)
    probs = predict_proba(params, data, mask, batch_size=2)
    assert probs.shape == (5, 4)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-5)
    np.testing.assert_array_equal(predict(params, data, mask), probs.argmax(axis=1))

