"""Transformer substrate: forward semantics, gradients, optimizer, persistence."""

import math

import numpy as np
import pytest
import torch

from morphoglot.substrate import (
    CausalStack,
    CheckpointFormatError,
    NonFiniteLossError,
    SequenceEncoder,
    TrainState,
    TransformerConfig,
    encode_sequence,
    finite_difference_check,
    load_into_module,
    load_tensors,
    module_tensors,
    save_tensors,
    sinusoidal_positions,
)


def tiny_config(**overrides):
    base = dict(
        vocab_size=7, d_model=8, n_layers=1, n_heads=2, d_ff=16,
        max_seq_len=16, dropout_rate=0.0,
    )
    base.update(overrides)
    return TransformerConfig(**base)


class TestSinusoidalPositions:
    def test_position_zero(self):
        table = sinusoidal_positions(8, 12)
        assert torch.all(table[0, 0::2] == 0.0)
        assert torch.all(table[0, 1::2] == 1.0)

    def test_first_pair_is_sin_cos_of_pos(self):
        table = sinusoidal_positions(6, 8).double()
        for pos in range(6):
            assert float(table[pos, 0]) == pytest.approx(math.sin(pos), abs=1e-6)
            assert float(table[pos, 1]) == pytest.approx(math.cos(pos), abs=1e-6)

    def test_matches_direct_formula_transcription(self):
        table = sinusoidal_positions(4, 4)
        expected = np.zeros((4, 4))
        for pos in range(4):
            for i in range(2):
                angle = pos / (10000 ** (2 * i / 4))
                expected[pos, 2 * i] = math.sin(angle)
                expected[pos, 2 * i + 1] = math.cos(angle)
        np.testing.assert_allclose(table.numpy(), expected, atol=1e-6)

    def test_odd_d_model_rejected(self):
        with pytest.raises(ValueError):
            sinusoidal_positions(4, 5)


class TestSequenceEncoder:
    def test_eval_mode_bitwise_deterministic(self):
        torch.manual_seed(0)
        model = SequenceEncoder(tiny_config(dropout_rate=0.3)).eval()
        ids = torch.tensor([[1, 2, 3, 0]])
        mask = torch.tensor([[True, True, True, False]])
        with torch.no_grad():
            a, _ = model(ids, mask)
            b, _ = model(ids, mask)
        assert torch.equal(a, b)

    def test_single_valid_position_pooling(self):
        torch.manual_seed(0)
        model = SequenceEncoder(tiny_config()).eval()
        ids = torch.tensor([[3, 1, 1, 1]])
        mask = torch.tensor([[True, False, False, False]])
        with torch.no_grad():
            pooled, hidden = model(ids, mask)
        assert torch.allclose(pooled[0], hidden[0, 0])

    def test_attention_rows_sum_to_one(self):
        torch.manual_seed(1)
        model = SequenceEncoder(tiny_config()).eval()
        for block in model.blocks:
            block.attn.record_attention = True
        ids = torch.randint(0, 7, (3, 9))
        mask = torch.ones(3, 9, dtype=torch.bool)
        mask[1, 6:] = False
        with torch.no_grad():
            model(ids, mask)
        probs = model.blocks[0].attn.last_attention
        sums = probs.sum(dim=-1)
        assert torch.all((sums - 1.0).abs() < 1e-6)

    def test_token_out_of_range(self):
        model = SequenceEncoder(tiny_config()).eval()
        with pytest.raises(ValueError):
            model(torch.tensor([[99]]))

    def test_sequence_too_long(self):
        model = SequenceEncoder(tiny_config(max_seq_len=4)).eval()
        with pytest.raises(ValueError):
            model(torch.zeros(1, 5, dtype=torch.long))

    def test_encode_sequence_wrapper(self):
        torch.manual_seed(0)
        model = SequenceEncoder(tiny_config()).eval()
        pooled, hidden = encode_sequence(model, [1, 2, 3], [True, True, True])
        assert pooled.shape == (8,)
        assert hidden.shape == (3, 8)

    def test_layernorm_normalizes_before_affine(self):
        # a fresh LayerNorm has identity affine, so its output is the
        # pre-affine normalization
        torch.manual_seed(0)
        ln = torch.nn.LayerNorm(64)
        x = torch.randn(32, 64)
        out = ln(x)
        assert torch.all(out.mean(dim=-1).abs() < 1e-5)
        assert torch.all((out.var(dim=-1, unbiased=False) - 1.0).abs() < 1e-4)


class TestCausality:
    def test_changing_future_positions_leaves_prefix_invariant(self):
        torch.manual_seed(2)
        stack = CausalStack(d_model=8, n_blocks=2, n_heads=2, d_ff=16,
                            dropout=0.0, max_seq_len=12).eval()
        x = torch.randn(2, 6, 8)
        y = x.clone()
        y[:, 4:, :] = torch.randn(2, 2, 8) * 10  # garbage past position 3
        with torch.no_grad():
            out_x = stack(x)
            out_y = stack(y)
        assert torch.allclose(out_x[:, :4], out_y[:, :4], atol=1e-6)

    def test_causal_invariance_float64(self):
        torch.manual_seed(2)
        stack = CausalStack(8, 1, 2, 16, 0.0, 12).double().eval()
        x = torch.randn(1, 5, 8, dtype=torch.float64)
        y = x.clone()
        y[:, 3:, :] += 7.0
        with torch.no_grad():
            assert torch.allclose(stack(x)[:, :3], stack(y)[:, :3], atol=1e-12)


class TestCheckpoint:
    def test_round_trip_bitwise(self, tmp_path):
        torch.manual_seed(3)
        model = SequenceEncoder(tiny_config())
        tensors = module_tensors(model)
        path = tmp_path / "model.mglt"
        blob = save_tensors(tensors, path)
        assert path.read_bytes() == blob
        loaded = load_tensors(str(path))
        assert list(loaded) == list(tensors)
        for name in tensors:
            assert loaded[name].dtype == np.float32
            assert np.array_equal(loaded[name], tensors[name])
        # re-serialization is byte-identical
        assert save_tensors(loaded) == blob

    def test_load_into_module(self):
        torch.manual_seed(3)
        a = SequenceEncoder(tiny_config())
        torch.manual_seed(4)
        b = SequenceEncoder(tiny_config())
        load_into_module(b, load_tensors(save_tensors(module_tensors(a))))
        for pa, pb in zip(a.parameters(), b.parameters()):
            assert torch.equal(pa, pb)

    def test_bad_magic(self):
        blob = save_tensors({"w": np.zeros((2, 2), dtype=np.float32)})
        with pytest.raises(CheckpointFormatError):
            load_tensors(b"XXXX" + blob[4:])

    def test_bad_version(self):
        blob = save_tensors({"w": np.zeros(2, dtype=np.float32)})
        with pytest.raises(CheckpointFormatError):
            load_tensors(blob[:4] + b"\x63\x00\x00\x00" + blob[8:])

    def test_truncated(self):
        blob = save_tensors({"w": np.ones((3, 3), dtype=np.float32)})
        with pytest.raises(CheckpointFormatError):
            load_tensors(blob[:-8])


class TestTrainState:
    def test_constant_loss_changes_params_only_by_weight_decay(self):
        torch.manual_seed(5)
        model = torch.nn.Linear(4, 4)
        before = {k: v.detach().clone() for k, v in model.named_parameters()}
        state = TrainState(model, lr=0.1, weight_decay=0.01, clip_norm=1.0)
        loss = sum((p * 0.0).sum() for p in model.parameters())
        state.step(loss)
        for name, param in model.named_parameters():
            expected = before[name] * (1 - 0.1 * 0.01)  # decoupled decay
            assert torch.allclose(param, expected, atol=1e-7)

    def test_post_clip_norm_bounded(self):
        torch.manual_seed(6)
        model = torch.nn.Linear(16, 16)
        state = TrainState(model, lr=1e-3, clip_norm=1.0)
        for scale in (1.0, 100.0, 10000.0):
            x = torch.randn(8, 16) * scale
            loss = model(x).pow(2).sum()
            if not torch.isfinite(loss):
                continue
            state.optimizer.zero_grad()
            loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), 1.0)
            assert state.global_grad_norm() <= 1.0 + 1e-6

    def test_non_finite_loss_aborts_without_update(self):
        torch.manual_seed(7)
        model = torch.nn.Linear(4, 1)
        before = {k: v.detach().clone() for k, v in model.named_parameters()}
        state = TrainState(model, lr=0.1)
        bad = model(torch.randn(2, 4)).sum() * float("nan")
        with pytest.raises(NonFiniteLossError):
            state.step(bad)
        for name, param in model.named_parameters():
            assert torch.equal(param, before[name])
        assert state.step_count == 0

    def test_warmup_ramps_lr(self):
        model = torch.nn.Linear(2, 2)
        state = TrainState(model, lr=1.0, warmup_steps=4)
        observed = []
        for _ in range(6):
            loss = model(torch.ones(1, 2)).sum()
            state.step(loss)
            observed.append(state.optimizer.param_groups[0]["lr"])
        assert observed == [0.25, 0.5, 0.75, 1.0, 1.0, 1.0]


class TestFiniteDifferenceCheck:
    def test_linear_model_quadratic_loss_exact(self):
        torch.manual_seed(8)
        model = torch.nn.Linear(3, 1, bias=False).double().eval()
        x = torch.randn(5, 3, dtype=torch.float64)

        def loss_fn():
            return model(x).pow(2).sum()

        report = finite_difference_check(model, loss_fn, h=1e-3, tolerance=1e-8)
        assert report.passed  # quadratic loss: central differences are exact

    def test_one_layer_transformer_passes(self):
        torch.manual_seed(9)
        config = tiny_config(vocab_size=5, d_model=4, n_heads=2, d_ff=8)
        model = SequenceEncoder(config).double().eval()
        ids = torch.tensor([[0, 1, 2, 3, 4], [4, 3, 2, 1, 0]])
        mask = torch.ones(2, 5, dtype=torch.bool)
        mask[1, 3:] = False
        target = torch.randn(2, 4, dtype=torch.float64)

        def loss_fn():
            pooled, _ = model(ids, mask)
            return (pooled - target).pow(2).sum() + pooled.sum().tanh()

        report = finite_difference_check(model, loss_fn, h=1e-3, tolerance=1e-4)
        assert report.passed, str(report)

    def test_zero_tolerance_fails_on_nonlinear_model(self):
        torch.manual_seed(10)
        model = torch.nn.Sequential(torch.nn.Linear(2, 2), torch.nn.Tanh()).double().eval()
        x = torch.randn(4, 2, dtype=torch.float64)

        def loss_fn():
            return model(x).pow(4).sum()

        report = finite_difference_check(model, loss_fn, h=1e-3, tolerance=0.0)
        assert not report.passed

    def test_requires_eval_and_float64(self):
        model = torch.nn.Linear(2, 2)
        with pytest.raises(ValueError):
            finite_difference_check(model.train(), lambda: model.weight.sum())
        with pytest.raises(ValueError):
            finite_difference_check(model.eval(), lambda: model.weight.sum())


class TestTrainingDeterminism:
    def test_same_seed_same_loss_curve(self):
        losses = []
        for _ in range(2):
            torch.manual_seed(11)
            model = SequenceEncoder(tiny_config(dropout_rate=0.0))
            state = TrainState(model, lr=1e-3, weight_decay=0.01, clip_norm=1.0)
            run = []
            for step in range(5):
                ids = torch.full((2, 4), step % 7, dtype=torch.long)
                pooled, _ = model(ids)
                loss = pooled.pow(2).sum()
                run.append(loss.item())
                state.step(loss)
            losses.append(run)
        assert losses[0] == losses[1]
