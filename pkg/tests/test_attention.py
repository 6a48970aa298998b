import math
import os

import numpy as np
import pytest

from lmlab import attention as att
from lmlab import numkit
from lmlab.activations import softmax


def rand_head(rng, d, dk):
    return att.AttentionHeadParams(
        WQ=rng.uniform(-0.5, 0.5, size=(d, dk)),
        WK=rng.uniform(-0.5, 0.5, size=(d, dk)),
        WV=rng.uniform(-0.5, 0.5, size=(d, dk)),
    )


def test_single_token_weight_is_one():
    q = np.array([[1.0, 2.0]])
    k = np.array([[0.5, -1.0]])
    a = att.attention_weights(q, k, causal=False)
    assert a.shape == (1, 1)
    assert a[0, 0] == 1.0


def test_rows_are_stochastic():
    rng = numkit.make_rng(2)
    q = rng.standard_normal((6, 4))
    k = rng.standard_normal((6, 4))
    for causal in (False, True):
        a = att.attention_weights(q, k, causal=causal)
        assert np.max(np.abs(a.sum(axis=1) - 1.0)) < 1e-12
        assert np.all(a >= 0.0)


def test_causal_mask_zeros_are_exact():
    rng = numkit.make_rng(3)
    q = rng.standard_normal((8, 4)) * 5
    k = rng.standard_normal((8, 4)) * 5
    a = att.attention_weights(q, k, causal=True)
    upper = a[np.triu_indices(8, 1)]
    assert np.all(upper == 0.0)
    assert a[0, 0] == 1.0


def test_attention_weights_match_manual_softmax():
    rng = numkit.make_rng(4)
    q = rng.standard_normal((5, 3))
    k = rng.standard_normal((5, 3))
    a = att.attention_weights(q, k, causal=False)
    scores = (q @ k.T) / math.sqrt(3.0)
    for i in range(5):
        assert np.max(np.abs(a[i] - softmax(scores[i]))) < 1e-12


def test_identity_weights_pass_values_through():
    v = np.arange(12.0).reshape(4, 3)
    assert np.array_equal(att.attention_output(np.eye(4), v), v)


def test_uniform_weights_average_values():
    v = np.arange(8.0).reshape(4, 2)
    a = np.full((4, 4), 0.25)
    out = att.attention_output(a, v)
    assert np.max(np.abs(out - v.mean(axis=0))) < 1e-12


def test_single_head_shape():
    rng = numkit.make_rng(5)
    x = rng.standard_normal((6, 8))
    out = att.single_head(x, rand_head(rng, 8, 3), causal=True)
    assert out.shape == (6, 3)


def test_multi_head_one_head_identity_wo_reduces():
    rng = numkit.make_rng(7)
    d = 6
    x = rng.standard_normal((5, d))
    blk = att.init_block_params(rng, d, 1)
    blk.WO = np.eye(d)
    out_mh = att.multi_head(x, blk, causal=True)
    out_sh = att.single_head(x, blk.heads[0], causal=True)
    assert np.max(np.abs(out_mh - out_sh)) <= 1e-12


def test_layer_norm_examples():
    row = np.array([[1.0, 3.0]])
    out = att.layer_norm(row, np.ones(2), np.zeros(2))
    # centered (-1, 1), variance 1 up to the 1e-5 stabilizer
    assert np.max(np.abs(out - np.array([[-1.0, 1.0]]))) < 1e-4
    g = np.array([2.0, 2.0])
    b = np.array([1.0, -1.0])
    out2 = att.layer_norm(row, g, b)
    assert np.max(np.abs(out2 - (out * 2.0 + np.array([1.0, -1.0])))) < 1e-12


def test_layer_norm_moments():
    rng = numkit.make_rng(8)
    x = rng.standard_normal((7, 16)) * 3.0 + 5.0
    out = att.layer_norm(x, np.ones(16), np.zeros(16))
    assert np.max(np.abs(out.mean(axis=1))) < 1e-12
    assert np.max(np.abs(out.var(axis=1) - 1.0)) < 1e-4


def test_layer_norm_constant_row_stays_finite():
    x = np.full((1, 4), 3.25)
    out = att.layer_norm(x, np.ones(4), np.zeros(4))
    assert np.all(np.isfinite(out))
    assert np.max(np.abs(out)) < 1e-6


def test_ffn_matches_manual():
    rng = numkit.make_rng(9)
    blk = att.init_block_params(rng, 4, 2)
    x = rng.standard_normal((3, 4))
    out = att.ffn(x, blk)
    hidden = 1.0 / (1.0 + np.exp(-(x @ blk.W_a + blk.b_a)))
    assert np.max(np.abs(out - (hidden @ blk.W_b + blk.b_b))) < 1e-10
    assert blk.W_a.shape == (4, 16)   # hidden width defaults to 4x the model


def test_block_output_shape_and_finite():
    rng = numkit.make_rng(10)
    blk = att.init_block_params(rng, 8, 2)
    x = rng.standard_normal((5, 8))
    out = att.transformer_block(x, blk, causal=True)
    assert out.shape == (5, 8)
    assert np.all(np.isfinite(out))


def test_init_block_rejects_bad_head_split():
    with pytest.raises(ValueError):
        att.init_block_params(numkit.make_rng(0), 8, 3)


def test_causality_is_exact_under_future_perturbation():
    rng = numkit.make_rng(11)
    blk = att.init_block_params(rng, 8, 2)
    x = rng.standard_normal((6, 8))
    base = att.transformer_block(x, blk, causal=True)
    bumped = x.copy()
    bumped[5] += 100.0
    alt = att.transformer_block(bumped, blk, causal=True)
    assert np.array_equal(base[:5], alt[:5])
    assert not np.array_equal(base[5], alt[5])


def test_shared_token_diverges_across_contexts():
    rng = numkit.make_rng(12)
    d = 16
    blk = att.init_block_params(rng, d, 2)
    shared = rng.uniform(-0.5, 0.5, size=d)
    c1 = rng.uniform(-0.5, 0.5, size=(5, d))
    c2 = rng.uniform(-0.5, 0.5, size=(5, d))
    o1 = att.transformer_block(np.vstack([c1, shared]), blk, causal=True)
    o2 = att.transformer_block(np.vstack([c2, shared]), blk, causal=True)
    assert numkit.norm(o1[-1] - o2[-1]) > 1e-3


def test_scaling_divides_scores_by_sqrt_dk():
    rng = numkit.make_rng(13)
    q = rng.standard_normal((4, 9))
    k = rng.standard_normal((4, 9))
    a = att.attention_weights(q, k, causal=False)
    scores = (q @ k.T) / 3.0
    for i in range(4):
        assert np.max(np.abs(a[i] - softmax(scores[i]))) < 1e-12


def test_sample_index_deterministic_pick():
    probs = np.array([0.0, 1.0, 0.0])
    rng = numkit.make_rng(1)
    for _ in range(5):
        assert att.sample_index(probs, rng) == 1


def test_sample_index_clamps_top_edge():
    probs = np.array([0.25, 0.25, 0.25, 0.25])
    rng = numkit.make_rng(2)
    draws = {att.sample_index(probs, rng) for _ in range(200)}
    assert draws.issubset({0, 1, 2, 3})
    assert len(draws) == 4


def build_generator(seed, vocab=12, d=8, h=2, layers=1):
    rngs = numkit.spawn_rngs(seed, layers + 1)
    blocks = [att.init_block_params(rngs[i], d, h) for i in range(layers)]
    e_in = rngs[layers].uniform(-0.5, 0.5, size=(vocab, d))
    e_out = rngs[layers].uniform(-0.5, 0.5, size=(vocab, d))
    return blocks, e_in, e_out


def test_generate_zero_steps_echoes_prompt():
    blocks, e_in, e_out = build_generator(3)
    out = att.generate(blocks, e_in, e_out, [1, 2, 3], 1.0, 0, numkit.make_rng(0))
    assert out == [1, 2, 3]


def test_generate_reproducible():
    blocks, e_in, e_out = build_generator(4)
    a = att.generate(blocks, e_in, e_out, [0, 1], 1.0, 10, numkit.make_rng(5))
    b = att.generate(blocks, e_in, e_out, [0, 1], 1.0, 10, numkit.make_rng(5))
    assert a == b
    assert len(a) == 12


def test_generate_cold_temperature_is_greedy():
    blocks, e_in, e_out = build_generator(6)
    a = att.generate(blocks, e_in, e_out, [2], 1e-3, 6, numkit.make_rng(1))
    b = att.generate(blocks, e_in, e_out, [2], 1e-3, 6, numkit.make_rng(99))
    assert a == b   # rng is irrelevant when one token holds all the mass


def test_generate_validates_inputs():
    blocks, e_in, e_out = build_generator(7)
    rng = numkit.make_rng(0)
    with pytest.raises(ValueError):
        att.generate(blocks, e_in, e_out, [], 1.0, 3, rng)
    with pytest.raises(ValueError):
        att.generate(blocks, e_in, e_out, [99], 1.0, 3, rng)
    with pytest.raises(ValueError):
        att.generate(blocks, e_in, e_out, [0], 0.0, 3, rng)
    with pytest.raises(ValueError):
        att.generate(blocks, e_in, e_out, [0], 1.0, -1, rng)


def test_save_load_blocks_round_trip(tmp_path):
    rng = numkit.make_rng(20)
    blocks = [att.init_block_params(rng, 8, 2) for _ in range(2)]
    e_in = rng.uniform(-0.5, 0.5, size=(10, 8))
    e_out = rng.uniform(-0.5, 0.5, size=(10, 8))
    att.save_blocks(str(tmp_path), blocks, e_in, e_out, seed=20)
    loaded, e_in2, e_out2, meta = att.load_blocks(str(tmp_path))
    assert meta["vocab"] == 10
    assert len(loaded) == 2
    assert e_in.tobytes() == e_in2.tobytes()
    assert e_out.tobytes() == e_out2.tobytes()
    for a, b in zip(blocks, loaded):
        assert a.WO.tobytes() == b.WO.tobytes()
        for ha, hb in zip(a.heads, b.heads):
            assert ha.WQ.tobytes() == hb.WQ.tobytes()
        assert a.ln1_gain.tobytes() == b.ln1_gain.tobytes()
        assert a.W_b.tobytes() == b.W_b.tobytes()
    x = rng.standard_normal((4, 8))
    ya = att.transformer_block(x, blocks[0], causal=True)
    yb = att.transformer_block(x, loaded[0], causal=True)
    assert ya.tobytes() == yb.tobytes()
    assert os.path.exists(os.path.join(tmp_path, "manifest.json"))
