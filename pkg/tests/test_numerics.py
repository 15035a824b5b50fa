import math

import numpy as np
import pytest

from structgen.autodiff import Tensor, concat, layer_norm, log_softmax, softmax as t_softmax
from structgen.numerics import (
    grad_check,
    init_params,
    load_checkpoint,
    save_checkpoint,
    softmax,
)


class TestSoftmax:
    def test_uniform(self):
        np.testing.assert_allclose(softmax([0, 0, 0, 0]), [0.25] * 4)

    def test_overflow_stability(self):
        out = softmax([1000.0, 0.0])
        assert np.all(np.isfinite(out))
        assert out[0] == pytest.approx(1.0)
        assert out[1] == pytest.approx(0.0, abs=1e-300)

    def test_matches_extended_precision_oracle(self):
        from mpmath import mp, exp as mexp

        mp.dps = 50
        values = [1, 2, 3]
        exps = [mexp(v) for v in values]
        total = sum(exps)
        expected = [float(e / total) for e in exps]
        np.testing.assert_allclose(softmax(values), expected, rtol=1e-12, atol=0)

    def test_sums_to_one_and_permutation_equivariant(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            v = rng.normal(size=8) * 10
            s = softmax(v)
            assert abs(s.sum() - 1) < 1e-9
            perm = rng.permutation(8)
            np.testing.assert_allclose(softmax(v[perm]), s[perm], rtol=1e-12, atol=1e-15)

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            softmax([])


class TestInitParams:
    def test_deterministic(self):
        a = init_params((8, 8), seed=3)
        b = init_params((8, 8), seed=3)
        np.testing.assert_array_equal(a, b)

    def test_bound(self):
        t = init_params((512, 512), seed=1)
        bound = 1 / math.sqrt(512)
        assert np.all(t > -bound) and np.all(t < bound)

    def test_mean_within_estimator_sigma(self):
        n = 10**6
        t = init_params((n,), seed=9)
        bound = 1 / math.sqrt(n)
        sigma = (2 * bound) / math.sqrt(12) / math.sqrt(n)
        assert abs(t.mean()) < 3 * sigma

    def test_zero_shape_rejected(self):
        with pytest.raises(ValueError):
            init_params((0, 4), seed=0)


class TestGradCheck:
    def test_square(self):
        f = lambda p: (p["x"] * p["x"]).sum()
        err = grad_check(f, {"x": np.array([3.0])})
        assert err < 1e-10

    def test_constant(self):
        f = lambda p: (p["x"] * 0.0).sum()
        assert grad_check(f, {"x": np.array([1.0, 2.0])}) < 1e-12

    def test_attention_layer(self):
        from structgen.model import single_head_attention

        rng = np.random.default_rng(5)
        x = rng.normal(size=(3, 8))
        r = rng.normal(size=(3, 3, 8))
        arrays = {k: rng.normal(size=(8, 8)) for k in ("Wq", "Wk", "Wv", "Wr", "Wf")}

        def f(p):
            return single_head_attention(Tensor(x), p, r=Tensor(r)).sum()

        assert grad_check(f, arrays) < 1e-4

    def test_composite_ops(self):
        rng = np.random.default_rng(11)
        arrays = {
            "a": rng.normal(size=(4, 5)),
            "b": rng.normal(size=(5, 3)),
            "g": rng.normal(size=3),
            "c": rng.normal(size=3),
        }

        def f(p):
            h = (p["a"] @ p["b"]).tanh()
            h = layer_norm(h, p["g"], p["c"])
            h = t_softmax(h, axis=-1)
            h = concat([h, h * 2], axis=0)
            return (log_softmax(h) + h.exp().log()).sum()

        assert grad_check(f, arrays) < 1e-4

    def test_bad_step_rejected(self):
        with pytest.raises(ValueError):
            grad_check(lambda p: p["x"].sum(), {"x": np.ones(1)}, step=0)


class TestCheckpoint:
    def test_bit_exact_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        params = {"w": rng.normal(size=(7, 3)), "b": rng.normal(size=3)}
        path = str(tmp_path / "ckpt.npz")
        save_checkpoint(path, params, meta={"step": 42})
        loaded, meta = load_checkpoint(path)
        assert set(loaded) == {"w", "b"}
        for k in params:
            np.testing.assert_array_equal(loaded[k], params[k])
            assert loaded[k].dtype == np.float64
        assert int(meta["step"]) == 42

    def test_tensor_values_accepted(self, tmp_path):
        path = str(tmp_path / "ckpt.npz")
        save_checkpoint(path, {"w": Tensor(np.eye(2), requires_grad=True)})
        loaded, _ = load_checkpoint(path)
        np.testing.assert_array_equal(loaded["w"], np.eye(2))
