import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from golsnet import data as dat
from golsnet import network as net
from golsnet.errors import DataError
from golsnet.loss import batch_loss


@pytest.mark.parametrize("name,m,d,k", [("iris", 150, 4, 3), ("glass", 214, 9, 6), ("wine", 178, 13, 3),
                                        ("diabetes", 532, 7, 2), ("cancer", 699, 9, 2)])
def test_bundled_shapes(name, m, d, k):
    ds = dat.load_bundled(name)
    assert ds.inputs.shape == (m, d) and ds.targets.shape == (m, k)
    assert np.all(ds.targets.sum(axis=1) == 1)
    assert set(np.unique(ds.targets)) == {0.0, 1.0}


def test_toy_one_hot(tmp_path):
    p = tmp_path / "toy.csv"
    p.write_text("x,label\n1.0,a\n2.0,b\n3.0,a\n")
    ds = dat.load_csv(p, 1, 2)
    assert ds.targets.tolist() == [[1, 0], [0, 1], [1, 0]]
    assert ds.classes == ("a", "b")


def test_no_header(tmp_path):
    p = tmp_path / "toy.csv"
    p.write_text("1.0,2.0,x\n3.0,4.0,y\n")
    assert len(dat.load_csv(p, 2, 2)) == 2


def test_malformed_row_reports_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,label\n1.0,a\noops,b\n")
    with pytest.raises(DataError, match="line 3"):
        dat.load_csv(p, 1, 2)
    p.write_text("1.0,a\n1.0,2.0,b\n")
    with pytest.raises(DataError, match="line 2"):
        dat.load_csv(p, 1, 2)


def test_class_count_mismatch(tmp_path):
    p = tmp_path / "toy.csv"
    p.write_text("1.0,a\n2.0,b\n")
    with pytest.raises(DataError, match="classes"):
        dat.load_csv(p, 1, 3)


def test_zscore_examples():
    t = dat.zscore_fit([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
    out = dat.zscore_apply(t, [[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
    np.testing.assert_allclose(out[:, 0], [-1.2247, 0, 1.2247], atol=1e-4)
    assert np.all(out[:, 1] == 0)
    assert t.stds[1] == 1.0


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 40), st.integers(1, 5), st.integers(0, 2**31))
def test_zscore_self_fit(m, d, seed):
    x = np.random.default_rng(seed).normal(3, 7, size=(m, d))
    z = dat.zscore_apply(dat.zscore_fit(x), x)
    np.testing.assert_allclose(z.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(z.var(axis=0), 1, atol=1e-9)


def test_zscore_affine(rng):
    x = rng.normal(size=(20, 3))
    t = dat.zscore_fit(x)
    a, b = 2.5, -1.0
    np.testing.assert_allclose(dat.zscore_apply(t, a * x + b) - dat.zscore_apply(t, b + 0 * x),
                               a * x / t.stds, atol=1e-12)


def test_split_sizes():
    assert dat.split_sizes(150) == (75, 38, 37)
    assert dat.split_sizes(4) == (2, 1, 1)
    with pytest.raises(DataError):
        dat.split_2_1_1(dat.Dataset(np.zeros((3, 1)), np.ones((3, 1))), 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 300), st.integers(0, 1000))
def test_split_partition(m, seed):
    d = dat.Dataset(np.arange(m, dtype=float)[:, None], np.ones((m, 1)))
    s = dat.split_2_1_1(d, seed)
    idx = np.concatenate(s.indices)
    assert sorted(idx.tolist()) == list(range(m))
    assert (len(s.train), len(s.validation), len(s.test)) == dat.split_sizes(m)
    assert abs(len(s.train) - m / 2) <= 1 and abs(len(s.validation) - m / 4) <= 1


def test_split_deterministic():
    d = dat.load_bundled("iris")
    a, b = dat.split_2_1_1(d, 5), dat.split_2_1_1(d, 5)
    assert all(np.array_equal(x, y) for x, y in zip(a.indices, b.indices))


def test_standardize_uses_train_stats():
    split = dat.prepare("iris")
    np.testing.assert_allclose(split.train.inputs.mean(axis=0), 0, atol=1e-12)
    assert np.abs(split.test.inputs.mean(axis=0)).max() > 1e-6


def test_sample_dynamic_basics():
    d = dat.Dataset(np.arange(10.0)[:, None], np.ones((10, 1)))
    full = dat.sample_dynamic(d, 50, np.random.default_rng(0))
    assert len(full) == 10
    b = dat.sample_dynamic(d, 6, np.random.default_rng(0))
    assert len(set(b.indices.tolist())) == 6
    b2 = dat.sample_dynamic(d, 6, np.random.default_rng(0))
    assert np.array_equal(b.indices, b2.indices)
    np.testing.assert_array_equal(b.inputs[:, 0], b.indices)
    with pytest.raises(ValueError):
        dat.sample_dynamic(d, 0, np.random.default_rng(0))


def test_sample_dynamic_coupon_collector():
    m = 50
    d = dat.Dataset(np.zeros((m, 1)), np.ones((m, 1)))
    rng = np.random.default_rng(3)
    n = int(m * math.log(m) * 10)
    seen = {int(dat.sample_dynamic(d, 1, rng).indices[0]) for _ in range(n)}
    assert seen == set(range(m))


def test_sample_dynamic_uniform():
    d = dat.Dataset(np.zeros((10, 1)), np.ones((10, 1)))
    rng = np.random.default_rng(11)
    counts = np.bincount([dat.sample_dynamic(d, 1, rng).indices[0] for _ in range(100_000)], minlength=10)
    sigma = math.sqrt(100_000 * 0.1 * 0.9)
    assert np.all(np.abs(counts - 10_000) <= 5 * sigma)


def test_full_batch_stable():
    d = dat.prepare("iris").train
    a, b = dat.full_batch(d), dat.full_batch(d)
    assert len(a) == len(d) == 75
    assert np.array_equal(a.inputs, b.inputs) and np.array_equal(a.indices, np.arange(75))


@pytest.mark.parametrize("kind", ["mse", "crossentropy"])
def test_expectation_identity(kind):
    d = dat.prepare("iris").train
    spec = net.mlp(4, [5], 3, "tanh")
    p = net.init_params(spec, 0)
    out, cache = net.forward(spec, p, d.inputs)
    full, dout = batch_loss(kind, out, d.targets)
    g_full = net.backward(spec, p, cache, dout)
    singles, grads = [], []
    for i in range(len(d)):
        o, c = net.forward(spec, p, d.inputs[i:i + 1])
        v, dv = batch_loss(kind, o, d.targets[i:i + 1])
        singles.append(v)
        grads.append(net.backward(spec, p, c, dv))
    assert np.mean(singles) == pytest.approx(full, rel=1e-10)
    np.testing.assert_allclose(np.mean(grads, axis=0), g_full, rtol=1e-9, atol=1e-13)
