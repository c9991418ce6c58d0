import numpy as np
import pytest

from golsnet import network as net
from golsnet.loss import batch_loss


def fd_gradient(spec, params, x, t, loss="mse", mode="train"):
    """Central finite differences of the batch loss, h = 1e-6 (1 + |p_i|)."""
    g = np.zeros_like(params)
    for i in range(params.size):
        h = 1e-6 * (1.0 + abs(params[i]))
        p1, p2 = params.copy(), params.copy()
        p1[i] += h
        p2[i] -= h
        f1 = batch_loss(loss, net.forward(spec, p1, x, mode)[0], t)[0]
        f2 = batch_loss(loss, net.forward(spec, p2, x, mode)[0], t)[0]
        g[i] = (f1 - f2) / (2 * h)
    return g


def analytic_gradient(spec, params, x, t, loss="mse", mode="train"):
    out, cache = net.forward(spec, params, x, mode)
    _, dout = batch_loss(loss, out, t)
    return net.backward(spec, params, cache, dout)


def one_hot(labels, k):
    t = np.zeros((len(labels), k))
    t[np.arange(len(labels)), labels] = 1.0
    return t


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE = []


def record(n, ok, detail):
    ACCEPTANCE.append((n, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
