import numpy as np
import pytest

from risbeam.channel import ChannelSet


def random_channels(rng, M, N, scale=1.0):
    def cn(*shape):
        return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    return ChannelSet(H_br=cn(N, M), h_bu=cn(M), h_ru=cn(N), g_rt=cn(N))


def random_xi(rng, N):
    return np.exp(1j * rng.uniform(0, 2 * np.pi, N))


def random_w(rng, M, P=1.0):
    w = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    return w * np.sqrt(P) / np.linalg.norm(w)


def echo_reference(channels, rho, w, xi, noise=None):
    """Term-by-term evaluation of the five-path echo with explicit matrices."""
    H = channels.H_br
    G_t = np.diag(channels.g_rt.conj()) @ H
    G_u = np.diag(channels.h_ru.conj()) @ H
    xs = xi.conj()[:, None]  # xi^*
    xt = xi[None, :]  # xi^T
    h = channels.h_bu[:, None]
    hH = channels.h_bu.conj()[None, :]
    A = (
        rho[0] * G_t.conj().T @ xs @ xt @ G_t
        + rho[1] * G_u.conj().T @ xs @ xt @ G_u
        + rho[2] * h @ xt @ G_u
        + rho[3] * h @ hH
        + rho[4] * G_u.conj().T @ xs @ hH
    )
    y = A @ w
    if noise is not None:
        y = y + noise
    return y


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# filled by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
