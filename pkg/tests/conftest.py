import numpy as np
import pytest

from qbmsim import OscillatorNetwork, make_pure_gaussian
from qbmsim.entanglement import TwoModeBlock


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)


def random_network(rng, n_env, omega_lo=0.2, omega_hi=3.0, fill=None):
    """Random coupled network with a guaranteed positive definite potential.

    V is positive definite iff sum(kappa^2 / omega_env^2) < omega_sys^2
    (Schur complement on the system entry), so couplings are drawn and then
    rescaled to land at a random fill factor strictly below 1.
    """
    omegas = np.concatenate(([1.0], rng.uniform(omega_lo, omega_hi, n_env)))
    kappas = rng.uniform(0.1, 1.0, n_env)
    if fill is None:
        fill = rng.uniform(0.1, 0.8)
    scale = np.sqrt(fill / np.sum(kappas ** 2 / omegas[1:] ** 2))
    return OscillatorNetwork(omegas=omegas, kappas=kappas * scale)


def random_pure_system(rng, r_max=1.5):
    return make_pure_gaussian(rng.uniform(0.0, r_max), rng.uniform(0.0, np.pi))


def two_mode_squeezed(r):
    ch, sh = np.cosh(2.0 * r), np.sinh(2.0 * r)
    a = ch * np.eye(2)
    c = sh * np.diag([1.0, -1.0])
    return TwoModeBlock(a=a, b=a.copy(), c=c)


def random_covariance(rng, n_modes, spread=1.0):
    """Valid covariance: identity plus a random PSD part."""
    d = 2 * n_modes
    L = rng.normal(0.0, spread, (d, d))
    return np.eye(d) + L @ L.T / d


def random_two_mode_block(rng, spread=1.0):
    g = random_covariance(rng, 2, spread)
    return TwoModeBlock(a=g[:2, :2], b=g[2:, 2:], c=g[:2, 2:])
