import numpy as np
import numpy.testing as npt
import pytest

from qbmsim import (
    ENTANGLED,
    INCONCLUSIVE,
    SEPARABLE,
    OscillatorNetwork,
    TwoModeBlock,
    build_potential_matrix,
    gibbs_covariance,
    lambda_of_block,
    normal_modes,
    partial_transpose,
    ppt_verdict,
    reduce_two_mode,
    symplectic_spectrum,
)

from conftest import (
    random_covariance,
    random_network,
    random_two_mode_block,
    two_mode_squeezed,
)


def pt_of_block(block):
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    return flip @ block.assembled @ flip


def test_partial_transpose_identity_fixed():
    npt.assert_array_equal(partial_transpose(np.eye(6)), np.eye(6))


def test_partial_transpose_two_mode_squeezed_sign_flip():
    block = two_mode_squeezed(0.7)
    pt = partial_transpose(block.assembled)
    npt.assert_allclose(pt[:2, 2:], np.sinh(1.4) * np.eye(2), atol=1e-15)


def test_partial_transpose_involution(rng):
    gamma = random_covariance(rng, 4)
    npt.assert_array_equal(partial_transpose(partial_transpose(gamma)), gamma)


def test_partial_transpose_rejects_bad_index_sets():
    gamma = np.eye(6)
    with pytest.raises(ValueError):
        partial_transpose(gamma, system_modes=())
    with pytest.raises(ValueError):
        partial_transpose(gamma, system_modes=(0, 1, 2))
    with pytest.raises(ValueError):
        partial_transpose(gamma, system_modes=(5,))


def test_ppt_identity_separable():
    verdict = ppt_verdict(np.eye(8))
    assert verdict.status == SEPARABLE
    assert verdict.min_pt_symplectic >= 1.0 - 1e-12
    assert verdict.log_negativity == 0.0


def test_ppt_product_state_separable(rng):
    for _ in range(10):
        gamma_s = random_covariance(rng, 1)
        gamma_e = random_covariance(rng, 3)
        gamma = np.zeros((8, 8))
        gamma[:2, :2] = gamma_s
        gamma[2:, 2:] = gamma_e
        verdict = ppt_verdict(gamma)
        assert verdict.status == SEPARABLE
        assert verdict.log_negativity == 0.0


def test_ppt_product_plus_psd_separable(rng):
    # sufficiency mechanism: adding a PSD part to a product covariance
    # cannot create entanglement
    for _ in range(20):
        gamma = np.zeros((6, 6))
        gamma[:2, :2] = random_covariance(rng, 1)
        gamma[2:, 2:] = random_covariance(rng, 2)
        L = rng.normal(0.0, 0.6, (6, 6))
        verdict = ppt_verdict(gamma + L @ L.T / 6)
        assert verdict.status == SEPARABLE


def test_ppt_two_mode_squeezed_entangled():
    r = 0.5
    verdict = ppt_verdict(two_mode_squeezed(r).assembled)
    assert verdict.status == ENTANGLED
    npt.assert_allclose(verdict.min_pt_symplectic, np.exp(-2.0 * r), rtol=1e-12)
    npt.assert_allclose(verdict.log_negativity, 2.0 * r, rtol=1e-10)


def test_ppt_rejects_many_vs_many():
    with pytest.raises(ValueError):
        ppt_verdict(np.eye(8), system_modes=(0, 1))


def test_ppt_inconclusive_band():
    # min PT of 1 - 2e-9 sits inside the (1 - 3 tol, 1 - tol) no-call band
    r = 1e-9
    verdict = ppt_verdict(two_mode_squeezed(r).assembled, tol=1e-9)
    assert verdict.status == INCONCLUSIVE


def test_ppt_verdict_tolerance_scales():
    r = 0.001
    strict = ppt_verdict(two_mode_squeezed(r).assembled, tol=1e-9)
    loose = ppt_verdict(two_mode_squeezed(r).assembled, tol=1e-2)
    assert strict.status == ENTANGLED
    assert loose.status == SEPARABLE


def test_reduce_two_mode_product_structure(rng):
    net = random_network(rng, 3)
    modes = normal_modes(build_potential_matrix(net))
    beta = 0.8
    gamma = np.zeros((8, 8))
    gamma[:2, :2] = np.eye(2)
    bath_net = OscillatorNetwork(omegas=net.omegas[1:], kappas=np.zeros(2))
    bath_modes = normal_modes(build_potential_matrix(bath_net))
    gamma[2:, 2:] = gibbs_covariance(bath_modes, beta)
    block = reduce_two_mode(gamma, 2)
    npt.assert_allclose(np.linalg.det(block.a), 1.0, atol=1e-14)
    assert np.linalg.det(block.b) > 1.0
    npt.assert_array_equal(block.c, np.zeros((2, 2)))
    # modes come back in interleaved order
    npt.assert_array_equal(block.b, gamma[4:6, 4:6])


def test_reduce_two_mode_rejects_out_of_range():
    gamma = np.eye(6)
    for bad in (0, 3, -1):
        with pytest.raises(ValueError):
            reduce_two_mode(gamma, bad)


def test_lambda_two_mode_vacuum():
    block = TwoModeBlock(a=np.eye(2), b=np.eye(2), c=np.zeros((2, 2)))
    npt.assert_allclose(lambda_of_block(block), 1.0, atol=1e-14)


def test_lambda_pure_thermal_product_is_one():
    f = 3.7
    block = TwoModeBlock(a=np.diag([2.0, 0.5]),
                         b=np.diag([f / 1.3, f * 1.3]),
                         c=np.zeros((2, 2)))
    npt.assert_allclose(lambda_of_block(block), 1.0, atol=1e-12)


def test_lambda_two_mode_squeezed_closed_form():
    for r in (0.1, 0.5, 1.0, 2.0):
        lam = lambda_of_block(two_mode_squeezed(r))
        npt.assert_allclose(lam, np.exp(-4.0 * r), atol=1e-10)


def test_lambda_matches_pt_spectrum(rng):
    # lambda must equal the squared minimum PT symplectic eigenvalue
    worst = 0.0
    for _ in range(1000):
        block = random_two_mode_block(rng, spread=rng.uniform(0.2, 1.5))
        lam = lambda_of_block(block)
        nu = symplectic_spectrum(pt_of_block(block)).min()
        worst = max(worst, abs(lam - nu ** 2))
    assert worst <= 1e-10


def test_lambda_entangled_iff_full_pt(rng):
    # two-mode case: lambda < 1 exactly when the PT verdict says entangled
    for r in (0.05, 0.3, 1.2):
        block = two_mode_squeezed(r)
        assert lambda_of_block(block) < 1.0
        assert ppt_verdict(block.assembled).status == ENTANGLED


def test_log_negativity_positive_for_squeezed():
    for r in (0.01, 0.1, 1.0):
        verdict = ppt_verdict(two_mode_squeezed(r).assembled)
        assert verdict.log_negativity > 0.0
