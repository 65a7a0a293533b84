"""Tensor algebra: bulk potential, variation, uniaxial construction, retraction."""

import numpy as np
import pytest

from qslab.qspace import (
    BulkParams,
    DEFAULT_PARAMS,
    bulk_energy,
    bulk_gradient,
    eig_max,
    eigvals,
    from_matrix,
    norm_sq,
    qdot,
    to_matrix,
    uniaxial,
    uniaxial_retract,
)

RNG = np.random.default_rng(1234)


def random_q(n):
    return RNG.normal(size=(5, n))


def test_default_params_bistable():
    p = DEFAULT_PARAMS
    assert p.a == 3 and p.b == 9 and p.c == 1
    assert abs(p.bistable_defect) == 0
    assert abs(p.s_plus - 3.0) < 1e-12
    # both s_plus formulas agree at the bistable point
    assert abs(p.s_plus - np.sqrt(3 * p.a / p.c)) < 1e-12
    assert abs(p.c0**2 - 75.0) < 1e-12


def test_bad_params_rejected():
    with pytest.raises(ValueError):
        BulkParams(-1.0, 9.0, 1.0)
    with pytest.raises(ValueError):
        BulkParams(3.0, 1.0, 1.0)  # b^2 < 24ac


def test_matrix_roundtrip_symmetric_traceless():
    q = random_q(64)
    m = to_matrix(q)
    assert np.allclose(m, np.swapaxes(m, 0, 1))
    assert np.max(np.abs(m[0, 0] + m[1, 1] + m[2, 2])) < 1e-14
    assert np.allclose(from_matrix(np.moveaxis(m, (0, 1), (-2, -1))), q)


def test_norm_matches_reconstruction():
    q = random_q(32)
    m = to_matrix(q)
    frob = np.sum(m * m, axis=(0, 1))
    assert np.allclose(norm_sq(q), frob, rtol=1e-13)


def test_bulk_energy_examples():
    # zero tensor
    assert bulk_energy(np.zeros(5)) == 0.0
    # on the nematic manifold
    assert abs(bulk_energy(uniaxial(3.0, [0, 0, 1]))) < 1e-14
    # f(1) = 4/9 for unit scalar order
    assert abs(bulk_energy(uniaxial(1.0, [0, 0, 1])) - 4.0 / 9.0) < 1e-14


def test_bulk_energy_nonnegative_random():
    q = random_q(10_000) * RNG.uniform(0.1, 4.0, size=10_000)
    e = bulk_energy(q)
    assert np.all(e >= -1e-13)


def test_bulk_energy_zero_iff_manifold():
    # equality cases: Q = 0 and exact uniaxial with s = s_plus
    u = RNG.normal(size=3)
    u /= np.linalg.norm(u)
    assert abs(bulk_energy(uniaxial(3.0, u))) < 1e-13
    # strictly positive elsewhere on a random sample
    q = random_q(10_000)
    e = bulk_energy(q)
    small = e < 1e-10
    for qq in q[:, small].T:
        s, _, exact = uniaxial_retract(qq)
        assert (exact and abs(s - 3.0) < 1e-3) or norm_sq(qq) < 1e-10


def test_bulk_gradient_traceless_symmetric():
    q = random_q(128)
    m = to_matrix(bulk_gradient(q))
    assert np.allclose(m, np.swapaxes(m, 0, 1))
    assert np.max(np.abs(m[0, 0] + m[1, 1] + m[2, 2])) < 1e-12


def test_bulk_gradient_examples():
    assert np.allclose(bulk_gradient(np.zeros(5)), 0.0)
    # uniaxial reduction: coefficient a s - (b/3) s^2 + (2c/3) s^3 at s = 1 is 2/3
    got = bulk_gradient(uniaxial(1.0, [0, 0, 1]))
    assert np.allclose(got, (2.0 / 3.0) * uniaxial(1.0, [0, 0, 1]), atol=1e-14)


def test_bulk_gradient_matches_finite_difference():
    # oracle: central finite differences of bulk_energy along random directions
    step = 1e-5
    for _ in range(10):
        q = RNG.normal(size=5)
        d = RNG.normal(size=5)
        d /= np.sqrt(norm_sq(d))
        fd = (bulk_energy(q + step * d) - bulk_energy(q - step * d)) / (2 * step)
        exact = qdot(bulk_gradient(q), d)
        assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))


@pytest.mark.parametrize("s", [0.5, 1.0, 1.5, 2.0, 3.0])
def test_uniaxial_gradient_consistency(s):
    # DF(uniaxial(s,u)) = (a s - b s^2/3 + 2c s^3/3)(u x u - I/3)
    p = DEFAULT_PARAMS
    u = np.array([1.0, 2.0, -1.0]) / np.sqrt(6.0)
    coef = p.a * s - p.b * s**2 / 3.0 + 2.0 * p.c * s**3 / 3.0
    got = bulk_gradient(uniaxial(s, u), p)
    want = coef * uniaxial(1.0, u)
    assert np.max(np.abs(got - want)) < 1e-12


def test_uniaxial_examples():
    assert np.allclose(uniaxial(0.0, [0, 0, 1]), 0.0)
    m = to_matrix(uniaxial(3.0, [0, 0, 1]))
    assert np.allclose(m, np.diag([-1.0, -1.0, 2.0]))
    assert abs(np.sqrt(norm_sq(uniaxial(2.0, [1, 0, 0]))) - 2 * np.sqrt(2.0 / 3.0)) < 1e-14


def test_uniaxial_norm_identity_random():
    for _ in range(50):
        u = RNG.normal(size=3)
        u /= np.linalg.norm(u)
        s = RNG.uniform(-2, 4)
        assert abs(norm_sq(uniaxial(s, u)) - (2.0 / 3.0) * s * s) < 1e-12


def test_uniaxial_rejects_non_unit_director():
    with pytest.raises(ValueError):
        uniaxial(1.0, [1.0, 1.0, 0.0])


def test_eigvals_against_lapack():
    # oracle: numpy's symmetric eigensolver on the reconstructed matrices
    q = random_q(500)
    ours = eigvals(q)
    for k in range(500):
        ref = np.linalg.eigvalsh(to_matrix(q[:, k]))[::-1]
        assert np.max(np.abs(ours[:, k] - ref)) < 1e-10 * max(1.0, np.abs(ref).max())
    assert np.allclose(eig_max(q), ours[0])


def test_retract_roundtrip():
    s, u, exact = uniaxial_retract(uniaxial(2.0, [1, 0, 0]))
    assert exact and abs(s - 2.0) < 1e-12
    assert abs(abs(u[0]) - 1.0) < 1e-12


def test_retract_degenerate_convention():
    s, u, exact = uniaxial_retract(np.zeros(5))
    assert s == 0.0 and exact
    assert np.allclose(u, [0, 0, 1])


def test_retract_biaxial_example():
    # diag(0.5, 0.1, -0.6): lambda_max = 0.5 -> s = 0.75, director e1, not exact
    q = from_matrix(np.diag([0.5, 0.1, -0.6]))
    s, u, exact = uniaxial_retract(q)
    assert abs(s - 0.75) < 1e-12
    assert abs(abs(u[0]) - 1.0) < 1e-12
    assert not exact


def test_retract_clamps_above_s_plus():
    s, _, exact = uniaxial_retract(uniaxial(5.0, [0, 1, 0]))
    assert s == 3.0 and exact


def test_retract_sign_deterministic():
    # the same eigenspace must always yield the same sign-normalized director
    q = uniaxial(1.7, [0, -1, 0])
    s1, u1, _ = uniaxial_retract(q)
    s2, u2, _ = uniaxial_retract(q.copy())
    assert np.array_equal(u1, u2)
    first = u1[np.argmax(np.abs(u1) > 1e-9)]
    assert first > 0
