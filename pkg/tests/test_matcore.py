import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pertkit import matcore
from pertkit.errors import (
    ContourEnclosureError,
    MatrixFormatError,
    NotHermitianError,
    ShapeError,
    SingularMatrixError,
)
from pertkit.ensembles import random_hermitian


class TestOpNorm:
    def test_identity(self):
        assert matcore.op_norm(np.eye(3)) == pytest.approx(1.0)

    def test_diagonal(self):
        assert matcore.op_norm(np.diag([1.0, -2.0])) == pytest.approx(2.0)

    def test_symmetric_offdiagonal(self):
        # oracle: M*M = diag(0.01, 0.01), so both singular values are 0.1
        m = np.array([[0.0, 0.1], [0.1, 0.0]])
        assert matcore.op_norm(m) == pytest.approx(0.1, abs=1e-15)

    def test_rejects_non_square(self):
        with pytest.raises(ShapeError):
            matcore.op_norm(np.ones((2, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(MatrixFormatError):
            matcore.op_norm(np.array([[np.nan, 0], [0, 1.0]]))

    @given(seed=st.integers(0, 10**6))
    def test_unitary_invariance(self, seed):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        u, _ = np.linalg.qr(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
        v, _ = np.linalg.qr(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
        assert matcore.op_norm(u @ m @ v) == pytest.approx(matcore.op_norm(m), abs=1e-10)


class TestInverse:
    def test_identity(self):
        np.testing.assert_allclose(matcore.inverse(np.eye(4)), np.eye(4))

    def test_diagonal(self):
        np.testing.assert_allclose(matcore.inverse(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))

    def test_residual_well_conditioned(self, rng):
        m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)) + 4 * np.eye(8)
        r = matcore.inverse(m)
        assert matcore.op_norm(m @ r - np.eye(8)) <= 1e-11

    def test_singular_raises(self):
        m = np.array([[1.0, 2.0], [0.5, 1.0]])  # rank one
        with pytest.raises(SingularMatrixError):
            matcore.inverse(m)

    @given(seed=st.integers(0, 10**6))
    def test_involution(self, seed):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)) + 3 * np.eye(4)
        cond = np.linalg.cond(m)
        back = matcore.inverse(matcore.inverse(m))
        assert matcore.op_norm(back - m) <= 1e-10 * cond**2 * matcore.op_norm(m)


class TestEigHermitian:
    def test_sorted_diagonal(self):
        dec = matcore.eig_hermitian(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(dec.eigenvalues, [1.0, 2.0, 3.0])

    def test_two_by_two_closed_form(self):
        # oracle: eigenvalues of [[0,1],[1,0]] solve l^2 - 1 = 0
        dec = matcore.eig_hermitian(np.array([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(dec.eigenvalues, [-1.0, 1.0], atol=1e-14)

    def test_reconstruction_and_orthonormality(self, rng):
        m = random_hermitian(16, 1.0, 5)
        dec = matcore.eig_hermitian(m)
        v = dec.eigenvectors
        assert matcore.op_norm(v.conj().T @ v - np.eye(16)) <= 1e-12
        assert matcore.op_norm(dec.reconstruct() - m) <= 1e-10 * matcore.op_norm(m)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            matcore.eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestExpm:
    def test_zero(self):
        np.testing.assert_allclose(matcore.expm(np.zeros((3, 3))), np.eye(3))

    def test_diagonal(self):
        out = matcore.expm(np.diag([0.3, -1.2]))
        np.testing.assert_allclose(out, np.diag(np.exp([0.3, -1.2])), rtol=1e-12)

    def test_skew_hermitian_gives_unitary(self, rng):
        h = random_hermitian(6, 2.0, 9)
        u = matcore.expm(1j * h)
        assert matcore.op_norm(u.conj().T @ u - np.eye(6)) <= 1e-10

    def test_exp_inverse_pair(self, rng):
        m = random_hermitian(5, 1.0, 3) + 1j * random_hermitian(5, 1.0, 4)
        m *= 5.0 / matcore.op_norm(m)
        prod = matcore.expm(m) @ matcore.expm(-m)
        assert matcore.op_norm(prod - np.eye(5)) <= 1e-9


class TestContour:
    def test_simple_pole_residue(self):
        c = matcore.ContourSpec(center=0.0, radius=1.0)
        val = matcore.contour_integrate(lambda z: 1.0 / (z - 0.3), c)
        assert abs(val - 1.0) <= 1e-12

    def test_no_pole(self):
        c = matcore.ContourSpec(center=0.5 + 0.5j, radius=2.0)
        assert abs(matcore.contour_integrate(lambda z: 1.0 + 0j, c)) <= 1e-14

    def test_double_pole_residue(self):
        # oracle: residue of z/(z-l)^2 at l is d/dz z = 1
        lam = 0.7 - 0.2j
        c = matcore.ContourSpec(center=lam, radius=0.5)
        val = matcore.contour_integrate(lambda z: z / (z - lam) ** 2, c)
        assert abs(val - 1.0) <= 1e-10

    def test_matrix_valued(self):
        m = np.diag([0.2, 0.4]).astype(complex)
        c = matcore.ContourSpec(center=0.2, radius=0.1)
        proj = matcore.contour_integrate(lambda z: np.linalg.inv(z * np.eye(2) - m), c)
        np.testing.assert_allclose(proj, np.diag([1.0, 0.0]), atol=1e-12)

    def test_digit_doubling_until_floor(self):
        exact = 1.0
        errs = []
        for n in (16, 32, 64):
            c = matcore.ContourSpec(center=0.0, radius=1.0, num_points=n)
            errs.append(abs(matcore.contour_integrate(lambda z: 1.0 / (z - 0.3), c) - exact))
        for coarse, fine in zip(errs, errs[1:]):
            assert fine <= max(coarse**1.8, 1e-13)

    def test_refinement_estimate(self):
        c = matcore.ContourSpec(center=0.0, radius=1.0, num_points=16)
        val, err = matcore.contour_integrate_refined(lambda z: 1.0 / (z - 0.3), c)
        assert abs(val - 1.0) <= err + 1e-12

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            matcore.ContourSpec(center=0.0, radius=-1.0)
        with pytest.raises(ValueError):
            matcore.ContourSpec(center=0.0, radius=1.0, num_points=8)

    def test_enclosure_guard(self):
        c = matcore.ContourSpec(center=0.0, radius=1.5)
        with pytest.raises(ContourEnclosureError):
            matcore.require_single_enclosure([0.0, 1.0], c, 0.0)
