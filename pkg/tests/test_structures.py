import numpy as np
import pytest

from qcwb.linalg import op_norm, unitary_exp
from qcwb.structures import (
    CornerQuad,
    LinkingElement,
    SupportViolation,
    corner_ideal_equality,
    homotopy_theta,
    linking_adjoint,
    linking_mul,
    linking_to_dense,
    make_corner_system,
    random_corner_quad,
    rho,
    support_projection,
    theta_is_homomorphism,
)

from conftest import random_matrix


def block_corner_system(rng, n1=3, n2=3, seed_scale=1.0):
    """Orthogonal positive pair supported on complementary coordinate blocks."""
    n = n1 + n2
    a = random_matrix(rng, n1, seed_scale)
    b = random_matrix(rng, n2, seed_scale)
    h = np.zeros((n, n), dtype=complex)
    k = np.zeros((n, n), dtype=complex)
    h[:n1, :n1] = a @ a.conj().T
    k[n1:, n1:] = b @ b.conj().T
    return make_corner_system(h, k)


class TestCornerSystem:
    def test_orthogonality_enforced(self, rng):
        h = np.eye(3, dtype=complex)
        with pytest.raises(SupportViolation):
            make_corner_system(h, h)

    def test_supports_are_projections(self, rng):
        sys = block_corner_system(rng)
        for p in (sys.p_h, sys.p_k):
            assert op_norm(p @ p - p) <= 1e-12
        assert op_norm(sys.p_h @ sys.p_k) <= 1e-12

    def test_support_projection_threshold(self):
        p = support_projection(np.diag([1.0, 1e-14, 0.0]).astype(complex))
        np.testing.assert_allclose(p, np.diag([1.0, 0.0, 0.0]), atol=1e-12)


class TestHomotopyTheta:
    def test_endpoint_zero(self, rng):
        sys = block_corner_system(rng)
        quad = random_corner_quad(sys, rng)
        out = homotopy_theta(quad, 0.0)
        n = sys.dim
        expected = np.zeros((2 * n, 2 * n), dtype=complex)
        expected[:n, :n] = quad.sum()
        np.testing.assert_allclose(out, expected, atol=1e-14)

    def test_endpoint_one(self, rng):
        sys = block_corner_system(rng)
        quad = random_corner_quad(sys, rng)
        out = homotopy_theta(quad, 1.0)
        n = sys.dim
        expected = np.block([[quad.x11, quad.x12], [quad.x21, quad.x22]])
        np.testing.assert_allclose(out, expected, atol=1e-14)

    def test_zero_quad_maps_to_zero(self, rng):
        z = np.zeros((4, 4), dtype=complex)
        quad = CornerQuad(z, z, z, z)
        for s in (0.0, 0.37, 1.0):
            np.testing.assert_array_equal(homotopy_theta(quad, s), np.zeros((8, 8)))

    @pytest.mark.parametrize("s", [0.0, 0.25, 0.37, 0.8, 1.0])
    def test_homomorphism_certificate(self, rng, s):
        sys = block_corner_system(rng)
        mul_res, adj_res = theta_is_homomorphism(sys, s, trials=10, rng=rng)
        assert mul_res <= 1e-10
        assert adj_res <= 1e-12

    def test_isometric_on_corner_elements(self, rng):
        sys = block_corner_system(rng)
        for s in (0.0, 0.42, 1.0):
            quad = random_corner_quad(sys, rng)
            image = homotopy_theta(quad, s)
            assert op_norm(image) >= (1 - 1e-10) * op_norm(quad.sum())

    def test_support_check_raises(self, rng):
        sys = block_corner_system(rng)
        bad = CornerQuad(
            np.eye(sys.dim, dtype=complex),  # not h-corner supported
            np.zeros((sys.dim, sys.dim), dtype=complex),
            np.zeros((sys.dim, sys.dim), dtype=complex),
            np.zeros((sys.dim, sys.dim), dtype=complex),
        )
        with pytest.raises(SupportViolation):
            homotopy_theta(bad, 0.5, sys=sys)

    def test_unitary_stays_unitary_along_path(self, rng):
        # e^{iH} for a corner-supported Hermitian quadruple lands in
        # 1 + corners; theta_s keeps all singular values at 1
        sys = block_corner_system(rng)
        n = sys.dim
        x11 = sys.p_h @ random_matrix(rng, n) @ sys.p_h
        x11 = 0.5 * (x11 + x11.conj().T)
        x22 = sys.p_k @ random_matrix(rng, n) @ sys.p_k
        x22 = 0.5 * (x22 + x22.conj().T)
        x12 = sys.p_h @ random_matrix(rng, n) @ sys.p_k
        hmat = np.block([[x11, x12], [x12.conj().T, x22]])
        u = unitary_exp(hmat / (2 * np.pi))  # e^{i hmat}
        quad = CornerQuad(
            u[:n, :n] - np.eye(n), u[:n, n:], u[n:, :n], u[n:, n:] - np.eye(n)
        )
        for s in (0.0, 0.3, 0.7, 1.0):
            img = np.eye(2 * n, dtype=complex) + homotopy_theta(quad, s)
            sv = np.linalg.svd(img, compute_uv=False)
            assert np.all(np.abs(sv - 1.0) <= 1e-8)


class TestLinking:
    def make_element(self, rng, sys, alpha, beta):
        quad = random_corner_quad(sys, rng)
        return LinkingElement(alpha, beta, quad.x11, quad.x12, quad.x21, quad.x22)

    def test_identity_element(self):
        z = np.zeros((4, 4), dtype=complex)
        e = LinkingElement(1.0, 1.0, z, z, z, z)
        assert rho(e) == (1 + 0j, 1 + 0j)

    def test_rho_multiplicative(self, rng):
        sys = block_corner_system(rng)
        for _ in range(20):
            e = self.make_element(rng, sys, *rng.standard_normal(2))
            f = self.make_element(rng, sys, *rng.standard_normal(2))
            ef = linking_mul(e, f)
            re, rf, ref = rho(e), rho(f), rho(ef)
            assert abs(ref[0] - re[0] * rf[0]) <= 1e-12
            assert abs(ref[1] - re[1] * rf[1]) <= 1e-12

    def test_linking_mul_matches_dense(self, rng):
        sys = block_corner_system(rng)
        e = self.make_element(rng, sys, 0.3 + 0.1j, -1.2)
        f = self.make_element(rng, sys, 1.7, 0.4 - 2j)
        dense = linking_to_dense(e) @ linking_to_dense(f)
        np.testing.assert_allclose(dense, linking_to_dense(linking_mul(e, f)), atol=1e-12)

    def test_adjoint_matches_dense(self, rng):
        sys = block_corner_system(rng)
        e = self.make_element(rng, sys, 0.5 + 1j, 2.0)
        np.testing.assert_allclose(
            linking_to_dense(e).conj().T,
            linking_to_dense(linking_adjoint(e)),
            atol=1e-14,
        )

    def test_rho_validates_supports(self, rng):
        sys = block_corner_system(rng)
        bad = LinkingElement(
            1.0,
            0.0,
            np.eye(sys.dim, dtype=complex),
            *(np.zeros((sys.dim, sys.dim), dtype=complex) for _ in range(3)),
        )
        with pytest.raises(SupportViolation):
            rho(bad, sys=sys)


class TestCornerIdealEquality:
    def test_identity_elements(self):
        n1, n2 = 2, 3
        eye = np.eye(n1 + n2, dtype=complex)
        equal, gap = corner_ideal_equality(eye, eye, (n1, n2), ideal_block=1)
        assert equal and gap <= 1e-12

    def test_h_outside_ideal_gives_zero_on_both_sides(self, rng):
        # h supported only in block 0; the sandwich misses the ideal entirely
        n1, n2 = 2, 3
        n = n1 + n2
        h = np.zeros((n, n), dtype=complex)
        a = random_matrix(rng, n1)
        h[:n1, :n1] = a @ a.conj().T
        b = random_matrix(rng, n2)
        k = np.zeros((n, n), dtype=complex)
        k[n1:, n1:] = b @ b.conj().T
        equal, gap = corner_ideal_equality(h, k, (n1, n2), ideal_block=1)
        assert equal and gap <= 1e-12

    def test_random_positive_pairs(self, rng):
        # equality holds for every positive pair in the block algebra;
        # conditioned spectra keep the subspace computation well-posed
        from conftest import hermitian_with_spectrum

        n1, n2 = 2, 3
        n = n1 + n2
        for _ in range(25):
            def block_pos():
                m = np.zeros((n, n), dtype=complex)
                m[:n1, :n1] = hermitian_with_spectrum(rng, rng.uniform(0.05, 1, n1))
                m[n1:, n1:] = hermitian_with_spectrum(rng, rng.uniform(0.05, 1, n2))
                return m

            equal, gap = corner_ideal_equality(
                block_pos(), block_pos(), (n1, n2), ideal_block=1
            )
            assert equal, f"projector gap {gap:.3e}"
            assert gap <= 1e-10

    def test_wild_wishart_pairs_conditioning_aware(self, rng):
        # raw Wishart blocks can be arbitrarily ill-conditioned; the gap then
        # degrades no faster than the conditioning of the sandwich columns
        n1, n2 = 2, 3
        n = n1 + n2
        for _ in range(40):
            def block_pos():
                m = np.zeros((n, n), dtype=complex)
                a = random_matrix(rng, n1)
                b = random_matrix(rng, n2)
                m[:n1, :n1] = a @ a.conj().T
                m[n1:, n1:] = b @ b.conj().T
                return m

            h = block_pos()
            k = block_pos()
            _, gap = corner_ideal_equality(h, k, (n1, n2), ideal_block=1)
            cond = np.linalg.cond(h[n1:, n1:]) * np.linalg.cond(k[n1:, n1:])
            assert gap <= max(1e-10, 100 * np.finfo(float).eps * cond)
