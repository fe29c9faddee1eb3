"""
FRACNEHARI - Assembly Tests
Stiffness operator against brute-force quadrature, plus structural checks.
"""

import numpy as np
import pytest
from scipy.integrate import quad

from apps.assembly.entities import DiscreteFunction, KernelProfile, Mesh, ProblemParams
from apps.assembly.services import AssemblyService
from apps.core.exceptions import DimensionError, InputError, MeshError, ParamError


def _integrate(func, breaks):
    """Sum of adaptive quad over the pieces between sorted unique breakpoints."""
    edges = np.unique(np.asarray(breaks, dtype=float))
    return sum(
        quad(func, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-11)[0]
        for lo, hi in zip(edges[:-1], edges[1:])
    )


def _brute_force_entry(nodes, i, j, s):
    """A_ij for hats i, j (interior indices) by nested adaptive quadrature."""
    full = np.zeros(nodes.size)

    def hat(k):
        values = full.copy()
        values[k + 1] = 1.0
        return lambda x: np.interp(x, nodes, values)

    phi_i, phi_j = hat(i), hat(j)
    a, b = nodes[0], nodes[-1]

    def inner(x):
        def integrand(y):
            return (phi_i(x) - phi_i(y)) * (phi_j(x) - phi_j(y)) * abs(x - y) ** (-1.0 - 2.0 * s)
        return _integrate(integrand, np.concatenate((nodes, [x])))

    interaction = _integrate(inner, nodes)

    def tail(x):
        kappa = ((x - a) ** (-2.0 * s) + (b - x) ** (-2.0 * s)) / (2.0 * s)
        return 2.0 * phi_i(x) * phi_j(x) * kappa

    return interaction + _integrate(tail, nodes)


@pytest.fixture
def params():
    """Subcritical fractional problem on (-1, 1)."""
    return ProblemParams(s=0.3, q=0.5, p=1.8)


@pytest.fixture
def mesh():
    return Mesh.uniform(-1.0, 1.0, 16)


@pytest.fixture
def operator(mesh, params):
    return AssemblyService.assemble_stiffness(mesh, params)


class TestStiffnessStructure:
    """Structural properties of the assembled operator."""

    def test_symmetric(self, operator):
        """Test the matrix is symmetric to round-off."""
        A = operator.matrix
        assert np.max(np.abs(A - A.T)) <= 1e-12 * np.max(np.abs(A))

    def test_positive_definite(self, operator):
        """Test the smallest eigenvalue is positive."""
        assert np.linalg.eigvalsh(operator.matrix).min() > 0.0

    def test_tail_contributes(self, operator):
        """Test dropping the tail strictly lowers u^T A u."""
        rng = np.random.default_rng(3)
        for _ in range(5):
            u = rng.standard_normal(operator.n)
            assert u @ operator.interaction @ u < u @ operator.matrix @ u

    def test_tail_weights_positive(self, operator, mesh):
        """Test kappa is positive and largest next to the boundary."""
        kappa = operator.tail_weights
        assert kappa.shape == (mesh.n_interior,)
        assert np.all(kappa > 0.0)
        assert kappa[0] > kappa[mesh.n_interior // 2]

    def test_mass_matrix_integrates_constant(self, mesh):
        """Test 1^T M 1 equals the measure covered by interior hats."""
        M = AssemblyService.mass_matrix(mesh)
        ones = np.ones(mesh.n_interior)
        # interior hats sum to one except on the two boundary elements
        expected = (mesh.b - mesh.a) - 2.0 * mesh.widths[0] + 2.0 * mesh.widths[0] / 3.0
        assert ones @ M @ ones == pytest.approx(expected, rel=1e-12)

    def test_graded_mesh_assembles(self, params):
        """Test unequal element sizes give a symmetric positive definite operator."""
        graded = Mesh.graded(-1.0, 1.0, 20, center=0.0, ratio=6.0)
        A = AssemblyService.assemble_stiffness(graded, params)
        assert np.max(np.abs(A.matrix - A.matrix.T)) <= 1e-12 * np.max(np.abs(A.matrix))
        assert np.linalg.eigvalsh(A.matrix).min() > 0.0

    def test_rejects_mesh_of_other_domain(self, params):
        """Test a mesh not covering (a, b) is refused."""
        with pytest.raises(MeshError):
            AssemblyService.assemble_stiffness(Mesh.uniform(0.0, 1.0, 8), params)


@pytest.mark.slow
class TestStiffnessOracle:
    """Agreement with brute-force adaptive quadrature on small meshes."""

    def test_single_hat(self):
        """Test the one-unknown mesh of (-1, 1)."""
        params = ProblemParams(s=0.3, q=0.5, p=1.8)
        mesh = Mesh.uniform(-1.0, 1.0, 2)
        A = AssemblyService.assemble_stiffness(mesh, params)
        expected = _brute_force_entry(mesh.nodes, 0, 0, params.s)
        assert A.matrix[0, 0] == pytest.approx(expected, rel=1e-6)

    def test_four_elements(self):
        """Test diagonal, neighbour and separated entries on four elements."""
        params = ProblemParams(s=0.25, q=0.5, p=1.5)
        mesh = Mesh.uniform(-1.0, 1.0, 4)
        A = AssemblyService.assemble_stiffness(mesh, params)
        scale = np.max(np.abs(A.matrix))
        for i, j in ((0, 0), (1, 1), (0, 1), (0, 2)):
            expected = _brute_force_entry(mesh.nodes, i, j, params.s)
            assert abs(A.matrix[i, j] - expected) <= 1e-6 * scale


class TestCustomKernel:
    """Tabulated kernel profiles."""

    def test_constant_profile_matches_fractional(self, mesh, params):
        """Test rho = 1 reproduces the power-kernel matrix."""
        custom = params.replace(kernel='custom', profile=KernelProfile([0.25, 1.0], [1.0, 1.0]))
        A_frac = AssemblyService.assemble_stiffness(mesh, params)
        A_custom = AssemblyService.assemble_stiffness(mesh, custom)
        assert np.max(np.abs(A_custom.matrix - A_frac.matrix)) <= 1e-8 * np.max(np.abs(A_frac.matrix))

    def test_larger_profile_gives_larger_form(self, mesh, params):
        """Test K2 >= K1 pointwise implies u^T A2 u >= u^T A1 u."""
        custom = params.replace(kernel='custom', profile=KernelProfile([0.1, 0.5, 2.0], [1.0, 1.5, 2.0]))
        A_frac = AssemblyService.assemble_stiffness(mesh, params)
        A_custom = AssemblyService.assemble_stiffness(mesh, custom)
        u = np.ones(mesh.n_interior)
        assert u @ A_custom.matrix @ u > u @ A_frac.matrix @ u

    def test_far_order_sensitivity_with_kinks(self, mesh, params):
        """Test doubling the separated-pair order barely moves a kinked-profile matrix."""
        custom = params.replace(kernel='custom', profile=KernelProfile([0.1, 0.5, 2.0], [1.0, 1.5, 2.0]))
        coarse = AssemblyService.assemble_stiffness(mesh, custom, far_order=10)
        fine = AssemblyService.assemble_stiffness(mesh, custom, far_order=20)
        assert np.max(np.abs(fine.matrix - coarse.matrix)) <= 1e-3 * np.max(np.abs(fine.matrix))

    def test_profile_below_theta_rejected(self, params):
        """Test the lower bound K(r) >= theta r^-(N+2s) is enforced."""
        with pytest.raises(ParamError):
            params.replace(kernel='custom', theta=1.0, profile=KernelProfile([0.5, 1.0], [1.0, 0.5]))

    def test_custom_without_profile_rejected(self, params):
        """Test the custom kernel needs a table."""
        with pytest.raises(ParamError):
            params.replace(kernel='custom')


class TestNorms:
    """Gagliardo and Lebesgue norms."""

    def test_homogeneity_and_triangle(self, operator, mesh):
        """Test ||cu|| = |c| ||u|| and ||u+v|| <= ||u|| + ||v||."""
        rng = np.random.default_rng(11)
        u = DiscreteFunction(rng.standard_normal(mesh.n_interior), mesh)
        v = DiscreteFunction(rng.standard_normal(mesh.n_interior), mesh)
        norm = AssemblyService.gagliardo_norm
        assert norm(operator, -2.5 * u) == pytest.approx(2.5 * norm(operator, u), rel=1e-12)
        assert norm(operator, u + v) <= norm(operator, u) + norm(operator, v) + 1e-12

    def test_zero_function_norms(self, operator, mesh):
        """Test the zero function is accepted and has zero norms."""
        zero = DiscreteFunction.zeros(mesh)
        assert AssemblyService.gagliardo_norm(operator, zero) == 0.0
        assert AssemblyService.lp_norm(zero, 2.0) == 0.0

    def test_lp_power_of_interpolated_polynomial(self):
        """Test int |u|^2 is exact for a P1 function (Gauss order 8)."""
        mesh = Mesh.uniform(-1.0, 1.0, 2)
        u = DiscreteFunction(np.array([1.0]), mesh)
        # hat of height one on (-1, 1): int = 2/3
        assert AssemblyService.lp_power(u, 2.0) == pytest.approx(2.0 / 3.0, rel=1e-14)

    def test_l2_norm_matches_mass_matrix(self, mesh):
        """Test |u|_2^2 = u^T M u."""
        u = DiscreteFunction.interpolate(mesh, lambda x: np.cos(np.pi * x / 2.0))
        M = AssemblyService.mass_matrix(mesh)
        assert AssemblyService.lp_norm(u, 2.0) ** 2 == pytest.approx(u.coefficients @ M @ u.coefficients, rel=1e-12)

    def test_lp_exponent_below_one_rejected(self, mesh):
        """Test r < 1 raises InputError."""
        with pytest.raises(InputError):
            AssemblyService.lp_norm(DiscreteFunction.zeros(mesh), 0.5)

    def test_sobolev_quotient_zero_rejected(self, operator, mesh):
        """Test the quotient of the zero function raises InputError."""
        with pytest.raises(InputError):
            AssemblyService.sobolev_quotient(operator, DiscreteFunction.zeros(mesh))

    def test_sobolev_quotient_scale_invariant(self, operator, mesh):
        """Test Q(cu) = Q(u)."""
        u = DiscreteFunction.interpolate(mesh, lambda x: 1.0 - x ** 2)
        q1 = AssemblyService.sobolev_quotient(operator, u)
        q2 = AssemblyService.sobolev_quotient(operator, 7.0 * u)
        assert q1 == pytest.approx(q2, rel=1e-12)

    def test_dimension_mismatch(self, operator):
        """Test a vector of the wrong length raises DimensionError."""
        other = DiscreteFunction.zeros(Mesh.uniform(-1.0, 1.0, 8))
        with pytest.raises(DimensionError):
            AssemblyService.gagliardo_norm(operator, other)


class TestOperatorSerialization:
    """Operator JSON load/dump."""

    def test_load_restores_matrix(self, operator):
        """Test a dumped operator reloads with the same matrix and fingerprint."""
        payload = AssemblyService.dump_operator(operator)
        restored = AssemblyService.load_operator(payload)
        assert restored.fingerprint == operator.fingerprint
        np.testing.assert_array_equal(restored.matrix, operator.matrix)

    def test_fingerprint_mismatch_rejected(self, operator):
        """Test a tampered fingerprint raises MeshError."""
        payload = dict(AssemblyService.dump_operator(operator))
        payload['fingerprint'] = '0' * 64
        with pytest.raises(MeshError):
            AssemblyService.load_operator(payload)

    def test_fingerprint_tracks_kernel(self, mesh, params):
        """Test changing s changes the fingerprint; changing mu does not."""
        A1 = AssemblyService.assemble_stiffness(mesh, params)
        A2 = AssemblyService.assemble_stiffness(mesh, params.replace(s=0.31))
        assert A1.fingerprint != A2.fingerprint
        assert A1.with_params(params.replace(mu=0.4)).fingerprint == A1.fingerprint
