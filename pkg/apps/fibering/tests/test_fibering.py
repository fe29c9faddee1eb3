"""
FRACNEHARI - Fibering Tests
Fibering map, Nehari rescalings and classification, projection derivative.
"""

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from apps.assembly.entities import DiscreteFunction, Mesh, ProblemParams
from apps.assembly.services import AssemblyService
from apps.core.exceptions import InputError, NearDegenerateError, NoRoots
from apps.fibering.entities import N_MINUS, N_PLUS, N_ZERO, NOT_ON_N, FiberNorms
from apps.fibering.services import FiberingService


@pytest.fixture
def params():
    return ProblemParams(s=0.3, q=0.5, p=3.0, mu=0.05, lam=1.0)


@pytest.fixture
def mesh():
    return Mesh.uniform(-1.0, 1.0, 24)


@pytest.fixture
def operator(mesh, params):
    return AssemblyService.assemble_stiffness(mesh, params)


@pytest.fixture
def samples(mesh):
    """Random positive-ish functions with a fixed seed."""
    rng = np.random.default_rng(2024)
    base = 1.0 - mesh.interior_nodes ** 2
    return [
        DiscreteFunction(base * (1.0 + 0.5 * rng.random(mesh.n_interior)) * rng.uniform(0.2, 5.0), mesh)
        for _ in range(10)
    ]


class TestFiberingMap:
    """phi, phi' and the closed-form maximizer."""

    def test_phi_at_zero(self, params):
        """Test phi(0) = 0."""
        assert FiberingService.phi(0.0, FiberNorms(1.0, 1.0, 1.0), params) == 0.0

    def test_t_zero_unit_norms(self, params):
        """Test t0 = (0.5/2.5)^{1/2} for unit norms, p = 3, q = 0.5."""
        t0 = FiberingService.t_zero_from_norms(FiberNorms(1.0, 1.0, 1.0), params)
        assert t0 == pytest.approx(0.447213595499958, rel=1e-12)

    def test_phi_prime_vanishes_at_t_zero(self, params):
        """Test phi'(t0) = 0 and the sign change for random norm pairs."""
        rng = np.random.default_rng(7)
        for a, b in rng.uniform(0.1, 10.0, size=(100, 2)):
            norms = FiberNorms(a, b, 1.0)
            t0 = FiberingService.t_zero_from_norms(norms, params)
            scale = (1.0 - params.q) * t0 ** (-params.q) * a
            assert abs(FiberingService.phi_prime(t0, norms, params)) <= 1e-12 * scale
            assert FiberingService.phi_prime(0.5 * t0, norms, params) > 0.0
            assert FiberingService.phi_prime(2.0 * t0, norms, params) < 0.0

    def test_t_zero_matches_golden_section(self, params):
        """Test the closed form against a numeric maximizer of phi."""
        norms = FiberNorms(2.0, 0.7, 1.0)
        t0 = FiberingService.t_zero_from_norms(norms, params)
        result = minimize_scalar(
            lambda t: -float(FiberingService.phi(t, norms, params)),
            bracket=(0.1 * t0, t0, 3.0 * t0), method='golden', tol=1e-12,
        )
        assert result.x == pytest.approx(t0, rel=1e-7)

    def test_t_zero_scaling(self, operator, samples, params):
        """Test t0(cu) = t0(u)/c."""
        u = samples[0]
        assert FiberingService.t_zero(3.0 * u, operator, params) == pytest.approx(
            FiberingService.t_zero(u, operator, params) / 3.0, rel=1e-12
        )

    def test_negative_t_rejected(self, params):
        """Test t < 0 raises InputError."""
        with pytest.raises(InputError):
            FiberingService.phi(-1.0, FiberNorms(1.0, 1.0, 1.0), params)

    def test_zero_function_rejected(self, operator, mesh, params):
        """Test u = 0 raises InputError."""
        with pytest.raises(InputError):
            FiberingService.t_zero(DiscreteFunction.zeros(mesh), operator, params)


class TestFiberingRoots:
    """Nehari rescalings t- < t0 < t+."""

    def test_roots_bracket_t_zero(self, operator, samples, params):
        """Test 0 < t- < t0 < t+ < T0 and the slopes of phi at the roots."""
        for u in samples:
            report = FiberingService.fibering_roots(u, operator, params)
            assert report.roots_exist
            assert 0.0 < report.t_minus < report.t0 < report.t_plus < report.t_zero_crossing
            assert FiberingService.phi_prime(report.t_minus, report.norms, params) > 0.0
            assert FiberingService.phi_prime(report.t_plus, report.norms, params) < 0.0

    def test_rescaled_points_classify(self, operator, samples, params):
        """Test t-u lies in N+ and t+u in N-."""
        for u in samples:
            report = FiberingService.fibering_roots(u, operator, params)
            assert FiberingService.classify_nehari(report.t_minus * u, operator, params) == N_PLUS
            assert FiberingService.classify_nehari(report.t_plus * u, operator, params) == N_MINUS

    def test_generic_function_not_on_nehari(self, operator, samples, params):
        """Test an unprojected function is not on N."""
        assert FiberingService.classify_nehari(samples[0], operator, params) == NOT_ON_N

    def test_energy_extrema_by_dense_scan(self, operator, samples, params):
        """Test I(tu) is minimal on [0, t0] at t- and maximal on [t0, inf) at t+."""
        u = samples[1]
        report = FiberingService.fibering_roots(u, operator, params)
        t, values = FiberingService.fibering_scan(u, operator, params, n=10000)
        step = t[1] - t[0]
        left = t <= report.t0
        assert abs(t[left][np.argmin(values[left])] - report.t_minus) <= step
        right = t >= report.t0
        assert abs(t[right][np.argmax(values[right])] - report.t_plus) <= step

    def test_small_mu_limit(self, operator, samples, params):
        """Test t- -> 0 and t+ -> T0 as mu -> 0."""
        u = samples[2]
        previous = None
        for mu in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5):
            report = FiberingService.fibering_roots(u, operator, params.replace(mu=mu))
            if previous is not None:
                assert report.t_minus < previous.t_minus
                assert report.t_plus > previous.t_plus
            previous = report
        assert previous.t_minus < 1e-3 * previous.t0
        assert previous.t_plus == pytest.approx(previous.t_zero_crossing, rel=1e-3)

    def test_mu_zero_has_single_root(self, operator, samples, params):
        """Test mu = 0 gives no t- and t+ = T0."""
        report = FiberingService.fibering_roots(samples[0], operator, params.replace(mu=0.0))
        assert report.t_minus is None
        assert report.t_plus == report.t_zero_crossing

    def test_no_roots_reported_or_raised(self, operator, samples, params):
        """Test a huge mu gives roots_exist=False, or NoRoots when strict."""
        big = params.replace(mu=1e6)
        report = FiberingService.fibering_roots(samples[0], operator, big)
        assert report.roots_exist is False
        assert report.t_plus is None
        with pytest.raises(NoRoots):
            FiberingService.fibering_roots(samples[0], operator, big, strict=True)

    @pytest.mark.parametrize('mu', [0.05, 0.01, 1e-3])
    def test_roots_far_below_t_zero(self, mu):
        """Test t- many decades below t0 is found to relative accuracy (q near 1, small b)."""
        critical = ProblemParams(s=0.1, q=0.8, p=1.5, mu=mu, lam=1.0)
        norms = FiberNorms(a=1.0, b=1e-3, c=1.0)
        report = FiberingService.roots_from_norms(norms, critical)
        assert report.roots_exist
        assert report.t_minus < 1e-5 * report.t0 < report.t0 < report.t_plus < report.t_zero_crossing
        for t in (report.t_minus, report.t_plus):
            assert float(FiberingService.phi(t, norms, critical)) == pytest.approx(mu, rel=1e-9)

    def test_nonpositive_lambda_rejected(self, operator, samples, params):
        """Test lam <= 0 raises InputError."""
        with pytest.raises(InputError):
            FiberingService.fibering_roots(samples[0], operator, params.replace(lam=0.0))

    def test_positive_part_of_negative_function_rejected(self, operator, samples, params):
        """Test J_mu fibering of a nonpositive function raises InputError."""
        with pytest.raises(InputError):
            FiberingService.fibering_roots(-samples[0], operator, params, positive_part=True)


class TestProjectionDerivative:
    """Implicit-function derivative of the Nehari rescaling."""

    def test_radial_direction(self, operator, samples, params):
        """Test v = u gives -1 since t(u + hu) = 1/(1+h)."""
        u = samples[0]
        on_n = FiberingService.fibering_roots(u, operator, params).t_plus * u
        assert FiberingService.nehari_projection_derivative(on_n, operator, params, on_n) == pytest.approx(-1.0, rel=1e-6)

    def test_matches_finite_differences(self, operator, samples, params, mesh):
        """Test random directions against central differences of t+(u + hv)."""
        u = samples[3]
        on_n = FiberingService.fibering_roots(u, operator, params).t_plus * u
        rng = np.random.default_rng(99)
        h = 1e-5
        for _ in range(20):
            v = DiscreteFunction(rng.standard_normal(mesh.n_interior) * np.abs(on_n.coefficients), mesh)
            forward = FiberingService.fibering_roots(on_n + h * v, operator, params).t_plus
            backward = FiberingService.fibering_roots(on_n - h * v, operator, params).t_plus
            expected = (forward - backward) / (2.0 * h)
            value = FiberingService.nehari_projection_derivative(on_n, operator, params, v)
            assert value == pytest.approx(expected, rel=1e-4, abs=1e-8)

    def test_linear_in_direction(self, operator, samples, params):
        """Test the derivative flips sign with v."""
        u = samples[0]
        on_n = FiberingService.fibering_roots(u, operator, params).t_plus * u
        v = samples[4]
        plus = FiberingService.nehari_projection_derivative(on_n, operator, params, v)
        minus = FiberingService.nehari_projection_derivative(on_n, operator, params, -v)
        assert plus == pytest.approx(-minus, rel=1e-12)

    def test_degenerate_point_rejected(self, operator, samples, params):
        """Test t0*u, where the second-order quantity vanishes, raises NearDegenerateError."""
        u = samples[0]
        t0 = FiberingService.t_zero(u, operator, params)
        with pytest.raises(NearDegenerateError):
            FiberingService.nehari_projection_derivative(t0 * u, operator, params, u)


class TestPsiDiagnostic:
    """Appendix diagnostic functional."""

    def test_first_term_is_degree_one(self, operator, samples, params):
        """Test psi(tu) + mu c(tu) = t (psi(u) + mu c(u))."""
        u = samples[0]
        c = FiberingService.norms(u, operator, params).c
        t = 2.3
        first = FiberingService.psi_mu_diagnostic(u, operator, params) + params.mu * c
        first_t = FiberingService.psi_mu_diagnostic(t * u, operator, params) + params.mu * t ** (params.q + 1.0) * c
        assert first_t == pytest.approx(t * first, rel=1e-12)

    def test_positive_on_n_minus_small_mu(self, operator, samples, params):
        """Test psi > 0 at N- points for small mu."""
        for u in samples:
            on_n = FiberingService.fibering_roots(u, operator, params).t_plus * u
            assert FiberingService.psi_mu_diagnostic(on_n, operator, params) > 0.0


class TestThresholds:
    """Closed-form threshold constants."""

    @pytest.fixture
    def critical(self):
        return ProblemParams(s=0.2, q=0.5, p=7.0 / 3.0, mu=0.01)

    def test_all_positive(self, critical):
        """Test every constant is strictly positive."""
        thresholds = FiberingService.thresholds(critical, S_estimate=2.0)
        for name in ('tilde_mu', 'k_const', 'M_const', 'mu_star', 'concave_floor_term',
                     'phi_lower_bound_factor', 'nehari_minus_norm_floor'):
            assert getattr(thresholds, name) > 0.0
        assert thresholds.k_M_discrepancy >= 0.0

    def test_k_matches_numeric_minimization(self):
        """Test k against a bounded numeric minimization of g over a (q, mu) grid."""
        from apps.fibering import thresholds as th
        for q in np.linspace(0.1, 0.9, 5):
            for mu in (1e-3, 1e-2, 1e-1, 0.5, 1.0):
                p = ProblemParams(s=0.2, q=float(q), p=2.0, mu=mu)
                two_star = p.critical_exponent
                upper = (th.g_coefficient(p) * mu * p.N / p.s) ** (1.0 / (two_star - q - 1.0))
                result = minimize_scalar(
                    lambda t: th.g_function(t, p, mu), bounds=(0.0, upper),
                    method='bounded', options={'xatol': 1e-14},
                )
                numeric = -result.fun / mu ** (two_star / (two_star - q - 1.0))
                assert th.k_const(p) == pytest.approx(numeric, rel=1e-10)

    def test_k_independent_of_mu(self, critical):
        """Test k(mu) is constant in mu."""
        from apps.fibering import thresholds as th
        values = [th.k_const(critical, mu) for mu in (1e-3, 1e-1, 1.0)]
        assert values[0] == pytest.approx(values[1], rel=1e-12)
        assert values[0] == pytest.approx(values[2], rel=1e-12)

    def test_ceiling_vanishes_at_mu_star(self, critical):
        """Test the compactness ceiling is zero at mu_star and positive below."""
        from apps.fibering import thresholds as th
        star = th.mu_star(critical, 2.0)
        assert th.compactness_ceiling(critical, 2.0, star) == pytest.approx(0.0, abs=1e-12)
        assert th.compactness_ceiling(critical, 2.0, 0.5 * star) > 0.0

    def test_regime_flags(self, critical):
        """Test mu flags and the sign-changing regime flag."""
        thresholds = FiberingService.thresholds(critical, S_estimate=2.0)
        assert thresholds.mu_below_tilde == (critical.mu < thresholds.tilde_mu)
        assert thresholds.sign_changing_regime is critical.sign_changing_regime

    def test_nonpositive_estimate_rejected(self, critical):
        """Test S_estimate <= 0 raises InputError."""
        with pytest.raises(InputError):
            FiberingService.thresholds(critical, S_estimate=0.0)

    def test_threshold_table(self, critical):
        """Test the text table lists every field."""
        table = FiberingService.threshold_table(FiberingService.thresholds(critical, 2.0))
        assert 'tilde_mu' in table
        assert 'k_M_discrepancy' in table

    def test_phi_lower_bound_sampled(self, critical):
        """Test phi(t0) >= F ||u||^{q+1} when S_est is below the quotient of u."""
        mesh = Mesh.uniform(-1.0, 1.0, 24)
        A = AssemblyService.assemble_stiffness(mesh, critical)
        u = DiscreteFunction.interpolate(mesh, lambda x: 1.0 - x ** 2)
        S_est = 0.98 * AssemblyService.sobolev_quotient(A, u)
        norms = FiberingService.norms(u, A, critical)
        t0 = FiberingService.t_zero_from_norms(norms, critical)
        from apps.fibering import thresholds as th
        bound = th.phi_lower_bound_factor(critical, S_est) * norms.a ** ((critical.q + 1.0) / 2.0)
        assert FiberingService.phi(t0, norms, critical) >= bound


def test_nehari_classes_are_distinct():
    """Test the class labels are distinct strings."""
    assert len({NOT_ON_N, N_PLUS, N_MINUS, N_ZERO}) == 4
