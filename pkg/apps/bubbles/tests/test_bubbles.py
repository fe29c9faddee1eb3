"""
FRACNEHARI - Bubble Tests
Concentrating test functions, slope fits and the Sobolev constant estimate.
"""

import numpy as np
import pytest

from apps.assembly.entities import DiscreteFunction, Mesh, ProblemParams
from apps.assembly.services import AssemblyService
from apps.bubbles.asymptotics import extrapolate_quotients, fit_slope, sharp_exponent
from apps.bubbles.entities import BubbleParams
from apps.bubbles.serializers import SlopeFitSerializer
from apps.bubbles.services import BubbleService
from apps.core.exceptions import ExtrapolationError, FitError, InputError, ParamError
from apps.fibering import thresholds as th
from apps.fibering.services import FiberingService

DEEP_EPS = np.logspace(-60.0, -20.0, 9)


@pytest.fixture
def critical_params():
    return ProblemParams(s=0.2, q=0.5, p=7.0 / 3.0, mu=0.0)


@pytest.fixture
def graded_mesh():
    return Mesh.graded(-1.0, 1.0, 64, ratio=8.0)


@pytest.fixture
def w1():
    return DiscreteFunction.interpolate(Mesh.uniform(-1.0, 1.0, 32), lambda x: 1.0 - x ** 2)


class TestBubbleFunctions:
    """v_eps, the cutoff and the interpolant guard."""

    def test_peak_value(self):
        """Test v_eps(center) = k eps^{-(N-2s)/4}."""
        bp = BubbleParams(eps=1e-4, s=0.2, k_amp=2.0)
        assert BubbleService.bubble(0.0, bp) == pytest.approx(2.0 * 1e-4 ** (-0.15), rel=1e-12)

    def test_defaults(self):
        """Test delta and center defaults."""
        bp = BubbleParams(eps=0.1, s=0.2, a=0.0, b=4.0)
        assert bp.delta == pytest.approx(0.5)
        assert bp.center == pytest.approx(2.0)

    def test_cutoff_shape(self):
        """Test psi = 1 inside, 0 at the boundary and strictly between in the collar."""
        bp = BubbleParams(eps=0.1, s=0.2)
        assert np.all(BubbleService.cutoff(np.array([-0.75, 0.0, 0.75]), bp) == 1.0)
        assert np.all(BubbleService.cutoff(np.array([-1.0, 1.0, 1.5]), bp) == 0.0)
        collar = BubbleService.cutoff(np.array([-0.9, 0.8, 0.95]), bp)
        assert np.all((collar > 0.0) & (collar < 1.0))

    def test_nonpositive_eps_rejected(self):
        """Test eps <= 0 raises InputError."""
        for eps in (0.0, -1e-3):
            with pytest.raises(InputError):
                BubbleParams(eps=eps, s=0.2)

    def test_bad_delta_rejected(self):
        """Test delta outside (0, (b-a)/2) raises ParamError."""
        with pytest.raises(ParamError):
            BubbleParams(eps=0.1, s=0.2, delta=1.0)

    def test_resolution_guard(self):
        """Test interpolating a bubble narrower than the mesh raises InputError."""
        mesh = Mesh.uniform(-1.0, 1.0, 32)
        with pytest.raises(InputError):
            BubbleService.bubble_interpolant(mesh, BubbleParams(eps=1e-3, s=0.2))
        u = BubbleService.bubble_interpolant(mesh, BubbleParams(eps=0.5, s=0.2))
        assert np.all(u.coefficients > 0.0)

    def test_concentration_profile(self):
        """Test u_eps -> 0 away from the center."""
        rows = BubbleService.concentration_profile(
            BubbleParams(eps=0.1, s=0.2), [1e-2, 1e-4, 1e-6, 1e-8], [-0.5, 0.5],
        )
        decay = [row['max_off_center'] for row in rows]
        assert rows[0]['eps'] == 1e-2
        assert all(later < earlier for earlier, later in zip(decay, decay[1:]))


class TestSlopeFits:
    """Log-log fits on synthetic data."""

    def test_exact_power_law(self):
        """Test a pure power law returns its exponent."""
        eps = np.logspace(-8.0, -2.0, 7)
        fit = fit_slope(eps, 3.0 * eps ** 0.3, target=0.3)
        assert fit.fitted_slope == pytest.approx(0.3, abs=1e-10)
        assert fit.log_factor_detected is False

    def test_grid_is_stored_decreasing(self):
        """Test the eps grid is reordered to decrease."""
        eps = np.logspace(-8.0, -2.0, 5)
        fit = fit_slope(eps, eps ** 0.5, target=0.5)
        assert np.all(np.diff(fit.eps_grid) < 0.0)

    def test_log_factor_detected(self):
        """Test eps^{1/4} |ln eps| is fitted with slope 1/4 and a detected log."""
        eps = np.logspace(-40.0, -4.0, 10)
        fit = fit_slope(eps, eps ** 0.25 * np.abs(np.log(eps)), target=0.25, with_log=True)
        assert fit.fitted_slope == pytest.approx(0.25, abs=1e-8)
        assert fit.log_coefficient == pytest.approx(1.0, abs=1e-6)
        assert fit.log_factor_detected is True

    def test_too_few_points(self):
        """Test fewer than four points raise FitError."""
        with pytest.raises(FitError):
            fit_slope([1e-2, 1e-4, 1e-6], [1.0, 2.0, 3.0], target=0.0)

    def test_too_narrow_grid(self):
        """Test a grid spanning less than two decades raises FitError."""
        eps = np.logspace(-3.0, -1.5, 6)
        with pytest.raises(FitError):
            fit_slope(eps, eps, target=1.0)

    def test_sharp_exponents(self):
        """Test the sharp exponents for N=1, s=0.2."""
        assert sharp_exponent(1.0, 1, 0.2) == pytest.approx(0.15)
        assert sharp_exponent(0.5, 1, 0.2) == pytest.approx(0.075)
        assert sharp_exponent(7.0 / 3.0, 1, 0.2) == pytest.approx(0.15)

    def test_serializer_csv_rows(self):
        """Test the serialized fit and its CSV rows."""
        eps = np.logspace(-8.0, -2.0, 4)
        fit = fit_slope(eps, eps ** 0.3, target=0.3, label='demo')
        data = SlopeFitSerializer(fit).data
        assert data['label'] == 'demo'
        assert len(data['eps_grid']) == 4
        assert set(fit.rows()[0]) == {'eps', 'value', 'residual'}


class TestExtrapolation:
    """Richardson extrapolation of the Sobolev quotient."""

    def test_recovers_intercept(self):
        """Test Q = S + C eps^0.3 gives S back."""
        eps = np.array([0.2, 0.1, 0.05, 0.025])
        S, C = extrapolate_quotients(eps, 2.0 + 0.5 * eps ** 0.3, 0.3)
        assert S == pytest.approx(2.0, abs=1e-10)
        assert C == pytest.approx(0.5, abs=1e-10)

    def test_rising_quotients_rejected(self):
        """Test quotients growing as eps decreases raise ExtrapolationError."""
        eps = np.array([0.2, 0.1, 0.05, 0.025])
        with pytest.raises(ExtrapolationError):
            extrapolate_quotients(eps, 2.0 - 0.5 * eps ** 0.3, 0.3)

    @pytest.mark.slow
    def test_estimate_on_two_meshes(self, critical_params):
        """Test the estimate is positive, below the sampled quotients and mesh-stable."""
        meshes = [Mesh.graded(-1.0, 1.0, 64, ratio=8.0), Mesh.graded(-1.0, 1.0, 128, ratio=8.0)]
        estimate = BubbleService.estimate_S(meshes, [0.2, 0.1, 0.05, 0.025, 0.0125], critical_params)
        quotients = [row['quotient'] for row in estimate.table]
        assert len(estimate.intercepts) == 2
        assert 0.0 < estimate.value < max(quotients)
        assert estimate.error_bar < 0.2 * estimate.value
        finest = [row['quotient'] for row in estimate.table if row['mesh'] == len(meshes) - 1]
        assert finest and min(finest) >= 0.98 * estimate.value


class TestBubbleIntegrals:
    """Decay rates of the bubble integrals."""

    def test_nonpositive_w1_rejected(self, critical_params):
        """Test a sign-changing w1 raises InputError."""
        mesh = Mesh.uniform(-1.0, 1.0, 16)
        w = DiscreteFunction.interpolate(mesh, lambda x: np.sin(np.pi * x))
        with pytest.raises(InputError):
            BubbleService.coupling_integrals(w, BubbleParams(eps=1e-3, s=0.2), critical_params)

    def test_integral_slopes(self, w1, critical_params):
        """Test the fitted slopes follow the sharp exponents."""
        fits = BubbleService.coupling_slopes(w1, DEEP_EPS, critical_params)
        for key in ('A1', 'A2', 'A3', 'A4'):
            assert fits[key].fitted_slope == pytest.approx(fits[key].sharp_target, abs=0.02)
        assert fits['A1'].bound_holds is True
        assert fits['A3'].bound_holds is True
        assert fits['A4'].bound_holds is False
        assert fits['A4'].target == pytest.approx(0.35)

    @pytest.mark.parametrize('q,target', [(0.5, 0.225), (0.8, 0.23)])
    def test_lebesgue_regimes(self, critical_params, q, target):
        """Test the slope of int |u_eps|^{q+1} away from the borderline."""
        fit = BubbleService.power_slope(DEEP_EPS, q, critical_params)
        assert fit.target == pytest.approx(target)
        assert fit.fitted_slope == pytest.approx(target, abs=0.02)
        assert fit.log_factor_detected is False

    def test_borderline_regime(self, critical_params):
        """Test the borderline exponent shows a log factor."""
        fit = BubbleService.power_slope(DEEP_EPS, 2.0 / 3.0, critical_params)
        assert fit.target == pytest.approx(0.25)
        assert fit.fitted_slope == pytest.approx(0.25, abs=0.05)
        assert fit.log_factor_detected is True


class TestBubbleEnergy:
    """sup_t I_mu(t u_eps)."""

    def test_zero_mu_closed_form(self, graded_mesh, critical_params):
        """Test the mu = 0 supremum equals (s/N) Q^{N/2s}."""
        A = AssemblyService.assemble_stiffness(graded_mesh, critical_params)
        bp = BubbleParams(eps=0.05, s=0.2)
        level = BubbleService.sup_fiber_energy_bubble(A, bp, critical_params)
        Q = AssemblyService.sobolev_quotient(A, BubbleService.bubble_interpolant(graded_mesh, bp))
        assert level == pytest.approx(BubbleService.critical_bubble_energy(Q, critical_params), rel=1e-8)

    def test_decreasing_in_mu(self, graded_mesh, critical_params):
        """Test the supremum decreases as mu grows."""
        A = AssemblyService.assemble_stiffness(graded_mesh, critical_params)
        bp = BubbleParams(eps=0.05, s=0.2)
        levels = [
            BubbleService.sup_fiber_energy_bubble(A, bp, critical_params.replace(mu=mu))
            for mu in (0.0, 0.005, 0.02)
        ]
        assert levels[0] > levels[1] > levels[2]

    def test_concave_term_lowers_bubble_level(self):
        """Test sup_t I_mu(t u_eps) sits below (s/N) Q^{N/2s} by at least the concave term at t+, mu < mu*."""
        params = ProblemParams(s=0.1, q=0.8, p=1.5, mu=0.05)
        mesh = Mesh.graded(-1.0, 1.0, 64, ratio=8.0)
        A = AssemblyService.assemble_stiffness(mesh, params)
        bp = BubbleParams.for_problem(params, eps=0.05)
        u = BubbleService.bubble_interpolant(mesh, bp)
        quotient = AssemblyService.sobolev_quotient(A, u)
        assert params.mu < th.mu_star(params, quotient)

        level = BubbleService.critical_bubble_energy(quotient, params)
        assert level == pytest.approx(params.s / params.N * quotient ** (params.N / (2.0 * params.s)))
        sup = BubbleService.sup_fiber_energy_bubble(A, bp, params)
        t_plus = FiberingService.fibering_roots(u, A, params).t_plus
        concave = params.mu / (params.q + 1.0) * AssemblyService.lp_power(t_plus * u, params.q + 1.0)
        assert concave > 0.0
        assert sup <= level - concave + 1e-10 * level
