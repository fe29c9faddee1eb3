"""
FRACNEHARI - Asymptotic Fits
Log-log slope fits with an optional |ln eps| regressor, and the sharp
exponents of the bubble integrals.
"""

import logging

import numpy as np
from scipy import stats

from apps.core.exceptions import ExtrapolationError, FitError
from .entities import SlopeFit

logger = logging.getLogger('apps.bubbles')

MIN_POINTS = 4
MIN_DECADES = 2.0


def _check_grid(eps, values):
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    if eps.shape != values.shape or eps.ndim != 1:
        raise FitError('eps grid and values must be 1-D arrays of equal length.')
    if eps.size < MIN_POINTS:
        raise FitError(f"Slope fit needs at least {MIN_POINTS} points (got {eps.size}).")
    if np.any(eps <= 0.0) or np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        raise FitError('Slope fit needs positive finite eps and values.')
    order = np.argsort(eps)[::-1]
    eps, values = eps[order], values[order]
    if np.any(np.diff(eps) >= 0.0):
        raise FitError('eps grid must not repeat values.')
    if np.log10(eps.max() / eps.min()) < MIN_DECADES:
        raise FitError(f"eps grid must span at least {MIN_DECADES:g} decades.")
    return eps, values


def _aic(rss: float, n: int, k: int) -> float:
    return n * np.log(max(rss, 1e-300) / n) + 2.0 * k


def fit_slope(eps, values, target: float, with_log: bool = False, label: str = '') -> SlopeFit:
    """
    OLS of log(values) on log(eps), plus log|ln eps| when ``with_log``.

    With the extra regressor the log factor counts as detected when it lowers
    the AIC of the plain fit by more than 2.
    """
    eps, values = _check_grid(eps, values)
    x, y = np.log(eps), np.log(values)

    plain = stats.linregress(x, y)
    plain_residuals = y - (plain.intercept + plain.slope * x)
    if not with_log:
        return SlopeFit(
            eps_grid=eps, values=values,
            fitted_slope=float(plain.slope), slope_stderr=float(plain.stderr),
            intercept=float(plain.intercept), residuals=plain_residuals,
            target=float(target), label=label,
        )

    design = np.column_stack((np.ones_like(x), x, np.log(np.abs(x))))
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 3:
        raise FitError('Log-corrected fit is rank deficient.')
    residuals = y - design @ coef
    n = x.size
    rss = float(residuals @ residuals)
    sigma2 = rss / max(n - 3, 1)
    covariance = sigma2 * np.linalg.inv(design.T @ design)

    aic_plain = _aic(float(plain_residuals @ plain_residuals), n, 2)
    aic_log = _aic(rss, n, 3)
    detected = bool(aic_log < aic_plain - 2.0)
    logger.debug(f"{label or 'fit'}: AIC plain={aic_plain:.3f} log={aic_log:.3f}")
    return SlopeFit(
        eps_grid=eps, values=values,
        fitted_slope=float(coef[1]), slope_stderr=float(np.sqrt(max(covariance[1, 1], 0.0))),
        intercept=float(coef[0]), residuals=residuals,
        target=float(target), log_factor_detected=detected,
        log_coefficient=float(coef[2]), label=label,
    )


def sharp_exponent(power: float, N: int, s: float) -> float:
    """
    Exponent of int w |u_eps|^power as eps -> 0 for bounded w > 0 near the
    center: power (N-2s)/4 + min(0, N/2 - power (N-2s)/2).

    The second term is negative once |x|^{-power (N-2s)} stops being
    integrable; the borderline power carries an extra |ln eps|.
    """
    return power * (N - 2.0 * s) / 4.0 + min(0.0, N / 2.0 - power * (N - 2.0 * s) / 2.0)


def extrapolate_quotients(eps, quotients, exponent: float, rise_tol: float = 1e-3):
    """
    Fit Q(eps) = S + C eps^exponent by least squares.

    Raises:
        ExtrapolationError: Q rises by more than ``rise_tol`` (relative) as
            eps decreases, or the intercept is not positive.

    Returns:
        (S, C)
    """
    eps = np.asarray(eps, dtype=float)
    quotients = np.asarray(quotients, dtype=float)
    if eps.size < 3:
        raise ExtrapolationError('Extrapolation needs at least 3 values of eps.')
    order = np.argsort(eps)[::-1]
    eps, quotients = eps[order], quotients[order]
    rises = quotients[1:] > quotients[:-1] * (1.0 + rise_tol)
    if np.any(rises):
        k = int(np.flatnonzero(rises)[0])
        raise ExtrapolationError(
            f"Sobolev quotient increases from {quotients[k]:.6g} to {quotients[k + 1]:.6g} "
            f"as eps decreases to {eps[k + 1]:.3g}; refine the mesh.",
            extra={'eps': eps.tolist(), 'quotients': quotients.tolist()},
        )
    fit = stats.linregress(eps ** exponent, quotients)
    if not fit.intercept > 0.0:
        raise ExtrapolationError(f"Extrapolated Sobolev constant {fit.intercept:.6g} is not positive.")
    return float(fit.intercept), float(fit.slope)
