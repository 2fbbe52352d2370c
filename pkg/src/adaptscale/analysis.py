"""Scaling fits, confidence/prediction bands, and resource budgets.

Two log conventions coexist, matching how the two regressions are usually
displayed: error-vs-iteration extrapolations use log10(eps) = a*n + b,
while iteration-vs-entropy and iteration-vs-size fits use ln(n).  Every
fit records which convention produced it.  All bands are t-based with
n_points - 2 degrees of freedom.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

log = logging.getLogger(__name__)


class DegenerateFit(ValueError):
    """x carries no variation; the slope is unidentifiable."""


class UndefinedRSquared(ValueError):
    """SS_tot = 0: y is constant, R^2 undefined."""


class NonDecayingFit(ValueError):
    """Solving for a threshold needs a negative slope."""


@dataclass
class ScalingFit:
    slope: float
    intercept: float
    r_squared: float
    residual_variance: float  # SS_res / (n - 2); 0.0 when n == 2
    n_points: int
    covariance: np.ndarray  # 2x2 over (slope, intercept)
    log_base: str = "ln"  # which log was applied to y: "ln" or "log10"
    x_range: tuple = (float("nan"), float("nan"))

    def predict_log(self, x):
        return self.slope * x + self.intercept

    def _t_quantile(self, level=0.95):
        df = self.n_points - 2
        if df < 1:
            raise ValueError("bands need n_points >= 3")
        return float(stats.t.ppf(0.5 + level / 2.0, df))

    def mean_band_halfwidth(self, x, level=0.95):
        """Half-width of the mean-response (confidence) band at x, log scale."""
        var = self._pred_var(x)
        return self._t_quantile(level) * math.sqrt(var)

    def prediction_band_halfwidth(self, x, level=0.95):
        """Half-width of the single-observation band at x, log scale."""
        var = self._pred_var(x) + self.residual_variance
        return self._t_quantile(level) * math.sqrt(var)

    def _pred_var(self, x):
        j = np.array([x, 1.0])
        return float(j @ self.covariance @ j)


def _log(y, log_base):
    return np.log(y) if log_base == "ln" else np.log10(y)


def _exp(value, log_base):
    return math.exp(value) if log_base == "ln" else 10.0 ** value


def fit_loglinear(x, y, log_base: str = "ln") -> ScalingFit:
    """Ordinary least squares of log(y) on x.

    R^2 = 1 - SS_res/SS_tot.  Raises DegenerateFit for constant x and
    UndefinedRSquared for constant log(y).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("x and y must be equal-length vectors of size >= 2")
    if np.any(y <= 0.0):
        raise ValueError("y must be positive before taking logs")
    if log_base not in ("ln", "log10"):
        raise ValueError("log_base must be 'ln' or 'log10'")
    ly = _log(y, log_base)
    n = x.size
    sxx = float(np.sum((x - x.mean()) ** 2))
    if sxx == 0.0:
        raise DegenerateFit("x is constant")
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    if ss_tot == 0.0:
        raise UndefinedRSquared("log(y) is constant")
    slope = float(np.sum((x - x.mean()) * (ly - ly.mean())) / sxx)
    intercept = float(ly.mean() - slope * x.mean())
    residuals = ly - (slope * x + intercept)
    ss_res = float(residuals @ residuals)
    sigma2 = ss_res / (n - 2) if n > 2 else 0.0
    cov = sigma2 * np.array(
        [
            [1.0 / sxx, -x.mean() / sxx],
            [-x.mean() / sxx, 1.0 / n + x.mean() ** 2 / sxx],
        ]
    )
    return ScalingFit(
        slope=slope,
        intercept=intercept,
        r_squared=1.0 - ss_res / ss_tot,
        residual_variance=sigma2,
        n_points=n,
        covariance=cov,
        log_base=log_base,
        x_range=(float(np.min(x)), float(np.max(x))),
    )


@dataclass
class Interval:
    """Point estimate with a symmetric-confidence interval [lower, upper]."""

    point: float
    lower: float
    upper: float

    def clamped(self):
        return Interval(max(self.point, 0.0), max(self.lower, 0.0), max(self.upper, 0.0))


def solve_for_threshold(fit: ScalingFit, epsilon: float, level=0.95) -> Interval:
    """Invert log10(eps) = a*n + b for n at the given eps.

    First-order error propagation through the (a, b) covariance gives the
    interval; requires a decaying fit (a < 0).
    """
    if fit.log_base != "log10":
        raise ValueError("threshold solving expects a log10(eps)-vs-n fit")
    if fit.slope >= 0.0:
        raise NonDecayingFit(f"slope {fit.slope} does not decay")
    target = math.log10(epsilon)
    n = (target - fit.intercept) / fit.slope
    jac = np.array([-n / fit.slope, -1.0 / fit.slope])
    var = float(jac @ fit.covariance @ jac)
    half = fit._t_quantile(level) * math.sqrt(max(var, 0.0))
    return Interval(n, n - half, n + half)


@dataclass
class PredictionResult:
    point: float
    confidence: Interval  # mean response
    prediction: Interval  # single observation
    extrapolated: bool


def predict_n_adapt(fit: ScalingFit, h_star: float, level=0.95) -> PredictionResult:
    """Iteration-count estimate from an entropy (or size) regression.

    Returns the point estimate together with the mean-response confidence
    interval and the single-observation prediction interval, both mapped
    back through the fit's log convention.  An extrapolation flag is set
    (not an error) when h_star lies outside the fitted range.
    """
    if fit.n_points < 3:
        raise ValueError("prediction bands need n_points >= 3")
    center = fit.predict_log(h_star)
    half_ci = fit.mean_band_halfwidth(h_star, level)
    half_pi = fit.prediction_band_halfwidth(h_star, level)
    lo, hi = fit.x_range
    extrapolated = not (lo <= h_star <= hi) if not math.isnan(lo) else False
    if extrapolated:
        warnings.warn(
            f"h={h_star} outside fitted range [{lo}, {hi}]; extrapolating",
            stacklevel=2,
        )
    return PredictionResult(
        point=_exp(center, fit.log_base),
        confidence=Interval(
            _exp(center, fit.log_base),
            _exp(center - half_ci, fit.log_base),
            _exp(center + half_ci, fit.log_base),
        ),
        prediction=Interval(
            _exp(center, fit.log_base),
            _exp(center - half_pi, fit.log_base),
            _exp(center + half_pi, fit.log_base),
        ),
        extrapolated=extrapolated,
    )


def bootstrap_prediction(x, y, x_new, log_base="ln", n_resamples=10_000,
                         seed=0, level=0.95) -> Interval:
    """Percentile-bootstrap alternative to the t-based prediction interval."""
    x = np.asarray(x, dtype=float)
    ly = _log(np.asarray(y, dtype=float), log_base)
    n = x.size
    rng = np.random.default_rng(seed)
    preds = np.empty(n_resamples)
    for k in range(n_resamples):
        pick = rng.integers(0, n, size=n)
        xs, ys = x[pick], ly[pick]
        sxx = np.sum((xs - xs.mean()) ** 2)
        if sxx == 0.0:
            preds[k] = np.nan
            continue
        a = np.sum((xs - xs.mean()) * (ys - ys.mean())) / sxx
        b = ys.mean() - a * xs.mean()
        preds[k] = a * x_new + b
    preds = preds[np.isfinite(preds)]
    lo, hi = np.quantile(preds, [(1 - level) / 2, (1 + level) / 2])
    fit = fit_loglinear(x, np.asarray(y, dtype=float), log_base)
    return Interval(
        _exp(fit.predict_log(x_new), log_base), _exp(lo, log_base), _exp(hi, log_base)
    )


# ---------------------------------------------------------------------------
# R^2(alpha, eps) surface
# ---------------------------------------------------------------------------

@dataclass
class SurfaceSource:
    """One molecule's contribution: its CI distribution and ADAPT records."""

    label: str
    distribution: object  # CiDistribution
    records: list  # IterationRecord list (or anything with the two fields)

    def n_adapt_at(self, epsilon, last_crossing=False):
        below = [r.iteration_index for r in self.records if r.energy_error <= epsilon]
        if not below:
            return None
        if not last_crossing:
            return below[0]
        last = self.records[-1].iteration_index
        if below[-1] != last:
            return None
        start = last
        indices = set(below)
        while start - 1 in indices:
            start -= 1
        return start


@dataclass
class R2Surface:
    alphas: np.ndarray
    epsilons: np.ndarray
    r2: np.ndarray  # [alpha, epsilon]; NaN where undefined
    best_alpha: np.ndarray  # argmax alpha per epsilon column (NaN if none)
    excluded: list  # (molecule label, epsilon) pairs left out of a column

    def to_csv(self):
        lines = ["alpha\\epsilon," + ",".join(repr(float(e)) for e in self.epsilons)]
        for i, a in enumerate(self.alphas):
            cells = ",".join(
                "nan" if np.isnan(v) else repr(float(v)) for v in self.r2[i]
            )
            lines.append(f"{float(a)!r},{cells}")
        lines.append(
            "best_alpha,"
            + ",".join(
                "nan" if np.isnan(v) else repr(float(v)) for v in self.best_alpha
            )
        )
        return "\n".join(lines) + "\n"


def r2_surface(sources, alpha_grid, epsilon_grid, last_crossing=False) -> R2Surface:
    """R^2 of ln(n_ADAPT(eps)) against h_alpha for every grid cell.

    Molecules that never reach a given eps are excluded from that column
    (logged and reported); columns with fewer than 3 molecules are NaN.
    """
    from .complexity import renyi_value

    alphas = np.asarray(alpha_grid, dtype=float)
    epsilons = np.asarray(epsilon_grid, dtype=float)
    h = np.array(
        [
            [renyi_value(s.distribution, float(a)) for a in alphas]
            for s in sources
        ]
    )  # [source, alpha]
    r2 = np.full((alphas.size, epsilons.size), np.nan)
    best = np.full(epsilons.size, np.nan)
    excluded = []
    for je, eps in enumerate(epsilons):
        n_vals, keep = [], []
        for i, s in enumerate(sources):
            n = s.n_adapt_at(float(eps), last_crossing)
            if n is None:
                excluded.append((s.label, float(eps)))
                log.info("excluding %s at eps=%g (never reached)", s.label, eps)
            else:
                n_vals.append(n)
                keep.append(i)
        if len(keep) < 3:
            continue
        n_arr = np.asarray(n_vals, dtype=float)
        col = np.full(alphas.size, np.nan)
        for ia in range(alphas.size):
            try:
                col[ia] = fit_loglinear(h[keep, ia], n_arr, "ln").r_squared
            except (DegenerateFit, UndefinedRSquared):
                continue
        r2[:, je] = col
        if np.any(np.isfinite(col)):
            best[je] = alphas[int(np.nanargmax(col))]
    return R2Surface(alphas, epsilons, r2, best, excluded)


# ---------------------------------------------------------------------------
# Circuit-resource budgets
# ---------------------------------------------------------------------------

@dataclass
class ResourceEstimate:
    n_adapt: Interval
    params_per_iter: Interval
    cnots_per_iter: Interval
    total_parameters: Interval
    total_cnots: Interval


def interval_product(n: Interval, rate: Interval) -> Interval:
    """Endpoint product of non-negative intervals: totals = n x rate."""
    return Interval(
        n.point * rate.point, n.lower * rate.lower, n.upper * rate.upper
    )


def rate_at(fit: ScalingFit, system_size: float, level=0.95) -> Interval:
    """Per-iteration rate extrapolated linearly in system size (no log)."""
    point = fit.slope * system_size + fit.intercept
    half = fit.mean_band_halfwidth(system_size, level)
    est = Interval(point, point - half, point + half)
    if est.lower < 0.0 or est.point < 0.0:
        warnings.warn("extrapolated rate fell below zero; clamping", stacklevel=2)
        est = est.clamped()
    return est


def linear_rate_fit(sizes, rates) -> ScalingFit:
    """Plain OLS of rate on size (identity link), packaged as a ScalingFit.

    r_squared/residual_variance/covariance follow the same formulas as the
    log fits; log_base is 'ln' by courtesy but no log is applied here.
    """
    x = np.asarray(sizes, dtype=float)
    y = np.asarray(rates, dtype=float)
    n = x.size
    sxx = float(np.sum((x - x.mean()) ** 2))
    if sxx == 0.0:
        raise DegenerateFit("sizes are constant")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    slope = float(np.sum((x - x.mean()) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    residuals = y - (slope * x + intercept)
    ss_res = float(residuals @ residuals)
    sigma2 = ss_res / (n - 2) if n > 2 else 0.0
    cov = sigma2 * np.array(
        [
            [1.0 / sxx, -x.mean() / sxx],
            [-x.mean() / sxx, 1.0 / n + x.mean() ** 2 / sxx],
        ]
    )
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else float("nan")
    return ScalingFit(slope, intercept, r2, sigma2, n, cov, "ln",
                      (float(np.min(x)), float(np.max(x))))


def resource_budget(n_adapt_ci: Interval, rate_fit_params: ScalingFit,
                    rate_fit_cnots: ScalingFit, system_size: float) -> ResourceEstimate:
    """Totals = n_ADAPT x per-iteration rate, by interval multiplication."""
    if rate_fit_params.n_points < 3 or rate_fit_cnots.n_points < 3:
        raise ValueError("rate fits need n_points >= 3")
    r_params = rate_at(rate_fit_params, system_size)
    r_cnots = rate_at(rate_fit_cnots, system_size)
    return ResourceEstimate(
        n_adapt=n_adapt_ci,
        params_per_iter=r_params,
        cnots_per_iter=r_cnots,
        total_parameters=interval_product(n_adapt_ci, r_params),
        total_cnots=interval_product(n_adapt_ci, r_cnots),
    )
