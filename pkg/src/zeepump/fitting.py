"""Damped least-squares fitting and the three models used by the toolkit.

The solver is a thin contract layer over scipy's trust-region
reflective least squares (Marquardt-style damping, bound constraints
for positivity).  On top of it sit the concrete models: a sum of four
Voigt lines with pairwise-shared depths, the polarization-angle depth
law d(phi), and single/double exponential recovery curves.

Fit uncertainties are the usual Jacobian-based ones: the covariance is
s^2 (J^T J)^-1 with s^2 the reduced residual sum of squares at the
optimum.  Reported errors are purely statistical; systematic effects
(e.g. when absorption is measured at the percent level) are not
captured.  Weights default to 1; for counting-noise-limited data pass
weights proportional to 1/sqrt(y).
"""

from dataclasses import dataclass, field as dc_field
import math

import numpy as np
import scipy.optimize

from .spectrum import AbsorptionSpectrum, LineShapeParams, polarization_depth, voigt_depth


class FittingError(RuntimeError):
    """Raised when a fit cannot proceed (e.g. non-finite model output)."""

    def __init__(self, message: str, parameters=None):
        super().__init__(message)
        self.parameters = None if parameters is None else np.asarray(parameters, dtype=float)


@dataclass
class FitResult:
    """Outcome of a least-squares fit.

    ``parameters`` and ``standard_errors`` are keyed by parameter name;
    ``covariance`` rows/columns follow ``parameter_names``.  ``derived``
    holds (value, error) pairs for quantities propagated from the
    covariance.  ``iterations`` counts residual evaluations.
    """

    parameter_names: list
    parameters: dict
    standard_errors: dict
    covariance: np.ndarray
    residual_norm: float
    converged: bool
    iterations: int
    message: str = ""
    derived: dict = dc_field(default_factory=dict)
    warnings: list = dc_field(default_factory=list)

    def values(self) -> np.ndarray:
        return np.array([self.parameters[n] for n in self.parameter_names])

    def to_json_dict(self) -> dict:
        return {
            "parameters": {k: float(v) for k, v in self.parameters.items()},
            "standard_errors": {k: float(v) for k, v in self.standard_errors.items()},
            "covariance": [[float(v) for v in row] for row in self.covariance],
            "parameter_order": list(self.parameter_names),
            "residual_norm": float(self.residual_norm),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "message": self.message,
            "derived": {k: {"value": float(v), "error": float(e)} for k, (v, e) in self.derived.items()},
            "warnings": list(self.warnings),
        }


def least_squares(model, data, init, bounds=None, names=None, jacobian=None,
                  max_iterations: int = 500, xtol: float = 1e-8, ftol: float = 1e-10,
                  diff_step: float = 1e-6) -> FitResult:
    """Weighted nonlinear least squares: minimize ||w (model(x, p) - y)||.

    ``data`` is (x, y) or (x, y, weights); ``init`` is a sequence or a
    name->value dict; ``bounds`` an optional (lower, upper) pair of
    vectors.  The Jacobian defaults to forward finite differences with
    the given relative step.  Hitting the iteration cap returns the best
    point with ``converged=False``; non-finite model output raises
    :class:`FittingError` with the offending parameters attached.
    """
    if len(data) == 2:
        x, y = data
        weights = None
    else:
        x, y, weights = data
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FittingError("data contains non-finite values")
    w = np.ones_like(y) if weights is None else np.sqrt(np.asarray(weights, dtype=float))

    if isinstance(init, dict):
        names = list(init.keys())
        p0 = np.array([init[n] for n in names], dtype=float)
    else:
        p0 = np.asarray(init, dtype=float)
        if names is None:
            names = [f"p{i}" for i in range(p0.size)]
    lower, upper = (-np.inf, np.inf) if bounds is None else bounds

    def residuals(p):
        out = np.asarray(model(x, p), dtype=float)
        if not np.all(np.isfinite(out)):
            raise FittingError("model returned non-finite values", parameters=p)
        return w * (out - y)

    jac = "2-point"
    if jacobian is not None:
        def jac(p):  # noqa: F811 - deliberate rebinding
            return w[:, None] * np.asarray(jacobian(x, p), dtype=float)

    res = scipy.optimize.least_squares(
        residuals, p0, jac=jac, bounds=(lower, upper), method="trf",
        xtol=xtol, ftol=ftol, gtol=1e-12, diff_step=diff_step,
        max_nfev=max_iterations * (p0.size + 1), x_scale="jac",
    )

    m, n = res.fun.size, p0.size
    jtj = res.jac.T @ res.jac
    cov_unit = np.linalg.pinv(jtj)
    s2 = (2.0 * res.cost) / (m - n) if m > n else 0.0
    cov = s2 * cov_unit
    errors = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    return FitResult(
        parameter_names=list(names),
        parameters={n_: float(v) for n_, v in zip(names, res.x)},
        standard_errors={n_: float(e) for n_, e in zip(names, errors)},
        covariance=cov,
        residual_norm=float(np.linalg.norm(res.fun)),
        converged=bool(res.status > 0),
        iterations=int(res.nfev),
        message=str(res.message),
    )


def _ratio_error(num, den, var_num, var_den, cov_nd) -> float:
    """Delta-method standard error of num/den."""
    r = num / den
    var = (var_num / num**2 + var_den / den**2 - 2.0 * cov_nd / (num * den)) * r**2
    return math.sqrt(max(var, 0.0))


# ---------------------------------------------------------------------------
# four-Voigt spectrum model
# ---------------------------------------------------------------------------

@dataclass
class FourVoigtModel:
    """Four Voigt lines with shared depths per pair and shared widths.

    Lines a and d share ``depth_ad``, lines b and c share ``depth_bc``;
    all four share the Gaussian (and optional Lorentzian) FWHM, on top
    of a constant baseline.
    """

    depth_ad: float
    depth_bc: float
    centers_ghz: tuple
    gaussian_fwhm_ghz: float
    lorentzian_fwhm_ghz: float = 0.0
    baseline: float = 0.0

    def parameter_vector(self, fit_lorentzian: bool = False) -> np.ndarray:
        p = [self.depth_ad, self.depth_bc, *self.centers_ghz, self.gaussian_fwhm_ghz]
        if fit_lorentzian:
            p.append(self.lorentzian_fwhm_ghz)
        p.append(self.baseline)
        return np.array(p, dtype=float)


FOUR_VOIGT_NAMES = ["depth_ad", "depth_bc", "center_a_ghz", "center_b_ghz",
                    "center_c_ghz", "center_d_ghz", "gaussian_fwhm_ghz"]


def four_voigt_depth(nu, p, fit_lorentzian: bool = False, lorentzian_fwhm_ghz: float = 0.0):
    """Evaluate the four-Voigt model for a packed parameter vector."""
    d_ad, d_bc = p[0], p[1]
    centers = p[2:6]
    fg = p[6]
    fl = p[7] if fit_lorentzian else lorentzian_fwhm_ghz
    baseline = p[7 + int(fit_lorentzian)]
    shape = LineShapeParams(max(fg, 1e-12), fl, 1.0)
    out = np.full_like(np.asarray(nu, dtype=float), baseline)
    for depth, center in zip((d_ad, d_bc, d_bc, d_ad), centers):
        out = out + depth * voigt_depth(nu, float(center), shape)
    return out


def estimate_four_voigt_init(spectrum: AbsorptionSpectrum, fallback_centers=None) -> FourVoigtModel:
    """Initial guess by picking the four most prominent local maxima.

    Falls back to the supplied line centers (e.g. transition-table
    predictions) when fewer than four peaks stand out.
    """
    f, d = spectrum.frequency_ghz, spectrum.depth
    baseline = float(min(np.median(d[: max(3, d.size // 20)]),
                         np.median(d[-max(3, d.size // 20):])))
    k = max(3, d.size // 200) | 1
    smooth = np.convolve(np.pad(d, k // 2, mode="edge"), np.ones(k) / k, mode="valid")
    interior = np.flatnonzero((smooth[1:-1] > smooth[:-2]) & (smooth[1:-1] >= smooth[2:])) + 1
    # keep peaks well separated, strongest first
    order = interior[np.argsort(smooth[interior])[::-1]]
    picked = []
    min_sep = max(3, f.size // 20)
    for i in order:
        if all(abs(i - j) >= min_sep for j in picked):
            picked.append(i)
        if len(picked) == 4:
            break
    if len(picked) == 4:
        centers = np.sort(f[picked])
    elif fallback_centers is not None:
        centers = np.sort(np.asarray(fallback_centers, dtype=float))
    else:
        raise FittingError("fewer than four peaks found and no fallback centers given")
    span = centers[-1] - centers[0]
    outer = float(np.interp(centers[0], f, d) + np.interp(centers[-1], f, d)) / 2 - baseline
    inner = float(np.interp(centers[1], f, d) + np.interp(centers[2], f, d)) / 2 - baseline
    return FourVoigtModel(
        depth_ad=max(outer, 1e-3),
        depth_bc=max(inner, 1e-3),
        centers_ghz=tuple(centers),
        gaussian_fwhm_ghz=max(span / 6.0, (f[-1] - f[0]) / 50.0),
        baseline=max(baseline, 0.0),
    )


def fit_four_voigt(spectrum: AbsorptionSpectrum, init: FourVoigtModel,
                   fit_lorentzian: bool = False, weights=None) -> FitResult:
    """Fit the four-Voigt model to a depth spectrum.

    Depths and widths are kept nonnegative through bound constraints.
    The derived branching ratio R = depth_ad / depth_bc is reported with
    its covariance-propagated error.
    """
    names = list(FOUR_VOIGT_NAMES)
    if fit_lorentzian:
        names.append("lorentzian_fwhm_ghz")
    names.append("baseline")
    p0 = init.parameter_vector(fit_lorentzian)

    lower = np.full(p0.size, -np.inf)
    upper = np.full(p0.size, np.inf)
    lower[[0, 1]] = 0.0                       # depths
    lower[6] = 1e-6                           # gaussian width
    if fit_lorentzian:
        lower[7] = 0.0
    lower[-1] = 0.0                           # baseline is an absorption offset
    f, d = spectrum.frequency_ghz, spectrum.depth
    lower[2:6] = f[0]
    upper[2:6] = f[-1]

    def model(nu, p):
        return four_voigt_depth(nu, p, fit_lorentzian, init.lorentzian_fwhm_ghz)

    data = (f, d) if weights is None else (f, d, weights)
    result = least_squares(model, data, np.clip(p0, lower, upper),
                           bounds=(lower, upper), names=names)

    i_ad, i_bc = 0, 1
    d_ad, d_bc = result.parameters["depth_ad"], result.parameters["depth_bc"]
    if d_bc > 0:
        err = _ratio_error(d_ad, d_bc, result.covariance[i_ad, i_ad],
                           result.covariance[i_bc, i_bc], result.covariance[i_ad, i_bc])
        result.derived["branching_ratio"] = (d_ad / d_bc, err)
    return result


# ---------------------------------------------------------------------------
# polarization-angle depth model
# ---------------------------------------------------------------------------

def polarization_model(phi_deg, p):
    """d(phi) for p = [depth_parallel, depth_perpendicular]."""
    return polarization_depth(p[0], p[1], phi_deg)


def polarization_jacobian(phi_deg, p):
    """Analytic Jacobian of :func:`polarization_model`."""
    phi = np.radians(np.asarray(phi_deg, dtype=float))
    c2 = np.cos(phi) ** 2
    s2 = np.sin(phi) ** 2
    tpar = c2 * np.exp(-p[0])
    tperp = s2 * np.exp(-p[1])
    total = tpar + tperp
    return np.stack([tpar / total, tperp / total], axis=-1)


def fit_polarization_model(angles_deg, depths, init=None, weights=None,
                           use_analytic_jacobian: bool = True) -> FitResult:
    """Fit d(phi) for the parallel and perpendicular depths.

    Needs at least two distinct angles; with exactly the 0/90 degree
    endpoints the fit returns them identically.
    """
    angles = np.asarray(angles_deg, dtype=float)
    depths = np.asarray(depths, dtype=float)
    if angles.size != depths.size:
        raise ValueError("angles and depths must have equal length")
    if np.unique(np.round(angles, 9)).size < 2:
        raise ValueError("rank-deficient data: need at least 2 distinct angles")
    if init is None:
        init = (float(depths[np.argmin(np.abs(np.cos(np.radians(angles))**2 - 1))]),
                float(depths[np.argmin(np.abs(np.sin(np.radians(angles))**2 - 1))]))
    data = (angles, depths) if weights is None else (angles, depths, weights)
    result = least_squares(
        polarization_model, data, np.clip(init, 1e-9, None),
        bounds=(np.zeros(2), np.full(2, np.inf)),
        names=["depth_parallel", "depth_perpendicular"],
        jacobian=polarization_jacobian if use_analytic_jacobian else None,
    )
    return result


# ---------------------------------------------------------------------------
# exponential recovery model
# ---------------------------------------------------------------------------

def exponential_recovery(t_ms, p):
    """y(t) = offset - sum_i amplitude_i * exp(-t / tau_i); p packs triplets after offset."""
    t = np.asarray(t_ms, dtype=float)
    y = np.full_like(t, p[0])
    for i in range((len(p) - 1) // 2):
        amp, tau = p[1 + 2 * i], p[2 + 2 * i]
        y = y - amp * np.exp(-t / tau)
    return y


def fit_exponential_recovery(delays_ms, fractions, components: int = 1,
                             init=None, weights=None) -> FitResult:
    """Fit a single or double exponential recovery curve.

    Reports the zero-delay extrapolation offset - sum(amplitudes) as a
    derived quantity, and flags a nearly degenerate pair of time
    constants (ratio < 1.5) as unidentifiable.
    """
    if components not in (1, 2):
        raise ValueError("components must be 1 or 2")
    t = np.asarray(delays_ms, dtype=float)
    y = np.asarray(fractions, dtype=float)
    if t.size < 2 * components + 1:
        raise ValueError(f"need at least {2 * components + 1} points for {components} component(s)")

    names = ["offset"]
    for i in range(components):
        names += [f"amplitude_{i + 1}", f"tau_{i + 1}_ms"]

    if init is None:
        offset0 = float(np.max(y))
        total_amp = max(offset0 - float(np.min(y)), 1e-6)
        span = float(np.max(t) - np.min(t)) or 1.0
        if components == 1:
            taus = [span / 3.0]
        else:
            taus = [span / 30.0, span / 2.0]
        p0 = [offset0]
        for tau in taus:
            p0 += [total_amp / components, tau]
        init = p0
    p0 = np.asarray(init, dtype=float)

    lower = np.zeros(p0.size)
    lower[2::2] = 1e-9           # taus strictly positive
    upper = np.full(p0.size, np.inf)
    data = (t, y) if weights is None else (t, y, weights)
    result = least_squares(exponential_recovery, data, np.clip(p0, lower, upper),
                           bounds=(lower, upper), names=names)

    # order components by increasing tau for reproducible labeling
    if components == 2:
        taus = [result.parameters["tau_1_ms"], result.parameters["tau_2_ms"]]
        if taus[0] > taus[1]:
            perm = [0, 3, 4, 1, 2]
            result.parameter_names = names
            vals = result.values()[perm]
            cov = result.covariance[np.ix_(perm, perm)]
            result.parameters = {n: float(v) for n, v in zip(names, vals)}
            result.standard_errors = {n: float(math.sqrt(max(cov[i, i], 0.0)))
                                      for i, n in enumerate(names)}
            result.covariance = cov
        tau_lo, tau_hi = sorted((result.parameters["tau_1_ms"], result.parameters["tau_2_ms"]))
        if tau_lo > 0 and tau_hi / tau_lo < 1.5:
            result.warnings.append("time constants nearly degenerate (ratio < 1.5): pair not identifiable")

    grad = np.zeros(p0.size)
    grad[0] = 1.0
    grad[1::2] = -1.0
    zero_delay = result.parameters["offset"] - sum(result.parameters[f"amplitude_{i + 1}"]
                                                   for i in range(components))
    var = float(grad @ result.covariance @ grad)
    result.derived["zero_delay_value"] = (zero_delay, math.sqrt(max(var, 0.0)))
    return result
