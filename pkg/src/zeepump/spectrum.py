"""Absorption-depth spectra of the four Zeeman lines.

Lines are Voigt-shaped (Gaussian inhomogeneous times Lorentzian
homogeneous) and parameterized by their *peak* absorption depth.  Light
polarized at angle phi to the c-axis sees an effective depth

    d(phi) = -ln( cos^2(phi) e^(-d_par) + sin^2(phi) e^(-d_perp) ),

because the two orthogonal polarization modes propagate independently
and only the total intensity is detected; the birefringent phase drops
out.  Transmitted intensity follows I = I0 exp(-d).
"""

from dataclasses import dataclass, field as dc_field
import json
import math

import numpy as np
from scipy.special import erfcx, wofz

from .branching import TransitionTable

_SQRT_8LN2 = math.sqrt(8.0 * math.log(2.0))


@dataclass(frozen=True)
class LineShapeParams:
    """Voigt line shape: component FWHMs (GHz) and peak absorption depth."""

    gaussian_fwhm_ghz: float
    lorentzian_fwhm_ghz: float = 0.0
    peak_depth: float = 1.0

    def __post_init__(self):
        if self.gaussian_fwhm_ghz < 0 or self.lorentzian_fwhm_ghz < 0:
            raise ValueError("line widths must be >= 0")
        if self.gaussian_fwhm_ghz == 0 and self.lorentzian_fwhm_ghz == 0:
            raise ValueError("at least one line width must be nonzero")
        if self.peak_depth < 0 or not math.isfinite(self.peak_depth):
            raise ValueError("peak_depth must be finite and >= 0")


@dataclass(frozen=True, eq=False)
class AbsorptionSpectrum:
    """Absorption depth sampled on a strictly increasing frequency grid (GHz)."""

    frequency_ghz: np.ndarray
    depth: np.ndarray
    metadata: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        f = np.asarray(self.frequency_ghz, dtype=float)
        d = np.asarray(self.depth, dtype=float)
        if f.ndim != 1 or f.shape != d.shape:
            raise ValueError("frequency grid and depth must be 1-d arrays of equal length")
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        if not np.all(np.isfinite(d)):
            raise ValueError("depths must be finite")
        if np.any(d < 0):
            raise ValueError("depths must be >= 0")
        object.__setattr__(self, "frequency_ghz", f)
        object.__setattr__(self, "depth", d)

    def to_csv(self, path, float_format: str = ".10g") -> None:
        with open(path, "w", newline="") as fh:
            fh.write("frequency_ghz,depth\n")
            for f, d in zip(self.frequency_ghz, self.depth):
                fh.write(f"{f:{float_format}},{d:{float_format}}\n")

    def write_metadata(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_csv(cls, path, metadata=None) -> "AbsorptionSpectrum":
        data = np.genfromtxt(path, delimiter=",", names=True)
        if data.dtype.names is None or len(data.dtype.names) < 2:
            raise ValueError(f"{path}: expected CSV with header columns frequency_ghz,depth")
        names = data.dtype.names
        return cls(frequency_ghz=np.atleast_1d(data[names[0]]),
                   depth=np.atleast_1d(data[names[1]]),
                   metadata=metadata or {})


def voigt_depth(nu, center: float, params: LineShapeParams):
    """Voigt absorption depth at nu (GHz), normalized to peak_depth at center.

    Evaluated through the Faddeeva function Re[w((x + i*gamma)/(sigma
    sqrt(2)))], with exact Gaussian/Lorentzian limits when one width is
    zero.  Accepts scalars or arrays.
    """
    nu = np.asarray(nu, dtype=float)
    delta = nu - center
    fg, fl = params.gaussian_fwhm_ghz, params.lorentzian_fwhm_ghz
    if fg == 0.0:
        hwhm = fl / 2.0
        out = params.peak_depth * hwhm**2 / (delta**2 + hwhm**2)
    elif fl == 0.0:
        out = params.peak_depth * np.exp(-4.0 * math.log(2.0) * (delta / fg) ** 2)
    else:
        sigma = fg / _SQRT_8LN2
        gamma = fl / 2.0
        z = (delta + 1j * gamma) / (sigma * math.sqrt(2.0))
        peak = erfcx(gamma / (sigma * math.sqrt(2.0)))
        out = params.peak_depth * wofz(z).real / peak
    return out if out.ndim else float(out)


def polarization_depth(d_parallel, d_perpendicular, phi_deg):
    """Effective depth seen by light polarized at phi (deg) to the c-axis.

    Exact at the endpoints (phi=0 gives d_parallel, phi=90 gives
    d_perpendicular), periodic with 180 deg, and bounded by the two
    input depths.  Accepts scalars or broadcastable arrays.
    """
    d_par = np.asarray(d_parallel, dtype=float)
    d_perp = np.asarray(d_perpendicular, dtype=float)
    if np.any(d_par < 0) or np.any(d_perp < 0):
        raise ValueError("depths must be >= 0")
    phi = np.radians(np.asarray(phi_deg, dtype=float))
    with np.errstate(divide="ignore"):
        log_c2 = 2.0 * np.log(np.abs(np.cos(phi)))
        log_s2 = 2.0 * np.log(np.abs(np.sin(phi)))
    out = -np.logaddexp(log_c2 - d_par, log_s2 - d_perp)
    return out if out.ndim else float(out)


def synthesize_four_lines(centers_ghz, depths_pi, depths_sigma, shape: LineShapeParams,
                          phi_deg: float, grid_ghz, baseline: float = 0.0,
                          metadata=None) -> AbsorptionSpectrum:
    """Spectrum of four lines with explicit per-line peak depths.

    The pi and sigma depth profiles are accumulated separately, then
    combined with :func:`polarization_depth`; an optional constant
    baseline models background absorption.
    """
    grid = np.asarray(grid_ghz, dtype=float)
    d_pi = np.zeros_like(grid)
    d_sigma = np.zeros_like(grid)
    unit = LineShapeParams(shape.gaussian_fwhm_ghz, shape.lorentzian_fwhm_ghz, 1.0)
    for center, dp, ds in zip(centers_ghz, depths_pi, depths_sigma):
        profile = voigt_depth(grid, float(center), unit)
        d_pi += dp * profile
        d_sigma += ds * profile
    depth = polarization_depth(d_pi, d_sigma, phi_deg) + baseline
    meta = {"phi_deg": float(phi_deg), "baseline": float(baseline),
            "gaussian_fwhm_ghz": shape.gaussian_fwhm_ghz,
            "lorentzian_fwhm_ghz": shape.lorentzian_fwhm_ghz}
    meta.update(metadata or {})
    return AbsorptionSpectrum(frequency_ghz=grid, depth=depth, metadata=meta)


def synthesize_spectrum(table: TransitionTable, shape: LineShapeParams,
                        total_depth_pi: float, total_depth_sigma: float,
                        phi_deg: float, grid_ghz, baseline: float = 0.0,
                        metadata=None) -> AbsorptionSpectrum:
    """Spectrum of the four Lambda-system lines.

    Per-line peak depths are the table strengths scaled by the depth
    budget of each polarization.  The preserving and flipping strengths
    originating from one level sum to 1, so ``total_depth_pi`` is the
    combined pi peak depth of one preserving + one flipping line.
    """
    if total_depth_pi < 0 or total_depth_sigma < 0:
        raise ValueError("total depths must be >= 0")
    return synthesize_four_lines(
        centers_ghz=table.offsets_ghz,
        depths_pi=table.strengths_pi * total_depth_pi,
        depths_sigma=table.strengths_sigma * total_depth_sigma,
        shape=shape, phi_deg=phi_deg, grid_ghz=grid_ghz, baseline=baseline,
        metadata=metadata,
    )


def transmission(spectrum: AbsorptionSpectrum, input_intensity: float) -> np.ndarray:
    """Transmitted intensity I0 * exp(-d) on the spectrum's grid."""
    if input_intensity <= 0:
        raise ValueError("input_intensity must be > 0")
    return input_intensity * np.exp(-spectrum.depth)


def count_peaks(spectrum: AbsorptionSpectrum, min_depth: float = 1e-6) -> int:
    """Number of strict local maxima above min_depth (resolvable peaks)."""
    d = spectrum.depth
    interior = (d[1:-1] > d[:-2]) & (d[1:-1] > d[2:]) & (d[1:-1] > min_depth)
    return int(np.count_nonzero(interior))
