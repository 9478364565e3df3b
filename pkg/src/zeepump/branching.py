"""Four-line Lambda system from two Zeeman-split doublets.

Splitting the ground and excited doublets produces four optical
transitions, labeled a..d by increasing frequency offset.  The field
orientation mixes each doublet's basis states; the mixing coefficients
(alpha, beta) of the ground doublet and (gamma, delta) of the excited
doublet determine the relative transition strengths for light polarized
parallel (pi) or perpendicular (sigma) to the c-axis:

    spin-preserving:  |alpha* delta + beta* gamma|^2   (pi)
                      |alpha* gamma - beta* delta|^2   (sigma)
    spin-flipping:    |alpha gamma - beta delta|^2     (pi)
                      |beta gamma + alpha delta|^2     (sigma)

The branching ratios R_par and R_perp are the flip/preserve strength
ratios per polarization.  In the coplanar-field case all coefficients
are real and R_par * R_perp = 1.

Basis bookkeeping: the effective-spin +1/2 projection is the *first*
field-free basis state of the ground doublet but the *second* one of
the excited doublet (the crystal-field quantum numbers of the two
doublets map onto the effective spin with opposite order).  Use
:func:`ground_eigensystem` / :func:`excited_eigensystem` to build the
inputs with the correct mapping.
"""

from dataclasses import dataclass
import math

import numpy as np

from .zeeman import DoubletEigensystem, FieldConfig, GTensor, doublet_eigensystem

# Where the effective-spin +1/2 projection sits in each doublet's
# field-free basis (index into the coefficient pairs).
GROUND_SPIN_UP_INDEX = 0
EXCITED_SPIN_UP_INDEX = 1

# A strength denominator below this is reported as an infinite ratio.
_DIVERGENCE_TOL = 1e-15

_NORM_TOL = 1e-12


def ground_eigensystem(g: GTensor, field: FieldConfig) -> DoubletEigensystem:
    return doublet_eigensystem(g, field, spin_up_index=GROUND_SPIN_UP_INDEX)


def excited_eigensystem(g: GTensor, field: FieldConfig) -> DoubletEigensystem:
    return doublet_eigensystem(g, field, spin_up_index=EXCITED_SPIN_UP_INDEX)


@dataclass(frozen=True)
class LambdaCoefficients:
    """Mixing coefficients of the two doublets at a common field.

    (alpha, beta): ground low-energy eigenstate; (gamma, delta): excited
    low-energy eigenstate, both in their field-free bases.  Each pair is
    unit normalized; in the coplanar-field case all four are real.
    """

    alpha: complex
    beta: complex
    gamma: complex
    delta: complex

    def __post_init__(self):
        for pair, n in ((("alpha", "beta"), abs(self.alpha) ** 2 + abs(self.beta) ** 2),
                        (("gamma", "delta"), abs(self.gamma) ** 2 + abs(self.delta) ** 2)):
            if abs(n - 1.0) > 1e-9:
                raise ValueError(f"({pair[0]}, {pair[1]}) must have unit norm, got {n!r}")

    @property
    def is_real(self) -> bool:
        return all(abs(c.imag) < _NORM_TOL for c in (self.alpha, self.beta, self.gamma, self.delta))


@dataclass(frozen=True)
class BranchingResult:
    """Spin-flip over spin-preserving strength ratios per polarization."""

    r_parallel: float
    r_perpendicular: float

    @property
    def r_parallel_infinite(self) -> bool:
        return math.isinf(self.r_parallel)

    @property
    def r_perpendicular_infinite(self) -> bool:
        return math.isinf(self.r_perpendicular)


@dataclass(frozen=True)
class Transition:
    """One optical line: offset from the zero-field center and relative strengths."""

    label: str
    offset_ghz: float
    strength_pi: float
    strength_sigma: float
    spin_flip: bool


@dataclass(frozen=True)
class TransitionTable:
    """The four Lambda-system lines a..d, ordered by increasing offset.

    Strengths are normalized per polarization so the four lines sum
    to 2 (one unit per initial level); the sum is independent of the
    field angle.  The outer pair a, d is spin-flipping, the inner pair
    b, c spin-preserving.
    """

    transitions: tuple

    def __post_init__(self):
        labels = [t.label for t in self.transitions]
        if labels != ["a", "b", "c", "d"]:
            raise ValueError(f"expected labels a..d, got {labels}")
        offs = [t.offset_ghz for t in self.transitions]
        if any(o2 < o1 for o1, o2 in zip(offs, offs[1:])):
            raise ValueError("offsets must be non-decreasing from a to d")

    def __getitem__(self, label: str) -> Transition:
        for t in self.transitions:
            if t.label == label:
                return t
        raise KeyError(label)

    @property
    def offsets_ghz(self) -> np.ndarray:
        return np.array([t.offset_ghz for t in self.transitions])

    @property
    def strengths_pi(self) -> np.ndarray:
        return np.array([t.strength_pi for t in self.transitions])

    @property
    def strengths_sigma(self) -> np.ndarray:
        return np.array([t.strength_sigma for t in self.transitions])


def lambda_coefficients(ground: DoubletEigensystem, excited: DoubletEigensystem) -> LambdaCoefficients:
    """Collect the low-state mixing coefficients of both doublets.

    Both eigensystems must have been computed at the same field and with
    the module's basis mapping (ground spin-up first, excited spin-up
    second); anything else is a usage error.
    """
    if ground.field != excited.field:
        raise ValueError(f"eigensystems computed at different fields: {ground.field} vs {excited.field}")
    if ground.spin_up_index != GROUND_SPIN_UP_INDEX or excited.spin_up_index != EXCITED_SPIN_UP_INDEX:
        raise ValueError(
            "basis mapping mismatch: build inputs with ground_eigensystem()/excited_eigensystem()"
        )
    a, b = ground.coeff_low
    c, d = excited.coeff_low
    return LambdaCoefficients(alpha=complex(a), beta=complex(b), gamma=complex(c), delta=complex(d))


def lambda_system(ground_g: GTensor, excited_g: GTensor, field: FieldConfig) -> LambdaCoefficients:
    """One-shot helper: diagonalize both doublets and collect coefficients."""
    return lambda_coefficients(ground_eigensystem(ground_g, field), excited_eigensystem(excited_g, field))


def _strengths(coeffs: LambdaCoefficients):
    a, b, c, d = coeffs.alpha, coeffs.beta, coeffs.gamma, coeffs.delta
    preserve_pi = abs(np.conj(a) * d + np.conj(b) * c) ** 2
    flip_pi = abs(a * c - b * d) ** 2
    preserve_sigma = abs(np.conj(a) * c - np.conj(b) * d) ** 2
    flip_sigma = abs(b * c + a * d) ** 2
    return preserve_pi, flip_pi, preserve_sigma, flip_sigma


def branching_ratios(coeffs: LambdaCoefficients) -> BranchingResult:
    """Branching ratios R_par, R_perp; a vanishing denominator gives inf."""
    preserve_pi, flip_pi, preserve_sigma, flip_sigma = _strengths(coeffs)
    r_par = flip_pi / preserve_pi if preserve_pi >= _DIVERGENCE_TOL else math.inf
    r_perp = flip_sigma / preserve_sigma if preserve_sigma >= _DIVERGENCE_TOL else math.inf
    return BranchingResult(r_parallel=r_par, r_perpendicular=r_perp)


def transition_table(coeffs: LambdaCoefficients, ground_split_ghz: float,
                     excited_split_ghz: float) -> TransitionTable:
    """Offsets and relative strengths of the four lines.

    Spin-preserving lines sit at +-(ground - excited)/2, spin-flipping
    lines at +-(ground + excited)/2.  Strengths are normalized per
    polarization to a total of 2.
    """
    if ground_split_ghz < 0 or excited_split_ghz < 0:
        raise ValueError("splittings must be >= 0")
    preserve_pi, flip_pi, preserve_sigma, flip_sigma = _strengths(coeffs)
    tot_pi = preserve_pi + flip_pi
    tot_sigma = preserve_sigma + flip_sigma
    if tot_pi <= 0 or tot_sigma <= 0:
        raise ValueError("degenerate coefficients: zero total strength")
    preserve_pi, flip_pi = preserve_pi / tot_pi, flip_pi / tot_pi
    preserve_sigma, flip_sigma = preserve_sigma / tot_sigma, flip_sigma / tot_sigma

    inner = abs(ground_split_ghz - excited_split_ghz) / 2.0
    outer = (ground_split_ghz + excited_split_ghz) / 2.0
    return TransitionTable(transitions=(
        Transition("a", -outer, flip_pi, flip_sigma, spin_flip=True),
        Transition("b", -inner, preserve_pi, preserve_sigma, spin_flip=False),
        Transition("c", +inner, preserve_pi, preserve_sigma, spin_flip=False),
        Transition("d", +outer, flip_pi, flip_sigma, spin_flip=True),
    ))


def _fold_angle(theta_deg: float) -> float:
    """Fold an angle into [0, 90] by reflection (axial symmetry)."""
    t = abs(theta_deg) % 180.0
    return 180.0 - t if t > 90.0 else t


def branching_scan(ground_g: GTensor, excited_g: GTensor, field_tesla: float,
                   theta_grid, misalignment_deg: float = 0.0):
    """R_par and R_perp over a list of field angles (degrees).

    ``misalignment_deg`` offsets every nominal angle before evaluation,
    to model an imperfectly aligned field without committing to any
    particular explanation of residual strength at theta=0.
    """
    rows = []
    for theta in theta_grid:
        eff = _fold_angle(float(theta) + misalignment_deg)
        field = FieldConfig(magnitude_tesla=field_tesla, theta_deg=eff)
        res = branching_ratios(lambda_system(ground_g, excited_g, field))
        rows.append((float(theta), res.r_parallel, res.r_perpendicular))
    return rows


def optimal_angle(ground_g: GTensor, excited_g: GTensor, field_tesla: float,
                  resolution_deg: float = 0.5):
    """Angle in [0, 90] maximizing R_par, by grid search plus golden-section refinement."""
    if resolution_deg <= 0:
        raise ValueError("resolution_deg must be > 0")

    def r_par(theta: float) -> float:
        field = FieldConfig(magnitude_tesla=field_tesla, theta_deg=theta)
        return branching_ratios(lambda_system(ground_g, excited_g, field)).r_parallel

    grid = np.arange(0.0, 90.0 + resolution_deg / 2, resolution_deg)
    grid[-1] = min(grid[-1], 90.0)
    values = [r_par(t) for t in grid]
    i = int(np.argmax(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if hi <= lo:
        return float(grid[i]), float(values[i])

    # golden-section search on [lo, hi]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = r_par(x1), r_par(x2)
    while hi - lo > 1e-6:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = r_par(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = r_par(x1)
    best_theta = (lo + hi) / 2.0
    best = r_par(best_theta)
    # the refinement never returns worse than the grid point
    if best < values[i]:
        return float(grid[i]), float(values[i])
    return float(best_theta), float(best)
