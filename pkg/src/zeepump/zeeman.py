"""Effective spin-1/2 Zeeman model for a single Kramers doublet.

A Kramers doublet in an axial crystal field responds linearly to a
magnetic field.  Its splitting and state mixing follow from the 2x2
effective Hamiltonian

    H = muB * B * (g_par cos(theta) Sz + g_perp sin(theta) Sx),

written here directly in frequency units (GHz).  The field lies in the
x-z plane, with the crystal c-axis along z and theta the polar angle of
the field.  The two rows/columns of H refer to the effective spin
projections {+1/2, -1/2}; `spin_up_index` selects where the +1/2
projection sits in the field-free doublet basis, which differs between
doublets (see :mod:`zeepump.branching`).
"""

from dataclasses import dataclass, field as dc_field
import math

import numpy as np

from .constants import BOHR_MAGNETON_GHZ_PER_T

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class GTensor:
    """Principal values of an axial g-tensor, signed.

    g_parallel is the response along the crystal c-axis, g_perpendicular
    in the basal plane.  The doublets modeled here have negative g
    values; the sign convention fixes the level ordering at theta=0.
    """

    g_parallel: float
    g_perpendicular: float

    def __post_init__(self):
        for name in ("g_parallel", "g_perpendicular"):
            v = getattr(self, name)
            if not math.isfinite(v) or v == 0.0:
                raise ValueError(f"GTensor.{name} must be finite and nonzero, got {v!r}")

    @classmethod
    def from_magnitudes(cls, g_parallel: float, g_perpendicular: float) -> "GTensor":
        """Build a tensor from magnitudes, applying the negative-sign convention."""
        return cls(-abs(g_parallel), -abs(g_perpendicular))


@dataclass(frozen=True)
class FieldConfig:
    """Static magnetic field: magnitude and orientation.

    The field is restricted to the plane containing the c-axis
    (azimuth 0 by default); the azimuth slot is reserved but the
    branching-ratio formulas downstream assume the coplanar case.
    """

    magnitude_tesla: float
    theta_deg: float
    azimuth_deg: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.magnitude_tesla) or self.magnitude_tesla < 0.0:
            raise ValueError(f"field magnitude must be finite and >= 0, got {self.magnitude_tesla!r}")
        if not (0.0 <= self.theta_deg <= 90.0):
            raise ValueError(f"theta_deg must lie in [0, 90], got {self.theta_deg!r}")
        if not math.isfinite(self.azimuth_deg):
            raise ValueError("azimuth_deg must be finite")


@dataclass(frozen=True, eq=False)
class DoubletEigensystem:
    """Zeeman eigenstates of one doublet under a given field.

    Energies are in GHz, symmetric about zero.  ``coeff_low`` and
    ``coeff_high`` hold the eigenvector components in the field-free
    doublet basis; each is unit-normalized and phase-fixed so that its
    first nonzero component is real and >= 0.
    """

    energy_low_ghz: float
    energy_high_ghz: float
    coeff_low: np.ndarray
    coeff_high: np.ndarray
    field: FieldConfig
    spin_up_index: int = 0

    @property
    def splitting_ghz(self) -> float:
        return self.energy_high_ghz - self.energy_low_ghz


def effective_g(g: GTensor, theta_deg: float) -> float:
    """Effective g magnitude sqrt((g_par cos)^2 + (g_perp sin)^2) at angle theta."""
    if not (0.0 <= theta_deg <= 90.0):
        raise ValueError(f"theta_deg must lie in [0, 90], got {theta_deg!r}")
    t = math.radians(theta_deg)
    return math.hypot(g.g_parallel * math.cos(t), g.g_perpendicular * math.sin(t))


def hamiltonian_ghz(g: GTensor, field: FieldConfig, spin_up_index: int = 0) -> np.ndarray:
    """2x2 Zeeman Hamiltonian in GHz, in the field-free doublet basis.

    With ``spin_up_index=1`` the basis order is swapped relative to the
    effective-spin projections, as required for doublets whose +1/2
    projection maps onto the second field-free basis state.
    """
    if spin_up_index not in (0, 1):
        raise ValueError("spin_up_index must be 0 or 1")
    t = math.radians(field.theta_deg)
    ph = math.radians(field.azimuth_deg)
    scale = 0.5 * BOHR_MAGNETON_GHZ_PER_T * field.magnitude_tesla
    diag = scale * g.g_parallel * math.cos(t)
    off = scale * g.g_perpendicular * math.sin(t) * complex(math.cos(ph), -math.sin(ph))
    h = np.array([[diag, off], [np.conj(off), -diag]], dtype=complex)
    if spin_up_index == 1:
        h = h[::-1, ::-1]
    return h


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate a global phase so the first nonzero component is real and >= 0."""
    for comp in v:
        if abs(comp) > 1e-14:
            v = v * (np.conj(comp) / abs(comp))
            break
    # scrub signed zeros / residual imaginary dust for reproducibility
    v = np.where(np.abs(v.real) < 1e-300, 0.0, v.real) + 1j * np.where(np.abs(v.imag) < 1e-15, 0.0, v.imag)
    return v


def doublet_eigensystem(g: GTensor, field: FieldConfig, spin_up_index: int = 0) -> DoubletEigensystem:
    """Diagonalize the effective Zeeman Hamiltonian of one doublet.

    Returns energies (GHz) and the mixing coefficients of the low/high
    eigenstates in the field-free basis.  At zero field the doublet is
    degenerate; by convention the splitting is zero and the field-free
    basis states are returned as eigenvectors.
    """
    if field.magnitude_tesla == 0.0:
        return DoubletEigensystem(
            energy_low_ghz=0.0,
            energy_high_ghz=0.0,
            coeff_low=np.array([1.0 + 0j, 0.0 + 0j]),
            coeff_high=np.array([0.0 + 0j, 1.0 + 0j]),
            field=field,
            spin_up_index=spin_up_index,
        )
    h = hamiltonian_ghz(g, field, spin_up_index)
    energies, vectors = np.linalg.eigh(h)
    low = _fix_phase(vectors[:, 0])
    high = _fix_phase(vectors[:, 1])
    return DoubletEigensystem(
        energy_low_ghz=float(energies[0]),
        energy_high_ghz=float(energies[1]),
        coeff_low=low,
        coeff_high=high,
        field=field,
        spin_up_index=spin_up_index,
    )


def zeeman_splitting(g: GTensor, field: FieldConfig) -> float:
    """Doublet splitting in GHz; equals muB * B * effective_g."""
    return doublet_eigensystem(g, field).splitting_ghz
