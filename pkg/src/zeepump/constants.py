"""Physical constants and default material parameters.

All energies are expressed in frequency units (GHz); magnetic fields in
tesla.  The Bohr magneton enters every splitting through the fixed
conversion factor below.
"""

# Bohr magneton over Planck constant, GHz per tesla.
BOHR_MAGNETON_GHZ_PER_T = 13.99624

# Measured g-factors of the two Kramers doublets connected by the
# 879 nm transition of Nd3+:YVO4 (signed, negative convention).
# Ground doublet of the 4I9/2 multiplet:
GROUND_G_PARALLEL = -0.915
GROUND_G_PERPENDICULAR = -2.361
# Lowest doublet of the 4F3/2 multiplet:
EXCITED_G_PARALLEL = -1.13
EXCITED_G_PERPENDICULAR = -0.28
