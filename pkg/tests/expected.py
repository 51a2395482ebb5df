"""Reference numbers derived by hand (plain arithmetic, no package code).

hbar c = 0.197327 eV um, L = 0.266 um, n = 3.5, lambda = 0.96 um, pitch = 5 um.
"""
import math

HBAR_C = 0.197327
KZ = 2 * math.pi / 0.266  # 23.620997 1/um
M0C2 = 3.5 * HBAR_C * KZ  # 16.313712 eV
REST = HBAR_C * KZ / 3.5  # 1.3317316 eV, band bottom of the empty lattice

# phase-only grid, dphi = 0.01: U_grid = hbar c dphi / (2 L n)
U_GRID_FIG3 = 1.0597583243823845e-3
V0_FIG3 = 0.5 * U_GRID_FIG3  # area weighting at FF = 1/2

# |R_pixel| = 0.999: |U_pixel| = hbar c |ln 0.999| / (2 L n)
B0_FIG4 = 1.0602885570625032e-4
# ln-reflectivity contrast of 0.01 on top of it gives the grid-limited broadening
B_GRID_FIG4 = HBAR_C * (abs(math.log(0.999)) + 0.01) / (2 * 0.266 * 3.5)

# empty-lattice offsets at Z and T: (hbar c pi / pitch)^2 / (2 m0c2) and twice that
Z_OFFSET = 4.711400007017339e-4
T_OFFSET = 2 * Z_OFFSET

# FF = 1/2, G = (2 pi / pitch, 0): V_G / (U_pixel - U_grid) = sinc(pi / sqrt 2) / 2
SINC_HALF = 0.179093893006622

XI = 0.96 / (2 * 5.0 * 3.5)  # 0.0274286
BOUND_MIRROR_HALF = 4 * math.pi * XI**2 / 0.5  # 1.8908e-2
XI_HOLEY = 1.5 * (0.02 / 1.0 + 0.98 / 1.5) / (2 * 2.5)  # 0.202

# reproduction targets
FIG3_GAP = 1.0e-4  # eV, one significant figure
FIG5_WINDOW = (0.16, 0.66)
