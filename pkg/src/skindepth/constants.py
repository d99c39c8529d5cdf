"""Physical constants (CODATA via scipy) and unit factors used across the package."""

from scipy import constants as _codata

HBAR = _codata.hbar  # J s
C = _codata.c  # m/s
K_B = _codata.k  # J/K

NM = 1e-9  # m
CM_PER_S = 1e-2  # m/s
