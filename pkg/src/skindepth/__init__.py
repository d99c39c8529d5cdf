"""Nonlocal optical response of metals, exact surface impedances and Casimir forces."""

from .dielectric import (
    DielectricPair,
    boltzmann_imag,
    boltzmann_real,
    drude_local,
    evaluate,
    lindhard_real,
)
from .errors import (
    BranchCutError,
    DomainError,
    NotFoundError,
    ParseError,
    PoleError,
    SkinDepthError,
    UnsupportedError,
)
from .force import (
    CorrectionResult,
    ForceResult,
    force_plate_plate,
    force_sphere_plate,
    ideal_force,
    nonlocal_correction,
    reduction_factor,
)
from .impedance import (
    ImpedancePair,
    asymptotic_FG,
    leontovich,
    local_pair,
    low_freq_impedances,
    nonlocal_pair_imag,
    nonlocal_pair_real,
)
from .materials import (
    ChiTable,
    MaterialParams,
    ResponsePoint,
    load_chi_table,
    penetration_depth,
    preset,
    to_dimensionless,
)
from .optics import ReflectionPair, absorptance, absorptance_sweep, reflection_imag, reflection_real
from .quadrature import IntegralResult, IntegralSpec, brute_force_oracle, integrate_2d, integrate_adaptive

__version__ = "0.1.0"
