"""Reflection amplitudes, reflectance and absorptance from surface impedances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dielectric import eps_local
from .errors import DomainError, PoleError
from .impedance import ImpedancePair, impedances_real, local_pair, DEFAULT_TOL
from .materials import MaterialParams, ResponsePoint


@dataclass(frozen=True)
class ReflectionPair:
    r_s: complex
    r_p: complex
    point: ResponsePoint
    model: str


def reflection_coefficients_real(Omega, Q, z_s, omega_z_p):
    """Vectorised real-axis ``(r_s, r_p)``; evanescent sites use the continued root."""
    Omega = np.asarray(Omega, dtype=float)
    root = np.sqrt((Omega * Omega - np.asarray(Q, dtype=float) ** 2).astype(complex))
    root = np.where(root.imag < 0, -root, root)
    zr = z_s * root
    den_s = Omega + zr
    den_p = root + omega_z_p
    if np.any(den_s == 0) or np.any(den_p == 0):
        raise PoleError("reflection denominator vanishes")
    return (Omega - zr) / den_s, (root - omega_z_p) / den_p


def reflection_real(point: ResponsePoint, z: ImpedancePair) -> ReflectionPair:
    """``r_s = (1 - Z_s cos) / (1 + Z_s cos)``, ``r_p = (cos - Z_p) / (cos + Z_p)``."""
    if point.axis != "real":
        raise DomainError("reflection_real needs a real-axis point")
    rs, rp = reflection_coefficients_real(point.Omega, point.Q, z.z_s, z.omega_z_p)
    return ReflectionPair(complex(rs), complex(rp), point, z.model)


def reflection_coefficients_imag(Omega, Q, z_s, omega_z_p):
    """Vectorised imaginary-axis ``(r_s, r_p)`` from ``Z_s`` and ``Omega Z_p``."""
    Omega = np.asarray(Omega, dtype=float)
    K = np.hypot(Omega, Q)
    kz = K * z_s
    return (Omega - kz) / (Omega + kz), (K - omega_z_p) / (K + omega_z_p)


def reflection_imag(point: ResponsePoint, z: ImpedancePair) -> ReflectionPair:
    """Reflection amplitudes at imaginary frequency; both are real."""
    if point.axis != "imaginary":
        raise DomainError("reflection_imag needs an imaginary-axis point")
    if point.Omega <= 0 and point.Q <= 0:
        raise DomainError("Omega and Q cannot both vanish")
    rs, rp = reflection_coefficients_imag(point.Omega, point.Q, np.real(z.z_s),
                                          np.real(z.omega_z_p))
    return ReflectionPair(float(rs), float(rp), point, z.model)


def absorptance(r: ReflectionPair):
    """``(A_s, A_p)`` with ``A = 1 - |r|^2``."""
    return 1.0 - abs(r.r_s) ** 2, 1.0 - abs(r.r_p) ** 2


SWEEP_COLUMNS = ("omega_dimensionless", "Q", "A_s_local", "A_s_nonlocal",
                 "A_p_local", "A_p_nonlocal")


@dataclass(frozen=True)
class SweepTable:
    columns: tuple
    rows: np.ndarray
    converged: np.ndarray
    model: str

    def column(self, name):
        return self.rows[:, self.columns.index(name)]


def absorptance_sweep(m: MaterialParams, theta_deg: float, omegas, model="boltzmann", *,
                      k_f=None, rel_tol=DEFAULT_TOL) -> SweepTable:
    """Local and nonlocal absorptance along ``Q = Omega sin(theta)``."""
    if not 0.0 <= theta_deg < 90.0:
        raise DomainError("incidence angle must lie in [0, 90) degrees")
    omegas = np.asarray(omegas, dtype=float)
    if omegas.ndim != 1 or omegas.size == 0 or np.any(omegas <= 0):
        raise DomainError("frequency grid must be a non-empty 1-D array of positive values")
    if np.any(np.diff(omegas) <= 0):
        raise DomainError("frequency grid must be sorted")
    Q = omegas * np.sin(np.radians(theta_deg))
    eps = eps_local(omegas, m, "real")
    loc = [local_pair(ResponsePoint(o, q, "real"), complex(e)) for o, q, e in zip(omegas, Q, eps)]
    rs_l, rp_l = reflection_coefficients_real(
        omegas, Q, np.array([p.z_s for p in loc]), np.array([p.omega_z_p for p in loc]))
    b = impedances_real(omegas, Q, m, model, k_f=k_f, rel_tol=rel_tol)
    rs_n, rp_n = reflection_coefficients_real(omegas, Q, b.z_s, b.omega_z_p)
    rows = np.column_stack([
        omegas, Q,
        1.0 - np.abs(rs_l) ** 2, 1.0 - np.abs(rs_n) ** 2,
        1.0 - np.abs(rp_l) ** 2, 1.0 - np.abs(rp_n) ** 2,
    ])
    return SweepTable(SWEEP_COLUMNS, rows, np.asarray(b.converged), model)
