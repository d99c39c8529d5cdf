"""Zero-temperature Lifshitz force between a metal plate and a plate or a sphere.

Both geometries reduce to double integrals over the imaginary frequency
``Omega`` (outer) and the tangential wave number ``Q`` (inner) with the
kernel ``exp(-2 d K)``, ``K = sqrt(Omega^2 + Q^2)`` and ``d = a/delta``.
The domain is cut at ``K = 40/d`` where the kernel has dropped below
``exp(-80)`` of its peak.

The nonlocal correction is integrated from the pointwise difference between
the nonlocal and local integrands, so it carries relative accuracy of its
own instead of inheriting it from two nearly equal forces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .constants import HBAR, C, K_B, NM
from .dielectric import eps_local
from .errors import DomainError
from .impedance import DEFAULT_TOL, impedances_imag, local_impedances_imag
from .materials import MaterialParams
from .quadrature import integrate_batch

GEOMETRIES = ("plate_plate", "sphere_plate")
FORCE_MODELS = ("local", "boltzmann")
OVERRIDES = ("none", "perfect-conductor", "transparent", "local-f")
K_MAX_D = 40.0
FORCE_TOL = 1e-4
CORRECTION_TOL = 1e-2
# sphere-plate results are flagged once R/a drops below this
PFA_MIN_RATIO = 10.0


@dataclass(frozen=True)
class ForceResult:
    """Pressure (Pa, plate-plate) or force (N, sphere-plate) at separation ``a_nm``."""

    geometry: str
    a_nm: float
    value: float
    value_s: float
    value_p: float
    error: float
    model: str
    converged: bool = True
    radius_nm: Optional[float] = None
    pfa_ok: Optional[bool] = None
    failures: tuple = ()


@dataclass(frozen=True)
class CorrectionResult:
    """Nonlocal correction ``F_nonlocal - F_local``.

    ``delta`` is the absolute change in SI units.  The relative entries are
    divided by the local force, so a weakened attraction gives negative
    numbers; ``relative_s + relative_p == relative``.
    """

    geometry: str
    a_nm: float
    delta: float
    relative: float
    relative_s: float
    relative_p: float
    error_relative: float
    force_local: float
    converged: bool = True
    radius_nm: Optional[float] = None
    pfa_ok: Optional[bool] = None
    failures: tuple = field(default=())


def ideal_force(a_nm):
    """Ideal-metal pressure ``-pi^2 hbar c / (240 a^4)`` in Pa."""
    a = np.asarray(a_nm, dtype=float)
    if np.any(a <= 0):
        raise DomainError("separation must be positive")
    p = -np.pi ** 2 * HBAR * C / (240.0 * (a * NM) ** 4)
    return float(p) if p.ndim == 0 else p


def ideal_sphere_plate(a_nm, radius_nm):
    """Proximity-force ideal-metal force ``-pi^3 hbar c R / (360 a^3)`` in N."""
    if a_nm <= 0 or radius_nm <= 0:
        raise DomainError("separation and radius must be positive")
    return -np.pi ** 3 * HBAR * C * radius_nm * NM / (360.0 * (a_nm * NM) ** 3)


def matsubara_frequency(n: int, temperature_k: float, m: MaterialParams) -> float:
    """Dimensionless Matsubara frequency ``2 pi n k_B T / (hbar omega_p)``.

    Provided for reference; every force routine here works at zero temperature.
    """
    if n < 0 or temperature_k < 0:
        raise DomainError("n and temperature must be non-negative")
    return 2.0 * np.pi * n * K_B * temperature_k / (HBAR * m.omega_p)


# ---------------------------------------------------------------------------
# reflection kernels


def _reflections(Omega, Q, m, model, override, imp_tol):
    """``(r_s, r_p, err_r_s, err_r_p)`` on the imaginary axis."""
    K = np.hypot(Omega, Q)
    if override == "perfect-conductor":
        one = np.ones_like(K)
        return one, one, 0 * K, 0 * K
    if override == "transparent":
        return 0 * K, 0 * K, 0 * K, 0 * K
    if model == "local" and override == "none":
        zs, ozp = local_impedances_imag(Omega, Q, eps_local(Omega, m))
        es = ep = 0 * K
    else:
        b = impedances_imag(Omega, Q, m, local_f=(override == "local-f"), rel_tol=imp_tol)
        zs, ozp, es, ep = b.z_s, b.omega_z_p, b.err_s, b.err_p
        if not b.converged.all():
            es = np.where(b.converged, es, np.inf)
            ep = np.where(b.converged, ep, np.inf)
    ds = Omega + K * zs
    dp = K + ozp
    rs = (Omega - K * zs) / ds
    rp = (K - ozp) / dp
    # |dr/dZ| times the impedance error
    ers = 2.0 * Omega * K / np.abs(ds) ** 2 * es
    erp = 2.0 * K / np.abs(dp) ** 2 * ep
    return rs, rp, ers, erp


def _pp_terms(r, er, e2):
    x = r * r * e2
    g = x / (1.0 - x)
    dg = 2.0 * np.abs(r) * e2 / (1.0 - x) ** 2
    return g, dg * er


def _sp_terms(r, er, e2):
    x = r * r * e2
    g = np.log1p(-x)
    dg = 2.0 * np.abs(r) * e2 / (1.0 - x)
    return g, dg * er


def _force_kernel(geometry, d, m, model, override, imp_tol):
    terms = _pp_terms if geometry == "plate_plate" else _sp_terms

    def kernel(Omega, Q):
        K = np.hypot(Omega, Q)
        e2 = np.exp(-2.0 * d * K)
        rs, rp, ers, erp = _reflections(Omega, Q, m, model, override, imp_tol)
        gs, es = terms(rs, ers, e2)
        gp, ep = terms(rp, erp, e2)
        w = Q * K if geometry == "plate_plate" else Q
        return w * gs, w * gp, w * es, w * ep

    return kernel


def _correction_kernel(geometry, d, m, imp_tol):
    """Pointwise nonlocal-minus-local integrand for both polarizations."""

    def kernel(Omega, Q):
        K = np.hypot(Omega, Q)
        e2 = np.exp(-2.0 * d * K)
        zs0, ozp0 = local_impedances_imag(Omega, Q, eps_local(Omega, m))
        b = impedances_imag(Omega, Q, m, difference=True, rel_tol=imp_tol)
        dzs, dozp = b.z_s, b.omega_z_p
        es = np.where(b.converged, b.err_s, np.inf)
        ep = np.where(b.converged, b.err_p, np.inf)
        zs1, ozp1 = zs0 + dzs, ozp0 + dozp
        ds0, ds1 = Omega + K * zs0, Omega + K * zs1
        dp0, dp1 = K + ozp0, K + ozp1
        rs0, rs1 = (Omega - K * zs0) / ds0, (Omega - K * zs1) / ds1
        rp0, rp1 = (K - ozp0) / dp0, (K - ozp1) / dp1
        # r1 - r2 from the impedance difference, free of cancellation
        drs = -2.0 * Omega * K * dzs / (ds0 * ds1)
        drp = -2.0 * K * dozp / (dp0 * dp1)
        out = []
        for r0, r1, dr, er in ((rs0, rs1, drs, es), (rp0, rp1, drp, ep)):
            x0, x1 = r0 * r0 * e2, r1 * r1 * e2
            dx = dr * (r0 + r1) * e2
            if geometry == "plate_plate":
                val = dx / ((1.0 - x0) * (1.0 - x1))
                dgdx = 1.0 / (1.0 - x1) ** 2
            else:
                val = np.log1p(-dx / (1.0 - x0))
                dgdx = 1.0 / (1.0 - x1)
            out.append((val, dgdx * 2.0 * np.abs(r1) * e2 * er))
        w = Q * K if geometry == "plate_plate" else Q
        (vs, es_), (vp, ep_) = out
        # |dr/dZ| for the error channel
        es_ = es_ * 2.0 * Omega * K / np.abs(ds1) ** 2
        ep_ = ep_ * 2.0 * K / np.abs(dp1) ** 2
        return w * vs, w * vp, w * es_, w * ep_

    return kernel


# ---------------------------------------------------------------------------
# nested quadrature


@dataclass(frozen=True)
class _Nested:
    value: np.ndarray   # (s, p)
    error: np.ndarray
    converged: bool
    failures: tuple
    neval: int


def _integrate_polarizations(kernel: Callable, d: float, m: MaterialParams, *, rel_tol: float,
                             abs_tol: float) -> _Nested:
    """``int_0^Kmax dOmega int_0^sqrt(Kmax^2 - Omega^2) dQ kernel`` for s and p."""
    kmax = K_MAX_D / d
    scales = np.array([0.03, 0.1, 0.3, 1.0, 3.0, 10.0]) / d
    gam = m.gamma * np.array([0.1, 1.0, 10.0])
    outer_pts = np.unique(np.concatenate([scales, gam]))
    outer_pts = outer_pts[outer_pts < kmax]
    inner_tol = rel_tol / 10.0
    inner_abs = abs_tol / (10.0 * kmax)
    failures = []
    neval = [0]

    def outer(y, owner):
        Om = y.ravel()
        pol = np.repeat(owner, y.shape[1])
        top = np.sqrt(np.maximum(kmax * kmax - Om * Om, 0.0))
        # nodes at Omega ~ kmax leave an empty inner range
        live = top > 0
        Om_l, pol_l, top_l = Om[live], pol[live], top[live]

        def inner(x, iown):
            vs, vp, es, ep = kernel(Om_l[iown][:, None] + 0 * x, x)
            p = (pol_l[iown] == 1)[:, None]
            return np.where(p, vp, vs), np.where(p, ep, es)

        val = np.zeros(Om.size)
        err = np.zeros(Om.size)
        if live.any():
            pts = np.where(scales[None, :] < top_l[:, None], scales[None, :], np.nan)
            res = integrate_batch(inner, np.zeros(Om_l.size), top_l, rel_tol=inner_tol,
                                  abs_tol=inner_abs, points=pts)
            neval[0] += res.neval
            val[live] = res.value
            err[live] = res.error
            if not res.all_converged:
                failures.extend(Om_l[~res.converged].tolist())
        return val.reshape(y.shape), err.reshape(y.shape)

    res = integrate_batch(outer, np.zeros(2), np.full(2, kmax), rel_tol=rel_tol,
                          abs_tol=abs_tol, points=outer_pts)
    return _Nested(res.value, res.error, bool(res.all_converged) and not failures,
                   tuple(sorted(set(failures))[:20]), res.neval + neval[0])


def _ideal_integral(geometry, d):
    """Perfect-conductor value of the dimensionless double integral per polarization."""
    if geometry == "plate_plate":
        return np.pi ** 4 / (240.0 * d ** 4)
    return -np.pi ** 4 / (360.0 * d ** 3)


def _check(a_nm, geometry, radius_nm, model, override):
    if not a_nm > 0:
        raise DomainError("separation must be positive")
    if geometry not in GEOMETRIES:
        raise DomainError(f"geometry must be one of {GEOMETRIES}")
    if geometry == "sphere_plate" and not (radius_nm is not None and radius_nm > 0):
        raise DomainError("sphere-plate geometry needs a positive radius")
    if model not in FORCE_MODELS:
        raise DomainError(f"model must be one of {FORCE_MODELS}")
    if override not in OVERRIDES:
        raise DomainError(f"override must be one of {OVERRIDES}")


def _prefactor(geometry, m, radius_nm):
    delta = m.delta_m
    if geometry == "plate_plate":
        return -HBAR * C / (2.0 * np.pi ** 2 * delta ** 4)
    return HBAR * C * radius_nm * NM / (2.0 * np.pi * delta ** 3)


def lifshitz_force(a_nm: float, m: MaterialParams, geometry="plate_plate", model="local", *,
                   radius_nm=None, override="none", rel_tol=FORCE_TOL,
                   imp_tol=DEFAULT_TOL) -> ForceResult:
    """Force for either geometry; see :func:`force_plate_plate` and :func:`force_sphere_plate`."""
    _check(a_nm, geometry, radius_nm, model, override)
    d = a_nm * NM / m.delta_m
    pref = _prefactor(geometry, m, radius_nm)
    ideal = abs(_ideal_integral(geometry, d))
    pfa = None if geometry == "plate_plate" else bool(radius_nm / a_nm >= PFA_MIN_RATIO)
    if override == "transparent":
        return ForceResult(geometry, a_nm, 0.0, 0.0, 0.0, 0.0, override, True, radius_nm, pfa)
    kernel = _force_kernel(geometry, d, m, model, override, imp_tol)
    res = _integrate_polarizations(kernel, d, m, rel_tol=rel_tol, abs_tol=1e-3 * rel_tol * ideal)
    vs, vp = pref * res.value
    tag = model if override == "none" else override
    return ForceResult(geometry, a_nm, vs + vp, vs, vp, abs(pref) * float(res.error.sum()), tag,
                       res.converged, radius_nm, pfa, res.failures)


def force_plate_plate(a_nm: float, m: MaterialParams, model="local", *, override="none",
                      rel_tol=FORCE_TOL, imp_tol=DEFAULT_TOL) -> ForceResult:
    """Pressure between two identical half-spaces in Pa (negative: attraction)."""
    return lifshitz_force(a_nm, m, "plate_plate", model, override=override,
                          rel_tol=rel_tol, imp_tol=imp_tol)


def force_sphere_plate(a_nm: float, radius_nm: float, m: MaterialParams, model="local", *,
                       override="none", rel_tol=FORCE_TOL, imp_tol=DEFAULT_TOL) -> ForceResult:
    """Proximity-force sphere-plate force in N (negative: attraction).

    ``pfa_ok`` is False when ``R/a < 10``; the result is still returned.
    """
    return lifshitz_force(a_nm, m, "sphere_plate", model, radius_nm=radius_nm,
                          override=override, rel_tol=rel_tol, imp_tol=imp_tol)


def reduction_factor(a_nm: float, m: MaterialParams, model="local", *, override="none",
                     rel_tol=FORCE_TOL) -> float:
    """``F_pp(a) / F_ideal(a)``."""
    return force_plate_plate(a_nm, m, model, override=override, rel_tol=rel_tol).value / ideal_force(a_nm)


def nonlocal_correction(a_nm: float, m: MaterialParams, geometry="plate_plate", *,
                        radius_nm=None, rel_tol=CORRECTION_TOL, imp_tol=DEFAULT_TOL,
                        include_chi=False) -> CorrectionResult:
    """Boltzmann-minus-local force change from the difference integrand.

    The interband susceptibility is dropped unless ``include_chi`` is set.
    """
    _check(a_nm, geometry, radius_nm, "boltzmann", "none")
    if not include_chi:
        m = m.without_chi()
    d = a_nm * NM / m.delta_m
    pref = _prefactor(geometry, m, radius_nm)
    ideal = abs(_ideal_integral(geometry, d))
    loc = _integrate_polarizations(_force_kernel(geometry, d, m, "local", "none", imp_tol), d, m,
                                   rel_tol=rel_tol / 10.0, abs_tol=1e-3 * rel_tol * ideal)
    i_loc = float(loc.value.sum())
    # floor far below any correction of interest (~1e-5 of the force)
    res = _integrate_polarizations(_correction_kernel(geometry, d, m, imp_tol), d, m,
                                   rel_tol=rel_tol, abs_tol=1e-5 * rel_tol * ideal)
    ds_, dp_ = res.value
    rel_s, rel_p = ds_ / i_loc, dp_ / i_loc
    err = float(res.error.sum()) / abs(i_loc) + abs((ds_ + dp_) / i_loc) * float(loc.error.sum()) / abs(i_loc)
    pfa = None if geometry == "plate_plate" else bool(radius_nm / a_nm >= PFA_MIN_RATIO)
    return CorrectionResult(geometry, a_nm, pref * (ds_ + dp_), rel_s + rel_p, rel_s, rel_p, err,
                            pref * i_loc, res.converged and loc.converged, radius_nm, pfa,
                            res.failures + loc.failures)


def correction_integrand(Omega, Q, a_nm: float, m: MaterialParams, geometry="plate_plate",
                         imp_tol=DEFAULT_TOL):
    """Pointwise ``(delta f_s, delta f_p)`` on an (Omega, Q) grid, for inspection."""
    d = a_nm * NM / m.delta_m
    Omega, Q = np.broadcast_arrays(np.asarray(Omega, dtype=float), np.asarray(Q, dtype=float))
    vs, vp, _, _ = _correction_kernel(geometry, d, m.without_chi(), imp_tol)(Omega, Q)
    return vs, vp
