"""Surface impedances Z_s, Z_p for specular electron reflection.

On the imaginary frequency axis the normal wave number is parametrised as
``k_z = Q sinh(chi)``, which turns both impedances into rapidly convergent
integrals with ``sech`` tails.  On the real axis the ``k_z`` integral is
mapped onto ``[0, pi/2)`` with ``k_z = kappa tan(theta)``.

The p impedance diverges as ``1/Omega`` in the Thomas-Fermi regime, so the
imaginary-axis routines return ``Omega * Z_p`` alongside ``Z_p``; the
reflection coefficients only ever need the product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dielectric import (
    boltzmann_functions_imag,
    boltzmann_real_eps,
    eps_local,
    lindhard_real_eps,
)
from .errors import DomainError, PoleError, UnsupportedError
from .materials import MaterialParams, ResponsePoint
from .quadrature import Decay, integrate_batch

DEFAULT_TOL = 1e-6
_TWO_PI = 2.0 / np.pi
_LEONTOVICH = 4.0 / (3.0 * np.sqrt(3.0))


@dataclass(frozen=True)
class ImpedancePair:
    """Surface impedances at one (Omega, Q) site.

    ``omega_z_p`` is ``Omega * z_p``; it stays finite when ``z_p`` does not.
    ``regime_ok`` is only set by :func:`low_freq_impedances`.
    """

    z_s: complex
    z_p: complex
    omega_z_p: complex
    point: ResponsePoint
    model: str
    err_s: float = 0.0
    err_p: float = 0.0
    converged: bool = True
    regime_ok: Optional[bool] = None


@dataclass(frozen=True)
class ImpedanceBatch:
    """Vectorised impedances; ``err_p`` refers to ``omega_z_p`` on the imaginary axis."""

    z_s: np.ndarray
    omega_z_p: np.ndarray
    err_s: np.ndarray
    err_p: np.ndarray
    converged: np.ndarray
    neval: int = 0


def _branch_root(x):
    """Square root with non-negative imaginary part (decaying transmitted wave)."""
    r = np.sqrt(np.asarray(x, dtype=complex))
    return np.where(r.imag < 0, -r, r)


def local_impedances_imag(Omega, Q, eps):
    """Closed-form local ``(Z_s, Omega Z_p)`` on the imaginary axis."""
    Omega = np.asarray(Omega, dtype=float)
    root = np.sqrt(Omega * Omega * eps + np.asarray(Q, dtype=float) ** 2)
    return Omega / root, root / eps


def local_pair(point: ResponsePoint, eps) -> ImpedancePair:
    """Local impedances for a spatially uniform permittivity ``eps``.

    On the real axis the normal-wave-number root is taken with non-negative
    imaginary part; on the imaginary axis all roots are positive.
    """
    if eps == 0:
        raise PoleError("eps = 0: Z_p has a pole")
    Om, Q = point.Omega, point.Q
    if point.axis == "imaginary":
        if Om <= 0:
            raise DomainError("imaginary-axis impedances need Omega > 0")
        eps = float(np.real(eps))
        zs, ozp = local_impedances_imag(Om, Q, eps)
        if Q == 0:
            # both reduce to 1/sqrt(eps); share one rounding
            return ImpedancePair(float(zs), float(zs), float(Om * zs), point, "local")
        return ImpedancePair(float(zs), float(ozp / Om), float(ozp), point, "local")
    if Om <= 0:
        raise DomainError("real-axis impedances need Omega > 0")
    root = complex(_branch_root(eps - (Q / Om) ** 2))
    if root == 0:
        raise PoleError("eps = (cq/omega)^2: Z_s has a pole")
    if Q == 0:
        return ImpedancePair(1.0 / root, 1.0 / root, Om / root, point, "local")
    return ImpedancePair(1.0 / root, root / eps, Om * root / eps, point, "local")


# ---------------------------------------------------------------------------
# imaginary axis


def _chi_points(Omega, Q, m, eps_loc):
    """Per-integral breakpoints in chi where the integrand changes character."""
    vf = m.v_f_over_c
    scales = np.stack([
        Omega / Q * np.sqrt(eps_loc),          # cosh^2 ~ (Omega/Q)^2 eps_t
        (Omega + m.gamma) / (vf * Q),          # v = 1
        np.sqrt(3.0) / (vf * Q),               # Thomas-Fermi term ~ 1
    ], axis=1)
    with np.errstate(invalid="ignore"):
        pts = np.where(scales > 1.0, np.arccosh(np.maximum(scales, 1.0)), np.nan)
    return pts


def imag_integrands(chi, Omega: float, Q: float, m: MaterialParams):
    """Pointwise Boltzmann integrands of ``Z_s`` and ``Omega Z_p`` in ``chi``."""
    chi = np.asarray(chi, dtype=float)
    g = m.gamma
    c = np.cosh(chi)
    base = 1.0 + m.chi(Omega, "imaginary")
    drude = 1.0 / (Omega * (Omega + g))
    ft, nl, mm = boltzmann_functions_imag(m.v_f_over_c * Q / (Omega + g) * c)
    et = base + ft * drude
    el = base + nl / ((Omega + g * mm) * (Omega + g))
    a = (Omega / Q) ** 2
    zs = _TWO_PI * Omega / Q * c / (c * c + a * et)
    ozp = _TWO_PI * (Q / el + Omega * Omega / Q * (c * c - 1.0) / (c * c + a * et)) / c
    return zs, ozp


def impedances_imag(Omega, Q, m: MaterialParams, *, local_f=False, difference=False,
                    rel_tol=DEFAULT_TOL, limit=2000) -> ImpedanceBatch:
    """Boltzmann ``(Z_s, Omega Z_p)`` at imaginary frequencies for arrays of sites.

    Parameters
    ----------
    Omega, Q : array_like
        Broadcastable, strictly positive.
    local_f : bool
        Force ``f_t = f_l = 1`` inside the same quadrature (test seam).
    difference : bool
        Return the nonlocal minus local values, integrated from the
        pointwise difference of the integrands so that small deviations keep
        their relative accuracy.
    """
    Omega, Q = np.broadcast_arrays(np.asarray(Omega, dtype=float), np.asarray(Q, dtype=float))
    shape = Omega.shape
    Om = Omega.ravel().copy()
    Qv = Q.ravel().copy()
    if np.any(Om <= 0) or np.any(Qv <= 0):
        raise DomainError("imaginary-axis nonlocal impedances need Omega > 0 and Q > 0")
    n = Om.size
    g = m.gamma
    vf = m.v_f_over_c
    chi_ib = m.chi(Om, "imaginary")
    drude = 1.0 / (Om * (Om + g))
    eps_loc = 1.0 + chi_ib + drude

    # owners [0, n) carry Z_s, [n, 2n) carry Omega Z_p
    O2 = np.concatenate([Om, Om])
    Q2 = np.concatenate([Qv, Qv])
    a2 = (O2 / Q2) ** 2
    base = np.concatenate([1.0 + chi_ib, 1.0 + chi_ib])
    dr2 = np.concatenate([drude, drude])
    vpref = vf * Q2 / (O2 + g)
    is_p = np.arange(2 * n) >= n

    def integrand(x, owner):
        c = np.cosh(x)
        c2 = c * c
        Ob = O2[owner][:, None]
        Qb = Q2[owner][:, None]
        ab = a2[owner][:, None]
        p = is_p[owner][:, None]
        b0 = base[owner][:, None]
        drb = dr2[owner][:, None]
        if local_f:
            et = el = b0 + drb
        else:
            ft, nl, mm = boltzmann_functions_imag(vpref[owner][:, None] * c)
            et = b0 + ft * drb
            el = b0 + nl / ((Ob + g * mm) * (Ob + g))

        def s_part(e_t):
            return c / (c2 + ab * e_t)

        def p_part(e_t, e_l):
            s2 = c2 - 1.0
            return (Qb / e_l + Ob * Ob / Qb * s2 / (c2 + ab * e_t)) / c

        if difference:
            el0 = et0 = b0 + drb
            vs = s_part(et) - s_part(et0)
            vp = p_part(et, el) - p_part(et0, el0)
        else:
            vs = s_part(et)
            vp = p_part(et, el)
        return _TWO_PI * np.where(p, vp, (Ob / Qb) * vs)

    scale = _TWO_PI * np.where(is_p, Q2 + O2 * O2 / Q2, O2 / Q2)
    pts = _chi_points(Om, Qv, m, eps_loc)
    pts = np.concatenate([pts, pts])
    if difference:
        # relative accuracy is asked of the difference; the floor keeps
        # vanishing differences from spinning the subdivision
        zs_loc, ozp_loc = local_impedances_imag(Om, Qv, eps_loc)
        floor = 1e-12 * np.concatenate([zs_loc, ozp_loc])
    else:
        floor = 0.0
    res = integrate_batch(integrand, np.zeros(2 * n), np.inf, rel_tol=rel_tol, abs_tol=floor,
                          decay=Decay("sech", scale=scale), points=pts, limit=limit)
    conv = res.converged[:n] & res.converged[n:]
    return ImpedanceBatch(
        res.value[:n].reshape(shape), res.value[n:].reshape(shape),
        res.error[:n].reshape(shape), res.error[n:].reshape(shape),
        conv.reshape(shape), res.neval,
    )


def nonlocal_pair_imag(point: ResponsePoint, m: MaterialParams, model="boltzmann", *,
                       local_f=False, rel_tol=DEFAULT_TOL) -> ImpedancePair:
    """Nonlocal impedances at imaginary frequency ``i Omega``."""
    if point.axis != "imaginary":
        raise DomainError("point must lie on the imaginary axis")
    if model == "lindhard":
        raise UnsupportedError("Lindhard impedances are only available on the real axis")
    if model != "boltzmann":
        raise DomainError(f"unknown nonlocal model {model!r}")
    b = impedances_imag(point.Omega, point.Q, m, local_f=local_f, rel_tol=rel_tol)
    ozp = float(b.omega_z_p)
    return ImpedancePair(float(b.z_s), ozp / point.Omega, ozp, point,
                         "local-f" if local_f else model,
                         float(b.err_s), float(b.err_p) / point.Omega, bool(b.converged))


# ---------------------------------------------------------------------------
# real axis


def impedances_real(Omega, Q, m: MaterialParams, model="boltzmann", *, k_f=None,
                    local_f=False, rel_tol=DEFAULT_TOL, limit=2000) -> ImpedanceBatch:
    """Nonlocal ``(Z_s, Omega Z_p)`` at real frequencies for arrays of sites.

    ``model`` is ``"boltzmann"`` or ``"lindhard"`` (which needs ``k_f``, the
    Fermi wave number in units of ``omega_p/c``).
    """
    if model not in ("boltzmann", "lindhard"):
        raise DomainError(f"unknown nonlocal model {model!r}")
    if model == "lindhard" and k_f is None:
        raise DomainError("the Lindhard model needs a Fermi wave number k_f")
    if m.gamma <= 0:
        raise DomainError("real-axis nonlocal impedances need gamma > 0")
    Omega, Q = np.broadcast_arrays(np.asarray(Omega, dtype=float), np.asarray(Q, dtype=float))
    shape = Omega.shape
    Om = Omega.ravel().copy()
    Qv = Q.ravel().copy()
    if np.any(Om <= 0) or np.any(Qv < 0):
        raise DomainError("real-axis impedances need Omega > 0 and Q >= 0")
    n = Om.size
    chi_ib = m.chi(Om, "real")
    eps0 = eps_local(Om, m, "real")
    kappa = _branch_root(Om * Om * eps0 - Qv * Qv)
    k0 = np.maximum(np.abs(kappa), 1e-300)

    O2 = np.concatenate([Om, Om])
    Q2 = np.concatenate([Qv, Qv])
    chi2 = np.concatenate([chi_ib, chi_ib])
    k02 = np.concatenate([k0, k0])
    is_p = np.arange(2 * n) >= n

    def integrand(x, owner):
        t = np.tan(x)
        sec2 = 1.0 + t * t
        kb = k02[owner][:, None]
        Ob = O2[owner][:, None]
        Qb = Q2[owner][:, None]
        kz = kb * t
        K2 = Qb * Qb + kz * kz
        K = np.sqrt(K2)
        chib = chi2[owner][:, None]
        if model == "boltzmann":
            el, et = boltzmann_real_eps(Ob, K, m, local_f=local_f, chi=chib)
        else:
            el, et = lindhard_real_eps(Ob, K, k_f, m, chi=chib)
        den_t = Ob * Ob * et - K2
        vs = 1.0 / den_t
        with np.errstate(invalid="ignore", divide="ignore"):
            # k_z^2/K^2 written as t^2 k0^2/K^2 stays finite at K -> 0
            vp = Qb * Qb / (K2 * Ob * Ob * el) + (kz * kz / K2) / den_t
        vp = np.where(K2 > 0, vp, 1.0 / den_t)
        pref = 2j / np.pi * Ob * kb * sec2
        # Omega * Z_p for the p owners
        return pref * np.where(is_p[owner][:, None], Ob * vp, vs)

    # breakpoints at |kappa|, Re kappa and the nonlocal scale |Omega + i gamma|/(v_F/c)
    k_nl = np.abs(Om + 1j * m.gamma) / m.v_f_over_c
    kz_nl = np.sqrt(np.maximum(k_nl ** 2 - Qv ** 2, 0.0))
    cand = np.stack([np.abs(kappa.real), kz_nl, 0.1 * kz_nl, 10.0 * kz_nl], axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        pts = np.where(cand > 0, np.arctan(cand / k0[:, None]), np.nan)
    pts = np.concatenate([pts, pts])
    res = integrate_batch(integrand, np.zeros(2 * n), np.full(2 * n, np.pi / 2), rel_tol=rel_tol,
                          points=pts, limit=limit)
    conv = res.converged[:n] & res.converged[n:]
    return ImpedanceBatch(
        res.value[:n].reshape(shape), res.value[n:].reshape(shape),
        res.error[:n].reshape(shape), res.error[n:].reshape(shape),
        conv.reshape(shape), res.neval,
    )


def nonlocal_pair_real(point: ResponsePoint, m: MaterialParams, model="boltzmann", *,
                       k_f=None, local_f=False, rel_tol=DEFAULT_TOL) -> ImpedancePair:
    """Nonlocal impedances at real frequency ``Omega``; evanescent ``Q > Omega`` allowed."""
    if point.axis != "real":
        raise DomainError("point must lie on the real axis")
    b = impedances_real(point.Omega, point.Q, m, model, k_f=k_f, local_f=local_f,
                        rel_tol=rel_tol)
    ozp = complex(b.omega_z_p)
    return ImpedancePair(complex(b.z_s), ozp / point.Omega, ozp, point,
                         "local-f" if local_f else model,
                         float(b.err_s), float(b.err_p) / point.Omega, bool(b.converged))


# ---------------------------------------------------------------------------
# low-frequency asymptotics


def asymptotic_FG(b, rel_tol=1e-10):
    """The functions ``F(b)`` and ``G(b)`` of the strong anomalous regime.

    ``F = (2/pi) int cosh^2/(cosh^3 + b^3)`` and
    ``G = (2/pi) int sinh^2/(cosh^3 + b^3)`` over ``chi`` in ``[0, inf)``.
    Accepts scalars or arrays.
    """
    b = np.asarray(b, dtype=float)
    if np.any(b < 0) or not np.all(np.isfinite(b)):
        raise DomainError("b must be finite and non-negative")
    bv = b.ravel()
    n = bv.size
    b3 = np.concatenate([bv, bv]) ** 3
    is_g = np.arange(2 * n) >= n

    def integrand(x, owner):
        c = np.cosh(x)
        core = 1.0 / (c + b3[owner][:, None] / (c * c))
        return np.where(is_g[owner][:, None], np.tanh(x) ** 2 * core, core)

    with np.errstate(invalid="ignore"):
        pts = np.where(bv > 1.0, np.arccosh(np.maximum(bv, 1.0)), np.nan)[:, None]
    pts = np.concatenate([pts, pts])
    res = integrate_batch(integrand, np.zeros(2 * n), np.inf, rel_tol=rel_tol,
                          decay=Decay("sech", scale=1.0), points=pts)
    F = _TWO_PI * res.value[:n].reshape(b.shape)
    G = _TWO_PI * res.value[n:].reshape(b.shape)
    if b.ndim == 0:
        return float(F), float(G)
    return F, G


def b_parameter(Omega, Q, m: MaterialParams):
    """``b = (1/Q) (3 pi Omega / (4 v_F/c))^(1/3)``."""
    return np.cbrt(0.75 * np.pi * np.asarray(Omega, dtype=float) / m.v_f_over_c) / np.asarray(Q, dtype=float)


def low_freq_impedances(Omega: float, Q: float, m: MaterialParams) -> ImpedancePair:
    """Strong-anomalous-regime impedances built from ``F(b)`` and ``G(b)``.

    ``regime_ok`` is False when ``v`` at ``chi = 0`` is below 10, i.e. when
    the large-``v`` forms of the dielectric functions are not justified.
    """
    if Omega <= 0 or Q <= 0:
        raise DomainError("low-frequency impedances need Omega > 0 and Q > 0")
    F, G = asymptotic_FG(b_parameter(Omega, Q, m))
    vf = m.v_f_over_c
    zs = Omega / Q * F
    # Thomas-Fermi part (Q/Omega)/sqrt(1 + 3/(v_F Q)^2), written via Omega Z_p
    ozp = Q * vf * Q / np.sqrt((vf * Q) ** 2 + 3.0) + Omega * Omega / Q * G
    v0 = vf * Q / (Omega + m.gamma)
    return ImpedancePair(zs, ozp / Omega, ozp, ResponsePoint(Omega, Q), "asymptotic",
                         regime_ok=bool(v0 >= 10.0))


def leontovich(Omega, m: MaterialParams):
    """Strong-anomalous Leontovich impedance ``(4/3 sqrt 3) (4 v_F Omega^2 / 3 pi)^(1/3)``."""
    Omega = np.asarray(Omega, dtype=float)
    if np.any(Omega <= 0):
        raise DomainError("Omega must be positive")
    z = _LEONTOVICH * np.cbrt(4.0 * m.v_f_over_c * Omega * Omega / (3.0 * np.pi))
    return float(z) if z.ndim == 0 else z
