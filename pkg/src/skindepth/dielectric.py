"""Local (Drude) and nonlocal (Boltzmann, Lindhard) dielectric functions.

All arguments are dimensionless: ``Omega = omega/omega_p`` and wave numbers
``K = c k / omega_p``.  Kernels named ``*_eps`` are vectorised and return
``(eps_l, eps_t)`` arrays; the remaining public functions wrap them for a
single point and return a :class:`DielectricPair`.

On the real axis the nonlocal variable is ``u = (v_F/c) K / (Omega + i gamma)``
which lies in the lower half plane for ``gamma > 0``; on the imaginary axis it
becomes ``u = -i v`` with ``v = (v_F/c) K / (Omega + gamma)`` real.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Optional

import numpy as np

from .errors import BranchCutError, DomainError, UnsupportedError
from .materials import MaterialParams, ResponsePoint

MODELS = ("local", "boltzmann", "lindhard")

# below this |u| (or v) the closed forms lose digits to cancellation; the
# 10-term series is accurate to ~1e-20 there and the closed forms to ~1e-13
SERIES_CUTOFF = 0.1
_NTERMS = 10
_n = np.arange(1, _NTERMS + 1)
_C_FT = 3.0 / ((2 * _n - 1) * (2 * _n + 1))  # f_t = sum c s^(n-1)
_C_NL = 3.0 / (2 * _n + 1)  # 3 (artanh u - u)/u^3 = sum c s^(n-1)
_C_M = 1.0 / (2 * _n + 1)  # artanh(u)/u - 1 = sum c s^n


@dataclass(frozen=True)
class DielectricPair:
    eps_l: complex
    eps_t: complex
    model: str
    axis: str
    Omega: float
    k: float
    k_over_kf: Optional[float] = None


def _poly(coef, s):
    """Horner evaluation of sum_j coef[j] s^j."""
    out = np.zeros_like(s) + coef[-1]
    for c in coef[-2::-1]:
        out = out * s + c
    return out


def _series_parts(s):
    """(f_t, numerator of f_l, M) as power series in s = u^2."""
    return _poly(_C_FT, s), _poly(_C_NL, s), s * _poly(_C_M, s)


def boltzmann_functions_real(u):
    """``(f_t, N_l, M)`` for complex ``u`` on the real frequency axis.

    ``f_l = N_l / (1 - i (gamma/Omega) M)`` where ``M = artanh(u)/u - 1``.
    Uses the principal branch of ``log((1+u)/(1-u))``.
    """
    u = np.asarray(u, dtype=complex)
    on_cut = (np.abs(u.imag) < 1e-300) & (np.abs(u.real) >= 1.0)
    if np.any(on_cut):
        raise BranchCutError("u lies on the branch cut of log((1+u)/(1-u)); need gamma > 0")
    small = np.abs(u) < SERIES_CUTOFF
    ft = np.empty_like(u)
    nl = np.empty_like(u)
    mm = np.empty_like(u)
    if small.any():
        ft[small], nl[small], mm[small] = _series_parts(u[small] ** 2)
    big = ~small
    if big.any():
        ub = u[big]
        A = 0.5 * np.log((1.0 + ub) / (1.0 - ub))
        u3 = ub ** 3
        ft[big] = 1.5 / u3 * (ub - (1.0 - ub * ub) * A)
        nl[big] = 3.0 * (A - ub) / u3
        mm[big] = A / ub - 1.0
    return ft, nl, mm


def boltzmann_functions_imag(v):
    """``(f_t, N_l, m)`` for real ``v >= 0`` on the imaginary axis.

    ``f_l = N_l / (1 + (gamma/Omega) m)`` with ``m = 1 - arctan(v)/v``.
    """
    v = np.asarray(v, dtype=float)
    small = v < SERIES_CUTOFF
    ft = np.empty_like(v)
    nl = np.empty_like(v)
    mm = np.empty_like(v)
    if small.any():
        s = -v[small] ** 2
        a, b, c = _series_parts(s)
        ft[small], nl[small], mm[small] = a, b, -c
    big = ~small
    if big.any():
        vb = v[big]
        at = np.arctan(vb)
        v3 = vb ** 3
        ft[big] = 1.5 / v3 * (-vb + (1.0 + vb * vb) * at)
        nl[big] = 3.0 * (vb - at) / v3
        mm[big] = 1.0 - at / vb
    return ft, nl, mm


def eps_local(Omega, m: MaterialParams, axis="imaginary"):
    """Drude plus interband susceptibility, vectorised."""
    Omega = np.asarray(Omega, dtype=float)
    if np.any(Omega <= 0):
        raise DomainError("local permittivity has a pole at Omega = 0")
    chi = m.chi(Omega, axis)
    if axis == "imaginary":
        return 1.0 + chi + 1.0 / (Omega * (Omega + m.gamma))
    return 1.0 + chi - 1.0 / (Omega * (Omega + 1j * m.gamma))


def drude_local(point: ResponsePoint, m: MaterialParams):
    """Local permittivity at ``point`` (real on the imaginary axis)."""
    eps = eps_local(point.Omega, m, point.axis)
    return float(eps) if point.axis == "imaginary" else complex(eps)


def nonlocal_v(Omega, K, m: MaterialParams):
    """Imaginary-axis nonlocal variable ``v = (v_F/c) K / (Omega + gamma)``."""
    return m.v_f_over_c * np.asarray(K, dtype=float) / (np.asarray(Omega, dtype=float) + m.gamma)


def nonlocal_u(Omega, K, m: MaterialParams):
    """Real-axis nonlocal variable ``u = (v_F/c) K / (Omega + i gamma)``.

    For ``gamma > 0`` and ``Omega, K > 0`` the imaginary part is strictly
    negative, which keeps ``u`` off the logarithm's cut.
    """
    u = m.v_f_over_c * np.asarray(K, dtype=float) / (np.asarray(Omega, dtype=float) + 1j * m.gamma)
    if m.gamma > 0:
        assert np.all(u.imag[np.asarray(K) > 0] < 0), "Im u must be negative for gamma > 0"
    return u


def boltzmann_imag_eps(Omega, v, m: MaterialParams, *, local_f=False, chi=None):
    """``(eps_l, eps_t)`` on the imaginary axis, vectorised over Omega and v.

    ``local_f=True`` forces ``f_t = f_l = 1`` (the local limit) while keeping
    the same code path; ``chi`` may carry precomputed susceptibility values.
    """
    Omega = np.asarray(Omega, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(Omega < 0):
        raise DomainError("Omega must be non-negative")
    g = m.gamma
    if chi is None:
        chi = m.chi(Omega, "imaginary") if m.chi_ib is not None else 0.0
    if local_f:
        drude = 1.0 / (Omega * (Omega + g))
        return 1.0 + chi + drude + 0 * v, 1.0 + chi + drude + 0 * v
    ft, nl, mm = boltzmann_functions_imag(v)
    with np.errstate(divide="ignore"):
        eps_t = 1.0 + chi + ft / (Omega * (Omega + g))
        # f_l / (Omega (Omega + gamma)) written to stay finite as Omega -> 0
        eps_l = 1.0 + chi + nl / ((Omega + g * mm) * (Omega + g))
    return eps_l, eps_t


def boltzmann_real_eps(Omega, K, m: MaterialParams, *, local_f=False, chi=None):
    """``(eps_l, eps_t)`` on the real axis, vectorised."""
    Omega = np.asarray(Omega, dtype=float)
    if np.any(Omega <= 0):
        raise DomainError("real-axis response needs Omega > 0")
    g = m.gamma
    if chi is None:
        chi = m.chi(Omega, "real") if m.chi_ib is not None else 0.0
    drude = 1.0 / (Omega * (Omega + 1j * g))
    K = np.asarray(K, dtype=float)
    if local_f:
        e = 1.0 + chi - drude + 0 * K
        return e, e
    u = nonlocal_u(Omega, K, m)
    ft, nl, mm = boltzmann_functions_real(u)
    eps_t = 1.0 + chi - drude * ft
    eps_l = 1.0 + chi - nl / ((Omega - 1j * g * mm) * (Omega + 1j * g))
    return eps_l, eps_t


def _log_ratio(x):
    return np.log((x + 1.0) / (x - 1.0))


_Z_STABLE = 0.1


def _clog1p(x):
    # numpy's complex log1p is log(1 + x) and loses digits for small |x|
    a, b = x.real, x.imag
    return 0.5 * np.log1p(a * (2.0 + a) + b * b) + 1j * np.arctan2(b, 1.0 + a)


_U_SERIES = 0.1
_N_SERIES = 12


def _lindhard_series_table(n_terms):
    # f_t - 1 and f_l as sums of c * z^(j-1) * u^(2n), j = 2n - 2m - 1
    rows = []
    for n in range(1, n_terms + 1):
        for m_ in range(n):
            j = 2 * n - 2 * m_ - 1
            b = comb(2 * n - 1, j)
            d = (2 * m_ + 1) * (2 * m_ + 3)
            rows.append((n, j - 1, 3.0 * b / (d * (2 * m_ + 5)), -b / d))
    return np.array(rows)


_LINDHARD_SERIES = _lindhard_series_table(_N_SERIES)


def _lindhard_series(u, z):
    n, p, ct, cl = _LINDHARD_SERIES.T
    terms = u[:, None] ** (2 * n) * z[:, None] ** p
    return 1.0 + terms @ ct, terms @ cl


def _lindhard_f(w, z):
    """Lindhard ``f_t(u, z)`` and ``f_l(u, z)`` with ``w = 1/u``.

    The brackets ``g(z + w) + g(z - w)`` vanish linearly in ``z``; for small
    ``z`` they are regrouped as ``g(w + z) - g(w - z)`` with the differences
    of the polynomial factors taken exactly and the logarithm difference
    through ``log1p``, so the division by ``z`` loses no digits. For small
    ``|u| (1 + z)`` both forms cancel like ``|w|^3``, so a power series in
    ``u`` with polynomial coefficients in ``z`` is summed instead.
    """
    w, z = np.broadcast_arrays(np.asarray(w, dtype=complex), np.asarray(z, dtype=float))
    ft = np.empty(w.shape, dtype=complex)
    fl = np.empty(w.shape, dtype=complex)
    u = 1.0 / w
    se = np.abs(u) * (1.0 + z) < _U_SERIES
    if se.any():
        ft[se], fl[se] = _lindhard_series(u[se], z[se])
    st = (z < _Z_STABLE) & ~se
    if st.any():
        ws, zs = w[st], z[st]
        lp = _log_ratio(ws + zs)
        lm = _log_ratio(ws - zs)
        # (l+ - l-)/z, exact up to rounding for small z
        dl = _clog1p(-4.0 * zs / (ws * ws - (zs - 1.0) ** 2)) / zs
        rp = 1.0 - (ws + zs) ** 2
        rm = 1.0 - (ws - zs) ** 2
        dr = -4.0 * ws  # (r+ - r-)/z
        sl = lp + lm
        # bracket/z for (1 - x^2) log(...)
        bl = 0.5 * (dr * sl + (rp + rm) * dl)
        # bracket/z for (1 - x^2)^2 log(...); r+^2 - r-^2 = (r+ - r-)(r+ + r-)
        bt = 0.5 * (dr * (rp + rm) * sl + (rp * rp + rm * rm) * dl)
        ft[st] = 0.375 * (zs * zs + 3.0 * ws * ws + 1.0) - 3.0 / 32.0 * bt
        fl[st] = 0.5 + bl / 8.0
    lg = ~st & ~se
    if lg.any():
        wl, zl = w[lg], z[lg]
        xm, xp = zl - wl, zl + wl
        ft[lg] = 0.375 * (zl * zl + 3.0 * wl * wl + 1.0) - 3.0 / (32.0 * zl) * (
            (1.0 - xm * xm) ** 2 * _log_ratio(xm) + (1.0 - xp * xp) ** 2 * _log_ratio(xp)
        )
        fl[lg] = 0.5 + 1.0 / (8.0 * zl) * (
            (1.0 - xm * xm) * _log_ratio(xm) + (1.0 - xp * xp) * _log_ratio(xp)
        )
    return ft, fl


def lindhard_real_eps(Omega, K, K_F, m: MaterialParams, *, chi=None):
    """Self-consistent-field (Lindhard) ``(eps_l, eps_t)`` with relaxation.

    ``z = K / (2 K_F)``.  The longitudinal function carries the
    relaxation-corrected (Mermin) form, which reduces to the Boltzmann
    result as ``z -> 0``.
    """
    Omega = np.asarray(Omega, dtype=float)
    K = np.asarray(K, dtype=float)
    if np.any(Omega <= 0):
        raise DomainError("real-axis response needs Omega > 0")
    if np.any(K <= 0) or not np.all(np.asarray(K_F) > 0):
        raise DomainError("Lindhard functions need K > 0 and K_F > 0")
    g = m.gamma
    if chi is None:
        chi = m.chi(Omega, "real") if m.chi_ib is not None else 0.0
    u = nonlocal_u(Omega, K, m)
    if np.any((np.abs(u.imag) < 1e-300) & (np.abs(u.real) >= 1.0)):
        raise BranchCutError("u on the branch cut; need gamma > 0")
    z = K / (2.0 * np.asarray(K_F, dtype=float)) + 0 * Omega
    w = 1.0 / u
    ft, fl = _lindhard_f(w, z)
    eps_t = 1.0 + chi - ft / (Omega * (Omega + 1j * g))
    eps_w_minus_1 = 3.0 * fl / (m.v_f_over_c * K) ** 2
    _, _, mm = boltzmann_functions_real(u)
    eps_l = 1.0 + chi + (Omega + 1j * g) * eps_w_minus_1 / (Omega - 1j * g * mm)
    return eps_l, eps_t


def boltzmann_real(Omega: float, k: float, m: MaterialParams) -> DielectricPair:
    """Boltzmann dielectric pair at real frequency ``Omega`` and wave number ``k``."""
    if m.gamma <= 0:
        u = m.v_f_over_c * k / Omega
        if abs(u) >= 1.0:
            raise BranchCutError("gamma = 0 puts u on the branch cut for |u| >= 1")
    el, et = boltzmann_real_eps(Omega, k, m)
    return DielectricPair(complex(el), complex(et), "boltzmann", "real", Omega, k)


def boltzmann_imag(Omega: float, v: float, m: MaterialParams) -> DielectricPair:
    """Boltzmann dielectric pair at imaginary frequency ``i Omega`` and nonlocal variable ``v``."""
    if Omega <= 0:
        raise DomainError("Omega must be positive")
    if v < 0:
        raise DomainError("v must be non-negative")
    el, et = boltzmann_imag_eps(Omega, v, m)
    k = v * (Omega + m.gamma) / m.v_f_over_c
    return DielectricPair(float(el), float(et), "boltzmann", "imaginary", Omega, k)


def lindhard_real(Omega: float, k: float, k_f: float, m: MaterialParams) -> DielectricPair:
    """Lindhard dielectric pair; ``k_f`` is the Fermi wave number in units of omega_p/c."""
    if m.gamma <= 0:
        raise BranchCutError("Lindhard evaluation requires gamma > 0")
    el, et = lindhard_real_eps(Omega, k, k_f, m)
    return DielectricPair(complex(el), complex(et), "lindhard", "real", Omega, k, k / k_f)


def lindhard_imag(*args, **kwargs):
    raise UnsupportedError(
        "Lindhard functions are only available on the real frequency axis"
    )


def evaluate(model: str, axis: str, Omega: float, k: float, m: MaterialParams,
             k_f: Optional[float] = None) -> DielectricPair:
    """Dispatch on (model, axis) with ``k`` the dimensionless wave number."""
    if model not in MODELS:
        raise DomainError(f"unknown model {model!r}; choose from {MODELS}")
    ratio = None if k_f is None else k / k_f
    if model == "local":
        e = drude_local(ResponsePoint(Omega, 0.0, axis), m)
        return DielectricPair(e, e, "local", axis, Omega, k, ratio)
    if model == "lindhard":
        if axis == "imaginary":
            lindhard_imag()
        if k_f is None:
            raise DomainError("the Lindhard model needs a Fermi wave number k_f")
        return lindhard_real(Omega, k, k_f, m)
    if axis == "imaginary":
        pair = boltzmann_imag(Omega, float(nonlocal_v(Omega, k, m)), m)
        return DielectricPair(pair.eps_l, pair.eps_t, "boltzmann", axis, Omega, k, ratio)
    pair = boltzmann_real(Omega, k, m)
    return DielectricPair(pair.eps_l, pair.eps_t, "boltzmann", axis, Omega, k, ratio)
