"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""

import sys
import time

import numpy as np
import pytest

from skindepth.dielectric import boltzmann_real_eps, eps_local, lindhard_real_eps
from skindepth.force import (
    force_plate_plate,
    force_sphere_plate,
    ideal_force,
    nonlocal_correction,
)
from skindepth.impedance import (
    asymptotic_FG,
    imag_integrands,
    impedances_imag,
    leontovich,
    local_impedances_imag,
    nonlocal_pair_imag,
)
from skindepth.materials import ResponsePoint, preset
from skindepth.optics import absorptance_sweep
from skindepth.quadrature import Decay, IntegralSpec, brute_force_oracle, integrate_adaptive

GOLD = preset("gold")
L0 = 4 / (3 * np.sqrt(3))


def test_01_asymptotic_anchors(record):
    t = time.perf_counter()
    F0, G0 = asymptotic_FG(0.0)
    rel = []
    for b in (50.0, 100.0):
        F, G = asymptotic_FG(b)
        rel.append(abs(F / (L0 / b + (np.log(2 * b) - 0.5) / (np.pi * b ** 3)) - 1))
        rel.append(abs(G / (L0 / b - (np.log(2 * b) + 0.5) / (np.pi * b ** 3)) - 1))
    dt = time.perf_counter() - t
    ok = abs(F0 - 1) <= 1e-9 and abs(G0 - 0.5) <= 1e-9 and max(rel) <= 1e-3 and dt < 1.0
    record(1, "asymptotic F/G anchors", ok,
           f"|F(0)-1|={abs(F0 - 1):.1e}, |G(0)-1/2|={abs(G0 - 0.5):.1e}, "
           f"max large-b rel dev={max(rel):.2e}, {dt:.3f} s")


def test_02_local_reduction(record):
    t = time.perf_counter()
    Om, Q = np.meshgrid(np.logspace(-5, 0, 20), np.logspace(-4, 1, 20))
    z = impedances_imag(Om, Q, GOLD, local_f=True, rel_tol=1e-10)
    zs, ozp = local_impedances_imag(Om, Q, eps_local(Om, GOLD))
    dev = max(np.max(np.abs(z.z_s / zs - 1)), np.max(np.abs(z.omega_z_p / ozp - 1)))
    dt = time.perf_counter() - t
    record(2, "local-reduction oracle (20x20)", dev <= 1e-8 and dt < 60,
           f"max rel dev={dev:.1e}, {dt:.2f} s")


def test_03_leontovich_consistency(record):
    ratios = []
    for Om in (1e-5, 1e-4, 1e-3):
        p = nonlocal_pair_imag(ResponsePoint(Om, 1e-6, "imaginary"), GOLD)
        L = leontovich(Om, GOLD)
        ratios += [p.z_s / L, p.z_p / L]
    worst = max(abs(r - 1) for r in ratios)
    record(3, "Leontovich limit, gold, Q=1e-6", worst <= 0.01,
           "Z/Z_Leont = " + ", ".join(f"{r:.3f}" for r in ratios[::2]) + f" (max dev {worst:.0%})")


def test_03_supplement_clean_metal():
    # the same comparison inside the strong anomalous window (gamma -> 0)
    m = GOLD.replace(gamma=1e-9)
    for Om in (5e-7, 1e-6, 2e-6):
        p = nonlocal_pair_imag(ResponsePoint(Om, 1e-6, "imaginary"), m)
        L = leontovich(Om, m)
        assert p.z_s == pytest.approx(L, rel=0.01)
        assert p.z_p == pytest.approx(L, rel=0.01)


def test_04_fig4_deviation_band(record):
    Om = np.logspace(-5, -1, 41)
    devs = []
    for Q in (1e-2, 1e-1):
        z = impedances_imag(Om, Q, GOLD)
        zs, _ = local_impedances_imag(Om, Q, eps_local(Om, GOLD))
        devs.append(np.max(np.abs(z.z_s / zs - 1)))
    ok = all(0.005 <= d <= 0.04 for d in devs)
    record(4, "Z_s deviation band [0.5%, 4%]", ok,
           f"Q=1e-2: {devs[0]:.2%}, Q=1e-1: {devs[1]:.2%}")


def test_05_thomas_fermi(record):
    Q = 0.1
    Om = np.logspace(-2, -5, 31)
    z = impedances_imag(Om, Q, GOLD)
    _, ozp_loc = local_impedances_imag(Om, Q, eps_local(Om, GOLD))
    ratio = z.omega_z_p / ozp_loc
    mono = bool(np.all(np.diff(ratio) > 0))
    lim = float(impedances_imag(1e-6, Q, GOLD).omega_z_p)
    target = Q * Q * GOLD.v_f_over_c / np.sqrt(3)
    dev = abs(lim / target - 1)
    record(5, "Thomas-Fermi signature", mono and dev <= 0.02,
           f"Z_p/Z_p_loc monotone={mono} ({ratio[0]:.3g} -> {ratio[-1]:.3g}), "
           f"Omega Z_p at 1e-6 vs Q^2 v_F/sqrt3: {dev:.2e}")


def test_06_perfect_conductor(record):
    t = time.perf_counter()
    eta = [force_plate_plate(a, GOLD, override="perfect-conductor").value / ideal_force(a)
           for a in (100.0, 500.0, 2000.0)]
    exact = all(ideal_force(a) / ideal_force(2 * a) == 16.0 for a in (100.0, 500.0, 2000.0))
    dt = time.perf_counter() - t
    ok = all(abs(e - 1) <= 1e-3 for e in eta) and exact and dt < 60
    record(6, "perfect-conductor pipeline", ok,
           "eta-1 = " + ", ".join(f"{e - 1:.1e}" for e in eta) + f", F(a)/F(2a)==16: {exact}, {dt:.2f} s")


def _interior_maxima(x, y, lo, hi):
    i = np.arange(1, len(y) - 1)
    peak = (y[i] > y[i - 1]) & (y[i] > y[i + 1]) & (x[i] >= lo) & (x[i] <= hi)
    return x[i][peak]


def test_07_absorptance(record):
    k = preset("potassium")
    t0 = absorptance_sweep(k, 0.0, np.logspace(-4, -2, 21))
    excess = np.max(t0.column("A_s_nonlocal") - t0.column("A_s_local"))
    om = np.logspace(np.log10(0.015), np.log10(0.6), 61)
    t75 = absorptance_sweep(k, 75.0, om)
    dp = t75.column("A_p_nonlocal") - t75.column("A_p_local")
    ds = t75.column("A_s_nonlocal") - t75.column("A_s_local")
    pk_p = _interior_maxima(om, dp, 0.03, 0.3)
    pk_s = _interior_maxima(om, ds, 0.03, 0.3)
    ok = excess > 0 and pk_p.size > 0 and pk_s.size == 0 and t0.converged.all() and t75.converged.all()
    record(7, "absorptance shapes (potassium)", ok,
           f"theta=0 max excess={excess:.3g}; theta=75 p peak at Omega={pk_p.tolist()}, "
           f"s peaks={pk_s.tolist()}")


def test_08_headline_correction(record):
    t = time.perf_counter()
    seps = (100.0, 150.0, 200.0, 250.0, 300.0)
    pp = [nonlocal_correction(a, GOLD) for a in seps]
    sp = [nonlocal_correction(a, GOLD, "sphere_plate", radius_nm=1e5) for a in seps]
    dt = time.perf_counter() - t
    rel = np.array([c.relative for c in pp])
    ok = (all(c.converged for c in pp + sp)
          and np.all(rel < 0) and np.all((np.abs(rel) >= 1e-3) & (np.abs(rel) <= 1e-2))
          and all(abs(c.relative_p) > abs(c.relative_s) for c in pp)
          and all(abs(s.relative) < abs(p.relative) for s, p in zip(sp, pp))
          and dt < 1800)
    record(8, "headline nonlocal correction", ok,
           "pp dF/F = " + ", ".join(f"{a:.0f}nm:{r:.3%}" for a, r in zip(seps, rel))
           + "; sp = " + ", ".join(f"{c.relative:.3%}" for c in sp) + f"; {dt:.0f} s")


def test_09_difference_vs_direct(record):
    m = GOLD.without_chi()
    c = nonlocal_correction(275.0, GOLD)
    loc = force_plate_plate(275.0, m, "local")
    nl = force_plate_plate(275.0, m, "boltzmann")
    direct = nl.value - loc.value
    bar = abs(c.error_relative * c.force_local) + nl.error + loc.error
    ok = abs(c.delta - direct) <= bar and c.converged and nl.converged and loc.converged
    record(9, "difference vs direct subtraction (275 nm)", ok,
           f"difference path {c.delta / loc.value:.5%}, direct {direct / loc.value:.5%}, "
           f"gap {abs(c.delta - direct):.2e} Pa <= bar {bar:.2e} Pa")


def test_10_lindhard_consistency(record):
    Om, K = (g.ravel() for g in np.meshgrid(np.logspace(-3, -0.5, 5), np.logspace(-1, 1, 5)))

    def dev(z):
        el, et = lindhard_real_eps(Om, K, K / (2 * z), GOLD)
        bl, bt = boltzmann_real_eps(Om, K, GOLD)
        return max(np.max(np.abs(el / bl - 1)), np.max(np.abs(et / bt - 1)))

    d1, d2 = dev(1e-4), dev(5e-5)
    ok = d1 <= 1e-3 and 3 <= d1 / d2 <= 5
    record(10, "Lindhard -> Boltzmann (z=1e-4)", ok, f"max rel dev={d1:.2e}, halving ratio={d1 / d2:.3f}")


def test_11_quadrature_oracle(record):
    specs = [
        IntegralSpec(lambda x: np.exp(-x), 0.0, np.inf, rel_tol=1e-10, decay=Decay("exponential", 1.0, 1.0)),
        IntegralSpec(lambda x: 1 / np.cosh(x), 0.0, np.inf, rel_tol=1e-10, decay=Decay("sech", scale=1.0)),
        IntegralSpec(lambda x: x ** -0.5, 0.0, 1.0, rel_tol=1e-10),
    ]
    kws = [dict(upper=60.0), dict(upper=60.0), dict(grading=4.0)]
    Om, Q = 1e-2, 1e-1
    specs.append(IntegralSpec(lambda c: imag_integrands(c, Om, Q, GOLD)[0], 0.0, np.inf, rel_tol=1e-10,
                              decay=Decay("sech", scale=2 / np.pi * Om / Q)))
    kws.append(dict(upper=45.0))
    devs = []
    for spec, kw in zip(specs, kws):
        a = integrate_adaptive(spec).value
        o = brute_force_oracle(spec, 10 ** 6, **kw).value
        devs.append(abs(a - o) / abs(a))
    record(11, "adaptive vs brute-force oracle", max(devs) <= 1e-8,
           "rel dev = " + ", ".join(f"{d:.1e}" for d in devs))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-rN"]))
