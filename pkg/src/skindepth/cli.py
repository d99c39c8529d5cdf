"""Command-line front end: ``skindepth <command> [options]``.

Every command writes one table (CSV by default, JSON on request).  Grids are
given as ``start:stop:count:log|lin``, a single number, or a comma list.
Work is split into fixed-size chunks independent of the worker count and
merged in grid order, so the output does not depend on ``--workers``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import dielectric, force, impedance, optics
from .errors import DomainError, NotFoundError, ParseError, SkinDepthError, UnsupportedError
from .materials import ResponsePoint, available_presets, penetration_depth, preset, resolve_material

EXIT_OK, EXIT_USAGE, EXIT_UNSUPPORTED, EXIT_PARTIAL = 0, 1, 2, 3
CHUNK = 64
_AXIS_ALIASES = {"real": "real", "imag": "imaginary", "imaginary": "imaginary"}
_GEOMETRY_ALIASES = {"pp": "plate_plate", "sp": "sphere_plate",
                     "plate_plate": "plate_plate", "sphere_plate": "sphere_plate"}


class UsageError(SkinDepthError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def parse_grid(text: str, field: str, *, positive=True) -> np.ndarray:
    """Parse ``start:stop:count:log|lin``, a single number or ``a,b,c``."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 4:
                raise UsageError(f"{field}: expected start:stop:count:log|lin, got {text!r}")
            start, stop, count, kind = float(parts[0]), float(parts[1]), int(parts[2]), parts[3]
            if count < 2:
                raise UsageError(f"{field}: grid count must be at least 2")
            if not start < stop:
                raise UsageError(f"{field}: grid start must be below stop")
            if kind == "log":
                if start <= 0:
                    raise UsageError(f"{field}: log grid needs a positive start")
                values = np.logspace(math.log10(start), math.log10(stop), count)
            elif kind == "lin":
                values = np.linspace(start, stop, count)
            else:
                raise UsageError(f"{field}: grid kind must be 'log' or 'lin', got {kind!r}")
        else:
            values = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"{field}: cannot parse grid {text!r}") from None
    if not np.all(np.isfinite(values)):
        raise UsageError(f"{field}: grid values must be finite")
    if positive and np.any(values <= 0):
        raise UsageError(f"{field}: grid values must be positive")
    return values


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    return f"{float(v):.12g}"


def _json_value(v):
    if v is None or isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    return float(f"{float(v):.12g}")


# grid coordinates stay populated even on unconverged rows
_KEYS = {"omega_dimensionless", "Q", "k_dimensionless", "a_nm", "radius_nm", "theta_deg"}


def _is_number(v):
    return isinstance(v, (float, int, np.floating, np.integer)) and not isinstance(v, (bool, np.bool_))


def _sanitize(row: dict) -> dict:
    """Blank non-finite numbers; unconverged rows keep only their coordinates."""
    ok = bool(row.get("converged", True))
    ok &= all(math.isfinite(float(v)) for v in row.values() if _is_number(v))
    out = {}
    for k, v in row.items():
        if _is_number(v) and (not ok and k not in _KEYS or not math.isfinite(float(v))):
            v = None
        out[k] = v
    out["converged"] = ok
    return out


def render(columns, rows, fmt="csv") -> str:
    if fmt == "json":
        payload = {"columns": list(columns),
                   "rows": [{c: _json_value(r.get(c)) for c in columns} for r in rows]}
        return json.dumps(payload, indent=1) + "\n"
    lines = [",".join(columns)]
    lines += [",".join(_fmt(r.get(c)) for c in columns) for r in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# tasks; each is a picklable tuple handled by _run_task


def _eps_task(p):
    m, model, axis, kf, omegas, ks = p["m"], p["model"], p["axis"], p["kf"], p["omega"], p["k"]
    rows = []
    for O, k in zip(omegas, ks):
        pair = dielectric.evaluate(model, axis, O, k, m, k_f=kf)
        el, et = complex(pair.eps_l), complex(pair.eps_t)
        rows.append(dict(omega_dimensionless=O, k_dimensionless=k, model=model, axis=axis,
                         eps_l_re=el.real, eps_l_im=el.imag, eps_t_re=et.real, eps_t_im=et.imag,
                         k_over_kf=pair.k_over_kf, converged=True))
    return rows


def _impedance_task(p):
    m, model, axis, omegas, qs, tol = p["m"], p["model"], p["axis"], p["omega"], p["q"], p["tol"]
    O = np.asarray(omegas)
    Q = np.asarray(qs)
    if model == "local":
        if axis == "imaginary":
            zs, ozp = impedance.local_impedances_imag(O, Q, dielectric.eps_local(O, m))
        else:
            eps = dielectric.eps_local(O, m, "real")
            pairs = [impedance.local_pair(ResponsePoint(o, q, "real"), complex(e))
                     for o, q, e in zip(O, Q, eps)]
            zs = np.array([pp.z_s for pp in pairs])
            ozp = np.array([pp.omega_z_p for pp in pairs])
        es = ep = np.zeros(O.size)
        conv = np.ones(O.size, dtype=bool)
    elif axis == "imaginary":
        if model == "lindhard":
            raise UnsupportedError("Lindhard impedances are only available on the real axis")
        b = impedance.impedances_imag(O, Q, m, local_f=p["local_f"], rel_tol=tol)
        zs, ozp, es, ep, conv = b.z_s, b.omega_z_p, b.err_s, b.err_p, b.converged
    else:
        b = impedance.impedances_real(O, Q, m, model, k_f=p["kf"], local_f=p["local_f"], rel_tol=tol)
        zs, ozp, es, ep, conv = b.z_s, b.omega_z_p, b.err_s, b.err_p, b.converged
    tag = "local-f" if p["local_f"] and model != "local" else model
    rows = []
    for i in range(O.size):
        z_s, oz = complex(zs[i]), complex(ozp[i])
        z_p = oz / O[i]
        rows.append(dict(omega_dimensionless=O[i], Q=Q[i], model=tag, axis=axis,
                         z_s_re=z_s.real, z_s_im=z_s.imag, z_p_re=z_p.real, z_p_im=z_p.imag,
                         omega_z_p_re=oz.real, omega_z_p_im=oz.imag,
                         err_s=es[i], err_p=ep[i] / O[i], converged=bool(conv[i])))
    return rows


def _absorptance_task(p):
    t = optics.absorptance_sweep(p["m"], p["theta"], p["omega"], p["model"], k_f=p["kf"],
                                 rel_tol=p["tol"])
    rows = []
    for i, r in enumerate(t.rows):
        row = dict(zip(t.columns, r))
        row.update(theta_deg=p["theta"], model=p["model"], converged=bool(t.converged[i]))
        rows.append(row)
    return rows


def _force_task(p):
    a = p["a"]
    r = force.lifshitz_force(a, p["m"], p["geometry"], p["model"], radius_nm=p["radius"],
                             override=p["override"], rel_tol=p["tol"])
    ideal = (force.ideal_force(a) if p["geometry"] == "plate_plate"
             else force.ideal_sphere_plate(a, p["radius"]))
    return [dict(a_nm=a, geometry=r.geometry, radius_nm=p["radius"], model=r.model,
                 value=r.value, value_s=r.value_s, value_p=r.value_p, error=r.error,
                 eta=r.value / ideal, pfa_ok=r.pfa_ok, converged=r.converged)]


def _correction_task(p):
    a = p["a"]
    c = force.nonlocal_correction(a, p["m"], p["geometry"], radius_nm=p["radius"],
                                  rel_tol=p["tol"], include_chi=p["include_chi"])
    return [dict(a_nm=a, geometry=c.geometry, radius_nm=p["radius"], dF=c.delta,
                 dF_rel_total=c.relative, dF_rel_p=c.relative_p, dF_rel_s=c.relative_s,
                 error_rel=c.error_relative, force_local=c.force_local, pfa_ok=c.pfa_ok,
                 converged=c.converged)]


_TASKS = {
    "eps": _eps_task,
    "impedance": _impedance_task,
    "absorptance": _absorptance_task,
    "force": _force_task,
    "correction": _correction_task,
}

COLUMNS = {
    "eps": ("omega_dimensionless", "k_dimensionless", "model", "axis", "eps_l_re", "eps_l_im",
            "eps_t_re", "eps_t_im", "k_over_kf", "converged"),
    "impedance": ("omega_dimensionless", "Q", "model", "axis", "z_s_re", "z_s_im", "z_p_re",
                  "z_p_im", "omega_z_p_re", "omega_z_p_im", "err_s", "err_p", "converged"),
    "absorptance": optics.SWEEP_COLUMNS + ("theta_deg", "model", "converged"),
    "force": ("a_nm", "geometry", "radius_nm", "model", "value", "value_s", "value_p", "error",
              "eta", "pfa_ok", "converged"),
    "correction": ("a_nm", "geometry", "radius_nm", "dF", "dF_rel_total", "dF_rel_p", "dF_rel_s",
                   "error_rel", "force_local", "pfa_ok", "converged"),
}


def _run_task(task):
    command, params = task
    return _TASKS[command](params)


def run_tasks(tasks, workers: int):
    """Evaluate tasks and concatenate their rows in task order."""
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_task, tasks))
    else:
        chunks = [_run_task(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def _chunks(n):
    return [slice(i, min(i + CHUNK, n)) for i in range(0, n, CHUNK)]


def build_tasks(args, m):
    cmd = args.command
    tol = args.tol
    if cmd in ("eps", "impedance"):
        axis = _AXIS_ALIASES[args.axis]
        if args.model == "lindhard" and axis == "imaginary":
            raise UnsupportedError("the Lindhard model is only available on the real frequency axis")
        if args.model == "lindhard" and args.kf is None:
            raise UsageError("--kf: the Lindhard model needs a Fermi wave number")
        omegas = parse_grid(args.omega_grid, "--omega-grid")
        second = parse_grid(args.q_grid, "--q-grid", positive=(cmd == "eps"))
        O, S = (g.ravel() for g in np.meshgrid(omegas, second, indexing="ij"))
        tasks = []
        for sl in _chunks(O.size):
            p = dict(m=m, model=args.model, axis=axis, kf=args.kf, omega=O[sl].tolist(),
                     tol=tol if tol is not None else impedance.DEFAULT_TOL,
                     local_f=getattr(args, "override", "none") == "local-f")
            p["k" if cmd == "eps" else "q"] = S[sl].tolist()
            tasks.append((cmd, p))
        return tasks
    if cmd == "absorptance":
        if args.model == "local":
            raise UsageError("--model: absorptance compares local with a nonlocal model; "
                             "choose boltzmann or lindhard")
        if args.model == "lindhard" and args.kf is None:
            raise UsageError("--kf: the Lindhard model needs a Fermi wave number")
        if not 0.0 <= args.theta < 90.0:
            raise UsageError("--theta: incidence angle must lie in [0, 90)")
        omegas = np.sort(parse_grid(args.omega_grid, "--omega-grid"))
        return [(cmd, dict(m=m, model=args.model, kf=args.kf, theta=args.theta,
                           omega=omegas[sl], tol=tol if tol is not None else impedance.DEFAULT_TOL))
                for sl in _chunks(omegas.size)]
    geometry = _GEOMETRY_ALIASES[args.geometry]
    if geometry == "sphere_plate" and args.radius_nm is None:
        raise UsageError("--radius-nm: sphere-plate geometry needs a radius")
    radius = args.radius_nm if geometry == "sphere_plate" else None
    a_grid = parse_grid(args.a_grid, "--a-grid")
    if cmd == "force":
        if args.model == "lindhard":
            raise UnsupportedError("forces use imaginary frequencies, where Lindhard is unavailable")
        return [(cmd, dict(m=m, a=float(a), geometry=geometry, radius=radius, model=args.model,
                           override=args.override, tol=tol if tol is not None else force.FORCE_TOL))
                for a in a_grid]
    return [(cmd, dict(m=m, a=float(a), geometry=geometry, radius=radius,
                       include_chi=args.include_chi,
                       tol=tol if tol is not None else force.CORRECTION_TOL))
            for a in a_grid]


def _presets_table():
    rows = []
    for name in available_presets():
        m = preset(name)
        rows.append(dict(name=name, omega_p_rad_s=m.omega_p, gamma=m.gamma,
                         v_f_over_c=m.v_f_over_c, delta_nm=penetration_depth(m)))
    return ("name", "omega_p_rad_s", "gamma", "v_f_over_c", "delta_nm"), rows


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="skindepth",
                     description="Nonlocal optical response, surface impedances and Casimir forces.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, model_default="boltzmann"):
        p.add_argument("--material", default="gold", help="preset name or path to a config file")
        p.add_argument("--model", choices=("local", "boltzmann", "lindhard"), default=model_default)
        p.add_argument("--tol", type=float, default=None, help="relative tolerance override")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: $SKINDEPTH_WORKERS or 1)")
        p.add_argument("--kf", type=float, default=None,
                       help="Fermi wave number in units of omega_p/c (Lindhard only)")

    p = sub.add_parser("eps", help="dielectric functions on an (Omega, k) grid")
    common(p)
    p.add_argument("--axis", choices=tuple(_AXIS_ALIASES), default="imag")
    p.add_argument("--omega-grid", required=True)
    p.add_argument("--q-grid", required=True, help="wave-number grid k (dimensionless)")

    p = sub.add_parser("impedance", help="surface impedances on an (Omega, Q) grid")
    common(p)
    p.add_argument("--axis", choices=tuple(_AXIS_ALIASES), default="imag")
    p.add_argument("--omega-grid", required=True)
    p.add_argument("--q-grid", required=True)
    p.add_argument("--override", choices=("none", "local-f"), default="none")

    p = sub.add_parser("absorptance", help="local and nonlocal absorptance sweep")
    common(p)
    p.add_argument("--omega-grid", required=True)
    p.add_argument("--theta", type=float, default=0.0, help="incidence angle in degrees")

    p = sub.add_parser("force", help="Casimir pressure or sphere-plate force")
    common(p, model_default="local")
    p.add_argument("--a-grid", required=True, help="separations in nm")
    p.add_argument("--geometry", choices=tuple(_GEOMETRY_ALIASES), default="pp")
    p.add_argument("--radius-nm", type=float, default=None)
    p.add_argument("--override", choices=force.OVERRIDES, default="none")

    p = sub.add_parser("correction", help="nonlocal correction to the force")
    common(p)
    p.add_argument("--a-grid", required=True, help="separations in nm")
    p.add_argument("--geometry", choices=tuple(_GEOMETRY_ALIASES), default="pp")
    p.add_argument("--radius-nm", type=float, default=None)
    p.add_argument("--include-chi", action="store_true",
                   help="keep the interband susceptibility (dropped by default)")

    p = sub.add_parser("presets", help="list built-in materials")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def _workers(args):
    if getattr(args, "workers", None) is not None:
        n = args.workers
    else:
        env = os.environ.get("SKINDEPTH_WORKERS", "1")
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"SKINDEPTH_WORKERS must be an integer, got {env!r}") from None
    if n < 1:
        raise UsageError("--workers must be at least 1")
    return n


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "presets":
            columns, rows = _presets_table()
            _emit(render(columns, rows, args.format), args.out)
            return EXIT_OK
        workers = _workers(args)
        if args.tol is not None and not 1e-14 < args.tol <= 1e-1:
            raise UsageError("--tol: relative tolerance must lie in (1e-14, 0.1]")
        m = resolve_material(args.material)
        tasks = build_tasks(args, m)
        rows = [_sanitize(r) for r in run_tasks(tasks, workers)]
    except UnsupportedError as exc:
        print(f"skindepth: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (UsageError, DomainError, ParseError, NotFoundError) as exc:
        print(f"skindepth: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(render(COLUMNS[args.command], rows, args.format), args.out)
    return EXIT_OK if all(r["converged"] for r in rows) else EXIT_PARTIAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
