"""Material parameters, presets and conversion to dimensionless variables.

Everything downstream of this module works with the dimensionless set

    Omega = omega / omega_p,   Q = c q / omega_p,   gamma = omega_tau / omega_p,

and lengths in units of the penetration depth ``delta = c / omega_p``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .constants import C, CM_PER_S, NM
from .errors import DomainError, NotFoundError, ParseError

AXES = ("real", "imaginary")


@dataclass(frozen=True)
class ChiTable:
    """Tabulated interband susceptibility, linear in log(Omega) between nodes.

    Outside the grid the endpoint values are held constant.
    """

    omega: np.ndarray
    chi: np.ndarray
    axis: str = "imaginary"
    mode: str = "linear-log-omega"

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        chi = np.asarray(self.chi)
        if omega.ndim != 1 or omega.shape != chi.shape:
            raise DomainError("omega and chi must be 1-D arrays of equal length")
        if self.axis not in AXES:
            raise DomainError(f"axis must be one of {AXES}")
        if omega.size and np.any(omega <= 0):
            raise DomainError("table frequencies must be positive")
        if omega.size > 1 and np.any(np.diff(omega) <= 0):
            raise DomainError("table frequencies must be strictly increasing")
        if self.axis == "imaginary":
            if np.iscomplexobj(chi) and np.any(chi.imag != 0):
                raise DomainError("imaginary-axis susceptibility must be real")
            chi = chi.real.astype(float)
            if np.any(chi < 0):
                raise DomainError("imaginary-axis susceptibility must be non-negative")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "chi", chi)

    def __len__(self):
        return self.omega.size

    def __call__(self, Omega):
        Omega = np.asarray(Omega, dtype=float)
        if self.omega.size == 0:
            return np.zeros_like(Omega)
        if self.omega.size == 1:
            return np.full_like(Omega, self.chi[0], dtype=self.chi.dtype)
        with np.errstate(divide="ignore"):
            x = np.log(np.maximum(Omega, 0.0))
        lx = np.log(self.omega)
        if np.iscomplexobj(self.chi):
            return np.interp(x, lx, self.chi.real) + 1j * np.interp(x, lx, self.chi.imag)
        return np.interp(x, lx, self.chi)

    # these tables are immutable; hash by identity
    __hash__ = object.__hash__
    __eq__ = object.__eq__


EMPTY_CHI = ChiTable(np.array([]), np.array([]))


@dataclass(frozen=True)
class MaterialParams:
    """Free-electron metal: plasma frequency, relaxation and Fermi velocity.

    Attributes
    ----------
    omega_p : float
        Plasma frequency in rad/s.
    gamma : float
        Relaxation rate in units of ``omega_p``.
    v_f_over_c : float
        Fermi velocity in units of the speed of light.
    chi_ib : ChiTable, optional
        Interband susceptibility; absent means zero everywhere.
    name : str
    """

    omega_p: float
    gamma: float
    v_f_over_c: float
    chi_ib: Optional[ChiTable] = None
    name: str = "custom"

    def __post_init__(self):
        if not (self.omega_p > 0 and math.isfinite(self.omega_p)):
            raise DomainError("omega_p must be positive and finite")
        if not 0 <= self.gamma < 1:
            raise DomainError("gamma must lie in [0, 1)")
        if not 0 < self.v_f_over_c < 1:
            raise DomainError("v_F/c must lie in (0, 1)")

    @property
    def delta_m(self):
        """Penetration depth c/omega_p in metres."""
        return C / self.omega_p

    def chi(self, Omega, axis="imaginary"):
        """Interband susceptibility at dimensionless frequency ``Omega``."""
        if self.chi_ib is None or len(self.chi_ib) == 0:
            return np.zeros_like(np.asarray(Omega, dtype=float))
        if self.chi_ib.axis != axis:
            raise DomainError(
                f"susceptibility is tabulated on the {self.chi_ib.axis} axis; "
                f"cannot evaluate it on the {axis} axis"
            )
        return self.chi_ib(Omega)

    def without_chi(self):
        return MaterialParams(self.omega_p, self.gamma, self.v_f_over_c, None, self.name)

    def replace(self, **changes):
        fields = dict(omega_p=self.omega_p, gamma=self.gamma, v_f_over_c=self.v_f_over_c,
                      chi_ib=self.chi_ib, name=self.name)
        fields.update(changes)
        return MaterialParams(**fields)


@dataclass(frozen=True)
class ResponsePoint:
    """Evaluation site (Omega, Q) on the real or imaginary frequency axis."""

    Omega: float
    Q: float
    axis: str = "imaginary"

    def __post_init__(self):
        if self.axis not in AXES:
            raise DomainError(f"axis must be one of {AXES}")
        if self.Omega < 0 or self.Q < 0:
            raise DomainError("Omega and Q must be non-negative")

    @property
    def evanescent(self):
        return self.axis == "imaginary" or self.Q > self.Omega

    @property
    def propagating(self):
        return not self.evanescent


_GOLD_OMEGA_P = 1.37e16
_PRESETS = {
    "gold": dict(omega_p=_GOLD_OMEGA_P, gamma=3e-3, v_f_cm_s=1.4e8),
    "gold-force-fit": dict(omega_p=_GOLD_OMEGA_P, gamma=4e-3, v_f_cm_s=1.4e8),
    # omega_p borrowed from gold: only dimensionless quantities are compared
    "potassium": dict(omega_p=_GOLD_OMEGA_P, gamma=1e-3, v_f_cm_s=0.85e8),
}


def available_presets():
    return tuple(_PRESETS)


def preset(name: str) -> MaterialParams:
    """Return a built-in parameter set: ``gold``, ``gold-force-fit`` or ``potassium``."""
    try:
        p = _PRESETS[name]
    except KeyError:
        raise NotFoundError(
            f"unknown preset {name!r}; available: {', '.join(_PRESETS)}"
        ) from None
    return MaterialParams(
        omega_p=p["omega_p"],
        gamma=p["gamma"],
        v_f_over_c=p["v_f_cm_s"] * CM_PER_S / C,
        name=name,
    )


def penetration_depth(m: MaterialParams) -> float:
    """c/omega_p in nanometres."""
    return m.delta_m / NM


def to_dimensionless(m: MaterialParams, omega: float, q: float) -> ResponsePoint:
    """Convert (omega [rad/s], q [1/m]) into a real-axis ResponsePoint."""
    if omega < 0 or q < 0:
        raise DomainError("omega and q must be non-negative")
    return ResponsePoint(Omega=omega / m.omega_p, Q=C * q / m.omega_p, axis="real")


def from_dimensionless(m: MaterialParams, point: ResponsePoint):
    """Inverse of :func:`to_dimensionless`: returns (omega [rad/s], q [1/m])."""
    return point.Omega * m.omega_p, point.Q * m.omega_p / C


def separation_to_d(m: MaterialParams, a_nm: float) -> float:
    """Separation in units of the penetration depth."""
    return a_nm * NM / m.delta_m


def load_chi_table(source, axis=None) -> ChiTable:
    """Parse a susceptibility CSV.

    The header is ``omega_dimensionless,chi`` (imaginary axis, real values)
    or ``omega_dimensionless,chi_re,chi_im`` (real axis, complex values).
    Blank lines and ``#`` comments are ignored.

    Parameters
    ----------
    source : bytes, str, path or binary/text stream
    axis : {"real", "imaginary"}, optional
        Overrides the axis implied by the header.
    """
    text = _read_text(source)
    header = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cells = [c.strip() for c in next(csv.reader([line]))]
        if header is None:
            header = cells
            if header not in (["omega_dimensionless", "chi"],
                              ["omega_dimensionless", "chi_re", "chi_im"]):
                raise ParseError(f"unexpected header {','.join(header)!r}", lineno)
            continue
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(cells)}", lineno)
        try:
            nums = [float(c) for c in cells]
        except ValueError:
            raise ParseError(f"non-numeric value in {line!r}", lineno) from None
        if not all(math.isfinite(v) for v in nums):
            raise ParseError("non-finite value", lineno)
        if nums[0] <= 0:
            raise ParseError("omega_dimensionless must be positive", lineno)
        if rows and nums[0] <= rows[-1][1][0]:
            raise ParseError("omega_dimensionless must be strictly increasing", lineno)
        rows.append((lineno, nums))
    if header is None:
        return ChiTable(np.array([]), np.array([]), axis=axis or "imaginary")
    omega = np.array([r[1][0] for r in rows])
    if len(header) == 2:
        chi = np.array([r[1][1] for r in rows])
        default_axis = "imaginary"
    else:
        chi = np.array([r[1][1] + 1j * r[1][2] for r in rows])
        default_axis = "real"
    axis = axis or default_axis
    if axis == "imaginary":
        for lineno, nums in rows:
            if len(nums) == 3 and nums[2] != 0:
                raise ParseError("imaginary-axis susceptibility must be real", lineno)
            if nums[1] < 0:
                raise ParseError("imaginary-axis susceptibility must be non-negative", lineno)
    return ChiTable(omega, chi, axis=axis)


def load_material_config(path) -> MaterialParams:
    """Read a flat ``key = value`` material file.

    Keys: ``omega_p_rad_s``, ``gamma``, ``v_f_cm_s``, ``name`` and optionally
    ``chi_table`` (path, relative to the config file).
    """
    path = Path(path)
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {line!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in ("omega_p_rad_s", "gamma", "v_f_cm_s", "name", "chi_table"):
            raise ParseError(f"unknown key {key!r}", lineno)
        values[key] = (value, lineno)
    missing = {"omega_p_rad_s", "gamma", "v_f_cm_s"} - values.keys()
    if missing:
        raise ParseError(f"missing keys: {', '.join(sorted(missing))}")

    def num(key):
        value, lineno = values[key]
        try:
            return float(value)
        except ValueError:
            raise ParseError(f"{key} is not a number: {value!r}", lineno) from None

    chi = None
    if "chi_table" in values:
        chi_path = Path(values["chi_table"][0])
        if not chi_path.is_absolute():
            chi_path = path.parent / chi_path
        chi = load_chi_table(chi_path)
    return MaterialParams(
        omega_p=num("omega_p_rad_s"),
        gamma=num("gamma"),
        v_f_over_c=num("v_f_cm_s") * CM_PER_S / C,
        chi_ib=chi,
        name=values.get("name", (path.stem, 0))[0],
    )


def resolve_material(spec: str) -> MaterialParams:
    """Preset name or path to a material config file."""
    if spec in _PRESETS:
        return preset(spec)
    p = Path(spec)
    if p.exists():
        return load_material_config(p)
    raise NotFoundError(
        f"{spec!r} is neither a preset ({', '.join(_PRESETS)}) nor a config file"
    )


def _read_text(source):
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, Path):
        return source.read_text()
    if isinstance(source, str):
        if "\n" not in source and Path(source).is_file():
            return Path(source).read_text()
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data
