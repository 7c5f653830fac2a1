"""INI run configuration for the command-line pipeline.

Numeric keys carry their unit in the name: ``kappa_e_c_two_pi_MHz = 1.25``
means 2π × 1.25 MHz, ``gamma_MHz = 12`` a plain 12e6 1/s and ``mu_ns = 220``
a time.  A bare key may instead hold a quantity string such as
``kappa_e_c = 2π×1.25 MHz``.  The raw strings are kept verbatim, so a
persisted config parses back to the very same floats.
"""
from __future__ import annotations

import configparser
import hashlib
import io
import re
from dataclasses import dataclass
from pathlib import Path

from .dynamics import DEFAULT_MAX_STEP, ModeModel
from .model import (
    TWO_PI,
    GaussianPump,
    PiecewiseExpPump,
    PumpShape,
    SystemParams,
    TabulatedPump,
    TimeGrid,
    ZeroPump,
    _RATE_UNITS,
    _TIME_UNITS,
    parse_quantity,
)


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


_UNIT_KEY = re.compile(r"^(?P<base>.+?)(?P<twopi>_two_pi)?_(?P<unit>[A-Za-z]+)$")

DEFAULTS = {
    "system": {
        "kappa_e_i_two_pi_MHz": "0.55",
        "kappa_e_c_two_pi_MHz": "1.25",
        "kappa_o_i_two_pi_GHz": "0.65",
        "kappa_o_c_two_pi_GHz": "0.65",
        "g0_two_pi_kHz": "260",
        "omega_o_two_pi_THz": "190",
        "omega_e_two_pi_GHz": "5",
    },
    "pump": {"shape": "gaussian", "G2": "6.5", "sigma_ns": "40", "nu_ns": "120"},
    "grid": {"t_start_ns": "0", "t_end_ns": "600", "n_points": "241"},
    "dynamics": {
        "engine": "gaussian",
        "max_step_ns": repr(DEFAULT_MAX_STEP * 1e9),
        "output_ports": "true",
        "fock_cutoffs": "4, 4",
        "divergence_bound": "1e3",
    },
    "schmidt": {"magnitude_only": "false", "export_modes": "3"},
    "catcher": {
        "kappa1_init_two_pi_MHz": "2",
        "kappa_min_two_pi_MHz": "0",
        "kappa_max_two_pi_MHz": "20",
    },
    "output": {"directory": "out"},
}

PUMP_FIELDS = {
    "piecewise_exp": ("G1", "gamma", "mu"),
    "gaussian": ("G2", "sigma", "nu"),
    "tabulated": ("times", "values"),
    "none": (),
}


KNOWN = {
    "system": {"kappa_e_i", "kappa_e_c", "kappa_o_i", "kappa_o_c", "g0", "omega_o", "omega_e"},
    "pump": {"shape", *(f for fields in PUMP_FIELDS.values() for f in fields)},
    "grid": {"t_start", "t_end", "n_points"},
    "dynamics": {"engine", "max_step", "output_ports", "fock_cutoffs", "divergence_bound"},
    "schmidt": {"magnitude_only", "export_modes"},
    "catcher": {"kappa1_init", "kappa_min", "kappa_max"},
    "output": {"directory"},
}


def _split_key(key):
    """``kappa_e_c_two_pi_MHz`` -> ("kappa_e_c", True, "MHz"); bare keys give (key, False, None)."""
    match = _UNIT_KEY.match(key)
    if match and (match["unit"] in _RATE_UNITS or match["unit"] in _TIME_UNITS):
        return match["base"], bool(match["twopi"]), match["unit"]
    return key, False, None


def _scale(unit, two_pi):
    scale = _RATE_UNITS.get(unit) or _TIME_UNITS[unit]
    if two_pi:
        if unit in _TIME_UNITS:
            raise ConfigError(f"2π prefix is meaningless for a time unit ({unit})")
        scale = TWO_PI * scale
    return scale


def _find(section: dict, base: str):
    """The single key of ``section`` that spells quantity ``base``, or None."""
    hits = [k for k in section if _split_key(k)[0] == base]
    if len(hits) > 1:
        raise ConfigError(f"quantity {base!r} given more than once: {', '.join(sorted(hits))}")
    return hits[0] if hits else None


@dataclass(frozen=True)
class RunConfig:
    """Raw ``{section: {key: text}}`` plus helpers that build the model objects."""

    raw: dict

    # construction ------------------------------------------------------
    @classmethod
    def defaults(cls) -> "RunConfig":
        return cls({s: dict(v) for s, v in DEFAULTS.items()})

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            parser.read_string(text, source=source)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from None
        raw = {s: dict(v) for s, v in DEFAULTS.items()}
        for name in parser.sections():
            if name not in raw:
                raise ConfigError(f"unknown section [{name}] in {source}")
            if name == "pump" and "shape" in parser[name]:
                raw["pump"] = {}
            for key, value in parser[name].items():
                _set(raw[name], key, value)
        cfg = cls(raw)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        return cls.from_text(text, str(path))

    def with_overrides(self, assignments) -> "RunConfig":
        """Apply ``section.key=value`` strings (or tuples) on top of this config."""
        raw = {s: dict(v) for s, v in self.raw.items()}
        for item in assignments:
            if isinstance(item, str):
                lhs, sep, value = item.partition("=")
                section, dot, key = lhs.strip().partition(".")
                if not (sep and dot and key):
                    raise ConfigError(f"override {item!r} is not of the form section.key=value")
            else:
                section, key, value = item
            if section not in raw:
                raise ConfigError(f"unknown section {section!r} in override")
            if section == "pump" and key == "shape" and value.strip() != raw["pump"].get("shape"):
                raw["pump"] = {}
            _set(raw[section], key.strip(), value.strip())
        cfg = RunConfig(raw)
        cfg.validate()
        return cfg

    # serialization -----------------------------------------------------
    def to_text(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        for section in DEFAULTS:
            parser[section] = dict(sorted(self.raw[section].items()))
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    def config_hash(self) -> str:
        """sha256 over everything except the output directory."""
        raw = {s: v for s, v in self.raw.items() if s != "output"}
        canon = "\n".join(f"{s}.{k}={raw[s][k]}" for s in sorted(raw) for k in sorted(raw[s]))
        return hashlib.sha256(canon.encode()).hexdigest()

    # typed access ------------------------------------------------------
    def quantity(self, section: str, base: str, default=None) -> float:
        sec = self.raw[section]
        key = _find(sec, base)
        if key is None:
            if default is None:
                raise ConfigError(f"missing [{section}] {base}")
            return default
        _, two_pi, unit = _split_key(key)
        text = sec[key]
        try:
            if unit is None:
                return parse_quantity(text)
            return float(text) * _scale(unit, two_pi)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {text!r}: {exc}") from None

    def number(self, section: str, key: str, kind=float):
        try:
            return kind(self.raw[section][key])
        except KeyError:
            raise ConfigError(f"missing [{section}] {key}") from None
        except ValueError:
            raise ConfigError(f"[{section}] {key} = {self.raw[section][key]!r} is not a valid {kind.__name__}") from None

    def flag(self, section: str, key: str) -> bool:
        text = self.raw[section].get(key, "false").strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"[{section}] {key} = {text!r} is not a boolean")

    def system(self) -> SystemParams:
        q = lambda base, default=None: self.quantity("system", base, default)  # noqa: E731
        try:
            return SystemParams(
                kappa_e_i=q("kappa_e_i"), kappa_e_c=q("kappa_e_c"),
                kappa_o_i=q("kappa_o_i"), kappa_o_c=q("kappa_o_c"), g0=q("g0"),
                omega_o=q("omega_o", TWO_PI * 190e12), omega_e=q("omega_e", TWO_PI * 5e9),
            )
        except ValueError as exc:
            raise ConfigError(f"[system] {exc}") from None

    def pump(self) -> PumpShape:
        shape = self.raw["pump"].get("shape", "").strip()
        if shape not in PUMP_FIELDS:
            raise ConfigError(f"[pump] shape must be one of {', '.join(PUMP_FIELDS)}, not {shape!r}")
        try:
            if shape == "piecewise_exp":
                return PiecewiseExpPump(self.number("pump", "G1"), self.quantity("pump", "gamma"),
                                        self.quantity("pump", "mu"))
            if shape == "gaussian":
                return GaussianPump(self.number("pump", "G2"), self.quantity("pump", "sigma"),
                                    self.quantity("pump", "nu"))
            if shape == "tabulated":
                key = _find(self.raw["pump"], "times")
                if key is None or _split_key(key)[2] not in _TIME_UNITS:
                    raise ConfigError("[pump] tabulated shape needs times_<time unit> and values lists")
                scale = _scale(_split_key(key)[2], False)
                times = [float(x) * scale for x in self.raw["pump"][key].split(",")]
                values = [float(x) for x in self.number("pump", "values", str).split(",")]
                return TabulatedPump(tuple(times), tuple(values))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"[pump] {exc}") from None
        return ZeroPump()

    def grid(self) -> TimeGrid:
        try:
            return TimeGrid(self.quantity("grid", "t_start"), self.quantity("grid", "t_end"),
                            self.number("grid", "n_points", int))
        except ValueError as exc:
            raise ConfigError(f"[grid] {exc}") from None

    def engine(self) -> str:
        engine = self.raw["dynamics"].get("engine", "gaussian").strip()
        if engine not in ("gaussian", "fock"):
            raise ConfigError(f"[dynamics] engine must be gaussian or fock, not {engine!r}")
        return engine

    def fock_cutoffs(self) -> tuple[int, int]:
        try:
            parts = tuple(int(x) for x in self.raw["dynamics"]["fock_cutoffs"].split(","))
        except (KeyError, ValueError):
            raise ConfigError("[dynamics] fock_cutoffs must be two integers, e.g. '4, 4'") from None
        if len(parts) != 2 or min(parts) < 3:
            raise ConfigError("[dynamics] fock_cutoffs must be two integers >= 3")
        return parts

    def model(self) -> ModeModel:
        max_step = self.quantity("dynamics", "max_step")
        bound = self.number("dynamics", "divergence_bound")
        if not (max_step > 0 and bound > 0):
            raise ConfigError("[dynamics] max_step and divergence_bound must be positive")
        return ModeModel(self.system(), self.pump(), self.grid(), self.flag("dynamics", "output_ports"),
                         max_step, bound)

    def catcher_options(self) -> tuple[float, tuple[float, float]]:
        init = self.quantity("catcher", "kappa1_init")
        bounds = (self.quantity("catcher", "kappa_min"), self.quantity("catcher", "kappa_max"))
        if not (0 <= bounds[0] <= init <= bounds[1]) or init <= 0:
            raise ConfigError("[catcher] need 0 <= kappa_min <= kappa1_init <= kappa_max and kappa1_init > 0")
        return init, bounds

    def export_modes(self) -> int:
        n = self.number("schmidt", "export_modes", int)
        if n < 1:
            raise ConfigError("[schmidt] export_modes must be >= 1")
        return n

    def output_directory(self) -> str:
        return self.raw["output"].get("directory", "out")

    def validate(self):
        for section, keys in self.raw.items():
            for key in keys:
                if _split_key(key)[0] not in KNOWN[section]:
                    raise ConfigError(f"unknown key [{section}] {key}")
        shape = self.raw["pump"].get("shape", "").strip()
        for key in self.raw["pump"]:
            base = _split_key(key)[0]
            if shape in PUMP_FIELDS and base != "shape" and base not in PUMP_FIELDS[shape]:
                raise ConfigError(f"[pump] {key} does not belong to shape {shape!r}")
        self.model()
        self.engine()
        self.fock_cutoffs()
        self.catcher_options()
        self.export_modes()
        self.flag("schmidt", "magnitude_only")


def _set(section: dict, key: str, value: str):
    """Assign ``key``, dropping any other spelling of the same quantity."""
    base = _split_key(key)[0]
    for other in [k for k in section if _split_key(k)[0] == base and k != key]:
        del section[other]
    section[key] = value
