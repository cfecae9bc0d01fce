"""Scenario configuration: a flat key=value file with optional [mode] sections.

Keys before any section header apply to every mode; a section named after the
mode (e.g. ``[plug]``) overrides them for that mode only.
"""

import configparser
import hashlib
import math
import os
from dataclasses import dataclass, field

from .errors import ConfigError

MODES = ("ml-curve", "bounded", "unbounded", "plug", "converge", "residual", "compare")
# modes in which alpha = 1 (the wave limit) is meaningful
WAVE_LIMIT_MODES = ("bounded", "plug", "compare", "converge", "residual")


def _float(text):
    return float(text)


def _int(text):
    v = float(text)
    if v != int(v):
        raise ValueError(f"{text!r} is not an integer")
    return int(v)


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def _floats(text):
    return tuple(float(p) for p in text.replace(";", ",").split(",") if p.strip())


def _ints(text):
    return tuple(_int(p) for p in text.replace(";", ",").split(",") if p.strip())


def _str(text):
    return text.strip()


@dataclass(frozen=True)
class Key:
    name: str
    parse: object
    default: object
    help: str
    modes: tuple = MODES
    mode_defaults: dict = field(default_factory=dict)


KEYS = (
    Key("alpha", _float, 0.5, "memory exponent, 0 < alpha < 1 (alpha = 1 allowed as the wave limit"
        " in bounded/plug/compare/converge/residual)", MODES[1:]),
    Key("mu0", _float, 1.0, "viscosity scale mu0 > 0", MODES[1:]),
    Key("h", _float, 1.0, "strip width h > 0", ("bounded", "plug", "converge", "residual", "compare")),
    Key("profile", _str, "sine(1)", "initial profile: constant(U0) | sine(k) | gaussian(center,width)"
        " | csv(path)", ("bounded", "unbounded", "converge", "residual", "compare"),
        {"unbounded": "gaussian(0,0.1)"}),
    Key("U0", _float, 1.0, "plug-flow initial velocity", ("plug",)),
    Key("n_modes", _int, 501, "sine modes kept by the series solution",
        ("bounded", "plug", "converge", "residual", "compare")),
    Key("t_max", _float, 1.0, "final time", MODES, {"ml-curve": 30.0}),
    Key("n_t", _int, 20, "output time intervals (n_t + 1 rows, t = 0 included)",
        ("bounded", "unbounded", "plug")),
    Key("n_y", _int, 64, "output spatial intervals (n_y + 1 columns)",
        ("bounded", "unbounded", "plug")),
    Key("y_min", _float, -2.0, "left end of the output window", ("unbounded",)),
    Key("y_max", _float, 2.0, "right end of the output window", ("unbounded",)),
    Key("gammas", _floats, (1.2, 1.5, 1.8), "Mittag-Leffler indices for ml-curve", ("ml-curve",)),
    Key("dt_out", _float, 0.01, "time step of the ml-curve table", ("ml-curve",)),
    Key("tol", _float, 1e-10, "special-function / quadrature tolerance", MODES,
        {"unbounded": 1e-8}),
    Key("mode_tol", _float, 1e-3, "largest allowed estimate of the neglected sine-mode tail"
        " (inf disables the check)", ("bounded", "plug")),
    Key("paper_literal_sqrt_mu0", _bool, False, "use sqrt(mu0) instead of mu0 in the mode decay"
        " argument", ("bounded", "plug", "compare", "converge")),
    Key("n_cells", _int, 128, "numeric grid cells across the strip",
        ("compare", "residual")),
    Key("dt", _float, None, "numeric time step (default: calibrated stable step)",
        ("compare", "converge", "residual")),
    Key("dt_safety", _float, 0.5, "fraction of the calibrated stable step, 0 < dt_safety < 1",
        ("compare", "converge", "residual")),
    Key("max_steps", _int, 200000, "refuse numeric runs longer than this",
        ("compare", "converge", "residual")),
    Key("record_stride", _int, 1, "keep every k-th numeric slice", ("compare",)),
    Key("growth_bound", _float, 10.0, "stability guard: max|u| / max|u0| limit",
        ("compare", "converge", "residual")),
    Key("ladder", _ints, (), "n_cells refinement ladder (>= 3 rungs for converge)",
        ("converge", "compare"), {"converge": (8, 16, 32)}),
    Key("t_min", _float, 0.0, "ignore slices before this time in error norms",
        ("converge", "compare", "residual")),
    Key("compare_with", _str, "numeric", "numeric | analytic (analytic compares the series"
        " with itself, a zero-error self-check)", ("compare",)),
    Key("crossing_t_max", _float, 50.0, "search horizon for the first centerline zero crossing",
        ("plug",)),
    Key("residual_source", _str, "analytic", "analytic | numeric history fed to the residual",
        ("residual",)),
    Key("residual_n_t", _int, 200, "time intervals of the analytic history", ("residual",)),
    Key("output_dir", _str, "fracflow-out", "directory for CSV and manifest files", MODES),
)
KEY_INDEX = {k.name: k for k in KEYS}


@dataclass(frozen=True)
class ScenarioConfig:
    mode: str
    values: dict
    source_text: str = ""
    source_path: str = None

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    @property
    def base_dir(self):
        return os.path.dirname(os.path.abspath(self.source_path)) if self.source_path else None

    def digest(self):
        return hashlib.sha256(self.source_text.encode("utf-8")).hexdigest()

    def with_values(self, **kw):
        v = dict(self.values)
        v.update(kw)
        return ScenarioConfig(self.mode, v, self.source_text, self.source_path)


def keys_help():
    lines = ["configuration keys (key = value; [mode] sections override):"]
    for k in KEYS:
        d = "calibrated" if k.default is None else k.default
        if isinstance(d, tuple):
            d = ",".join(str(x) for x in d) or "none"
        lines.append(f"  {k.name:<24} {k.help} [default {d}; modes: {', '.join(k.modes)}]")
    return "\n".join(lines)


def _read_pairs(text, mode):
    parser = configparser.ConfigParser(interpolation=None, strict=True,
                                       inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[__top__]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    for sec in parser.sections():
        if sec != "__top__" and sec not in MODES:
            raise ConfigError(f"unknown section [{sec}]")
    pairs = dict(parser.items("__top__"))
    if parser.has_section(mode):
        pairs.update(parser.items(mode))
    return pairs


def parse_config(text, mode, source_path=None):
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; choose one of {', '.join(MODES)}")
    pairs = _read_pairs(text, mode)
    file_mode = pairs.pop("mode", None)
    if file_mode is not None and file_mode.strip() != mode:
        raise ConfigError(f"config declares mode={file_mode.strip()} but {mode} was requested")
    values = {}
    for k in KEYS:
        values[k.name] = k.mode_defaults.get(mode, k.default)
    for name, raw in pairs.items():
        key = KEY_INDEX.get(name)
        if key is None:
            raise ConfigError(f"unknown key {name!r}")
        if raw is None or raw.strip() == "":
            raise ConfigError(f"key {name!r} has no value")
        try:
            values[name] = key.parse(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {name}: {exc}") from exc
    cfg = ScenarioConfig(mode, values, text, source_path)
    validate(cfg)
    return cfg


def load_config(path, mode):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, mode, path)


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _finite_pos(v):
    return v is not None and math.isfinite(v) and v > 0


def validate(cfg):
    v = cfg.values
    mode = cfg.mode
    a = v["alpha"]
    if mode != "ml-curve":
        top = 1.0 if mode in WAVE_LIMIT_MODES else None
        ok = math.isfinite(a) and 0 < a < 1 or (top is not None and a == top)
        _require(ok, f"alpha={a} out of range: need 0 < alpha < 1"
                 + (" (or alpha = 1)" if top else ""))
    for name in ("mu0", "h", "t_max", "tol", "dt_out", "growth_bound"):
        _require(_finite_pos(v[name]), f"{name} must be a positive number, got {v[name]}")
    _require(v["mode_tol"] > 0, "mode_tol must be positive")
    _require(math.isfinite(v["U0"]), "U0 must be finite")
    _require(v["dt"] is None or _finite_pos(v["dt"]), "dt must be positive")
    _require(0 < v["dt_safety"] < 1, "dt_safety must lie in (0, 1)")
    for name in ("n_modes", "n_t", "n_y", "max_steps", "record_stride", "residual_n_t"):
        _require(v[name] >= 1, f"{name} must be >= 1")
    _require(v["n_cells"] >= 4, "n_cells must be >= 4")
    _require(v["y_min"] < v["y_max"], "y_min must be below y_max")
    _require(all(1 < g < 2 for g in v["gammas"]) and v["gammas"],
             "gammas must be a nonempty list in (1, 2)")
    _require(v["t_min"] >= 0, "t_min must be >= 0")
    lad = v["ladder"]
    _require(all(n >= 4 for n in lad) and list(lad) == sorted(set(lad)),
             "ladder must list increasing n_cells >= 4")
    if mode == "converge":
        _require(len(lad) >= 3, "converge needs a ladder of at least 3 rungs")
    if mode == "compare" and lad:
        _require(len(lad) >= 2, "a compare ladder needs at least 2 rungs")
    _require(v["compare_with"] in ("numeric", "analytic"), "compare_with must be numeric or analytic")
    _require(_finite_pos(v["crossing_t_max"]), "crossing_t_max must be positive")
    _require(v["residual_source"] in ("numeric", "analytic"),
             "residual_source must be numeric or analytic")
    p = v["profile"].strip().lower()
    _require(p.split("(")[0] in ("constant", "sine", "gaussian", "csv"),
             f"bad profile {v['profile']!r}")
