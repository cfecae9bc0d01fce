"""Initial velocity profiles f(y) and their finite sine transforms.

A profile is callable on arrays and knows its sine coefficients on [0, h]:

    b_n = (2/h) int_0^h f(z) sin(n pi z / h) dz,   n = 1..N
"""

import csv
import math
import os

import numpy as np

from .errors import ConfigError, InvalidParams

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_MODE_CHUNK = 256


def _gauss_panels(edges):
    """Nodes and weights of a 16-point Gauss-Legendre rule on each panel."""
    edges = np.asarray(edges, dtype=float)
    lo = edges[:-1, None]
    half = 0.5 * np.diff(edges)[:, None]
    nodes = lo + half * (1.0 + _GL_NODES)
    weights = half * _GL_WEIGHTS
    return nodes.ravel(), weights.ravel()


def _panel_edges(lo, hi, max_width, breaks=()):
    pts = sorted({lo, hi} | {float(b) for b in breaks if lo < b < hi})
    edges = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        k = max(1, math.ceil((b - a) / max_width))
        edges.extend(np.linspace(a, b, k + 1)[1:].tolist())
    return np.array(edges)


def sine_transform(fn, h, n_modes, breaks=(), feature=None):
    """Sine coefficients of ``fn`` by composite Gauss-Legendre quadrature.

    Panels are narrow enough to hold at most half a period of the highest
    mode and, when given, a quarter of ``feature`` (the profile's length scale).
    """
    width = h / max(2 * n_modes, 8)
    if feature is not None:
        width = min(width, 0.25 * feature)
    z, w = _gauss_panels(_panel_edges(0.0, h, width, breaks))
    fw = np.asarray(fn(z), dtype=float) * w
    a = math.pi / h
    out = np.empty(n_modes)
    for c0 in range(0, n_modes, _MODE_CHUNK):
        n = np.arange(c0 + 1, min(c0 + _MODE_CHUNK, n_modes) + 1)
        out[c0:c0 + n.size] = np.sin(a * np.outer(n, z)) @ fw
    return (2.0 / h) * out


class Profile:
    """Base class; subclasses implement ``__call__`` and may override the rest."""

    name = "profile"

    def __call__(self, y):
        raise NotImplementedError

    def support(self):
        """Interval outside which the profile is zero (may be infinite)."""
        return (-math.inf, math.inf)

    def features(self):
        """Abscissae where the profile has structure worth a quadrature break."""
        return ()

    def length_scale(self):
        return None

    def sine_coefficients(self, h, n_modes):
        return sine_transform(self, h, n_modes, self.features(), self.length_scale())

    def describe(self):
        return self.name


class Constant(Profile):
    name = "constant"

    def __init__(self, value=1.0):
        self.value = float(value)
        if not math.isfinite(self.value):
            raise InvalidParams("constant profile value must be finite")

    def __call__(self, y):
        return np.full(np.shape(y), self.value)

    def sine_coefficients(self, h, n_modes):
        n = np.arange(1, n_modes + 1)
        # (2/h) U0 (h / (n pi)) (1 - cos n pi); even modes are exactly zero
        return np.where(n % 2 == 1, 4.0 * self.value / (math.pi * n), 0.0)

    def describe(self):
        return f"constant({self.value!r})"


class Sine(Profile):
    """amplitude * sin(k pi y / h): a single eigenmode of the strip."""

    name = "sine"

    def __init__(self, k, h, amplitude=1.0):
        if int(k) != k or k < 1:
            raise InvalidParams(f"sine mode index must be a positive integer, got {k}")
        if not h > 0:
            raise InvalidParams(f"strip width must be positive, got {h}")
        self.k = int(k)
        self.h = float(h)
        self.amplitude = float(amplitude)

    def __call__(self, y):
        return self.amplitude * np.sin(self.k * math.pi * np.asarray(y, dtype=float) / self.h)

    def sine_coefficients(self, h, n_modes):
        if h != self.h:
            return super().sine_coefficients(h, n_modes)
        out = np.zeros(n_modes)
        if self.k <= n_modes:
            out[self.k - 1] = self.amplitude
        return out

    def describe(self):
        return f"sine({self.k})"


class Gaussian(Profile):
    """amplitude * exp(-(y - center)**2 / (2 width**2))."""

    name = "gaussian"

    def __init__(self, center, width, amplitude=1.0):
        if not width > 0:
            raise InvalidParams(f"gaussian width must be positive, got {width}")
        self.center = float(center)
        self.width = float(width)
        self.amplitude = float(amplitude)

    @classmethod
    def unit_mass(cls, center, width):
        return cls(center, width, 1.0 / (width * math.sqrt(2.0 * math.pi)))

    def __call__(self, y):
        s = (np.asarray(y, dtype=float) - self.center) / self.width
        return self.amplitude * np.exp(-0.5 * s * s)

    def mass(self):
        return self.amplitude * self.width * math.sqrt(2.0 * math.pi)

    def support(self):
        # exp(-s^2/2) < 1e-30 past 12 widths
        return (self.center - 12.0 * self.width, self.center + 12.0 * self.width)

    def features(self):
        return tuple(self.center + k * self.width for k in range(-12, 13))

    def length_scale(self):
        return self.width

    def describe(self):
        return f"gaussian({self.center!r},{self.width!r})"


class Sampled(Profile):
    """Piecewise-linear interpolant of tabulated (y, f) data, zero outside."""

    name = "sampled"

    def __init__(self, y, values, source=None):
        y = np.asarray(y, dtype=float)
        v = np.asarray(values, dtype=float)
        if y.ndim != 1 or y.shape != v.shape or y.size < 2:
            raise InvalidParams("sampled profile needs two equal-length 1-D arrays (>= 2 points)")
        if np.any(np.diff(y) <= 0):
            raise InvalidParams("sampled profile abscissae must increase strictly")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(v))):
            raise InvalidParams("sampled profile contains non-finite values")
        self.y = y
        self.values = v
        self.source = source

    @classmethod
    def from_csv(cls, path):
        """Read two numeric columns (y, f); a non-numeric first row is a header."""
        ys, fs = [], []
        try:
            with open(path, newline="", encoding="utf-8") as fh:
                for i, row in enumerate(csv.reader(fh)):
                    if not row or row[0].lstrip().startswith("#"):
                        continue
                    try:
                        ys.append(float(row[0]))
                        fs.append(float(row[1]))
                    except (ValueError, IndexError):
                        if i == 0:
                            continue
                        raise ConfigError(f"{path}: bad profile row {i + 1}: {row}")
        except OSError as exc:
            raise ConfigError(f"cannot read profile {path}: {exc}") from exc
        return cls(ys, fs, source=str(path))

    def __call__(self, y):
        return np.interp(np.asarray(y, dtype=float), self.y, self.values, left=0.0, right=0.0)

    def support(self):
        return (self.y[0], self.y[-1])

    def features(self):
        return tuple(self.y)

    def sine_coefficients(self, h, n_modes):
        # exact for the linear interpolant: int (p + q z) sin(k z) dz in closed form
        y = np.clip(self.y, 0.0, h)
        v = self(y)
        keep = np.concatenate([[True], np.diff(y) > 0])
        y, v = y[keep], v[keep]
        a = math.pi / h
        out = np.empty(n_modes)
        slope = np.diff(v) / np.diff(y)
        for c0 in range(0, n_modes, _MODE_CHUNK):
            k = a * np.arange(c0 + 1, min(c0 + _MODE_CHUNK, n_modes) + 1)[:, None]
            prim = -v * np.cos(k * y) / k
            ramp = np.sin(k * y) / (k * k)
            seg = np.diff(prim, axis=1) + slope * np.diff(ramp, axis=1)
            out[c0:c0 + k.shape[0]] = seg.sum(axis=1)
        return (2.0 / h) * out

    def describe(self):
        return f"csv({self.source})" if self.source else "sampled"


class FunctionProfile(Profile):
    name = "function"

    def __init__(self, fn, features=(), length_scale=None, support=(-math.inf, math.inf)):
        self.fn = fn
        self._features = tuple(features)
        self._scale = length_scale
        self._support = support

    def __call__(self, y):
        return np.asarray(self.fn(np.asarray(y, dtype=float)), dtype=float)

    def support(self):
        return self._support

    def features(self):
        return self._features

    def length_scale(self):
        return self._scale


def parse_profile(spec, h=None, base_dir=None):
    """Build a profile from text: constant(U0), sine(k), gaussian(c, w), csv(path)."""
    text = spec.strip()
    if "(" not in text or not text.endswith(")"):
        raise ConfigError(f"bad profile spec {spec!r}")
    kind, _, rest = text.partition("(")
    kind = kind.strip().lower()
    arg = rest[:-1].strip()
    try:
        if kind == "csv":
            path = arg
            if base_dir and not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            return Sampled.from_csv(path)
        nums = [float(p) for p in arg.split(",")] if arg else []
        if kind == "constant" and len(nums) == 1:
            return Constant(nums[0])
        if kind == "sine" and len(nums) == 1:
            if h is None:
                raise ConfigError("sine profile needs the strip width h")
            return Sine(nums[0], h)
        if kind == "gaussian" and len(nums) in (2, 3):
            return Gaussian(*nums)
    except (ValueError, InvalidParams) as exc:
        raise ConfigError(f"bad profile spec {spec!r}: {exc}") from exc
    raise ConfigError(f"bad profile spec {spec!r}")
