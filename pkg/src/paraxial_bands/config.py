"""Run configuration: sectioned ``key = value`` files and bundled presets.

Grammar (parsed with :mod:`configparser`): ``[section]`` headers,
``key = value`` lines, ``#`` comments.  Units: lengths in um, energies in
eV, everything else dimensionless.  Complex values use Python syntax
(``3.5+0.01j``).

Sections and keys::

    [cavity]    n, L, lambda0, mu (default 1), background (complex eV, default 0)
    [lattice]   pitch, fill_factor
    [pattern]   kind = mirror | index
                mirror: R_pixel or lnR_pixel, delta_amp, delta_phase, allow_gain
                index:  n_pixel, n_grid
    [numerics]  M, samples_per_segment, n_bands_kept, residual_tol, threads, backend
    [scan]      ff_min, ff_max, ff_steps            (optional)
    [output]    directory, format = csv | json     (optional)
"""
from __future__ import annotations

import cmath
import configparser
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .lattice import CavitySpec, IndexPattern, MirrorPattern, PotentialModel, SquareLattice

__all__ = ["ConfigError", "RunConfig", "ScanSpec", "load_config", "load_preset", "preset_names", "parse_config"]

SECTIONS = ("cavity", "lattice", "pattern", "numerics", "scan", "output")
KEYS = {
    "cavity": {"n", "l", "lambda0", "mu", "background"},
    "lattice": {"pitch", "fill_factor"},
    "pattern": {"kind", "r_pixel", "lnr_pixel", "delta_amp", "delta_phase", "allow_gain", "n_pixel", "n_grid"},
    "numerics": {"m", "samples_per_segment", "n_bands_kept", "residual_tol", "threads", "backend"},
    "scan": {"ff_min", "ff_max", "ff_steps"},
    "output": {"directory", "format"},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScanSpec:
    ff_min: float
    ff_max: float
    ff_steps: int

    def grid(self):
        import numpy as np

        # rounding keeps grid values such as 0.16 exact in the output
        return np.round(np.linspace(self.ff_min, self.ff_max, self.ff_steps), 12)


@dataclass(frozen=True)
class RunConfig:
    model: PotentialModel
    M: int = 2
    samples_per_segment: int = 20
    n_bands_kept: int = 8
    residual_tol: float = 1e-10
    threads: int | None = None
    backend: str = "qr"
    scan: ScanSpec | None = None
    out_dir: str = "out"
    out_format: str = "csv"
    source: str = ""
    raw: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Parsed sections as plain strings, for provenance in output metadata."""
        return {sec: dict(vals) for sec, vals in self.raw.items()}


class _Reader:
    def __init__(self, cp: configparser.ConfigParser, text: str, source: str):
        self.cp = cp
        self.lines = text.splitlines()
        self.source = source

    def _line(self, section, key):
        in_sec = False
        for i, line in enumerate(self.lines, 1):
            s = line.strip()
            if s.startswith("["):
                in_sec = s.strip("[] ").lower() == section
                continue
            if in_sec and s.split("=", 1)[0].strip().lower() == key.lower():
                return i
        return None

    def fail(self, section, key, msg):
        line = self._line(section, key) if key else None
        where = f"{self.source}:{line}: " if line else f"{self.source}: "
        tag = f"[{section}] {key}" if key else f"[{section}]"
        raise ConfigError(f"{where}{tag}: {msg}")

    def has(self, section, key):
        return self.cp.has_option(section, key)

    def raw(self, section, key, default=None):
        if not self.cp.has_section(section):
            if default is None:
                self.fail(section, None, "missing section")
            return default
        if not self.cp.has_option(section, key):
            if default is None:
                self.fail(section, key, "missing key")
            return default
        return self.cp.get(section, key)

    def real(self, section, key, default=None, positive=False):
        v = self.raw(section, key, default)
        try:
            x = float(v)
        except (TypeError, ValueError):
            self.fail(section, key, f"expected a real number, got {v!r}")
        if not math.isfinite(x):
            self.fail(section, key, f"must be finite, got {v!r}")
        if positive and not x > 0:
            self.fail(section, key, f"must be positive, got {v!r}")
        return x

    def cplx(self, section, key, default=None):
        v = self.raw(section, key, default)
        try:
            z = complex(str(v).replace(" ", ""))
        except ValueError:
            self.fail(section, key, f"expected a complex number such as 3.5+0.01j, got {v!r}")
        if not cmath.isfinite(z):
            self.fail(section, key, f"must be finite, got {v!r}")
        return z

    def integer(self, section, key, default=None, minimum=None):
        v = self.raw(section, key, default)
        try:
            x = int(str(v))
        except ValueError:
            self.fail(section, key, f"expected an integer, got {v!r}")
        if minimum is not None and x < minimum:
            self.fail(section, key, f"must be >= {minimum}, got {x}")
        return x

    def boolean(self, section, key, default="false"):
        v = str(self.raw(section, key, default)).strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        self.fail(section, key, f"expected true/false, got {v!r}")


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    r = _Reader(cp, text, source)
    for sec in cp.sections():
        if sec not in SECTIONS:
            r.fail(sec, None, f"unknown section (expected one of {', '.join(SECTIONS)})")
        for key in cp.options(sec):
            if key not in KEYS[sec]:
                r.fail(sec, key, f"unknown key (expected one of {', '.join(sorted(KEYS[sec]))})")

    try:
        cavity = CavitySpec(
            r.cplx("cavity", "n"),
            r.real("cavity", "L", positive=True),
            r.real("cavity", "lambda0", positive=True),
            r.real("cavity", "mu", "1.0", positive=True),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        r.fail("cavity", None, str(exc))
    try:
        lattice = SquareLattice(r.real("lattice", "pitch", positive=True), r.real("lattice", "fill_factor"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        r.fail("lattice", "fill_factor", str(exc))

    kind = r.raw("pattern", "kind").strip().lower()
    if kind not in ("mirror", "index"):
        r.fail("pattern", "kind", f"must be 'mirror' or 'index', got {kind!r}")
    mirror_keys = {"r_pixel", "lnr_pixel", "delta_amp", "delta_phase", "allow_gain"}
    index_keys = {"n_pixel", "n_grid"}
    present = set(cp.options("pattern"))
    stray = present & (index_keys if kind == "mirror" else mirror_keys)
    if stray:
        r.fail("pattern", sorted(stray)[0], f"not allowed with kind = {kind}; exactly one pattern kind per run")

    try:
        if kind == "mirror":
            if r.has("pattern", "r_pixel") and r.has("pattern", "lnr_pixel"):
                r.fail("pattern", "lnr_pixel", "give either R_pixel or lnR_pixel, not both")
            if r.has("pattern", "r_pixel"):
                rp = r.real("pattern", "r_pixel", positive=True)
                lnp = complex(math.log(rp))
            else:
                lnp = r.cplx("pattern", "lnr_pixel")
            delta = complex(r.real("pattern", "delta_amp"), r.real("pattern", "delta_phase"))
            pattern = MirrorPattern(lnp, delta, r.boolean("pattern", "allow_gain"))
        else:
            pattern = IndexPattern(r.cplx("pattern", "n_pixel"), r.cplx("pattern", "n_grid"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        r.fail("pattern", None, str(exc))

    model = PotentialModel(cavity, lattice, pattern, r.cplx("cavity", "background", "0"))

    threads = r.integer("numerics", "threads", "0", minimum=0) or None
    backend = r.raw("numerics", "backend", "qr").strip().lower()
    if backend not in ("qr", "compiled", "python", "lapack"):
        r.fail("numerics", "backend", f"unknown backend {backend!r}")
    scan = None
    if cp.has_section("scan"):
        scan = ScanSpec(
            r.real("scan", "ff_min"),
            r.real("scan", "ff_max"),
            r.integer("scan", "ff_steps", minimum=1),
        )
        if not 0 < scan.ff_min <= scan.ff_max < 1:
            r.fail("scan", "ff_min", f"need 0 < ff_min <= ff_max < 1, got {scan.ff_min}, {scan.ff_max}")
    fmt = r.raw("output", "format", "csv").strip().lower()
    if fmt not in ("csv", "json"):
        r.fail("output", "format", f"must be csv or json, got {fmt!r}")

    return RunConfig(
        model=model,
        M=r.integer("numerics", "M", "2", minimum=1),
        samples_per_segment=r.integer("numerics", "samples_per_segment", "20", minimum=2),
        n_bands_kept=r.integer("numerics", "n_bands_kept", "8", minimum=1),
        residual_tol=r.real("numerics", "residual_tol", "1e-10", positive=True),
        threads=threads,
        backend=backend,
        scan=scan,
        out_dir=r.raw("output", "directory", "out").strip(),
        out_format=fmt,
        source=source,
        raw={sec: dict(cp.items(sec)) for sec in cp.sections()},
    )


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read configuration ({exc.strerror})") from exc
    return parse_config(text, str(p))


def preset_names() -> list[str]:
    root = resources.files("paraxial_bands") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def preset_text(name: str) -> str:
    if name not in preset_names():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return (resources.files("paraxial_bands") / "presets" / f"{name}.ini").read_text(encoding="utf-8")


def load_preset(name: str) -> RunConfig:
    return parse_config(preset_text(name), f"preset:{name}")
