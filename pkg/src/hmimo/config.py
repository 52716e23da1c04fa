"""Experiment configuration: flat TOML files with spacings in wavelengths."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigurationError
from .geometry import ArrayGeometry
from .precoding import NORMALIZATIONS, SCHEMES

DEFAULT_SNR_DB = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)

KNOWN_KEYS = {
    "experiment", "tx_shape", "tx_spacing", "rx_shape", "rx_spacing", "users", "snr_db",
    "schemes", "trials", "seed", "normalization", "out", "workers", "phase", "dump_count",
    "tx_shapes", "tx_spacings", "rx_shapes", "rx_spacings", "description",
}

_FRACTION = re.compile(r"^\s*(?:(?:λ|lambda)\s*/\s*(\d+)|(\d+)\s*/\s*(\d+)|([0-9.eE+-]+))\s*(?:λ|lambda)?\s*$")


def parse_spacing(value) -> float:
    """Spacing in wavelengths from ``0.25``, ``"1/6"``, ``"λ/6"`` or ``"lambda/6"``."""
    if isinstance(value, bool):
        raise ConfigurationError(f"invalid spacing {value!r}")
    if isinstance(value, (int, float)):
        out = float(value)
    else:
        m = _FRACTION.match(str(value))
        if not m:
            raise ConfigurationError(f"cannot parse spacing {value!r}; use e.g. 0.25, '1/6' or 'λ/6'")
        if m.group(1):
            out = float(Fraction(1, int(m.group(1))))
        elif m.group(2):
            out = float(Fraction(int(m.group(2)), int(m.group(3))))
        else:
            out = float(m.group(4))
    if not out > 0:
        raise ConfigurationError(f"spacing must be positive, got {value!r}")
    return out


def _shape(value, key):
    if not (isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, int) for v in value)):
        raise ConfigurationError(f"{key} must be a pair of integers [n_h, n_v], got {value!r}")
    if min(value) < 1:
        raise ConfigurationError(f"{key} entries must be >= 1, got {value!r}")
    return tuple(value)


@dataclass(frozen=True)
class Variant:
    """One point of a geometry sweep."""

    tx: ArrayGeometry
    rx: ArrayGeometry
    label: str


@dataclass(frozen=True)
class ExperimentConfig:
    tx: ArrayGeometry
    rx: ArrayGeometry
    users: int = 3
    snr_grid_db: tuple = DEFAULT_SNR_DB
    schemes: tuple = SCHEMES
    n_trials: int = 800
    seed: int = 0
    normalization_variant: str = "total"
    output_dir: Path = Path("results")
    workers: int = 1
    phase: str = "unit"
    dump_count: int = 2
    tx_shapes: tuple = ()
    tx_spacings: tuple = ()
    rx_shapes: tuple = ()
    rx_spacings: tuple = ()
    description: str = ""
    source: str = field(default="", compare=False)

    def __post_init__(self):
        if self.users < 1:
            raise ConfigurationError(f"users must be >= 1, got {self.users}")
        if self.n_trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.n_trials}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        if not self.snr_grid_db:
            raise ConfigurationError("snr_db must not be empty")
        if any(b <= a for a, b in zip(self.snr_grid_db, self.snr_grid_db[1:])):
            raise ConfigurationError(f"snr_db must be strictly increasing, got {list(self.snr_grid_db)}")
        if not self.schemes:
            raise ConfigurationError("schemes must not be empty")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad:
            raise ConfigurationError(f"unknown schemes {bad}; expected a subset of {list(SCHEMES)}")
        if self.normalization_variant not in NORMALIZATIONS:
            raise ConfigurationError(
                f"normalization must be one of {list(NORMALIZATIONS)}, got {self.normalization_variant!r}"
            )
        if self.phase not in ("unit", "random"):
            raise ConfigurationError(f"phase must be 'unit' or 'random', got {self.phase!r}")
        if self.dump_count < 1:
            raise ConfigurationError(f"dump_count must be >= 1, got {self.dump_count}")

    def variants(self) -> list:
        """Cartesian product of the sweep lists; each empty list means the base value."""
        out = []
        for txs in self.tx_shapes or [(self.tx.n_h, self.tx.n_v)]:
            for txd in self.tx_spacings or [self.tx.spacing]:
                for rxs in self.rx_shapes or [(self.rx.n_h, self.rx.n_v)]:
                    for rxd in self.rx_spacings or [self.rx.spacing]:
                        tx = ArrayGeometry(txs[0], txs[1], txd)
                        rx = ArrayGeometry(rxs[0], rxs[1], rxd)
                        label = f"Ns={tx.n_elements} ds={txd:.4g} Nr={rx.n_elements} dr={rxd:.4g}"
                        out.append(Variant(tx, rx, label))
        return out

    def variant_hash(self, variant: Variant) -> str:
        """Stable digest of everything that determines a variant's numbers."""
        payload = {
            "tx": [variant.tx.n_h, variant.tx.n_v, repr(variant.tx.spacing)],
            "rx": [variant.rx.n_h, variant.rx.n_v, repr(variant.rx.spacing)],
            "users": self.users,
            "snr_db": [repr(float(s)) for s in self.snr_grid_db],
            "schemes": list(self.schemes),
            "trials": self.n_trials,
            "seed": self.seed,
            "normalization": self.normalization_variant,
            "phase": self.phase,
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:12]

    def config_hash(self) -> str:
        return hashlib.sha256("".join(self.variant_hash(v) for v in self.variants()).encode()).hexdigest()[:12]

    def with_overrides(self, seed=None, trials=None, out=None, workers=None) -> "ExperimentConfig":
        changes = {}
        if seed is not None:
            changes["seed"] = seed
        if trials is not None:
            changes["n_trials"] = trials
        if out is not None:
            changes["output_dir"] = Path(out)
        if workers is not None:
            changes["workers"] = workers
        return replace(self, **changes)


def from_mapping(data: dict, source: str = "") -> ExperimentConfig:
    unknown = sorted(set(data) - KNOWN_KEYS)
    if unknown:
        raise ConfigurationError(f"unknown config keys {unknown} in {source or 'config'}")
    for key in ("tx_shape", "tx_spacing", "rx_shape", "rx_spacing"):
        if key not in data:
            raise ConfigurationError(f"missing required key {key!r} in {source or 'config'}")
    try:
        tx_shape, rx_shape = _shape(data["tx_shape"], "tx_shape"), _shape(data["rx_shape"], "rx_shape")
        kwargs = dict(
            tx=ArrayGeometry(*tx_shape, parse_spacing(data["tx_spacing"])),
            rx=ArrayGeometry(*rx_shape, parse_spacing(data["rx_spacing"])),
            tx_shapes=tuple(_shape(s, "tx_shapes") for s in data.get("tx_shapes", [])),
            rx_shapes=tuple(_shape(s, "rx_shapes") for s in data.get("rx_shapes", [])),
            tx_spacings=tuple(parse_spacing(s) for s in data.get("tx_spacings", [])),
            rx_spacings=tuple(parse_spacing(s) for s in data.get("rx_spacings", [])),
            source=source,
        )
        simple = {
            "users": ("users", int), "trials": ("n_trials", int), "seed": ("seed", int),
            "workers": ("workers", int), "dump_count": ("dump_count", int),
            "normalization": ("normalization_variant", str), "phase": ("phase", str),
            "description": ("description", str), "out": ("output_dir", Path),
        }
        for key, (name, conv) in simple.items():
            if key in data:
                kwargs[name] = conv(data[key])
        if "snr_db" in data:
            kwargs["snr_grid_db"] = tuple(float(s) for s in data["snr_db"])
        if "schemes" in data:
            kwargs["schemes"] = tuple(str(s).lower() for s in data["schemes"])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"invalid value in {source or 'config'}: {exc}") from exc
    return ExperimentConfig(**kwargs)


def preset_names() -> list:
    return sorted(p.name[:-5] for p in resources.files("hmimo.presets").iterdir() if p.name.endswith(".toml"))


def load_config(path_or_preset) -> ExperimentConfig:
    """Load a TOML file, or a shipped preset by name (see :func:`preset_names`)."""
    path = Path(path_or_preset)
    if path.is_file():
        text, source = path.read_text(), str(path)
    elif str(path_or_preset) in preset_names():
        text = resources.files("hmimo.presets").joinpath(f"{path_or_preset}.toml").read_text()
        source = f"preset:{path_or_preset}"
    else:
        raise ConfigurationError(f"no config file or preset named {str(path_or_preset)!r}; presets: {preset_names()}")
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"{source}: {exc}") from exc
    return from_mapping(data, source)
