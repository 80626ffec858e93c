"""Run-configuration parsing, unit resolution and deterministic output writing.

Configs are JSON.  The ``units`` flag selects how the medium block is read:

* ``gamma0`` (default): rates already in units of gamma0, length in cell
  lengths, ``c`` in internal units; ``gamma0_si`` anchors microsecond
  conversions only.
* ``si``: rates in 1/s, cell length in meters, eta in 1/(s m); everything
  is normalized to the medium's own gamma0 and length.

Times in run sections are microseconds in either mode.  A resolved config
(internal units, fully defaulted) is emitted next to every output; parsing
that file back yields the identical resolved config.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .core import C_SI, GAMMA0_SI, AtomicMedium, ConfigError

__all__ = [
    "RunConfig",
    "load_config",
    "resolve_medium",
    "write_csv",
    "write_json",
    "fmt",
]

_MEDIUM_DEFAULTS_GAMMA0 = {
    "gamma0": 1.0,
    "gamma_opt": 500.0,
    "gamma_t": 0.01,
    "gamma_r": 0.01,
    "delta_z": 10.0,
    "length": 1.0,
}


def resolve_medium(raw: dict, units: str, gamma0_si: float) -> AtomicMedium:
    try:
        if units == "gamma0":
            vals = dict(_MEDIUM_DEFAULTS_GAMMA0)
            vals.update({k: float(v) for k, v in raw.items()})
            c = vals.pop("c", C_SI / (gamma0_si * 0.06))
            eta = vals.pop("eta", None)
            knob = vals.pop("coupling_knob", 1.0)
            if eta is None:
                eta = knob * 2.0 * vals["gamma_opt"] ** 2 / c
            return AtomicMedium(eta=eta, c=c, **vals)
        if units == "si":
            g0 = float(raw["gamma0"])
            length = float(raw["length"])
            c_int = C_SI / (g0 * length)
            eta_si = raw.get("eta")
            if eta_si is None:
                knob = float(raw.get("coupling_knob", 1.0))
                eta = knob * 2.0 * (float(raw["gamma_opt"]) / g0) ** 2 / c_int
            else:
                eta = float(eta_si) * length / g0
            return AtomicMedium(
                gamma0=1.0,
                gamma_opt=float(raw["gamma_opt"]) / g0,
                gamma_t=float(raw["gamma_t"]) / g0,
                gamma_r=float(raw.get("gamma_r", raw["gamma_t"])) / g0,
                delta_z=float(raw.get("delta_z", 0.0)) / g0,
                eta=eta,
                length=1.0,
                c=c_int,
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad medium block: {exc}") from exc
    raise ConfigError(f"units must be 'gamma0' or 'si', got {units!r}")


@dataclass
class RunConfig:
    """Fully resolved configuration: medium in internal units, times internal."""

    medium: AtomicMedium
    gamma0_si: float = GAMMA0_SI
    units: str = "gamma0"
    params: dict = field(default_factory=dict)
    workers: int = 1

    @property
    def us(self) -> float:
        """Internal time units per microsecond."""
        return 1e-6 * self.gamma0_si

    def resolved_dict(self) -> dict:
        med = {
            "gamma0": self.medium.gamma0,
            "gamma_opt": self.medium.gamma_opt,
            "gamma_t": self.medium.gamma_t,
            "gamma_r": self.medium.gamma_r,
            "delta_z": self.medium.delta_z,
            "eta": self.medium.eta,
            "length": self.medium.length,
            "c": self.medium.c,
        }
        return {
            "units": "gamma0",
            "gamma0_si": self.gamma0_si,
            "medium": med,
            "params": self.params,
        }


def load_config(source, workers: int = 1, units_override: str | None = None) -> RunConfig:
    """Parse a config dict or JSON file path into a resolved RunConfig."""
    if isinstance(source, (str, Path)):
        try:
            raw = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {source}: {exc}") from exc
    else:
        raw = dict(source)
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    units = units_override or raw.get("units", "gamma0")
    gamma0_si = float(raw.get("gamma0_si", GAMMA0_SI))
    if units == "si" and "medium" in raw and "gamma0" in raw["medium"]:
        gamma0_si = float(raw["medium"]["gamma0"])
    medium = resolve_medium(raw.get("medium", {}), units, gamma0_si)
    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    return RunConfig(
        medium=medium, gamma0_si=gamma0_si, units=units, params=params, workers=workers
    )


def fmt(x) -> str:
    """Round-trip decimal formatting for CSV output."""
    if isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    xf = float(x)
    if math.isnan(xf):
        return "nan"
    if math.isinf(xf):
        return "inf" if xf > 0 else "-inf"
    return repr(xf)


def write_csv(path: Path, columns, rows) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
