"""Device description files.

The on-disk JSON uses the units the design tables are quoted in (lengths in
micrometres, frequencies in MHz); the library speaks SI.  Conversion happens
here and only here.  Unknown keys are rejected by the schema.
"""

from __future__ import annotations

import importlib.resources
import json
from dataclasses import dataclass, field

import jsonschema

from .errors import ValidationError
from .mtl import CoupledPairGeometry, LineParams, MtlCouplerParams
from .mux import MuxNetwork, QubitInfo, ReadoutChannel
from .purcell import ShuntLC

_MHZ = 1e6
_UM = 1e-6

_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}

DEVICE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["line", "shunt", "geometry", "channels", "qubits"],
    "properties": {
        "line": {
            "type": "object",
            "additionalProperties": False,
            "required": ["z0_ohm", "v_m_per_s"],
            "properties": {
                "z0_ohm": _POS,
                "v_m_per_s": _POS,
                "z0_line_ohm": _POS,
            },
        },
        "shunt": {
            "type": "object",
            "additionalProperties": False,
            "required": ["c_f", "l_h"],
            "properties": {"c_f": _POS, "l_h": _POS},
        },
        "geometry": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "l_r_open_um", "l_r_short_um",
                             "l_p_open_um", "l_p_short_um", "coupler"],
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "l_r_open_um": _NONNEG,
                    "l_r_short_um": _NONNEG,
                    "l_p_open_um": _NONNEG,
                    "l_p_short_um": _NONNEG,
                    "coupler": {
                        "oneOf": [
                            {
                                "type": "object",
                                "additionalProperties": False,
                                "required": ["type", "len_um", "cm_over_c"],
                                "properties": {
                                    "type": {"const": "mtl"},
                                    "len_um": _NONNEG,
                                    "cm_over_c": {"type": "number",
                                                  "minimum": 0,
                                                  "exclusiveMaximum": 1},
                                    "zm_over_z0": _POS,
                                    "d_um": _POS,
                                },
                            },
                            {
                                "type": "object",
                                "additionalProperties": False,
                                "required": ["type", "c_j_f"],
                                "properties": {
                                    "type": {"const": "capacitive"},
                                    "c_j_f": _NONNEG,
                                },
                            },
                        ]
                    },
                },
            },
        },
        "channels": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "f_r_g_mhz", "chi_mhz", "f_p_mhz",
                             "j_mhz", "kappa_p_mhz"],
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "f_r_g_mhz": _POS,
                    "chi_mhz": {"type": "number"},
                    "f_p_mhz": _POS,
                    "j_mhz": _NONNEG,
                    "kappa_p_mhz": _POS,
                    "gamma_r_mhz": _NONNEG,
                    "gamma_p_mhz": _NONNEG,
                },
            },
        },
        "qubits": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "f_q_mhz", "alpha_mhz", "g_mhz"],
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "f_q_mhz": _POS,
                    "alpha_mhz": {"type": "number"},
                    "g_mhz": _POS,
                    "c_q_f": _POS,
                },
            },
        },
    },
}


@dataclass(frozen=True)
class Device:
    """Validated device description in SI units."""

    line: LineParams
    z0_line: float
    shunt: ShuntLC
    geometry: dict[str, CoupledPairGeometry] = field(default_factory=dict)
    channels: tuple[ReadoutChannel, ...] = ()
    qubits: dict[str, QubitInfo] = field(default_factory=dict)

    def pair(self, name: str) -> CoupledPairGeometry:
        if name not in self.geometry:
            raise ValidationError(
                f"no geometry named {name!r}; have {sorted(self.geometry)}")
        return self.geometry[name]

    def mux_network(self) -> MuxNetwork:
        if not self.channels:
            raise ValidationError("device defines no readout channels")
        return MuxNetwork(channels=self.channels, shunt=self.shunt,
                          z0_line=self.z0_line, qubits=self.qubits)

    def qubit(self, name: str) -> QubitInfo:
        if name not in self.qubits:
            raise ValidationError(f"no qubit named {name!r}")
        return self.qubits[name]


def _coupler_from_json(obj) -> MtlCouplerParams | float:
    if obj["type"] == "mtl":
        return MtlCouplerParams(
            len_c=obj["len_um"] * _UM,
            cm_over_c=obj["cm_over_c"],
            zm_over_z0=obj.get("zm_over_z0", 1.0),
            d=obj["d_um"] * _UM if "d_um" in obj else None,
        )
    return float(obj["c_j_f"])


def device_from_dict(raw: dict) -> Device:
    """Validate a parsed device JSON object and convert to SI."""
    try:
        jsonschema.validate(raw, DEVICE_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "(root)"
        raise ValidationError(f"device file invalid at {path}: {exc.message}") \
            from exc
    line = LineParams(z0=raw["line"]["z0_ohm"], v=raw["line"]["v_m_per_s"])
    z0_line = raw["line"].get("z0_line_ohm", 50.0)
    shunt = ShuntLC(c_shunt=raw["shunt"]["c_f"], l_shunt=raw["shunt"]["l_h"])
    geometry = {}
    for g in raw["geometry"]:
        if g["name"] in geometry:
            raise ValidationError(f"duplicate geometry name {g['name']!r}")
        geometry[g["name"]] = CoupledPairGeometry(
            l_r_open=g["l_r_open_um"] * _UM,
            l_r_short=g["l_r_short_um"] * _UM,
            l_p_open=g["l_p_open_um"] * _UM,
            l_p_short=g["l_p_short_um"] * _UM,
            coupler=_coupler_from_json(g["coupler"]),
            line=line,
        )
    channels = tuple(
        ReadoutChannel(
            name=c["name"],
            f_r_g=c["f_r_g_mhz"] * _MHZ,
            chi=c["chi_mhz"] * _MHZ,
            f_p=c["f_p_mhz"] * _MHZ,
            j=c["j_mhz"] * _MHZ,
            kappa_p=c["kappa_p_mhz"] * _MHZ,
            gamma_r=c.get("gamma_r_mhz", 0.0) * _MHZ,
            gamma_p=c.get("gamma_p_mhz", 0.0) * _MHZ,
        )
        for c in raw["channels"]
    )
    qubits = {}
    for q in raw["qubits"]:
        if q["name"] in qubits:
            raise ValidationError(f"duplicate qubit name {q['name']!r}")
        qubits[q["name"]] = QubitInfo(
            f_q=q["f_q_mhz"] * _MHZ,
            g=q["g_mhz"] * _MHZ,
            alpha=q["alpha_mhz"] * _MHZ,
            c_q=q.get("c_q_f"),
        )
    return Device(line=line, z0_line=z0_line, shunt=shunt, geometry=geometry,
                  channels=channels, qubits=qubits)


def load_device(path) -> Device:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read device file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"device file {path} is not valid JSON: {exc}") \
            from exc
    return device_from_dict(raw)


def device_to_dict(dev: Device) -> dict:
    """Inverse of device_from_dict (units restored to the file convention)."""
    geometry = []
    for name, g in dev.geometry.items():
        if g.is_mtl:
            cp = {"type": "mtl", "len_um": g.coupler.len_c / _UM,
                  "cm_over_c": g.coupler.cm_over_c,
                  "zm_over_z0": g.coupler.zm_over_z0}
            if g.coupler.d is not None:
                cp["d_um"] = g.coupler.d / _UM
        else:
            cp = {"type": "capacitive", "c_j_f": g.c_j}
        geometry.append({
            "name": name,
            "l_r_open_um": g.l_r_open / _UM,
            "l_r_short_um": g.l_r_short / _UM,
            "l_p_open_um": g.l_p_open / _UM,
            "l_p_short_um": g.l_p_short / _UM,
            "coupler": cp,
        })
    channels = [{
        "name": c.name,
        "f_r_g_mhz": c.f_r_g / _MHZ,
        "chi_mhz": c.chi / _MHZ,
        "f_p_mhz": c.f_p / _MHZ,
        "j_mhz": c.j / _MHZ,
        "kappa_p_mhz": c.kappa_p / _MHZ,
        "gamma_r_mhz": c.gamma_r / _MHZ,
        "gamma_p_mhz": c.gamma_p / _MHZ,
    } for c in dev.channels]
    qubits = [{
        "name": name,
        "f_q_mhz": q.f_q / _MHZ,
        "alpha_mhz": (q.alpha or 0.0) / _MHZ,
        "g_mhz": q.g / _MHZ,
        **({"c_q_f": q.c_q} if q.c_q is not None else {}),
    } for name, q in dev.qubits.items()]
    return {
        "line": {"z0_ohm": dev.line.z0, "v_m_per_s": dev.line.v,
                 "z0_line_ohm": dev.z0_line},
        "shunt": {"c_f": dev.shunt.c_shunt, "l_h": dev.shunt.l_shunt},
        "geometry": geometry,
        "channels": channels,
        "qubits": qubits,
    }


def paper_device_path():
    """Path to the bundled device encoding the published design tables."""
    return importlib.resources.files("notchlab.data").joinpath(
        "paper_device.json")


def load_paper_device() -> Device:
    with importlib.resources.as_file(paper_device_path()) as p:
        return load_device(p)
