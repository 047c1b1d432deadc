"""Fundamental-operation library.

The set of built-in gates the analysis understands is data, not code: it is
loaded from ``gate_library.json`` next to this module so new diagonal or
flip-like gates can be added without touching the engine. Aliases (CNOT, CZ)
are rewritten during lowering into their base gate plus implicit controls.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .errors import UnknownGateError


@dataclass(frozen=True)
class GateInfo:
    name: str
    qubits: int  # -1 means variadic (Alloc)
    params: int
    magnitude: bool
    classical_action: str  # "flip" | "superpose" | "none" | "alloc"
    inverse_family: str  # "self" | "phase" | "adjoint" | "none"
    phase_period: int | None = None  # period of the angle in units of pi, if exact


@dataclass(frozen=True)
class GateAlias:
    gate: str
    implicit_controls: int


class GateLibrary:
    def __init__(self, data: dict):
        self.gates = {
            name: GateInfo(
                name=name,
                qubits=spec["qubits"],
                params=spec["params"],
                magnitude=spec["magnitude"],
                classical_action=spec["classical_action"],
                inverse_family=spec["inverse_family"],
                phase_period=spec.get("phase_period"),
            )
            for name, spec in data["gates"].items()
        }
        self.aliases = {
            name: GateAlias(spec["gate"], spec["implicit_controls"])
            for name, spec in data["aliases"].items()
        }
        self.forbidden = set(data["forbidden"])

    def is_fundamental(self, name: str) -> bool:
        return name in self.gates or name in self.aliases

    def info(self, name: str) -> GateInfo:
        if name in self.aliases:
            name = self.aliases[name].gate
        try:
            return self.gates[name]
        except KeyError:
            raise UnknownGateError(f"unknown gate '{name}'") from None

    def is_magnitude(self, name: str) -> bool:
        return self.info(name).magnitude


def load_default_library() -> GateLibrary:
    text = resources.files(__package__).joinpath("gate_library.json").read_text("utf-8")
    return GateLibrary(json.loads(text))


DEFAULT_LIBRARY = load_default_library()
