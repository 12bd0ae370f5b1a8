"""Numerical tolerances, overridable through the ``DCE_TOL`` environment variable.

``DCE_TOL`` holds either a JSON object or comma separated ``key=value``
pairs, e.g. ``DCE_TOL='unitarity=1e-7,simpson_points_per_period=40'``.
Unknown keys are rejected.
"""
import json
import os
from dataclasses import asdict, dataclass, fields, replace

from . import dynamics


@dataclass(frozen=True)
class Tolerances:
    unitarity: float = dynamics.UNITARITY_BUDGET
    quadrature: float = 1e-12
    velocity_rtol: float = 1e-2
    simpson_points_per_period: int = dynamics.SIMPSON_POINTS_PER_PERIOD
    rk4_steps_per_period: int = dynamics.RK4_STEPS_PER_PERIOD

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ValueError(f"tolerance {f.name} must be positive, got {value!r}")

    def as_dict(self):
        return asdict(self)

    @classmethod
    def parse(cls, text):
        text = text.strip()
        if not text:
            return cls()
        if text.startswith("{"):
            raw = json.loads(text)
            if not isinstance(raw, dict):
                raise ValueError("DCE_TOL JSON must be an object")
        else:
            raw = {}
            for item in text.split(","):
                key, sep, value = item.partition("=")
                if not sep:
                    raise ValueError(f"DCE_TOL entry {item!r} is not key=value")
                raw[key.strip()] = value.strip()
        known = {f.name: f.type for f in fields(cls)}
        values = {}
        for key, value in raw.items():
            if key not in known:
                raise ValueError(f"unknown DCE_TOL key {key!r}; known: {sorted(known)}")
            kind = int if known[key] in (int, "int") else float
            values[key] = kind(float(value)) if kind is int else float(value)
        return replace(cls(), **values)

    @classmethod
    def from_env(cls, environ=None):
        environ = os.environ if environ is None else environ
        return cls.parse(environ.get("DCE_TOL", ""))
