"""Structured pass/fail records and run manifests."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class VerificationReport:
    """One checked quantity: measured value vs. its bound at a tolerance."""

    name: str
    params: dict
    measured: float
    bound: float
    tolerance: float
    passed: bool
    extra: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "params": self.params,
            "measured": self.measured,
            "bound": self.bound,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.extra is not None:
            out["extra"] = self.extra
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "VerificationReport":
        return cls(
            name=obj["name"],
            params=obj["params"],
            measured=obj["measured"],
            bound=obj["bound"],
            tolerance=obj["tolerance"],
            passed=obj["pass"],
            extra=obj.get("extra"),
        )


@dataclass
class RunManifest:
    """Full record of one suite run; serializes losslessly to JSON."""

    command: str
    params: dict
    seed: int
    version: str
    duration_ms: float
    reports: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "params": self.params,
            "seed": self.seed,
            "version": self.version,
            "duration_ms": self.duration_ms,
            "reports": [r.to_dict() for r in self.reports],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    @classmethod
    def from_dict(cls, obj: dict) -> "RunManifest":
        return cls(
            command=obj["command"],
            params=obj["params"],
            seed=obj["seed"],
            version=obj["version"],
            duration_ms=obj["duration_ms"],
            reports=[VerificationReport.from_dict(r) for r in obj["reports"]],
        )

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls.from_dict(json.loads(text))


def format_float(x: float) -> str:
    """Locale-independent float with 17 significant digits (CSV cells)."""
    return format(float(x), ".17g")


def reports_to_csv(reports) -> str:
    """CSV summary: name, params, measured, bound, pass."""
    lines = ["name,params,measured,bound,pass"]
    for r in reports:
        params = ";".join(f"{k}={v}" for k, v in sorted(r.params.items()))
        lines.append(
            f"{r.name},{params},{format_float(r.measured)},{format_float(r.bound)},{r.passed}"
        )
    return "\n".join(lines) + "\n"
