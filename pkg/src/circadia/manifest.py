"""Reproducibility manifests for CLI runs.

A manifest records what a command was asked to do (command name, hashes of
every input file, the parameter grid, output paths, tool version) plus the
run's wall time. The identity hash covers everything except the wall time,
and the serialized file stores wall_time as null, so rerunning a command
with identical inputs produces byte-identical outputs including the
manifest itself.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .errors import ValidationError


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    try:
        with open(path, "rb") as f:
            for chunk in iter(lambda: f.read(65536), b""):
                h.update(chunk)
    except OSError as exc:
        raise ValidationError(f"cannot hash input file {path}: {exc}")
    return h.hexdigest()


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      allow_nan=False, default=str)


@dataclass
class RunManifest:
    command: str
    version: str
    inputs: dict[str, str] = field(default_factory=dict)    # path -> sha256
    parameters: dict = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    wall_time_s: float | None = None

    def add_input(self, path: str) -> None:
        self.inputs[path] = sha256_file(path)

    def identity_hash(self) -> str:
        payload = {
            "command": self.command,
            "version": self.version,
            "inputs": self.inputs,
            "parameters": self.parameters,
            "outputs": sorted(self.outputs),
        }
        return hashlib.sha256(_canonical(payload).encode()).hexdigest()

    def to_json(self) -> str:
        # wall_time is serialized as null: data files carry no wall-clock
        # values, which keeps reruns byte-identical.
        payload = {
            "command": self.command,
            "version": self.version,
            "inputs": self.inputs,
            "parameters": self.parameters,
            "outputs": sorted(self.outputs),
            "identity": self.identity_hash(),
            "wall_time_s": None,
        }
        return json.dumps(payload, sort_keys=True, indent=1) + "\n"

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())
