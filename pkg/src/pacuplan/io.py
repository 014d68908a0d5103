"""File formats: instance and schedule JSON, occupancy CSV, run manifests.

All writers are deterministic: keys are sorted, floats use their shortest
round-tripping representation, and no timestamps enter the data files.  The
run manifest is the one place wall-clock time and timestamps live.
"""
from __future__ import annotations

import csv
import datetime
import json
from dataclasses import dataclass, field
from pathlib import Path

from .distributions import LognormalParams
from .forecast import OccupancyCurve
from .model import Instance, Patient, Schedule, Surgeon

FORMAT_VERSION = 1


def _check_version(payload: dict, path: Path) -> None:
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version!r} (expected {FORMAT_VERSION})")


def write_json(payload: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path: str | Path) -> dict:
    p = Path(path)
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{p}: not valid JSON ({exc})") from exc


def instance_to_dict(instance: Instance) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "or_count": instance.or_count,
        "or_open_hours": float(instance.or_open_hours),
        "day_hours": float(instance.day_hours),
        "surgeons": [
            {
                "id": s.id,
                "shift_start": float(s.shift_start),
                "shift_end": float(s.shift_end),
                "new_or_setup": float(s.new_or_setup),
            }
            for s in instance.surgeons
        ],
        "patients": [
            {
                "id": p.id,
                "surgeon_id": p.surgeon_id,
                "or_id": int(p.or_id),
                "needs_recovery": bool(p.needs_recovery),
                "surgery": {"mu": float(p.surgery.mu), "sigma2": float(p.surgery.sigma2)},
                "recovery": {"mu": float(p.recovery.mu), "sigma2": float(p.recovery.sigma2)},
                "expected_duration": float(p.expected_duration),
                "setup": float(p.setup),
                "cleanup": float(p.cleanup),
            }
            for p in instance.patients
        ],
    }


def instance_from_dict(payload: dict, source: Path = Path("<memory>")) -> Instance:
    try:
        surgeons = [Surgeon(id=s["id"], shift_start=s["shift_start"], shift_end=s["shift_end"],
                            new_or_setup=s.get("new_or_setup", 0.0))
                    for s in payload["surgeons"]]
        patients = [Patient(id=p["id"], surgeon_id=p["surgeon_id"], or_id=p["or_id"],
                            needs_recovery=p["needs_recovery"],
                            surgery=LognormalParams(**p["surgery"]),
                            recovery=LognormalParams(**p["recovery"]),
                            expected_duration=p.get("expected_duration"),
                            setup=p.get("setup", 0.0), cleanup=p.get("cleanup", 0.0))
                    for p in payload["patients"]]
        return Instance(surgeons=surgeons, patients=patients, or_count=payload["or_count"],
                        or_open_hours=payload["or_open_hours"], day_hours=payload["day_hours"])
    except KeyError as exc:
        raise ValueError(f"{source}: missing required field {exc}") from exc


def write_instance(instance: Instance, path: str | Path) -> None:
    write_json(instance_to_dict(instance), path)


def read_instance(path: str | Path) -> Instance:
    p = Path(path)
    payload = read_json(p)
    _check_version(payload, p)
    return instance_from_dict(payload, source=p)


def schedule_to_dict(schedule: Schedule) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "starts": {pid: float(z) for pid, z in schedule.starts.items()},
    }


def write_schedule(schedule: Schedule, path: str | Path) -> None:
    write_json(schedule_to_dict(schedule), path)


def read_schedule(path: str | Path) -> Schedule:
    p = Path(path)
    payload = read_json(p)
    _check_version(payload, p)
    try:
        starts = payload["starts"]
    except KeyError as exc:
        raise ValueError(f"{p}: missing required field {exc}") from exc
    return Schedule(starts={pid: float(z) for pid, z in starts.items()})


def write_occupancy_csv(curve: OccupancyCurve, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "mean", "variance", "lower", "upper"])
        for i in range(curve.times.size):
            writer.writerow([float(curve.times[i]), float(curve.mean[i]),
                             float(curve.variance[i]), float(curve.lower[i]),
                             float(curve.upper[i])])


@dataclass
class RunManifest:
    """Provenance of one CLI run; re-running with these values reproduces the outputs."""

    command: str
    version: str
    seed: int | None
    config: dict
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    wall_clock_seconds: float = 0.0
    created: str = ""

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "version": self.version,
            "seed": self.seed,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "wall_clock_seconds": self.wall_clock_seconds,
            "created": self.created or datetime.datetime.now(datetime.timezone.utc).isoformat(),
        }


def manifest_path(out_path: str | Path) -> Path:
    p = Path(out_path)
    return p.with_name(p.stem + ".manifest.json")


def write_manifest(manifest: RunManifest, out_path: str | Path) -> Path:
    target = manifest_path(out_path)
    write_json(manifest.to_dict(), target)
    return target
