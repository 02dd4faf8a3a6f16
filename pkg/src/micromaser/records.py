"""Run manifests and the on-disk file formats.

Every output file starts with a one-line kind marker and a JSON manifest
(tool version, RNG algorithm, fully resolved run parameters, timestamp)
followed by plain delimiter-separated data rows and a JSON summary footer.
Only the manifest line carries the timestamp, so everything outside it is
byte-reproducible from the same parameters.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from micromaser.harness import ExperimentSpec, SweepReport
from micromaser.kernel import TauGrid
from micromaser.mc import MeasurementSet
from micromaser.photon_model import (
    DistributionMetrics,
    MaserParams,
    PhotonDistribution,
)

TOOL_NAME = "micromaser"
TOOL_VERSION = "0.1.0"

MANIFEST_PREFIX = "# manifest: "
SUMMARY_PREFIX = "# summary: "
SECTION_PREFIX = "# section: "

FILE_KINDS = {
    "distribution": "# micromaser distribution file",
    "experiment": "# micromaser experiment file",
    "reconstruction": "# micromaser reconstruction file",
    "sweep": "# micromaser sweep file",
}


class ExperimentFileError(ValueError):
    """Malformed experiment file; carries the 1-based offending line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def fmt(value) -> str:
    """Full round-trip decimal rendering of one number."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def build_manifest(command: str, spec: dict, rng: str | None = None) -> dict:
    return {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "command": command,
        "rng": rng,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "spec": spec,
    }


def params_dict(params: MaserParams | None) -> dict | None:
    if params is None:
        return None
    return {"n_ex": params.n_ex, "n_th": params.n_th, "theta": params.theta}


def grid_dict(grid: TauGrid) -> dict:
    return {"tau_min": grid.tau_min, "tau_max": grid.tau_max, "n_tau": grid.n_tau}


def em_dict(em) -> dict:
    return {
        "max_iterations": em.max_iterations,
        "init": "uniform" if em.init is None else "custom",
        "stop_tolerance": em.stop_tolerance,
        "floor_epsilon": em.floor_epsilon,
    }


def experiment_spec_dict(spec: ExperimentSpec) -> dict:
    return {
        "params": params_dict(spec.params),
        "grid": grid_dict(spec.grid),
        "truncation": spec.truncation,
        "shots_per_tau": spec.shots_per_tau,
        "em": em_dict(spec.em),
        "seed": spec.seed,
        "repeats": spec.repeats,
    }


def metrics_dict(m: DistributionMetrics) -> dict:
    return {"mean": m.mean, "fano": m.fano}


def _manifest_line(manifest: dict) -> str:
    return MANIFEST_PREFIX + json.dumps(manifest, sort_keys=True, separators=(",", ":"))


def _summary_line(summary: dict) -> str:
    return SUMMARY_PREFIX + json.dumps(summary, sort_keys=True, separators=(",", ":"))


def write_distribution(
    path, dist: PhotonDistribution, summary: dict, manifest: dict
) -> None:
    lines = [FILE_KINDS["distribution"], _manifest_line(manifest), "n,p_n"]
    lines += [f"{n},{fmt(p)}" for n, p in enumerate(dist.probs)]
    lines.append(_summary_line(summary))
    _write_lines(path, lines)


def write_experiment(path, mset: MeasurementSet, manifest: dict) -> None:
    taus = mset.grid.points
    freqs = mset.frequencies
    lines = [FILE_KINDS["experiment"], _manifest_line(manifest), "k,tau_k,N_k,f_k"]
    lines += [
        f"{k},{fmt(taus[k])},{int(mset.counts[k])},{fmt(freqs[k])}"
        for k in range(len(taus))
    ]
    _write_lines(path, lines)


def read_experiment(path) -> tuple[MeasurementSet, dict]:
    """Parse an experiment file back into a MeasurementSet and its manifest."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0] != FILE_KINDS["experiment"]:
        raise ExperimentFileError(1, "not a micromaser experiment file")
    if len(lines) < 2 or not lines[1].startswith(MANIFEST_PREFIX):
        raise ExperimentFileError(2, "missing manifest line")
    try:
        manifest = json.loads(lines[1][len(MANIFEST_PREFIX):])
    except json.JSONDecodeError as exc:
        raise ExperimentFileError(2, f"manifest is not valid JSON ({exc})") from exc
    if len(lines) < 3 or lines[2] != "k,tau_k,N_k,f_k":
        raise ExperimentFileError(3, "missing column header 'k,tau_k,N_k,f_k'")

    spec = manifest.get("spec", {})
    try:
        grid = TauGrid(**spec["grid"])
        shots = int(spec["shots_per_tau"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ExperimentFileError(2, f"manifest spec is incomplete ({exc})") from exc
    truth = spec.get("params")
    truth_params = MaserParams(**truth) if truth else None

    counts = []
    for offset, line in enumerate(lines[3:], start=4):
        if line.startswith("#") or not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 4:
            raise ExperimentFileError(offset, f"expected 4 fields, got {len(fields)}")
        try:
            k = int(fields[0])
            count = int(fields[2])
        except ValueError as exc:
            raise ExperimentFileError(offset, f"unparseable row ({exc})") from exc
        if k != len(counts):
            raise ExperimentFileError(offset, f"expected row index {len(counts)}, got {k}")
        if not 0 <= count <= shots:
            raise ExperimentFileError(
                offset, f"count {count} outside [0, {shots}]"
            )
        counts.append(count)
    if len(counts) != grid.n_tau + 1:
        raise ExperimentFileError(
            len(lines) + 1, f"expected {grid.n_tau + 1} rows, found {len(counts)}"
        )
    mset = MeasurementSet(
        grid=grid,
        shots_per_tau=shots,
        counts=np.asarray(counts),
        seed=spec.get("seed"),
        truth_params=truth_params,
    )
    return mset, manifest


def write_reconstruction(
    path,
    estimate: PhotonDistribution,
    loglik_trace,
    excited_rows,
    summary: dict,
    manifest: dict,
) -> None:
    """Result file: distribution, likelihood trace, response curve, summary.

    ``excited_rows`` is an iterable of (tau, model probability, observed
    frequency) triples, or None when no measurements accompany the result.
    """
    lines = [FILE_KINDS["reconstruction"], _manifest_line(manifest)]
    lines.append(SECTION_PREFIX + "photon distribution")
    lines.append("n,p_n")
    lines += [f"{n},{fmt(p)}" for n, p in enumerate(estimate.probs)]
    lines.append(SECTION_PREFIX + "log-likelihood trace")
    lines.append("iteration,loglik")
    lines += [f"{i + 1},{fmt(v)}" for i, v in enumerate(loglik_trace)]
    if excited_rows is not None:
        lines.append(SECTION_PREFIX + "excited-state probability")
        lines.append("tau,p_excited_reconstructed,frequency")
        lines += [f"{fmt(t)},{fmt(pe)},{fmt(fr)}" for t, pe, fr in excited_rows]
    lines.append(_summary_line(summary))
    _write_lines(path, lines)


def write_sweep(path, report: SweepReport, manifest: dict) -> None:
    lines = [FILE_KINDS["sweep"], _manifest_line(manifest)]
    lines.append("axis_value,fidelity_mean,fidelity_stddev,repeats")
    for value, mean, stddev in zip(
        report.axis_values, report.fidelity_mean, report.fidelity_stddev
    ):
        lines.append(f"{int(value)},{fmt(mean)},{fmt(stddev)},{report.repeats}")
    lines.append(_summary_line({"axis": report.axis, "repeats": report.repeats}))
    _write_lines(path, lines)


def data_fingerprint(path) -> str:
    """SHA-256 of every line except the manifest (the only timestamped line)."""
    digest = hashlib.sha256()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith(MANIFEST_PREFIX):
            continue
        digest.update(line.encode("utf-8"))
        digest.update(b"\n")
    return digest.hexdigest()


def read_manifest(path) -> dict:
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith(MANIFEST_PREFIX):
            return json.loads(line[len(MANIFEST_PREFIX):])
    raise ExperimentFileError(1, "no manifest line found")


def _write_lines(path, lines) -> None:
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
