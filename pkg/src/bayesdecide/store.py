"""Posterior persistence, run manifests, and report files.

A stored posterior is a pair of files: `<name>.draws.csv` (one row per kept
draw, one column per parameter, full-precision floats) and `<name>.meta.json`
(chain config, seed, diagnostics, warnings, and an echo of the dataset the
model was fitted to, so decision analysis and the service can run from the
store alone). Reports are a `key: value` metadata block, a blank line, then
a CSV table. Every artifact gets a `.manifest.json` with input digests and a
config echo.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .mcmc import ChainConfig, ParamDiagnostics, PosteriorSample
from .muskrat import MuskratDataset, Site
from .wolf import WolfDataset

ARTIFACT_VERSION = "0.1.0"

DRAWS_SUFFIX = ".draws.csv"
META_SUFFIX = ".meta.json"
MANIFEST_SUFFIX = ".manifest.json"


@dataclass(frozen=True)
class StoredPosterior:
    name: str
    model: str
    sample: PosteriorSample
    dataset: WolfDataset | MuskratDataset
    meta: dict


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _dataset_echo(dataset) -> dict:
    if isinstance(dataset, WolfDataset):
        return {
            "kind": "wolf",
            "years": list(dataset.years),
            "n_hat": [float(v) for v in dataset.n_hat],
            "ci_low": [float(v) for v in dataset.ci_low],
            "ci_high": [float(v) for v in dataset.ci_high],
            "harvest": [int(v) for v in dataset.harvest],
        }
    if isinstance(dataset, MuskratDataset):
        return {
            "kind": "muskrat",
            "sites": [
                [s.site_id, s.province_id, s.grid_x, s.grid_y] for s in dataset.sites
            ],
            "provinces": list(dataset.provinces),
            "n_seasons": dataset.n_seasons,
            "catch": [[int(v) for v in row] for row in dataset.catch],
            "effort_prov": [[float(v) for v in row] for row in dataset.effort_prov],
            "adjacency": [list(nb) for nb in dataset.adjacency],
        }
    raise ValidationError(f"unsupported dataset type {type(dataset).__name__}")


def _dataset_from_echo(echo: dict):
    if echo["kind"] == "wolf":
        return WolfDataset(
            years=echo["years"],
            n_hat=echo["n_hat"],
            ci_low=echo["ci_low"],
            ci_high=echo["ci_high"],
            harvest=echo["harvest"],
        )
    if echo["kind"] == "muskrat":
        return MuskratDataset(
            sites=[Site(sid, prov, int(x), int(y)) for sid, prov, x, y in echo["sites"]],
            provinces=echo["provinces"],
            n_seasons=echo["n_seasons"],
            catch=echo["catch"],
            effort_prov=echo["effort_prov"],
            adjacency=[tuple(nb) for nb in echo["adjacency"]],
        )
    raise ValidationError(f"unknown dataset kind {echo.get('kind')!r}")


def save_posterior(
    sample: PosteriorSample, base, model: str, dataset
) -> tuple[Path, Path]:
    """Write `<base>.draws.csv` and `<base>.meta.json`; returns both paths."""
    base = Path(base)
    base.parent.mkdir(parents=True, exist_ok=True)
    draws_path = base.with_name(base.name + DRAWS_SUFFIX)
    meta_path = base.with_name(base.name + META_SUFFIX)

    with draws_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(sample.parameter_names)
        for row in sample.draws:
            writer.writerow([repr(float(v)) for v in row])

    meta = {
        "model": model,
        "artifact_version": ARTIFACT_VERSION,
        "config": asdict(sample.provenance),
        "parameter_names": list(sample.parameter_names),
        "diagnostics": {
            name: asdict(diag) for name, diag in sample.diagnostics.items()
        },
        "warnings": list(sample.warnings),
        "dataset": _dataset_echo(dataset),
    }
    with meta_path.open("w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=1)
        fh.write("\n")
    return draws_path, meta_path


def load_posterior(base) -> StoredPosterior:
    """Read a stored posterior back; round-trips all finite values losslessly."""
    base = Path(base)
    draws_path = base.with_name(base.name + DRAWS_SUFFIX)
    meta_path = base.with_name(base.name + META_SUFFIX)
    for p in (draws_path, meta_path):
        if not p.exists():
            raise ValidationError(f"posterior file not found: {p}")

    with meta_path.open(encoding="utf-8") as fh:
        meta = json.load(fh)
    with draws_path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    draws = np.array(rows, dtype=float)
    if list(header) != list(meta["parameter_names"]):
        raise ValidationError(f"{draws_path}: header disagrees with metadata")

    config = ChainConfig(**meta["config"])
    diagnostics = {
        name: ParamDiagnostics(**diag) for name, diag in meta["diagnostics"].items()
    }
    sample = PosteriorSample(
        draws=draws,
        parameter_names=tuple(header),
        diagnostics=diagnostics,
        provenance=config,
        warnings=tuple(meta.get("warnings", [])),
    )
    return StoredPosterior(
        name=base.name,
        model=meta["model"],
        sample=sample,
        dataset=_dataset_from_echo(meta["dataset"]),
        meta=meta,
    )


def list_posteriors(store_dir) -> list[str]:
    store_dir = Path(store_dir)
    if not store_dir.is_dir():
        return []
    names = [
        p.name[: -len(DRAWS_SUFFIX)]
        for p in store_dir.iterdir()
        if p.name.endswith(DRAWS_SUFFIX)
    ]
    return sorted(n for n in names if (store_dir / (n + META_SUFFIX)).exists())


def write_manifest(
    path, command: str, inputs: dict[str, str], seed: int, config_echo: dict
) -> Path:
    """Record provenance beside an artifact: input digests, seed, config, time."""
    path = Path(path)
    manifest = {
        "command": command,
        "inputs": {name: digest for name, digest in sorted(inputs.items())},
        "seed": int(seed),
        "config": config_echo,
        "artifact_version": ARTIFACT_VERSION,
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    with path.open("w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    return path


def read_manifest(path) -> dict:
    with Path(path).open(encoding="utf-8") as fh:
        return json.load(fh)


def write_report(path, metadata: dict, columns, rows) -> Path:
    """Key-value metadata block, blank line, then a CSV table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        for key, value in metadata.items():
            fh.write(f"{key}: {value}\n")
        fh.write("\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(row)
    return path


def read_report(path) -> tuple[dict, list[str], list[list[str]]]:
    metadata: dict[str, str] = {}
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    i = 0
    while i < len(lines) and lines[i].strip():
        key, _, value = lines[i].partition(":")
        metadata[key.strip()] = value.strip()
        i += 1
    i += 1  # blank separator
    table = list(csv.reader(lines[i:]))
    if not table:
        raise ValidationError(f"{path}: report has no table")
    return metadata, table[0], table[1:]
