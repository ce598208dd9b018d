"""Delimited-text ingestion and persistence for the two dataset schemas.

Wolf data is one CSV (`year,n_hat,ci_low,ci_high,harvest`). Muskrat data is
two CSVs: `sites` (`site_id,province_id,grid_x,grid_y`; the 8-neighborhood
adjacency is derived from the grid coordinates) and `observations`
(`site_id,season_index,catch,effort_prov`). Validation errors cite the file
and line number of the offending row.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .muskrat import MuskratDataset, Site
from .synthetic import _grid_adjacency
from .wolf import WolfDataset

WOLF_COLUMNS = ("year", "n_hat", "ci_low", "ci_high", "harvest")
SITE_COLUMNS = ("site_id", "province_id", "grid_x", "grid_y")
OBSERVATION_COLUMNS = ("site_id", "season_index", "catch", "effort_prov")


def _read_rows(path, required_columns) -> list[tuple[int, dict]]:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required_columns if c not in header]
        if missing:
            raise ValidationError(
                f"{path}: missing required column(s): {', '.join(missing)}"
            )
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if all((v is None or v.strip() == "") for v in row.values()):
                continue
            rows.append((line_no, row))
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    return rows


def _parse(path, line_no: int, row: dict, column: str, kind: str):
    raw = row.get(column)
    if raw is None or raw.strip() == "":
        raise ValidationError(f"{path}, line {line_no}: missing value for {column!r}")
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        return float(raw)
    except ValueError:
        raise ValidationError(
            f"{path}, line {line_no}: cannot parse {column}={raw!r} as {kind}"
        ) from None


def load_wolf_dataset(path) -> WolfDataset:
    """Read and validate the annual abundance/harvest table."""
    rows = _read_rows(path, WOLF_COLUMNS)
    years, n_hat, ci_low, ci_high, harvest = [], [], [], [], []
    for line_no, row in rows:
        years.append(_parse(path, line_no, row, "year", "int"))
        n_hat.append(_parse(path, line_no, row, "n_hat", "float"))
        ci_low.append(_parse(path, line_no, row, "ci_low", "float"))
        ci_high.append(_parse(path, line_no, row, "ci_high", "float"))
        harvest.append(_parse(path, line_no, row, "harvest", "int"))
    try:
        return WolfDataset(years, n_hat, ci_low, ci_high, harvest)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def save_wolf_dataset(data: WolfDataset, path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(WOLF_COLUMNS)
        for i, year in enumerate(data.years):
            writer.writerow(
                [
                    year,
                    repr(float(data.n_hat[i])),
                    repr(float(data.ci_low[i])),
                    repr(float(data.ci_high[i])),
                    int(data.harvest[i]),
                ]
            )


def load_muskrat_dataset(sites_path, observations_path) -> MuskratDataset:
    """Read and validate the site table and the site-by-season observations."""
    site_rows = _read_rows(sites_path, SITE_COLUMNS)
    sites: list[Site] = []
    provinces: list[str] = []
    seen_ids: dict[str, int] = {}
    for line_no, row in site_rows:
        site_id = (row["site_id"] or "").strip()
        province_id = (row["province_id"] or "").strip()
        if not site_id:
            raise ValidationError(f"{sites_path}, line {line_no}: empty site_id")
        if site_id in seen_ids:
            raise ValidationError(
                f"{sites_path}, line {line_no}: duplicate site_id {site_id!r} "
                f"(first seen on line {seen_ids[site_id]})"
            )
        seen_ids[site_id] = line_no
        if not province_id:
            raise ValidationError(f"{sites_path}, line {line_no}: empty province_id")
        if province_id not in provinces:
            provinces.append(province_id)
        sites.append(
            Site(
                site_id=site_id,
                province_id=province_id,
                grid_x=_parse(sites_path, line_no, row, "grid_x", "int"),
                grid_y=_parse(sites_path, line_no, row, "grid_y", "int"),
            )
        )
    coords = {}
    for line_no, site in zip((ln for ln, _ in site_rows), sites):
        key = (site.grid_x, site.grid_y)
        if key in coords:
            raise ValidationError(
                f"{sites_path}, line {line_no}: duplicate grid coordinates {key}"
            )
        coords[key] = line_no

    site_index = {s.site_id: i for i, s in enumerate(sites)}
    obs_rows = _read_rows(observations_path, OBSERVATION_COLUMNS)
    seasons = set()
    records = []
    for line_no, row in obs_rows:
        site_id = (row["site_id"] or "").strip()
        if site_id not in site_index:
            raise ValidationError(
                f"{observations_path}, line {line_no}: unknown site_id {site_id!r}"
            )
        season = _parse(observations_path, line_no, row, "season_index", "int")
        if season < 0:
            raise ValidationError(
                f"{observations_path}, line {line_no}: season_index must be >= 0"
            )
        catch = _parse(observations_path, line_no, row, "catch", "int")
        if catch < 0:
            raise ValidationError(
                f"{observations_path}, line {line_no}: catch must be >= 0"
            )
        effort = _parse(observations_path, line_no, row, "effort_prov", "float")
        if effort < 0:
            raise ValidationError(
                f"{observations_path}, line {line_no}: effort_prov must be >= 0"
            )
        seasons.add(season)
        records.append((line_no, site_index[site_id], season, catch, effort))

    n_seasons = max(seasons) + 1
    if seasons != set(range(n_seasons)):
        missing = sorted(set(range(n_seasons)) - seasons)
        raise ValidationError(
            f"{observations_path}: seasons must be consecutive from 0; missing {missing}"
        )

    catch = np.full((len(sites), n_seasons), np.nan)
    effort_cells: dict[tuple[int, int], tuple[float, int]] = {}
    prov_lookup = {p: i for i, p in enumerate(provinces)}
    for line_no, s_i, t, y, eff in records:
        if not np.isnan(catch[s_i, t]):
            raise ValidationError(
                f"{observations_path}, line {line_no}: duplicate observation for "
                f"site {sites[s_i].site_id!r}, season {t}"
            )
        catch[s_i, t] = y
        p_i = prov_lookup[sites[s_i].province_id]
        if (p_i, t) in effort_cells:
            prev_eff, prev_line = effort_cells[(p_i, t)]
            if prev_eff != eff:
                raise ValidationError(
                    f"{observations_path}, line {line_no}: effort_prov {eff!r} "
                    f"disagrees with line {prev_line} ({prev_eff!r}) for province "
                    f"{provinces[p_i]!r}, season {t}"
                )
        else:
            effort_cells[(p_i, t)] = (eff, line_no)

    if np.any(np.isnan(catch)):
        s_i, t = np.argwhere(np.isnan(catch))[0]
        raise ValidationError(
            f"{observations_path}: missing observation for site "
            f"{sites[s_i].site_id!r}, season {t}"
        )
    effort_prov = np.zeros((len(provinces), n_seasons))
    for (p_i, t), (eff, _) in effort_cells.items():
        effort_prov[p_i, t] = eff
    missing_effort = [
        (provinces[p_i], t)
        for p_i in range(len(provinces))
        for t in range(n_seasons)
        if (p_i, t) not in effort_cells
    ]
    if missing_effort:
        raise ValidationError(
            f"{observations_path}: no effort recorded for province/season "
            f"pairs {missing_effort[:3]}"
        )

    adjacency = _grid_adjacency(sites)
    try:
        return MuskratDataset(
            sites=sites,
            provinces=provinces,
            n_seasons=n_seasons,
            catch=catch,
            effort_prov=effort_prov,
            adjacency=adjacency,
        )
    except ValidationError as exc:
        raise ValidationError(f"{sites_path}/{observations_path}: {exc}") from None


def save_muskrat_dataset(data: MuskratDataset, sites_path, observations_path) -> None:
    with Path(sites_path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SITE_COLUMNS)
        for site in data.sites:
            writer.writerow([site.site_id, site.province_id, site.grid_x, site.grid_y])
    effort_site = data.effort_by_site()
    with Path(observations_path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(OBSERVATION_COLUMNS)
        for i, site in enumerate(data.sites):
            for t in range(data.n_seasons):
                writer.writerow(
                    [site.site_id, t, int(data.catch[i, t]), repr(float(effort_site[i, t]))]
                )
