"""Run configuration: a YAML file plus a few CLI overrides.

One versionable file drives a whole run. The seed is mandatory so no
run ever depends on wall-clock state, and exactly one network source
must be given. Relative paths resolve against the config file's
directory. See the key reference in the README.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .assemble import AssemblyConfig
from .demand import DEFAULT_SLP_PARAMS, DEFAULT_SPECIFIC_DEMAND, HourBand, SlpParams
from .errors import InputError
from .hydro import FluidProps, SizingConfig
from .simplify import ClusterConfig


@dataclass(frozen=True)
class RasterSource:
    png: Path
    control_points: Path
    color: tuple[int, int, int] = (0, 0, 255)
    tolerance: int = 30
    dilation: int = 0


@dataclass
class DemandConfig:
    calendar_year: int = 2023
    specific_demand: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_SPECIFIC_DEMAND))
    slp_params: dict[str, SlpParams] = field(default_factory=lambda: dict(DEFAULT_SLP_PARAMS))


@dataclass
class ClusterSettings:
    k: int
    max_iter: int = 100
    tol: float = 1e-3
    contract_degree2: bool = True

    def to_cluster_config(self, seed: int) -> ClusterConfig:
        return ClusterConfig(k=self.k, seed=seed, max_iter=self.max_iter, tol=self.tol)


@dataclass
class RunConfig:
    seed: int
    output_dir: Path
    network_kml: Path | None = None
    network_raster: RasterSource | None = None
    network_graph: Path | None = None
    buildings: Path | None = None
    blocks: Path | None = None
    plants: Path | None = None
    census: Path | None = None
    weather: Path | None = None
    catalog: Path | None = None
    snap_tolerance: float = 1.0
    buffer_threshold: float = 100.0
    plant_attach_max: float = 200.0
    delta_t: float = 30.0
    r_max: float = 250.0
    v_max: float = 3.0
    fluid: FluidProps = field(default_factory=FluidProps)
    demand: DemandConfig = field(default_factory=DemandConfig)
    cluster: ClusterSettings | None = None
    config_hash: str = ""

    def assembly_config(self) -> AssemblyConfig:
        return AssemblyConfig(
            seed=self.seed,
            buffer_threshold=self.buffer_threshold,
            plant_attach_max=self.plant_attach_max,
        )

    def sizing_config(self, catalog) -> SizingConfig:
        return SizingConfig(
            delta_t=self.delta_t, r_max=self.r_max, v_max=self.v_max, catalog=tuple(catalog)
        )


def _require(mapping: dict, key: str, source: str):
    if key not in mapping:
        raise InputError(f"{source}: missing required config key {key!r}")
    return mapping[key]


def _as_path(value, base: Path, source: str, key: str) -> Path:
    if not isinstance(value, str) or not value:
        raise InputError(f"{source}: {key} must be a path string")
    p = Path(value)
    return p if p.is_absolute() else base / p


def _parse_raster(raw: dict, base: Path, source: str) -> RasterSource:
    color = raw.get("color", [0, 0, 255])
    if not (isinstance(color, list) and len(color) == 3 and all(isinstance(c, int) for c in color)):
        raise InputError(f"{source}: network.raster.color must be [r, g, b] integers")
    return RasterSource(
        png=_as_path(_require(raw, "png", source), base, source, "network.raster.png"),
        control_points=_as_path(
            _require(raw, "control_points", source), base, source, "network.raster.control_points"
        ),
        color=tuple(color),
        tolerance=int(raw.get("tolerance", 30)),
        dilation=int(raw.get("dilation", 0)),
    )


def _parse_slp_overrides(raw: dict, source: str) -> dict[str, SlpParams]:
    params = dict(DEFAULT_SLP_PARAMS)
    for usage, over in (raw or {}).items():
        if usage not in params:
            raise InputError(f"{source}: slp override for unknown usage type {usage!r}")
        base = params[usage]
        try:
            bands = base.hour_bands
            if "hour_bands" in over:
                bands = tuple(
                    HourBand(
                        float(b.get("upper_c", math.inf)),
                        tuple(float(f) for f in b["factors"]),
                    )
                    for b in over["hour_bands"]
                )
            params[usage] = SlpParams(
                a=float(over.get("a", base.a)),
                b=float(over.get("b", base.b)),
                c=float(over.get("c", base.c)),
                d=float(over.get("d", base.d)),
                theta0=float(over.get("theta0", base.theta0)),
                weekday_factors=tuple(
                    float(f) for f in over.get("weekday_factors", base.weekday_factors)
                ),
                hour_bands=bands,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{source}: bad slp override for {usage!r}: {exc}") from None
    return params


def _hash_config(raw: dict) -> str:
    # output location must not change the model content hash
    hashable = {k: v for k, v in raw.items() if k != "output_dir"}
    digest = hashlib.sha256(json.dumps(hashable, sort_keys=True).encode("utf-8")).hexdigest()
    return digest[:16]


def load_config(path: str | Path, *, seed: int | None = None, output_dir: str | None = None) -> RunConfig:
    """Parse and validate a YAML run configuration.

    ``seed`` and ``output_dir`` are the CLI flag overrides; flags win
    over file values.
    """
    path = Path(path)
    source = str(path)
    if not path.is_file():
        raise InputError(f"config file not found: {source}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise InputError(f"{source}: invalid YAML: {exc}") from None
    if not isinstance(raw, dict):
        raise InputError(f"{source}: config must be a mapping")
    base = path.parent

    if seed is not None:
        raw["seed"] = seed
    if output_dir is not None:
        raw["output_dir"] = output_dir
    if not isinstance(raw.get("seed"), int):
        raise InputError(f"{source}: an integer seed is mandatory (file key or --seed)")

    network = raw.get("network") or {}
    if not isinstance(network, dict):
        raise InputError(f"{source}: network must be a mapping")
    sources = [k for k in ("kml", "raster", "graph_json") if k in network]
    if len(sources) != 1:
        raise InputError(
            f"{source}: exactly one network source (network.kml, network.raster or "
            f"network.graph_json) must be set, got {sources or 'none'}"
        )

    def opt_path(key: str) -> Path | None:
        return _as_path(raw[key], base, source, key) if key in raw and raw[key] else None

    assembly = raw.get("assembly") or {}
    sizing = raw.get("sizing") or {}
    demand_raw = raw.get("demand") or {}
    specific = dict(DEFAULT_SPECIFIC_DEMAND)
    for usage, value in (demand_raw.get("specific_demand_kwh_m2a") or {}).items():
        if usage not in specific:
            raise InputError(f"{source}: specific demand for unknown usage type {usage!r}")
        specific[usage] = float(value)

    cluster = None
    if "cluster" in raw and raw["cluster"] is not None:
        cluster_raw = raw["cluster"]
        if "k" not in cluster_raw:
            raise InputError(f"{source}: cluster.k is required when clustering is configured")
        cluster = ClusterSettings(
            k=int(cluster_raw["k"]),
            max_iter=int(cluster_raw.get("max_iter", 100)),
            tol=float(cluster_raw.get("tol_m", 1e-3)),
            contract_degree2=bool(cluster_raw.get("contract_degree2", True)),
        )

    fluid_raw = raw.get("fluid") or {}
    try:
        return RunConfig(
            seed=raw["seed"],
            output_dir=_as_path(raw.get("output_dir", "out"), base, source, "output_dir"),
            network_kml=(
                _as_path(network["kml"], base, source, "network.kml") if "kml" in network else None
            ),
            network_raster=(
                _parse_raster(network["raster"], base, source) if "raster" in network else None
            ),
            network_graph=(
                _as_path(network["graph_json"], base, source, "network.graph_json")
                if "graph_json" in network
                else None
            ),
            buildings=opt_path("buildings"),
            blocks=opt_path("blocks"),
            plants=opt_path("plants"),
            census=opt_path("census"),
            weather=opt_path("weather"),
            catalog=opt_path("catalog"),
            snap_tolerance=float(raw.get("snap_tolerance_m", 1.0)),
            buffer_threshold=float(assembly.get("buffer_m", 100.0)),
            plant_attach_max=float(assembly.get("plant_attach_max_m", 200.0)),
            delta_t=float(sizing.get("delta_t_k", 30.0)),
            r_max=float(sizing.get("r_max_pa_m", 250.0)),
            v_max=float(sizing.get("v_max_m_s", 3.0)),
            fluid=FluidProps(
                rho=float(fluid_raw.get("rho_kg_m3", 960.0)),
                cp=float(fluid_raw.get("cp_kj_kg_k", 4.18)),
                mu=float(fluid_raw.get("mu_pa_s", 3.55e-4)),
            ),
            demand=DemandConfig(
                calendar_year=int(demand_raw.get("calendar_year", 2023)),
                specific_demand=specific,
                slp_params=_parse_slp_overrides(demand_raw.get("slp"), source),
            ),
            cluster=cluster,
            config_hash=_hash_config(raw),
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"{source}: {exc}") from None
