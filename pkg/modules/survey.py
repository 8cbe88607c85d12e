"""
Duffing-Van der Pol Survey - Survey Orchestration
Run configuration, reproduction presets and the command drivers behind main.py
"""

import math
import os
import time
import warnings
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

import config
from . import __version__
from .autonomous_analysis import (
    DOMAIN_TYPES,
    bifurcation_lines,
    census_counts,
    find_cycles,
    locate_domain_samples,
)
from .errors import ConfigError, NearSeparatrixWarning, NonFinite, SectionAmbiguity, StepFailure, SurveyError
from .flow_engine import (
    FAMILIES,
    SCENARIOS,
    StroboscopicMap,
    Variant,
    sample_portrait,
    scan_connections,
    separatrix_branches,
    splitting_report,
    trace_tangency_curve,
)
from .melnikov_homoclinic import (
    LoopSide,
    analytic_tangency_lines,
    delta1,
    integrated_threshold_p3,
    left_loop_p2,
    left_loop_tangency_p3,
    loop_condition,
    melnikov_integral,
    right_loop_p2,
    threshold_p3_star,
    vertex_amplitude,
)
from .parameters import Params
from .resonance_analysis import detect_rotation, enumerate_zones, pendulum_model, pendulum_portrait
from .results import PlotSeries, ResultStore, type_color
from .unperturbed_geometry import DomainTag, frequency, level_from_rho, sample_orbit, separatrix_curve

Command = Literal[
    "census-plane", "cycles", "resonance", "melnikov", "poincare", "separatrix", "portrait", "diagram"
]

# Commands whose output depends on a nonzero forcing frequency
_NEEDS_P4 = ("resonance", "melnikov", "poincare", "separatrix", "diagram")

# Fields left out of the provenance echo
_VOLATILE = {"out_dir", "workers", "timestamp"}


def _log(msg: str) -> None:
    print(f"[Survey] {msg}")


# ==================== RUN CONFIGURATION ====================


class RunConfig(BaseModel):
    """
    One survey run

    Built from a preset, a flat key = value file and command-line overrides
    (in that order). Grid axes p1, p2, p3 are (min, max, n); n = 1 is a
    single point and needs min == max.
    """

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False, validate_assignment=True)

    command: Command
    epsilon: float = Field(0.1, ge=0.0)
    p1: float = 0.0
    p2: float = 0.0
    p3: float = 0.0
    p4: float = 1.0

    p1_min: float = config.CENSUS_P1_RANGE[0]
    p1_max: float = config.CENSUS_P1_RANGE[1]
    n_p1: int = Field(config.CENSUS_RESOLUTION[0], ge=1)
    p2_min: float = config.CENSUS_P2_RANGE[0]
    p2_max: float = config.CENSUS_P2_RANGE[1]
    n_p2: int = Field(config.CENSUS_RESOLUTION[1], ge=1)
    p3_min: float = 0.0
    p3_max: float = 5.0
    n_p3: int = Field(21, ge=1)

    probes: bool = False
    domains: List[DomainTag] = Field(default_factory=lambda: list(DomainTag))
    p_max: int = Field(config.RESONANCE_P_MAX, ge=1)
    q_max: int = Field(1, ge=1)
    portrait: bool = False

    variant: Variant = Variant.ORIGINAL
    n_seeds: int = Field(8, ge=1)
    seed_x_min: float = -1.6
    seed_x_max: float = 1.6
    iterates: int = Field(200, ge=1)
    skip: int = Field(0, ge=0)
    t_end: float = Field(60.0, gt=0.0)
    samples: int = Field(800, ge=2)
    budget: float = Field(6.0, gt=0.0)

    families: List[str] = Field(default_factory=lambda: ["right", "left"])
    analytic: bool = True
    numeric: bool = False
    connections: bool = False

    rtol: Optional[float] = Field(None, gt=0.0, lt=1e-3)
    atol: Optional[float] = Field(None, gt=0.0, lt=1e-3)

    out_dir: Optional[str] = None
    workers: int = Field(config.DEFAULT_WORKERS, ge=1)
    timestamp: bool = True

    @field_validator("domains", "families", mode="before")
    @classmethod
    def _split_list(cls, value):
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        return value

    @field_validator("families")
    @classmethod
    def _known_families(cls, value):
        unknown = [name for name in value if name not in FAMILIES]
        if unknown:
            raise ValueError(f"unknown families {unknown}; choose from {sorted(FAMILIES)}")
        return value

    @model_validator(mode="after")
    def _check_grid(self):
        for axis in ("p1", "p2", "p3"):
            lo, hi, n = getattr(self, f"{axis}_min"), getattr(self, f"{axis}_max"), getattr(self, f"n_{axis}")
            if n == 1 and lo != hi:
                raise ValueError(f"n_{axis} = 1 needs {axis}_min == {axis}_max")
            if n >= 2 and not hi > lo:
                raise ValueError(f"{axis} range [{lo}, {hi}] is degenerate")
        if self.seed_x_max < self.seed_x_min:
            raise ValueError("seed_x_max must be >= seed_x_min")
        if self.command in _NEEDS_P4 and self.p4 == 0.0:
            raise ValueError(f"{self.command} needs p4 != 0")
        needs_eps = (
            self.command == "separatrix"
            or (self.command == "diagram" and (self.numeric or self.connections))
            or (self.command == "resonance" and self.portrait)
        )
        if needs_eps and self.epsilon <= 0.0:
            raise ValueError(f"{self.command} needs epsilon > 0")
        return self

    def params(self) -> Params:
        return Params(epsilon=self.epsilon, p1=self.p1, p2=self.p2, p3=self.p3, p4=self.p4)

    def axis_values(self, axis: str) -> np.ndarray:
        return np.linspace(getattr(self, f"{axis}_min"), getattr(self, f"{axis}_max"), getattr(self, f"n_{axis}"))

    def echo(self) -> Dict[str, Any]:
        """Configuration echo; lists joined by commas so the echo loads back as a config file"""
        data = self.model_dump(mode="json", exclude=_VOLATILE)
        return {k: ",".join(map(str, v)) if isinstance(v, list) else v for k, v in data.items()}


@dataclass
class SweepResult:
    """Outcome of one run: grid metadata, per-cell records, provenance and written files"""

    command: str
    grid: Dict[str, Any]
    records: List[Dict[str, Any]]
    provenance: Dict[str, Any]
    files: List[str] = field(default_factory=list)
    partial: bool = False

    @property
    def cell_count(self) -> int:
        return len(self.records)


# ==================== PRESETS ====================


def _scenario_preset(name: str) -> Dict[str, Any]:
    return {"command": "separatrix", **SCENARIOS[name].as_dict()}


def _diagram_preset(p1: float) -> Dict[str, Any]:
    return {
        "command": "diagram",
        "epsilon": config.DIAGRAM_EPSILON,
        "p1": p1,
        "p4": config.DIAGRAM_P4,
        "p2_min": 0.0,
        "p2_max": 2.5,
        "n_p2": 26,
        "p3_min": 0.0,
        "p3_max": 5.0,
        "n_p3": 21,
        "numeric": True,
        "connections": True,
        "families": "right,left,right_to_left,left_to_right",
    }


_FIG6 = {"command": "resonance", "epsilon": 0.1, "p1": 1.0, "p_max": 4}

PRESETS: Dict[str, Dict[str, Any]] = {
    "fig2": {"command": "census-plane"},
    "fig4": {"command": "cycles", "probes": True},
    # pendulum archetypes at the p = 2 level of G1+: rotation, partially passable, impassable
    "fig5a": {**_FIG6, "p2": -0.02, "p3": 0.02, "p4": 2.5, "domains": "G1_PLUS", "p_max": 2, "portrait": True},
    "fig5b": {**_FIG6, "p2": -0.02, "p3": 0.5, "p4": 2.5, "domains": "G1_PLUS", "p_max": 2, "portrait": True},
    "fig5c": {**_FIG6, "p2": -0.1, "p3": 0.5, "p4": 2.5, "domains": "G1_PLUS", "p_max": 2, "portrait": True},
    "fig6a": {**_FIG6, "p2": -0.1, "p3": 0.5, "p4": 2.5, "domains": "G1_PLUS"},
    "fig6b": {**_FIG6, "p2": -0.02, "p3": 0.5, "p4": 2.5, "domains": "G1_PLUS"},
    "fig6c": {**_FIG6, "p2": 0.03, "p3": 1.0, "p4": 3.36, "domains": "G2"},
    "fig6d": {**_FIG6, "p2": 0.03, "p3": 1.0, "p4": 3.0, "domains": "G2"},
    "fig7": {
        "command": "resonance", "epsilon": 0.01, "p1": -0.221, "p2": 1.22, "p3": 1.0, "p4": 2.782,
        "domains": "G1_PLUS", "p_max": 3, "portrait": True,
    },
    "fig12": _diagram_preset(0.78),
    "fig13": _diagram_preset(0.8),
    "fig14": _diagram_preset(0.82),
}
PRESETS.update({name: _scenario_preset(name) for name in SCENARIOS})


# ==================== CONFIG LOADING ====================


def parse_config_file(path: str) -> Dict[str, str]:
    """
    Read a flat key = value file ('#' starts a comment, '-' in keys reads as '_')

    Raises:
        ConfigError: missing file or malformed line
    """
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    values: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def workers_from_env() -> Optional[int]:
    raw = os.environ.get(config.WORKERS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{config.WORKERS_ENV_VAR}={raw!r} is not an integer") from exc


def build_config(
    command: Optional[str] = None,
    config_file: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
    repro: Optional[str] = None,
    workers: Optional[int] = None,
) -> RunConfig:
    """
    Assemble a RunConfig: preset < config file < overrides; workers from the
    argument, else the environment variable, else the file or default

    Raises:
        ConfigError: unknown preset, malformed file or failed validation
    """
    values: Dict[str, Any] = {}
    if repro is not None:
        if repro not in PRESETS:
            raise ConfigError(f"unknown preset {repro!r}; choose from {', '.join(sorted(PRESETS))}")
        values.update(PRESETS[repro])
    if config_file is not None:
        values.update(parse_config_file(config_file))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if command is not None:
        values["command"] = command
    if "command" not in values:
        raise ConfigError("no command given (use a subcommand or --repro)")

    workers = workers if workers is not None else workers_from_env()
    if workers is not None:
        values["workers"] = workers

    try:
        return RunConfig(**values)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


# ==================== WORKER POOL ====================


def parallel_map(func: Callable, tasks: Sequence, workers: int = 1) -> List:
    """Ordered map over a process pool; results never depend on the worker count"""
    if workers > 1 and len(tasks) > 1:
        with Pool(min(workers, len(tasks))) as pool:
            return pool.map(func, tasks)
    return [func(task) for task in tasks]


def _census_row(args):
    p1, p2_values = args
    return census_counts(np.full_like(p2_values, p1), p2_values)


def _poincare_orbit(args):
    params, variant, seed, iterates, skip = args
    strobe = StroboscopicMap(params, variant)
    z = np.asarray(seed, dtype=float)
    rows = []
    for k in range(1, iterates + 1):
        try:
            z = strobe.apply(z)[0]
        except (StepFailure, NonFinite):
            return rows, True
        if np.hypot(z[0], z[1]) > config.ESCAPE_RADIUS:
            return rows, True
        if k > skip:
            rows.append((k, float(z[0]), float(z[1])))
    return rows, False


def _portrait_trajectory(args):
    params, variant, seed, t_end, samples = args
    return sample_portrait(params, [seed], t_end, variant, samples)[0]


def _seed_line(cfg: RunConfig) -> np.ndarray:
    xs = np.linspace(cfg.seed_x_min, cfg.seed_x_max, cfg.n_seeds)
    return np.column_stack([xs, np.zeros_like(xs)])


def _figure_eight() -> List[PlotSeries]:
    return [
        PlotSeries("separatrix", separatrix_curve(400, "right"), color="0.6"),
        PlotSeries("", separatrix_curve(400, "left"), color="0.6"),
    ]


# ==================== COMMANDS ====================


def _domain_names(i: int, j: int, k: int, p2: float) -> str:
    """Published domain names of a cycle type (primed in the mirrored half plane)"""
    if p2 < 0.0:
        names = [name + "'" for name, t in DOMAIN_TYPES.items() if t == (j, i, k)]
    else:
        names = [name for name, t in DOMAIN_TYPES.items() if t == (i, j, k)]
    return "|".join(names)


def cmd_census_plane(cfg: RunConfig, store: ResultStore):
    """Cycle census on a (p1, p2) grid with the analytic bifurcation lines as overlay"""
    p1_values, p2_values = cfg.axis_values("p1"), cfg.axis_values("p2")
    counts = parallel_map(_census_row, [(float(p1), p2_values) for p1 in p1_values], cfg.workers)

    records = []
    for p1, row in zip(p1_values, counts):
        for p2, (i, j, k) in zip(p2_values, row):
            records.append({
                "p1": float(p1), "p2": float(p2), "i": int(i), "j": int(j), "k": int(k),
                "domains": _domain_names(int(i), int(j), int(k), float(p2)),
            })
    header = ["p1", "p2", "i", "j", "k", "domains"]
    store.write_csv("census.csv", header, ([r[h] for h in header] for r in records))

    box = ((cfg.p1_min, cfg.p1_max), (cfg.p2_min, cfg.p2_max))
    overlay, line_rows = [], []
    for line in bifurcation_lines():
        pts = np.asarray(line.sample(*box), dtype=float).reshape(-1, 2)
        inside = (
            (pts[:, 0] >= box[0][0]) & (pts[:, 0] <= box[0][1])
            & (pts[:, 1] >= box[1][0]) & (pts[:, 1] <= box[1][1])
        )
        pts = pts[inside]
        line_rows.extend((line.name, p1, p2) for p1, p2 in pts)
        overlay.append(PlotSeries(line.name, pts, color="k"))
    store.write_csv("census_lines.csv", ["line", "p1", "p2"], line_rows)

    groups: Dict[Tuple[int, int, int], List[Tuple[float, float]]] = {}
    for r in records:
        groups.setdefault((r["i"], r["j"], r["k"]), []).append((r["p1"], r["p2"]))
    series = [
        PlotSeries(f"({i},{j},{k})", np.array(pts), kind="points", color=type_color(i, j, k))
        for (i, j, k), pts in sorted(groups.items())
    ]
    store.write_svg("census.svg", series + overlay, "p1", "p2", "cycle census (i, j, k)", limits=None)

    grid = {"p1": (cfg.p1_min, cfg.p1_max, cfg.n_p1), "p2": (cfg.p2_min, cfg.p2_max, cfg.n_p2)}
    return grid, records


def cmd_cycles(cfg: RunConfig, store: ResultStore):
    """Limit cycles at one point, or at a certified probe of every published domain"""
    points = locate_domain_samples() if cfg.probes else {"point": (cfg.p1, cfg.p2)}

    census_rows, records, orbit_rows = [], [], []
    for label, (p1, p2) in points.items():
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NearSeparatrixWarning)
            census = find_cycles(p1, p2)
        census_rows.append((label, p1, p2, *census.type, len(caught) > 0))

        series = _figure_eight()
        for idx, cycle in enumerate(census.cycles):
            records.append({
                "label": label, "p1": p1, "p2": p2, "domain": cycle.domain.value, "rho": cycle.rho,
                "h": cycle.h, "multiplicity": cycle.multiplicity, "stable": cycle.stable,
            })
            orbit = sample_orbit(level_from_rho(cycle.rho, cycle.domain), cfg.samples)
            orbit_rows.extend((label, idx, t, x, y) for t, x, y in orbit)
            state = "stable" if cycle.stable else "unstable"
            series.append(PlotSeries(f"{cycle.domain.value} rho={cycle.rho:.4f} ({state})", orbit[:, 1:]))
        name = "cycles.svg" if label == "point" else f"cycles_{label}.svg"
        store.write_svg(name, series, "x", "y", f"{label}: p1={p1:.4f}, p2={p2:.4f}, type {census.type}")

    store.write_csv("cycles_census.csv", ["label", "p1", "p2", "i", "j", "k", "near_separatrix"], census_rows)
    header = ["label", "p1", "p2", "domain", "rho", "h", "multiplicity", "stable"]
    store.write_csv("cycles.csv", header, ([r[h] for h in header] for r in records))
    store.write_csv("cycles_orbits.csv", ["label", "cycle", "t", "x", "y"], orbit_rows)
    return {"points": {k: list(v) for k, v in points.items()}}, records


def cmd_resonance(cfg: RunConfig, store: ResultStore):
    """Resonance zones with their pendulum coefficients and passability class"""
    params = cfg.params()
    zones = enumerate_zones(params, cfg.domains, cfg.p_max, cfg.q_max, cfg.workers)

    records = []
    for zone in zones:
        records.append({
            "domain": zone.level.domain.value, "p": zone.pair.p, "q": zone.pair.q, "rho": zone.level.rho,
            "h": zone.level.h, "omega": frequency(zone.level), "b": zone.b, "sigma": zone.sigma,
            "sigma_quadrature": zone.sigma_quadrature, "A": zone.amplitude_A, "B": zone.B_value,
            "class": zone.classification.value,
        })
    header = ["domain", "p", "q", "rho", "h", "omega", "b", "sigma", "sigma_quadrature", "A", "B", "class"]
    store.write_csv("resonance.csv", header, ([r[h] for h in header] for r in records))

    if cfg.portrait:
        rows, summary = [], []
        for zone, record in zip(zones, records):
            if not zone.classification.splittable:
                continue
            model = pendulum_model(zone, params.p3, params.epsilon)
            rotation = detect_rotation(model)
            record["rotation"] = rotation
            summary.append((record["domain"], zone.pair.p, zone.pair.q, model.trusted, model.has_equilibria, rotation))
            series = []
            for seed, traj in pendulum_portrait(model, tau_end=cfg.t_end, n=cfg.samples):
                rows.extend((record["domain"], zone.pair.p, zone.pair.q, seed, tau, v, u) for tau, v, u in traj)
                series.append(PlotSeries("", traj[:, 1:], color="C0"))
            equilibria = model.equilibria()
            series.append(PlotSeries("equilibria", np.column_stack([equilibria, np.zeros_like(equilibria)]), kind="points", color="r"))
            name = f"resonance_{record['domain']}_p{zone.pair.p}q{zone.pair.q}.svg"
            store.write_svg(name, series, "v", "dv/dtau", f"{record['domain']} ({zone.pair.p},{zone.pair.q}) {record['class']}")
        store.write_csv("resonance_portrait.csv", ["domain", "p", "q", "seed", "tau", "v", "u"], rows)
        store.write_csv("resonance_models.csv", ["domain", "p", "q", "trusted", "equilibria", "rotation"], summary)

    return {"domains": [d.value for d in cfg.domains], "p_max": cfg.p_max, "q_max": cfg.q_max}, records


def cmd_melnikov(cfg: RunConfig, store: ResultStore):
    """Melnikov mean, amplitude and thresholds of both loops, with Delta1 over one period"""
    p = cfg.params()
    right_holds = abs(loop_condition(p.p1, p.p2, LoopSide.RIGHT)) <= config.LEFT_LOOP_PRECONDITION_TOL

    records = []
    for side in LoopSide:
        _, result = delta1(0.0, p.p1, p.p2, p.p3, p.p4, side)
        records.append({
            "side": side.value,
            "mean": result.mean,
            "amplitude": result.amplitude,
            "verdict": result.verdict.value,
            "p3_star": threshold_p3_star(p.p1, p.p2, p.p4, side),
            "amplitude_integral": vertex_amplitude(p.p3, p.p4, side),
            "p3_star_integral": integrated_threshold_p3(p.p1, p.p2, p.p4, side),
            "loop_p2": right_loop_p2(p.p1) if side is LoopSide.RIGHT else left_loop_p2(p.p1),
            "left_tangency_p3": left_loop_tangency_p3(p.p2, p.p4) if side is LoopSide.LEFT and right_holds else math.nan,
        })
    header = list(records[0])
    store.write_csv("melnikov.csv", header, ([r[h] for h in header] for r in records))

    t0 = np.linspace(0.0, p.forcing_period, 65)
    rows, series = [], []
    columns = {}
    for side in LoopSide:
        closed, _ = delta1(t0, p.p1, p.p2, p.p3, p.p4, side)
        direct = np.array([melnikov_integral(t, p.p1, p.p2, p.p3, p.p4, side) for t in t0])
        columns[side] = (closed, direct)
        series.append(PlotSeries(f"{side.value.lower()} closed form", np.column_stack([t0, closed])))
        series.append(PlotSeries(f"{side.value.lower()} integral", np.column_stack([t0, direct])))
    for idx, t in enumerate(t0):
        rows.append((t,) + tuple(v[idx] for side in LoopSide for v in columns[side]))
    store.write_csv(
        "melnikov_profile.csv",
        ["t0", "right_closed", "right_integral", "left_closed", "left_integral"],
        rows,
    )
    store.write_svg("melnikov_profile.svg", series, "t0", "Delta1", "Melnikov functions")
    return {"t0": (0.0, p.forcing_period, t0.size)}, records


def cmd_poincare(cfg: RunConfig, store: ResultStore):
    """Stroboscopic iterates of a line of seeds"""
    params = cfg.params()
    seeds = _seed_line(cfg)
    tasks = [(params, cfg.variant, tuple(seed), cfg.iterates, cfg.skip) for seed in seeds]
    results = parallel_map(_poincare_orbit, tasks, cfg.workers)

    records, series, escaped = [], [], []
    for idx, (rows, lost) in enumerate(results):
        if lost:
            escaped.append(idx)
        for k, x, y in rows:
            records.append({"seed": idx, "iterate": k, "x": x, "y": y})
        if rows:
            series.append(PlotSeries("", np.array(rows)[:, 1:], kind="points", color=f"C{idx % 10}"))
    header = ["seed", "iterate", "x", "y"]
    store.write_csv("poincare.csv", header, ([r[h] for h in header] for r in records))
    store.write_csv("poincare_seeds.csv", ["seed", "x0", "y0", "escaped"], [(i, s[0], s[1], i in escaped) for i, s in enumerate(seeds)])
    store.write_svg("poincare.svg", _figure_eight() + series, "x", "y", f"stroboscopic map ({cfg.variant.value.lower()})")
    return {"seeds": cfg.n_seeds, "iterates": cfg.iterates, "escaped": escaped}, records


_REPORT_PAIRS = (
    ("right", "unstable_right", "stable_right", LoopSide.RIGHT),
    ("left", "unstable_left", "stable_left", LoopSide.LEFT),
    ("right_to_left", "unstable_right", "stable_left", LoopSide.LEFT),
    ("left_to_right", "unstable_left", "stable_right", LoopSide.RIGHT),
)


def cmd_separatrix(cfg: RunConfig, store: ResultStore):
    """Saddle branches of the transformed stroboscopic map and their mutual position"""
    strobe = StroboscopicMap(cfg.params(), Variant.TRANSFORMED)
    branches = separatrix_branches(strobe, cfg.budget)

    point_rows = []
    for name, branch in branches.items():
        point_rows.extend((name, idx, x, y) for idx, (x, y) in enumerate(branch.points))
    store.write_csv("separatrix.csv", ["branch", "index", "x", "y"], point_rows)

    records, hits, marks = [], [], []
    for family, u_name, s_name, side in _REPORT_PAIRS:
        try:
            report = splitting_report(branches[u_name], branches[s_name], side)
        except SectionAmbiguity:
            records.append({"family": family, "verdict": "NO_SECTION", "min_distance": math.nan, "intersections": 0})
            continue
        records.append({
            "family": family, "verdict": report.verdict.value,
            "min_distance": report.min_distance, "intersections": int(report.intersections.shape[0]),
        })
        hits.extend((family, x, y) for x, y in report.intersections)
        if report.intersections.size:
            marks.append(PlotSeries(f"{family} crossings", report.intersections, kind="points", color="k"))
    header = ["family", "verdict", "min_distance", "intersections"]
    store.write_csv("separatrix_report.csv", header, ([r[h] for h in header] for r in records))
    store.write_csv("separatrix_points.csv", ["family", "x", "y"], hits)

    series = [
        PlotSeries(name, branch.points, color="tab:red" if name.startswith("unstable") else "tab:blue")
        for name, branch in branches.items()
    ]
    store.write_svg("separatrix.svg", series + marks, "x", "y", "saddle separatrices")
    grid = {name: {"points": int(b.points.shape[0]), "truncated": b.truncated} for name, b in branches.items()}
    return grid, records


def cmd_portrait(cfg: RunConfig, store: ResultStore):
    """Trajectories of the flow from a line of seeds"""
    params = cfg.params()
    seeds = _seed_line(cfg)
    tasks = [(params, cfg.variant, tuple(seed), cfg.t_end, cfg.samples) for seed in seeds]
    trajectories = parallel_map(_portrait_trajectory, tasks, cfg.workers)

    records, series = [], _figure_eight()
    for idx, traj in enumerate(trajectories):
        records.extend({"seed": idx, "t": t, "x": x, "y": y} for t, x, y in traj)
        series.append(PlotSeries("", traj[:, 1:], color=f"C{idx % 10}"))
    header = ["seed", "t", "x", "y"]
    store.write_csv("portrait.csv", header, ([r[h] for h in header] for r in records))
    store.write_svg("portrait.svg", series, "x", "y", f"p1={cfg.p1}, p2={cfg.p2}, p3={cfg.p3}")
    return {"seeds": cfg.n_seeds, "t_end": cfg.t_end}, records


def _line_crossings(lines) -> List[Tuple[str, float, float]]:
    out = []
    for a_idx, a in enumerate(lines):
        for b in lines[a_idx + 1:]:
            if a.slope == b.slope:
                continue
            p2 = (b.intercept - a.intercept) / (a.slope - b.slope)
            p3 = float(a.p3(p2))
            inside = a.p2_min - 1e-12 <= p2 <= a.p2_max + 1e-12 and b.p2_min - 1e-12 <= p2 <= b.p2_max + 1e-12
            if inside and p3 >= -1e-12:
                out.append((f"{a.label}x{b.label}", float(p2), max(p3, 0.0)))
    return out


def cmd_diagram(cfg: RunConfig, store: ResultStore):
    """(p2, p3) bifurcation diagram: analytic tangency lines, traced curves and marked points"""
    curve_rows, point_rows, records, series = [], [], [], []

    if cfg.analytic:
        lines = analytic_tangency_lines(cfg.p1, cfg.p4, cfg.epsilon, p2_max=max(cfg.p2_max, 0.0))
        if cfg.p2_min < 0.0:
            lines = lines + [line.mirrored() for line in lines]
        line_rows = [
            (l.label, "|".join(s.value for s in l.sides), l.slope, l.intercept, l.p2_min, l.p2_max) for l in lines
        ]
        store.write_csv("diagram_lines.csv", ["label", "sides", "slope", "intercept", "p2_min", "p2_max"], line_rows)
        for line in lines:
            pts = line.sample(100)
            curve_rows.extend((line.label, "analytic", p2, p3) for p2, p3 in pts)
            records.append({"label": line.label, "kind": "analytic", "points": int(pts.shape[0])})
            series.append(PlotSeries(line.label, pts, color="k"))
        point_rows.extend((label, "analytic-crossing", p2, p3) for label, p2, p3 in _line_crossings(lines))

    ambiguous_rows = []
    if cfg.numeric:
        p2_values = cfg.axis_values("p2")
        for family in cfg.families:
            try:
                trace = trace_tangency_curve(
                    cfg.p1, cfg.p4, cfg.epsilon, family, p2_values,
                    (cfg.p3_min, cfg.p3_max), cfg.n_p3, cfg.workers,
                )
            except SurveyError as exc:
                store.mark_partial(f"{family}: {type(exc).__name__}: {exc}")
                continue
            for idx, curve in enumerate(trace.curves, start=1):
                label = f"{family}:{idx}"
                curve_rows.extend((label, "numeric", p2, p3) for p2, p3 in curve)
                records.append({"label": label, "kind": "numeric", "points": int(curve.shape[0])})
                series.append(PlotSeries(label, curve, color=f"C{len(series) % 10}"))
            point_rows.extend((family, "double-tangency", p2, p3) for p2, p3 in trace.intersections)
            ambiguous_rows.extend((family, *item) for item in trace.ambiguous)
        store.write_csv("diagram_ambiguous.csv", ["family", "p2", "p3_lo", "p3_hi"], ambiguous_rows)

    if cfg.connections:
        try:
            roots = scan_connections(cfg.p1, (max(cfg.p2_min, 0.0), cfg.p2_max), "BIG_LOOP", cfg.epsilon)
        except SurveyError as exc:
            store.mark_partial(f"big loop: {type(exc).__name__}: {exc}")
            roots = []
        point_rows.extend(("L4", "big-loop", p2, 0.0) for p2 in roots)

    store.write_csv("diagram_curves.csv", ["label", "kind", "p2", "p3"], curve_rows)
    store.write_csv("diagram_points.csv", ["label", "kind", "p2", "p3"], point_rows)
    if point_rows:
        series.append(PlotSeries("points", np.array([(r[2], r[3]) for r in point_rows]), kind="points", color="r"))
    store.write_svg("diagram.svg", series, "p2", "p3", f"p1={cfg.p1}, p4={cfg.p4}, eps={cfg.epsilon}")

    grid = {"p2": (cfg.p2_min, cfg.p2_max, cfg.n_p2), "p3": (cfg.p3_min, cfg.p3_max, cfg.n_p3), "ambiguous": len(ambiguous_rows)}
    return grid, records


COMMANDS: Dict[str, Callable] = {
    "census-plane": cmd_census_plane,
    "cycles": cmd_cycles,
    "resonance": cmd_resonance,
    "melnikov": cmd_melnikov,
    "poincare": cmd_poincare,
    "separatrix": cmd_separatrix,
    "portrait": cmd_portrait,
    "diagram": cmd_diagram,
}


# ==================== RUN ====================


def _apply_tolerances(cfg: RunConfig) -> None:
    if cfg.rtol is not None:
        config.RTOL_SWEEP = cfg.rtol
    if cfg.atol is not None:
        config.ATOL_SWEEP = cfg.atol


def run(cfg: RunConfig) -> SweepResult:
    """
    Execute one configured command

    Returns:
        SweepResult; partial is set when a numeric step failed but outputs were kept

    Raises:
        SurveyError: numeric failure that stopped the command (the run is marked partial)
    """
    _apply_tolerances(cfg)
    store = ResultStore(cfg.out_dir, provenance=cfg.echo(), timestamp=cfg.timestamp)
    start = time.perf_counter()
    try:
        grid, records = COMMANDS[cfg.command](cfg, store)
    except SurveyError as exc:
        store.mark_partial(f"{type(exc).__name__}: {exc}")
        raise

    provenance = {
        "version": __version__,
        "config": cfg.echo(),
        "elapsed_s": time.perf_counter() - start,
    }
    if config.DEBUG:
        _log(f"{cfg.command}: {len(records)} record(s), {len(store.files)} file(s)")
    return SweepResult(
        command=cfg.command,
        grid=grid,
        records=records,
        provenance=provenance,
        files=list(store.files),
        partial=store.status == "partial",
    )


# ==================== TESTING ====================

if __name__ == "__main__":
    import tempfile

    cfg = build_config("melnikov", overrides={"p1": 0.7, "p2": 0.3, "p3": 3.0, "p4": 4.0, "out_dir": tempfile.mkdtemp()})
    result = run(cfg)
    for record in result.records:
        print(record)
