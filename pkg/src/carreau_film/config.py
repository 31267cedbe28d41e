"""JSON case files: loading, validation and canonical dumping.

Schema and an annotated example live in ``docs/config.md``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .constitutive import FluidParams
from .errors import CarreauFilmError, ConfigError
from .expressions import Expression
from .fields import ForcingField, GapField, Grid2D
from .quadrature import QuadratureSpec
from .reynolds import SolverConfig


@dataclass(frozen=True)
class FieldSpec:
    """A scalar field: constant number, expression string, or CSV table path."""

    kind: str
    value: object

    def to_json(self):
        if self.kind == "table":
            return {"table": self.value}
        return self.value

    def cell_values(self, grid: Grid2D, where: str):
        if self.kind == "table":
            return _read_table(self.value, grid, where)
        return None


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    pressure_csv: bool = True
    flux_csv: bool = True
    vtk: bool = True
    vtk_velocity: bool = False
    report: bool = True


@dataclass(frozen=True)
class CaseConfig:
    fluid: FluidParams
    grid: Grid2D
    gap: FieldSpec
    forcing: tuple
    solver: SolverConfig = SolverConfig()
    quadrature: QuadratureSpec = QuadratureSpec()
    outputs: OutputSpec = OutputSpec()
    n3: int = 64
    name: str = "case"

    def build_fields(self):
        """Return ``(gap, forcing)`` sampled on the grid."""
        return build_gap(self.gap, self.grid), build_forcing(self.forcing, self.grid)


def _read_table(path, grid: Grid2D, where):
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError as exc:
        raise ConfigError(where, f"cannot read table {path}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(where, f"table {path} is not numeric CSV: {exc}") from None
    if data.shape != grid.shape:
        raise ConfigError(where, f"table {path} has shape {data.shape}, grid is {grid.shape} (rows are x)")
    if not np.all(np.isfinite(data)):
        raise ConfigError(where, f"table {path} contains non-finite entries")
    return data


def build_gap(spec: FieldSpec, grid: Grid2D) -> GapField:
    where = "gap.table" if spec.kind == "table" else "gap"
    try:
        if spec.kind == "table":
            return GapField.from_cells(spec.cell_values(grid, where), grid, provenance=f"table {spec.value}")
        if spec.kind == "constant":
            return GapField.constant(spec.value, grid)
        return GapField.from_function(Expression(spec.value, "gap"), grid, provenance=spec.value)
    except ConfigError:
        raise
    except CarreauFilmError as exc:
        raise ConfigError(where, f"{exc} (the film thickness needs a positive lower bound h_min)") from None


def build_forcing(specs, grid: Grid2D) -> ForcingField:
    fx_spec, fy_spec = specs
    try:
        if fx_spec.kind != "table" and fy_spec.kind != "table":
            fx = _callable(fx_spec, "forcing.fx")
            fy = _callable(fy_spec, "forcing.fy")
            return ForcingField.from_function(fx, fy, grid, provenance=f"({fx_spec.value}, {fy_spec.value})")
        xc, yc = grid.cell_coords()
        cells = []
        for spec, where in ((fx_spec, "forcing.fx"), (fy_spec, "forcing.fy")):
            if spec.kind == "table":
                cells.append(spec.cell_values(grid, where + ".table"))
            else:
                cells.append(np.asarray(_callable(spec, where)(xc, yc), dtype=float))
        return ForcingField.from_cells(cells[0], cells[1], grid, provenance="table")
    except ConfigError:
        raise
    except CarreauFilmError as exc:
        raise ConfigError("forcing", str(exc)) from None


def _callable(spec: FieldSpec, where):
    if spec.kind == "constant":
        value = float(spec.value)
        return lambda x, y: np.full(np.broadcast_shapes(np.shape(x), np.shape(y)), value)
    return Expression(spec.value, where)


def _field_spec(raw, where, base: Path):
    if isinstance(raw, bool):
        raise ConfigError(where, "expected a number, expression string or {\"table\": path}")
    if isinstance(raw, (int, float)):
        if not math.isfinite(raw):
            raise ConfigError(where, "value must be finite")
        return FieldSpec("constant", float(raw))
    if isinstance(raw, str):
        Expression(raw, where)
        return FieldSpec("expr", raw)
    if isinstance(raw, dict) and set(raw) == {"table"} and isinstance(raw["table"], str):
        path = Path(raw["table"])
        if not path.is_absolute():
            path = base / path
        return FieldSpec("table", str(path.resolve()))
    raise ConfigError(where, "expected a number, expression string or {\"table\": path}")


def _section(raw, name, allowed, required=()):
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(name, "expected an object")
    unknown = set(sec) - set(allowed)
    if unknown:
        raise ConfigError(f"{name}.{sorted(unknown)[0]}", "unknown key")
    for key in required:
        if key not in sec:
            raise ConfigError(f"{name}.{key}", "required key is missing")
    return sec


def _number(sec, name, key, default=None, integer=False):
    value = sec.get(key, default)
    ok = isinstance(value, int) if integer else isinstance(value, (int, float))
    if isinstance(value, bool) or not ok:
        kind = "an integer" if integer else "a number"
        raise ConfigError(f"{name}.{key}", f"expected {kind}, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{name}.{key}", "value must be finite")
    return value


def _build(raw, base: Path) -> CaseConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a JSON object")
    known = {"name", "fluid", "grid", "gap", "forcing", "solver", "quadrature", "outputs", "n3"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")

    fl = _section(raw, "fluid", ("eta0", "lam", "r", "eta_inf"), ("eta0", "lam", "r"))
    r = _number(fl, "fluid", "r")
    if r == 2:
        raise ConfigError("fluid.r", "flow index r = 2 is excluded; use 1 < r < 2 (shear-thinning) or r > 2 (shear-thickening)")
    if not r > 1:
        raise ConfigError("fluid.r", f"flow index must satisfy r > 1, got {r}")
    eta0 = _number(fl, "fluid", "eta0")
    lam = _number(fl, "fluid", "lam")
    eta_inf = _number(fl, "fluid", "eta_inf", 0.0)
    if not eta0 > 0:
        raise ConfigError("fluid.eta0", f"zero-shear viscosity must be positive, got {eta0}")
    if not lam >= 0:
        raise ConfigError("fluid.lam", f"time constant must be non-negative, got {lam}")
    if not 0 <= eta_inf < eta0:
        raise ConfigError("fluid.eta_inf", f"need 0 <= eta_inf < eta0, got {eta_inf}")
    fluid = FluidParams(eta0=eta0, lam=lam, r=r, eta_inf=eta_inf)

    gr = _section(raw, "grid", ("lx", "ly", "nx", "ny"), ("nx", "ny"))
    dims = (
        _number(gr, "grid", "lx", 1.0), _number(gr, "grid", "ly", 1.0),
        _number(gr, "grid", "nx", integer=True), _number(gr, "grid", "ny", integer=True),
    )
    try:
        grid = Grid2D(*dims)
    except CarreauFilmError as exc:
        raise ConfigError("grid", str(exc)) from None

    if "gap" not in raw:
        raise ConfigError("gap", "required key is missing")
    gap = _field_spec(raw["gap"], "gap", base)
    fo = _section(raw, "forcing", ("fx", "fy"))
    forcing = (
        _field_spec(fo.get("fx", 0.0), "forcing.fx", base),
        _field_spec(fo.get("fy", 0.0), "forcing.fy", base),
    )

    so = _section(raw, "solver", ("picard_tol", "max_iters", "relaxation", "linear_tol"))
    d = SolverConfig()
    solver_args = dict(
        picard_tol=_number(so, "solver", "picard_tol", d.picard_tol),
        max_iters=_number(so, "solver", "max_iters", d.max_iters, integer=True),
        relaxation=_number(so, "solver", "relaxation", d.relaxation),
        linear_tol=_number(so, "solver", "linear_tol", d.linear_tol),
    )
    try:
        solver = SolverConfig(**solver_args)
    except CarreauFilmError as exc:
        raise ConfigError("solver", str(exc)) from None

    qu = _section(raw, "quadrature", ("panel_count", "nodes_per_panel", "refinement_tol", "max_panels"))
    dq = QuadratureSpec()
    quad_args = dict(
        panel_count=_number(qu, "quadrature", "panel_count", dq.panel_count, integer=True),
        nodes_per_panel=_number(qu, "quadrature", "nodes_per_panel", dq.nodes_per_panel, integer=True),
        refinement_tol=_number(qu, "quadrature", "refinement_tol", dq.refinement_tol),
        max_panels=_number(qu, "quadrature", "max_panels", dq.max_panels, integer=True),
    )
    try:
        quad = QuadratureSpec(**quad_args)
    except CarreauFilmError as exc:
        raise ConfigError("quadrature", str(exc)) from None

    ou = _section(raw, "outputs", tuple(OutputSpec.__dataclass_fields__))
    flags = {}
    for key, default in asdict(OutputSpec()).items():
        value = ou.get(key, default)
        expected = str if key == "directory" else bool
        if not isinstance(value, expected):
            raise ConfigError(f"outputs.{key}", f"expected {expected.__name__}, got {value!r}")
        flags[key] = value
    directory = Path(flags["directory"])
    flags["directory"] = str(directory if directory.is_absolute() else (base / directory).resolve())
    outputs = OutputSpec(**flags)

    n3 = raw.get("n3", 64)
    if isinstance(n3, bool) or not isinstance(n3, int) or n3 < 3:
        raise ConfigError("n3", f"depth sample count must be an integer >= 3, got {n3!r}")
    name = raw.get("name", "case")
    if not isinstance(name, str):
        raise ConfigError("name", "expected a string")

    cfg = CaseConfig(fluid, grid, gap, forcing, solver, quad, outputs, n3, name)
    cfg.build_fields()  # validates tables, shapes and the thickness bound
    return cfg


def load_config(path) -> CaseConfig:
    """Read and validate a JSON case file.

    Relative table paths and the output directory are resolved against the
    file's directory.

    Raises
    ------
    ConfigError
        With ``.field`` naming the offending entry (dotted path).
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return _build(raw, path.parent.resolve())


def config_from_dict(raw, base=".") -> CaseConfig:
    return _build(raw, Path(base).resolve())


def config_to_dict(cfg: CaseConfig):
    """Canonical JSON-ready form with every default filled in."""
    return {
        "name": cfg.name,
        "fluid": {"eta0": cfg.fluid.eta0, "lam": cfg.fluid.lam, "r": cfg.fluid.r, "eta_inf": cfg.fluid.eta_inf},
        "grid": {"lx": cfg.grid.lx, "ly": cfg.grid.ly, "nx": cfg.grid.nx, "ny": cfg.grid.ny},
        "gap": cfg.gap.to_json(),
        "forcing": {"fx": cfg.forcing[0].to_json(), "fy": cfg.forcing[1].to_json()},
        "solver": asdict(cfg.solver),
        "quadrature": asdict(cfg.quadrature),
        "outputs": asdict(cfg.outputs),
        "n3": cfg.n3,
    }


def dump_config(cfg: CaseConfig, path):
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n")
