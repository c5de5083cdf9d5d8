"""
Experiment and benchmark-grid configuration files.

Both are TOML. An experiment file has a `[ga]` section, exactly one of
`[data]` or `[simulation]`, an optional `[output]` section and a top-level
`repeat`. A grid file lists `[[cells]]` that share optional `[ga]` and
`[simulation]` defaults.
"""
import logging
import os
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .config import DEFAULT_OUT_DIR
from .engine import GaConfig
from .generator import SimSpec
from .ingest import IngestSpec
from .seed_data import builtin_grid_cells

logger = logging.getLogger(__name__)

_TABLE_ARRAY = re.compile(r"^\[\[\s*([^\]]+?)\s*\]\]")
_TABLE = re.compile(r"^\[\s*([^\]]+?)\s*\]")
_KEY = re.compile(r"""^["']?([A-Za-z0-9_\-]+)["']?\s*=""")


class ConfigError(ValueError):
    """A configuration problem, pointing at the file line when known."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        self.message = message
        location = path or "<config>"
        if line is not None:
            location = f"{location}:{line}"
        super().__init__(f"{location}: {message}")


class OutputSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    dir: str = DEFAULT_OUT_DIR
    cache_path: Optional[str] = None
    checkpoint_path: Optional[str] = None


class ExperimentConfig(BaseModel):
    """A runnable experiment: GA settings, one data source, outputs and repeats."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    ga: GaConfig
    data: Optional[IngestSpec] = None
    simulation: Optional[SimSpec] = None
    output: OutputSpec = Field(default_factory=OutputSpec)
    repeat: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _one_source(self) -> 'ExperimentConfig':
        if (self.data is None) == (self.simulation is None):
            raise ValueError("Give exactly one data source: [data] or [simulation]")
        return self

    def with_overrides(self, seed: Optional[int] = None, out_dir: Optional[str] = None) -> 'ExperimentConfig':
        config = self
        if seed is not None:
            config = config.model_copy(update={"ga": config.ga.model_copy(update={"rng_seed": seed})})
        if out_dir is not None:
            config = config.model_copy(
                update={"output": config.output.model_copy(update={"dir": out_dir})}
            )
        return config


class BenchCell(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_main: int = Field(ge=1)
    max_length: int = Field(ge=1)
    encoding: Literal["standard", "indexed"]
    n_true: Optional[int] = Field(None, ge=1)
    true_terms: list[Union[int, str]] = Field(default_factory=list)
    rng_seed: Optional[int] = Field(None, ge=0, lt=2**64)

    @property
    def label(self) -> str:
        return f"{self.n_main} main effects / {self.encoding} / l={self.max_length}"


class BenchGrid(BaseModel):
    """Grid cells plus the GA and simulation settings they share."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    ga: dict[str, Any] = Field(default_factory=dict)
    simulation: dict[str, Any] = Field(default_factory=dict)
    cells: list[BenchCell] = Field(default_factory=list)
    memory_budget_mb: Optional[float] = Field(None, gt=0)

    def ga_config(self, cell: BenchCell, seed: Optional[int] = None) -> GaConfig:
        settings = {**self.ga, "encoding": cell.encoding, "max_length": cell.max_length}
        if cell.rng_seed is not None:
            settings["rng_seed"] = cell.rng_seed
        if seed is not None:
            settings["rng_seed"] = seed
        return GaConfig(**settings)

    def sim_spec(self, cell: BenchCell) -> SimSpec:
        settings = {**self.simulation, "n_main": cell.n_main}
        if cell.true_terms:
            settings["true_terms"] = cell.true_terms
        else:
            settings["n_true"] = cell.n_true
        if cell.rng_seed is not None:
            settings["rng_seed"] = cell.rng_seed
        return SimSpec(**settings)


def locate(text: str, loc: tuple) -> Optional[int]:
    """
    Line number of the TOML key named by a pydantic error location.

    Falls back to the enclosing table header when the key itself is absent.
    """
    parts = list(loc)
    section: tuple = ()
    key: Optional[str] = None
    if len(parts) >= 2 and isinstance(parts[1], int):
        section = (str(parts[0]), parts[1])
        key = str(parts[2]) if len(parts) > 2 else None
    elif len(parts) >= 2:
        section = (str(parts[0]),)
        key = str(parts[1])
    elif parts:
        key = str(parts[0])

    current: tuple = ()
    counts: dict[str, int] = {}
    header_line = None
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        match = _TABLE_ARRAY.match(stripped)
        if match:
            name = match.group(1)
            counts[name] = counts.get(name, -1) + 1
            current = (name, counts[name])
        elif (match := _TABLE.match(stripped)):
            current = (match.group(1),)
        elif (match := _KEY.match(stripped)):
            if current == section and key is not None and match.group(1) == key:
                return number
            continue
        else:
            continue
        if current == section:
            header_line = number
        elif not section and key is not None and current[:1] == (key,):
            return number
    return header_line


def _format_error(error: dict) -> str:
    where = ".".join(str(p) for p in error["loc"]) or "config"
    return f"{where}: {error['msg']}"


def _validation_error(e: ValidationError, text: str, path: str) -> ConfigError:
    first = e.errors()[0]
    messages = "; ".join(_format_error(err) for err in e.errors())
    return ConfigError(messages, path=path, line=locate(text, first["loc"]))


def load_toml(path: str) -> tuple[dict, str]:
    if not os.path.isfile(path):
        raise ConfigError("file not found", path=path)
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    try:
        return tomllib.loads(text), text
    except tomllib.TOMLDecodeError as e:
        line = None
        if (match := re.search(r"line (\d+)", str(e))):
            line = int(match.group(1))
        raise ConfigError(f"invalid TOML ({e})", path=path, line=line)


def load_experiment(path: str) -> ExperimentConfig:
    """
    Read and validate an experiment file.

    A relative `[data] path` is resolved against the config file's directory.

    Raises:
        ConfigError: Unreadable file, bad TOML or failed validation
    """
    data, text = load_toml(path)
    source = data.get("data")
    if isinstance(source, dict) and "path" in source and not os.path.isabs(source["path"]):
        source["path"] = os.path.normpath(os.path.join(os.path.dirname(os.path.abspath(path)), source["path"]))
    try:
        config = ExperimentConfig(**data)
    except ValidationError as e:
        raise _validation_error(e, text, path)
    logger.debug("Loaded experiment %s", path)
    return config


def load_sim_spec(path: str) -> SimSpec:
    """A simulation file: a `[simulation]` section or the same keys at top level."""
    data, text = load_toml(path)
    settings = data.get("simulation", data)
    try:
        return SimSpec(**settings)
    except ValidationError as e:
        loc_prefix = ("simulation",) if "simulation" in data else ()
        first = e.errors()[0]
        messages = "; ".join(_format_error(err) for err in e.errors())
        raise ConfigError(messages, path=path, line=locate(text, loc_prefix + tuple(first["loc"])))


def load_grid(path: str) -> BenchGrid:
    """
    Read a grid file and validate every cell's GA and simulation settings.

    Raises:
        ConfigError: Unreadable file, bad TOML or an invalid cell
    """
    data, text = load_toml(path)
    try:
        grid = BenchGrid(**data)
    except ValidationError as e:
        raise _validation_error(e, text, path)
    for index, cell in enumerate(grid.cells):
        for section, build in (("ga", grid.ga_config), ("simulation", grid.sim_spec)):
            try:
                build(cell)
            except ValidationError as e:
                first = e.errors()[0]
                line = locate(text, (section, *first["loc"])) or locate(text, ("cells", index))
                raise ConfigError(
                    f"cell {index} ({cell.label}): " + "; ".join(_format_error(err) for err in e.errors()),
                    path=path, line=line,
                )
    return grid


def builtin_grid(**shared: Any) -> BenchGrid:
    """The simulated benchmark grid: five predictor counts, both encodings."""
    return BenchGrid(cells=[BenchCell(**cell) for cell in builtin_grid_cells()], **shared)
