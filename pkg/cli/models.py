"""
Experiment config models.

One model per task, selected by the "task" field. Unknown fields are rejected
everywhere so that typos fail loudly instead of silently falling back to defaults.
"""

import json
from pathlib import Path
from typing import Annotated, Any, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, field_validator, model_validator

from services.exceptions import ConfigError

TASKS = ("frame-verify", "naimark", "spectrum", "cc-spectrum", "cc-ladders", "pseudo-boson", "riesz-pairs", "prop15")
# alternative task names and the task they run
TASK_ALIASES = {"prop15": "riesz-pairs"}

ComplexEntry = Tuple[float, float]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FrameDocument(StrictModel):
    """Inline frame: {"dim": d, "vectors": [[[re, im], ...], ...], "labels": [...]}."""

    dim: int = Field(ge=1)
    vectors: List[Any] = Field(min_length=1)
    labels: Optional[List[Any]] = None


class RandomFrameSpec(StrictModel):
    """Random Parseval frame of J = dim + excess vectors from a projected ONB."""

    dim: int = Field(ge=1, le=200)
    excess: int = Field(default=0, ge=0, le=200)


class TaskConfig(StrictModel):
    output: Optional[Path] = Field(default=None, description="Output directory for run folders")
    seed: Optional[int] = Field(default=None, ge=0, description="Seed for randomised suites")


class FrameSourceMixin(StrictModel):
    frame_file: Optional[Path] = Field(default=None, description="Path to a frame JSON document")
    frame: Optional[FrameDocument] = Field(default=None, description="Inline frame document")
    random: Optional[RandomFrameSpec] = Field(default=None, description="Random Parseval frame")

    @model_validator(mode="after")
    def exactly_one_source(self):
        given = [name for name in ("frame_file", "frame", "random") if getattr(self, name) is not None]
        if len(given) != 1:
            raise ValueError(f"exactly one of frame_file, frame, random is required (got {given or 'none'})")
        return self


class FrameVerifyConfig(TaskConfig, FrameSourceMixin):
    task: Literal["frame-verify"]
    random_vectors: int = Field(default=100, ge=1, le=10000, description="Probe vectors for the isometry check")


class NaimarkConfig(TaskConfig, FrameSourceMixin):
    task: Literal["naimark"]
    trials: int = Field(default=1, ge=1, le=1000, description="Random frames to dilate (random source only)")


class RieszSplitSpec(StrictModel):
    J0: List[Any] = Field(min_length=1, description="Labels of the Riesz subfamily")
    J1: List[Any] = Field(default_factory=list, description="Remaining labels")


class SpectrumConfig(TaskConfig, FrameSourceMixin):
    task: Literal["spectrum"]
    E: Optional[List[float]] = Field(default=None, description="Weights, one per frame vector; random if omitted")
    declared_tail: Literal["bounded", "unbounded"] = "bounded"
    scan_offset: float = Field(default=1e-3, gt=1e-4, description="Offset of the off-spectrum certificate probes")
    riesz_split: Optional[RieszSplitSpec] = None

    @field_validator("E")
    @classmethod
    def validate_E(cls, v):
        if v is not None and not v:
            raise ValueError("E cannot be empty")
        return v


class CCBlockSpec(StrictModel):
    """Block spec {"n": n, "E": [E_1, ..., E_{n+1}]}."""

    n: int = Field(ge=1, le=2000)
    E: List[float]

    @model_validator(mode="after")
    def block_shape(self):
        if len(self.E) != self.n + 1:
            raise ValueError(f"E must have n + 1 = {self.n + 1} entries, got {len(self.E)}")
        return self


class CCSpectrumConfig(TaskConfig):
    task: Literal["cc-spectrum"]
    n: Optional[int] = Field(default=None, ge=1, le=2000)
    E: Optional[List[float]] = None
    blocks: Optional[List[CCBlockSpec]] = Field(default=None, min_length=1)
    family: Optional[Literal["ranked", "sqrt_bounded"]] = None
    N_blocks: Optional[int] = Field(default=None, ge=1, le=200)

    @model_validator(mode="after")
    def exactly_one_family(self):
        single = self.n is not None or self.E is not None
        given = [single, self.blocks is not None, self.family is not None]
        if sum(given) != 1:
            raise ValueError("exactly one of (n, E), blocks, family is required")
        if single and (self.n is None or self.E is None):
            raise ValueError("n and E must be given together")
        if single and len(self.E) != self.n + 1:
            raise ValueError(f"E must have n + 1 = {self.n + 1} entries, got {len(self.E)}")
        if self.family is not None and self.N_blocks is None:
            raise ValueError("family requires N_blocks")
        return self

    def block_specs(self) -> List[CCBlockSpec]:
        if self.blocks is not None:
            return list(self.blocks)
        return [CCBlockSpec(n=self.n, E=self.E)]


class CCLaddersConfig(TaskConfig):
    task: Literal["cc-ladders"]
    n_max: int = Field(default=100, ge=1, le=500)


class GridSpec(StrictModel):
    L: float = Field(gt=0.0, description="Half-width of the grid [-L, L]")
    P: int = Field(ge=64, description="Number of grid points")


class WeightFunctionSpec(StrictModel):
    """m(x): constant {"value"}, gaussian_bump {"base", "amplitude", "width"} or tabulated {"x", "values"}."""

    kind: Literal["constant", "gaussian_bump", "tabulated"]
    value: Optional[float] = None
    base: float = 0.5
    amplitude: float = 0.2
    width: float = Field(default=1.0, gt=0.0)
    x: Optional[List[float]] = None
    values: Optional[List[float]] = None

    @model_validator(mode="after")
    def params_for_kind(self):
        if self.kind == "constant" and self.value is None:
            raise ValueError("constant weight requires value")
        if self.kind == "tabulated":
            if self.x is None or self.values is None:
                raise ValueError("tabulated weight requires x and values")
            if len(self.x) != len(self.values) or len(self.x) < 4:
                raise ValueError("tabulated weight needs matching x/values with at least 4 points")
        return self


class PseudoBosonConfig(TaskConfig):
    task: Literal["pseudo-boson"]
    m: WeightFunctionSpec
    alpha_cells: int = Field(default=0, ge=0, description="Shift alpha in grid cells")
    grid: GridSpec = Field(default_factory=lambda: GridSpec(L=14.0, P=2048))
    N: int = Field(default=20, ge=2, le=200)
    calibrate: bool = Field(default=True, description="Calibrate the ladder tolerance on the constant-weight case")
    two_grid_order: Optional[int] = Field(default=2, ge=1, description="Order for the two-grid convergence check")

    @model_validator(mode="after")
    def two_grid_in_range(self):
        if self.two_grid_order is not None and self.two_grid_order >= self.N - 1:
            raise ValueError(f"two_grid_order must be below N - 1 = {self.N - 1}")
        return self


class RieszPairsConfig(TaskConfig):
    task: Literal["riesz-pairs", "prop15"]
    X: Optional[List[List[ComplexEntry]]] = Field(default=None, description="Square matrix of [re, im] entries")
    scale: Optional[float] = Field(default=None, gt=0.0, description="X = scale * I")
    dim: int = Field(default=2, ge=1, le=200)
    random_norm: Optional[float] = Field(
        default=None,
        gt=0.0,
        description="Random X with ||X|| = random_norm (< 1) or smallest singular value = random_norm (> 1)",
    )

    @model_validator(mode="after")
    def exactly_one_operator(self):
        given = [name for name in ("X", "scale", "random_norm") if getattr(self, name) is not None]
        if len(given) != 1:
            raise ValueError(f"exactly one of X, scale, random_norm is required (got {given or 'none'})")
        if self.X is not None and any(len(row) != len(self.X) for row in self.X):
            raise ValueError("X must be square")
        if self.random_norm == 1.0:
            raise ValueError("random_norm = 1 leaves both branches")
        return self


ExperimentConfig = Annotated[
    Union[
        FrameVerifyConfig,
        NaimarkConfig,
        SpectrumConfig,
        CCSpectrumConfig,
        CCLaddersConfig,
        PseudoBosonConfig,
        RieszPairsConfig,
    ],
    Field(discriminator="task"),
]

_ADAPTER = TypeAdapter(ExperimentConfig)


def _canonical(task: Any) -> Any:
    return TASK_ALIASES.get(task, task) if isinstance(task, str) else task


def _locate(text: str, loc: Tuple[Any, ...]) -> Optional[int]:
    """Best-effort line of the offending key: the last string in loc that appears as a JSON key."""
    for key in reversed([part for part in loc if isinstance(part, str)]):
        needle = f'"{key}"'
        for number, line in enumerate(text.splitlines(), start=1):
            if needle in line:
                return number
    return None


def parse_config(text: str, source: str = "<config>", task: Optional[str] = None):
    """
    Parse and validate a JSON experiment config.

    Args:
        text: JSON text
        source: Name used in error messages
        task: Expected task; filled in when the document omits it

    Raises:
        ConfigError: With line/column for JSON errors, field path for schema errors
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(source, f"column {e.colno}: {e.msg}", line=e.lineno) from e
    if not isinstance(data, dict):
        raise ConfigError(source, "top level must be a JSON object", line=1)

    if task is not None:
        data.setdefault("task", task)
        if _canonical(data["task"]) != _canonical(task):
            raise ConfigError(source, f"config task {data['task']!r} does not match command {task!r}", line=_locate(text, ("task",)))

    try:
        return _ADAPTER.validate_python(data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = tuple(part for part in first["loc"] if part not in TASKS)
        path = ".".join(str(part) for part in loc) or "$"
        raise ConfigError(source, f"{path}: {first['msg']}", line=_locate(text, loc)) from e


def load_config(path: Union[str, Path], task: Optional[str] = None):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(str(path), f"cannot read config ({e.strerror})") from e
    return parse_config(text, source=str(path), task=task)
