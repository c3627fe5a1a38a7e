"""
Run configuration: pydantic models per subcommand and the flat INI
document they are read from and written to.

    [run]
    subcommand = rate
    problem = sign_drift
    seed = 42

    [rate]
    n_list = 16, 32, 64, 128, 256, 512, 1024
    paths = 10000

Lists are comma-separated; an empty value means "not set" for optional keys.
Every key has a documented default, so a [run] section alone is a complete document.
"""
import configparser
import difflib
import io
import math
import typing
from typing import Dict, List, Literal, Optional, Tuple, Type

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .data.models import StoppingTimeSpec, level_of
from .data.presets import build_preset
from .errors import ConfigError

SUBCOMMANDS = (
    "rate", "schemes", "density", "jump-integral", "increments",
    "yw", "mollify", "komatsu", "verify",
)
U64_MAX = 2 ** 64 - 1
RUN_SECTION = "run"


def _powers_of_two(values: List[int]) -> List[int]:
    for n in values:
        level_of(n)
    return values


class _Params(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class RateParams(_Params):
    """Strong-error rate experiment."""
    n_list: List[int] = Field(default_factory=lambda: [2 ** k for k in range(4, 11)],
                              description="coarse step counts, powers of 2")
    ref_level: int = Field(14, ge=1, le=30, description="reference grid 2^ref_level")
    paths: int = Field(10_000, ge=2)
    p: float = Field(1.0, ge=1.0, le=8.0, description="moment order for sup_p")
    norm: Literal["terminal_stopping", "sup", "sup_p"] = "sup"
    scheme: Literal["standard", "polygonal", "mixed"] = "standard"
    taus: List[str] = Field(default_factory=lambda: ["horizon"],
                            description="horizon, deterministic(t) or first_exit(r)")
    block_size: int = Field(256, ge=1)
    budget: float = Field(4e9, gt=0, description="cap on paths * 2^L * d")
    slope_lower: Optional[float] = None
    slope_upper: Optional[float] = None
    sensitivity_levels: int = Field(0, ge=0, le=4, description="also refine the reference by this many levels")

    @field_validator("n_list")
    @classmethod
    def _check_n_list(cls, values):
        if len(set(values)) < 3:
            raise ValueError("n_list needs at least 3 distinct entries")
        return _powers_of_two(values)

    @field_validator("taus")
    @classmethod
    def _check_taus(cls, values):
        if not values:
            raise ValueError("taus must not be empty")
        for text in values:
            StoppingTimeSpec.parse(text)
        return values

    @model_validator(mode="after")
    def _check_reference(self):
        if 2 ** self.ref_level <= max(self.n_list):
            raise ValueError(f"2^ref_level must exceed max n = {max(self.n_list)}")
        return self


class SchemesParams(RateParams):
    """Rate experiment repeated for several schemes on the same paths."""
    schemes: List[Literal["standard", "polygonal", "mixed"]] = Field(
        default_factory=lambda: ["standard", "polygonal", "mixed"]
    )


class DensityParams(_Params):
    """Histogram of X_t against Gaussian envelopes."""
    n: int = 16
    t_index: int = Field(16, description="t = t_index * T / n, 1 <= t_index <= n")
    paths: int = Field(20_000, ge=10_000)
    C: float = Field(1.0, gt=0)
    c: float = Field(1.0, gt=0)
    ci_z: float = Field(3.0, gt=0)
    calibrate: bool = Field(False, description="fit (C, c) on `seed`, check on `seed + 1`")
    calibration_paths: int = Field(100_000, ge=10_000)
    margin: float = Field(1.25, ge=1.0)

    @field_validator("n")
    @classmethod
    def _check_n(cls, value):
        level_of(value)
        return value

    @model_validator(mode="after")
    def _check_index(self):
        if self.t_index == 0:
            raise ValueError("t_index = 0 is the initial point mass")
        if not 1 <= self.t_index <= self.n:
            raise ValueError(f"t_index must lie in [1, {self.n}]")
        return self


class JumpIntegralParams(_Params):
    """Discontinuity integral across step counts."""
    n_list: List[int] = Field(default_factory=lambda: [2 ** k for k in range(4, 11)])
    q: float = Field(1.0, ge=1.0)
    paths: int = Field(10_000, ge=2)
    block_size: int = Field(1024, ge=1)

    @field_validator("n_list")
    @classmethod
    def _check_n_list(cls, values):
        if not values:
            raise ValueError("n_list must not be empty")
        return _powers_of_two(values)


class IncrementsParams(JumpIntegralParams):
    """Moments of X_t - X_eta(t)."""
    n_list: List[int] = Field(default_factory=lambda: [16, 64, 256])
    q: float = Field(2.0, gt=0)


class YWParams(_Params):
    """Yamada-Watanabe property checks for (delta, eps) pairs."""
    deltas: List[float] = Field(default_factory=lambda: [2.0, 2.0, 2.0 ** (10.0 / 3.0)])
    eps: List[float] = Field(default_factory=lambda: [0.25, 2.0 ** -5, 1.0 / math.log(2.0 ** 10)])
    grid_points: int = Field(10_000, ge=10)
    samples: bool = Field(True, description="also write yw_samples.csv")

    @model_validator(mode="after")
    def _check_pairs(self):
        if len(self.deltas) != len(self.eps) or not self.deltas:
            raise ValueError("deltas and eps must be nonempty lists of the same length")
        for delta, eps in zip(self.deltas, self.eps):
            if not delta > 1 or not 0 < eps < 1:
                raise ValueError(f"need delta > 1 and 0 < eps < 1, got ({delta}, {eps})")
        return self


class MollifyParams(_Params):
    """Class conditions, and optionally Monte Carlo convergence along scheme paths."""
    base: str = "step"
    L: float = Field(2.0, gt=0)
    N_list: List[int] = Field(default_factory=lambda: [4, 8, 16, 32, 64])
    a_list: List[float] = Field(default_factory=lambda: [0.0, 1.0, -1.0, 5.0, -5.0])
    u_list: List[float] = Field(default_factory=lambda: [1e-2, 1e-1, 1.0, 10.0, 100.0])
    convergence: bool = False
    jump_limit: bool = False
    n: int = 64
    kappa: float = Field(0.1, gt=0)
    paths: int = Field(10_000, ge=2)

    @field_validator("N_list")
    @classmethod
    def _check_N_list(cls, values):
        if not values or any(b <= a for a, b in zip(values, values[1:])) or values[0] < 1:
            raise ValueError("N_list must be a nonempty increasing list of positive integers")
        return values

    @field_validator("u_list")
    @classmethod
    def _check_u(cls, values):
        if not values or min(values) <= 0:
            raise ValueError("u_list must be nonempty and positive")
        return values

    @field_validator("n")
    @classmethod
    def _check_n(cls, value):
        level_of(value)
        return value


class KomatsuParams(_Params):
    """Komatsu's Gaussian tail bound on a log-spaced grid."""
    points: int = Field(10_000, ge=1)
    x_max: float = Field(20.0, gt=0)


class VerifyParams(_Params):
    """Random spot checks of the coefficient assumptions."""
    samples: int = Field(10_000, ge=1)


SECTION_MODELS: Dict[str, Type[_Params]] = {
    "rate": RateParams,
    "schemes": SchemesParams,
    "density": DensityParams,
    "jump-integral": JumpIntegralParams,
    "increments": IncrementsParams,
    "yw": YWParams,
    "mollify": MollifyParams,
    "komatsu": KomatsuParams,
    "verify": VerifyParams,
}


def _attribute(section: str) -> str:
    return section.replace("-", "_")


class RunConfig(BaseModel):
    """The [run] section plus parameters for every subcommand (defaults where absent)."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    subcommand: Literal[
        "rate", "schemes", "density", "jump-integral", "increments",
        "yw", "mollify", "komatsu", "verify",
    ]
    problem: str = "sign_drift"
    seed: int = Field(0, ge=0, le=U64_MAX)
    workers: int = Field(1, ge=1)
    output_dir: str = "out"
    format: Literal["csv", "json", "both"] = "both"

    rate: RateParams = Field(default_factory=RateParams)
    schemes: SchemesParams = Field(default_factory=SchemesParams)
    density: DensityParams = Field(default_factory=DensityParams)
    jump_integral: JumpIntegralParams = Field(default_factory=JumpIntegralParams)
    increments: IncrementsParams = Field(default_factory=IncrementsParams)
    yw: YWParams = Field(default_factory=YWParams)
    mollify: MollifyParams = Field(default_factory=MollifyParams)
    komatsu: KomatsuParams = Field(default_factory=KomatsuParams)
    verify: VerifyParams = Field(default_factory=VerifyParams)

    @field_validator("problem")
    @classmethod
    def _check_problem(cls, value):
        build_preset(value)
        return value

    @property
    def params(self) -> _Params:
        """Parameters of the selected subcommand."""
        return getattr(self, _attribute(self.subcommand))


RUN_KEYS = ("subcommand", "problem", "seed", "workers", "output_dir", "format")


def _is_list(model: Type[BaseModel], key: str) -> bool:
    annotation = model.model_fields[key].annotation
    return typing.get_origin(annotation) in (list, List)


def _nearest(key: str, valid) -> str:
    match = difflib.get_close_matches(key, list(valid), n=1, cutoff=0.0)
    return match[0] if match else ""


def _section_values(model: Type[BaseModel], section: str, items, valid_keys) -> Dict:
    values = {}
    for key, raw in items:
        if key not in valid_keys:
            raise ConfigError(
                f"Unknown key '{key}' in [{section}]; nearest valid key is '{_nearest(key, valid_keys)}'"
            )
        raw = raw.strip()
        if _is_list(model, key):
            values[key] = [part.strip() for part in raw.split(",") if part.strip()]
        elif raw == "":
            values[key] = None
        else:
            values[key] = raw
    return values


def _first_message(error: ValidationError) -> str:
    details = error.errors()[0]
    location = ".".join(str(part) for part in details.get("loc", ()))
    message = details.get("msg", str(error))
    return f"{location}: {message}" if location else message


def build_config(run: Dict, sections: Optional[Dict[str, Dict]] = None) -> RunConfig:
    """Validate plain values into a RunConfig; pydantic errors become ConfigError."""
    payload = dict(run)
    for section, values in (sections or {}).items():
        payload[_attribute(section)] = values
    try:
        return RunConfig(**payload)
    except ValidationError as exc:
        raise ConfigError(f"Invalid configuration: {_first_message(exc)}") from exc


def parse_config(text: str) -> RunConfig:
    """Parse an INI document into a validated RunConfig."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"Malformed configuration document: {exc}") from exc

    valid_sections = (RUN_SECTION,) + SUBCOMMANDS
    for section in parser.sections():
        if section not in valid_sections:
            raise ConfigError(
                f"Unknown section '[{section}]'; nearest valid section is '[{_nearest(section, valid_sections)}]'"
            )
    if not parser.has_section(RUN_SECTION):
        raise ConfigError("Configuration needs a [run] section")

    run = {}
    for key, raw in parser.items(RUN_SECTION):
        if key not in RUN_KEYS:
            raise ConfigError(
                f"Unknown key '{key}' in [run]; nearest valid key is '{_nearest(key, RUN_KEYS)}'"
            )
        run[key] = raw.strip()
    sections = {
        name: _section_values(
            SECTION_MODELS[name], name, parser.items(name), SECTION_MODELS[name].model_fields,
        )
        for name in SUBCOMMANDS
        if parser.has_section(name)
    }
    return build_config(run, sections)


def _render(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(_render(item) for item in value)
    return str(value)


def serialize_config(cfg: RunConfig, all_sections: bool = False) -> str:
    """Write the [run] section and the active subcommand's section (or all)."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser[RUN_SECTION] = {key: _render(getattr(cfg, key)) for key in RUN_KEYS}
    for section in SUBCOMMANDS:
        if all_sections or section == cfg.subcommand:
            params = getattr(cfg, _attribute(section))
            parser[section] = {key: _render(getattr(params, key)) for key in type(params).model_fields}
    buffer = io.StringIO()
    parser.write(buffer)
    return buffer.getvalue()


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Apply CLI flags (None means not given) and revalidate."""
    changes = {key: value for key, value in overrides.items() if value is not None}
    if not changes:
        return cfg
    data = cfg.model_dump()
    data.update(changes)
    try:
        return RunConfig(**data)
    except ValidationError as exc:
        raise ConfigError(f"Invalid override: {_first_message(exc)}") from exc


def stopping_times(params: RateParams) -> Tuple[StoppingTimeSpec, ...]:
    return tuple(StoppingTimeSpec.parse(text) for text in params.taus)
