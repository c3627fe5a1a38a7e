"""
Bounded base functions for mollification experiments.
Each base knows its sup-norm bound and where it is not smooth, so
quadrature can split its domain there.
"""
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

import numpy as np

from ..errors import ArgumentError, CatalogError


@dataclass(frozen=True)
class BaseFunction:
    """g(t, x) evaluated on x[..., d]; returns (...)."""
    name: str
    dim_d: int
    bound: float
    breakpoints: Tuple[Tuple[float, ...], ...] = field(default=())  # per coordinate
    time_homogeneous: bool = True

    def __call__(self, t, x):
        raise NotImplementedError

    def coordinate_breakpoints(self, axis: int) -> Tuple[float, ...]:
        if not self.breakpoints:
            return ()
        return self.breakpoints[axis]


@dataclass(frozen=True)
class StepBase(BaseFunction):
    """1_{(-inf, threshold]}(x_1)."""
    threshold: float = 0.0

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        return np.where(x[..., 0] <= self.threshold, 1.0, 0.0)


@dataclass(frozen=True)
class RampBase(BaseFunction):
    """1 ^ (0 v (1 - x_1)): monotone, Lipschitz."""

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        return np.clip(1.0 - x[..., 0], 0.0, 1.0)


@dataclass(frozen=True)
class LipschitzBase(BaseFunction):
    """|x| ^ 1."""

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        return np.minimum(np.linalg.norm(x, axis=-1), 1.0)


@dataclass(frozen=True)
class IntervalBase(BaseFunction):
    """1_{a < x_1 < b}."""
    low: float = 0.0
    high: float = 1.0

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)[..., 0]
        return np.where((x > self.low) & (x < self.high), 1.0, 0.0)


@dataclass(frozen=True)
class ConstantBase(BaseFunction):
    value: float = 1.0

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], self.value)


@dataclass(frozen=True)
class CoordinateStepBase(BaseFunction):
    """1_{x_axis <= 0} on R^d."""
    axis: int = 0

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        return np.where(x[..., self.axis] <= 0.0, 1.0, 0.0)


@dataclass(frozen=True)
class CallableBase(BaseFunction):
    """Wraps a plain callable g(t, x) with no known breakpoints."""
    func: Callable = None

    def __call__(self, t, x):
        return np.asarray(self.func(t, x), dtype=float)


@dataclass(frozen=True)
class ProductBase(BaseFunction):
    left: BaseFunction = None
    right: BaseFunction = None

    def __call__(self, t, x):
        return self.left(t, x) * self.right(t, x)


@dataclass(frozen=True)
class LinearBase(BaseFunction):
    left: BaseFunction = None
    right: BaseFunction = None
    alpha: float = 1.0
    beta: float = 1.0

    def __call__(self, t, x):
        return self.alpha * self.left(t, x) + self.beta * self.right(t, x)


def merge_breakpoints(first: BaseFunction, second: BaseFunction) -> Tuple[Tuple[float, ...], ...]:
    return tuple(
        tuple(sorted(set(first.coordinate_breakpoints(axis)) | set(second.coordinate_breakpoints(axis))))
        for axis in range(first.dim_d)
    )


def _one_dimensional(name: str, dim_d: int, first_axis: Tuple[float, ...]) -> Tuple[Tuple[float, ...], ...]:
    if dim_d < 1:
        raise ArgumentError(f"{name} needs a positive dimension")
    return (first_axis,) + ((),) * (dim_d - 1)


def step(dim_d: int = 1) -> BaseFunction:
    return StepBase("step", dim_d, 1.0, _one_dimensional("step", dim_d, (0.0,)))


def ramp(dim_d: int = 1) -> BaseFunction:
    return RampBase("ramp", dim_d, 1.0, _one_dimensional("ramp", dim_d, (0.0, 1.0)))


def lipschitz(dim_d: int = 1) -> BaseFunction:
    # the cone at 0 and the unit sphere, through their coordinate extents
    return LipschitzBase("lipschitz", dim_d, 1.0, tuple((-1.0, 0.0, 1.0) for _ in range(dim_d)))


def interval(low: float, high: float, dim_d: int = 1) -> BaseFunction:
    if not low < high:
        raise ArgumentError("interval needs low < high")
    return IntervalBase(f"interval({low!r},{high!r})", dim_d, 1.0,
                        _one_dimensional("interval", dim_d, (low, high)), low=low, high=high)


def constant(value: float = 1.0, dim_d: int = 1) -> BaseFunction:
    return ConstantBase(f"constant({value!r})", dim_d, abs(value), tuple(() for _ in range(dim_d)), value=value)


def coordinate_step(axis: int, dim_d: int) -> BaseFunction:
    if not 0 <= axis < dim_d:
        raise ArgumentError("axis out of range")
    points = tuple((0.0,) if i == axis else () for i in range(dim_d))
    return CoordinateStepBase(f"coordinate_step({axis})", dim_d, 1.0, points, axis=axis)


def product(first: BaseFunction, second: BaseFunction) -> BaseFunction:
    if first.dim_d != second.dim_d:
        raise ArgumentError("dimension mismatch")
    return ProductBase(
        f"({first.name})*({second.name})", first.dim_d, first.bound * second.bound,
        merge_breakpoints(first, second),
        first.time_homogeneous and second.time_homogeneous,
        left=first, right=second,
    )


def linear(first: BaseFunction, second: BaseFunction, alpha: float, beta: float) -> BaseFunction:
    if first.dim_d != second.dim_d:
        raise ArgumentError("dimension mismatch")
    return LinearBase(
        f"{alpha!r}*({first.name})+{beta!r}*({second.name})", first.dim_d,
        abs(alpha) * first.bound + abs(beta) * second.bound,
        merge_breakpoints(first, second),
        first.time_homogeneous and second.time_homogeneous,
        left=first, right=second, alpha=alpha, beta=beta,
    )


BASE_CATALOG: Dict[str, Callable[[], BaseFunction]] = {
    "step": step,
    "ramp": ramp,
    "lipschitz": lipschitz,
    "constant": constant,
    "step_2d": lambda: product(coordinate_step(0, 2), coordinate_step(1, 2)),
}

_INTERVAL = re.compile(r"^interval\(\s*([-+.\deE]+)\s*,\s*([-+.\deE]+)\s*\)$")


def build_base(name: str) -> BaseFunction:
    """Look up a base by name; also accepts 'interval(a,b)'."""
    key = name.strip()
    if key in BASE_CATALOG:
        return BASE_CATALOG[key]()
    match = _INTERVAL.match(key)
    if match:
        return interval(float(match.group(1)), float(match.group(2)))
    raise CatalogError(name, list(BASE_CATALOG) + ["interval(<a>,<b>)"])
