import time
from typing import Dict, List, Sequence
import numpy as np
from pydantic import ValidationError
from tqdm import tqdm
from ..analyzer.flops import DESIGNS, unit_flops
from ..engine.tensor import Tensor
from ..models.cost_schema import UnitCostInputs
from ..models.errors import ConfigError
from ..models.network_schema import RecurrentUnitSpec
from ..models.train_schema import BenchReport
from ..nn.units import RecurrentUnit

MIN_REPEATS = 3


def time_unit(unit: RecurrentUnit, x: Tensor, repeats: int, warmup: int) -> List[float]:
    """
    Wall-clock milliseconds of `repeats` forward steps from a zero state, after
    `warmup` untimed steps.
    """

    batch, _, height, width = x.shape
    state = unit.zero_state(batch, height, width)
    for _ in range(warmup):
        unit.forward(x, state)
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        unit.forward(x, state)
        timings.append((time.perf_counter() - start) * 1000.0)
    return timings


def bench(
    designs: Sequence[str] = tuple(DESIGNS),
    I: int = 128,
    O: int = 128,
    Kx: int = 3,
    Ky: int = 3,
    Dx: int = 64,
    Dy: int = 64,
    repeats: int = 30,
    warmup: int = 2,
    seed: int = 0,
    quiet: bool = False,
) -> BenchReport:
    """
    Times one forward step of each unit design on a (1, I, Dy, Dx) input and
    reports medians next to the analytic FLOPs of the same inputs.
    """

    if repeats < MIN_REPEATS:
        raise ConfigError(f"Benchmarks need at least {MIN_REPEATS} repeats.", details=repeats)
    unknown = [design for design in designs if design not in DESIGNS]
    if unknown:
        raise ConfigError("Unknown unit design.", details=unknown)

    rng = np.random.default_rng(seed)
    x = Tensor(rng.uniform(-1.0, 1.0, size=(1, I, Dy, Dx)))
    inputs = UnitCostInputs(I=I, O=O, Kx=Kx, Ky=Ky, Dx=Dx, Dy=Dy)

    timings: Dict[str, List[float]] = {}
    for design in tqdm(designs, desc="Bench", disable=quiet):
        try:
            spec = RecurrentUnitSpec(design=design, in_channels=I, out_channels=O, kernel=(Kx, Ky))
        except ValidationError as e:
            raise ConfigError("Invalid unit for benchmarking.", details=e.errors(include_url=False)) from e
        unit = RecurrentUnit(spec, np.random.default_rng([seed, 1]), x.dtype)
        timings[design] = time_unit(unit, x, repeats, warmup)

    median = {design: float(np.median(values)) for design, values in timings.items()}
    reference = median.get("standard")
    return BenchReport(
        designs=list(designs),
        in_channels=I,
        out_channels=O,
        kernel=(Kx, Ky),
        extents=(Dx, Dy),
        repeats=repeats,
        warmup=warmup,
        timings_ms=timings,
        median_ms=median,
        ordering=sorted(median, key=median.get),
        time_ratios={design: value / reference for design, value in median.items()} if reference else {},
        formula_flops={design: unit_flops(design, inputs) for design in designs},
    )
