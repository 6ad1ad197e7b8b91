from typing import Dict, List, Optional, Tuple
from pydantic import BaseModel, Field
from .augment_schema import AugmentConfig, Disturbance, DisturbancePolicy
from .metrics_schema import MetricsReport, RunResult
from .network_schema import NetworkConfig


class TrainConfig(BaseModel):
    network: NetworkConfig = NetworkConfig()

    # Optimization
    initial_lr: float = Field(default=1e-5, gt=0.0)
    total_iters: int = Field(default=5000, ge=1)
    poly_power: float = Field(default=0.9, gt=0.0)
    clip_norm: float = Field(default=5.0, gt=0.0)
    betas: Tuple[float, float] = (0.9, 0.999)
    eps: float = Field(default=1e-8, gt=0.0)
    batch_size: int = Field(default=2, ge=1)

    # Data
    seed: int = 0
    augment_enabled: bool = True
    augment: AugmentConfig = AugmentConfig()
    prefetch: int = Field(default=0, ge=0, description="Loader queue depth, 0 loads in the training thread.")

    # Runs
    repetitions: int = Field(default=5, ge=1)
    # Repetition r trains with seed + r; False repeats the same seed R times.
    vary_seed: bool = True
    warm_start: Optional[str] = Field(default=None, description="Checkpoint whose backbone.* parameters seed the network.")
    log_every: int = Field(default=50, ge=1)


class TrainOutcome(BaseModel):
    seed: int
    checkpoint: str
    iterations: int
    final_loss: float
    losses: List[float]
    warm_started: List[str] = []


class TrainSummary(BaseModel):
    config: TrainConfig
    runs: List[TrainOutcome]
    result: RunResult


# ---------------------------------Evaluation---------------------------------------------
class EvalCondition(BaseModel):
    name: str
    disturbance: Optional[Disturbance] = None
    policy: DisturbancePolicy = DisturbancePolicy()


class EvalReport(BaseModel):
    checkpoint: str
    split: str
    condition: EvalCondition
    seed: int
    metrics: MetricsReport


class RainSweepReport(BaseModel):
    checkpoint: str
    split: str
    # Intensity ("clean", "light", "moderate", "heavy") -> metrics.
    metrics: Dict[str, MetricsReport]
    miou_course: Dict[str, float]


class ComparisonReport(BaseModel):
    # "<version>/<design>" -> condition name -> RunResult over the repetitions.
    results: Dict[str, Dict[str, RunResult]]
    conditions: List[str]
    repetitions: int


# ---------------------------------Benchmark---------------------------------------------
class BenchReport(BaseModel):
    designs: List[str]
    in_channels: int
    out_channels: int
    kernel: Tuple[int, int]
    extents: Tuple[int, int]
    repeats: int
    warmup: int
    timings_ms: Dict[str, List[float]]
    median_ms: Dict[str, float]
    # Designs sorted by median time, fastest first.
    ordering: List[str]
    time_ratios: Dict[str, float]
    formula_flops: Dict[str, int]
