from typing import Annotated, List, Literal, Optional, Tuple, Union
from pydantic import BaseModel, Field

RainLevel = Literal["light", "moderate", "heavy"]


class RainParams(BaseModel):
    n_lines: int = Field(ge=0)
    line_length: int = Field(ge=1)
    # One slant per image. None draws it uniformly from slant_range.
    slant_deg: Optional[float] = None
    slant_range: Tuple[float, float] = (60.0, 120.0)
    brightness_factor: float = Field(default=0.7, gt=0.0, le=1.0)
    streak_value: float = Field(default=0.9, ge=0.0, le=1.0)
    seed: int = 0


# ---------------------------------Disturbances---------------------------------------------
class RainDisturbance(BaseModel):
    kind: Literal["rain"] = "rain"
    params: RainParams


class GaussianNoise(BaseModel):
    kind: Literal["gaussian"] = "gaussian"
    sigma: float = Field(default=0.05, ge=0.0)


class SaltPepperNoise(BaseModel):
    kind: Literal["salt_pepper"] = "salt_pepper"
    p: float = Field(default=0.02, ge=0.0, le=1.0)


class PolygonDisturbance(BaseModel):
    kind: Literal["polygon"] = "polygon"
    max_vertices: int = Field(default=8, ge=3)
    max_extent_fraction: float = Field(default=0.2, gt=0.0, le=1.0)


class BrightnessDisturbance(BaseModel):
    kind: Literal["brightness"] = "brightness"
    low: float = Field(default=0.5, gt=0.0, le=1.0)
    high: float = Field(default=1.0, gt=0.0, le=1.0)


class FlipDisturbance(BaseModel):
    kind: Literal["hflip"] = "hflip"


class ScaleDisturbance(BaseModel):
    kind: Literal["scale"] = "scale"
    low: float = Field(default=0.75, gt=0.0)
    high: float = Field(default=1.25, gt=0.0)


Disturbance = Annotated[
    Union[
        RainDisturbance,
        GaussianNoise,
        SaltPepperNoise,
        PolygonDisturbance,
        BrightnessDisturbance,
        FlipDisturbance,
        ScaleDisturbance,
    ],
    Field(discriminator="kind"),
]

GEOMETRIC_KINDS = ("hflip", "scale")


class DisturbancePolicy(BaseModel):
    mode: Literal["last_frame_only", "all_frames", "random_subset"] = "last_frame_only"
    # Per-frame probability for random_subset.
    p: float = Field(default=0.5, ge=0.0, le=1.0)


class AugmentConfig(BaseModel):
    flip: bool = True
    scale: bool = True
    scale_range: Tuple[float, float] = (0.75, 1.25)
    # Chance that a sample receives one photometric disturbance.
    disturbance_prob: float = Field(default=0.5, ge=0.0, le=1.0)
    disturbances: List[Literal["gaussian", "salt_pepper", "polygon", "brightness"]] = [
        "gaussian",
        "salt_pepper",
        "polygon",
        "brightness",
    ]


class PerturbSidecar(BaseModel):
    source: str
    disturbance: Disturbance
    policy: DisturbancePolicy
    seed: int
    splits: List[str]
