from typing import Dict, List, Optional
from pydantic import BaseModel, ConfigDict, Field


class FlickerReport(BaseModel):
    pair_fractions: List[float] = Field(
        description="Fraction of pixels whose predicted class changed, per consecutive frame pair."
    )
    mfip_percent: float = Field(description="Mean of pair_fractions, in percent.")
    pair_count: int


class MetricsReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    accuracy: float
    miou: float = Field(alias="mIoU")
    # None marks classes absent from both ground truth and prediction.
    per_class_iou: List[Optional[float]]
    mfip_percent: Optional[float] = Field(default=None, alias="mFIP_percent")
    sequences: int = 0


class RunResult(BaseModel):
    repetitions: int
    per_repetition: List[MetricsReport]
    mean: Dict[str, float]
    std: Dict[str, float]
