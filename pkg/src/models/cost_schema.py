from typing import Dict, List
from pydantic import BaseModel, Field


# Symbols of the unit cost formulas. D_x x D_y is the feature-map size, K_x x K_y the kernel.
class UnitCostInputs(BaseModel):
    I: int
    O: int
    Kx: int = 3
    Ky: int = 3
    Dx: int = 1
    Dy: int = 1


class UnitCostReport(BaseModel):
    inputs: UnitCostInputs
    standard: int
    fast: int
    faster: int
    ratios: Dict[str, float] = Field(
        description="Cheaper-to-costlier ratios: faster/standard, faster/fast, fast/standard."
    )
    percent: Dict[str, str] = Field(description="The same ratios as percentages rounded to two decimals.")


class PlacementCost(BaseModel):
    placement: str
    in_channels: int
    out_channels: int
    kernel: int
    dx: int
    dy: int
    flops: int


class CostReport(BaseModel):
    version: str
    unit_design: str
    placements: List[PlacementCost]
    recurrent_flops: int
    backbone_flops: int
    total_flops: int
    # "<version>/<design>" -> recurrent + backbone FLOPs for every buildable variant.
    variant_totals: Dict[str, int]
    variant_recurrent: Dict[str, int]
    # Recurrent-part ratios of this version across designs.
    design_ratios: Dict[str, float]
    # total(base) / total(this variant), in (0, 1].
    base_ratio: float
