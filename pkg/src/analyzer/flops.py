from typing import Dict, List, Optional
from pydantic import ValidationError
from ..models.cost_schema import CostReport, PlacementCost, UnitCostInputs, UnitCostReport
from ..models.errors import CostModelError
from ..models.network_schema import NetworkConfig, UnitDesign, VERSION_PLACEMENTS

# Element-wise FLOPs per output element of a convLSTM cell, taken as given.
ELEMENTWISE_FLOPS = 37

DESIGNS: List[UnitDesign] = ["standard", "fast", "faster"]


def _validate(c: UnitCostInputs, needs_even_o: bool = False) -> None:
    values = {"I": c.I, "O": c.O, "Kx": c.Kx, "Ky": c.Ky, "Dx": c.Dx, "Dy": c.Dy}
    bad = {name: value for name, value in values.items() if value <= 0}
    if bad:
        raise CostModelError("Cost inputs must be positive integers.", details=bad)
    if needs_even_o and c.O % 2:
        raise CostModelError("The fast and faster formulas need an even O.", details=c.O)


def flops_standard_unit(c: UnitCostInputs) -> int:
    """
    (16 * Kx * Ky * I + 37) * O * Dx * Dy
    """

    _validate(c)
    return (16 * c.Kx * c.Ky * c.I + ELEMENTWISE_FLOPS) * c.O * c.Dx * c.Dy


def flops_fast_unit(c: UnitCostInputs) -> int:
    """
    ((16 * Kx * Ky * I + 37) * O/2 + 2 * I * O/2) * Dx * Dy
    """

    _validate(c, needs_even_o=True)
    half = c.O // 2
    return ((16 * c.Kx * c.Ky * c.I + ELEMENTWISE_FLOPS) * half + 2 * c.I * half) * c.Dx * c.Dy


def flops_faster_unit(c: UnitCostInputs) -> int:
    """
    ((2 * I + 16 * Kx * Ky + 37) * O/2 + 2 * I * O/2) * Dx * Dy
    """

    _validate(c, needs_even_o=True)
    half = c.O // 2
    return ((2 * c.I + 16 * c.Kx * c.Ky + ELEMENTWISE_FLOPS) * half + 2 * c.I * half) * c.Dx * c.Dy


UNIT_FLOPS = {
    "standard": flops_standard_unit,
    "fast": flops_fast_unit,
    "faster": flops_faster_unit,
}


def unit_flops(design: UnitDesign, c: UnitCostInputs) -> int:
    return UNIT_FLOPS[design](c)


def formula_conv_flops(design: UnitDesign, c: UnitCostInputs) -> int:
    """
    The convolution terms of the unit formulas, i.e. everything except the
    element-wise constant.
    """

    _validate(c, needs_even_o=design != "standard")
    k, area, half = c.Kx * c.Ky, c.Dx * c.Dy, c.O // 2
    if design == "standard":
        return 16 * k * c.I * c.O * area
    if design == "fast":
        return (16 * k * c.I * half + 2 * c.I * half) * area
    return (2 * c.I * half + 16 * k * half + 2 * c.I * half) * area


def cell_conv_flops(design: UnitDesign, c: UnitCostInputs) -> int:
    """
    Convolution FLOPs (2 per MAC) the implemented units actually execute.

    Four gate convs read x and four read the hidden map h. For the fast unit h
    has O/2 channels, whereas the fast formula charges its hidden-state convs
    at I input channels; the two agree for the standard and faster units.
    """

    _validate(c, needs_even_o=design != "standard")
    k, area, half = c.Kx * c.Ky, c.Dx * c.Dy, c.O // 2
    if design == "standard":
        macs = 4 * c.O * k * (c.I + c.O)
    elif design == "fast":
        macs = 4 * half * k * (c.I + half) + c.I * half
    else:
        macs = c.I * half + 8 * k * half + c.I * half
    return 2 * macs * area


def unit_cost_report(c: UnitCostInputs) -> UnitCostReport:
    """
    Evaluates the three unit formulas for one set of inputs and the ratios between them.
    """

    standard, fast, faster = flops_standard_unit(c), flops_fast_unit(c), flops_faster_unit(c)
    ratios = {
        "faster/standard": faster / standard,
        "faster/fast": faster / fast,
        "fast/standard": fast / standard,
    }
    return UnitCostReport(
        inputs=c,
        standard=standard,
        fast=fast,
        faster=faster,
        ratios=ratios,
        percent={name: f"{100 * value:.2f}%" for name, value in ratios.items()},
    )


def backbone_flops(config: NetworkConfig) -> int:
    """
    Analytic conv FLOPs (2 per MAC) of one backbone forward pass at batch size one.
    """

    k = config.kernel_size * config.kernel_size
    widths = config.branch_widths
    extents = [
        config.height * config.width,
        (config.height // 2) * (config.width // 2),
        (config.height // 4) * (config.width // 4),
    ]

    macs = 0
    for depth, width, area in zip(config.branch_depths, widths, extents):
        macs += 3 * width * k * area
        macs += (depth - 1) * width * width * k * area

    high, mid, low = widths
    macs += (low * mid + mid * mid) * extents[1]
    macs += (mid * high + high * high) * extents[0]
    macs += high * config.num_classes * extents[0]
    return 2 * macs


def placement_costs(config: NetworkConfig, design: UnitDesign) -> List[PlacementCost]:
    costs: List[PlacementCost] = []
    for placement in config.placements:
        channels, height, width = config.placement_geometry(placement)
        inputs = UnitCostInputs(
            I=channels, O=channels, Kx=config.kernel_size, Ky=config.kernel_size, Dx=width, Dy=height
        )
        costs.append(
            PlacementCost(
                placement=placement,
                in_channels=channels,
                out_channels=channels,
                kernel=config.kernel_size,
                dx=width,
                dy=height,
                flops=unit_flops(design, inputs),
            )
        )
    return costs


def _variant(config: NetworkConfig, version: str, design: str) -> Optional[NetworkConfig]:
    try:
        return NetworkConfig.model_validate(
            config.model_dump() | {"version": version, "unit_design": design}
        )
    except ValidationError:
        # e.g. fast/faster at an odd width
        return None


def network_cost_report(config: NetworkConfig) -> CostReport:
    """
    Sums the unit formulas over the placements of `config.version` at their
    feature-map sizes, adds the backbone conv FLOPs, and compares against every
    other buildable version/design at the same widths.

    Args:
        - config: A validated network config.

    Returns:
        A CostReport. Base has zero recurrent FLOPs.
    """

    backbone = backbone_flops(config)
    placements = placement_costs(config, config.unit_design)
    recurrent = sum(cost.flops for cost in placements)

    variant_recurrent: Dict[str, int] = {}
    for version in VERSION_PLACEMENTS:
        for design in DESIGNS:
            variant = _variant(config, version, design)
            if variant is None:
                continue
            variant_recurrent[f"{version}/{design}"] = sum(
                cost.flops for cost in placement_costs(variant, design)
            )

    design_ratios: Dict[str, float] = {}
    if config.placements:
        by_design = {
            design: variant_recurrent.get(f"{config.version}/{design}") for design in DESIGNS
        }
        pairs = (("faster", "standard"), ("faster", "fast"), ("fast", "standard"))
        for cheap, costly in pairs:
            if by_design[cheap] is not None and by_design[costly]:
                design_ratios[f"{cheap}/{costly}"] = by_design[cheap] / by_design[costly]

    total = backbone + recurrent
    return CostReport(
        version=config.version,
        unit_design=config.unit_design,
        placements=placements,
        recurrent_flops=recurrent,
        backbone_flops=backbone,
        total_flops=total,
        variant_totals={name: backbone + flops for name, flops in variant_recurrent.items()},
        variant_recurrent=variant_recurrent,
        design_ratios=design_ratios,
        base_ratio=backbone / total,
    )
