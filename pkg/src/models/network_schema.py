import hashlib
from typing import Dict, List, Literal, Tuple
from pydantic import BaseModel, Field, model_validator

UnitDesign = Literal["standard", "fast", "faster"]
NetworkVersion = Literal["base", "v2", "v5", "v6"]
Precision = Literal["float64", "float32"]

# Placement ids of the recurrent units. Branch units sit at the end of each
# resolution branch, the head unit directly before the softmax.
BRANCH_PLACEMENTS: Tuple[str, ...] = ("branch_high", "branch_mid", "branch_low")
HEAD_PLACEMENT = "head"

VERSION_PLACEMENTS: Dict[str, Tuple[str, ...]] = {
    "base": (),
    "v2": (HEAD_PLACEMENT,),
    "v5": BRANCH_PLACEMENTS,
    "v6": BRANCH_PLACEMENTS + (HEAD_PLACEMENT,),
}


# ---------------------------------Recurrent units---------------------------------------------
class RecurrentUnitSpec(BaseModel):
    design: UnitDesign = "standard"
    in_channels: int = Field(ge=1)
    out_channels: int = Field(ge=1)
    # (Kx, Ky): width extent first.
    kernel: Tuple[int, int] = (3, 3)

    @model_validator(mode="after")
    def check_channels(self) -> "RecurrentUnitSpec":
        # Every design maps I channels back to I channels.
        if self.out_channels != self.in_channels:
            raise ValueError("recurrent units require out_channels == in_channels")
        if self.design != "standard" and self.in_channels % 2:
            raise ValueError(f"the {self.design} design needs an even channel count")
        if self.kernel[0] % 2 == 0 or self.kernel[1] % 2 == 0:
            raise ValueError("kernel extents must be odd")
        return self

    @property
    def state_channels(self) -> int:
        return self.in_channels if self.design == "standard" else self.in_channels // 2


# ---------------------------------Network---------------------------------------------
class NetworkConfig(BaseModel):
    num_classes: int = Field(default=8, ge=2)
    base_channels: int = Field(default=16, ge=1)
    # Number of 3x3 conv layers in the full, 1/2 and 1/4 resolution branches.
    branch_depths: Tuple[int, int, int] = (1, 2, 3)
    version: NetworkVersion = "base"
    unit_design: UnitDesign = "standard"
    kernel_size: int = Field(default=3, ge=1)
    height: int = Field(default=64, ge=4)
    width: int = Field(default=128, ge=4)
    precision: Precision = "float32"

    @model_validator(mode="after")
    def check_geometry(self) -> "NetworkConfig":
        if self.height % 4 or self.width % 4:
            raise ValueError("input height and width must be divisible by 4")
        if self.kernel_size % 2 == 0:
            raise ValueError("kernel_size must be odd")
        if any(depth < 1 for depth in self.branch_depths):
            raise ValueError("every branch needs at least one conv layer")
        # Fast/Faster units halve their input width, so every placed unit's width must be even.
        if self.unit_design != "standard":
            for placement in self.placements:
                channels, _, _ = self.placement_geometry(placement)
                if channels % 2:
                    raise ValueError(
                        f"{self.unit_design} units need even widths, placement '{placement}' has {channels}"
                    )
        return self

    @property
    def branch_widths(self) -> Tuple[int, int, int]:
        return (self.base_channels, 2 * self.base_channels, 4 * self.base_channels)

    @property
    def placements(self) -> Tuple[str, ...]:
        return VERSION_PLACEMENTS[self.version]

    def placement_geometry(self, placement: str) -> Tuple[int, int, int]:
        """
        Returns (channels, height, width) of the feature map a recurrent unit sees at `placement`.
        """

        high, mid, low = self.branch_widths
        geometry = {
            "branch_high": (high, self.height, self.width),
            "branch_mid": (mid, self.height // 2, self.width // 2),
            "branch_low": (low, self.height // 4, self.width // 4),
            HEAD_PLACEMENT: (self.num_classes, self.height, self.width),
        }
        return geometry[placement]

    def unit_spec(self, placement: str) -> RecurrentUnitSpec:
        channels, _, _ = self.placement_geometry(placement)
        return RecurrentUnitSpec(
            design=self.unit_design,
            in_channels=channels,
            out_channels=channels,
            kernel=(self.kernel_size, self.kernel_size),
        )

    def config_hash(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()


class ParameterSummary(BaseModel):
    total: int
    backbone: int
    recurrent: int
    per_placement: Dict[str, int]
    names: List[str]
