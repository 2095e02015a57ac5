"""JSON documents accepted by the command line."""

import json
from pathlib import Path
from typing import TypeVar

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .channel_model import ChannelSpec, ImpulseResponse, NoiseModel
from .rate_region import Allocation, Weights, check_weights

DocumentT = TypeVar("DocumentT", bound=BaseModel)
WeightRow = tuple[float, float, float]


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class NoiseDocument(_Document):
    """{"autocorr": [R0, R1, ...]}"""

    autocorr: list[float] = Field(min_length=1)


class ChannelSpecDocument(_Document):
    """Schema of a channel spec file."""

    h11: list[float] = Field(min_length=1)
    h12: list[float] = Field(min_length=1)
    h21: list[float] = Field(min_length=1)
    h22: list[float] = Field(min_length=1)
    noise1: NoiseDocument = NoiseDocument(autocorr=[1.0])
    noise2: NoiseDocument = NoiseDocument(autocorr=[1.0])
    p1: float = 1.0
    p2: float = 1.0

    def to_spec(self) -> ChannelSpec:
        """The unvalidated domain spec; call validate_spec on it."""
        return ChannelSpec(
            ImpulseResponse(tuple(self.h11)),
            ImpulseResponse(tuple(self.h12)),
            ImpulseResponse(tuple(self.h21)),
            ImpulseResponse(tuple(self.h22)),
            NoiseModel(tuple(self.noise1.autocorr)),
            NoiseModel(tuple(self.noise2.autocorr)),
            self.p1,
            self.p2,
        )


class AllocationDocument(_Document):
    """Schema of an allocation file."""

    n: int = Field(gt=0)
    p1: list[float]
    p2: list[float]
    a1: list[float]
    a2: list[float]

    def to_allocation(self) -> Allocation:
        """The domain allocation; raises InvalidAllocation on bad profiles."""
        return Allocation(self.n, self.p1, self.p2, self.a1, self.a2)


class WeightGridDocument(_Document):
    """Schema of a weight grid file: {"weights": [[mu0, mu1, mu2], ...]}"""

    weights: list[WeightRow] = Field(min_length=1)

    @field_validator("weights")
    @classmethod
    def _nonnegative(cls, value: list[WeightRow]) -> list[WeightRow]:
        for mu in value:
            check_weights(mu)
        return value

    def to_grid(self) -> list[Weights]:
        """The weight vectors in file order."""
        return [check_weights(mu) for mu in self.weights]

    @classmethod
    def parse_inline(cls, text: str) -> "WeightGridDocument":
        """Parse "1,0,0;0,1,0" style grids."""
        rows = [row for row in text.split(";") if row.strip()]
        weights = [tuple(float(v) for v in row.split(",")) for row in rows]
        return cls(weights=weights)  # type: ignore[arg-type]


def load_document(path: str | Path, model: type[DocumentT]) -> DocumentT:
    """Read and validate a JSON document.

    Raises FileNotFoundError, json.JSONDecodeError or pydantic.ValidationError.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{path}: no such file")
    with open(path, "r", encoding="utf-8") as f:
        return model.model_validate(json.load(f))


__all__ = [
    "NoiseDocument",
    "ChannelSpecDocument",
    "AllocationDocument",
    "WeightGridDocument",
    "load_document",
]
