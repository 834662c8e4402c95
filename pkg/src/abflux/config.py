"""JSON run configuration (schema version 1) and its mapping onto domain objects."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .channel import FluxAlphabet, NoiseModel, StraySlot, default_noise
from .errors import ConfigError
from .field_config import FieldConfiguration, GaugePrimitive, PhysicalConstants, ReceiverRegion

SCHEMA_VERSION = 1


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ConstantsSpec(_Model):
    hbar: float = Field(1.0, gt=0)
    c: float = Field(1.0, gt=0)
    mu: float = Field(1.0, gt=0)
    q: float = Field(1.0, gt=0)


class DiskSpec(_Model):
    center: tuple[float, float]
    radius: float = Field(gt=0)
    B: float

    def build(self) -> GaugePrimitive:
        return GaugePrimitive(self.center, self.radius, self.B)


class AnalysisSpec(_Model):
    samples: int = Field(32, ge=16)
    seed: int = 0


class GridSpec(_Model):
    nodes_per_radius: list[int] = Field(default_factory=lambda: [32, 64, 128], min_length=1)
    levels: int = Field(3, ge=0)
    gauge_nodes_per_radius: int = Field(32, ge=16)
    gauge_levels: int = Field(3, ge=1)
    gauge_flux_sweep: list[float] = Field(default_factory=lambda: [0.0, 1.0, -1.0, 5.0, -5.0])
    tol: float = Field(1e-8, gt=0)

    @model_validator(mode="after")
    def _increasing(self):
        if any(b <= a for a, b in zip(self.nodes_per_radius, self.nodes_per_radius[1:])):
            raise ValueError("nodes_per_radius must increase")
        if any(n < 16 for n in self.nodes_per_radius):
            raise ValueError("nodes_per_radius entries must be at least 16")
        return self


class EvenAlphabetSpec(_Model):
    size: int = Field(ge=1)
    spacing: float = Field(gt=0)
    offset: float = 0.0


class SlotSpec(_Model):
    center: tuple[float, float]
    radius: float = Field(gt=0)
    amplitude: float = Field(ge=0)


class NoiseSpec(_Model):
    kind: Literal["default", "none", "slots"] = "default"
    strength: float = Field(0.25, ge=0)
    slots: list[SlotSpec] = Field(default_factory=list)


class ChannelSpec(_Model):
    alphabet: Union[list[float], EvenAlphabetSpec] = Field(
        default_factory=lambda: EvenAlphabetSpec(size=4, spacing=math.pi)
    )
    message: Optional[list[int]] = None
    message_length: int = Field(1000, ge=0)
    message_seed: Optional[int] = None
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    T: Optional[float] = Field(None, ge=0)
    frame_duration: float = Field(1.0, gt=0)
    seed: int = 0
    decoder_tolerance: Optional[float] = Field(None, gt=0)


class OutputSpec(_Model):
    dir: Optional[str] = None
    format: Literal["json", "csv"] = "json"


class RunConfig(_Model):
    schema_version: Literal[1] = SCHEMA_VERSION
    constants: ConstantsSpec = Field(default_factory=ConstantsSpec)
    source: DiskSpec
    spectator: DiskSpec
    strays: list[DiskSpec] = Field(default_factory=list)
    receiver_region: ReceiverRegion = ReceiverRegion.INSIDE_SPECTATOR
    analysis: AnalysisSpec = Field(default_factory=AnalysisSpec)
    grid: GridSpec = Field(default_factory=GridSpec)
    channel: ChannelSpec = Field(default_factory=ChannelSpec)
    output: OutputSpec = Field(default_factory=OutputSpec)

    def field_configuration(self) -> FieldConfiguration:
        return FieldConfiguration(
            source=self.source.build(),
            spectator=self.spectator.build(),
            constants=PhysicalConstants(**self.constants.model_dump()),
            strays=tuple(s.build() for s in self.strays),
            receiver_region=self.receiver_region,
        )

    def flux_alphabet(self) -> FluxAlphabet:
        a = self.channel.alphabet
        if isinstance(a, EvenAlphabetSpec):
            return FluxAlphabet.evenly_spaced(a.size, a.spacing, a.offset)
        return FluxAlphabet(tuple(a))

    def noise_model(self, config: FieldConfiguration | None = None) -> NoiseModel:
        spec = self.channel.noise
        if spec.kind == "none":
            return NoiseModel()
        if spec.kind == "slots":
            return NoiseModel(tuple(StraySlot(s.center, s.radius, s.amplitude) for s in spec.slots))
        return default_noise(config or self.field_configuration(), spec.strength)

    def message(self) -> list[int]:
        ch = self.channel
        if ch.message is not None:
            return list(ch.message)
        seed = ch.seed if ch.message_seed is None else ch.message_seed
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0xA11CE,)))
        return [int(s) for s in rng.integers(0, len(self.flux_alphabet()), ch.message_length)]

    def with_seed(self, seed: int) -> RunConfig:
        return self.model_copy(
            update={
                "channel": self.channel.model_copy(update={"seed": seed}),
                "analysis": self.analysis.model_copy(update={"seed": seed}),
            }
        )


def parse_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    try:
        run = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration:\n{exc}") from exc
    run.field_configuration()  # re-check geometric invariants at load
    return run


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def demo_config(receiver_region: ReceiverRegion = ReceiverRegion.INSIDE_SPECTATOR) -> RunConfig:
    """Landau-regime spectator (a_c = 6 magnetic lengths) with a unit-flux source."""
    return RunConfig(
        source=DiskSpec(center=(0.0, 0.0), radius=1.0, B=1.0 / math.pi),
        spectator=DiskSpec(center=(5.0, 0.0), radius=1.0, B=36.0),
        receiver_region=receiver_region,
    )
