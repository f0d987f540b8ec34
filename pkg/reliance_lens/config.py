from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from typing import Iterable, Mapping

from loguru import logger

from reliance_lens.errors import ConfigError

# Single place the comparison tolerance on fractions is defined.
TOLERANCE = 1e-9

PALETTE_ENV_VAR = "RELIANCE_LENS_PALETTE"


@dataclass(frozen=True)
class Palette:
    """Named colors for the framework plot.

    Defaults are red where the human impairs the AI, green where they complement
    it, black for the non-discernment line and dashed green at matched adherence.
    """

    region_below: str = "#f4b6b6"
    region_above: str = "#b7e1b0"
    line: str = "#000000"
    matched: str = "#2e7d32"
    marker: str = "#1f4e9c"
    baseline: str = "#000000"
    neutral: str = "#8c8c8c"
    arrow: str = "#444444"

    def with_overrides(self, overrides: Mapping[str, str]) -> Palette:
        known = {f.name for f in fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ConfigError(
                f"unknown palette key(s) {', '.join(unknown)}; expected one of {', '.join(sorted(known))}"
            )
        return replace(self, **overrides)

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None) -> Palette:
        environ = os.environ if environ is None else environ
        raw = environ.get(PALETTE_ENV_VAR, "").strip()
        if not raw:
            return cls()
        logger.debug(f"Palette overrides from {PALETTE_ENV_VAR}: {raw!r}")
        return cls().with_overrides(parse_palette_pairs(raw.split(",")))


def parse_palette_pairs(pairs: Iterable[str]) -> dict[str, str]:
    """Parse ``key=color`` items into a mapping."""
    parsed = {}
    for pair in pairs:
        pair = pair.strip()
        if not pair:
            continue
        key, sep, value = pair.partition("=")
        if not sep or not key.strip() or not value.strip():
            raise ConfigError(f"palette override {pair!r} is not of the form key=color")
        parsed[key.strip()] = value.strip()
    return parsed


@dataclass(frozen=True)
class Settings:
    tolerance: float = TOLERANCE
    seed: int = 0
    quantity_threshold: float = 0.05
    quality_threshold: float = 0.05
    palette: Palette = field(default_factory=Palette)

    def __post_init__(self) -> None:
        if not 0 <= self.tolerance < 1:
            raise ConfigError(f"tolerance must lie in [0, 1), got {self.tolerance}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.quantity_threshold < 0 or self.quality_threshold < 0:
            raise ConfigError("narrative thresholds must be non-negative")
