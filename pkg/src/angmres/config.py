"""Run configuration shared by every solver driver."""

from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    """Invalid run configuration (maps to CLI exit code 4)."""


@dataclass(frozen=True)
class RunConfig:
    """Driver settings.

    method is the CLI method string (e.g. "angmres:m=3,p=4"); the numeric
    fields are what the drivers consume.  Stopping rule: converge when
    ||r_k|| <= max(rtol * ||r_0||, atol).
    """

    method: str | None = None
    rtol: float = 1e-10
    atol: float = 1e-14
    max_iter: int = 100
    seed: int = 0
    output_dir: Path | None = None

    def __post_init__(self):
        if self.rtol < 0 or self.atol < 0:
            raise ConfigError("tolerances must be nonnegative")
        if self.rtol == 0 and self.atol == 0:
            raise ConfigError("rtol and atol cannot both be zero")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")

    def threshold(self, r0_norm):
        return max(self.rtol * r0_norm, self.atol)
