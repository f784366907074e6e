from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from .config import SAMPLING, max_grid_points
from .errors import ArgumentError

VERBS = (
    "check-gaussian", "check-3user", "check-variant46", "regime-list", "region", "membership",
    "sum-capacity", "vertices", "slice", "support", "redundancy", "grid-gap",
    "lemma1", "lemma3", "lemma4", "corollary1", "degrade-test", "bc-order", "bc-sumcap",
    "degraded-equivalent",
)


@dataclass(frozen=True)
class GridSpec:
    """Marginals range over {0, 1/m, ..., 1}."""
    resolution: int
    max_points: int = field(default_factory=max_grid_points)
    fallback: bool = True

    def __post_init__(self):
        if self.resolution < 2:
            raise ArgumentError(f"grid resolution must be >= 2, got {self.resolution}")
        if self.max_points < 1:
            raise ArgumentError("max_points must be positive")


@dataclass(frozen=True)
class SampleSpec:
    n_samples: int
    seed: int = SAMPLING["seed"]
    dirichlet_concentration: float = SAMPLING["dirichlet_concentration"]

    def __post_init__(self):
        if self.n_samples < 1:
            raise ArgumentError(f"n_samples must be >= 1, got {self.n_samples}")
        if not self.dirichlet_concentration > 0:
            raise ArgumentError("dirichlet_concentration must be positive")


@dataclass
class VerificationReport:
    operation: str
    channel_digest: str
    mode: str
    n_evaluated: int
    min_gap: float
    argmin_law: Any
    seed: Optional[int]
    elapsed_ms: float = 0.0
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def argmin(self) -> Any:
        return self.argmin_law

    def violated(self, tol: float) -> bool:
        return self.min_gap < -tol

    def to_json(self) -> Dict[str, Any]:
        report = {
            "operation": self.operation,
            "channel_digest": self.channel_digest,
            "mode": self.mode,
            "n_evaluated": self.n_evaluated,
            "min_gap": self.min_gap,
            "argmin_law": self.argmin_law,
            "seed": self.seed,
            "elapsed_ms": self.elapsed_ms,
        }
        report.update(self.extra)
        return report


@dataclass
class RunConfig:
    command: str
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    seed: int = SAMPLING["seed"]
    format: str = "json"
    precision: int = 6
    tolerance_overrides: Dict[str, float] = field(default_factory=dict)
    timestamp: bool = True
    options: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in VERBS:
            raise ArgumentError(f"unknown command '{self.command}'")
        if self.format not in ("json", "csv"):
            raise ArgumentError(f"unknown format '{self.format}'")
