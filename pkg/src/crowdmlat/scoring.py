"""Truncated-RMSE scoring with coverage rules and a public/hidden split.

The ranking metric sorts per-record errors, keeps the smallest
floor(truncation * N) of them (at least one), and reports their RMSE. A
prediction set passes only if it also covers enough of the withheld records.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional

import numpy as np

from .errors import IntegrityError
from .geo import ground_distance

if TYPE_CHECKING:  # pragma: no cover
    from .dataio import MeasurementSet


@dataclass(frozen=True)
class PredictedPosition:
    """A predicted (or withheld-truth) location; altitude may be unknown."""

    latitude: float
    longitude: float
    altitude: Optional[float] = None

    def is_finite(self) -> bool:
        return math.isfinite(self.latitude) and math.isfinite(self.longitude)


@dataclass
class PredictionSet:
    """record_id -> predicted position; absence means no prediction.

    `universe` is the set of record ids eligible for prediction (the masked
    records); adding an entry outside it is an integrity error. `flights`
    optionally maps record_id -> aircraft_id and is populated for withheld
    truth sets so the public split can select whole trajectories.
    """

    entries: dict[int, PredictedPosition] = field(default_factory=dict)
    universe: Optional[frozenset[int]] = None
    flights: Optional[dict[int, int]] = None

    def add(self, record_id: int, position: PredictedPosition) -> None:
        if self.universe is not None and record_id not in self.universe:
            raise IntegrityError(
                f"prediction for record {record_id} not in the masked set"
            )
        self.entries[record_id] = position

    def finite_entries(self) -> dict[int, PredictedPosition]:
        """Entries with finite coordinates; the rest count as unpredicted."""
        return {k: v for k, v in self.entries.items() if v.is_finite()}

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ScoreConfig:
    truncation: float = 0.9
    min_coverage: float = 0.7
    split: str = "full"  # "full" or "public"
    split_fraction: float = 0.3
    split_seed: int = 0
    metric: str = "2d"  # "2d" ground distance or "3d" including altitude

    def __post_init__(self):
        if not (0.0 < self.truncation <= 1.0):
            raise ValueError("truncation must be in (0, 1]")
        if self.split not in ("full", "public"):
            raise ValueError("split must be 'full' or 'public'")
        if self.metric not in ("2d", "3d"):
            raise ValueError("metric must be '2d' or '3d'")


@dataclass(frozen=True)
class ScoreReport:
    trmse: float
    coverage: float
    n_scored: int
    truncation: float
    split: str
    pass_coverage: bool

    def to_json_dict(self) -> dict:
        return {
            "trmse_m": self.trmse,
            "coverage": self.coverage,
            "n_scored": self.n_scored,
            "truncation": self.truncation,
            "split": self.split,
            "pass_coverage": self.pass_coverage,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def __str__(self) -> str:
        lines = [
            f"TRMSE ({self.split} split, truncation {self.truncation:g}): "
            f"{self.trmse:.2f} m over {self.n_scored} records",
            f"coverage: {self.coverage:.3f} "
            f"({'PASS' if self.pass_coverage else 'FAIL'})",
        ]
        if math.isfinite(self.trmse):
            if self.trmse < 1000.0:
                lines.append("note: below the 1000 m full-award bar")
            elif self.trmse < 5000.0:
                lines.append("note: below the 5000 m half-award bar")
        return "\n".join(lines)


def truncated_rmse(errors: Iterable[float], truncation: float = 0.9) -> float:
    """RMSE of the floor(truncation * N) smallest errors (at least one)."""
    e = np.asarray(list(errors), dtype=float)
    if e.size == 0:
        raise ValueError("truncated_rmse needs at least one error value")
    if not (0.0 < truncation <= 1.0):
        raise ValueError("truncation must be in (0, 1]")
    keep = max(1, int(math.floor(truncation * e.size)))
    kept = np.sort(e)[:keep]
    return float(np.sqrt(np.mean(kept**2)))


def maskable_record_ids(masked: "MeasurementSet") -> list[int]:
    """Records whose position was withheld (no latitude) in a masked set."""
    return [r.record_id for r in masked.records if r.latitude is None]


def coverage(preds: PredictionSet, masked: "MeasurementSet") -> float:
    """Fraction of maskable records carrying a finite prediction."""
    maskable = maskable_record_ids(masked)
    if not maskable:
        return 0.0
    finite = preds.finite_entries()
    return sum(1 for rid in maskable if rid in finite) / len(maskable)


def public_split_flights(
    flight_ids: Iterable[int], fraction: float, seed: int
) -> frozenset[int]:
    """Deterministic choice of the public-scoreboard flights."""
    ids = sorted(set(flight_ids))
    n = max(1, int(round(fraction * len(ids)))) if ids else 0
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(ids), size=n, replace=False) if n else []
    return frozenset(ids[i] for i in chosen)


def _error_meters(pred: PredictedPosition, truth: PredictedPosition, metric: str):
    d = ground_distance(pred.latitude, pred.longitude, truth.latitude, truth.longitude)
    if metric == "3d" and pred.altitude is not None and truth.altitude is not None:
        d = math.hypot(d, pred.altitude - truth.altitude)
    return d


def evaluate(
    preds: PredictionSet, truth: PredictionSet, config: ScoreConfig = ScoreConfig()
) -> ScoreReport:
    """Score predictions against withheld truth.

    Coverage is always computed on the full withheld set; the public split
    restricts only which flights' errors enter the TRMSE. Predictions for
    records outside the truth set raise IntegrityError; non-finite
    predictions count as missing.
    """
    truth_ids = set(truth.entries)
    finite = preds.finite_entries()
    unknown = set(preds.entries) - truth_ids
    if unknown:
        raise IntegrityError(
            f"predictions reference {len(unknown)} records outside the "
            f"masked set (e.g. {sorted(unknown)[:3]})"
        )
    cov = (
        sum(1 for rid in truth_ids if rid in finite) / len(truth_ids)
        if truth_ids
        else 0.0
    )

    scored_ids = truth_ids
    if config.split == "public":
        if truth.flights is None:
            raise ValueError("public split requires flight membership in the truth set")
        chosen = public_split_flights(
            truth.flights.values(), config.split_fraction, config.split_seed
        )
        scored_ids = {rid for rid in truth_ids if truth.flights.get(rid) in chosen}

    errors = [
        _error_meters(finite[rid], truth.entries[rid], config.metric)
        for rid in scored_ids
        if rid in finite
    ]
    trmse = truncated_rmse(errors, config.truncation) if errors else float("nan")
    return ScoreReport(
        trmse=trmse,
        coverage=cov,
        n_scored=len(errors),
        truncation=config.truncation,
        split=config.split,
        pass_coverage=cov >= config.min_coverage,
    )
