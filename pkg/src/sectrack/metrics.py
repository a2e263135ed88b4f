"""Aggregation of simulation logs and fixed-schema CSV emission.

Every derived metric is a pure function of the MetricsLog, and the CSV
files are byte-stable for a given config and master seed.  Schemas:

    detection.csv     p_wh,p_i,p_r,n,closed_form,monte_carlo
    efficiency.csv    sector,seed,efficiency
    trajectory.csv    target,t,true_x,true_y,est_x,est_y,err
    switching.csv     t,target,old_ref,new_ref,cause,delay_s
    energy.csv        m_beams,energy
    friendliness.csv  t,node,peer,event,delay_s
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, NamedTuple

from sectrack.geometry import Position, TrackingZone, distance


class SwitchCause(enum.Enum):
    OUT_OF_RANGE = "out_of_range"
    OUT_OF_ZONE = "out_of_zone"
    FRIENDLINESS_LOST = "friendliness_lost"
    SECTOR_CONTENTION = "sector_contention"


class EstimateSample(NamedTuple):
    t: float
    est: Position
    truth: Position
    err: float


class SwitchEvent(NamedTuple):
    t: float
    target: int
    old_ref: int
    new_ref: int
    cause: SwitchCause
    delay_s: float


class FriendEvent(NamedTuple):
    t: float
    node: int
    peer: int
    event: str
    delay_s: float


class VerdictEvent(NamedTuple):
    t: float
    node: int
    peer: int
    verdict: str


@dataclass
class TrackRecord:
    """Lifetime record of one target's track."""

    target: int
    ref_pair: tuple[int, int]
    zone: TrackingZone | None = None
    estimates: list[EstimateSample] = field(default_factory=list)
    switches: list[SwitchEvent] = field(default_factory=list)
    sample_times: tuple[float, ...] = ()
    primary_sector: int = -1

    def add_estimate(self, sample: EstimateSample) -> None:
        if self.estimates and sample.t <= self.estimates[-1].t:
            raise ValueError("estimate timestamps must be strictly increasing")
        self.estimates.append(sample)


@dataclass
class MetricsLog:
    """Complete observation record of one run (or one composed experiment)."""

    config: dict[str, Any] = field(default_factory=dict)
    master_seed: int = 0
    sample_times: tuple[float, ...] = ()
    tracks: dict[int, TrackRecord] = field(default_factory=dict)
    switches: list[SwitchEvent] = field(default_factory=list)
    friend_events: list[FriendEvent] = field(default_factory=list)
    verdicts: list[VerdictEvent] = field(default_factory=list)
    detection_rows: list[tuple[float, float, float, int, float, float]] = field(
        default_factory=list
    )
    energy_rows: list[tuple[int, float]] = field(default_factory=list)
    efficiency_rows: list[tuple[int, int, float]] = field(default_factory=list)


TruthLookup = Callable[[float], Position]


def _truth_at(truth: TruthLookup | Iterable[tuple[float, float, float]] | None, t: float):
    if truth is None:
        return None
    if callable(truth):
        return truth(t)
    rows = sorted(truth)
    if not rows:
        return None
    # nearest-sample lookup; engine logs truth at the estimate instants
    best = min(rows, key=lambda r: abs(r[0] - t))
    return Position(best[1], best[2])


def plt_efficiency(
    track: TrackRecord,
    truth: TruthLookup | Iterable[tuple[float, float, float]] | None = None,
    tol: float = 5.0,
) -> float:
    """Fraction of scheduled sample instants with a fix within tol meters.

    Instants with no estimate (not yet assigned, suspended, lost) count
    as failures.  The default tolerance of 5 m is the accuracy knob that
    defines tracking "success".
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not track.sample_times:
        raise ValueError("track has an empty sample schedule")
    by_time = {s.t: s for s in track.estimates}
    hits = 0
    for t in track.sample_times:
        s = by_time.get(t)
        if s is None:
            continue
        ref = _truth_at(truth, t)
        err = s.err if ref is None else distance(s.est, ref)
        if err <= tol:
            hits += 1
    return hits / len(track.sample_times)


def mean_tracking_error(
    track: TrackRecord,
    truth: TruthLookup | Iterable[tuple[float, float, float]] | None = None,
) -> float:
    """Mean Euclidean error of the track's estimates against the truth."""
    if not track.estimates:
        raise ValueError("track has no estimates")
    total = 0.0
    for s in track.estimates:
        ref = _truth_at(truth, s.t)
        total += s.err if ref is None else distance(s.est, ref)
    return total / len(track.estimates)


def switching_overhead(log: MetricsLog, window: tuple[float, float] | None = None) -> float:
    """Seconds of scan plus authentication delay spent on switches."""
    lo, hi = window if window is not None else (float("-inf"), float("inf"))
    return sum(ev.delay_s for ev in log.switches if lo <= ev.t <= hi)


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, enum.Enum):
        return str(v.value)
    return str(v)


def _write_rows(path: Path, header: str, rows: Iterable[tuple]) -> Path:
    lines = [header]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def write_csv(log: MetricsLog, out_dir: str | Path) -> list[Path]:
    """Emit the six fixed-schema files; headers always, rows where data exists."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    trajectory_rows = [
        (target, s.t, s.truth.x, s.truth.y, s.est.x, s.est.y, s.err)
        for target in sorted(log.tracks)
        for s in log.tracks[target].estimates
    ]
    written = [
        _write_rows(
            out / "detection.csv",
            "p_wh,p_i,p_r,n,closed_form,monte_carlo",
            log.detection_rows,
        ),
        _write_rows(out / "efficiency.csv", "sector,seed,efficiency", log.efficiency_rows),
        _write_rows(
            out / "trajectory.csv", "target,t,true_x,true_y,est_x,est_y,err", trajectory_rows
        ),
        _write_rows(
            out / "switching.csv",
            "t,target,old_ref,new_ref,cause,delay_s",
            log.switches,
        ),
        _write_rows(out / "energy.csv", "m_beams,energy", log.energy_rows),
        _write_rows(
            out / "friendliness.csv", "t,node,peer,event,delay_s", log.friend_events
        ),
    ]
    return written
