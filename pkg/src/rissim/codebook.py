"""Offline codeword generation, nearest-reference lookup, and path replay."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .channel import (
    ChannelModelParams,
    DEFAULT_FULL_SCALE,
    TonePowerMeter,
    ToneParams,
    synthesize_channels,
)
from .geometry import Scene, grid_point
from .optimizer import greedy_iterative
from .ris import (
    DEFAULT_ELEMENT_AMPLITUDE,
    RisConfig,
    RisLayout,
    from_bit_array,
    make_grouping,
    to_bit_array,
)

CODEBOOK_SCHEMA_VERSION = 1
SWITCH_TIME_MS = 1.0  # nominal controller latency per codeword swap


@dataclass(frozen=True)
class CodebookEntry:
    angle_deg: float
    distance_cm: float
    config: RisConfig


@dataclass(frozen=True, eq=False)
class Codebook:
    """Codewords keyed by the reference point they were trained at."""

    entries: tuple[CodebookEntry, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = set()
        layout = None
        for e in self.entries:
            key = (e.angle_deg, e.distance_cm)
            if key in seen:
                raise ValueError(f"duplicate reference point {key}")
            seen.add(key)
            if layout is None:
                layout = e.config.layout
            elif e.config.layout != layout:
                raise ValueError("codewords must share one layout")

    @property
    def layout(self) -> RisLayout | None:
        return self.entries[0].config.layout if self.entries else None

    def to_json_dict(self) -> dict:
        return {
            "schema_version": CODEBOOK_SCHEMA_VERSION,
            "metadata": self.metadata,
            "entries": [
                {
                    "angle_deg": e.angle_deg,
                    "distance_cm": e.distance_cm,
                    "bits": to_bit_array(e.config),
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Codebook":
        if data.get("schema_version") != CODEBOOK_SCHEMA_VERSION:
            raise ValueError(f"unsupported codebook schema: {data.get('schema_version')!r}")
        meta = data.get("metadata", {})
        lay = meta.get("layout")
        if lay is None:
            raise ValueError("codebook metadata is missing the layout")
        layout = RisLayout(
            nx=lay["nx"],
            ny=lay["ny"],
            spacing=lay["spacing"],
            disabled=frozenset(tuple(cell) for cell in lay["disabled"]),
            carrier_hz=lay["carrier_hz"],
        )
        entries = tuple(
            CodebookEntry(
                float(e["angle_deg"]),
                float(e["distance_cm"]),
                from_bit_array(layout, e["bits"]),
            )
            for e in data.get("entries", [])
        )
        return cls(entries, meta)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "Codebook":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def _layout_meta(layout: RisLayout) -> dict:
    return {
        "nx": layout.nx,
        "ny": layout.ny,
        "spacing": layout.spacing,
        "disabled": sorted([list(cell) for cell in layout.disabled]),
        "carrier_hz": layout.carrier_hz,
    }


class CodebookGenerationError(RuntimeError):
    """Generation failed part-way; the completed codewords ride along."""

    def __init__(self, message: str, partial: Codebook):
        super().__init__(message)
        self.partial = partial


def generate_codebook(
    scene: Scene,
    layout: RisLayout,
    reference_points,
    channel_params: ChannelModelParams,
    *,
    tone: ToneParams | None = None,
    full_scale: float = DEFAULT_FULL_SCALE,
    element_amplitude: float = DEFAULT_ELEMENT_AMPLITUDE,
    num_states: int = 4,
    group_size: int = 1,
) -> Codebook:
    """Train one codeword per reference point with the greedy sweep.

    Each point gets its own channel realization and measurement noise
    stream, both keyed on the scenario seed, so regeneration is exact.
    """
    tone = tone if tone is not None else ToneParams()
    grouping = make_grouping(layout, group_size)
    entries: list[CodebookEntry] = []
    meta = {
        "seed": channel_params.seed,
        "layout": _layout_meta(layout),
        "channel": {
            "path_loss_exponent": channel_params.path_loss_exponent,
            "rician_k_db": channel_params.rician_k_db,
            "noise_variance": channel_params.noise_variance,
            "cross_pol_coupling": channel_params.cross_pol_coupling,
        },
        "optimizer": {"num_states": num_states, "group_size": group_size},
        "full_scale": full_scale,
        "element_amplitude": element_amplitude,
    }
    for i, (angle_deg, distance_cm) in enumerate(reference_points):
        try:
            placed = scene.with_rx_at(float(angle_deg), float(distance_cm))
            chan = synthesize_channels(placed, layout, channel_params)
            meter = TonePowerMeter(
                chan,
                tone,
                full_scale=full_scale,
                amplitude=element_amplitude,
                noise_seed=(channel_params.seed, "codebook", i),
            )
            config, _ = greedy_iterative(meter, layout, num_states, grouping)
        except Exception as exc:
            raise CodebookGenerationError(
                f"codeword for ({angle_deg}, {distance_cm}) failed",
                Codebook(tuple(entries), meta),
            ) from exc
        entries.append(CodebookEntry(float(angle_deg), float(distance_cm), config))
    return Codebook(tuple(entries), meta)


def _planar_cm(angle_deg: float, distance_cm: float) -> tuple[float, float]:
    p = grid_point(angle_deg, distance_cm)
    return float(100.0 * p[0]), float(100.0 * p[1])


def lookup_nearest(book: Codebook, rx_angle_deg: float, rx_distance_cm: float) -> tuple[RisConfig, CodebookEntry]:
    """Pick the codeword for a query point: smallest angular offset first,
    then planar distance, then the smaller reference angle."""
    if not book.entries:
        raise ValueError("codebook is empty")
    qx, qy = _planar_cm(rx_angle_deg, rx_distance_cm)

    def key(e: CodebookEntry):
        ex, ey = _planar_cm(e.angle_deg, e.distance_cm)
        return (
            abs(e.angle_deg - rx_angle_deg),
            math.hypot(ex - qx, ey - qy),
            e.angle_deg,
        )

    entry = min(book.entries, key=key)
    return entry.config, entry


@dataclass(frozen=True)
class PathPointRecord:
    angle_deg: float
    distance_cm: float
    x_cm: float
    y_cm: float
    p_off_dbfs: float
    p_codebook_dbfs: float
    p_online_dbfs: float
    codeword_angle_deg: float
    codeword_distance_cm: float


@dataclass(frozen=True, eq=False)
class PathEvaluation:
    """Replay of a receiver path under three strategies per point: all-off,
    the looked-up codeword, and a fresh online greedy run on the same
    channel realization."""

    records: tuple[PathPointRecord, ...]
    switch_count: int

    @property
    def reconfiguration_time_ms(self) -> float:
        return self.switch_count * SWITCH_TIME_MS

    def csv_rows(self):
        for r in self.records:
            yield {
                "x_cm": r.x_cm,
                "y_cm": r.y_cm,
                "angle_deg": r.angle_deg,
                "distance_cm": r.distance_cm,
                "p_off": r.p_off_dbfs,
                "p_codebook": r.p_codebook_dbfs,
                "p_online": r.p_online_dbfs,
                "codeword_angle": r.codeword_angle_deg,
            }


class PathEvaluationError(RuntimeError):
    """Path replay failed part-way; completed point records ride along."""

    def __init__(self, message: str, partial):
        super().__init__(message)
        self.partial_records = tuple(partial)


def evaluate_path(
    book: Codebook,
    path,
    scene: Scene,
    layout: RisLayout,
    channel_params: ChannelModelParams,
    *,
    tone: ToneParams | None = None,
    full_scale: float = DEFAULT_FULL_SCALE,
    element_amplitude: float = DEFAULT_ELEMENT_AMPLITUDE,
    num_states: int = 4,
    group_size: int = 1,
) -> PathEvaluation:
    """Walk the path; at each point measure all-off, codeword, and online
    greedy power on one shared channel realization."""
    if not book.entries:
        raise ValueError("codebook is empty")
    tone = tone if tone is not None else ToneParams()
    grouping = make_grouping(layout, group_size)
    records: list[PathPointRecord] = []
    switches = 0
    loaded = None
    for i, (angle_deg, distance_cm) in enumerate(path):
        try:
            angle_deg, distance_cm = float(angle_deg), float(distance_cm)
            placed = scene.with_rx_at(angle_deg, distance_cm)
            chan = synthesize_channels(placed, layout, channel_params)
            meter = TonePowerMeter(
                chan,
                tone,
                full_scale=full_scale,
                amplitude=element_amplitude,
                noise_seed=(channel_params.seed, "path", i),
            )
            p_off = meter(RisConfig.all_off(layout))
            codeword, entry = lookup_nearest(book, angle_deg, distance_cm)
            p_codebook = meter(codeword)
            online_meter = TonePowerMeter(
                chan,
                tone,
                full_scale=full_scale,
                amplitude=element_amplitude,
                noise_seed=(channel_params.seed, "path-online", i),
            )
            _, trace = greedy_iterative(online_meter, layout, num_states, grouping)
        except Exception as exc:
            raise PathEvaluationError(f"path point {i} failed", records) from exc
        if loaded != (entry.angle_deg, entry.distance_cm):
            switches += 1
            loaded = (entry.angle_deg, entry.distance_cm)
        x_cm, y_cm = _planar_cm(angle_deg, distance_cm)
        records.append(
            PathPointRecord(
                angle_deg,
                distance_cm,
                x_cm,
                y_cm,
                p_off,
                p_codebook,
                trace.final_power,
                entry.angle_deg,
                entry.distance_cm,
            )
        )
    return PathEvaluation(tuple(records), switches)
