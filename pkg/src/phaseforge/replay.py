"""Streaming inference replay over a prediction log.

Models the real-time protocol: confidences arrive frame by frame, the
first window-1 frames only fill the buffer (warmup, no decision), and
from frame window-1 onward each frame is decided as the argmax of its
confidence row (ties to the lowest phase id / first column). The two
buffering styles differ only in the bookkeeping they model, never in the
decided labels: ``feature_queue`` updates one slot per frame while
``full_window_wait`` blocks until the buffer is full, then slides.

The replay is single-pass with memory bounded by one window of rows, so
it can consume a live row iterator, not just a stored log.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

from .errors import LengthMismatch, LogTooShort
from .evaluation import PredictionLog


class BufferMode(str, enum.Enum):
    FEATURE_QUEUE = "feature_queue"
    FULL_WINDOW_WAIT = "full_window_wait"


class WarmupEmission(str, enum.Enum):
    SUPPRESS = "suppress"          # warmup frames emit no label at all
    HOLD_UNKNOWN = "hold_unknown"  # warmup frames emit an explicit unknown


class FrameState(str, enum.Enum):
    WARMUP = "warmup"
    DECIDED = "decided"


@dataclass(frozen=True)
class ReplayPolicy:
    window: int = 16
    mode: BufferMode = BufferMode.FEATURE_QUEUE
    warmup_emission: WarmupEmission = WarmupEmission.SUPPRESS

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")


@dataclass(frozen=True)
class DecisionTrack:
    """Per-frame streaming decisions with warmup bookkeeping.

    Warmup frames (exactly 0..window-2) carry None as their label; the
    policy's warmup_emission says how a serializer should render them.
    """

    case_id: str
    policy: ReplayPolicy
    labels: tuple[int | None, ...]
    states: tuple[FrameState, ...]
    fps: float = 1.0

    def __post_init__(self):
        if len(self.labels) != len(self.states):
            raise LengthMismatch("labels and states must align")

    def decided_items(self) -> list[tuple[int, int]]:
        """(frame, label) pairs for decided frames only."""
        return [
            (k, v) for k, (v, s) in enumerate(zip(self.labels, self.states))
            if s is FrameState.DECIDED
        ]


def argmax_lowest(row) -> int:
    """Index of the max confidence; ties go to the first column."""
    best = 0
    for j in range(1, len(row)):
        if row[j] > row[best]:
            best = j
    return best


def replay(log: PredictionLog, policy: ReplayPolicy) -> DecisionTrack:
    """Replay a stored log through the streaming protocol."""
    if len(log.rows) < policy.window:
        raise LogTooShort(
            f"log has {len(log.rows)} rows, window is {policy.window}")
    labels, states = _stream(iter(log.rows), policy)
    return DecisionTrack(
        case_id=log.case_id,
        policy=policy,
        labels=tuple(labels),
        states=tuple(states),
    )


def _stream(rows, policy):
    """Single forward pass; holds at most one window of rows."""
    buffer = deque(maxlen=policy.window)
    labels = []
    states = []
    for row in rows:
        buffer.append(row)
        if len(buffer) < policy.window:
            labels.append(None)
            states.append(FrameState.WARMUP)
        else:
            # decision for the newest frame in the (now sliding) buffer
            labels.append(argmax_lowest(buffer[-1]))
            states.append(FrameState.DECIDED)
    return labels, states


def compare_offline(decisions: DecisionTrack, log: PredictionLog) -> "Divergence":
    """Count decided frames whose label differs from the offline argmax
    of the same log row. Zero by construction when nothing post-processes
    the decisions."""
    if len(decisions.labels) != len(log.rows):
        raise LengthMismatch(
            f"{len(decisions.labels)} decisions vs {len(log.rows)} log rows")
    diff_count = 0
    first_diff_frame = None
    for k, v in decisions.decided_items():
        if v != argmax_lowest(log.rows[k]):
            diff_count += 1
            if first_diff_frame is None:
                first_diff_frame = k
    return Divergence(diff_count=diff_count, first_diff_frame=first_diff_frame)


@dataclass(frozen=True)
class Divergence:
    diff_count: int
    first_diff_frame: int | None
