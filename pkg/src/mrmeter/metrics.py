"""Per-invocation metering and aggregation into run-level complexity.

The cost of an invocation is abstract work: bytes moved in and out plus
whatever extra work the UDF declares. Memory is the framework-tracked
bytes of record data and accumulator state, not process RSS. Wall-clock
time is reported alongside runs for information only and is never part of
a report or an assertion. Disk traffic is not modeled; the shuffle volume
is reported informationally and is not folded into the sequential totals.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import chain
from typing import Iterable, Optional, Sequence, Tuple


class InvocationKind(Enum):
    """How an invocation holds data, which fixes its memory accounting."""

    MAP_STREAMED = "map_streamed"      # emits pairs one at a time
    MAP_BUFFERED = "map_buffered"      # returns its whole output at once
    COMBINE = "combine"                # local fold, holds its input group
    REDUCE_BATCHED = "reduce_batched"  # holds the whole reduce record
    REDUCE_STREAMING = "reduce_streaming"  # holds state plus one value


@dataclass(frozen=True)
class InvocationMetrics:
    """Measurements for one UDF invocation.

    ``max_pair_size_bytes`` is the largest single pair (or record) this
    invocation read or wrote; the per-phase maxima are built from it.
    """

    io_bytes: int
    cost_units: int
    memory_bytes: int
    max_pair_size_bytes: int


def meter_invocation(
    input_sizes: Sequence[int],
    output_sizes: Sequence[int],
    declared_extra_work: int = 0,
    *,
    kind: InvocationKind,
    streaming_peak_memory: Optional[int] = None,
) -> InvocationMetrics:
    """Compute the metrics of one invocation from its declared sizes.

    The result depends only on the sizes, the declared work, and the
    invocation kind, so it is identical under any execution schedule.
    """
    for size in chain(input_sizes, output_sizes):
        if size < 0:
            raise ValueError(f"sizes must be non-negative, got {size}")
    if declared_extra_work < 0:
        raise ValueError(f"declared extra work must be non-negative, got {declared_extra_work}")

    in_total = sum(input_sizes)
    out_total = sum(output_sizes)
    io_bytes = in_total + out_total
    cost_units = io_bytes + declared_extra_work

    if kind is InvocationKind.MAP_STREAMED:
        memory = in_total + (max(output_sizes) if output_sizes else 0)
    elif kind is InvocationKind.MAP_BUFFERED:
        memory = in_total + out_total
    elif kind in (InvocationKind.COMBINE, InvocationKind.REDUCE_BATCHED):
        memory = in_total
    else:  # REDUCE_STREAMING
        if streaming_peak_memory is None:
            raise ValueError("streaming invocations must supply their peak memory")
        if streaming_peak_memory < 0:
            raise ValueError("peak memory must be non-negative")
        memory = streaming_peak_memory

    max_pair = max(chain(input_sizes, output_sizes), default=0)
    return InvocationMetrics(io_bytes, cost_units, memory, max_pair)


@dataclass(frozen=True)
class KeyComplexity:
    """Maxima over the invocations of one phase; zeros for an empty phase."""

    max_pair_size_bytes: int = 0
    max_cost_units: int = 0
    max_memory_bytes: int = 0

    @classmethod
    def from_invocations(cls, invocations: Iterable[InvocationMetrics]) -> "KeyComplexity":
        pair = cost = memory = 0
        for m in invocations:
            if m.max_pair_size_bytes > pair:
                pair = m.max_pair_size_bytes
            if m.cost_units > cost:
                cost = m.cost_units
            if m.memory_bytes > memory:
                memory = m.memory_bytes
        return cls(pair, cost, memory)

    def merged(self, other: "KeyComplexity") -> "KeyComplexity":
        """Combine partial maxima; associative and commutative."""
        return KeyComplexity(
            max(self.max_pair_size_bytes, other.max_pair_size_bytes),
            max(self.max_cost_units, other.max_cost_units),
            max(self.max_memory_bytes, other.max_memory_bytes),
        )


@dataclass(frozen=True)
class SequentialComplexity:
    """Sums over all map and reduce invocations.

    Total memory is deliberately absent: it depends on how many workers run
    at once, which is a property of the deployment, not the algorithm.
    """

    total_io_bytes: int = 0
    total_cost_units: int = 0

    @classmethod
    def from_invocations(cls, invocations: Iterable[InvocationMetrics]) -> "SequentialComplexity":
        io = cost = 0
        for m in invocations:
            io += m.io_bytes
            cost += m.cost_units
        return cls(io, cost)

    def merged(self, other: "SequentialComplexity") -> "SequentialComplexity":
        """Combine partial sums; associative and commutative."""
        return SequentialComplexity(
            self.total_io_bytes + other.total_io_bytes,
            self.total_cost_units + other.total_cost_units,
        )


@dataclass(frozen=True)
class SkewReport:
    """How unevenly reduce-record sizes are distributed."""

    max_record_size: int
    mean_record_size: float
    skew_ratio: float
    heaviest_key: Optional[bytes]


def skew(records: Sequence[Tuple[bytes, int]]) -> SkewReport:
    """Skew statistics over (key bytes, record size) pairs.

    ``skew_ratio`` is max/mean, 0.0 when there are no records. Ties for
    the heaviest record go to the lexicographically smallest key.
    """
    if not records:
        return SkewReport(0, 0.0, 0.0, None)
    heaviest_key, max_size = records[0]
    total = 0
    for key, size in records:
        total += size
        if size > max_size or (size == max_size and key < heaviest_key):
            heaviest_key, max_size = key, size
    mean = total / len(records)
    ratio = max_size / mean if mean > 0 else 1.0
    return SkewReport(max_size, mean, ratio, heaviest_key)


@dataclass(frozen=True)
class ComplexityReport:
    """The full measurement record of one job run.

    ``total_streaming_reducer_memory`` sums, over reducer workers, the
    largest memory each worker held; it is populated only for streaming
    runs. ``shuffle_bytes`` counts the pair bytes entering the shuffle
    after any combining.
    """

    map_key_cx: KeyComplexity
    reduce_key_cx: KeyComplexity
    sequential: SequentialComplexity
    shuffle_bytes: int
    reduce_record_sizes: Tuple[int, ...]
    total_streaming_reducer_memory: Optional[int]
    skew: SkewReport


def aggregate(
    map_invocations: Sequence[InvocationMetrics],
    reduce_invocations: Sequence[InvocationMetrics],
    *,
    shuffle_bytes: int = 0,
    reduce_records: Sequence[Tuple[bytes, int]] = (),
    streaming_worker_peaks: Optional[Sequence[int]] = None,
) -> ComplexityReport:
    """Fold per-invocation metrics into a report; empty phases yield zeros."""
    total_streaming = (
        sum(streaming_worker_peaks) if streaming_worker_peaks is not None else None
    )
    return ComplexityReport(
        map_key_cx=KeyComplexity.from_invocations(map_invocations),
        reduce_key_cx=KeyComplexity.from_invocations(reduce_invocations),
        sequential=SequentialComplexity.from_invocations(
            chain(map_invocations, reduce_invocations)
        ),
        shuffle_bytes=shuffle_bytes,
        reduce_record_sizes=tuple(size for _, size in reduce_records),
        total_streaming_reducer_memory=total_streaming,
        skew=skew(reduce_records),
    )
