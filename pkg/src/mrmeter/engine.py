"""Map, shuffle, and reduce execution with exact barrier semantics.

The reduce phase can only start from an event log that records a finished
shuffle, which in turn follows the map phase, so every run satisfies the
bulk-synchronous barrier by construction. Shuffle routing is a seeded
keyed hash of the key bytes modulo the reducer count, a deterministic
stand-in for an independent uniform choice per key, and the values inside
each reduce record are permuted by a seed derived from (shuffle seed,
key) so nothing downstream can rely on arrival order.

A purely sequential schedule is the reference. ``max_workers > 1`` runs
mapper and reducer workers on a thread pool; results, reports, and event
logs are identical because all metrics are computed from sizes after the
workers finish, in worker-index order.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from . import _kernels
from .errors import (
    BarrierError,
    CombineUdfError,
    InvariantError,
    MapUdfError,
    PipelineTypeError,
    ReduceUdfError,
    UdfContractError,
)
from .metrics import (
    ComplexityReport,
    InvocationKind,
    InvocationMetrics,
    aggregate,
    meter_invocation,
)
from .records import (
    MAP_END,
    MAP_START,
    REDUCE_END,
    REDUCE_START,
    SHUFFLE_DONE,
    ClusterConfig,
    Datum,
    JobSpec,
    KVPair,
    PhaseEventLog,
    ReduceRecord,
    ReducerMode,
    StreamingReducer,
)

# Domain separator so value permutation draws from a different stream than
# reducer routing even though both are keyed on the same bytes.
_PERM_SALT = 0xD1B54A32D192ED03


@dataclass
class MapPhaseResult:
    mapper_outputs: List[List[KVPair]]
    invocations: List[InvocationMetrics]


@dataclass
class ShuffleResult:
    inboxes: List[List[ReduceRecord]]
    shuffle_bytes: int


@dataclass
class ReducePhaseResult:
    outputs: List[KVPair]
    invocations: List[InvocationMetrics]
    worker_peak_memory: List[int]


@dataclass
class JobResult:
    outputs: List[KVPair]
    report: ComplexityReport
    event_log: PhaseEventLog
    elapsed_seconds: float = field(default=0.0, compare=False)


@dataclass
class PipelineResult:
    outputs: List[KVPair]
    reports: List[ComplexityReport]
    event_logs: List[PhaseEventLog]
    phase_count: int


def _record_size(record) -> int:
    if isinstance(record, KVPair):
        return record.pair_size
    size = getattr(record, "size_bytes", None)
    if size is None:
        raise UdfContractError(
            f"input records must be KVPair or expose size_bytes, got {type(record).__name__}"
        )
    return size


def _run_single_mapper(mapper_id: int, indexed_records, spec: JobSpec):
    """Run one mapper's split; returns (pairs, per-record metering args)."""
    pairs: List[KVPair] = []
    meter_args = []  # (in_size, out_sizes, buffered, extra)
    for record_index, record in indexed_records:
        in_size = _record_size(record)
        try:
            produced = spec.map_udf(record)
        except Exception as exc:
            raise MapUdfError(mapper_id, record_index) from exc
        # list/tuple means the UDF held its whole output; anything else is
        # consumed as a stream and gets credited for one pair at a time.
        buffered = isinstance(produced, (list, tuple))
        out_sizes: List[int] = []
        try:
            for item in produced:
                if not isinstance(item, KVPair):
                    raise UdfContractError(
                        f"map UDF must emit KVPair, got {type(item).__name__}"
                    )
                out_sizes.append(item.pair_size)
                pairs.append(item)
        except UdfContractError:
            raise
        except Exception as exc:  # failures inside generator bodies land here
            raise MapUdfError(mapper_id, record_index) from exc
        extra = spec.map_extra_work(record) if spec.map_extra_work is not None else 0
        meter_args.append((in_size, out_sizes, buffered, extra))
    return pairs, meter_args


def _apply_combiner(mapper_id: int, pairs: List[KVPair], spec: JobSpec):
    """Fold a mapper's pairs per key through the combiner, pre-shuffle."""
    groups: dict = {}
    for pair in pairs:
        entry = groups.get(pair.key.payload)
        if entry is None:
            groups[pair.key.payload] = (pair.key, [pair.value])
        else:
            entry[1].append(pair.value)

    combined_pairs: List[KVPair] = []
    invocations: List[InvocationMetrics] = []
    for key_payload, (key, values) in groups.items():
        try:
            folded = list(spec.combine_udf(key, tuple(values)))
        except Exception as exc:
            raise CombineUdfError(mapper_id, key_payload) from exc
        for value in folded:
            if not isinstance(value, Datum):
                raise UdfContractError(
                    f"combine UDF must return Datum values, got {type(value).__name__}"
                )
        group_size = key.size_bytes + sum(v.size_bytes for v in values)
        out_sizes = [key.size_bytes + v.size_bytes for v in folded]
        invocations.append(
            meter_invocation([group_size], out_sizes, 0, kind=InvocationKind.COMBINE)
        )
        combined_pairs.extend(KVPair(key, value) for value in folded)
    return combined_pairs, invocations


def run_map_phase(
    records: Sequence,
    spec: JobSpec,
    log: Optional[PhaseEventLog] = None,
    max_workers: int = 1,
) -> MapPhaseResult:
    """Apply the map UDF to every record, metering each invocation.

    Records go to mappers round-robin by record index. When a combiner is
    configured it is applied once per (mapper, key) group after the mapper
    finishes its split, before the shuffle; those invocations are metered
    into the map phase as well.
    """
    num_mappers = spec.cluster.num_mappers
    splits: List[list] = [[] for _ in range(num_mappers)]
    for index, record in enumerate(records):
        splits[index % num_mappers].append((index, record))

    if max_workers > 1 and num_mappers > 1:
        with ThreadPoolExecutor(max_workers=min(max_workers, num_mappers)) as pool:
            worker_results = list(
                pool.map(
                    lambda mapper_id: _run_single_mapper(mapper_id, splits[mapper_id], spec),
                    range(num_mappers),
                )
            )
    else:
        worker_results = [
            _run_single_mapper(mapper_id, splits[mapper_id], spec)
            for mapper_id in range(num_mappers)
        ]

    mapper_outputs: List[List[KVPair]] = []
    invocations: List[InvocationMetrics] = []
    for mapper_id, (pairs, meter_args) in enumerate(worker_results):
        if log is not None:
            log.append(MAP_START, mapper_id)
        for in_size, out_sizes, buffered, extra in meter_args:
            kind = InvocationKind.MAP_BUFFERED if buffered else InvocationKind.MAP_STREAMED
            invocations.append(meter_invocation([in_size], out_sizes, extra, kind=kind))
        if spec.combine_udf is not None and pairs:
            pairs, combine_invocations = _apply_combiner(mapper_id, pairs, spec)
            invocations.extend(combine_invocations)
        mapper_outputs.append(pairs)
        if log is not None:
            log.append(MAP_END, mapper_id)
    return MapPhaseResult(mapper_outputs, invocations)


def shuffle(
    mapper_outputs: Sequence[Sequence[KVPair]],
    cluster: ClusterConfig,
    log: Optional[PhaseEventLog] = None,
) -> ShuffleResult:
    """Group pairs by key into reduce records and route them to reducers.

    All pairs with an equal key land in exactly one record; the multiset
    of (key, value) pairs is preserved exactly. Record order within an
    inbox is first-arrival order of the key, which is deterministic for a
    given input.
    """
    inboxes: List[List[ReduceRecord]] = [[] for _ in range(cluster.num_reducers)]
    groups: dict = {}
    shuffle_bytes = 0
    for pairs in mapper_outputs:
        for pair in pairs:
            if not isinstance(pair, KVPair):
                raise TypeError(f"shuffle input must be KVPair, got {type(pair).__name__}")
            shuffle_bytes += pair.pair_size
            entry = groups.get(pair.key.payload)
            if entry is None:
                groups[pair.key.payload] = (pair.key, [pair.value])
            else:
                entry[1].append(pair.value)

    seed = cluster.shuffle_seed
    perm_seed = seed ^ _PERM_SALT
    for key_payload, (key, values) in groups.items():
        dest = _kernels.hash_bytes(key_payload, seed) % cluster.num_reducers
        if len(values) > 1:
            order = _kernels.permute_indices(
                len(values), _kernels.hash_bytes(key_payload, perm_seed)
            )
            values = [values[i] for i in order]
        inboxes[dest].append(ReduceRecord(key, values))

    if log is not None:
        log.append(SHUFFLE_DONE)
    return ShuffleResult(inboxes, shuffle_bytes)


def _check_streaming_state(state, reducer_id: int, key: Datum):
    if not isinstance(state, Datum):
        raise UdfContractError(
            f"streaming state for key {key.payload!r} at reducer {reducer_id} "
            f"has no defined size (got {type(state).__name__})"
        )
    return state


def _collect_outputs(produced, outputs: List[KVPair], reducer_id: int, key: Datum):
    out_sizes: List[int] = []
    try:
        for item in produced:
            if not isinstance(item, KVPair):
                raise UdfContractError(
                    f"reduce UDF must emit KVPair, got {type(item).__name__}"
                )
            out_sizes.append(item.pair_size)
            outputs.append(item)
    except UdfContractError:
        raise
    except Exception as exc:
        raise ReduceUdfError(reducer_id, key.payload) from exc
    return out_sizes


def _run_single_reducer(reducer_id: int, inbox, spec: JobSpec):
    """Process one reducer's records strictly one after another."""
    outputs: List[KVPair] = []
    meter_args = []  # (record_size, out_sizes, streaming_peak, extra)
    for record in inbox:
        if not record.values:
            raise InvariantError(
                f"reduce record for key {record.key.payload!r} has no values"
            )
        extra = (
            spec.reduce_extra_work(record.key, record.values)
            if spec.reduce_extra_work is not None
            else 0
        )
        if spec.mode is ReducerMode.BATCHED:
            try:
                produced = spec.reduce_udf(record.key, record.values)
            except Exception as exc:
                raise ReduceUdfError(reducer_id, record.key.payload) from exc
            out_sizes = _collect_outputs(produced, outputs, reducer_id, record.key)
            meter_args.append((record.record_size, out_sizes, None, extra))
        else:
            reducer: StreamingReducer = spec.reduce_udf
            try:
                state = reducer.init(record.key)
            except Exception as exc:
                raise ReduceUdfError(reducer_id, record.key.payload) from exc
            _check_streaming_state(state, reducer_id, record.key)
            peak = 0
            for value in record.values:
                size_before = state.size_bytes
                try:
                    state = reducer.step(state, value)
                except Exception as exc:
                    raise ReduceUdfError(reducer_id, record.key.payload) from exc
                _check_streaming_state(state, reducer_id, record.key)
                held = max(size_before, state.size_bytes) + value.size_bytes
                if held > peak:
                    peak = held
            try:
                produced = reducer.finish(record.key, state)
            except Exception as exc:
                raise ReduceUdfError(reducer_id, record.key.payload) from exc
            out_sizes = _collect_outputs(produced, outputs, reducer_id, record.key)
            meter_args.append((record.record_size, out_sizes, peak, extra))
    return outputs, meter_args


def run_reduce_phase(
    inboxes: Sequence[Sequence[ReduceRecord]],
    spec: JobSpec,
    log: PhaseEventLog,
    max_workers: int = 1,
) -> ReducePhaseResult:
    """Apply the reduce UDF to every record in every inbox.

    Batched reducers see the whole record and are charged its size as
    memory. Streaming reducers are charged, per step, the larger of the
    state before and after the step plus the current value.
    """
    if log is None:
        raise BarrierError("reduce phase requires the event log of a completed shuffle")
    log.require_shuffle_done()
    if len(inboxes) != spec.cluster.num_reducers:
        raise ValueError(
            f"expected {spec.cluster.num_reducers} inboxes, got {len(inboxes)}"
        )

    num_reducers = spec.cluster.num_reducers
    if max_workers > 1 and num_reducers > 1:
        with ThreadPoolExecutor(max_workers=min(max_workers, num_reducers)) as pool:
            worker_results = list(
                pool.map(
                    lambda reducer_id: _run_single_reducer(
                        reducer_id, inboxes[reducer_id], spec
                    ),
                    range(num_reducers),
                )
            )
    else:
        worker_results = [
            _run_single_reducer(reducer_id, inboxes[reducer_id], spec)
            for reducer_id in range(num_reducers)
        ]

    streaming = spec.mode is ReducerMode.STREAMING
    outputs: List[KVPair] = []
    invocations: List[InvocationMetrics] = []
    worker_peaks: List[int] = []
    for reducer_id, (worker_outputs, meter_args) in enumerate(worker_results):
        log.append(REDUCE_START, reducer_id)
        worker_peak = 0
        for record_size, out_sizes, streaming_peak, extra in meter_args:
            kind = (
                InvocationKind.REDUCE_STREAMING
                if streaming
                else InvocationKind.REDUCE_BATCHED
            )
            m = meter_invocation(
                [record_size],
                out_sizes,
                extra,
                kind=kind,
                streaming_peak_memory=streaming_peak,
            )
            invocations.append(m)
            if m.memory_bytes > worker_peak:
                worker_peak = m.memory_bytes
        worker_peaks.append(worker_peak)
        outputs.extend(worker_outputs)
        log.append(REDUCE_END, reducer_id)
    return ReducePhaseResult(outputs, invocations, worker_peaks)


def run_job(records: Sequence, spec: JobSpec, max_workers: int = 1) -> JobResult:
    """Run map, shuffle, and reduce and aggregate the metering."""
    start = time.perf_counter()
    log = PhaseEventLog()
    map_result = run_map_phase(records, spec, log, max_workers)
    shuffle_result = shuffle(map_result.mapper_outputs, spec.cluster, log)
    reduce_result = run_reduce_phase(shuffle_result.inboxes, spec, log, max_workers)
    reduce_records = [
        (record.key.payload, record.record_size)
        for inbox in shuffle_result.inboxes
        for record in inbox
    ]
    streaming = spec.mode is ReducerMode.STREAMING
    report = aggregate(
        map_result.invocations,
        reduce_result.invocations,
        shuffle_bytes=shuffle_result.shuffle_bytes,
        reduce_records=reduce_records,
        streaming_worker_peaks=reduce_result.worker_peak_memory if streaming else None,
    )
    return JobResult(reduce_result.outputs, report, log, time.perf_counter() - start)


def run_pipeline(
    records: Sequence,
    specs: Sequence[JobSpec],
    max_workers: int = 1,
) -> PipelineResult:
    """Chain jobs: the reduce outputs of each job feed the next job's map.

    Record-kind tags of adjacent stages are checked before anything runs.
    """
    if not specs:
        raise ValueError("pipeline needs at least one job")
    for stage, (producer, consumer) in enumerate(zip(specs, specs[1:]), start=1):
        if (
            producer.output_kind is not None
            and consumer.input_kind is not None
            and producer.output_kind != consumer.input_kind
        ):
            raise PipelineTypeError(
                f"stage {stage} outputs {producer.output_kind!r} but stage "
                f"{stage + 1} expects {consumer.input_kind!r}"
            )

    reports: List[ComplexityReport] = []
    event_logs: List[PhaseEventLog] = []
    current: Sequence = records
    for spec in specs:
        result = run_job(current, spec, max_workers)
        reports.append(result.report)
        event_logs.append(result.event_log)
        current = result.outputs
    return PipelineResult(list(current), reports, event_logs, len(specs))
