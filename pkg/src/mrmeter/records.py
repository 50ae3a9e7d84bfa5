"""Record types, job definitions, and the phase event log.

Every size measure in the package is defined on :class:`Datum` payload
lengths. Integers and floats travel as fixed 8-byte big-endian payloads so
their sizes are unambiguous; byte strings are carried as-is. The framed
wire encoding (4-byte length prefix per datum) is only used when records
are serialized to a byte stream and is not part of the size measure.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Optional, Sequence, Union

from .errors import BarrierError

_I64 = struct.Struct(">q")
_F64 = struct.Struct(">d")
_U32 = struct.Struct(">I")


class Datum:
    """An immutable byte payload, the unit all sizes are measured on."""

    __slots__ = ("payload",)

    def __init__(self, payload) -> None:
        if not isinstance(payload, (bytes, bytearray, memoryview)):
            raise TypeError(f"Datum payload must be bytes, got {type(payload).__name__}")
        self.payload = bytes(payload)

    @classmethod
    def from_int(cls, value: int) -> "Datum":
        return cls(_I64.pack(value))

    @classmethod
    def from_float(cls, value: float) -> "Datum":
        return cls(_F64.pack(value))

    @classmethod
    def from_text(cls, text: str) -> "Datum":
        return cls(text.encode("utf-8"))

    def as_int(self) -> int:
        return _I64.unpack(self.payload)[0]

    def as_float(self) -> float:
        return _F64.unpack(self.payload)[0]

    def as_text(self) -> str:
        return self.payload.decode("utf-8")

    @property
    def size_bytes(self) -> int:
        return len(self.payload)

    def __eq__(self, other) -> bool:
        return isinstance(other, Datum) and self.payload == other.payload

    def __hash__(self) -> int:
        return hash(self.payload)

    def __repr__(self) -> str:
        return f"Datum({self.payload!r})"


class KVPair:
    """A key/value pair, the unit that crosses the shuffle."""

    __slots__ = ("key", "value")

    def __init__(self, key: Datum, value: Datum) -> None:
        if not isinstance(key, Datum) or not isinstance(value, Datum):
            raise TypeError("KVPair key and value must be Datum")
        self.key = key
        self.value = value

    @property
    def pair_size(self) -> int:
        return self.key.size_bytes + self.value.size_bytes

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, KVPair)
            and self.key == other.key
            and self.value == other.value
        )

    def __hash__(self) -> int:
        return hash((self.key.payload, self.value.payload))

    def __repr__(self) -> str:
        return f"KVPair({self.key!r}, {self.value!r})"


class ReduceRecord:
    """All values that share a key, in shuffle-seeded order.

    The value order is an artifact of the shuffle seed and carries no
    meaning; reducers must not rely on it.
    """

    __slots__ = ("key", "values")

    def __init__(self, key: Datum, values) -> None:
        if not isinstance(key, Datum):
            raise TypeError("ReduceRecord key must be Datum")
        self.key = key
        self.values = tuple(values)

    @property
    def record_size(self) -> int:
        return self.key.size_bytes + sum(v.size_bytes for v in self.values)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ReduceRecord)
            and self.key == other.key
            and self.values == other.values
        )

    def __repr__(self) -> str:
        return f"ReduceRecord({self.key!r}, {len(self.values)} values)"


def canonical_sorted(pairs: Iterable[KVPair]) -> list:
    """Sort pairs by (key bytes, value bytes); used to compare outputs."""
    return sorted(pairs, key=lambda p: (p.key.payload, p.value.payload))


def encode_datum(datum: Datum) -> bytes:
    return _U32.pack(datum.size_bytes) + datum.payload


def encode_pairs(pairs: Iterable[KVPair]) -> bytes:
    chunks = []
    for pair in pairs:
        chunks.append(encode_datum(pair.key))
        chunks.append(encode_datum(pair.value))
    return b"".join(chunks)


def _decode_datum(data: bytes, offset: int):
    if offset + 4 > len(data):
        raise ValueError("truncated datum header")
    (length,) = _U32.unpack_from(data, offset)
    offset += 4
    if offset + length > len(data):
        raise ValueError("truncated datum payload")
    return Datum(data[offset : offset + length]), offset + length


def decode_pairs(data: bytes) -> list:
    pairs = []
    offset = 0
    while offset < len(data):
        key, offset = _decode_datum(data, offset)
        value, offset = _decode_datum(data, offset)
        pairs.append(KVPair(key, value))
    return pairs


class ReducerMode(Enum):
    BATCHED = "batched"
    STREAMING = "streaming"


@dataclass(frozen=True)
class ClusterConfig:
    """Shape and seed of a run: mapper count, reducer count, shuffle seed."""

    num_mappers: int
    num_reducers: int
    shuffle_seed: int = 0

    def __post_init__(self) -> None:
        if self.num_mappers < 1:
            raise ValueError(f"num_mappers must be >= 1, got {self.num_mappers}")
        if self.num_reducers < 1:
            raise ValueError(f"num_reducers must be >= 1, got {self.num_reducers}")


@dataclass(frozen=True)
class StreamingReducer:
    """Reducer that consumes a record one value at a time.

    ``init(key)`` returns the starting state, ``step(state, value)`` the
    next state, ``finish(key, state)`` the output pairs. State must be a
    Datum so the framework can meter its size.
    """

    init: Callable[[Datum], Datum]
    step: Callable[[Datum, Datum], Datum]
    finish: Callable[[Datum, Datum], Iterable[KVPair]]


BatchedReducer = Callable[[Datum, Sequence[Datum]], Iterable[KVPair]]


@dataclass(frozen=True)
class JobSpec:
    """One map/shuffle/reduce job: UDFs, reducer mode, and cluster shape.

    ``map_extra_work`` / ``reduce_extra_work`` let a UDF declare abstract
    work beyond the bytes it touches; both default to zero. ``input_kind``
    and ``output_kind`` are free-form tags checked when jobs are chained
    into a pipeline.
    """

    map_udf: Callable[[object], Iterable[KVPair]]
    reduce_udf: Union[BatchedReducer, StreamingReducer]
    mode: ReducerMode
    cluster: ClusterConfig
    combine_udf: Optional[Callable[[Datum, Sequence[Datum]], Sequence[Datum]]] = None
    map_extra_work: Optional[Callable[[object], int]] = None
    reduce_extra_work: Optional[Callable[[Datum, Sequence[Datum]], int]] = None
    input_kind: Optional[str] = None
    output_kind: Optional[str] = None

    def __post_init__(self) -> None:
        streaming = isinstance(self.reduce_udf, StreamingReducer)
        if self.mode is ReducerMode.STREAMING and not streaming:
            raise TypeError("streaming mode requires a StreamingReducer")
        if self.mode is ReducerMode.BATCHED and streaming:
            raise TypeError("batched mode requires a plain callable reducer")


MAP_START = "map_start"
MAP_END = "map_end"
SHUFFLE_DONE = "shuffle_done"
REDUCE_START = "reduce_start"
REDUCE_END = "reduce_end"


@dataclass(frozen=True)
class PhaseEvent:
    kind: str
    worker: Optional[int]
    timestamp: int


class PhaseEventLog:
    """Append-only event log with logical timestamps.

    Timestamps are assigned by append order, which the engine keeps
    schedule-independent: two runs of the same job produce identical logs
    no matter how workers were scheduled.
    """

    def __init__(self) -> None:
        self.events: list = []
        self._clock = 0

    def append(self, kind: str, worker: Optional[int] = None) -> PhaseEvent:
        self._clock += 1
        event = PhaseEvent(kind, worker, self._clock)
        self.events.append(event)
        return event

    def timestamps(self, kind: str) -> list:
        return [e.timestamp for e in self.events if e.kind == kind]

    def has(self, kind: str) -> bool:
        return any(e.kind == kind for e in self.events)

    def require_shuffle_done(self) -> None:
        if not self.has(SHUFFLE_DONE):
            raise BarrierError("reduce phase requires a completed shuffle")

    def bsp_holds(self) -> bool:
        """True when every reduce start follows every map end."""
        map_ends = self.timestamps(MAP_END)
        reduce_starts = self.timestamps(REDUCE_START)
        if not map_ends or not reduce_starts:
            return True
        return min(reduce_starts) > max(map_ends)

    def verify_bsp(self) -> None:
        if not self.bsp_holds():
            raise BarrierError("a reducer started before all mappers finished")

    def to_text(self) -> str:
        lines = []
        for e in self.events:
            worker = "-" if e.worker is None else str(e.worker)
            lines.append(f"{e.timestamp}\t{e.kind}\t{worker}")
        return "\n".join(lines) + ("\n" if lines else "")

    def __eq__(self, other) -> bool:
        return isinstance(other, PhaseEventLog) and self.events == other.events

    def __repr__(self) -> str:
        return f"PhaseEventLog({len(self.events)} events)"
