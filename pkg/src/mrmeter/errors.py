"""Exception hierarchy shared across the package."""


class MrMeterError(Exception):
    """Base class for all mrmeter errors."""


class UdfError(MrMeterError):
    """A user-defined function raised during execution."""


class MapUdfError(UdfError):
    def __init__(self, mapper_id: int, record_index: int):
        self.mapper_id = mapper_id
        self.record_index = record_index
        super().__init__(
            f"map UDF failed on record {record_index} at mapper {mapper_id}"
        )


class CombineUdfError(UdfError):
    def __init__(self, mapper_id: int, key_payload: bytes):
        self.mapper_id = mapper_id
        self.key_payload = key_payload
        super().__init__(
            f"combine UDF failed on key {key_payload!r} at mapper {mapper_id}"
        )


class ReduceUdfError(UdfError):
    def __init__(self, reducer_id: int, key_payload: bytes):
        self.reducer_id = reducer_id
        self.key_payload = key_payload
        super().__init__(
            f"reduce UDF failed on key {key_payload!r} at reducer {reducer_id}"
        )


class UdfContractError(MrMeterError):
    """A UDF returned something the engine cannot meter or route."""


class BarrierError(MrMeterError):
    """A phase was started before its predecessor completed."""


class InvariantError(MrMeterError):
    """An internal engine invariant was violated."""


class PipelineTypeError(MrMeterError):
    """Adjacent pipeline stages disagree about the record kind."""


class EmptyInputError(MrMeterError):
    """An operation that needs at least one record got none."""


class WorkloadError(MrMeterError):
    """Workload generation or file handling failed."""


class FormatError(WorkloadError):
    """A workload or report file is malformed."""

    def __init__(self, source: str, line_no: int, message: str):
        self.source = source
        self.line_no = line_no
        super().__init__(f"{source}:{line_no}: {message}")


class InfeasibleGraphError(WorkloadError):
    """The requested graph shape cannot satisfy its degree constraints."""


class SweepSpecError(MrMeterError):
    """A sweep specification violates the experiment preconditions."""


class UnknownClaimError(MrMeterError):
    def __init__(self, claim_id: str):
        self.claim_id = claim_id
        super().__init__(f"unknown claim id: {claim_id}")


class NonPositiveMetricError(MrMeterError):
    """Power-law fitting was asked to log a non-positive metric value."""
