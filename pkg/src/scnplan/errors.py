"""Exception types shared across the toolkit."""


class ScnPlanError(Exception):
    """Base class for all toolkit errors."""


class TopologyError(ScnPlanError):
    """Malformed or invalid topology document."""


class ModulationReachError(ScnPlanError):
    """No modulation format reaches far enough for the given path length."""


class AllocationError(ScnPlanError):
    """Base class for resource-ledger violations."""


class LaneConflictError(AllocationError):
    """Lane already occupied on at least one link of the requested path."""


class CapacityError(AllocationError):
    """Requested spectrum exceeds what the lane or spatial channel can hold."""


class PairMismatchError(AllocationError):
    """Channel added to a spatial channel of a different node pair."""


class GridRangeError(AllocationError):
    """Frequency-slot interval falls outside the lane grid."""


class GuardBandError(AllocationError):
    """Block placed too close to a neighboring block of another node pair."""


class OracleLimitError(ScnPlanError):
    """Instance exceeds the configured exhaustive-search limits."""


class InfeasibleInstanceError(ScnPlanError):
    """No assignment exists within the instance's resources."""


class UndefinedStatisticError(ScnPlanError):
    """Statistic requested on too few samples (e.g. a CI with n < 2)."""
