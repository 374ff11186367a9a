"""PyNarxHysteresis Types"""

from enum import Enum
from typing import Dict, TypedDict


class SignalKind(Enum):
    """Signals a NARX regressor factor can be built from"""

    OUTPUT = "y"
    INPUT = "u"
    PHI1 = "phi1"  # u[k] - u[k-1]
    PHI2 = "phi2"  # sign(phi1)

    @property
    def order(self) -> int:
        """Position used for canonical factor ordering."""
        return _SIGNAL_ORDER[self]

    @property
    def is_phi(self) -> bool:
        return self in (SignalKind.PHI1, SignalKind.PHI2)


_SIGNAL_ORDER: Dict[SignalKind, int] = {
    SignalKind.OUTPUT: 0,
    SignalKind.INPUT: 1,
    SignalKind.PHI1: 2,
    SignalKind.PHI2: 3,
}


class ExclusionRule(Enum):
    """Candidate-term exclusion rules for pool generation"""

    OUTPUT_POWER = "output_power"  # y^p, p > 1, alone or times phi factors
    PHI2_POWER = "phi2_power"  # phi2^m, m > 1
    OUTPUT_INPUT_CROSS = "output_input_cross"  # y^p * u^m without phi factors
    DELAY_NONLINEAR = "delay_nonlinear"  # nonlinear use of u[k - tau_d]


class Branch(Enum):
    """Quasi-static branch of a hysteresis loop"""

    LOADING = "loading"
    UNLOADING = "unloading"

    @property
    def phi2(self) -> float:
        return 1.0 if self is Branch.LOADING else -1.0


class SteadyStateClass(Enum):
    """Steady-state behaviour implied by the linear output parameters"""

    SINGLE_FIXED_POINT = "single_fixed_point"
    CONTINUUM = "continuum"
    DIVERGING = "diverging"


class LawKind(Enum):
    """How a compensator law was obtained"""

    DIRECT = "direct"  # algebraic rearrangement of a direct model
    INVERSE = "inverse"  # substitution into an identified inverse model


class LawSignalKind(Enum):
    """Signals a compensator law factor can be built from"""

    REFERENCE = "r"
    COMPENSATION = "m"
    REFERENCE_DIFF = "dr"  # r[j] - r[j-1]
    REFERENCE_SIGN = "sr"  # sign(r[j] - r[j-1])
    COMPENSATION_DIFF = "dm"  # m[j] - m[j-1]
    COMPENSATION_SIGN = "sm"  # sign(m[j] - m[j-1])

    @property
    def reads_compensation(self) -> bool:
        return self in (
            LawSignalKind.COMPENSATION,
            LawSignalKind.COMPENSATION_DIFF,
            LawSignalKind.COMPENSATION_SIGN,
        )

    @property
    def is_difference(self) -> bool:
        return self not in (LawSignalKind.REFERENCE, LawSignalKind.COMPENSATION)


class CompensationStrategy(Enum):
    """Compensator used in a closed-chain evaluation"""

    DIRECT = "direct"
    INVERSE = "inverse"
    NONE = "none"


class BoucWenParamsDict(TypedDict):
    d_p: float  # µm/V
    A: float  # µm/V
    beta: float  # 1/V
    gamma: float  # 1/V


class DatasetMetadata(TypedDict):
    """Sidecar metadata stored next to a dataset file"""

    format_version: int
    source: str  # filtered_noise, sinusoid, compensation, ...
    sample_time: float  # s
    dt: float | None  # s, integration step of the simulator
    n_samples: int
    seed: int | None
    generator: str | None
    params: BoucWenParamsDict | None


class LoopGeometry(TypedDict):
    """Shape of one steady u x y loop"""

    beta: float | None  # 1/V, set by beta_sweep
    output_span: float  # max(y) - min(y)
    max_opening: float  # largest vertical gap between the two branches
    area: float  # signed, counter-clockwise positive
    diverged: bool


class SamplingSweepRow(TypedDict):
    sample_time: float  # s
    model_mape: float  # %
    tracking_mape: float  # %


class MetricsSummary(TypedDict):
    """Tracking metrics of one closed-chain evaluation"""

    mape: float  # %
    nsavi: float
    n_samples: int
    transient_skip: int
