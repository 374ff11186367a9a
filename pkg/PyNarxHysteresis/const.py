"""Constants for PyNarxHysteresis."""

FORMAT_VERSION = 1  # Version field written into every artifact file

# Numerical tolerances
TOL_EQ = 1e-9  # Σ_y = 1 classification band
TOL_DENOMINATOR = 1e-12  # Quasi-static |1 - a(u)| and |b_τd| lower bounds
TOL_CONSTRAINT = 1e-10  # ‖Sθ - c‖∞ after constrained estimation
TOL_ERR_TIE = 1e-12  # Relative ERR gap treated as a tie
TOL_SAMPLING_JITTER = 1e-9  # Relative time-step jitter accepted in datasets
CONDITION_WARNING = 1e12  # Condition number that triggers a warning
DIVERGENCE_THRESHOLD = 1e12  # |value| aborting free run and law evaluation

# Bouc-Wen piezoelectric actuator benchmark
DEFAULT_D_P = 1.6  # µm/V
DEFAULT_A = 0.9  # µm/V
DEFAULT_BETA = 0.008  # 1/V
DEFAULT_GAMMA = 0.008  # 1/V

DEFAULT_DT = 0.001  # s, RK4 integration step
DEFAULT_SAMPLE_TIME = 0.001  # s
DEFAULT_TRAINING_DURATION = 50.0  # s

# Excitation
DEFAULT_CUTOFF_HZ = 1.0
DEFAULT_FILTER_ORDER = 5
DEFAULT_EXCITATION_AMPLITUDE = 70.0  # V, peak of the filtered noise
NOISE_GENERATOR = "numpy.random.PCG64/standard_normal"

# Validation and reference signals
DEFAULT_VALIDATION_AMPLITUDE = 40.0  # V
DEFAULT_REFERENCE_AMPLITUDE = 40.0  # µm
DEFAULT_SIGNAL_FREQ_HZ = 1.0
HOLD_VOLTAGE = 16.8  # V, input freeze value of the hold-point scenario

# β sweep
BETA_SWEEP_START = 0.004
BETA_SWEEP_STOP = 0.1
BETA_SWEEP_STEP = 0.002

# Sampling-time sweep (s)
DEFAULT_SWEEP_SAMPLE_TIMES = (0.001, 0.002, 0.005, 0.01, 0.02)

# CLI exit codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_STRUCTURAL = 4

# File names inside an output directory
MANIFEST_FILE = "manifest.json"
REPORT_FILE = "report.json"
