#!/usr/bin/env python3
"""One-shot script comparing the two compensation strategies on the Bouc-Wen benchmark.

Identifies the direct and the inverse model from the given configuration
(pass one with fixed structures to reproduce the published compensators),
synthesizes both laws, drives the simulated actuator and logs a summary
table next to the uncompensated baseline. Checks each row against the
benchmark tolerances.

Usage:
    cd repos/PyNarxHysteresis/script
    source ../venv/bin/activate
    python compare_strategies.py [experiment.json]
"""

import logging
import sys
from typing import Dict, List, Tuple

from PyNarxHysteresis.config import load_experiment_config
from PyNarxHysteresis.exceptions import NarxHysteresisError
from PyNarxHysteresis.pipeline import (
    compensate,
    identify,
    synthesize,
    training_data,
    validate_model,
    validation_data,
)
from PyNarxHysteresis.types import CompensationStrategy

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s [%(levelname)s] %(message)s",
    datefmt="%H:%M:%S",
)
_LOGGER = logging.getLogger(__name__)

# Acceptance bands: (strategy, max tracking MAPE %, NSAVI range)
BANDS: List[Tuple[str, float, Tuple[float, float]]] = [
    ("direct", 1.0, (1.0, 1.35)),
    ("inverse", 1.0, (1.0, 1.35)),
]
BASELINE_BAND = (5.5, 7.5)  # uncompensated MAPE %


def main() -> bool:
    """Identify, synthesize and evaluate both strategies, then summarize."""
    config = load_experiment_config(sys.argv[1] if len(sys.argv) > 1 else None)

    # 1. Training and validation records
    u, y, _ = training_data(config)
    u_val, y_val, _ = validation_data(config)
    _LOGGER.info("Training record: %d sample(s)", len(u))

    results: List[Dict[str, float | str | bool]] = []
    baseline = None
    for name, max_mape, (nsavi_lo, nsavi_hi) in BANDS:
        strategy = CompensationStrategy(name)
        try:
            # 2. Identify and validate
            model = identify(config, u, y, inverse=strategy is CompensationStrategy.INVERSE).model
            _, _, model_mape = validate_model(model, u_val, y_val, transient_skip=1000)

            # 3. Synthesize and close the chain
            chain = compensate(
                config, synthesize(model, strategy), with_baseline=baseline is None
            )
        except NarxHysteresisError as exc:
            _LOGGER.error("%s strategy failed: %s", name, exc)
            results.append({"strategy": name, "ok": False, "reason": str(exc)})
            continue

        if chain.baseline is not None:
            baseline = chain.baseline
        ok = chain.mape <= max_mape and nsavi_lo <= chain.nsavi <= nsavi_hi
        results.append(
            {
                "strategy": name,
                "ok": ok,
                "model_mape": model_mape,
                "mape": chain.mape,
                "nsavi": chain.nsavi,
            }
        )

    # 4. Print summary
    _LOGGER.info("\n=== Compensation Strategy Summary ===")
    baseline_ok = baseline is not None and (
        BASELINE_BAND[0] <= baseline["mape"] <= BASELINE_BAND[1]
    )
    if baseline is not None:
        _LOGGER.info(
            "  none: MAPE=%.3f %%, NSAVI=%.3f%s",
            baseline["mape"],
            baseline["nsavi"],
            "" if baseline_ok else " (OUT OF BAND)",
        )
    for r in results:
        if "reason" in r:
            _LOGGER.info("  %s: FAILED (%s)", r["strategy"], r["reason"])
        else:
            _LOGGER.info(
                "  %s: model MAPE=%.3f %%, tracking MAPE=%.3f %%, NSAVI=%.3f%s",
                r["strategy"],
                r["model_mape"],
                r["mape"],
                r["nsavi"],
                "" if r["ok"] else " (OUT OF BAND)",
            )

    all_ok = baseline_ok and all(r["ok"] for r in results)
    if all_ok:
        _LOGGER.info("Both strategies within the benchmark bands.")
    else:
        _LOGGER.warning("Some results fell outside the bands - check output above.")

    return all_ok


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
