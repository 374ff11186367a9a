"""Command-line front end for the identification and compensation pipelines"""

import argparse
from datetime import datetime, timezone
import json
import logging
from pathlib import Path
import sys
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np

from .__version__ import __version__
from .analysis import quasi_static_solve, representative_phi1
from .config import (
    ExperimentConfig,
    default_config_path,
    load_experiment_config,
    override_sections,
)
from .const import EXIT_OK, MANIFEST_FILE, REPORT_FILE
from .exceptions import ConfigError, DataFormatError, NarxHysteresisError
from .narx import Signal
from .pipeline import (
    compensate,
    excitation_signal,
    identify,
    sweep_beta,
    sweep_sampling,
    synthesize,
    training_data,
    validation_data,
)
from .storage import (
    read_dataset,
    read_json,
    read_law,
    read_model,
    read_signal,
    sha256_file,
    write_columns,
    write_curve,
    write_dataset,
    write_json,
    write_law,
    write_model,
    write_selection_report,
    write_signal,
)
from .types import Branch, CompensationStrategy

_LOGGER = logging.getLogger(__name__)

Artifacts = Tuple[List[Path], List[Path]]  # (inputs, outputs)
Handler = Callable[[argparse.Namespace, ExperimentConfig], Artifacts]

REPORTED_KINDS = ("identification", "metrics", "sampling_sweep", "beta_sweep")


def _out(args: argparse.Namespace, name: str) -> Path:
    return Path(args.out) / name


def _given(**values: Any) -> Dict[str, Any]:
    return {key: value for key, value in values.items() if value is not None}


def cmd_simulate_plant(args: argparse.Namespace, config: ExperimentConfig) -> Artifacts:
    config = override_sections(
        config,
        {
            "simulation": _given(dt=args.dt, sample_time=args.sample_time),
            "plant": _given(d_p=args.d_p, A=args.A, beta=args.beta, gamma=args.gamma),
        },
    )
    if args.signal == "validation":
        u, y, metadata = validation_data(config)
    else:
        u, y, metadata = training_data(config, duration=args.duration)
    path = _out(args, args.name or f"{args.signal}.csv")
    write_dataset(path, u, y, metadata)
    return [], [path]


def cmd_excite(args: argparse.Namespace, config: ExperimentConfig) -> Artifacts:
    u, metadata = excitation_signal(config, duration=args.duration)
    path = _out(args, "excitation.csv")
    write_signal(path, u, name="u", metadata=metadata)
    return [], [path]


def cmd_identify(args: argparse.Namespace, config: ExperimentConfig) -> Artifacts:
    dataset = Path(args.dataset)
    u, y, _ = read_dataset(dataset)
    result = identify(
        config,
        u,
        y,
        inverse=args.inverse,
        tau_s=args.tau_s,
        constrain=False if args.no_constraint else None,
    )
    prefix = "inverse_" if args.inverse else ""
    model_path = _out(args, f"{prefix}model.json")
    report_path = _out(args, f"{prefix}identification.json")
    write_model(model_path, result.model)
    write_json(report_path, {"kind": "identification", "dataset": str(dataset), **result.summary()})
    outputs = [model_path, report_path]
    if result.report is not None:
        selection_path = _out(args, f"{prefix}selection.csv")
        write_selection_report(selection_path, result.report)
        outputs.append(selection_path)
    return [dataset], outputs


def cmd_analyze(args: argparse.Namespace, config: ExperimentConfig) -> Artifacts:
    model_path = Path(args.model)
    model = read_model(model_path)
    if args.points < 1:
        raise ConfigError(f"Grid size must be >= 1, got {args.points}", key_path="points")
    phi1 = args.phi1
    if phi1 is None:
        u_val, _, _ = validation_data(config)
        phi1 = representative_phi1(u_val)
    grid = np.linspace(args.u_min, args.u_max, args.points)
    outputs: List[Path] = []
    for branch in Branch:
        value = abs(phi1) if branch is Branch.LOADING else -abs(phi1)
        curve = quasi_static_solve(model, grid, value, branch)
        path = _out(args, f"curve_{branch.value}.csv")
        write_curve(path, curve)
        outputs.append(path)
    return [model_path], outputs


def cmd_synthesize(args: argparse.Namespace, config: ExperimentConfig) -> Artifacts:
    model_path = Path(args.model)
    model = read_model(model_path)
    strategy = None if args.strategy is None else CompensationStrategy(args.strategy)
    law = synthesize(model, strategy)
    path = _out(args, args.name or f"law_{law.kind.value}.json")
    write_law(path, law)
    return [model_path], [path]


def cmd_compensate(args: argparse.Namespace, config: ExperimentConfig) -> Artifacts:
    inputs: List[Path] = []
    law = None
    if not args.no_compensation:
        if args.law is None:
            raise ConfigError("compensate needs --law or --no-compensation", key_path="law")
        inputs.append(Path(args.law))
        law = read_law(Path(args.law))
    reference: Signal | None = None
    if args.reference is not None:
        inputs.append(Path(args.reference))
        reference = read_signal(Path(args.reference), name="r")
    chain = compensate(config, law, reference, with_baseline=args.baseline)

    strategy = "none" if law is None else law.kind.value
    signals_path = _out(args, f"compensation_{strategy}.csv")
    metrics_path = _out(args, f"metrics_{strategy}.json")
    write_columns(
        signals_path,
        chain.reference.sample_time,
        {"r": chain.reference.samples, "m": chain.m.samples, "y": chain.y.samples},
    )
    write_json(
        metrics_path,
        {
            "kind": "metrics",
            "strategy": strategy,
            "metrics": dict(chain.metrics),
            "baseline": None if chain.baseline is None else dict(chain.baseline),
        },
    )
    return inputs, [signals_path, metrics_path]


def cmd_sweep_sampling(args: argparse.Namespace, config: ExperimentConfig) -> Artifacts:
    rows = sweep_sampling(config, args.sample_times)
    path = _out(args, "sweep_sampling.json")
    write_json(path, {"kind": "sampling_sweep", "rows": [dict(row) for row in rows]})
    return [], [path]


def cmd_sweep_beta(args: argparse.Namespace, config: ExperimentConfig) -> Artifacts:
    records = sweep_beta(config)
    path = _out(args, "sweep_beta.json")
    write_json(path, {"kind": "beta_sweep", "records": [dict(r) for r in records]})
    return [], [path]


def cmd_report(args: argparse.Namespace, config: ExperimentConfig) -> Artifacts:
    out_dir = Path(args.out)
    manifest = _read_manifest(out_dir / MANIFEST_FILE)
    if manifest is None:
        raise DataFormatError(f"No manifest in {out_dir}")
    entries: Dict[str, Any] = {}
    inputs: List[Path] = []
    for name in sorted(manifest["artifacts"]):
        path = out_dir / name
        if path.suffix != ".json" or not path.exists():
            continue
        data = read_json(path)
        if data.get("kind") in REPORTED_KINDS:
            entries[name] = data
            inputs.append(path)
    report_path = out_dir / REPORT_FILE
    write_json(report_path, {"kind": "report", "entries": entries})
    _LOGGER.info("Report of %d artifact(s) written to %s", len(entries), report_path)
    return inputs, [report_path]


COMMANDS: Dict[str, Handler] = {
    "simulate-plant": cmd_simulate_plant,
    "excite": cmd_excite,
    "identify": cmd_identify,
    "analyze": cmd_analyze,
    "synthesize": cmd_synthesize,
    "compensate": cmd_compensate,
    "sweep-sampling": cmd_sweep_sampling,
    "sweep-beta": cmd_sweep_beta,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="narx-hysteresis",
        description="Gray-box NARX identification and feedforward hysteresis compensation",
    )
    parser.add_argument("--config", help="experiment JSON (default: shipped benchmark settings)")
    parser.add_argument("--seed", type=int, help="override simulation.seed")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-plant", help="simulate the Bouc-Wen actuator")
    p.add_argument("--signal", choices=("training", "validation"), default="training")
    p.add_argument("--duration", type=float, help="override simulation.duration (s)")
    p.add_argument("--name", help="dataset file name")
    p.add_argument("--dt", type=float, help="override simulation.dt (s)")
    p.add_argument("--sample-time", type=float, help="override simulation.sample_time (s)")
    p.add_argument("--d-p", type=float, help="override plant.d_p (µm/V)")
    p.add_argument("--A", type=float, help="override plant.A (µm/V)")
    p.add_argument("--beta", type=float, help="override plant.beta (1/V)")
    p.add_argument("--gamma", type=float, help="override plant.gamma (1/V)")

    p = sub.add_parser("excite", help="write the filtered-noise excitation")
    p.add_argument("--duration", type=float, help="override simulation.duration (s)")

    p = sub.add_parser("identify", help="select and estimate a model from a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--inverse", action="store_true", help="identify the inverse model")
    p.add_argument("--tau-s", type=int, help="override inverse.tau_s")
    p.add_argument("--no-constraint", action="store_true", help="plain least squares")

    p = sub.add_parser("analyze", help="quasi-static branches of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--u-min", type=float, default=-70.0)
    p.add_argument("--u-max", type=float, default=70.0)
    p.add_argument("--points", type=int, default=281)
    p.add_argument("--phi1", type=float, help="input increment (default: validation mean |du|)")

    p = sub.add_parser("synthesize", help="compensator law from a model")
    p.add_argument("--model", required=True)
    p.add_argument("--strategy", choices=("direct", "inverse"))
    p.add_argument("--name", help="law file name")

    p = sub.add_parser("compensate", help="closed-chain evaluation on the plant")
    p.add_argument("--law")
    p.add_argument("--no-compensation", action="store_true", help="drive the plant with r")
    p.add_argument("--reference", help="reference CSV with column r (default: config sinusoid)")
    p.add_argument("--baseline", action="store_true", help="also score m = r")

    p = sub.add_parser("sweep-sampling", help="MAPE against the sampling time")
    p.add_argument("--sample-times", type=float, nargs="+")

    sub.add_parser("sweep-beta", help="loop geometry against beta")
    sub.add_parser("report", help="aggregate the results listed in the manifest")
    return parser


def _read_manifest(path: Path) -> Dict[str, Any] | None:
    if not path.exists():
        return None
    return read_json(path)


def _entry(path: Path) -> Dict[str, str]:
    return {"path": str(path), "sha256": sha256_file(path)}


def update_manifest(
    out_dir: Path,
    args: argparse.Namespace,
    config: ExperimentConfig,
    config_path: Path,
    artifacts: Artifacts,
    started: str,
) -> Path:
    """Record a command run and merge its outputs into the directory manifest."""
    path = out_dir / MANIFEST_FILE
    manifest = _read_manifest(path) or {"kind": "manifest", "runs": [], "artifacts": {}}
    inputs, outputs = artifacts
    run = {
        "command": args.command,
        "tool_version": __version__,
        "config": str(config_path),
        "config_sha256": sha256_file(config_path),
        "seed": config.simulation.seed,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "inputs": [_entry(p) for p in inputs],
        "outputs": [_entry(p) for p in outputs],
    }
    manifest["runs"].append(run)
    for p in outputs:
        manifest["artifacts"][p.name] = {"sha256": sha256_file(p), "command": args.command}
    manifest.pop("format_version", None)
    write_json(path, manifest)
    return path


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s [%(levelname)s] %(message)s",
    )
    started = datetime.now(timezone.utc).isoformat()
    config_path = Path(args.config) if args.config else default_config_path()
    try:
        config = load_experiment_config(config_path)
        if args.seed is not None:
            config = config.model_copy(
                update={"simulation": config.simulation.model_copy(update={"seed": args.seed})}
            )
        artifacts = COMMANDS[args.command](args, config)
        update_manifest(Path(args.out), args, config, config_path, artifacts, started)
    except NarxHysteresisError as exc:
        if exc.detail:
            _LOGGER.debug("%s", exc.detail)
        _LOGGER.error("%s failed: %s", args.command, exc)
        sys.stderr.write(
            f"error code={exc.exit_code} kind={type(exc).__name__} "
            f"message={json.dumps(str(exc))}\n"
        )
        return exc.exit_code
    return EXIT_OK
