"""Artifact files: datasets, models, laws, curves and reports"""

import csv
import hashlib
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence, Tuple, cast

import numpy as np

from .analysis import QuasiStaticCurve
from .compensation import CompensatorLaw, LawFactor, LawTerm
from .const import FORMAT_VERSION, TOL_SAMPLING_JITTER
from .estimation import SelectionReport
from .exceptions import ConfigError, DataFormatError, StructuralError
from .helper import FloatArray
from .narx import NarxModel, Signal
from .terms import Term, parse_term
from .types import DatasetMetadata, LawKind, LawSignalKind

_LOGGER = logging.getLogger(__name__)

TIME_COLUMN = "time_s"
DATASET_COLUMNS = ("u", "y")
SELECTION_COLUMNS = ("term", "err", "cumulative_err", "aic", "selected")


def atomic_write_text(path: Path, text: str) -> None:
    """Write a file through a temporary sibling and an atomic rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_file = path.with_name(path.name + ".tmp")
    with temp_file.open("w", encoding="utf-8", newline="") as f:
        f.write(text)
    temp_file.replace(path)
    _LOGGER.debug("Wrote %s", path)


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def metadata_path(path: Path) -> Path:
    return path.with_name(path.stem + ".meta.json")


def write_json(path: Path, payload: Mapping[str, Any]) -> None:
    body = {"format_version": FORMAT_VERSION, **payload}
    atomic_write_text(path, json.dumps(body, indent=2) + "\n")


def read_json(path: Path) -> Dict[str, Any]:
    try:
        with path.open(encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as exc:
        raise DataFormatError(f"File not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"Invalid JSON in {path}: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise DataFormatError(f"{path} does not hold a JSON object")
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise DataFormatError(
            f"{path} has format version {version!r}, expected {FORMAT_VERSION}"
        )
    return data


def write_columns(
    path: Path,
    sample_time: float,
    columns: Mapping[str, Sequence[float] | FloatArray],
    metadata: DatasetMetadata | None = None,
) -> None:
    """Write equal-length columns with a leading time column and a sidecar."""
    names = list(columns)
    values = [np.asarray(columns[name], dtype=float) for name in names]
    n = len(values[0]) if values else 0
    if any(len(v) != n for v in values):
        raise DataFormatError(f"Columns of {path.name} have different lengths")
    time = np.arange(n, dtype=float) * sample_time

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([TIME_COLUMN, *names])
    for i in range(n):
        writer.writerow([repr(float(time[i])), *(repr(float(v[i])) for v in values)])
    atomic_write_text(path, buffer.getvalue())

    meta: Dict[str, Any] = {
        "source": "unknown",
        "dt": None,
        "seed": None,
        "generator": None,
        "params": None,
        **(metadata or {}),
        "format_version": FORMAT_VERSION,
        "sample_time": sample_time,
        "n_samples": n,
    }
    atomic_write_text(metadata_path(path), json.dumps(meta, indent=2) + "\n")


def _parse_float(text: str, line: int, column: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise DataFormatError(
            f"Line {line}: cannot parse {column} value '{text}'", line=line
        ) from exc


def _read_metadata(meta_file: Path) -> DatasetMetadata | None:
    """Sidecar of a delimited file, None when there is none."""
    if not meta_file.exists():
        return None
    try:
        metadata = json.loads(meta_file.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormatError(
            f"Invalid JSON in {meta_file.name} at line {exc.lineno}: {exc.msg}", line=exc.lineno
        ) from exc
    if not isinstance(metadata, dict):
        raise DataFormatError(f"{meta_file.name} does not hold a JSON object")
    if "sample_time" not in metadata:
        raise DataFormatError(f"{meta_file.name} lacks the sample_time key")
    try:
        sample_time = float(metadata["sample_time"])
    except (TypeError, ValueError) as exc:
        raise DataFormatError(
            f"{meta_file.name}: sample_time {metadata['sample_time']!r} is not a number"
        ) from exc
    if sample_time <= 0:
        raise DataFormatError(f"{meta_file.name}: sample_time must be positive, got {sample_time}")
    return cast(DatasetMetadata, metadata)


def read_columns(
    path: Path, expected: Sequence[str]
) -> Tuple[float, Dict[str, FloatArray], DatasetMetadata | None]:
    """Read a delimited file written by write_columns.

    Returns:
        Sample time, the requested columns and the sidecar metadata if present
    """
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise DataFormatError(f"File not found: {path}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise DataFormatError(f"{path.name} is empty", line=1)
    header = [name.strip() for name in rows[0]]
    wanted = [TIME_COLUMN, *expected]
    missing = [name for name in wanted if name not in header]
    if missing:
        raise DataFormatError(
            f"{path.name} header lacks column(s) {', '.join(missing)}", line=1
        )
    index = {name: header.index(name) for name in wanted}

    data: Dict[str, List[float]] = {name: [] for name in wanted}
    for line, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataFormatError(
                f"Line {line}: expected {len(header)} field(s), found {len(row)}", line=line
            )
        for name in wanted:
            data[name].append(_parse_float(row[index[name]], line, name))
    if not data[TIME_COLUMN]:
        raise DataFormatError(f"{path.name} has no data rows", line=2)

    metadata = _read_metadata(metadata_path(path))
    time = np.asarray(data[TIME_COLUMN])
    sample_time = _sample_time(time, metadata, path)
    columns = {name: np.asarray(data[name]) for name in expected}
    return sample_time, columns, metadata


def _sample_time(time: FloatArray, metadata: DatasetMetadata | None, path: Path) -> float:
    if time.size < 2:
        if metadata is None:
            raise DataFormatError(f"{path.name}: one sample and no metadata, sample time unknown")
        return float(metadata["sample_time"])
    steps = np.diff(time)
    nominal = float(time[-1] - time[0]) / (time.size - 1)
    if nominal <= 0:
        raise DataFormatError(f"{path.name}: time column is not increasing")
    worst = int(np.argmax(np.abs(steps - nominal)))
    if abs(steps[worst] - nominal) > TOL_SAMPLING_JITTER * nominal:
        raise DataFormatError(
            f"{path.name}: non-uniform time base at line {worst + 3}", line=worst + 3
        )
    if metadata is not None:
        recorded = float(metadata["sample_time"])
        if abs(recorded - nominal) <= TOL_SAMPLING_JITTER * recorded:
            return recorded
    return nominal


def write_dataset(path: Path, u: Signal, y: Signal, metadata: DatasetMetadata) -> None:
    if len(u) != len(y):
        raise DataFormatError(f"Input and output lengths differ ({len(u)} != {len(y)})")
    write_columns(path, u.sample_time, {"u": u.samples, "y": y.samples}, metadata)
    _LOGGER.info("Dataset %s: %d sample(s)", path, len(u))


def read_dataset(path: Path) -> Tuple[Signal, Signal, DatasetMetadata | None]:
    sample_time, columns, metadata = read_columns(path, DATASET_COLUMNS)
    return (
        Signal(columns["u"], sample_time),
        Signal(columns["y"], sample_time),
        metadata,
    )


def write_signal(
    path: Path, signal: Signal, name: str = "value", metadata: DatasetMetadata | None = None
) -> None:
    write_columns(path, signal.sample_time, {name: signal.samples}, metadata)


def read_signal(path: Path, name: str = "value") -> Signal:
    sample_time, columns, _ = read_columns(path, (name,))
    return Signal(columns[name], sample_time)


def model_to_dict(model: NarxModel) -> Dict[str, Any]:
    return {
        "kind": "narx_model",
        "n_y": model.n_y,
        "n_u": model.n_u,
        "tau_d": model.tau_d,
        "tau_s": model.tau_s,
        "sample_time": model.sample_time,
        "terms": [{"term": term.label, "theta": value} for term, value in model.parameters()],
    }


def model_from_dict(data: Mapping[str, Any]) -> NarxModel:
    if data.get("kind") != "narx_model":
        raise DataFormatError(f"Expected a narx_model artifact, found {data.get('kind')!r}")
    try:
        entries = data["terms"]
        return NarxModel(
            terms=tuple(parse_term(entry["term"]) for entry in entries),
            theta=np.array([float(entry["theta"]) for entry in entries]),
            n_y=int(data["n_y"]),
            n_u=int(data["n_u"]),
            tau_d=int(data.get("tau_d", 1)),
            tau_s=int(data.get("tau_s", 0)),
            sample_time=data.get("sample_time"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"Malformed model artifact: {exc}") from exc


def write_model(path: Path, model: NarxModel) -> None:
    write_json(path, model_to_dict(model))
    _LOGGER.info("Model %s: %d term(s)", path, len(model.terms))


def read_model(path: Path) -> NarxModel:
    return model_from_dict(read_json(path))


def law_to_dict(law: CompensatorLaw) -> Dict[str, Any]:
    return {
        "kind": "compensator_law",
        "law_kind": law.kind.value,
        "gain": law.gain,
        "horizon": law.horizon,
        "expression": str(law),
        "terms": [
            {
                "coefficient": term.coefficient,
                "factors": [
                    {"signal": f.kind.value, "offset": f.offset, "power": f.power}
                    for f in term.factors
                ],
            }
            for term in law.terms
        ],
    }


def law_from_dict(data: Mapping[str, Any]) -> CompensatorLaw:
    if data.get("kind") != "compensator_law":
        raise DataFormatError(
            f"Expected a compensator_law artifact, found {data.get('kind')!r}"
        )
    try:
        terms = tuple(
            LawTerm(
                float(entry["coefficient"]),
                tuple(
                    LawFactor(LawSignalKind(f["signal"]), int(f["offset"]), int(f.get("power", 1)))
                    for f in entry["factors"]
                ),
            )
            for entry in data["terms"]
        )
        return CompensatorLaw(
            kind=LawKind(data["law_kind"]),
            terms=terms,
            gain=float(data["gain"]),
            horizon=int(data["horizon"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"Malformed law artifact: {exc}") from exc


def write_law(path: Path, law: CompensatorLaw) -> None:
    write_json(path, law_to_dict(law))
    _LOGGER.info("Law %s: %s", path, repr(law))


def read_law(path: Path) -> CompensatorLaw:
    return law_from_dict(read_json(path))


def write_curve(path: Path, curve: QuasiStaticCurve) -> None:
    """Quasi-static branch as CSV columns u, y_tilde, attracting (0 or 1), branch."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["u", "y_tilde", "attracting", "branch"])
    for u, y, attracting in zip(curve.u_grid, curve.y_tilde, curve.attracting):
        writer.writerow(
            [repr(float(u)), repr(float(y)), int(bool(attracting)), curve.branch.value]
        )
    atomic_write_text(path, buffer.getvalue())
    _LOGGER.info("Curve %s: %s branch, %d point(s)", path, curve.branch.value, len(curve.u_grid))


def write_selection_report(path: Path, report: SelectionReport) -> None:
    """Ranked terms as CSV; aic is blank when no size was chosen by AIC."""
    chosen = len(report.selected())
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SELECTION_COLUMNS)
    for i, row in enumerate(report.rows()):
        writer.writerow(
            [
                row["term"],
                repr(row["err"]),
                repr(row["cumulative_err"]),
                "" if row["aic"] is None else repr(row["aic"]),
                int(i < chosen),
            ]
        )
    atomic_write_text(path, buffer.getvalue())
    _LOGGER.info("Selection report %s: %d ranked term(s), %d kept", path, len(report.terms), chosen)


def read_selection_report(path: Path) -> SelectionReport:
    """Rebuild a report written by write_selection_report, without its notes."""
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise DataFormatError(f"File not found: {path}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(name.strip() for name in rows[0]) != SELECTION_COLUMNS:
        raise DataFormatError(
            f"{path.name} header is not {','.join(SELECTION_COLUMNS)}", line=1
        )
    terms: List[Term] = []
    err: List[float] = []
    aic: List[float] = []
    chosen = 0
    for line, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(SELECTION_COLUMNS):
            raise DataFormatError(
                f"Line {line}: expected {len(SELECTION_COLUMNS)} field(s), found {len(row)}",
                line=line,
            )
        label, err_text, _, aic_text, selected = row
        try:
            terms.append(parse_term(label))
        except (ConfigError, StructuralError) as exc:
            raise DataFormatError(f"Line {line}: {exc}", line=line) from exc
        err.append(_parse_float(err_text, line, "err"))
        if aic_text:
            aic.append(_parse_float(aic_text, line, "aic"))
        if selected.strip() == "1":
            chosen += 1
    if not terms:
        raise DataFormatError(f"{path.name} has no data rows", line=2)
    if aic and len(aic) != len(terms):
        raise DataFormatError(f"{path.name}: aic is given for some rows only")
    return SelectionReport(
        terms=tuple(terms),
        err=np.asarray(err),
        aic=np.asarray(aic) if aic else None,
        chosen_size=chosen if aic else None,
    )
