"""
Utils - Common utility functions for torus_que

Result path resolution, the one-line configuration summary used in log lines,
and the writers that put provenance comment lines in front of every CSV and
JSON result.
"""

import csv
import json
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path

from torus_que.constants import CSV_COMMENT_PREFIX
from torus_que.logger import get_logger

logger = get_logger(__name__)

RESULTS_DIR = "results"


def result_path(out: str | Path | None, name: str, suffix: str) -> Path:
    """Where an experiment writes its file with the given suffix

    out replaces its own suffix; '~' expands and relative paths resolve
    against the working directory. Without out the file goes to
    results/<name><suffix>.
    """
    text = str(out).strip() if out is not None else ""
    path = Path(text).expanduser() if text else Path(RESULTS_DIR) / name
    if not path.is_absolute():
        path = (Path.cwd() / path).resolve()
    return path.with_suffix(suffix)


def summarize_mapping(
    mapping: Mapping[str, object], max_length: int, suffix: str = "..."
) -> str:
    """'key=value' pairs without the unset keys, cut to max_length"""
    text = ", ".join(f"{k}={v}" for k, v in mapping.items() if v is not None)
    if len(text) <= max_length:
        return text
    return text[: max_length - len(suffix)] + suffix


def provenance_lines(provenance: Mapping[str, object]) -> list[str]:
    """'# key: value' lines in insertion order"""
    return [f"{CSV_COMMENT_PREFIX} {key}: {value}" for key, value in provenance.items()]


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[str]],
    provenance: Mapping[str, object],
) -> Path:
    """Write comment lines, the header and rows; returns the path written"""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        for line in provenance_lines(provenance):
            handle.write(line + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    logger.info(f"Wrote {path}")
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]], list[str]]:
    """(header, rows, comment lines) of a file written by write_csv"""
    comments: list[str] = []
    body: list[str] = []
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            if line.startswith(CSV_COMMENT_PREFIX):
                comments.append(line.rstrip("\n"))
            else:
                body.append(line)
    header, *rows = list(csv.reader(body))
    return header, rows, comments


def write_json(path: Path, document: Mapping[str, object]) -> Path:
    """Sorted-key JSON with a trailing newline"""
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(document, sort_keys=True, indent=2) + "\n"
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path
