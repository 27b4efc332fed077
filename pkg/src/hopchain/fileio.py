"""Small file helpers: atomic writes and comment-tolerant line readers."""

import json
import os
import tempfile
from collections.abc import Iterable, Iterator
from pathlib import Path


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write text to path via a temp file + rename in the same directory."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def data_lines(path: str | Path) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, line) skipping blanks and '#' comments."""
    with open(path, encoding="utf-8") as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield number, line


def dump_json_line(record: dict) -> str:
    """Canonical single-line JSON: sorted keys, no whitespace padding."""
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def write_jsonl(path: str | Path, records: Iterable[dict], header: str | None = None) -> None:
    lines = [] if header is None else [header]
    lines.extend(dump_json_line(r) for r in records)
    atomic_write_text(path, "\n".join(lines) + "\n")


def format_float(value: float) -> str:
    """Full-precision decimal form that round-trips float64 exactly."""
    return repr(float(value))
