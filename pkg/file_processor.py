"""
File processor module for the leafgrowth command line
Writes CSV, JSON, JSON-lines, DOT and text outputs with a metadata header,
and reads them back
"""

import io
import json
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, TextIO, Tuple

import numpy as np
import pandas as pd


def _jsonable(value: Any) -> Any:
    """Convert numpy scalars and arrays to plain Python for json"""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if isinstance(value, np.bool_):
        return bool(value)
    return value


class FileProcessor:
    """Handles writing command results to a file or stdout"""

    def __init__(self, output: Optional[str] = None, stream: Optional[TextIO] = None):
        self.output = Path(output) if output else None
        self.stream = stream if stream is not None else sys.stdout
        self.written = []

    def _emit(self, text: str) -> None:
        if self.output is None:
            self.stream.write(text)
            self.stream.flush()
        else:
            self.output.parent.mkdir(parents=True, exist_ok=True)
            with open(self.output, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
        self.written.append(str(self.output) if self.output else "<stdout>")

    @staticmethod
    def _header(meta: Dict[str, Any], marker: str) -> str:
        lines = []
        for key, value in meta.items():
            if isinstance(value, (list, tuple)):
                value = ",".join(str(v) for v in value)
            lines.append(f"{marker} {key}={value}")
        return "\n".join(lines) + "\n" if lines else ""

    def write_frame(self, frame: pd.DataFrame, meta: Dict[str, Any]) -> None:
        """
        CSV with a '# key=value' comment block above the column header

        Args:
            frame (DataFrame): The table to write
            meta (dict): Run metadata, seed included
        """
        body = frame.to_csv(index=False, lineterminator="\n")
        self._emit(self._header(meta, "#") + body)

    def write_json(self, payload: Dict[str, Any], meta: Dict[str, Any]) -> None:
        """One JSON document with the metadata under "meta" """
        document = {"meta": meta}
        document.update(payload)
        self._emit(json.dumps(_jsonable(document), indent=2, sort_keys=True) + "\n")

    def write_jsonl(self, records: Iterable[Dict[str, Any]], meta: Dict[str, Any]) -> None:
        """JSON lines; the first line is {"meta": ...}"""
        lines = [json.dumps(_jsonable({"meta": meta}), sort_keys=True)]
        lines.extend(json.dumps(_jsonable(record), sort_keys=True) for record in records)
        self._emit("\n".join(lines) + "\n")

    def write_dot(self, dot: str, meta: Dict[str, Any]) -> None:
        """DOT source preceded by '// key=value' comments"""
        self._emit(self._header(meta, "//") + dot)

    def write_text(self, text: str) -> None:
        self._emit(text if text.endswith("\n") else text + "\n")

    @staticmethod
    def read_frame(path_or_text: str) -> Tuple[pd.DataFrame, Dict[str, str]]:
        """
        Read a CSV written by write_frame

        Args:
            path_or_text (str): File path, or the CSV text itself when it
                starts with the '#' header

        Returns:
            tuple: (DataFrame, metadata dict of raw strings)
        """
        if path_or_text.startswith("#") or "\n" in path_or_text:
            text = path_or_text
        else:
            text = Path(path_or_text).read_text(encoding="utf-8")
        meta = {}
        for line in text.splitlines():
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        return pd.read_csv(io.StringIO(text), comment="#"), meta
