from __future__ import annotations

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)


class ResultWriter:
    """Writes CSV and JSON artifacts atomically: temp file in the target directory, then os.replace."""

    def __init__(self, encoding: str = "utf-8"):
        self.encoding = encoding

    def write_csv(self, path: Path | str, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
        lines = [",".join(header)]
        lines.extend(",".join(row) for row in rows)
        return self._write_text(Path(path), "\n".join(lines) + "\n")

    def write_json(self, path: Path | str, payload: dict) -> Path:
        return self._write_text(Path(path), self.dumps(payload))

    @staticmethod
    def dumps(payload: dict) -> str:
        return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"

    def _write_text(self, path: Path, text: str) -> Path:
        path = path.expanduser()
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
        try:
            with os.fdopen(fd, "w", encoding=self.encoding, newline="") as f:
                f.write(text)
            os.replace(tmp_name, path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
        logger.info("wrote %s (%d bytes)", path, len(text.encode(self.encoding)))
        return path
