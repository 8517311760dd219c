"""Atomic report and curve-file output."""

import json
import logging
import tempfile
from pathlib import Path
from typing import Any

import pandas as pd
from pydantic import BaseModel

logger = logging.getLogger(__name__)


def atomic_write_text(path: Path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file in the same directory and a rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path: Path | None = None
    try:
        with tempfile.NamedTemporaryFile(
            mode="w",
            encoding="utf-8",
            dir=path.parent,
            delete=False,
            prefix=".tmp_",
            suffix=path.suffix,
            newline="",
        ) as tmp_file:
            tmp_file.write(text)
            tmp_path = Path(tmp_file.name)

        tmp_path.replace(path)
    except Exception as e:
        if tmp_path is not None and tmp_path.exists():
            try:
                tmp_path.unlink()
            except OSError:
                pass
        raise OSError(f"Failed to write '{path}': {e}") from e


def render_json(payload: BaseModel | dict[str, Any] | list[Any]) -> str:
    """JSON with shortest round-trip float representation."""
    if isinstance(payload, BaseModel):
        return payload.model_dump_json(indent=2) + "\n"
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def render_csv(frame: pd.DataFrame) -> str:
    """CSV with a header row and full-precision floats."""
    return frame.to_csv(index=False, lineterminator="\n")


class ReportWriter:
    """
    Stage output files in memory and write them together.

    Nothing touches the output directory until ``commit``; each file is then
    written atomically, so a failing command leaves no partial reports.
    ``commit`` itself is atomic per file only: when a later file fails with
    ``OSError``, the files before it have already been replaced.
    """

    def __init__(self, out_dir: Path) -> None:
        self.out_dir = out_dir
        self._staged: dict[str, str] = {}

    def stage_json(self, name: str, payload: BaseModel | dict[str, Any] | list[Any]) -> None:
        self._staged[name] = render_json(payload)

    def stage_csv(self, name: str, frame: pd.DataFrame) -> None:
        self._staged[name] = render_csv(frame)

    def stage_text(self, name: str, text: str) -> None:
        self._staged[name] = text

    @property
    def staged(self) -> list[str]:
        return list(self._staged)

    def commit(self) -> list[Path]:
        """Write every staged file in staging order; raises OSError on the first failure."""
        written = []
        for name, text in self._staged.items():
            path = self.out_dir / name
            atomic_write_text(path, text)
            written.append(path)
            logger.debug(f"Wrote {path}")
        self._staged.clear()
        logger.info(f"Wrote {len(written)} file(s) to {self.out_dir}")
        return written
