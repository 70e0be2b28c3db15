import json
import os
from datetime import datetime
from pathlib import Path
from typing import Optional, Union

import config
from modules.result_tables import to_jsonable


class RunLog:
    """
    Append-only JSON log of CLI runs.

    Only written when FOCKOP_RUN_LOG names a path; it never feeds back into
    the output document.
    """

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._ensure_file()

    @classmethod
    def from_env(cls) -> Optional["RunLog"]:
        path = config.get_run_log_path()
        return cls(path) if path is not None else None

    def _ensure_file(self):
        if not os.path.exists(self.path):
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._write_entries([])

    def load(self):
        try:
            with open(self.path, "r") as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError):
            return []

    def _write_entries(self, entries):
        with open(self.path, "w") as f:
            json.dump(entries, f, indent=2)

    def clear(self):
        self._write_entries([])

    def log(self, command: str, step: str, message: str, metadata: dict = None):
        """Record one step of a subcommand."""
        entries = self.load()
        entries.append({
            "timestamp": datetime.now().isoformat(),
            "command": command,
            "step": step,
            "content": message,
            "metadata": to_jsonable(metadata or {}),
        })
        self._write_entries(entries)
