"""
Run output storage and manifest management.

Every file a command writes is registered in ``manifest.json`` with its
SHA-256 so that two runs can be compared byte for byte. The manifest holds
no timestamps and lists only the files of the current command, even when
the directory is reused.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, Optional

from pydantic import BaseModel

logger = logging.getLogger(__name__)


class RunStore:
    """Output directory of one command with manifest tracking."""

    def __init__(self, out_dir: Path, command: Optional[str] = None):
        """Initialize the store.

        Args:
            out_dir: Directory receiving every output file
            command: Name of the command recorded in the manifest
        """
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.out_dir / "manifest.json"
        self.manifest: Dict = {"files": []}
        if command is not None:
            self.manifest["command"] = command
        if self.manifest_path.exists():
            logger.info("replacing manifest of %s", self.out_dir)

    def _save_manifest(self) -> None:
        self.manifest["files"] = sorted(self.manifest["files"], key=lambda e: e["path"])
        with open(self.manifest_path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(self.manifest, f, indent=2, sort_keys=True)
            f.write("\n")

    @staticmethod
    def sha256(content: str) -> str:
        return hashlib.sha256(content.encode("utf-8")).hexdigest()

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def write_text(self, name: str, content: str) -> Path:
        """Write one UTF-8, LF-terminated file and register it in the manifest.

        Returns:
            Path to the written file
        """
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
        entry = {"path": name, "sha256": self.sha256(content)}
        self.manifest["files"] = [e for e in self.manifest["files"] if e["path"] != name]
        self.manifest["files"].append(entry)
        self._save_manifest()
        logger.info("wrote %s", path)
        return path

    def write_json(self, name: str, payload) -> Path:
        if isinstance(payload, BaseModel):
            payload = payload.model_dump(mode="json")
        return self.write_text(name, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def get_manifest(self) -> Dict:
        return self.manifest.copy()
