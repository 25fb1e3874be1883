import hashlib
import json
import logging
import os
import tempfile
from typing import Any, Dict


logger = logging.getLogger(__name__)


class PersistentStore:
    """
    Utility class for writing run artifacts (caches, checkpoints, reports) so that a
    reader never sees a half-written file.
    """

    @staticmethod
    def write_text(path: str, text: str) -> None:
        """
        Write ``text`` to ``path`` atomically: temporary sibling, then rename.

        Args:
            path: Destination file
            text: Full file contents
        """
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp_path, path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.remove(tmp_path)
            raise
        logger.debug(f"Wrote {len(text)} characters to {path}")

    @staticmethod
    def read_text(path: str) -> str:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()

    @classmethod
    def write_json(cls, path: str, data: Dict[str, Any]) -> None:
        """Store ``data`` as indented JSON with the key order it was built in."""
        cls.write_text(path, json.dumps(data, ensure_ascii=False, indent=2) + "\n")

    @classmethod
    def read_json(cls, path: str) -> Dict[str, Any]:
        return json.loads(cls.read_text(path))

    @staticmethod
    def digest(text: str) -> str:
        """SHA-256 hex digest used to seal checkpoint bodies."""
        return hashlib.sha256(text.encode("utf-8")).hexdigest()
