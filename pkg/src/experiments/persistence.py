"""
Result files: seeded CSV/JSON artifacts and the run manifest
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

try:
    from ..utils.errors import ParseError
    from ..utils.constants import APP_VERSION
except ImportError:
    from utils.errors import ParseError
    from utils.constants import APP_VERSION

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def header_line(seed: int, digest: str) -> str:
    return f"# seed={seed},digest={digest}\n"


def write_csv(frame: pd.DataFrame, path: Union[str, Path], seed: int, digest: str) -> Path:
    """CSV with a leading ``# seed=...,digest=...`` comment line"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        handle.write(header_line(seed, digest))
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    try:
        return pd.read_csv(path, comment="#")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(f"Cannot read results {path}: {e}")


def read_header(path: Union[str, Path]) -> Dict[str, str]:
    """The seed/digest fields of a result CSV"""
    with open(path, "r") as handle:
        first = handle.readline().strip()
    if not first.startswith("#"):
        return {}
    fields = {}
    for item in first.lstrip("# ").split(","):
        key, _, value = item.partition("=")
        fields[key.strip()] = value.strip()
    return fields


def write_json(payload: Dict[str, Any], path: Union[str, Path], seed: int, digest: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = dict(payload, seed=seed, digest=digest)
    with open(path, "w") as handle:
        json.dump(document, handle, indent=2, sort_keys=True, default=str)
        handle.write("\n")
    logger.info(f"Wrote {path}")
    return path


class RunManifest:
    """Collects the files one command writes into an output directory"""

    def __init__(self, output_dir: Union[str, Path], seed: int, digest: str, graph_hash: Optional[str] = None):
        self.output_dir = Path(output_dir)
        self.seed = seed
        self.digest = digest
        self.graph_hash = graph_hash
        self.files: List[str] = []
        self.extra: Dict[str, Any] = {}

    def csv(self, frame: pd.DataFrame, name: str) -> Path:
        path = write_csv(frame, self.output_dir / name, self.seed, self.digest)
        self.files.append(name)
        return path

    def json(self, payload: Dict[str, Any], name: str) -> Path:
        path = write_json(payload, self.output_dir / name, self.seed, self.digest)
        self.files.append(name)
        return path

    def save(self) -> Path:
        """Write (or extend) manifest.json"""
        path = self.output_dir / "manifest.json"
        existing: Dict[str, Any] = {}
        if path.exists():
            try:
                existing = json.loads(path.read_text())
            except json.JSONDecodeError:
                logger.warning(f"Replacing unreadable manifest {path}")
        files = sorted(set(existing.get("files", [])) | set(self.files)) if existing.get("digest") == self.digest \
            else sorted(set(self.files))
        manifest = {
            "seed": self.seed,
            "digest": self.digest,
            "graph_hash": self.graph_hash,
            "version": APP_VERSION,
            "files": files,
        }
        manifest.update(self.extra)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as handle:
            json.dump(manifest, handle, indent=2, sort_keys=True)
            handle.write("\n")
        return path
