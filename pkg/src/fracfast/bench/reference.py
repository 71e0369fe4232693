"""Fine-grid reference solutions with an on-disk cache.

A cache file is one JSON header line followed by the final field as raw
little-endian float64.  The header carries the run parameters, the format
version and a SHA-256 of the data bytes; a file whose header or checksum does
not match is regenerated.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from fracfast.bench.problems import make_problem
from fracfast.caputo import SchemeConfig
from fracfast.pde import GridSpec, run

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
MAGIC = "fracfast-reference"


@dataclass(frozen=True)
class ReferenceKey:
    problem: str
    alpha: float
    scheme: str
    h: float
    N: int
    predictor: int | None = None
    # full SchemeConfig as JSON; overrides ``scheme`` when set
    config: str | None = None

    def params(self) -> dict:
        out = asdict(self)
        if out["config"] is None:
            del out["config"]
        return out

    @property
    def tag(self) -> str:
        text = json.dumps(self.params(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:20]


def default_refdir() -> Path:
    return Path(os.environ.get("FRACFAST_REFDIR", Path.home() / ".cache" / "fracfast"))


def write_reference(path: Path, key: ReferenceKey, field: np.ndarray) -> None:
    data = np.ascontiguousarray(field, dtype="<f8").tobytes()
    header = {
        "magic": MAGIC, "version": FORMAT_VERSION, **key.params(),
        "size": int(np.size(field)), "sha256": hashlib.sha256(data).hexdigest(),
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(data)
    tmp.replace(path)


def read_reference(path: Path, key: ReferenceKey) -> np.ndarray | None:
    """The cached field, or ``None`` if the file is missing, stale or corrupt."""
    try:
        with open(path, "rb") as fh:
            header = json.loads(fh.readline())
            data = fh.read()
    except (OSError, ValueError):
        return None
    expected = {"magic": MAGIC, "version": FORMAT_VERSION, **key.params()}
    if any(header.get(k) != v for k, v in expected.items()):
        return None
    if header.get("sha256") != hashlib.sha256(data).hexdigest():
        log.warning("checksum mismatch in %s, regenerating", path)
        return None
    field = np.frombuffer(data, dtype="<f8")
    if field.size != header.get("size"):
        return None
    return field.copy()


def compute_reference(key: ReferenceKey) -> np.ndarray:
    spec = make_problem(key.problem, key.alpha)
    grid = GridSpec(spec.a, spec.b, key.N, key.h, int(round(1.0 / key.h)))
    if key.config is not None:
        scheme = SchemeConfig(**json.loads(key.config))
    else:
        scheme = SchemeConfig.from_name(key.scheme, key.alpha)
    return run(spec, grid, scheme, predictor=key.predictor).u


def reference_solution(key: ReferenceKey, refdir: Path | str | None = None) -> np.ndarray:
    """Final-time reference field, read from the cache or computed and stored."""
    refdir = default_refdir() if refdir is None else Path(refdir)
    path = refdir / f"{key.problem}-{key.tag}.ref"
    field = read_reference(path, key)
    if field is not None:
        return field
    log.info("generating reference %s (h=%g, N=%d, %s)", key.problem, key.h, key.N, key.scheme)
    field = compute_reference(key)
    try:
        write_reference(path, key, field)
    except OSError as exc:
        log.warning("could not cache reference in %s: %s", refdir, exc)
    return field
