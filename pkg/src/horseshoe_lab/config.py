"""Run configuration: one flat JSON object holding the eight blocks and the
scalar knobs of every subcommand."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .geometry import BLOCK_NAMES, BlockSystem
from .hmap import Perturbation


@dataclass(frozen=True)
class RunConfig:
    blocks: dict
    signs: dict = field(default_factory=dict)
    perturbation: Optional[dict] = None
    depth: int = 12
    grid: int = 1024
    n_fwd: int = 12
    n_back: int = 12
    transient: int = 3
    scales: Optional[tuple] = None
    tau0: float = 10.0
    seed: int = 0
    output_dir: str = "out"
    section: Optional[dict] = None
    theta: float = 0.05
    resolution: int = 129
    hky_eps: float = 0.1
    require_valid: bool = True
    sha256: str = ""

    @property
    def system(self) -> BlockSystem:
        return BlockSystem.from_dict(self.blocks)

    def make_perturbation(self) -> Optional[Perturbation]:
        if not self.perturbation:
            return None
        p = dict(self.perturbation)
        p.setdefault("seed", self.seed)
        return Perturbation.from_dict(self.system, p)

    def override(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


_INT = ("depth", "grid", "n_fwd", "n_back", "transient", "seed", "resolution")
_FLOAT = ("tau0", "theta", "hky_eps")


def parse_config(raw: bytes) -> RunConfig:
    try:
        d = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    known = set(BLOCK_NAMES) | {f.name for f in fields(RunConfig)} - {"blocks", "sha256"}
    known |= {"horizons", "comment"}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    blocks = {n: d[n] for n in BLOCK_NAMES if n in d}
    BlockSystem.from_dict(blocks)  # validates shape and numbers
    kw = {}
    if "horizons" in d:
        h = d["horizons"]
        if isinstance(h, int) and not isinstance(h, bool):
            kw["n_fwd"] = kw["n_back"] = h
        elif isinstance(h, dict):
            kw["n_fwd"], kw["n_back"] = h.get("forward", 12), h.get("backward", 12)
        else:
            raise ConfigError("horizons must be an integer or {forward, backward}")
    for k in _INT:
        if k in d:
            kw[k] = d[k]
    for k in _INT:
        if k in kw:
            v = kw[k]
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ConfigError(f"{k} must be a non-negative integer")
    for k in _FLOAT:
        if k in d:
            v = d[k]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or v != v or v in (float("inf"), float("-inf")):
                raise ConfigError(f"{k} must be a finite number")
            kw[k] = float(v)
    if "signs" in d:
        if not isinstance(d["signs"], dict):
            raise ConfigError("signs must map branch names to sign triples")
        kw["signs"] = {k: tuple(v) if isinstance(v, list) else v for k, v in d["signs"].items()}
    if "perturbation" in d and d["perturbation"] is not None:
        p = d["perturbation"]
        if not isinstance(p, dict) or "amplitude" not in p:
            raise ConfigError("perturbation needs an amplitude")
        kw["perturbation"] = p
    if "scales" in d and d["scales"] is not None:
        sc = d["scales"]
        if not isinstance(sc, list) or not all(isinstance(x, (int, float)) and x > 0 for x in sc):
            raise ConfigError("scales must be a list of positive numbers")
        kw["scales"] = tuple(float(x) for x in sc)
    for k in ("output_dir",):
        if k in d:
            kw[k] = str(d[k])
    if "section" in d:
        kw["section"] = d["section"]
    if "require_valid" in d:
        kw["require_valid"] = bool(d["require_valid"])
    return RunConfig(blocks=blocks, sha256=hashlib.sha256(raw).hexdigest(), **kw)


def load_config(path) -> RunConfig:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(raw)
