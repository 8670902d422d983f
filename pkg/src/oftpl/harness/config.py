"""JSON experiment configs with line-precise validation errors."""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

KINDS = ("online_convex", "online_nonconvex", "game_cc", "game_ncnc", "probe_stability", "probe_monotonicity")
THREADS_ENV = "OFTPL_THREADS"


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        where = f"{source}:{line}" if line else source
        super().__init__(f"{where}: {message}")


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


@dataclass
class ExperimentConfig:
    kind: str
    problem: dict
    perturbation: dict
    T: list[int]
    m: int | str
    eta: float | str
    seeds: list[int]
    threads: int = 1
    guess: str = "optimistic"
    include_first: bool = True
    timing: bool = False
    probe: dict = field(default_factory=dict)
    out_dir: str = "out"
    name: str = "experiment"
    base_dir: Path = field(default=Path("."), repr=False)
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def sweep(self) -> bool:
        return len(self.T) > 1

    def m_for(self, T: int) -> int:
        return T if self.m == "=T" else int(self.m)

    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


_DEFAULT_GUESS = {"online_convex": "zero", "online_nonconvex": "zero", "game_cc": "optimistic",
                  "game_ncnc": "optimistic"}
_DEFAULT_FAMILY = {"online_convex": "uniform_ball2", "game_cc": "uniform_ball2", "probe_stability": "uniform_ball2",
                   "online_nonconvex": "exp_coordinate", "game_ncnc": "exp_coordinate",
                   "probe_monotonicity": "exp_coordinate"}
_GUESSES = {"online_convex": ("zero", "last_gradient", "exact"),
            "online_nonconvex": ("zero", "last_gradient", "exact"),
            "game_cc": ("optimistic", "zero"), "game_ncnc": ("optimistic", "zero")}


def parse(text: str, source: str = "<config>", base_dir: Path | str = ".") -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno, source) from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be an object", 1, source)

    def fail(key: str, msg: str):
        raise ConfigError(f"{key}: {msg}", _line_of(text, key), source)

    kind = raw.get("kind")
    if kind not in KINDS:
        fail("kind", f"must be one of {', '.join(KINDS)}")
    problem = raw.get("problem", {})
    if not isinstance(problem, dict):
        fail("problem", "must be an object")

    pert = raw.get("perturbation", {"type": _DEFAULT_FAMILY[kind]})
    if not isinstance(pert, dict) or pert.get("type") not in ("uniform_ball2", "exp_coordinate", "gaussian_iso"):
        fail("perturbation", "needs a type among uniform_ball2, exp_coordinate, gaussian_iso")

    T = raw.get("T", 1)
    T = T if isinstance(T, list) else [T]
    if not T or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in T):
        fail("T", "must be a positive integer or a non-empty list of them")

    m = raw.get("m", 1)
    if not (m == "=T" or (isinstance(m, int) and not isinstance(m, bool) and m >= 1)):
        fail("m", 'must be a positive integer or "=T"')

    eta = raw.get("eta", pert.get("eta", "paper_default"))
    if not (eta == "paper_default" or (isinstance(eta, (int, float)) and not isinstance(eta, bool) and eta > 0)):
        fail("eta", 'must be positive or "paper_default"')

    seeds = raw.get("seeds", [0])
    if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) and s >= 0 for s in seeds):
        fail("seeds", "must be a non-empty list of non-negative integers")

    threads = raw.get("threads", int(os.environ.get(THREADS_ENV, "1")))
    if not isinstance(threads, int) or threads < 1:
        fail("threads", "must be a positive integer")

    guess = raw.get("guess", _DEFAULT_GUESS.get(kind, "zero"))
    if kind in _GUESSES and guess not in _GUESSES[kind]:
        fail("guess", f"must be one of {', '.join(_GUESSES[kind])} for {kind}")

    probe = raw.get("probe", {})
    if not isinstance(probe, dict):
        fail("probe", "must be an object")

    out = raw.get("output", {})
    if not isinstance(out, dict):
        fail("output", "must be an object")

    cfg = ExperimentConfig(
        kind=kind, problem=problem, perturbation=pert, T=T, m=m, eta=eta, seeds=seeds, threads=threads,
        guess=guess, include_first=bool(raw.get("include_first", True)), timing=bool(raw.get("timing", False)),
        probe=probe, out_dir=out.get("dir", "out"), name=raw.get("name", Path(source).stem or "experiment"),
        base_dir=Path(base_dir), raw=raw,
    )
    from .runner import build_problem  # validation of the problem block needs the builders

    try:
        build_problem(cfg)
    except (KeyError, ValueError, TypeError, OSError) as exc:
        key = exc.args[0] if isinstance(exc, KeyError) else "problem"
        raise ConfigError(f"problem: {exc}", _line_of(text, str(key)) or _line_of(text, "problem"), source) from None
    return cfg


def load(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    return parse(path.read_text(), str(path), path.parent)
