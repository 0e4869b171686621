"""Monte Carlo containment experiments, threshold sweeps and exact-maxima studies.

Seed layout (all under the master seed):

* ``(0, b)``        the pattern tree of size ``b``
* ``(1, i, 0)``     host graph of trial ``i``
* ``(1, i, 1)``     search restarts of trial ``i``
* ``(1, i, 2)``     planted anchor of trial ``i``

Trial ``i`` therefore draws the same host graph for every ``b`` in a sweep and
is unaffected by how many trials run or how they are scheduled.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Iterable, Optional, Sequence

from .audits import run_grid, parse_grid, sqrt_law_p
from .graph import (
    Tree,
    caterpillar_tree,
    full_tree,
    path_tree,
    random_tree_bounded,
    sample_gnp,
    sample_planted,
)
from .moments import MomentParams, log_q, threshold_size
from .rng import Seed
from .search import MAXIMA_MAX_N, CapExceeded, MaxFamily, SearchBudget, max_induced_size, search_induced_embedding

TREE_FAMILIES = ("random", "path", "full", "caterpillar", "file")
P_LAWS = ("fixed", "sqrt-law")


class ConfigError(ValueError):
    def __init__(self, field_name: str, msg: str):
        super().__init__(f"{field_name}: {msg}")
        self.field = field_name


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    p: Optional[float] = None
    p_law: str = "fixed"
    delta: int = 3
    tree_family: str = "random"
    tree: Optional[Tree] = None  # used when tree_family == "file"
    b: Optional[int] = None
    trials: int = 100
    max_steps: int = 1_000_000
    max_restarts: int = 10
    seed: int = 0
    planted: bool = False
    threads: int = 1
    record_timing: bool = False

    def __post_init__(self):
        if self.n is None or self.n < 1:
            raise ConfigError("n", "must be a positive integer")
        if self.p_law not in P_LAWS:
            raise ConfigError("p_law", f"must be one of {P_LAWS}")
        if self.p_law == "fixed":
            if self.p is None:
                raise ConfigError("p", "required when p_law is 'fixed'")
            if not 0.0 < self.p < 1.0:
                raise ConfigError("p", "must lie strictly between 0 and 1")
        if self.tree_family not in TREE_FAMILIES:
            raise ConfigError("tree_family", f"must be one of {TREE_FAMILIES}")
        if self.tree_family == "file" and self.tree is None:
            raise ConfigError("tree", "tree_family 'file' needs a tree")
        if self.delta < 1:
            raise ConfigError("delta", "must be at least 1")
        if self.trials < 1:
            raise ConfigError("trials", "must be at least 1")
        if self.max_steps < 1:
            raise ConfigError("max_steps", "must be at least 1")
        if self.max_restarts < 1:
            raise ConfigError("max_restarts", "must be at least 1")
        if self.threads < 1:
            raise ConfigError("threads", "must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        if self.b is not None and not 1 <= self.b <= self.n:
            raise ConfigError("b", f"must lie in 1..n = {self.n}")

    @property
    def edge_p(self) -> float:
        return self.p if self.p_law == "fixed" else sqrt_law_p(self.n)

    def default_b(self) -> int:
        if self.tree_family == "file":
            return self.tree.b
        if self.b is not None:
            return self.b
        try:
            return threshold_size(self.n, self.edge_p, "lnform")
        except ValueError as exc:
            raise ConfigError("b", f"no override and threshold_size failed: {exc}") from None

    def moment_params(self) -> MomentParams:
        return MomentParams(self.n, self.edge_p, self.delta, self.default_b())


def make_tree(config: ExperimentConfig, b: int) -> Tree:
    fam = config.tree_family
    if fam == "file":
        return config.tree
    if fam == "path":
        return path_tree(b)
    if fam == "full":
        return full_tree(b, config.delta)
    if fam == "caterpillar":
        return caterpillar_tree(b, config.delta)
    return random_tree_bounded(b, config.delta, Seed(config.seed, (0, b)))


@dataclass(frozen=True)
class SweepRow:
    n: int
    p: float
    b: int
    trials: int
    successes: int
    success_rate: float
    mean_search_steps: float
    wall_time_ms: Optional[float]
    seed: int


SWEEP_FIELDS = tuple(f.name for f in fields(SweepRow))


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_FIELDS)
        for r in self.rows:
            w.writerow(["" if v is None else _num(v) for v in (getattr(r, f) for f in SWEEP_FIELDS)])
        return buf.getvalue()

    def monotonicity_flags(self, tolerance_se: float = 3.0) -> list[int]:
        """``b`` values whose success rate exceeds the previous row's by more than the noise allowance."""
        flagged = []
        for prev, cur in zip(self.rows, self.rows[1:]):
            se = math.sqrt(max(prev.success_rate * (1 - prev.success_rate), 1e-12) / prev.trials
                           + max(cur.success_rate * (1 - cur.success_rate), 1e-12) / cur.trials)
            if cur.success_rate - prev.success_rate > tolerance_se * se:
                flagged.append(cur.b)
        return flagged


def _num(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _trial(args) -> tuple[bool, int]:
    config, tree, i = args
    p = config.edge_p
    trial = Seed(config.seed, (1, i))
    if config.planted:
        rng = trial.child(2).generator()
        anchor = tuple(int(x) for x in rng.choice(config.n, size=tree.b, replace=False))
        graph = sample_planted(tree, anchor, config.n, p, trial.child(0))
    else:
        graph = sample_gnp(config.n, p, trial.child(0))
    budget = SearchBudget(config.max_steps, config.max_restarts, trial.child(1))
    res = search_induced_embedding(graph, tree, budget)
    return res.found, res.steps


def parallel_map(fn: Callable, items: Sequence, threads: int) -> list:
    """``map`` over a process pool; results come back in input order."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))


def _containment_row(config: ExperimentConfig, b: int) -> SweepRow:
    if b > config.n:
        raise ConfigError("b", f"b = {b} exceeds n = {config.n}")
    tree = make_tree(config, b)
    start = time.perf_counter()
    outcomes = parallel_map(_trial, [(config, tree, i) for i in range(config.trials)], config.threads)
    elapsed = (time.perf_counter() - start) * 1000
    successes = sum(1 for ok, _ in outcomes if ok)
    steps = sum(s for _, s in outcomes)
    return SweepRow(config.n, config.edge_p, tree.b, config.trials, successes, successes / config.trials,
                    steps / config.trials, round(elapsed, 3) if config.record_timing else None, config.seed)


def run_containment(config: ExperimentConfig) -> SweepResult:
    """Success frequency of the induced-copy search over ``config.trials`` sampled graphs."""
    return SweepResult([_containment_row(config, config.default_b())])


def run_threshold_sweep(config: ExperimentConfig, b_range: Iterable[int]) -> SweepResult:
    """One containment row per ``b``, ascending."""
    bs = sorted(set(int(b) for b in b_range))
    for b in bs:
        if not 2 <= b <= config.n:
            raise ConfigError("b_range", f"b = {b} outside [2, n = {config.n}]")
    return SweepResult([_containment_row(config, b) for b in bs])


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MaximaRow:
    family: str
    n: int
    p: float
    trials: int
    mean: float
    min: int
    max: int
    two_log_q_np: Optional[float]
    seed: int


MAXIMA_FIELDS = tuple(f.name for f in fields(MaximaRow))


def _maxima_trial(args):
    n, p, seed, i, families, force = args
    g = sample_gnp(n, p, Seed(seed, (1, i, 0)))
    return [max_induced_size(g, fam, force=force) for fam in families]


def run_exact_maxima(n: int, p: float, trials: int, families: Sequence[str] = ("tree", "path", "matching"),
                     seed: int = 0, *, threads: int = 1, force: bool = False) -> list[MaximaRow]:
    """Empirical distribution of the exact maxima over ``trials`` samples of G(n, p)."""
    if n > MAXIMA_MAX_N and not force:
        raise CapExceeded(f"exact maxima are capped at n <= {MAXIMA_MAX_N} (got {n}); pass force=True")
    if trials < 1:
        raise ConfigError("trials", "must be at least 1")
    fams = [MaxFamily(f).value for f in families]
    values = parallel_map(_maxima_trial, [(n, p, seed, i, fams, force) for i in range(trials)], threads)
    ref = 2 * log_q(n * p, p) if 0 < p < 1 and n * p > 0 else None
    rows = []
    for j, fam in enumerate(fams):
        col = [v[j] for v in values]
        rows.append(MaximaRow(fam, n, p, trials, sum(col) / trials, min(col), max(col), ref, seed))
    return rows


def maxima_csv(rows: Sequence[MaximaRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MAXIMA_FIELDS)
    for r in rows:
        w.writerow(["" if v is None else _num(v) for v in asdict(r).values()])
    return buf.getvalue()


def run_audits(grid_text: str):
    """Parse a grid file body and run every audit over it."""
    return run_grid(parse_grid(grid_text))
