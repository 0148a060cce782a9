"""Monte-Carlo comparison of estimators on synthetic incomplete data.

A run is described by a flat JSON object (see ``ExperimentConfig``). Each
replicate draws its own random stream from ``(seed, setting, phase, rep)``,
so reports do not depend on how replicates are scheduled across workers.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import statistics
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .bandable import oracle_bandwidth
from .cv import CvPlan, cv_select
from .errors import DataError
from .estimators import BANDABLE_METHODS, EstimatorOptions, fit, normalize_method
from .losses import LOSS_KINDS, aggregate, loss
from .masked import pairwise_counts
from .models import (
    MODEL_KINDS,
    MissingMechanism,
    SamplerSpec,
    apply_missingness,
    effective_sample_sizes,
    make_model,
    sample_gaussian,
)
from .sparse import ThresholdRule

__all__ = ["ConfigError", "ExperimentConfig", "SettingResult", "run_experiment", "format_report"]

log = logging.getLogger(__name__)


class ConfigError(DataError):
    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("invalid experiment config:\n  " + "\n  ".join(self.problems))


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation study.

    ``p`` and ``n`` may be single values or equal-length lists giving several
    (p, n) settings. ``tuning`` is ``cv``, ``fixed`` (uses ``k``/``delta``) or
    ``oracle`` (bandable block size from ``alpha``; sparse methods then use
    ``delta``). With ``complete_baselines`` each setting also reports the same
    estimators on complete data of size n_pair, n_single and n.
    """

    model: str
    p: int | list[int]
    n: int | list[int]
    mechanism: str = "mucr"
    rates: list[float] = field(default_factory=lambda: [0.5])
    reps: int = 100
    estimators: list[str] = field(default_factory=lambda: ["bt", "bt-bullet"])
    tuning: str = "cv"
    k: int | None = None
    delta: float | None = None
    alpha: float | None = None
    K: int = 5
    H: int = 5
    N: int = 20
    rule: str = "hard"
    losses: list[str] = field(default_factory=lambda: list(LOSS_KINDS))
    seed: int = 0
    output: str | None = None
    strict_bullet: bool = False
    bullet_known_rate: bool = True
    threshold_diagonal: bool = False
    complete_baselines: bool = False
    model_density: float = 0.2

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        if not isinstance(data, dict):
            raise ConfigError(["config must be a JSON object"])
        known = {f.name for f in dataclasses.fields(cls)}
        problems = [f"unknown key {k!r}" for k in data if k not in known]
        for required in ("model", "p", "n"):
            if required not in data:
                problems.append(f"missing required key {required!r}")
        if problems:
            raise ConfigError(problems)
        try:
            cfg = cls(**data)
        except TypeError as exc:
            raise ConfigError([str(exc)]) from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path: str | Path) -> ExperimentConfig:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise DataError(f"cannot read config {path}: {exc.strerror}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"not valid JSON: {exc}"]) from exc
        return cls.from_dict(data)

    def settings(self) -> list[tuple[int, int]]:
        ps = self.p if isinstance(self.p, list) else [self.p]
        ns = self.n if isinstance(self.n, list) else [self.n]
        if len(ps) == 1 and len(ns) > 1:
            ps = ps * len(ns)
        if len(ns) == 1 and len(ps) > 1:
            ns = ns * len(ps)
        return [(int(a), int(b)) for a, b in zip(ps, ns)]

    def mechanism_obj(self) -> MissingMechanism:
        return MissingMechanism(self.mechanism, tuple(self.rates))

    def validate(self) -> None:
        """Check every field; report all problems together."""
        problems: list[str] = []

        def is_int(x: Any) -> bool:
            return isinstance(x, int) and not isinstance(x, bool)

        if self.model not in MODEL_KINDS:
            problems.append(f"model must be one of {MODEL_KINDS}, got {self.model!r}")
        ps = self.p if isinstance(self.p, list) else [self.p]
        ns = self.n if isinstance(self.n, list) else [self.n]
        if not all(is_int(x) and x >= 2 for x in ps):
            problems.append("p must be an integer >= 2 or a list of them")
        if not all(is_int(x) and x >= 2 for x in ns):
            problems.append("n must be an integer >= 2 or a list of them")
        if len(ps) > 1 and len(ns) > 1 and len(ps) != len(ns):
            problems.append("p and n lists must have equal length")
        try:
            self.mechanism_obj()
        except (ValueError, TypeError) as exc:
            problems.append(f"mechanism: {exc}")
        if not is_int(self.reps) or self.reps < 1:
            problems.append("reps must be a positive integer")
        methods = []
        if not isinstance(self.estimators, list) or not self.estimators:
            problems.append("estimators must be a nonempty list")
        else:
            for e in self.estimators:
                try:
                    methods.append(normalize_method(str(e)))
                except ValueError as exc:
                    problems.append(str(exc))
        if self.tuning not in ("cv", "fixed", "oracle"):
            problems.append(f"tuning must be 'cv', 'fixed' or 'oracle', got {self.tuning!r}")
        bandable = [m for m in methods if m in BANDABLE_METHODS]
        sparse = [m for m in methods if m not in BANDABLE_METHODS]
        if self.tuning == "fixed" and bandable and not (is_int(self.k) and self.k >= 1):
            problems.append("fixed tuning of bandable estimators needs an integer k >= 1")
        if self.tuning in ("fixed", "oracle") and sparse and not (
            isinstance(self.delta, (int, float)) and self.delta >= 0
        ):
            problems.append(f"{self.tuning} tuning of sparse estimators needs delta >= 0")
        if self.tuning == "oracle" and bandable and not (
            isinstance(self.alpha, (int, float)) and self.alpha > 0
        ):
            problems.append("oracle tuning needs alpha > 0")
        if self.tuning == "cv" and "tp" in methods:
            problems.append("tp needs an even k and is not cross-validated; use tuning 'fixed'")
        if self.tuning == "fixed" and "tp" in methods and is_int(self.k) and self.k % 2:
            problems.append(f"tp needs an even k, got {self.k}")
        if self.tuning == "cv":
            try:
                CvPlan(self.K, self.H, self.N)
            except ValueError as exc:
                problems.append(f"cv: {exc}")
            for nn in ns:
                if is_int(nn) and is_int(self.K) and nn < self.K:
                    problems.append(f"n={nn} is smaller than K={self.K}")
        try:
            ThresholdRule.parse(self.rule)
        except (ValueError, AttributeError) as exc:
            problems.append(f"rule: {exc}")
        if not isinstance(self.losses, list) or not self.losses:
            problems.append("losses must be a nonempty list")
        else:
            problems += [f"unknown loss {x!r}" for x in self.losses if x not in LOSS_KINDS]
        if not is_int(self.seed) or self.seed < 0:
            problems.append("seed must be a non-negative integer")
        if not isinstance(self.model_density, (int, float)) or not 0 <= self.model_density <= 1:
            problems.append("model_density must lie in [0, 1]")
        if problems:
            raise ConfigError(problems)

    def options(self, mech: MissingMechanism) -> EstimatorOptions:
        rho = mech.rates[0] if (mech.kind == "mucr" and self.bullet_known_rate) else None
        return EstimatorOptions(
            rule=ThresholdRule.parse(self.rule),
            threshold_diagonal=self.threshold_diagonal,
            bullet_rho=rho,
            strict_bullet=self.strict_bullet and rho is None,
        )


@dataclass
class SettingResult:
    label: str
    p: int
    n: int
    mechanism: str
    losses: dict[str, dict[str, list[float]]]
    tuning: dict[str, list[float]]
    n_pair: list[float]
    n_single: list[float]


def _choose(cfg: ExperimentConfig, M, method: str, opts: EstimatorOptions, cv_seed: int) -> float:
    if cfg.tuning == "cv":
        plan = CvPlan(cfg.K, cfg.H, cfg.N, seed=cv_seed)
        return cv_select(M, method, plan, opts).t_star
    if method in BANDABLE_METHODS:
        if cfg.tuning == "oracle":
            return min(M.p, oracle_bandwidth(pairwise_counts(M).n_min, cfg.alpha))
        return min(M.p, cfg.k)
    return float(cfg.delta)


def run_replicate(
    cfg: ExperimentConfig,
    p: int,
    n: int,
    mech: MissingMechanism,
    tag: tuple[int, int],
    rep: int,
) -> dict[str, Any]:
    """Draw one data set and score every estimator on it."""
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, *tag, rep]))
    kwargs = {"density": cfg.model_density} if cfg.model == "randomly-sparse" else {}
    sigma = make_model(cfg.model, p, rng, **kwargs)
    X = sample_gaussian(SamplerSpec(sigma), n, rng)
    M = apply_missingness(X, mech, rng)
    n_pair, n_single = effective_sample_sizes(pairwise_counts(M))
    cv_seed = int(rng.integers(2**32))
    opts = cfg.options(mech)
    out: dict[str, Any] = {"n_pair": n_pair, "n_single": n_single, "losses": {}, "tuning": {}}
    for name in cfg.estimators:
        method = normalize_method(name)
        t = _choose(cfg, M, method, opts, cv_seed)
        est = fit(M, method, t, opts).matrix
        out["tuning"][method] = float(t)
        out["losses"][method] = {kind: loss(est, sigma, kind) for kind in cfg.losses}
    return out


def _run_setting(
    cfg: ExperimentConfig,
    p: int,
    n: int,
    mech: MissingMechanism,
    tag: tuple[int, int],
    label: str,
    pool: ProcessPoolExecutor | None,
) -> SettingResult:
    args = [(cfg, p, n, mech, tag, r) for r in range(cfg.reps)]
    if pool is None:
        reps = [run_replicate(*a) for a in args]
    else:
        reps = list(pool.map(run_replicate, *zip(*args)))
    methods = [normalize_method(e) for e in cfg.estimators]
    return SettingResult(
        label=label,
        p=p,
        n=n,
        mechanism=str(mech),
        losses={m: {k: [r["losses"][m][k] for r in reps] for k in cfg.losses} for m in methods},
        tuning={m: [r["tuning"][m] for r in reps] for m in methods},
        n_pair=[r["n_pair"] for r in reps],
        n_single=[r["n_single"] for r in reps],
    )


def run_experiment(cfg: ExperimentConfig, *, jobs: int = 1) -> list[SettingResult]:
    cfg.validate()
    mech = cfg.mechanism_obj()
    results: list[SettingResult] = []
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for s_idx, (p, n) in enumerate(cfg.settings()):
            log.info("setting p=%d n=%d %s, %d replicates", p, n, mech, cfg.reps)
            res = _run_setting(cfg, p, n, mech, (s_idx, 0), "missing", pool)
            results.append(res)
            if not cfg.complete_baselines:
                continue
            full = MissingMechanism.mucr(1.0)
            sizes = [
                ("complete n_c=n_pair", max(2, round(statistics.fmean(res.n_pair)))),
                ("complete n_c=n_single", max(2, round(statistics.fmean(res.n_single)))),
                ("complete n_c=n", n),
            ]
            for phase, (label, n_c) in enumerate(sizes, start=1):
                results.append(_run_setting(cfg, p, n_c, full, (s_idx, phase), label, pool))
    finally:
        if pool is not None:
            pool.shutdown()
    return results


def format_report(cfg: ExperimentConfig, results: Sequence[SettingResult]) -> str:
    """Tab-separated table: one row per (setting, estimator)."""
    header = ["model", "mechanism", "p", "n", "data", "estimator"]
    header += list(cfg.losses) + ["tuning_median", "n_pair", "n_single", "reps", "seed"]
    lines = ["\t".join(header)]
    for res in results:
        for method, per_kind in res.losses.items():
            cells = [cfg.model, res.mechanism, str(res.p), str(res.n), res.label, method]
            cells += [aggregate(per_kind[k], k).format(4) for k in cfg.losses]
            cells.append(f"{statistics.median(res.tuning[method]):g}")
            cells.append(f"{statistics.fmean(res.n_pair):.2f}")
            cells.append(f"{statistics.fmean(res.n_single):.2f}")
            cells += [str(len(res.tuning[method])), str(cfg.seed)]
            lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"
