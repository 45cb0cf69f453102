"""Experiment configs, dispatch to the protocol modules, and report serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field

from . import equatorial, realspace, separable
from .channel import BranchTable, RoundPlan, enumerate_branches, sample_many, teleport_cost
from .errors import ConfigError, InvariantViolation
from .states import QuditSpec

PROTOCOLS = ("equatorial", "real-min", "separable")
MODES = ("sample", "exhaustive")
FORMATS = ("json", "csv")


@dataclass(frozen=True)
class ExperimentConfig:
    protocol: str
    target: QuditSpec
    pairs: int | None = None
    mode: str = "exhaustive"
    trials: int = 10_000
    seed: int = 0
    policy: str = "case1"
    us_catalog: str = "identity"
    max_groupings: int | None = None
    factored: bool = False
    workers: int | None = 1

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}; choose from {PROTOCOLS}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.mode == "sample" and self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.protocol == "equatorial" and self.target.kind != "equatorial":
            raise ConfigError("the equatorial protocol needs an equatorial target (phases)")
        if self.protocol != "equatorial" and not self.target.is_real:
            raise ConfigError(f"the {self.protocol} protocol needs a real target")
        if self.policy not in separable.POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}; choose from {separable.POLICIES}")

    def echo(self) -> dict:
        d = {
            "protocol": self.protocol,
            "target": self.target.to_dict(),
            "pairs": self.pairs,
            "mode": self.mode,
            "seed": self.seed,
        }
        if self.mode == "sample":
            d["trials"] = self.trials
        if self.protocol == "separable":
            d.update(policy=self.policy, us_catalog=self.us_catalog, max_groupings=self.max_groupings)
        if self.protocol == "real-min":
            d["factored"] = self.factored
        return d


@dataclass(frozen=True)
class ExperimentReport:
    config: dict
    protocol: str
    s: int
    L: int
    exact_success_probability: float
    analytic_success_probability: float
    mean_fidelity_on_success: float | None
    cbits_per_run: float
    teleport_cbits_baseline: float
    table: BranchTable = field(repr=False)
    empirical_success_probability: float | None = None
    sample: dict | None = None
    wall_time: float | None = None

    def to_dict(self, *, timing: bool = False) -> dict:
        d = {
            "config": self.config,
            "protocol": self.protocol,
            "s": self.s,
            "L": self.L,
            "success_probability": {
                "exact": self.exact_success_probability,
                "analytic": self.analytic_success_probability,
                "empirical": self.empirical_success_probability,
            },
            "mean_fidelity_on_success": self.mean_fidelity_on_success,
            "cbits_per_run": self.cbits_per_run,
            "teleport_cbits_baseline": self.teleport_cbits_baseline,
        }
        if self.table.extras:
            d["details"] = self.table.extras
        if self.sample is None:
            d["branches"] = [b.to_dict() for b in self.table.branches]
        else:
            d["sample"] = self.sample
        if timing:
            d["wall_time"] = self.wall_time
        return d


def build_plan(cfg: ExperimentConfig) -> RoundPlan:
    if cfg.protocol == "equatorial":
        return equatorial.plan_equatorial(cfg.target.s, cfg.target.phases, cfg.pairs)
    if cfg.protocol == "real-min":
        return realspace.plan_realspace(cfg.target, cfg.pairs, factored=cfg.factored)
    return separable.plan_separable(cfg.target, cfg.pairs, cfg.policy, cfg.us_catalog,
                                    cfg.max_groupings)


def analytic_success(plan: RoundPlan) -> float:
    if plan.protocol == "equatorial":
        return equatorial.success_probability(plan.s, plan.L)
    return 1.0


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    start = time.perf_counter()
    plan = build_plan(cfg)
    table = enumerate_branches(plan)
    exact = table.success_probability
    claim = analytic_success(plan)
    if abs(exact - claim) > 1e-12:
        raise InvariantViolation(f"exact success probability {exact!r} != analytic {claim!r}")

    empirical = sample = None
    if cfg.mode == "sample":
        summary = sample_many(plan, cfg.trials, cfg.seed, cfg.workers, table=table)
        empirical = summary.success_frequency
        mean_fid = summary.mean_fidelity_on_success
        se = math.sqrt(exact * (1 - exact) / cfg.trials)
        sample = {
            "trials": summary.trials,
            "successes": summary.successes,
            "outcome_counts": list(summary.counts),
            "standard_error": se,
            "deviation_in_standard_errors": (abs(empirical - exact) / se) if se > 0 else None,
        }
    else:
        won = [b for b in table.branches if b.success]
        mean_fid = (math.fsum(b.prob * b.fidelity for b in won) / exact) if won else None

    return ExperimentReport(
        config=cfg.echo(),
        protocol=plan.protocol,
        s=plan.s,
        L=plan.L,
        exact_success_probability=exact,
        analytic_success_probability=claim,
        mean_fidelity_on_success=mean_fid,
        cbits_per_run=table.cbits,
        teleport_cbits_baseline=teleport_cost(plan.s, plan.L),
        table=table,
        empirical_success_probability=empirical,
        sample=sample,
        wall_time=time.perf_counter() - start,
    )


BRANCH_COLUMNS = ("k", "prob", "success", "fidelity", "cbits")
AGGREGATE_COLUMNS = ("protocol", "s", "L", "trials", "successes", "empirical_success_probability",
                     "exact_success_probability", "mean_fidelity_on_success", "cbits_per_run",
                     "teleport_cbits_baseline")


def emit_report(r: ExperimentReport, fmt: str = "json", *, timing: bool = False) -> bytes:
    """Serialize a report; the output is byte-stable for a fixed config and seed."""
    if fmt == "json":
        return (json.dumps(r.to_dict(timing=timing), indent=2, sort_keys=True) + "\n").encode()
    if fmt != "csv":
        raise ConfigError(f"unknown format {fmt!r}; choose from {FORMATS}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if r.sample is None:
        w.writerow(BRANCH_COLUMNS)
        for b in r.table.branches:
            w.writerow([b.k, repr(b.prob), int(b.success), repr(b.fidelity), repr(b.cbits)])
    else:
        w.writerow(AGGREGATE_COLUMNS)
        w.writerow([r.protocol, r.s, r.L, r.sample["trials"], r.sample["successes"],
                    repr(r.empirical_success_probability), repr(r.exact_success_probability),
                    repr(r.mean_fidelity_on_success), repr(r.cbits_per_run),
                    repr(r.teleport_cbits_baseline)])
    return buf.getvalue().encode()
