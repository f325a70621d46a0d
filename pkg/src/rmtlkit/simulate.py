"""Monte-Carlo studies of the RMTL-difference test and its comparators.

Three study modes over the built-in scenarios:

* estimation  - fixed restriction time (default 4.0): bias, RMSE,
  relative SE (mean model SE / empirical SD) and CI coverage against a
  cached large-sample truth.
* power       - data-driven restriction time (min-max rule): rejection
  rates of the RMTL-difference test and Gray's test at alpha.
* samplesize  - pilot-averaged effect and variances feed the design
  formula; the resulting total sample size is then validated by a
  fresh power run.

Every replicate draws from its own counter-derived substream
(numpy PCG64 seeded by SeedSequence(seed, spawn_key=(phase, index))),
so results are identical for any worker count or execution order, and
every reported metric carries a Monte-Carlo standard error.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import select_tau
from .design import DesignInput, sample_size
from .errors import SimulationError
from .inference import GrayResult, RmtlEstimate, RmtldResult, gray_test, rmtld_test
from .scenarios import ScenarioSpec, calibrate_censoring, generate_group, true_rmtld

__all__ = [
    "ReplicateOutcome",
    "SimulationReport",
    "run_replicate",
    "run_estimation_study",
    "run_power_study",
    "run_samplesize_validation",
]

RNG_NAME = "numpy-PCG64/SeedSequence"
SCHEMA_VERSION = 1

_PHASE_MAIN = 0
_PHASE_PILOT = 1
_PHASE_POWER = 2


@dataclass(frozen=True)
class ReplicateOutcome:
    """Everything one replicate produced (fields unused by a mode are None)."""

    rmtld: RmtldResult | None
    rmtl0: RmtlEstimate | None
    rmtl1: RmtlEstimate | None
    gray: GrayResult | None
    tau_used: float | None
    usable: bool


@dataclass
class SimulationReport:
    """Aggregated study output plus everything needed to reproduce it."""

    mode: str
    scenario_id: str
    n0: int
    n1: int
    censor_target: int
    reps: int
    seed: int
    metrics: dict = field(default_factory=dict)
    unusable: int = 0
    censor_bounds: dict = field(default_factory=dict)
    rng: str = RNG_NAME
    tau_rule: str = "min-max"
    fixed_tau: float | None = None
    extra: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def add_metric(self, name: str, value: float, mc_se: float):
        self.metrics[name] = {"value": float(value), "mc_se": float(mc_se)}

    def to_json_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "mode": self.mode,
            "scenario": self.scenario_id,
            "n0": self.n0,
            "n1": self.n1,
            "censoring_percent": self.censor_target,
            "reps": self.reps,
            "seed": self.seed,
            "rng": self.rng,
            "tau_rule": self.tau_rule,
            "fixed_tau": self.fixed_tau,
            "unusable_replicates": self.unusable,
            "censor_bounds": {str(k): v for k, v in self.censor_bounds.items()},
            "metrics": self.metrics,
            **({"extra": self.extra} if self.extra else {}),
        }

    def csv_rows(self) -> list[tuple]:
        """One row per metric, matching the report-table layout."""
        return [
            (
                self.scenario_id,
                self.n0,
                self.n1,
                self.censor_target,
                name,
                entry["value"],
                entry["mc_se"],
            )
            for name, entry in self.metrics.items()
        ]

    def csv_header_comments(self) -> list[str]:
        bounds = ", ".join(
            f"group{g}={b if b is not None else 'none'}"
            for g, b in sorted(self.censor_bounds.items())
        )
        return [
            f"# mode={self.mode} seed={self.seed} reps={self.reps} rng={self.rng}",
            f"# censor_bounds: {bounds or 'none'}",
        ]


def _rng_for(seed: int, phase: int, index: int):
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(phase, index))
    )


def run_replicate(
    spec: ScenarioSpec,
    seed: int,
    index: int,
    fixed_tau: float | None = None,
    alpha: float = 0.05,
) -> ReplicateOutcome:
    """Execute one replicate and return everything it produced.

    With ``fixed_tau`` set, behaves like one estimation replicate
    (``usable`` is False when the follow-up ends earlier, and no tests
    are run in that case); otherwise the restriction time follows the
    min-max rule and Gray's test is included. The same (seed, index)
    pair always reproduces the same outcome.
    """
    rng = _rng_for(seed, _PHASE_MAIN, index)
    s0 = generate_group(spec, 0, spec.n0, rng)
    s1 = generate_group(spec, 1, spec.n1, rng)
    tau_max = select_tau(s0, s1)
    if fixed_tau is not None and tau_max < fixed_tau:
        return ReplicateOutcome(
            rmtld=None, rmtl0=None, rmtl1=None, gray=None,
            tau_used=None, usable=False,
        )
    tau = fixed_tau if fixed_tau is not None else tau_max
    res = rmtld_test(s0, s1, tau, alpha=alpha)
    gray = gray_test(s0, s1, cause=1) if fixed_tau is None else None
    return ReplicateOutcome(
        rmtld=res, rmtl0=res.group0, rmtl1=res.group1, gray=gray,
        tau_used=tau, usable=True,
    )


def _estimation_replicate(spec: ScenarioSpec, seed: int, index: int, fixed_tau, alpha):
    rng = _rng_for(seed, _PHASE_MAIN, index)
    s0 = generate_group(spec, 0, spec.n0, rng)
    s1 = generate_group(spec, 1, spec.n1, rng)
    if select_tau(s0, s1) < fixed_tau:
        return None
    res = rmtld_test(s0, s1, fixed_tau, alpha=alpha)
    return (res.delta, math.sqrt(res.variance), res.ci_low, res.ci_high)


def _power_replicate(spec: ScenarioSpec, seed: int, index: int, phase, alpha, n0, n1):
    rng = _rng_for(seed, phase, index)
    s0 = generate_group(spec, 0, n0, rng)
    s1 = generate_group(spec, 1, n1, rng)
    tau = select_tau(s0, s1)
    res = rmtld_test(s0, s1, tau, alpha=alpha)
    gray = gray_test(s0, s1, cause=1)
    return (res.p, gray.p, tau)


def _pilot_replicate(spec: ScenarioSpec, seed: int, index: int, n0, n1):
    rng = _rng_for(seed, _PHASE_PILOT, index)
    s0 = generate_group(spec, 0, n0, rng)
    s1 = generate_group(spec, 1, n1, rng)
    tau = select_tau(s0, s1)
    res = rmtld_test(s0, s1, tau)
    return (
        res.delta,
        n0 * res.group0.variance,
        n1 * res.group1.variance,
    )


def _chunk_worker(args):
    fn, spec, seed, indices, extra = args
    return [fn(spec, seed, i, *extra) for i in indices]


def _map_replicates(fn, spec, seed, reps, extra, workers):
    if workers <= 1:
        return [fn(spec, seed, i, *extra) for i in range(reps)]
    chunks = np.array_split(np.arange(reps), workers * 4)
    jobs = [(fn, spec, seed, chunk.tolist(), extra) for chunk in chunks if chunk.size]
    out = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_chunk_worker, jobs):
            out.extend(part)
    return out


def _bounds_for(spec: ScenarioSpec) -> dict:
    return {
        g: calibrate_censoring(spec, spec.censor_target, g)
        if spec.censor_target
        else None
        for g in (0, 1)
    }


def run_estimation_study(
    spec: ScenarioSpec,
    reps: int,
    fixed_tau: float = 4.0,
    seed: int = 0,
    alpha: float = 0.05,
    workers: int = 1,
) -> SimulationReport:
    """Estimation performance at a fixed restriction time.

    Replicates whose shorter maximum follow-up ends before ``fixed_tau``
    cannot be evaluated there; they are skipped and counted, and the
    study aborts with diagnostics when more than half are lost. Bias is
    measured against the cached large-sample truth; for the null
    scenario A plain bias is reported instead of relative bias.
    """
    if reps < 100:
        raise ValueError("reps must be at least 100")
    truth = true_rmtld(spec, tau=fixed_tau)
    records = _map_replicates(
        _estimation_replicate, spec, seed, reps, (fixed_tau, alpha), workers
    )
    usable = [r for r in records if r is not None]
    n_bad = reps - len(usable)
    if n_bad > reps / 2:
        raise SimulationError(
            f"{n_bad}/{reps} replicates end before tau={fixed_tau}; "
            "estimation at this censoring level is not identifiable",
            diagnostics={
                "unusable": n_bad,
                "reps": reps,
                "fixed_tau": fixed_tau,
                "censor_bounds": _bounds_for(spec),
            },
        )
    deltas = np.array([r[0] for r in usable])
    ses = np.array([r[1] for r in usable])
    cover = np.array([(r[2] <= truth <= r[3]) for r in usable], dtype=float)
    n_use = deltas.size

    sd = float(np.std(deltas, ddof=1))
    bias = float(np.mean(deltas) - truth)
    rmse = float(np.sqrt(np.mean((deltas - truth) ** 2)))
    rel_se = float(np.mean(ses) / sd)
    coverage = float(np.mean(cover))

    report = SimulationReport(
        mode="estimation",
        scenario_id=spec.id,
        n0=spec.n0,
        n1=spec.n1,
        censor_target=spec.censor_target,
        reps=reps,
        seed=seed,
        unusable=n_bad,
        censor_bounds=_bounds_for(spec),
        tau_rule="fixed",
        fixed_tau=fixed_tau,
        extra={"true_delta": truth},
    )
    se_mean = sd / math.sqrt(n_use)
    report.add_metric("bias", bias, se_mean)
    if spec.id != "A":
        report.add_metric("rel_bias", bias / truth, abs(se_mean / truth))
    sq_err = (deltas - truth) ** 2
    rmse_se = float(np.std(sq_err, ddof=1)) / math.sqrt(n_use) / (2.0 * rmse)
    report.add_metric("rmse", rmse, rmse_se)
    rel_se_se = rel_se * math.sqrt(
        np.var(ses, ddof=1) / (n_use * np.mean(ses) ** 2) + 1.0 / (2.0 * (n_use - 1))
    )
    report.add_metric("rel_se", rel_se, rel_se_se)
    report.add_metric(
        "coverage", coverage, math.sqrt(coverage * (1.0 - coverage) / n_use)
    )
    return report


def run_power_study(
    spec: ScenarioSpec,
    reps: int,
    seed: int = 0,
    alpha: float = 0.05,
    workers: int = 1,
) -> SimulationReport:
    """Rejection rates of both tests with the min-max restriction rule."""
    if reps < 100:
        raise ValueError("reps must be at least 100")
    records = _map_replicates(
        _power_replicate,
        spec,
        seed,
        reps,
        (_PHASE_MAIN, alpha, spec.n0, spec.n1),
        workers,
    )
    p_rmtld = np.array([r[0] for r in records])
    p_gray = np.array([r[1] for r in records])
    taus = np.array([r[2] for r in records])

    report = SimulationReport(
        mode="power",
        scenario_id=spec.id,
        n0=spec.n0,
        n1=spec.n1,
        censor_target=spec.censor_target,
        reps=reps,
        seed=seed,
        censor_bounds=_bounds_for(spec),
    )
    for name, pvals in (("rejection_rmtld", p_rmtld), ("rejection_gray", p_gray)):
        rate = float(np.mean(pvals < alpha))
        report.add_metric(name, rate, math.sqrt(rate * (1.0 - rate) / reps))
    report.add_metric("mean_tau", float(np.mean(taus)),
                      float(np.std(taus, ddof=1)) / math.sqrt(reps))
    return report


def run_samplesize_validation(
    spec: ScenarioSpec,
    seed: int = 0,
    pilot_reps: int = 200,
    power_reps: int = 2000,
    alpha: float = 0.05,
    target_power: float = 0.8,
    refinements: int = 2,
    workers: int = 1,
) -> SimulationReport:
    """Close the design loop: estimate the effect and variances by
    simulation averaging, size the trial, then measure the power
    actually achieved at that size.

    The pilot is re-run at each newly computed size (``refinements``
    times) because the data-driven restriction time, and with it the
    effect and variances, shift with the sample size.
    """
    ratio = spec.n1 / spec.n0
    n0_cur, n1_cur = spec.n0, spec.n1
    design = None
    inputs = None
    for _ in range(refinements + 1):
        rows = _map_replicates(
            _pilot_replicate, spec, seed, pilot_reps, (n0_cur, n1_cur), workers
        )
        delta_bar = float(np.mean([r[0] for r in rows]))
        sig0_bar = float(np.mean([r[1] for r in rows]))
        sig1_bar = float(np.mean([r[2] for r in rows]))
        inputs = DesignInput(
            delta=delta_bar,
            sigma0_sq=sig0_bar,
            sigma1_sq=sig1_bar,
            ratio=ratio,
            alpha=alpha,
            power=target_power,
        )
        design = sample_size(inputs)
        n0_cur, n1_cur = design.n0, design.n1

    records = _map_replicates(
        _power_replicate,
        spec,
        seed,
        power_reps,
        (_PHASE_POWER, alpha, design.n0, design.n1),
        workers,
    )
    p_rmtld = np.array([r[0] for r in records])
    p_gray = np.array([r[1] for r in records])

    report = SimulationReport(
        mode="samplesize",
        scenario_id=spec.id,
        n0=design.n0,
        n1=design.n1,
        censor_target=spec.censor_target,
        reps=power_reps,
        seed=seed,
        censor_bounds=_bounds_for(spec),
        extra={
            "pilot_reps": pilot_reps,
            "pilot_delta": inputs.delta,
            "pilot_sigma0_sq": inputs.sigma0_sq,
            "pilot_sigma1_sq": inputs.sigma1_sq,
            "target_power": target_power,
        },
    )
    report.add_metric("total_n", design.total, 0.0)
    for name, pvals in (("power_rmtld", p_rmtld), ("power_gray", p_gray)):
        rate = float(np.mean(pvals < alpha))
        report.add_metric(name, rate, math.sqrt(rate * (1.0 - rate) / power_reps))
    return report
