"""
Batch Runner Module

Runs a scenario batch for one command and writes its CSV outputs plus a
run manifest. Rows are always ordered by scenario id, so the files do not
depend on the number of workers.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from market.config import RunConfig, Settings, config_hash
from market.errors import ConfigValidationError
from market.incentives import (
    ESR_DIRECTIONS,
    GENERATOR_DIRECTIONS,
    Direction,
    audit_scenario,
    condition_frequency,
    perturbation_sweep,
)
from market.pricing import PricingScheme, extract_prices
from market.scenario import Scenario, build_scenarios, map_scenarios, simulate
from market.settlement import SettlementRecord, settle

logger = logging.getLogger('runner')

VERSION = "0.1.0"


@dataclass(frozen=True)
class RunOptions:
    out_dir: Path
    seed: int
    scenarios: int
    schemes: tuple[PricingScheme, ...]
    jobs: int = 1
    float_format: str = "%.9g"

    @classmethod
    def resolve(
        cls,
        run: RunConfig,
        settings: Settings,
        seed: int | None = None,
        scenarios: int | None = None,
        scheme: str | None = None,
        out: str | None = None,
        jobs: int | None = None,
    ) -> RunOptions:
        """CLI flags win over MARKETSIM_* settings, which win over the config's experiment block."""
        if out is None:
            if "output_dir" in settings.model_fields_set or run.experiment.output_dir is None:
                out = settings.output_dir
            else:
                out = run.experiment.output_dir
        if scheme is None or scheme == "both":
            schemes = run.experiment.schemes if scheme is None else ["lmp", "tlmp"]
        else:
            schemes = [scheme]
        return cls(
            out_dir=Path(out),
            seed=run.experiment.seed if seed is None else seed,
            scenarios=run.experiment.scenarios if scenarios is None else scenarios,
            schemes=tuple(PricingScheme(s) for s in schemes),
            jobs=settings.jobs if jobs is None else jobs,
            float_format=settings.float_format,
        )


# ═══════════════════════════════════════════════════════════
# OUTPUT HELPERS
# ═══════════════════════════════════════════════════════════

def write_csv(rows: list[dict], path: Path, float_format: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows).to_csv(path, index=False, float_format=float_format)
    logger.info(f"✓ Wrote {len(rows)} rows to {path}")
    return path


def write_manifest(run: RunConfig, options: RunOptions, command: str, outputs: list[Path]) -> Path:
    manifest = {
        "command": command,
        "version": VERSION,
        "config_hash": config_hash(run),
        "seed": options.seed,
        "scenarios": options.scenarios,
        "schemes": [s.value for s in options.schemes],
        "outputs": [p.name for p in outputs],
    }
    path = options.out_dir / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _scenarios(run: RunConfig, options: RunOptions, horizon: int | None = None) -> list[Scenario]:
    return build_scenarios(run, count=options.scenarios, seed=options.seed, horizon=horizon)


# ═══════════════════════════════════════════════════════════
# SIMULATE
# ═══════════════════════════════════════════════════════════

def _simulate_rows(scenario: Scenario, schemes: tuple[PricingScheme, ...]) -> tuple[list[dict], list[dict]]:
    rolling = simulate(scenario)
    dispatch_rows, price_rows = [], []
    for t in range(rolling.horizon):
        dispatch_rows.append({
            "scenario": scenario.scenario_id, "t": t + 1, "participant": "demand", "kind": "demand",
            "mw": rolling.demand[t], "discharge_mw": np.nan, "charge_mw": np.nan, "soc_mwh": np.nan,
        })
        for n, gen in enumerate(rolling.generators):
            dispatch_rows.append({
                "scenario": scenario.scenario_id, "t": t + 1, "participant": gen.name, "kind": "generator",
                "mw": rolling.generator_output[n, t], "discharge_mw": np.nan, "charge_mw": np.nan, "soc_mwh": np.nan,
            })
        for i, esr in enumerate(rolling.esrs):
            dispatch_rows.append({
                "scenario": scenario.scenario_id, "t": t + 1, "participant": esr.name, "kind": "esr",
                "mw": rolling.discharge[i, t] - rolling.charge[i, t],
                "discharge_mw": rolling.discharge[i, t], "charge_mw": rolling.charge[i, t],
                "soc_mwh": rolling.soc[i, t],
            })

    for scheme in schemes:
        prices = extract_prices(rolling, scheme)
        for t in range(rolling.horizon):
            base = {"scenario": scenario.scenario_id, "t": t + 1, "scheme": scheme.value, "energy": prices.energy[t]}
            price_rows.append({**base, "participant": "demand", "direction": "consumption",
                               "price": prices.demand[t], "soc_price": np.nan, "ramping": np.nan})
            for n, gen in enumerate(rolling.generators):
                price_rows.append({**base, "participant": gen.name, "direction": "generation",
                                   "price": prices.generator[n, t], "soc_price": np.nan,
                                   "ramping": prices.ramping[n, t]})
            for i, esr in enumerate(rolling.esrs):
                for direction, values in (("discharge", prices.discharge), ("charge", prices.charge)):
                    price_rows.append({**base, "participant": esr.name, "direction": direction,
                                       "price": values[i, t], "soc_price": prices.soc[i, t], "ramping": np.nan})
    return dispatch_rows, price_rows


def run_simulate(run: RunConfig, options: RunOptions) -> list[Path]:
    """dispatch.csv and prices.csv for every scenario."""
    scenarios = _scenarios(run, options)
    results = map_scenarios(_simulate_rows, scenarios, options.jobs, schemes=options.schemes)
    outputs = [
        write_csv([r for d, _ in results for r in d], options.out_dir / "dispatch.csv", options.float_format),
        write_csv([r for _, p in results for r in p], options.out_dir / "prices.csv", options.float_format),
    ]
    write_manifest(run, options, "simulate", outputs)
    return outputs


# ═══════════════════════════════════════════════════════════
# SETTLE
# ═══════════════════════════════════════════════════════════

def _settle_scenario(scenario: Scenario, schemes: tuple[PricingScheme, ...]) -> list[SettlementRecord]:
    bids = scenario.truthful_bids()
    rolling = simulate(scenario, bids)
    return [settle(extract_prices(rolling, scheme), rolling, bids) for scheme in schemes]


def _settlement_rows(scenario_id: int, record: SettlementRecord) -> list[dict]:
    rows = [
        {
            "scenario": scenario_id,
            "scheme": record.scheme.value,
            "participant": entry.participant.name,
            "kind": entry.participant.kind.value,
            "energy_revenue": entry.energy_revenue,
            "true_cost": entry.true_cost,
            "surplus": entry.surplus,
            "loc": entry.loc,
            "profit": entry.profit,
        }
        for entry in record.participants
    ]
    system = {
        "energy_payment": record.energy_payment,
        "merchandising_surplus": record.merchandising_surplus,
        "total_loc": record.total_loc,
        "consumer_payment": record.consumer_payment,
        "retained_surplus": record.retained_surplus,
    }
    for name, value in system.items():
        rows.append({
            "scenario": scenario_id, "scheme": record.scheme.value, "participant": "system", "kind": name,
            "energy_revenue": np.nan, "true_cost": np.nan, "surplus": np.nan, "loc": np.nan, "profit": value,
        })
    return rows


def run_settle(run: RunConfig, options: RunOptions) -> list[Path]:
    """settlement.csv: participant rows plus system rows per scenario and scheme."""
    scenarios = _scenarios(run, options)
    records = map_scenarios(_settle_scenario, scenarios, options.jobs, schemes=options.schemes)
    rows = []
    for scenario, scenario_records in zip(scenarios, records):
        for record in scenario_records:
            rows += _settlement_rows(scenario.scenario_id, record)
            if record.degenerate:
                logger.warning(f"⚠ Scenario {scenario.scenario_id}: degenerate {record.scheme.label} windows")

    for scheme in options.schemes:
        worst = max((r.max_loc for recs in records for r in recs if r.scheme is scheme), default=0.0)
        logger.info(f"{scheme.label}: largest participant LOC {worst:.6g}")

    outputs = [write_csv(rows, options.out_dir / "settlement.csv", options.float_format)]
    write_manifest(run, options, "settle", outputs)
    return outputs


# ═══════════════════════════════════════════════════════════
# PERTURB
# ═══════════════════════════════════════════════════════════

def run_perturb(run: RunConfig, options: RunOptions) -> list[Path]:
    """perturb.csv (one row per scheme and direction) and perturb_scenarios.csv."""
    scenarios = _scenarios(run, options)
    participant = run.perturbed_participant
    is_esr = participant in {e.name for e in run.esrs}
    directions = tuple(d for d in map(Direction, run.experiment.directions) if d.for_esr == is_esr)
    if not directions:
        directions = ESR_DIRECTIONS if is_esr else GENERATOR_DIRECTIONS

    summary, detail = [], []
    for scheme in options.schemes:
        results = perturbation_sweep(
            scenarios, participant, run.experiment.epsilon, directions, scheme, jobs=options.jobs,
        )
        for result in results:
            summary.append(result.as_row())
            for s in range(result.n):
                detail.append({
                    "scenario": int(result.scenario_ids[s]),
                    "scheme": scheme.value,
                    "direction": result.direction.value,
                    "delta_profit": result.delta_profit[s],
                    "degenerate": bool(result.degenerate[s]),
                    "dispatch_changed": bool(result.dispatch_changed[s]),
                })

    outputs = [
        write_csv(summary, options.out_dir / "perturb.csv", options.float_format),
        write_csv(detail, options.out_dir / "perturb_scenarios.csv", options.float_format),
    ]
    write_manifest(run, options, "perturb", outputs)
    return outputs


# ═══════════════════════════════════════════════════════════
# AUDIT
# ═══════════════════════════════════════════════════════════

def run_audit(run: RunConfig, options: RunOptions) -> list[Path]:
    """audit.csv per scenario and audit_summary.csv with fired fractions per horizon."""
    scenarios = _scenarios(run, options)
    records = map_scenarios(audit_scenario, scenarios, options.jobs)

    rows = []
    for record in records:
        report = record.report
        rows.append({
            "scenario": record.scenario_id,
            "fired": report.fired,
            "witnesses": ";".join(f"{w.first}/{w.second}@{w.t + 1}" for w in report.witnesses),
            "distinct_costs": report.distinct_costs,
            "both_marginal": report.both_marginal,
            "soc_untouched": report.soc_untouched,
            "uniform_zero_loc_price": record.verdict.exists_zero_loc_price,
            "esr_loc": record.esr_loc,
            "degenerate": record.degenerate,
        })

    fired = [r for r in records if r.report.fired and not r.degenerate]
    agree = sum(not r.verdict.exists_zero_loc_price for r in fired)
    excluded = sum(r.report.fired and r.degenerate for r in records)
    logger.info(
        f"Conditions fired in {len(fired)} non-degenerate scenarios; oracle agrees in {agree}; "
        f"{excluded} degenerate scenarios excluded"
    )

    profile_length = len(run.forecast.mean_profile or run.forecast.scripted.realization)
    sets = {}
    for horizon in run.experiment.audit_horizons:
        if horizon > profile_length:
            logger.warning(f"⚠ Skipping T={horizon}: demand profile has {profile_length} intervals")
            continue
        sets[horizon] = _scenarios(run, options, horizon=horizon)
    frequency = condition_frequency(sets, jobs=options.jobs)
    summary = [
        {"horizon": row.horizon, "scenarios": row.scenarios, "fired": row.fired, "fraction": row.fraction}
        for row in frequency
    ]

    outputs = [
        write_csv(rows, options.out_dir / "audit.csv", options.float_format),
        write_csv(summary, options.out_dir / "audit_summary.csv", options.float_format),
    ]
    write_manifest(run, options, "audit", outputs)
    return outputs


# ═══════════════════════════════════════════════════════════
# SOC SWEEP
# ═══════════════════════════════════════════════════════════

def _with_soc_capacity(scenarios: list[Scenario], capacity: float) -> list[Scenario]:
    esrs = [
        e.model_copy(update={"soc_max": capacity, "soc_initial": min(e.soc_initial, capacity)})
        for e in scenarios[0].esrs
    ] if scenarios else []
    return [s.with_esrs(esrs) for s in scenarios]


def run_soc_sweep(run: RunConfig, options: RunOptions) -> list[Path]:
    """soc_sweep.csv: mean and std of settlement totals per SOC capacity and scheme."""
    if not run.experiment.soc_capacities:
        raise ConfigValidationError(["experiment.soc_capacities: at least one capacity is required"])
    base = _scenarios(run, options)
    rows = []
    for capacity in run.experiment.soc_capacities:
        scenarios = _with_soc_capacity(base, capacity)
        records = map_scenarios(_settle_scenario, scenarios, options.jobs, schemes=options.schemes)
        for s, scheme in enumerate(options.schemes):
            per_scheme = [recs[s] for recs in records]
            metrics = {
                "total_loc": np.array([r.total_loc for r in per_scheme]),
                "merchandising_surplus": np.array([r.merchandising_surplus for r in per_scheme]),
                "consumer_payment": np.array([r.consumer_payment for r in per_scheme]),
                "esr_profit": np.array([r.esr_profit for r in per_scheme]),
            }
            row = {"soc_max": capacity, "scheme": scheme.value, "n": len(per_scheme)}
            for name, values in metrics.items():
                row[f"{name}_mean"] = float(values.mean())
                row[f"{name}_std"] = float(values.std(ddof=1)) if values.size > 1 else 0.0
            rows.append(row)

    outputs = [write_csv(rows, options.out_dir / "soc_sweep.csv", options.float_format)]
    write_manifest(run, options, "soc-sweep", outputs)
    return outputs


COMMANDS = {
    "simulate": run_simulate,
    "settle": run_settle,
    "perturb": run_perturb,
    "audit": run_audit,
    "soc-sweep": run_soc_sweep,
}
