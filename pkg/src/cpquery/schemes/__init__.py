"""Query schemes and a single dispatcher over them."""

from __future__ import annotations

from ..motion import Scenario, configuration_at
from .baselines import run_baseline, run_clairvoyant, run_round_robin
from .bucket import oracle_init, run_bucket
from .ftt import run_ftt, run_init
from .fwrr import assign_slots, fwrr_periods, run_fwrr
from .trace import KINDS, QueryTrace, SchemeConfig, SchemeError


def run_scheme(scn: Scenario, cfg: SchemeConfig, horizon: float | None = None) -> QueryTrace:
    """Run any scheme kind on a scenario with its default options."""
    horizon = scn.horizon if horizon is None else horizon
    if cfg.kind == "ftt":
        return run_ftt(scn, cfg)
    if cfg.kind == "fwrr":
        if not scn.is_stationary:
            raise SchemeError("FWRR needs a stationary scenario")
        return run_fwrr(configuration_at(scn, 0.0), cfg, horizon)
    if cfg.kind in ("bucket_basic", "bucket_refined"):
        return run_bucket(scn, cfg, init=cfg.params.get("init", "oracle"), horizon=horizon)
    if cfg.kind == "init":
        t0 = cfg.params.get("t0", cfg.target_time)
        if t0 is None:
            raise SchemeError("init needs params.t0 or a target time")
        return run_init(scn, cfg, float(t0))[0]
    return run_baseline(scn, cfg, horizon)


__all__ = [
    "KINDS",
    "QueryTrace",
    "SchemeConfig",
    "SchemeError",
    "assign_slots",
    "fwrr_periods",
    "oracle_init",
    "run_baseline",
    "run_bucket",
    "run_clairvoyant",
    "run_ftt",
    "run_fwrr",
    "run_init",
    "run_round_robin",
    "run_scheme",
]
