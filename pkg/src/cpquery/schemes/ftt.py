"""Fixed-target-time round robins: FTT and its super-safe initialization variant."""

from __future__ import annotations

import numpy as np

from .. import congestion
from ..geometry import TOL, scheme_lambda, x_separations
from ..motion import Scenario, configuration_at
from ..uncertainty import PerceptionState, apply_query, perceived_x_separations, projected_regions
from .trace import QueryTrace, SchemeConfig, SchemeError

CUTOFF = 1e-9
INIT_SHRINK = 15.0 / 16.0


def _query_round(
    scn: Scenario, st: PerceptionState, trace: QueryTrace, survivors: list[int], start: float, length: float
) -> float:
    """Query survivors evenly over [start, start + length); returns the granularity."""
    gran = length / len(survivors)
    for k, i in enumerate(survivors):
        t = trace.add(start + k * gran, i)
        apply_query(st, i, t, scn)
    return gran


def _region_gaps(centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Pairwise distance between region boundaries (negative when overlapping)."""
    diff = centers[:, None, :] - centers[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    with np.errstate(invalid="ignore"):
        gaps = dist - radii[:, None] - radii[None, :]
    gaps[~np.isfinite(radii), :] = -np.inf
    gaps[:, ~np.isfinite(radii)] = -np.inf
    np.fill_diagonal(gaps, np.inf)
    return gaps


def _classify_ftt(st: PerceptionState, tau: float, survivors: list[int], bound: int, measure: str):
    centers, radii = projected_regions(st, tau)
    adj = congestion.adjacency(centers, radii, TOL)
    if measure == "degree":
        unsafe = [i for i in survivors if adj[i].sum() - 1 > bound - 1]
        mask = np.zeros(st.n, dtype=bool)
        mask[unsafe] = True
        safe_kept = [i for i in survivors if i not in set(unsafe) and adj[i, mask].any()]
        return unsafe, safe_kept
    if measure == "ply":
        unsafe = [i for i in survivors if congestion.ply_within(centers, radii, st.dim, i).value > bound]
        return unsafe, []
    raise ValueError(f"unknown measure {measure!r}")


def run_ftt(scn: Scenario, cfg: SchemeConfig) -> QueryTrace:
    """Fixed-target round robin guaranteeing degree (or ply) <= bound at tau.

    Round r queries every survivor evenly in the first half of the remaining
    time; survivors are the unsafe entities plus, for the degree measure, the
    safe entities whose projected regions meet an unsafe one.
    """
    tau = cfg.target_time if cfg.target_time is not None else scn.target_time
    if tau is None or tau <= 0:
        raise SchemeError("FTT needs a positive target time")
    bound = cfg.bound
    measure = cfg.params.get("measure", "degree")
    st = PerceptionState.for_scenario(scn)
    trace = QueryTrace(scheme=f"ftt[{bound}]")
    survivors = list(range(scn.n))
    start = 0.0
    rounds = []
    while True:
        remaining = tau - start
        gran = _query_round(scn, st, trace, survivors, start, remaining / 2.0)
        start += remaining / 2.0
        unsafe, kept = _classify_ftt(st, tau, survivors, bound, measure)
        rounds.append({"queried": len(survivors), "granularity": gran, "unsafe": len(unsafe), "kept_safe": len(kept)})
        if not unsafe:
            break
        if tau - start < CUTOFF * tau:
            trace.feasible = False
            trace.warnings.append(f"{len(unsafe)} entities still unsafe at cutoff")
            break
        survivors = sorted(unsafe + kept)
    trace.meta.update(target_time=tau, bound=bound, measure=measure, rounds=rounds)
    return trace


def run_init(
    scn: Scenario, cfg: SchemeConfig, t0: float, a: float | None = None
) -> tuple[QueryTrace, PerceptionState]:
    """Round robins over 1/16 of the remaining time until every entity is
    super-safe at t0, then certify the perception preconditions at t0.

    An entity is super-safe after round s when its projected region at t0 is
    at least a * (15/16)**s * t0 away from all but bound - 1 others.
    """
    if t0 <= 0:
        raise SchemeError("initialization target t0 must be positive")
    bound = cfg.bound
    lam = scheme_lambda(scn.dim, bound, scn.rho)
    if a is None:
        a = cfg.params.get("a", 64.0 / (5.0 * lam))
    if a < 64.0 / (5.0 * lam) - 1e-12:
        raise SchemeError(f"a={a} is below the required 64/(5 lambda)={64.0 / (5.0 * lam)}")

    st = PerceptionState.for_scenario(scn)
    trace = QueryTrace(scheme=f"init[{bound}]")
    survivors = list(range(scn.n))
    remaining = t0
    rounds = []
    while True:
        length = remaining / 16.0
        gran = _query_round(scn, st, trace, survivors, t0 - remaining, length)
        remaining *= INIT_SHRINK
        centers, radii = projected_regions(st, t0)
        close = _region_gaps(centers, radii) < a * remaining
        unsafe = [i for i in survivors if close[i].sum() > bound - 1]
        mask = np.zeros(scn.n, dtype=bool)
        mask[unsafe] = True
        kept = [i for i in survivors if not mask[i] and close[i, mask].any()]
        rounds.append({"queried": len(survivors), "granularity": gran, "unsafe": len(unsafe), "kept_safe": len(kept)})
        if not unsafe:
            break
        if remaining < CUTOFF * t0:
            trace.feasible = False
            trace.warnings.append(f"{len(unsafe)} entities never became super-safe")
            break
        survivors = sorted(unsafe + kept)

    st.advance(t0)
    trace.meta.update(t0=t0, a=a, lam=lam, bound=bound, rounds=rounds)
    if trace.feasible:
        _certify(scn, st, trace, bound, lam, a, t0)
    return trace, st


def _certify(scn, st, trace, bound, lam, a, t0) -> None:
    """Check the perception preconditions at t0 against the true configuration."""
    tilde = perceived_x_separations(st, bound)
    true = x_separations(configuration_at(scn, t0), bound)
    wait = t0 - st.last_query
    sandwich = bool(np.all(true / 2 <= tilde * (1 + 1e-9)) and np.all(tilde <= 1.5 * true * (1 + 1e-9)))
    prompt = bool(np.all(wait <= lam * tilde / 12.0 * (1 + 1e-9)))
    init_bound = bool(np.all(tilde <= (16.0 * a / 15.0 + 5.0) / a * true * (1 + 1e-9)))
    trace.meta.update(
        certified=sandwich and prompt,
        sandwich_ok=sandwich,
        prompt_ok=prompt,
        init_bound_ok=init_bound,
        sigma_tilde_t0=tilde.tolist(),
    )
    if not (sandwich and prompt):
        trace.warnings.append("initialization did not certify the perception preconditions")
