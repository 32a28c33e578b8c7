"""Mechanical verification of the theory on tables and trajectories, plus
large-deviations utilities and extinction-time sweep experiments.

Every check here either holds for all valid inputs (so a failure flags an
implementation bug, raised as LemmaViolationError) or is reported with
explicit witnesses.  All integer inequalities are checked exactly; no
tolerances.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from jsonschema import Draft202012Validator

from .epidemic import (RECOVERY, EpidemicConfig, EventLog, Policy,
                       builtin_policy, derive_seed, replay, simulate)
from .errors import CapacityError, ErlError, LemmaViolationError
from .graph import Graph, cut_table, generate
from .resistance import ResistanceTable, check_bellman, resistance_table


# ---------------------------------------------------------------------------
# Poisson tail utilities

def poisson_ld_exponent(lam: float, lam_prime: float) -> float:
    """Chernoff exponent for Poisson tail deviations.

    For X Poisson with mean lam*n, P(X >= lam_prime*n) (upper tail,
    lam_prime > lam) and P(X <= lam_prime*n) (lower tail, lam_prime < lam)
    are both bounded by exp(-eps*n) with eps = l'*ln(l'/l) - l' + l.
    Positive iff the arguments differ.
    """
    if lam <= 0 or lam_prime <= 0:
        raise ValueError("poisson_ld_exponent needs positive rates")
    return lam_prime * math.log(lam_prime / lam) - lam_prime + lam


def poisson_tail_probability(lam: float, lam_prime: float, n: int,
                             samples: int = 10**6, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo tail estimate next to its Chernoff bound.

    Returns (empirical tail, exp(-eps*n)); the tail direction follows the
    sign of lam_prime - lam.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    x = rng.poisson(lam * n, size=samples)
    if lam_prime >= lam:
        emp = float(np.mean(x >= lam_prime * n))
    else:
        emp = float(np.mean(x <= lam_prime * n))
    bound = math.exp(-poisson_ld_exponent(lam, lam_prime) * n)
    return emp, bound


# ---------------------------------------------------------------------------
# Constants for the slow-extinction regime

@dataclass(frozen=True)
class SlowRegimeConstants:
    """Budget and interval-length constants for the slow-extinction bound.

    c_r is the per-node budget coefficient and t_bar the audit interval
    length; both are exact rationals chosen so that, per node, recoveries in
    an interval of length t_bar undershoot the recovery target while
    infections overshoot it whenever the cut stays above the threshold.
    """

    c_gamma: Fraction
    delta: int
    c_r: Fraction
    t_bar: Fraction

    def recovery_target(self, n: int) -> int:
        """Recovery count b demanded of a witness interval at size n."""
        return math.floor(self.c_gamma * n / (4 * self.delta)) - 1

    def cut_threshold(self, n: int) -> int:
        return math.ceil(self.c_gamma * n / 4)


def slow_regime_constants(c_gamma, delta: int) -> SlowRegimeConstants:
    """Derive (c_r, t_bar) from the resistance growth rate and degree bound.

    Chooses c_r = c_gamma^2/(80*delta) and t_bar = 12/c_gamma, then asserts
    the three inequalities the choice must satisfy:
    c_r < c_gamma^2/(40*delta), c_r*t_bar < c_gamma/(5*delta), and
    (c_gamma/4)*t_bar > 2.  Exact rational arithmetic throughout.
    """
    cg = Fraction(c_gamma)
    if not isinstance(delta, int) or delta < 1:
        raise ValueError("delta must be a positive integer")
    if not 0 < cg <= delta:
        raise ValueError(f"c_gamma must lie in (0, delta], got {cg}")
    c_r = cg * cg / (80 * delta)
    t_bar = Fraction(12) / cg
    if not c_r < cg * cg / (40 * delta):
        raise ErlError("budget coefficient bound failed (implementation bug)")
    if not c_r * t_bar < cg / (5 * delta):
        raise ErlError("recovery undershoot inequality failed (implementation bug)")
    if not (cg / 4) * t_bar > 2:
        raise ErlError("infection overshoot inequality failed (implementation bug)")
    return SlowRegimeConstants(cg, delta, c_r, t_bar)


# ---------------------------------------------------------------------------
# Table invariant suite

@dataclass
class CheckResult:
    checked: int
    strategy: str
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass
class InvariantReport:
    node_count: int
    mode: str
    checks: dict[str, CheckResult]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks.values())

    def violations(self) -> list:
        out = []
        for name, c in self.checks.items():
            out += [{"check": name, **v} for v in c.violations]
        return out

    def to_json_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "mode": self.mode,
            "ok": self.ok,
            "checks": {name: {"checked": c.checked, "strategy": c.strategy,
                              "violations": c.violations}
                       for name, c in self.checks.items()},
        }


_MAX_WITNESSES = 5


def _collect(viols: list, bad_masks, detail) -> None:
    for m in bad_masks[:_MAX_WITNESSES - len(viols)]:
        viols.append({"bag": int(m), **detail(int(m))})


def verify_table_invariants(g: Graph, table: ResistanceTable,
                            mode: str = "exhaustive", samples: int = 100_000,
                            seed: int = 0) -> InvariantReport:
    """Run the full invariant suite for cuts and resistances.

    Exhaustive mode iterates all bags (all bag pairs when n <= 8, all
    single-node steps plus ``samples`` random pairs above); sampled mode
    uses random pairs throughout.  The fixed-point check is always complete.
    """
    if mode not in ("exhaustive", "sampled"):
        raise ErlError(f"unknown mode {mode!r}")
    n = g.node_count
    size = 1 << n
    if len(table.values) != size:
        raise ErlError("table does not match graph size")
    if table.graph is not None and table.graph != g:
        raise ErlError("table was built for a different graph")
    cut_t = cut_table(g).astype(np.int64)
    gam = table.values.astype(np.int64)
    delta = g.degree_bound
    masks = np.arange(size, dtype=np.int64)
    pops = np.bitwise_count(masks).astype(np.int64)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    all_pairs = mode == "exhaustive" and n <= 8
    all_subsets = mode == "exhaustive" and n <= 10
    checks: dict[str, CheckResult] = {}

    # |f(A) - f(B)| <= delta * |A xor B| for f in {cut, resistance}
    for name, vals in (("cut_lipschitz", cut_t), ("resistance_smooth", gam)):
        viols: list = []
        if all_pairs:
            checked = 0
            for bm in range(size):
                bad = np.nonzero(np.abs(vals - vals[bm])
                                 > delta * pops[masks ^ bm])[0]
                checked += size
                _collect(viols, bad, lambda m, bm=bm: {"other": bm})
            strategy = "all_pairs"
        else:
            checked = 0
            for v in range(n):
                other = masks ^ (1 << v)
                bad = np.nonzero(np.abs(vals - vals[other]) > delta)[0]
                checked += size
                _collect(viols, bad, lambda m, v=v: {"other": m ^ (1 << v)})
            a = rng.integers(0, size, samples)
            bm = rng.integers(0, size, samples)
            bad = np.nonzero(np.abs(vals[a] - vals[bm]) > delta * pops[a ^ bm])[0]
            checked += samples
            _collect(viols, a[bad], lambda m: {})
            strategy = "single_steps+sampled_pairs"
        checks[name] = CheckResult(checked, strategy, viols)

    # resistance is monotone under set inclusion
    viols = []
    if all_subsets:
        checked = 0
        gl = gam.tolist()
        for bm in range(size):
            gb = gl[bm]
            s = bm
            while True:
                checked += 1
                if gl[s] > gb and len(viols) < _MAX_WITNESSES:
                    viols.append({"bag": s, "superset": bm})
                if s == 0:
                    break
                s = (s - 1) & bm
        strategy = "all_subset_pairs"
    else:
        checked = 0
        for v in range(n):
            sub = masks & ~(1 << v)
            bad = np.nonzero(gam[sub] > gam)[0]
            checked += size
            _collect(viols, bad, lambda m, v=v: {"bag": m & ~(1 << v), "superset": m})
        sup = rng.integers(0, size, samples)
        sub = sup & rng.integers(0, size, samples)
        bad = np.nonzero(gam[sub] > gam[sup])[0]
        checked += samples
        _collect(viols, sub[bad], lambda m: {})
        strategy = "single_steps+sampled_pairs"
    checks["resistance_monotone"] = CheckResult(checked, strategy, viols)

    # cut submodularity: dropping v hurts a small bag at most as much as a
    # containing one: cut(A-v) - cut(A) <= cut(B-v) - cut(B) for A <= B
    viols = []
    if all_pairs:
        checked = 0
        cl = cut_t.tolist()
        for bm in range(size):
            s = bm
            while True:
                if s:
                    t = s
                    while t:
                        vbit = t & -t
                        t ^= vbit
                        checked += 1
                        if (cl[s & ~vbit] - cl[s] > cl[bm & ~vbit] - cl[bm]
                                and len(viols) < _MAX_WITNESSES):
                            viols.append({"bag": s, "superset": bm,
                                          "node": vbit.bit_length() - 1})
                if s == 0:
                    break
                s = (s - 1) & bm
        strategy = "all_subset_pairs"
    else:
        checked = 0
        for v in range(n):
            vbit = 1 << v
            has_v = (masks & vbit) != 0
            dv = cut_t[masks & ~vbit] - cut_t
            for u in range(n):
                if u == v:
                    continue
                ubit = 1 << u
                rows = has_v & ((masks & ubit) == 0)
                bigger = dv[masks | ubit]
                bad = np.nonzero(rows & (dv > bigger))[0]
                checked += int(rows.sum())
                _collect(viols, bad, lambda m, u=u, v=v: {"superset": m | (1 << u),
                                                          "node": v})
        strategy = "single_steps"
    checks["cut_submodular"] = CheckResult(checked, strategy, viols)

    # whenever removing a node lowers the resistance, the cut it leaves
    # behind is at least the resistance it left
    viols = []
    checked = 0
    for v in range(n):
        vbit = 1 << v
        sub = masks & ~vbit
        cond = ((masks & vbit) != 0) & (gam[sub] < gam)
        bad = np.nonzero(cond & (cut_t[sub] < gam))[0]
        checked += int(((masks & vbit) != 0).sum())
        _collect(viols, bad, lambda m, v=v: {"node": v})
    checks["cut_at_drop"] = CheckResult(checked, "all_bag_node_pairs", viols)

    # no bag is harder than the full set
    viols = []
    bad = np.nonzero(gam > gam[-1])[0]
    _collect(viols, bad, lambda m: {"cutwidth": int(gam[-1])})
    checks["below_cutwidth"] = CheckResult(size, "all_bags", viols)

    # the table is a fixed point of the bottleneck recursion
    bc = check_bellman(g, table)
    viols = [] if bc.passed else [{"bag": bc.witness_mask, "table": bc.lhs,
                                   "operator": bc.rhs}]
    checks["fixed_point"] = CheckResult(size, "all_bags", viols)

    return InvariantReport(n, mode, checks)


# ---------------------------------------------------------------------------
# Trajectory audits

def _states_of(log: EventLog, g: Graph) -> tuple[list[float], list[int]]:
    times, masks = [], []
    for t, bag in replay(log, g):
        times.append(t)
        masks.append(bag.mask)
    return times, masks


def _cut_sequence(g: Graph, state_masks: list[int]) -> list[int]:
    """Cuts of a unit-step mask sequence, maintained incrementally."""
    cuts = [_mask_cut(g, state_masks[0])]
    for i in range(1, len(state_masks)):
        prev, cur = state_masks[i - 1], state_masks[i]
        vbit = prev ^ cur
        v = vbit.bit_length() - 1
        inside = sum(1 for u in g.adjacency[v] if (cur >> u) & 1)
        if cur & vbit:   # node joined
            cuts.append(cuts[-1] + (g.degree(v) - inside) - inside)
        else:            # node left
            cuts.append(cuts[-1] - (g.degree(v) - inside) + inside)
    return cuts


def _mask_cut(g: Graph, mask: int) -> int:
    total = 0
    m = mask
    while m:
        low = m & -m
        m ^= low
        v = low.bit_length() - 1
        for u in g.adjacency[v]:
            if not (mask >> u) & 1:
                total += 1
    return total


@dataclass(frozen=True)
class RecoveryBoundReport:
    """Successful audit of one trajectory segment."""

    recoveries: int
    infections: int
    theta_cut_start: int
    theta_cut_max: int
    degree_bound: int
    crossing_index: int | None
    crossing_cut: int | None
    crossing_gamma_before: int | None

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)


def audit_recovery_bound(g: Graph, table, log: EventLog,
                         t_from: float, t_to: float) -> RecoveryBoundReport:
    """Audit the recovery-count lower bound on a trajectory segment.

    Builds the bottleneck (running intersection) sequence over the segment
    and asserts, exactly in integers, that the number of recovery events is
    at least (max cut of the bottleneck bags - its starting cut) divided by
    the degree bound.  When the bottleneck resistance crosses half the
    initial resistance inside the segment, also asserts that the crossing
    cut is at least the pre-crossing resistance.  Violations raise
    LemmaViolationError; they indicate a simulator or table bug.
    """
    if t_from < 0 or t_to < t_from:
        raise ErlError("need 0 <= t_from <= t_to")
    times, state_masks = _states_of(log, g)

    seg_masks = [state_masks[0]]
    seg_kinds: list[str] = []
    for i, ev in enumerate(log.events):
        if ev.time <= t_from:
            seg_masks[0] = state_masks[i + 1]
        elif ev.time <= t_to:
            seg_masks.append(state_masks[i + 1])
            seg_kinds.append(ev.kind)

    theta_masks = [seg_masks[0]]
    for cur in seg_masks[1:]:
        theta_masks.append(theta_masks[-1] & cur)
    theta_cuts = _cut_sequence_theta(g, theta_masks)

    gamma0 = table.gamma(log.initial_infected)
    half = gamma0 // 2
    crossing_index = crossing_cut = crossing_gamma_before = None
    prev_gam = table.gamma(theta_masks[0])
    for i in range(1, len(theta_masks)):
        cur_gam = (prev_gam if theta_masks[i] == theta_masks[i - 1]
                   else table.gamma(theta_masks[i]))
        if cur_gam <= half < prev_gam:
            crossing_index = i
            crossing_cut = theta_cuts[i]
            crossing_gamma_before = prev_gam
            if crossing_cut < prev_gam:
                raise LemmaViolationError(
                    f"bottleneck crossing at step {i}: cut {crossing_cut} "
                    f"below pre-crossing resistance {prev_gam}",
                    witness={"theta": theta_masks[i], "index": i})
            break
        prev_gam = cur_gam

    recoveries = sum(1 for k in seg_kinds if k == RECOVERY)
    infections = len(seg_kinds) - recoveries
    c0 = theta_cuts[0]
    cmax = max(theta_cuts)
    if recoveries * g.degree_bound < cmax - c0:
        raise LemmaViolationError(
            f"{recoveries} recoveries cannot explain bottleneck cut growth "
            f"{c0} -> {cmax} with degree bound {g.degree_bound}",
            witness={"segment_start": t_from, "segment_end": t_to})
    return RecoveryBoundReport(recoveries, infections, c0, cmax,
                               g.degree_bound, crossing_index, crossing_cut,
                               crossing_gamma_before)


def _cut_sequence_theta(g: Graph, theta_masks: list[int]) -> list[int]:
    """Cuts along a bottleneck sequence (changes only by single removals)."""
    cuts = [_mask_cut(g, theta_masks[0])]
    for i in range(1, len(theta_masks)):
        prev, cur = theta_masks[i - 1], theta_masks[i]
        if cur == prev:
            cuts.append(cuts[-1])
            continue
        vbit = prev ^ cur
        v = vbit.bit_length() - 1
        inside = sum(1 for u in g.adjacency[v] if (cur >> u) & 1)
        cuts.append(cuts[-1] - (g.degree(v) - inside) + inside)
    return cuts


CASE1 = "CASE1"
CASE2 = "CASE2"
NOT_APPLICABLE = "NOT_APPLICABLE"


@dataclass(frozen=True)
class IntervalWitness:
    """A trajectory interval with sustained high cut and counted recoveries."""

    case_tag: str
    gamma_initial: int
    b: int
    cut_threshold: int
    T: float
    T_prime: float | None
    t_prime: float | None
    t_double_prime: float | None
    recoveries: int | None
    infections: int | None
    min_cut_on_interval: int | None
    partial_audit: RecoveryBoundReport | None = None

    def to_json_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "partial_audit"}
        d["partial_audit"] = (self.partial_audit.to_json_dict()
                              if self.partial_audit else None)
        return d


def scan_halving_window(g: Graph, table, log: EventLog) -> IntervalWitness:
    """Extract the high-cut window preceding the first resistance halving.

    Replays an extinct trajectory, finds the first time T at which the
    resistance of the infected set falls to half its initial value, and
    produces an interval [t', t''] ending at the b-th recovery on which the
    cut never drops below ceil(gamma/4), where b = floor(gamma/(4*delta))-1.
    CASE1 holds when the cut is above threshold throughout [0, T]; CASE2
    starts the window at the last sub-threshold time T'.  When b < 1 the
    full witness is vacuous and a partial audit of [0, tau] is returned
    instead.  Any failed property raises LemmaViolationError.
    """
    times, state_masks = _states_of(log, g)
    if state_masks[-1] != 0:
        raise ErlError("scan_halving_window needs a log that ends in extinction")
    gamma0 = table.gamma(state_masks[0])
    delta = g.degree_bound
    b = gamma0 // (4 * delta) - 1
    cut_thr = -(-gamma0 // 4)
    half = gamma0 // 2

    t_idx = None
    for j, m in enumerate(state_masks):
        if table.gamma(m) <= half:
            t_idx = j
            break
    if t_idx is None:
        raise LemmaViolationError("resistance never halved on an extinct path",
                                  witness={"gamma_initial": gamma0})
    T = times[t_idx]

    if b < 1:
        t_end = log.events[-1].time if log.events else 0.0
        partial = audit_recovery_bound(g, table, log, 0.0, t_end)
        return IntervalWitness(NOT_APPLICABLE, gamma0, b, cut_thr, T, None,
                               None, None, None, None, None, partial)

    cuts = _cut_sequence(g, state_masks)
    below = [j for j in range(t_idx + 1) if cuts[j] < cut_thr]
    if not below:
        case = CASE1
        t_prime_time = 0.0
        T_prime = None
        first_event = 0
    else:
        case = CASE2
        jlast = below[-1]
        if jlast == t_idx:
            raise LemmaViolationError(
                "cut below threshold at the halving state",
                witness={"state": state_masks[t_idx]})
        # a resistance drop on a growing set would contradict monotonicity
        if state_masks[t_idx] & ~state_masks[t_idx - 1]:
            raise LemmaViolationError(
                "resistance halved on a non-recovery step",
                witness={"state": state_masks[t_idx]})
        gamma_before = table.gamma(state_masks[t_idx - 1])
        if cuts[t_idx] < gamma_before:
            raise LemmaViolationError(
                f"cut {cuts[t_idx]} at the halving below pre-halving "
                f"resistance {gamma_before}",
                witness={"state": state_masks[t_idx]})
        T_prime = times[jlast + 1]
        if cuts[jlast + 1] >= cut_thr + delta:
            raise LemmaViolationError(
                "cut jumped past threshold by more than the degree bound",
                witness={"state": state_masks[jlast + 1]})
        t_prime_time = T_prime
        first_event = jlast + 1

    rec_events = [e for e in range(first_event, t_idx)
                  if log.events[e].kind == RECOVERY]
    if len(rec_events) < b:
        raise LemmaViolationError(
            f"only {len(rec_events)} recoveries before the halving, "
            f"needed {b}", witness={"case": case})
    e_b = rec_events[b - 1]
    t_double = times[e_b + 1]
    window_states = range(first_event, e_b + 2)
    min_cut = min(cuts[j] for j in window_states)
    if min_cut < cut_thr:
        raise LemmaViolationError(
            f"cut fell to {min_cut} inside the witness window "
            f"(threshold {cut_thr})", witness={"case": case})
    window_events = range(first_event, e_b + 1)
    recoveries = sum(1 for e in window_events if log.events[e].kind == RECOVERY)
    infections = len(window_events) - recoveries
    if recoveries != b:
        raise LemmaViolationError(
            f"window holds {recoveries} recoveries, expected exactly {b}",
            witness={"case": case})
    if infections > g.node_count + b:
        raise LemmaViolationError(
            f"window holds {infections} infections > n + b "
            f"= {g.node_count + b}", witness={"case": case})
    return IntervalWitness(case, gamma0, b, cut_thr, T, T_prime, t_prime_time,
                           t_double, recoveries, infections, min_cut)


# ---------------------------------------------------------------------------
# Extinction-time sweeps

SWEEP_FAMILIES = ("line", "cycle", "star", "complete", "hypercube",
                  "random_regular")

SWEEP_SCHEMA = {
    "type": "object",
    "required": ["family", "sizes", "budget", "policy", "replications", "seed"],
    "additionalProperties": False,
    "properties": {
        "family": {"enum": list(SWEEP_FAMILIES)},
        "sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "budget": {"oneOf": [
            {"type": "number", "minimum": 0},
            {"type": "object", "required": ["per_node"],
             "additionalProperties": False,
             "properties": {"per_node": {"type": "number", "minimum": 0}}},
        ]},
        "policy": {"enum": ["max_cut_drop", "resistance_greedy",
                            "degree_proportional", "uniform", "random_node"]},
        "replications": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer"},
        "horizon": {"type": ["number", "null"]},
        "max_events": {"type": "integer", "minimum": 1},
        "degree": {"type": "integer", "minimum": 0},
        "graph_seed": {"type": "integer"},
    },
}


@dataclass
class SweepRecord:
    family: str
    n: int
    r: float
    policy: str
    replications: int
    mean_tau: float | None
    stderr: float | None
    censored: int
    growth_ratio: float | None
    seed: int
    lower_bound: bool = False
    error: str | None = None


def validate_sweep_spec(spec: dict) -> None:
    validator = Draft202012Validator(SWEEP_SCHEMA)
    errors = sorted(validator.iter_errors(spec), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.path) or "(top level)"
        raise ErlError(f"sweep spec invalid at {where}: {e.message}")
    if spec["family"] == "random_regular" and "degree" not in spec:
        raise ErlError("sweep spec invalid at degree: required for random_regular")


def _sweep_graph(family: str, size: int, spec: dict) -> Graph:
    if family == "random_regular":
        return generate(family, (size, spec["degree"]),
                        seed=spec.get("graph_seed", 0))
    return generate(family, (size,))


def _sweep_budget(budget_rule, n: int) -> Fraction:
    if isinstance(budget_rule, dict):
        return Fraction(budget_rule["per_node"]) * n
    return Fraction(budget_rule)


def _run_replication(args) -> tuple[int, float | None]:
    config, policy, j = args
    res = simulate(config, policy, replication=j)
    return j, res.extinction_time


def _make_sweep_policy(kind: str, g: Graph) -> Policy:
    if kind == "resistance_greedy":
        return builtin_policy(kind, table=resistance_table(g))
    return builtin_policy(kind)


def extinction_sweep(spec: dict, threads: int = 1) -> list[SweepRecord]:
    """Run replicated extinction-time measurements over one graph family.

    All runs start fully infected.  Censored replications are counted,
    never folded into the mean; a point with more than half its runs
    censored is flagged and its mean is only a lower bound.  Capacity
    errors are surfaced on the affected point and the sweep continues.
    Deterministic for a given spec regardless of ``threads``.
    """
    validate_sweep_spec(spec)
    reps = spec["replications"]
    if reps == 0:
        return []
    records: list[SweepRecord] = []
    for idx, size in enumerate(spec["sizes"]):
        point_seed = derive_seed(spec["seed"], idx)
        try:
            g = _sweep_graph(spec["family"], size, spec)
            r = _sweep_budget(spec["budget"], g.node_count)
            policy = _make_sweep_policy(spec["policy"], g)
            config = EpidemicConfig(
                graph=g, initial_infected=g.all_nodes(), budget=r,
                horizon=spec.get("horizon"), seed=point_seed,
                max_events=spec.get("max_events", 10**8))
        except (CapacityError, ErlError) as exc:
            records.append(SweepRecord(spec["family"], size, float("nan"),
                                       spec["policy"], reps, None, None, 0,
                                       None, point_seed, error=str(exc)))
            continue
        tasks = [(config, policy, j) for j in range(reps)]
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                outcomes = list(pool.map(_run_replication, tasks,
                                         chunksize=max(1, reps // (threads * 4))))
        else:
            outcomes = [_run_replication(t) for t in tasks]
        outcomes.sort(key=lambda o: o[0])
        taus = [tau for _, tau in outcomes if tau is not None]
        censored = reps - len(taus)
        if taus:
            mean = sum(taus) / len(taus)
            if len(taus) > 1:
                var = sum((x - mean) ** 2 for x in taus) / (len(taus) - 1)
                stderr = math.sqrt(var / len(taus))
            else:
                stderr = None
        else:
            mean = stderr = None
        records.append(SweepRecord(
            spec["family"], g.node_count, float(r), spec["policy"], reps,
            mean, stderr, censored, None, point_seed,
            lower_bound=censored * 2 > reps))
    prev_mean = None
    for rec in records:
        if rec.mean_tau is not None and prev_mean:
            rec.growth_ratio = rec.mean_tau / prev_mean
        prev_mean = rec.mean_tau
    return records


SWEEP_CSV_COLUMNS = ("family", "n", "r", "policy", "replications", "mean_tau",
                     "stderr", "censored", "growth_ratio", "seed")


def sweep_to_csv(records: list[SweepRecord]) -> str:
    lines = [",".join(SWEEP_CSV_COLUMNS)]
    for rec in records:
        row = []
        for col in SWEEP_CSV_COLUMNS:
            val = getattr(rec, col)
            row.append("" if val is None else repr(val) if isinstance(val, float)
                       else str(val))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def complete_extinction_mean(n: int, r) -> float:
    """Exact expected extinction time on a complete graph, all infected.

    Any policy that puts the whole budget on one infected node makes the
    infected-set size a birth-death chain (up rate k(n-k), down rate r);
    the expected absorption time has a closed recurrence.  Used as an
    independent oracle for simulator means.
    """
    rf = float(r)
    if rf <= 0:
        raise ErlError("needs a positive budget")
    h_next = 0.0
    total = 0.0
    for k in range(n, 0, -1):
        lam = k * (n - k)
        h_k = (1.0 + lam * h_next) / rf
        total += h_k
        h_next = h_k
    return total
