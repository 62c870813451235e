"""Achievable rates and bounds for the Gaussian relay channel.

Single-relay (T = 3) strategies: cut-set bound, decode-and-forward,
compress-and-forward in closed form and TDMA multihop. For general T the
compress-and-forward rate for a given quantization profile is available
together with its constraint family and an optimiser over the profile
(coordinate descent followed by a log-space SLSQP polish).

The single-relay compress-and-forward rate uses the relay-branch SNR
``P1 * g12 / (N2 + Q)``. A printed variant of this formula carries ``P2``
in that numerator; it contradicts both the general T-node rate expression
at T = 3 and the expanded form ``P1 P2 g12 g23 / (...)`` that follows from
substituting ``Q``, so the ``P1`` form is used here.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence

import numpy as np

from .errors import (
    CapacityError,
    ConvergenceWarning,
    DomainError,
    InfeasibleError,
    UsageError,
    ValidationError,
)
from .gaussian_info import get_log_base, half_log1p
from .opt_core import (
    DEFAULT_PARTITION_CAP,
    SearchSpec,
    bisect_min_feasible,
    golden_max,
    partitions_of,
)

FORALL = "forall"
EXISTS = "exists"
MODES = (FORALL, EXISTS)

ALPHA_TOL = 1e-10
DEFAULT_RELAY_CAP = DEFAULT_PARTITION_CAP


@dataclass(frozen=True)
class QuantizationProfile:
    """Quantization noise variance per relay; ``inf`` silences a relay."""

    relays: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.relays) != len(self.values):
            raise ValidationError("relays and values differ in length")
        for r, v in zip(self.relays, self.values):
            if not v > 0 or math.isnan(v):
                raise ValidationError(f"Q for relay {r} must be positive (or inf), got {v}")

    def __getitem__(self, node: int) -> float:
        return self.values[self.relays.index(node)]

    def as_dict(self) -> dict:
        return dict(zip(self.relays, self.values))

    @property
    def active(self) -> tuple[int, ...]:
        """Relays with finite quantization noise."""
        return tuple(r for r, v in zip(self.relays, self.values) if math.isfinite(v))


def as_profile(net, q) -> QuantizationProfile:
    """Coerce a profile, a ``{relay: Q}`` mapping or a sequence ordered by relay."""
    if isinstance(q, QuantizationProfile):
        prof = q
    elif isinstance(q, Mapping):
        prof = QuantizationProfile(net.relays, tuple(float(q[r]) for r in net.relays))
    else:
        vals = tuple(float(v) for v in np.asarray(q, dtype=float).reshape(-1))
        if len(vals) != len(net.relays):
            raise ValidationError(f"expected {len(net.relays)} Q values, got {len(vals)}")
        prof = QuantizationProfile(net.relays, vals)
    if prof.relays != net.relays:
        raise ValidationError(f"profile covers relays {prof.relays}, network has {net.relays}")
    return prof


@dataclass
class RateResult:
    rate: float
    strategy: str
    alpha: Optional[float] = None
    q: Optional[QuantizationProfile] = None
    binding: Optional[str] = None
    converged: bool = True
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"strategy": self.strategy, "rate": self.rate}
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.q is not None:
            d["Q"] = {str(k): v for k, v in self.q.as_dict().items()}
        if self.binding is not None:
            d["binding"] = self.binding
        d["converged"] = self.converged
        d.update(self.info)
        return d


def l_of(x: float) -> float:
    """L(x) = 0.5 log(1 + x)."""
    if x < 0 or math.isnan(x):
        raise DomainError(f"L(x) needs x >= 0, got {x}")
    return half_log1p(x)


def _require_single_relay(net):
    if net.T != 3:
        raise UsageError(f"single-relay formula needs T = 3, network has T = {net.T}")
    return (
        net.P(1), net.P(2), net.N(2), net.N(3),
        net.gain(1, 2), net.gain(1, 3), net.gain(2, 3),
    )


def _is_monotone(fn, sign, n=33):
    xs = np.linspace(0.0, 1.0, n)
    ys = np.array([fn(x) for x in xs])
    d = np.diff(ys) * sign
    return bool((d >= -1e-13 * max(1.0, np.abs(ys).max())).all())


def _max_of_min(decreasing, increasing, names):
    """Maximise min(decreasing(a), increasing(a)) over a in [0, 1].

    The objective is unimodal when the two terms are monotone as named, so
    golden-section search applies; the smallest maximiser is returned.
    Falls back to a dense grid plus local refinement if a term is found
    not to be monotone.
    """

    def f(a):
        return min(decreasing(a), increasing(a))

    if _is_monotone(decreasing, -1) and _is_monotone(increasing, +1):
        a, v = golden_max(f, SearchSpec(0.0, 1.0, ALPHA_TOL))
        fallback = False
    else:
        xs = np.linspace(0.0, 1.0, 10001)
        k = int(np.argmax([f(x) for x in xs]))
        lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)]
        a, v = golden_max(f, SearchSpec(lo, hi, ALPHA_TOL)) if hi > lo else (xs[k], f(xs[k]))
        fallback = True
    if a > 0:
        a = bisect_min_feasible(lambda x: f(x) >= v, 0.0, a, ALPHA_TOL)
        v = f(a)
    d, i = decreasing(a), increasing(a)
    if abs(d - i) <= 1e-12 * max(1.0, abs(v)):
        binding = "both"
    else:
        binding = names[0] if d < i else names[1]
    return a, v, binding, fallback


def _mac_term(P1, P2, N3, l13, l23):
    def term(a):
        return l_of((P1 * l13 + P2 * l23 + 2.0 * math.sqrt(a * l13 * l23 * P1 * P2)) / N3)

    return term


def cutset_single_relay(net) -> RateResult:
    """Cut-set bound of the single-relay channel, maximised over the power split."""
    P1, P2, N2, N3, l12, l13, l23 = _require_single_relay(net)
    bc_snr = P1 * l13 / N3 + P1 * l12 / N2

    def broadcast(a):
        return l_of(bc_snr * (1.0 - a))

    a, v, binding, fb = _max_of_min(broadcast, _mac_term(P1, P2, N3, l13, l23), ("broadcast", "mac"))
    return RateResult(v, "CS", alpha=a, binding=binding, info={"grid_fallback": fb} if fb else {})


def df_single_relay(net) -> RateResult:
    """Decode-and-forward rate of the single-relay channel."""
    P1, P2, N2, N3, l12, l13, l23 = _require_single_relay(net)

    def decode(a):
        return l_of(P1 * l12 * (1.0 - a) / N2)

    a, v, binding, fb = _max_of_min(decode, _mac_term(P1, P2, N3, l13, l23), ("decode", "mac"))
    return RateResult(v, "DF", alpha=a, binding=binding, info={"grid_fallback": fb} if fb else {})


def cf_single_relay_q(net) -> float:
    """Quantization noise of the closed-form single-relay CF scheme (inf if the relay link is dead)."""
    P1, P2, N2, N3, l12, l13, l23 = _require_single_relay(net)
    if P2 * l23 == 0:
        return math.inf
    return ((l13 * N2 + l12 * N3) * P1 + N2 * N3) / (P2 * l23)


def cf_single_relay(net) -> RateResult:
    """Compress-and-forward rate of the single-relay channel in closed form."""
    P1, P2, N2, N3, l12, l13, l23 = _require_single_relay(net)
    Q = cf_single_relay_q(net)
    relay_snr = 0.0 if math.isinf(Q) else P1 * l12 / (N2 + Q)
    rate = l_of(P1 * l13 / N3 + relay_snr)
    return RateResult(rate, "CF", q=QuantizationProfile((2,), (Q,)), binding="closed_form")


def _tdma(t, snr):
    # t * L(snr / t), continuous extension t -> 0
    if t <= 0:
        return 0.0
    return t * l_of(snr / t)


def multihop_tdma(net) -> RateResult:
    """TDMA multihop rate; ``alpha`` is the fraction of time the relay transmits."""
    P1, P2, N2, N3, l12, l13, l23 = _require_single_relay(net)
    s1 = P1 * l12 / N2
    s2 = P2 * l23 / N3
    a, v, binding, fb = _max_of_min(
        lambda a: _tdma(1.0 - a, s1), lambda a: _tdma(a, s2), ("source_hop", "relay_hop")
    )
    return RateResult(v, "MH", alpha=a, binding=binding, info={"grid_fallback": fb} if fb else {})


# ---------------------------------------------------------------------------
# general T: CF rate for a given profile and its constraint family


def _source_cov(net, nodes, qvals):
    g = np.sqrt(np.array([net.gain(1, j) for j in nodes]))
    P1 = net.P(1)
    return P1 * np.outer(g, g) + np.diag([net.N(j) + qv for j, qv in zip(nodes, qvals)])


def lambda_det(net, S: Iterable[int], q) -> float:
    """Determinant of the covariance of the quantized relay outputs in S given all relay inputs."""
    nodes = sorted(set(S))
    if not nodes:
        raise UsageError("lambda_det needs a nonempty relay subset")
    prof = as_profile(net, q)
    bad = [s for s in nodes if s not in net.relays]
    if bad:
        raise ValidationError(f"nodes {bad} are not relays")
    qv = [prof[s] for s in nodes]
    if not all(math.isfinite(v) for v in qv):
        raise DomainError("lambda_det needs finite Q on every relay of S")
    return float(np.linalg.det(_source_cov(net, nodes, qv)))


def _q_values(net, q, allow_zero):
    if isinstance(q, QuantizationProfile):
        prof = as_profile(net, q)
        return [prof[r] for r in net.relays]
    if isinstance(q, Mapping):
        vals = [float(q[r]) for r in net.relays]
    else:
        vals = [float(v) for v in np.asarray(q, dtype=float).reshape(-1)]
    if len(vals) != len(net.relays):
        raise ValidationError(f"expected {len(net.relays)} Q values, got {len(vals)}")
    for r, v in zip(net.relays, vals):
        if math.isnan(v) or v < 0 or (v == 0 and not allow_zero):
            raise ValidationError(f"Q for relay {r} must be nonnegative, got {v}")
    return vals


def psi_det(net, q) -> float:
    """Determinant of the covariance of (quantized relay outputs, Y_T) given all relay inputs.

    Zero quantization noise is allowed here (unquantized observations).
    """
    vals = _q_values(net, q, allow_zero=True)
    if not all(math.isfinite(v) for v in vals):
        raise DomainError("psi_det needs finite Q on every relay")
    return float(np.linalg.det(_source_cov(net, net.receivers, vals + [0.0])))


def cf_rate_given_q(net, q) -> float:
    """CF rate for a fixed quantization profile; relays with Q = inf contribute nothing.

    Q = 0 is accepted as the unquantized limit.
    """
    vals = _q_values(net, q, allow_zero=True)
    P1 = net.P(1)
    snr = net.gain(1, net.T) * P1 / net.N(net.T)
    for r, qv in zip(net.relays, vals):
        if math.isfinite(qv):
            snr += net.gain(1, r) * P1 / (net.N(r) + qv)
    return half_log1p(snr)


@dataclass(frozen=True)
class ConstraintInstance:
    """One member of the CF constraint family.

    The instance holds when ``lhs <= rhs``; both are in the current log
    unit. ``lhs`` is 0.5 log(Lambda / prod Q) over S and ``rhs`` the sum of
    the per-block rates into each block's routing node.
    """

    S: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]
    routing: tuple[int, ...]
    lhs: Optional[float] = None
    rhs: Optional[float] = None

    @property
    def slack(self) -> Optional[float]:
        if self.lhs is None or self.rhs is None:
            return None
        return self.rhs - self.lhs

    @property
    def holds(self) -> Optional[bool]:
        s = self.slack
        return None if s is None else s >= 0

    def label(self) -> str:
        parts = ",".join("{" + ",".join(map(str, b)) + "}->" + str(r) for b, r in zip(self.blocks, self.routing))
        return "S={" + ",".join(map(str, self.S)) + "}:" + parts


def _active_relays(net, prof: Optional[QuantizationProfile]):
    if prof is None:
        return net.relays
    return prof.active


def _check_cap(n_relays, cap):
    if n_relays > cap:
        raise CapacityError(f"{n_relays} relays exceeds the enumeration cap of {cap} (raise --relay-cap)")


def _subsets(relays):
    # bitmask order: bit k <-> relays[k]
    n = len(relays)
    for mask in range(1, 1 << n):
        yield tuple(relays[k] for k in range(n) if mask >> k & 1)


def _targets(net, block, active):
    silenced = set(net.relays) - set(active)
    return [j for j in net.receivers if j not in block and j not in silenced]


def iter_constraints(net, q=None, cap: int = DEFAULT_RELAY_CAP) -> Iterator[ConstraintInstance]:
    """Lazily enumerate constraint skeletons in the documented order.

    Relays silenced by ``q`` (Q = inf) are removed before enumeration and
    cannot serve as routing nodes.
    """
    prof = None if q is None else as_profile(net, q)
    active = _active_relays(net, prof)
    _check_cap(len(active), cap)
    for S in _subsets(active):
        for blocks in partitions_of(S, cap=cap):
            choices = [_targets(net, b, active) for b in blocks]
            for routing in itertools.product(*choices):
                yield ConstraintInstance(S, tuple(blocks), tuple(routing))


def enumerate_constraints(net, q=None, cap: int = DEFAULT_RELAY_CAP) -> list[ConstraintInstance]:
    """Every (S, partition, routing) triple; see :func:`iter_constraints`."""
    return list(iter_constraints(net, q, cap))


def block_rate(net, block: Sequence[int], r: int) -> float:
    """I(X_B; Y_r | X_{B^c}) for independent Gaussian inputs, source treated as noise."""
    num = sum(net.gain(i, r) * net.P(i) for i in block if i != r)
    return half_log1p(num / (net.gain(1, r) * net.P(1) + net.N(r)))


def constraint_lhs(net, S: Sequence[int], prof: QuantizationProfile) -> float:
    """0.5 log(Lambda(S) / prod_{s in S} Q_s) in the current log unit (inf when some Q_s = 0)."""
    qv = [prof[s] for s in S]
    if any(v == 0 for v in qv):
        return math.inf
    sign, logdet = np.linalg.slogdet(_source_cov(net, list(S), qv))
    if sign <= 0:
        raise DomainError("Lambda determinant is not positive")
    return 0.5 * (logdet - sum(math.log(v) for v in qv)) / math.log(get_log_base())


def evaluate_instance(net, inst: ConstraintInstance, q) -> ConstraintInstance:
    prof = as_profile(net, q)
    lhs = constraint_lhs(net, inst.S, prof)
    rhs = sum(block_rate(net, b, r) for b, r in zip(inst.blocks, inst.routing))
    return ConstraintInstance(inst.S, inst.blocks, inst.routing, lhs, rhs)


@dataclass
class ConstraintReport:
    passed: bool
    mode: str
    tightest: Optional[ConstraintInstance]
    slack: float
    n_subsets: int
    failing_subsets: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "mode": self.mode,
            "slack": self.slack,
            "tightest": None if self.tightest is None else self.tightest.label(),
            "failing_subsets": [list(s) for s in self.failing_subsets],
        }


class _BlockRates:
    # memoised per-block extreme routing choice
    def __init__(self, net, active, mode):
        self.net, self.active, self.mode = net, active, mode
        self._cache = {}

    def __call__(self, block):
        hit = self._cache.get(block)
        if hit is None:
            targets = _targets(self.net, block, self.active)
            rates = [(block_rate(self.net, block, r), r) for r in targets]
            # ties -> smallest routing node
            if self.mode == FORALL:
                hit = min(rates, key=lambda t: (t[0], t[1]))
            else:
                hit = min(rates, key=lambda t: (-t[0], t[1]))
            self._cache[block] = hit
        return hit


def _check_subset(net, S, prof, mode, block_rates, cap):
    """Best (exists) or worst (forall) instance for one subset S."""
    lhs = constraint_lhs(net, S, prof)
    best = None
    for blocks in partitions_of(S, cap=cap):
        picks = [block_rates(tuple(b)) for b in blocks]
        rhs = sum(p[0] for p in picks)
        if best is None or (rhs < best[0] if mode == FORALL else rhs > best[0]):
            best = (rhs, tuple(tuple(b) for b in blocks), tuple(p[1] for p in picks))
    rhs, blocks, routing = best
    return ConstraintInstance(tuple(S), blocks, routing, lhs, rhs)


def cf_constraints_check(net, q, mode: str = FORALL, cap: int = DEFAULT_RELAY_CAP, containing=None) -> ConstraintReport:
    """Evaluate the CF constraint family for a quantization profile.

    ``forall``: every (S, partition, routing) instance must hold.
    ``exists``: for each S, at least one (partition, routing) must hold.
    Because the right-hand side is a sum of per-block terms, each block's
    worst (resp. best) routing node can be chosen independently, so only
    partitions are enumerated explicitly. ``containing`` restricts the
    check to subsets that include that relay.
    """
    if mode not in MODES:
        raise UsageError(f"unknown constraint mode {mode!r}; expected one of {MODES}")
    prof = as_profile(net, q)
    active = prof.active
    _check_cap(len(active), cap)
    block_rates = _BlockRates(net, active, mode)
    tightest = None
    failing = []
    n = 0
    for S in _subsets(active):
        if containing is not None and containing not in S:
            continue
        n += 1
        inst = _check_subset(net, S, prof, mode, block_rates, cap)
        if not inst.holds:
            failing.append(S)
        if tightest is None or inst.slack < tightest.slack:
            tightest = inst
    slack = math.inf if tightest is None else tightest.slack
    return ConstraintReport(not failing, mode, tightest, slack, n, failing)


def _min_feasible_q(net, q_vals, k, mode, cap, rtol):
    """Smallest Q for relay index k keeping every constraint that involves it satisfied."""
    relay = net.relays[k]

    def feasible_at(x):
        trial = list(q_vals)
        trial[k] = x
        prof = QuantizationProfile(net.relays, tuple(trial))
        return cf_constraints_check(net, prof, mode, cap, containing=relay).passed

    hi = q_vals[k]
    lo = hi
    # walk down by decades until infeasible, then bisect in log space
    for _ in range(400):
        cand = lo * 1e-3
        if cand <= 1e-300 or not feasible_at(cand):
            break
        lo = cand
    else:
        return lo
    lo = max(lo * 1e-3, 1e-300)
    if feasible_at(lo):
        return lo
    u = bisect_min_feasible(lambda u: feasible_at(math.exp(u)), math.log(lo), math.log(hi), rtol)
    return min(math.exp(u), hi)


def subset_budgets(net, mode: str = FORALL, cap: int = DEFAULT_RELAY_CAP, active=None) -> dict:
    """Right-hand side of the constraint for each relay subset, in nats.

    The per-block rates do not depend on Q, so for every S the binding
    (forall: smallest, exists: largest) partition/routing total is a constant.
    """
    active = net.relays if active is None else tuple(active)
    block_rates = _BlockRates(net, active, mode)
    out = {}
    with _nats():
        for S in _subsets(active):
            totals = [sum(block_rates(tuple(b))[0] for b in blocks) for blocks in partitions_of(S, cap=cap)]
            out[S] = min(totals) if mode == FORALL else max(totals)
    return out


def _nats():
    from .gaussian_info import use_log_base

    return use_log_base("e")


def _polish(net, q_start, mode, cap):
    """Maximise the CF rate over log Q by SLSQP.

    Every constraint reads log det(Lambda_S) - sum_S log Q <= 2 * budget_S,
    which is convex in log Q (a log-sum-exp of principal minors), and the
    feasible set is closed upwards.
    """
    from scipy.optimize import minimize

    relays = net.relays
    idx = {r: k for k, r in enumerate(relays)}
    P1 = net.P(1)
    w = np.array([net.gain(1, r) * P1 for r in relays])
    noise = np.array([net.N(r) for r in relays])
    budgets = subset_budgets(net, mode, cap)
    scale = float(noise.max())
    subsets = list(budgets)
    base = {S: _source_cov(net, list(S), [0.0] * len(S)) for S in subsets}

    def objective(u):
        e = np.exp(u)
        val = -np.sum(w / (noise + e)) / scale
        grad = w * e / (noise + e) ** 2 / scale
        return val, grad

    def cons(u):
        # 2 * budget - (log det - sum u) >= 0
        vals = []
        for S in subsets:
            ks = [idx[r] for r in S]
            m = base[S] + np.diag(np.exp(u[ks]))
            vals.append(2.0 * budgets[S] - (np.linalg.slogdet(m)[1] - u[ks].sum()))
        return np.array(vals)

    def cons_jac(u):
        jac = np.zeros((len(subsets), len(relays)))
        for row, S in enumerate(subsets):
            ks = [idx[r] for r in S]
            e = np.exp(u[ks])
            inv = np.linalg.inv(base[S] + np.diag(e))
            jac[row, ks] = -(e * np.diag(inv) - 1.0)
        return jac

    u0 = np.log(np.asarray(q_start, dtype=float))
    hi = float(u0.max())
    res = minimize(
        objective,
        u0,
        jac=True,
        method="SLSQP",
        bounds=[(-80.0, hi)] * len(relays),
        constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
        options={"maxiter": 500, "ftol": 1e-15},
    )
    return np.exp(res.x)


def _repair(net, q, mode, cap, rtol):
    """Scale ``q`` up by the smallest common factor that makes it feasible."""

    def feasible(t):
        prof = QuantizationProfile(net.relays, tuple(float(v) * math.exp(t) for v in q))
        return cf_constraints_check(net, prof, mode, cap).passed

    if feasible(0.0):
        return [float(v) for v in q]
    hi = 1.0
    while not feasible(hi):
        hi *= 2.0
        if hi > 200:
            return None
    t = bisect_min_feasible(feasible, 0.0, hi, rtol)
    return [float(v) * math.exp(t) for v in q]


def optimize_cf_q(
    net,
    mode: str = FORALL,
    cap: int = DEFAULT_RELAY_CAP,
    rtol: float = 1e-9,
    max_sweeps: int = 500,
    polish: bool = True,
) -> RateResult:
    """Choose the quantization profile that maximises the CF rate under the constraint family.

    Stage 1 (coordinate descent): start from Q_i = 1e6 * max(N), which
    satisfies every constraint, and set each Q_i in relay order to the
    smallest value that keeps all constraints satisfied given the others.
    Sweeps repeat until no entry moves by more than ``rtol`` (relative) or
    ``max_sweeps`` is reached.

    Stage 2 (``polish``, two or more relays): coordinate descent stops at
    the first point where no single Q can shrink, which with several relays
    is usually lopsided (one Q tiny, the others pinned by the joint
    constraint). A log-space SLSQP run from that point and from the best
    equal-Q point moves along the constraint boundary; any candidate is
    scaled back into the feasible set and the best feasible rate wins.
    """
    if mode not in MODES:
        raise UsageError(f"unknown constraint mode {mode!r}; expected one of {MODES}")
    relays = net.relays
    _check_cap(len(relays), cap)
    if not relays:
        return RateResult(cf_rate_given_q(net, []), "CF_T2", q=QuantizationProfile((), ()), binding=None)
    start = 1e6 * float(max(net.noises))
    q_vals = [start] * len(relays)
    for _ in range(60):
        if cf_constraints_check(net, QuantizationProfile(relays, tuple(q_vals)), mode, cap).passed:
            break
        q_vals = [v * 1e3 for v in q_vals]
    else:
        raise InfeasibleError("no feasible quantization profile found from large Q")

    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        change = 0.0
        for k in range(len(relays)):
            new = _min_feasible_q(net, q_vals, k, mode, cap, rtol)
            change = max(change, abs(q_vals[k] - new) / q_vals[k])
            q_vals[k] = new
        if change < rtol:
            converged = True
            break
    if not converged:
        warnings.warn(f"optimize_cf_q stopped after {max_sweeps} sweeps", ConvergenceWarning, stacklevel=2)

    method = "coordinate"
    best_q, best_rate = list(q_vals), cf_rate_given_q(net, q_vals)
    if polish and len(relays) > 1:
        equal = _repair(net, [min(q_vals)] * len(relays), mode, cap, rtol)
        starts = [q_vals] + ([equal] if equal is not None else [])
        for q0 in starts:
            cand = _repair(net, _polish(net, q0, mode, cap), mode, cap, rtol)
            if cand is None:
                continue
            rate = cf_rate_given_q(net, cand)
            if rate > best_rate * (1.0 + 1e-13):
                best_q, best_rate, method = cand, rate, "coordinate+slsqp"
    prof = QuantizationProfile(relays, tuple(best_q))
    report = cf_constraints_check(net, prof, mode, cap)
    return RateResult(
        best_rate,
        "CF_T2",
        q=prof,
        binding=None if report.tightest is None else report.tightest.label(),
        converged=converged,
        info={"sweeps": sweeps, "mode": mode, "method": method},
    )
