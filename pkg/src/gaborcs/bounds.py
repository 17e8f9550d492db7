"""Associated Stirling numbers and closed-form recovery/conditioning bounds.

All logarithms are natural. Probability bounds are returned unclamped in
:attr:`BoundReport.value`; :attr:`BoundReport.probability` clamps to
``[0, 1]`` for presentation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

from .exceptions import BoundOverflowError, DomainError

__all__ = [
    "C_CONDITIONING",
    "c_CONDITIONING",
    "StirlingTable",
    "stirling_table",
    "log_g2m",
    "g2m",
    "g2m_exact",
    "moment_bound",
    "BoundParams",
    "BoundReport",
    "thm31_probability",
    "thm31_condition",
    "thm11_coherence_guarantee",
    "thm12b_sparsity_threshold",
    "thm21_failure_probability",
    "default_L",
    "lemma51_conditions",
    "lemma51_probability",
    "minimize_lemma51",
    "thm22_constants",
    "thm22_condition",
    "coherence_tail_bound",
    "bernstein_tail",
]

# e^2 / (4 (e - 1)) and its logarithm
C_CONDITIONING = math.e ** 2 / (4.0 * (math.e - 1.0))
c_CONDITIONING = math.log(C_CONDITIONING)

_LOG_MAX = math.log(1.7976931348623157e308)


class StirlingTable:
    """Exact table of associated Stirling numbers of the first kind.

    ``d2(m, s)`` counts permutations of ``m`` elements made of exactly ``s``
    disjoint cycles, each of length at least 2. Rows are filled with the
    recursion ``d2(m+1, s) = m (d2(m, s) + d2(m-1, s-1))`` from
    ``d2(0, 0) = 1``, using Python integers throughout.
    """

    def __init__(self, max_m: int):
        max_m = int(max_m)
        if max_m < 0:
            raise DomainError(f"max_m must be non-negative, got {max_m}")
        rows = [[1]]
        for m in range(max_m):
            # next row is m + 1 with entries s = 0 .. (m + 1) // 2
            nxt = [0] * ((m + 1) // 2 + 1)
            for s in range(1, len(nxt)):
                nxt[s] = m * (_get(rows, m, s) + _get(rows, m - 1, s - 1))
            rows.append(nxt)
        self.max_m = max_m
        self._rows = tuple(tuple(r) for r in rows)
        self._logs: dict = {}

    def __call__(self, m: int, s: int) -> int:
        return self.d2(m, s)

    def d2(self, m: int, s: int) -> int:
        if m > self.max_m:
            raise DomainError(f"table holds m <= {self.max_m}, asked for m={m}")
        return _get(self._rows, m, s)

    def row(self, m: int) -> tuple:
        """``(d2(m, 0), ..., d2(m, m // 2))``."""
        if m > self.max_m:
            raise DomainError(f"table holds m <= {self.max_m}, asked for m={m}")
        return self._rows[m]

    def log_row(self, m: int) -> tuple:
        """Natural logs of ``d2(m, s)`` for ``s = 0 .. m // 2`` (``-inf`` for zeros)."""
        if m not in self._logs:
            self._logs[m] = tuple(math.log(v) if v > 0 else -math.inf for v in self.row(m))
        return self._logs[m]


def _get(rows, m, s):
    if m < 0 or s < 0 or m >= len(rows) or s >= len(rows[m]):
        return 0
    return rows[m][s]


@lru_cache(maxsize=8)
def stirling_table(max_m: int) -> StirlingTable:
    """Cached :class:`StirlingTable` up to ``max_m``."""
    return StirlingTable(max_m)


def _table_for(m2: int, table: StirlingTable | None) -> StirlingTable:
    if table is None:
        return stirling_table(max(200, m2))
    if m2 > table.max_m:
        raise DomainError(f"need d2 up to m={m2}, table holds m <= {table.max_m}")
    return table


def _logsumexp(logs) -> float:
    logs = [v for v in logs if v != -math.inf]
    if not logs:
        return -math.inf
    top = max(logs)
    return top + math.log(math.fsum(math.exp(v - top) for v in logs))


def log_g2m(z: float, m: int, table: StirlingTable | None = None) -> float:
    """``log G_{2m}(z)`` where ``G_{2m}(z) = z**(-2m) sum_{s=1}^m d2(2m, s) z**s``."""
    if z <= 0:
        raise DomainError(f"z must be positive, got {z}")
    if m < 1:
        raise DomainError(f"m must be at least 1, got {m}")
    table = _table_for(2 * m, table)
    logz = math.log(z)
    logs = table.log_row(2 * m)
    return _logsumexp(logs[s] + (s - 2 * m) * logz for s in range(1, m + 1))


def g2m(z: float, m: int, table: StirlingTable | None = None) -> float:
    """``G_{2m}(z)`` evaluated in the log domain with compensated summation."""
    lg = log_g2m(z, m, table)
    if lg > _LOG_MAX:
        raise BoundOverflowError(f"G_{2 * m}({z}) overflows: log value {lg:.6g}")
    return math.exp(lg)


def g2m_exact(z, m: int, table: StirlingTable | None = None) -> Fraction:
    """Exact rational ``G_{2m}(z)`` for rational (or binary float) ``z``."""
    table = _table_for(2 * m, table)
    z = Fraction(z)
    row = table.row(2 * m)
    return sum((row[s] * z ** s for s in range(1, m + 1)), Fraction(0)) / z ** (2 * m)


def moment_bound(n: int, S: int, m: int, table: StirlingTable | None = None) -> float:
    """Upper bound ``S G_m(n/S)`` on ``E[Tr H^m]`` for even ``m``."""
    if m % 2:
        raise DomainError(f"the moment bound needs an even power, got m={m}")
    if not 1 <= S <= n * n:
        raise DomainError(f"S must lie in [1, n^2], got {S}")
    return S * g2m(n / S, m // 2, table)


@dataclass(frozen=True)
class BoundParams:
    """Parameter bundle for the bound evaluators; unused fields stay ``None``."""

    n: int
    S: int
    delta: float | None = None
    epsilon: float | None = None
    sigma: float | None = None
    kappa: float | None = None
    kappa_prime: float | None = None
    alpha: float | None = None
    beta: float | None = None
    M: int | None = None
    m: int | None = None
    L: tuple | None = None

    def __post_init__(self):
        for name in ("delta", "epsilon", "kappa", "kappa_prime", "beta"):
            v = getattr(self, name)
            if v is not None and not 0.0 < v < 1.0:
                raise DomainError(f"{name} must lie in (0, 1), got {v}")
        if self.sigma is not None and not self.sigma > 8:
            raise DomainError(f"sigma must exceed 8, got {self.sigma}")
        if self.M is not None and self.M < 6:
            raise DomainError(f"M must be at least 6, got {self.M}")
        if self.L is not None:
            L = tuple(int(v) for v in self.L)
            if any(v < 1 for v in L):
                raise DomainError("all L_t must be at least 1")
            object.__setattr__(self, "L", L)


@dataclass(frozen=True)
class BoundReport:
    value: float
    terms: dict = field(default_factory=dict)
    params_used: BoundParams | None = None
    feasible: bool = True

    @property
    def probability(self) -> float:
        """``value`` clamped to ``[0, 1]``."""
        return min(1.0, max(0.0, self.value))


def thm31_probability(n: int, S: int, delta: float, table: StirlingTable | None = None,
                      m_max: int | None = None) -> BoundReport:
    """Bound on ``P(||Psi_Lambda^* Psi_Lambda - I|| > delta)``.

    ``value`` is the closed form ``C S exp(-delta^2 n / (4 e S))`` with
    ``C = e^2 / (4 (e - 1))``. The terms also carry the Markov bound
    ``min_m delta^(-2m) S G_{2m}(n/S)`` scanned over ``1 <= m <= m_max``
    (default: as far as the table reaches). ``feasible`` says whether the
    sparsity condition can hold for some failure probability below 1,
    which happens exactly when the closed form is below 1.
    """
    params = BoundParams(n=n, S=S, delta=delta)
    closed = C_CONDITIONING * S * math.exp(-delta ** 2 * n / (4 * math.e * S))
    table = _table_for(0, table) if table is None else table
    top = table.max_m // 2 if m_max is None else min(int(m_max), table.max_m // 2)
    z = n / S
    best_log, best_m = math.inf, None
    for m in range(1, top + 1):
        lv = -2 * m * math.log(delta) + math.log(S) + log_g2m(z, m, table)
        if lv < best_log:
            best_log, best_m = lv, m
    markov = math.exp(min(best_log, _LOG_MAX)) if best_m is not None else math.inf
    return BoundReport(
        value=closed,
        terms={"closed_form": closed, "markov_min": markov, "markov_m": best_m},
        params_used=params,
        feasible=closed < 1.0,
    )


def thm31_condition(n: int, S: int, delta: float, epsilon: float) -> bool:
    """``S <= delta^2 n / (4 e (log(S/epsilon) + c))``."""
    BoundParams(n=n, S=S, delta=delta, epsilon=epsilon)
    return S <= delta ** 2 * n / (4 * math.e * (math.log(S / epsilon) + c_CONDITIONING))


def thm11_coherence_guarantee(n: int, S: int, mu: float) -> bool:
    """Coherence criterion ``S < (1 + 1/mu) / 2`` for uniform BP recovery.

    ``n`` is accepted for symmetry with the other evaluators; for the
    Alltop window ``mu = 1/sqrt(n)`` this reads ``S < (sqrt(n) + 1) / 2``.
    """
    if not 0.0 < mu <= 1.0:
        raise DomainError(f"coherence must lie in (0, 1], got {mu}")
    return S < 0.5 * (1.0 + 1.0 / mu)


def thm12b_sparsity_threshold(n: int, t: float) -> float:
    """Largest admissible S for recovery w.p. ``1 - e^-t`` with a random window."""
    if n % 2:
        raise DomainError(f"n must be even, got {n}")
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    return 0.25 * math.sqrt(n / (2 * math.log(n) + math.log(4) + t)) + 0.5


def thm21_failure_probability(n: int, S: int, sigma: float) -> BoundReport:
    """Failure bound for random-phase coefficients with a Steinhaus window.

    ``value = off_support + conditioning + coherence`` where::

        off_support  = 2 (n^2 - S) exp(-n / (8 sigma S log n))
        conditioning = C S exp(-n / (16 e S))
        coherence    = 4 n^-(sigma/4 - 2)
    """
    if n % 2:
        raise DomainError(f"n must be even, got {n}")
    if not 1 <= S < n * n:
        raise DomainError(f"S must lie in [1, n^2), got {S}")
    params = BoundParams(n=n, S=S, sigma=sigma, kappa=0.5, kappa_prime=0.5, delta=0.5,
                         alpha=math.sqrt(sigma * math.log(n)))
    terms = {
        "off_support": 2.0 * (n * n - S) * math.exp(-n / (8.0 * sigma * S * math.log(n))),
        "conditioning": C_CONDITIONING * S * math.exp(-n / (16.0 * math.e * S)),
        "coherence": 4.0 * n ** (-(sigma / 4.0 - 2.0)),
    }
    value = terms["off_support"] + terms["conditioning"] + terms["coherence"]
    return BoundReport(value=value, terms=terms, params_used=params, feasible=value < 1.0)


def default_L(m: int) -> tuple:
    """``L_t`` = ``m / t`` rounded to the nearest integer, halves rounded up."""
    return tuple(math.floor(m / t + 0.5) for t in range(1, m + 1))


def _a_value(m: int, L, beta: float) -> float:
    return math.fsum(beta ** (m / Lt) for Lt in L)


def lemma51_conditions(params: BoundParams) -> BoundReport:
    """Check ``a = sum_t beta^(m/L_t) < 1`` and ``kappa/(1-kappa) <= (1-a)/(1+a) S^-1.5``.

    ``value`` is ``a``. Without ``kappa`` only the first condition is
    checked and the equality choice of ``kappa`` is reported in the terms.
    """
    m, beta, S = params.m, params.beta, params.S
    if m is None or beta is None:
        raise DomainError("lemma51_conditions needs m and beta")
    L = params.L if params.L is not None else default_L(m)
    if len(L) != m:
        raise DomainError(f"need one L_t per t = 1..{m}, got {len(L)}")
    a = _a_value(m, L, beta)
    terms = {"a": a}
    ok = a < 1.0
    if ok:
        r = (1.0 - a) / (1.0 + a) * S ** -1.5
        terms["kappa_max_ratio"] = r
        terms["kappa_equality"] = r / (1.0 + r)
        if params.kappa is not None:
            ok = params.kappa / (1.0 - params.kappa) <= r * (1.0 + 1e-12)
    return BoundReport(value=a, terms=terms, params_used=replace(params, L=tuple(L)),
                       feasible=ok)


def _lemma51_log_terms(n, S, m, L, beta, kappa, table):
    z = n / S
    log_first = -2.0 * math.log(kappa) + math.log(S) + log_g2m(z, m, table)
    log_sum = _logsumexp(log_g2m(z, t * Lt, table) for t, Lt in enumerate(L, start=1))
    log_second = 2.0 * math.log(n) - 2.0 * m * math.log(beta) + log_sum
    return log_first, log_second


def _exp_capped(v: float) -> float:
    return math.exp(v) if v <= _LOG_MAX else math.inf


def lemma51_probability(params: BoundParams, table: StirlingTable | None = None) -> BoundReport:
    """Failure bound ``kappa^-2 S G_{2m}(z) + n^2 beta^-2m sum_t G_{2 t L_t}(z)``, ``z = n/S``.

    If ``kappa`` is unset the equality choice is used. Infeasible parameter
    sets give ``feasible=False`` and ``value=1``.
    """
    cond = lemma51_conditions(params)
    p = cond.params_used
    if not cond.feasible:
        return BoundReport(value=1.0, terms=dict(cond.terms), params_used=p, feasible=False)
    kappa = p.kappa if p.kappa is not None else cond.terms["kappa_equality"]
    need = 2 * max(max(t * Lt for t, Lt in enumerate(p.L, start=1)), p.m)
    table = _table_for(need, table)
    log_first, log_second = _lemma51_log_terms(p.n, p.S, p.m, p.L, p.beta, kappa, table)
    log_value = _logsumexp([log_first, log_second])
    terms = dict(cond.terms)
    terms.update(
        kappa=kappa,
        gram_term=_exp_capped(log_first),
        offsupport_term=_exp_capped(log_second),
        log_value=log_value,
    )
    return BoundReport(value=_exp_capped(log_value), terms=terms,
                       params_used=replace(p, kappa=kappa), feasible=True)


def minimize_lemma51(n: int, S: int, beta: float = 0.47, m_max: int = 100,
                     table: StirlingTable | None = None) -> BoundReport:
    """Exhaustive scan over ``m = 1..m_max`` with ``L_t = round(m/t)`` and equality ``kappa``."""
    need = 2 * max(max(t * Lt for t, Lt in enumerate(default_L(m_max), start=1)), m_max)
    table = _table_for(need, table)
    best = None
    for m in range(1, m_max + 1):
        rep = lemma51_probability(BoundParams(n=n, S=S, beta=beta, m=m), table)
        if not rep.feasible:
            continue
        if best is None or rep.terms["log_value"] < best.terms["log_value"]:
            best = rep
    if best is None:
        return BoundReport(value=1.0, params_used=BoundParams(n=n, S=S, beta=beta),
                           feasible=False)
    return best


def _Q(beta: float, M: int) -> float:
    alpha = beta ** 3 * math.exp(-1.5)
    return (3.0 * M / (16.0 * (M + 1)) * alpha
            * (1.0 - math.log(M / (1.0 - alpha) / 2.0) / M))


def thm22_constants(beta: float = 0.47, M1: int = 20, M2: int = 21,
                    a: float = 0.957) -> tuple:
    """Constants ``(C1, C2, C3)`` of the deterministic-coefficient recovery condition.

    ``C1 = 1/Q(beta, M1)``; ``C2`` and ``C3`` come from requiring the
    Gram term of the moment-based failure bound to be at most ``epsilon/2`` with
    ``m_z >= M2``.
    """
    alpha = beta ** 3 * math.exp(-1.5)
    log_inv_alpha = math.log(1.0 / alpha)
    c1 = 1.0 / _Q(beta, M1)
    c2 = 16.0 * (M2 + 1) / (alpha * 3.0 * M2 * log_inv_alpha)
    c3 = math.log(2.0 * (1.0 + a) ** 2 / (1.0 - a) ** 2 / (1.0 - alpha))
    return c1, c2, c3


def thm22_condition(n: int, S: int, epsilon: float) -> BoundReport:
    """Sufficient dimension ``max(C1 S log(n^2/eps), C2 S (log(S^4/eps) + C3))``.

    ``value`` is that required ``n``; ``feasible`` is ``n >= value``.
    """
    params = BoundParams(n=n, S=S, epsilon=epsilon)
    c1, c2, c3 = thm22_constants()
    terms = {
        "C1": c1, "C2": c2, "C3": c3,
        "off_support_requirement": c1 * S * math.log(n * n / epsilon),
        "gram_requirement": c2 * S * (math.log(S ** 4 / epsilon) + c3),
    }
    need = max(terms["off_support_requirement"], terms["gram_requirement"])
    return BoundReport(value=need, terms=terms, params_used=params, feasible=n >= need)


def coherence_tail_bound(n: int, alpha: float, kappa_prime: float) -> float:
    """Bound on ``P(mu > alpha / sqrt(n))`` for a Steinhaus window."""
    if not 0.0 < kappa_prime < 1.0:
        raise DomainError(f"kappa_prime must lie in (0, 1), got {kappa_prime}")
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    return 2.0 / (1.0 - kappa_prime) * n * (n - 1) * math.exp(-kappa_prime * alpha ** 2 / 2.0)


def bernstein_tail(u: float, kappa: float) -> float:
    """``exp(-kappa u^2) / (1 - kappa)``, a tail bound for Steinhaus sums."""
    if not 0.0 < kappa < 1.0:
        raise DomainError(f"kappa must lie in (0, 1), got {kappa}")
    if u < 0:
        raise DomainError(f"u must be non-negative, got {u}")
    return math.exp(-kappa * u * u) / (1.0 - kappa)
