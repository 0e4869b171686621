"""First and second moment quantities for induced copies of a tree in G(n, p).

Everything is evaluated in natural-log space and returned as :class:`LogReal`,
so products like ``(n)_b p^(b-1) (1-p)^C(b-1,2)`` never overflow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.special import gammaln, logsumexp as _np_logsumexp

from .logreal import LogReal

# Theorem regime: n^(-1/2) (ln n)^(10/9) <= p <= P_UPPER.  The sharper threshold
# formula is stated for p < 1/ln n; above that only the (1 - o(1)) form applies.
P_UPPER = 0.99
REGIME_LOG_EXPONENT = 10 / 9
# c = np must exceed e^1.01 so that ln ln c > 0 and h < 2 with room to spare.
MIN_LOG_C = 1.01

Form = Literal["logq", "lnform"]


class RegimeWarning(UserWarning):
    pass


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def _xlog(k, x: float) -> float:
    """``k * log(x)`` with the convention ``0 * log 0 = 0``."""
    if k == 0:
        return 0.0
    return k * _log(x)


@lru_cache(maxsize=4096)
def log_falling(r: int, t: int) -> float:
    """``log (r)_t`` for integers ``0 <= t <= r``."""
    if t < 0 or t > r:
        raise ValueError(f"falling factorial ({r})_{t} undefined")
    if t == 0:
        return 0.0
    if t <= 5_000_000:
        i = np.arange(t, dtype=np.float64)
        return t * math.log(r) + math.fsum(np.log1p(-i / r))
    return float(gammaln(r + 1.0) - gammaln(r - t + 1.0))


def log_comb(a, b):
    return gammaln(np.asarray(a, dtype=np.float64) + 1) - gammaln(np.asarray(b, dtype=np.float64) + 1) \
        - gammaln(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64) + 1)


def degree_constant(delta: int) -> int:
    """``2^(2 delta) * delta!`` as an exact integer."""
    if delta < 1:
        raise ValueError("delta must be at least 1")
    return 4**delta * math.factorial(delta)


def k_max(ell: int, b: int, d: int) -> int:
    """Largest possible component count of an overlap of size ``ell``."""
    if ell > b:
        raise ValueError(f"ell = {ell} exceeds b = {b}")
    if ell < 0:
        raise ValueError("ell must be non-negative")
    if ell == b:
        return 1
    return min(ell, (b - ell) * d)


def _c_and_h(n: int, p: float) -> tuple[float, float]:
    c = n * p
    if not c > math.exp(MIN_LOG_C):
        raise ValueError(f"c = np = {c:g} must exceed e^{MIN_LOG_C} for h = 3 lnln c / ln c")
    lc = math.log(c)
    return c, 3 * math.log(lc) / lc


def log_q(x: float, p: float) -> float:
    """``log_q x`` with ``q = 1/(1-p)``."""
    return math.log(x) / -math.log1p(-p)


def threshold_size(n: int, p: float, form: Form = "lnform") -> int:
    """Tree size ``b`` at the threshold, floored.

    ``logq``: ``(2 - h) log_q(np)``.  ``lnform``: ``(2 - h) n ln(c) / c``, which is
    never smaller.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    c, h = _c_and_h(n, p)
    if form == "logq":
        value = (2 - h) * log_q(c, p)
    elif form == "lnform":
        value = (2 - h) * n * math.log(c) / c
    else:
        raise ValueError(f"unknown form {form!r}")
    return math.floor(value)


@dataclass(frozen=True)
class MomentParams:
    """Parameters shared by every formula.  ``b`` defaults to ``threshold_size(n, p)``."""

    n: int
    p: float
    delta: int
    b: int | None = None
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie strictly between 0 and 1")
        if self.delta < 1:
            raise ValueError("delta must be at least 1")
        if self.b is None:
            object.__setattr__(self, "b", threshold_size(self.n, self.p, "lnform"))
        if self.b < 1 or self.b > self.n:
            raise ValueError(f"b = {self.b} must lie in 1..n")
        object.__setattr__(self, "notes", tuple(self._regime_notes()))

    def _regime_notes(self):
        low = self.n ** -0.5 * math.log(self.n) ** REGIME_LOG_EXPONENT if self.n > 1 else math.inf
        if self.p < low:
            yield f"p = {self.p:g} below n^(-1/2) (ln n)^(10/9) = {low:g}"
        if self.p > P_UPPER:
            yield f"p = {self.p:g} above {P_UPPER}"
        if self.n > 1 and self.p >= 1 / math.log(self.n):
            yield f"p = {self.p:g} at or above 1/ln n: the sharper threshold form is not claimed here"

    @property
    def in_regime(self) -> bool:
        return not self.notes

    def warn_if_out_of_regime(self):
        for msg in self.notes:
            warnings.warn(msg, RegimeWarning, stacklevel=2)

    @property
    def c(self) -> float:
        return self.n * self.p

    @property
    def q(self) -> float:
        return 1.0 / (1.0 - self.p)

    @property
    def h(self) -> float:
        return _c_and_h(self.n, self.p)[1]

    @property
    def d(self) -> int:
        return degree_constant(self.delta)

    def with_b(self, b: int) -> MomentParams:
        return MomentParams(self.n, self.p, self.delta, b)


def expected_count(params: MomentParams) -> LogReal:
    """``E[X] = (n)_b p^(b-1) (1-p)^C(b-1,2)``."""
    n, b, p = params.n, params.b, params.p
    if b > n:
        raise ValueError("b exceeds n")
    return LogReal.from_log(log_falling(n, b) + _xlog(b - 1, p) + _xlog(math.comb(b - 1, 2), 1 - p))


def _log_f(ell: int, ks: np.ndarray, b: int, d: int, p: float) -> np.ndarray:
    ks = np.asarray(ks, dtype=np.float64)
    return (2 * log_comb(b, ks) + gammaln(ks + 1) + log_comb(ks + ell - 1, ell)
            + ell * math.log(d) + ks * (math.log(p) - math.log1p(-p)))


def _check_lk(ell: int, k: int, params: MomentParams) -> int:
    if not 2 <= ell <= params.b:
        raise ValueError(f"ell = {ell} outside 2..b = {params.b}")
    km = k_max(ell, params.b, params.d)
    if not 1 <= k <= km:
        raise ValueError(f"k = {k} outside 1..k_ell = {km}")
    return km


def f_value(ell: int, k: int, params: MomentParams) -> LogReal:
    """``C(b,k)^2 k! C(k+ell-1, ell) d^ell (p/(1-p))^k``."""
    _check_lk(ell, k, params)
    return LogReal.from_log(float(_log_f(ell, np.array([k]), params.b, params.d, params.p)[0]))


def f_log_ratios(ell: int, params: MomentParams) -> np.ndarray:
    """``log f(k+1) - log f(k)`` for ``k = 1 .. k_ell - 1`` from the closed-form quotient."""
    km = k_max(ell, params.b, params.d)
    k = np.arange(1, km, dtype=np.float64)
    b, p = params.b, params.p
    return (2 * np.log((b - k) / (k + 1)) + np.log(k + 1) + np.log((k + ell) / k)
            + math.log(p) - math.log1p(-p))


def _log_ratio_falling(params: MomentParams, ell: int) -> float:
    """``log (n-b)_(b-ell) - log (n)_b``."""
    n, b = params.n, params.b
    if n - b < b - ell:
        return -math.inf
    return log_falling(n - b, b - ell) - log_falling(n, b)


def s_bound(ell: int, k: int, params: MomentParams) -> LogReal:
    """Counting bound ``(n-b)_(b-ell) C(b,k)^2 k! C(k+ell-1,ell) d^ell`` on compatible embeddings."""
    _check_lk(ell, k, params)
    n, b = params.n, params.b
    if n - b < b - ell:
        return LogReal.zero()
    log = (log_falling(n - b, b - ell) + 2 * float(log_comb(b, k)) + math.lgamma(k + 1)
           + float(log_comb(k + ell - 1, ell)) + ell * math.log(params.d))
    return LogReal.from_log(log)


def _log_weight(ell: int, k, p: float):
    """``log [p^-(ell-k) (1-p)^(-C(ell,2) + ell - k)]``."""
    k = np.asarray(k, dtype=np.float64)
    return -(ell - k) * math.log(p) + (-math.comb(ell, 2) + ell - k) * math.log1p(-p)


def g_value(ell: int, params: MomentParams) -> LogReal:
    """The ``ell``-th outer summand of the bound-based H-tilde."""
    if not 2 <= ell <= params.b:
        raise ValueError(f"ell = {ell} outside 2..b = {params.b}")
    km = k_max(ell, params.b, params.d)
    p = params.p
    head = _log_ratio_falling(params, ell) - ell * math.log(p) + (ell - math.comb(ell, 2)) * math.log1p(-p)
    if head == -math.inf:
        return LogReal.zero()
    inner = float(_np_logsumexp(_log_f(ell, np.arange(1, km + 1), params.b, params.d, p)))
    return LogReal.from_log(head + inner)


def _bound_term_logs(params: MomentParams):
    """Yield ``(ell, ks, log terms)`` arrays of the bound-based double sum, one row per ``ell``."""
    n, b, p = params.n, params.b, params.p
    log_nb = log_falling(n, b)
    for ell in range(2, b + 1):
        if n - b < b - ell:
            continue
        ks = np.arange(1, k_max(ell, b, params.d) + 1)
        logs = (log_falling(n - b, b - ell) + 2 * log_comb(b, ks) + gammaln(ks + 1.0)
                + log_comb(ks + ell - 1, ell) + ell * math.log(params.d)
                - log_nb + _log_weight(ell, ks, p))
        yield ell, ks, np.atleast_1d(logs)


def _exact_term_logs(params: MomentParams, tree, phi1, force: bool):
    from .overlap import overlap_table

    n, b, p = params.n, params.b, params.p
    if tree is None or tree.b != b:
        raise ValueError("exact-oracle source needs a tree with b vertices")
    table = overlap_table(tree, phi1, n, force=force)
    log_nb = log_falling(n, b)
    for ell in range(2, b + 1):
        for k in range(1, k_max(ell, b, params.d) + 1):
            s = table.S(ell, k)
            if s:
                yield ell, k, math.log(s) - log_nb + float(_log_weight(ell, k, p))


def h_tilde_terms(params: MomentParams, s_source: str = "bound", *, tree=None, phi1=None,
                  force: bool = False) -> dict[tuple[int, int], LogReal]:
    """Every ``(ell, k)`` term ``S(ell,k) / (n)_b * p^-(ell-k) (1-p)^(-C(ell,2)+ell-k)``.

    ``s_source="bound"`` plugs in :func:`s_bound`; ``"exact-oracle"`` counts
    ``S(ell, k)`` by enumeration for ``tree`` (which must have ``b`` vertices).
    The bound-based table has about ``b^2 / 2`` entries; :func:`h_tilde`
    avoids building it.
    """
    if s_source == "bound":
        return {(ell, k): LogReal.from_log(lg)
                for ell, ks, logs in _bound_term_logs(params)
                for k, lg in zip(ks.tolist(), logs.tolist())}
    if s_source in ("exact-oracle", "exact"):
        return {(ell, k): LogReal.from_log(lg) for ell, k, lg in _exact_term_logs(params, tree, phi1, force)}
    raise ValueError(f"unknown s_source {s_source!r}")


def h_tilde(params: MomentParams, s_source: str = "bound", *, tree=None, phi1=None,
            force: bool = False) -> LogReal:
    """Double sum over ``2 <= ell <= b`` and ``1 <= k <= k_ell``."""
    if s_source == "bound":
        rows = [float(_np_logsumexp(logs)) for _, _, logs in _bound_term_logs(params)]
    elif s_source in ("exact-oracle", "exact"):
        rows = [lg for _, _, lg in _exact_term_logs(params, tree, phi1, force)]
    else:
        raise ValueError(f"unknown s_source {s_source!r}")
    if not rows:
        return LogReal.zero()
    return LogReal.from_log(float(_np_logsumexp(rows)))


@dataclass(frozen=True)
class ChebyshevBound:
    raw: LogReal  # 1/E[X] + H-tilde, unclipped
    expected: LogReal
    h_tilde: LogReal

    @property
    def value(self) -> float:
        return 1.0 if self.raw.log >= 0 else float(self.raw)

    @property
    def informative(self) -> bool:
        return self.raw < 1


def chebyshev_bound(params: MomentParams, s_source: str = "bound", *, tree=None, phi1=None,
                    force: bool = False) -> ChebyshevBound:
    """Upper bound ``min(1, 1/E[X] + H-tilde)`` on ``Pr[X = 0]``."""
    ex = expected_count(params)
    if ex.sign == 0:
        raise ValueError("E[X] = 0: the bound is undefined")
    ht = h_tilde(params, s_source, tree=tree, phi1=phi1, force=force)
    return ChebyshevBound(1 / ex + ht, ex, ht)
