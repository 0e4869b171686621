"""Finite-parameter checks of the inequalities behind the second-moment bound.

Each check compares two log-space quantities and yields an :class:`AuditRecord`.
Where an inequality carries a ``(1 - o(1))`` factor, the explicit finite form
from its derivation is used instead and recorded in the record's note.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

import numpy as np
from scipy.special import logsumexp as _np_logsumexp

from .logreal import LogReal
from .moments import (
    MomentParams,
    _log_f,
    _log_ratio_falling,
    expected_count,
    f_log_ratios,
    g_value,
    k_max,
    threshold_size,
)

_RELATIONS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class AuditRecord:
    audit: str
    point: dict
    lhs: LogReal
    relation: str
    rhs: LogReal
    note: str = ""

    @property
    def passed(self) -> bool:
        return _RELATIONS[self.relation](self.lhs, self.rhs)

    @property
    def log_margin(self) -> float:
        """``log rhs - log lhs`` oriented so that positive means the claim holds with room."""
        if self.lhs.sign <= 0 or self.rhs.sign <= 0:
            return math.nan
        m = self.rhs.log - self.lhs.log
        return m if self.relation in ("<", "<=") else -m


@dataclass
class AuditReport:
    name: str
    records: list[AuditRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def extend(self, records: Iterable[AuditRecord]) -> AuditReport:
        self.records.extend(records)
        return self

    def failures(self) -> list[AuditRecord]:
        return [r for r in self.records if not r.passed]

    def select(self, audit: str) -> list[AuditRecord]:
        return [r for r in self.records if r.audit == audit]

    def to_text(self) -> str:
        lines = []
        for r in self.records:
            pt = " ".join(f"{k}={_fmt(v)}" for k, v in r.point.items())
            lines.append(
                f"{r.audit} {pt} lhs_log={_fmt(r.lhs.log)} {r.relation} rhs_log={_fmt(r.rhs.log)} "
                f"log_margin={_fmt(r.log_margin)} pass={'yes' if r.passed else 'no'}"
                + (f" note={r.note}" if r.note else "")
            )
        lines.append(f"# {self.name}: {len(self.records)} records, "
                     f"{len(self.failures())} failed, overall={'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["audit", "n", "p", "c", "delta", "b", "ell", "k", "t", "lhs_sign", "lhs_log",
                    "relation", "rhs_sign", "rhs_log", "log_margin", "pass", "note"])
        for r in self.records:
            pt = r.point
            w.writerow([r.audit] + [_fmt(pt.get(key, "")) for key in ("n", "p", "c", "delta", "b", "ell", "k", "t")]
                       + [r.lhs.sign, _fmt(r.lhs.log), r.relation, r.rhs.sign, _fmt(r.rhs.log),
                          _fmt(r.log_margin), int(r.passed), r.note])
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def _point(params: MomentParams, **extra) -> dict:
    pt = {"n": params.n, "p": params.p, "c": params.c, "delta": params.delta, "b": params.b}
    pt.update(extra)
    return pt


def default_ells(b: int) -> list[int]:
    """``{2, b/2, b-1}`` restricted to ``2..b``."""
    return sorted({ell for ell in (2, b // 2, b - 1) if 2 <= ell <= b})


# --------------------------------------------------------------------------
# Claim 2: f(k) is increasing on 1..k_ell


def audit_claim2(params: MomentParams, ells: Sequence[int] | None = None) -> AuditReport:
    """Ratios ``f(k+1)/f(k) >= 1`` for every ``1 <= k < k_ell``, one record per ``ell``.

    Also checks the derivation's lower bound ``(b-k)^2/k * c/n`` against the exact
    ratio and notes whether ``1 - sqrt(1/ln c) > d/(d+1)``, the condition that
    makes the derivation's contradiction step go through.
    """
    report = AuditReport("claim2")
    b, d, n, c = params.b, params.d, params.n, params.c
    eps_ok = 1 - math.sqrt(1 / math.log(c)) > d / (d + 1)
    for ell in ells or default_ells(b):
        km = k_max(ell, b, d)
        if km <= 1:
            report.records.append(AuditRecord("claim2_ratio", _point(params, ell=ell, k=1),
                                              LogReal.of(1), "<=", LogReal.of(1), "k_ell = 1: trivial"))
            continue
        log_r = f_log_ratios(ell, params)
        worst = int(np.argmin(log_r))
        k = worst + 1
        note = f"min over k=1..{km - 1}; eps-threshold {'met' if eps_ok else 'not met'}"
        report.records.append(AuditRecord("claim2_ratio", _point(params, ell=ell, k=k),
                                          LogReal.of(1), "<=", LogReal.from_log(float(log_r[worst])), note))
        ks = np.arange(1, km, dtype=np.float64)
        log_lower = 2 * np.log(b - ks) - np.log(ks) + math.log(c / n)
        gap = log_r - log_lower
        w = int(np.argmin(gap))
        report.records.append(AuditRecord("claim2_proof_ratio", _point(params, ell=ell, k=w + 1),
                                          LogReal.from_log(float(log_lower[w])), "<=",
                                          LogReal.from_log(float(log_r[w])),
                                          "exact ratio vs (b-k)^2/k*c/n at tightest k"))
    return report


def smallest_passing_c(n: int, delta: int, cs: Sequence[float], ells_fn=default_ells) -> float | None:
    """Least ``c`` on the grid from which Claim 2 passes for every larger grid value."""
    best = None
    for c in sorted(cs, reverse=True):
        params = MomentParams(n, c / n, delta)
        if not audit_claim2(params, ells_fn(params.b)).passed:
            break
        best = c
    return best


# --------------------------------------------------------------------------
# Claim 3: falling-factorial ratio


def audit_claim3(n: int, b: int, ell: int) -> AuditReport:
    """``(n-b)_(b-ell) / (n)_b < 6^ell n^-ell e^(-b^2/n) < (6/n)^ell``."""
    if not 0 <= ell <= b <= n:
        raise ValueError("need 0 <= ell <= b <= n")
    params = MomentParams(n, 0.5, 1, b)
    lhs = LogReal.from_log(_log_ratio_falling(params, ell))
    mid = LogReal.from_log(ell * math.log(6 / n) - b * b / n)
    top = LogReal.from_log(ell * math.log(6 / n))
    pt = {"n": n, "b": b, "ell": ell}
    return AuditReport("claim3", [
        AuditRecord("claim3_exp", pt, lhs, "<", mid),
        AuditRecord("claim3_plain", pt, lhs, "<", top),
    ])


def claim3_least_n(b_of_n, ells_of_b, ns: Sequence[int]) -> int | None:
    """Least ``n`` on the grid from which Claim 3 holds at every larger grid point."""
    best = None
    for n in sorted(ns, reverse=True):
        b = b_of_n(n)
        if not all(audit_claim3(n, b, ell).passed for ell in ells_of_b(b)):
            break
        best = n
    return best


# --------------------------------------------------------------------------
# Lemma 1, Lemma 2, Corollary 1, the Case I-III bounds, the t-gap via r(x), Claim 1


def _lemma2_rhs_log(params: MomentParams, ell: int) -> float:
    n, c = params.n, params.c
    expo = -ell + (1 + 1 / math.log(n)) * c * math.comb(ell, 2) / (n * math.log(c))
    return ell * math.log(6) + expo * math.log(c)


def _corollary1_rhs_log(params: MomentParams, ell: int) -> float:
    h, n, c = params.h, params.n, params.c
    expo = -h * ell / 2 + (1 - h / 2) * ell / math.log(n)
    return ell * math.log(6) + expo * math.log(c)


def _pair_weight_log(params: MomentParams, ell: int) -> float:
    """``log [(n-b)_(b-ell)/(n)_b * p^-ell (1-p)^(ell - C(ell,2))]``."""
    p = params.p
    return (_log_ratio_falling(params, ell) - ell * math.log(p)
            + (ell - math.comb(ell, 2)) * math.log1p(-p))


def _case(params: MomentParams, ell: int) -> str:
    b, d = params.b, params.d
    km = k_max(ell, b, d)
    if ell == b:
        return "III"
    if km == ell:
        return "II"
    return "I"


def r_function(x, params: MomentParams):
    """``r(x) = -x - (1 + 1/ln n)(1 - h/2) c^(-x-1)``."""
    n, c, h = params.n, params.c, params.h
    return -x - (1 + 1 / math.log(n)) * (1 - h / 2) * np.power(c, -np.asarray(x, dtype=float) - 1)


def _lnlnc_over_lnc(c: float) -> float:
    return math.log(math.log(c)) / math.log(c)


def _pos(x: float) -> LogReal:
    return LogReal.of(x)


def audit_proof_chain(params: MomentParams, ells: Sequence[int] | None = None,
                      ts: Sequence[float] | None = None) -> AuditReport:
    """Lemma 1, Lemma 2, Corollary 1 and the Case I-III chain at one point.

    Record names: ``g_bound`` bounds g(ell) by the Corollary 1 factor times
    ``k_ell f(k_ell)``; ``case2_exponent`` is the Case II exponent against
    ``(ln c)^(-1.001 ell)``; ``t_gap`` samples ``1 - (1+1/ln n)(2-h)/2 c^-t - t``
    on a t-grid; ``r_endpoint`` / ``r_left_endpoint`` evaluate r(x) at the
    interval ends, where its minimum lies since r is concave.
    """
    report = AuditReport("proof_chain")
    b, d, n, c = params.b, params.d, params.n, params.c
    h = params.h
    L = _lnlnc_over_lnc(c)
    cor_note = "(1-o(1)) replaced by exponent -h*ell/2 + (1-h/2)*ell/ln n"
    for ell in ells or default_ells(b):
        km = k_max(ell, b, d)
        logs_f = _log_f(ell, np.arange(1, km + 1), b, d, params.p)
        log_sum = float(_np_logsumexp(logs_f))
        log_top = math.log(km) + float(logs_f[-1])
        claim2_ok = km == 1 or bool(np.all(f_log_ratios(ell, params) >= 0))
        case = _case(params, ell)
        pt = _point(params, ell=ell, k=km)
        report.records.append(AuditRecord(
            "lemma1", pt, LogReal.from_log(log_sum), "<" if km > 1 else "<=", LogReal.from_log(log_top),
            f"case {case}; claim2 {'holds' if claim2_ok else 'fails'} at this ell"))
        w = LogReal.from_log(_pair_weight_log(params, ell))
        report.records.append(AuditRecord("lemma2", pt, w, "<", LogReal.from_log(_lemma2_rhs_log(params, ell))))
        report.records.append(AuditRecord("corollary1", pt, w, "<",
                                          LogReal.from_log(_corollary1_rhs_log(params, ell)), cor_note))
        report.records.append(AuditRecord(
            "g_bound", pt, g_value(ell, params), "<",
            LogReal.from_log(_corollary1_rhs_log(params, ell) + log_top), f"case {case}; {cor_note}"))
        if case == "II":
            t = math.log(b / ell) / math.log(c)
            if 0 < t < 1 - 1.01 * L:
                expo = -ell + (1 + 1 / math.log(n)) * c * math.comb(ell, 2) / (n * math.log(c)) + t * ell
                report.records.append(AuditRecord(
                    "case2_exponent", {**pt, "t": t}, LogReal.from_log(expo * math.log(c)), "<",
                    LogReal.from_log(-1.001 * ell * math.log(math.log(c)))))
    t_hi = 1 - 1.01 * L
    if ts is None:
        ts = np.linspace(0, t_hi, 22)[1:-1].tolist() if t_hi > 0 else []
    target = _pos(1.001 * L)
    for t in ts:
        val = 1 - (1 + 1 / math.log(n)) * (2 - h) / 2 * c ** (-t) - t
        report.records.append(AuditRecord("t_gap", _point(params, t=t), LogReal.of(val), ">", target))
    x_right = -1.01 * L
    report.records.append(AuditRecord(
        "r_endpoint", _point(params, t=x_right + 1), LogReal.of(float(r_function(x_right, params))), ">", target,
        "r at x = -1.01 lnln c/ln c"))
    report.records.append(AuditRecord(
        "r_left_endpoint", _point(params, t=0.0), LogReal.of(float(r_function(-1.0, params))), ">", target,
        "r at x = -1"))
    return report


def r_derivative_zero(params: MomentParams) -> float:
    """The single zero of ``r'(x) = -1 + (1 + 1/ln n) ln c (1 - h/2) c^(-x-1)``."""
    n, c, h = params.n, params.c, params.h
    return math.log((1 + 1 / math.log(n)) * math.log(c) * (1 - h / 2)) / math.log(c) - 1


def sqrt_law_p(n: int) -> float:
    """``p = n^(-1/2) (ln n)^(10/9)``, the lower edge of the theorem's range."""
    return n ** -0.5 * math.log(n) ** (10 / 9)


def audit_claim1(ns: Sequence[int], form: str = "lnform") -> AuditReport:
    """``E[X]`` strictly increasing along ``ns`` under the square-root law, ``b = threshold_size``.

    Also compares ``E[X]`` with the derivation's lower estimate
    ``exp(-b^2/(n-b)) (ln c)^(3b/2)`` (recorded, the estimate hides ``~`` steps).
    """
    report = AuditReport("claim1")
    prev = None
    for n in sorted(ns):
        p = sqrt_law_p(n)
        b = threshold_size(n, p, form)
        params = MomentParams(n, p, 2, b)
        ex = expected_count(params)
        pt = _point(params)
        if prev is not None:
            report.records.append(AuditRecord("claim1_growth", pt, prev, "<", ex))
        estimate = LogReal.from_log(-b * b / (n - b) + 1.5 * b * math.log(math.log(params.c)))
        report.records.append(AuditRecord("claim1_estimate", pt, LogReal.of(1), "<", estimate,
                                          "estimate tends to infinity"))
        prev = ex
    return report


# --------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class GridPoint:
    n: int
    c: float
    delta: int
    line: int = 0

    @property
    def p(self) -> float:
        return self.c / self.n


class GridError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def parse_grid(text: str) -> list[GridPoint]:
    """Whitespace-separated ``n c delta`` rows; ``#`` starts a comment."""
    points = []
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise GridError(i, f"expected 'n c delta', got {raw.strip()!r}")
        try:
            n, c, delta = int(float(parts[0])), float(parts[1]), int(parts[2])
        except ValueError:
            raise GridError(i, f"non-numeric field in {raw.strip()!r}") from None
        if n < 2 or delta < 1 or not c > math.exp(1.01) or c / n >= 1:
            raise GridError(i, f"need n >= 2, delta >= 1, e^1.01 < c < n (got {raw.strip()!r})")
        points.append(GridPoint(n, c, delta, i))
    return points


def default_grid_text() -> str:
    return resources.files("inducedtrees").joinpath("data/default_grid.txt").read_text(encoding="utf-8")


CLAIM1_NS = (10**4, 10**5, 10**6, 10**7)


def run_grid(points: Sequence[GridPoint], claim1_ns: Sequence[int] = CLAIM1_NS) -> dict[str, AuditReport]:
    """Every audit over every grid point, merged in grid order."""
    claim2, claim3, chain = AuditReport("claim2"), AuditReport("claim3"), AuditReport("proof_chain")
    for pt in points:
        params = MomentParams(pt.n, pt.p, pt.delta)
        claim2.extend(audit_claim2(params).records)
        b = params.b
        for ell in sorted({2, b // 2, b}):
            if 0 <= ell <= b:
                claim3.extend(audit_claim3(pt.n, b, ell).records)
        chain.extend(audit_proof_chain(params).records)
    return {"claim2": claim2, "claim3": claim3, "proof_chain": chain, "claim1": audit_claim1(claim1_ns)}
