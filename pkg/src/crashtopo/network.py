"""Pairwise Granger-causality networks over markets or sectors."""
from __future__ import annotations

import csv
import enum
import io
import itertools
import json
from dataclasses import dataclass
from datetime import date
from typing import Mapping, Sequence

import numpy as np

from crashtopo._parallel import ordered_map
from crashtopo.econometrics import GrangerResult, ensure_stationary, fpe_select, granger_test
from crashtopo.errors import CoverageError, ValidationError


@dataclass(frozen=True)
class PeriodSpec:
    """Half-open date interval ``[start, end)``."""

    label: str
    start: date
    end: date

    def __post_init__(self):
        if not self.start < self.end:
            raise ValidationError(f"period {self.label!r}: start {self.start} is not before end {self.end}")

    def to_dict(self) -> dict:
        return {"label": self.label, "start": self.start.isoformat(), "end": self.end.isoformat()}

    @classmethod
    def from_dict(cls, data: Mapping) -> PeriodSpec:
        return cls(data["label"], date.fromisoformat(data["start"]), date.fromisoformat(data["end"]))

    @classmethod
    def parse(cls, text: str) -> PeriodSpec:
        """``label:YYYY-MM-DD:YYYY-MM-DD``."""
        try:
            label, start, end = text.rsplit(":", 2)
            return cls(label, date.fromisoformat(start), date.fromisoformat(end))
        except ValueError as exc:
            raise ValidationError(f"bad period {text!r}; expected label:YYYY-MM-DD:YYYY-MM-DD") from exc


DEFAULT_PERIODS = (
    PeriodSpec("pre-crash", date(2018, 6, 1), date(2019, 6, 1)),
    PeriodSpec("crash", date(2019, 6, 1), date(2020, 6, 1)),
    PeriodSpec("post-crash", date(2020, 6, 1), date(2021, 6, 1)),
)


class RelationKind(str, enum.Enum):
    A_TO_B = "a->b"
    B_TO_A = "b->a"
    BIDIRECTIONAL = "bidirectional"
    INDEPENDENT = "independent"


def classify_pair(res_ab: GrangerResult, res_ba: GrangerResult, alpha: float = 0.05) -> RelationKind:
    """``res_ab`` tests a -> b, ``res_ba`` tests b -> a."""
    ab, ba = res_ab.p_value < alpha, res_ba.p_value < alpha
    if ab and ba:
        return RelationKind.BIDIRECTIONAL
    if ab:
        return RelationKind.A_TO_B
    if ba:
        return RelationKind.B_TO_A
    return RelationKind.INDEPENDENT


def _granger_to_dict(g: GrangerResult) -> dict:
    return {
        "cause": g.cause,
        "effect": g.effect,
        "lag": g.lag,
        "f_statistic": g.f_statistic,
        "p_value": g.p_value,
        "df": list(g.df),
        "rss_restricted": g.rss_restricted,
        "rss_unrestricted": g.rss_unrestricted,
        "perfect_fit": g.perfect_fit,
    }


def _granger_from_dict(d: Mapping) -> GrangerResult:
    return GrangerResult(
        d["cause"], d["effect"], int(d["lag"]), float(d["f_statistic"]), float(d["p_value"]),
        tuple(d["df"]), float(d["rss_restricted"]), float(d["rss_unrestricted"]), bool(d["perfect_fit"]),
    )


@dataclass(frozen=True)
class Relation:
    a: str
    b: str
    kind: RelationKind
    tests: tuple[GrangerResult, GrangerResult]  # (a -> b, b -> a)
    d: int = 0
    stationary: bool = True

    @property
    def lag(self) -> int:
        return self.tests[0].lag

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "kind": self.kind.value,
            "d": self.d,
            "stationary": self.stationary,
            "tests": [_granger_to_dict(t) for t in self.tests],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> Relation:
        t = tuple(_granger_from_dict(x) for x in d["tests"])
        return cls(d["a"], d["b"], RelationKind(d["kind"]), t, int(d.get("d", 0)), bool(d.get("stationary", True)))


@dataclass(frozen=True)
class CausalNetwork:
    nodes: tuple[str, ...]
    edges: tuple[Relation, ...]
    period: PeriodSpec
    alpha: float = 0.05
    metric: str = ""

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        seen = set()
        for r in self.edges:
            if r.a not in self.nodes or r.b not in self.nodes:
                raise ValidationError(f"relation {r.a}/{r.b} references an unknown node")
            key = frozenset((r.a, r.b))
            if key in seen or len(key) != 2:
                raise ValidationError(f"duplicate or self relation for {r.a}/{r.b}")
            seen.add(key)

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "period": self.period.to_dict(),
            "alpha": self.alpha,
            "nodes": list(self.nodes),
            "edges": [r.to_dict() for r in self.edges],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> CausalNetwork:
        return cls(
            tuple(d["nodes"]),
            tuple(Relation.from_dict(e) for e in d["edges"]),
            PeriodSpec.from_dict(d["period"]),
            float(d["alpha"]),
            d.get("metric", ""),
        )


@dataclass(frozen=True)
class AnalysisConfig:
    d_max: int = 2
    max_lag: int | None = None
    bonferroni: bool = False
    min_points: int = 30
    workers: int | None = None


def _series_arrays(series) -> tuple[tuple[date, ...], np.ndarray]:
    if hasattr(series, "dates") and hasattr(series, "values"):
        return tuple(series.dates), np.asarray(series.values, dtype=float)
    dates, values = series
    return tuple(dates), np.asarray(values, dtype=float)


def _slice(node: str, series, period: PeriodSpec, min_points: int) -> dict[date, float]:
    dates, values = _series_arrays(series)
    out = {d: float(v) for d, v in zip(dates, values) if period.start <= d < period.end}
    if len(out) < min_points:
        raise CoverageError(
            f"{node}: only {len(out)} observations in {period.label} "
            f"({period.start}..{period.end}), need {min_points}"
        )
    return out


def analyse_pair(
    a: str,
    b: str,
    xa: np.ndarray,
    xb: np.ndarray,
    alpha: float = 0.05,
    config: AnalysisConfig = AnalysisConfig(),
    test_level: float | None = None,
) -> Relation:
    """Difference jointly to stationarity, pick one FPE lag, test both directions.

    ``test_level`` overrides ``alpha`` for the causality decision only
    (used for the Bonferroni option).
    """
    (sa, sb), d = ensure_stationary([xa, xb], alpha=alpha, d_max=config.d_max, labels=[a, b])
    ya, yb = sa.values, sb.values
    q = fpe_select(ya, yb, config.max_lag)
    ab = granger_test(yb, ya, q, effect_label=b, cause_label=a)
    ba = granger_test(ya, yb, q, effect_label=a, cause_label=b)
    kind = classify_pair(ab, ba, alpha if test_level is None else test_level)
    return Relation(a, b, kind, (ab, ba), d, sa.stationary and sb.stationary)


def _pair_task(args):
    return analyse_pair(*args)


def pairwise_analysis(
    series_by_node: Mapping,
    period: PeriodSpec,
    alpha: float = 0.05,
    config: AnalysisConfig = AnalysisConfig(),
    metric: str = "",
) -> CausalNetwork:
    """Granger-test every unordered pair of nodes over one period.

    Each pair is restricted to the dates both series share inside the
    period. Node order follows the mapping's order.
    """
    nodes = list(series_by_node)
    if len(nodes) < 2:
        raise ValidationError("need at least two nodes")
    sliced = {n: _slice(n, series_by_node[n], period, config.min_points) for n in nodes}
    pairs = list(itertools.combinations(nodes, 2))
    level = alpha / len(pairs) if config.bonferroni else alpha
    tasks = []
    for a, b in pairs:
        common = sorted(sliced[a].keys() & sliced[b].keys())
        if len(common) < config.min_points:
            raise CoverageError(f"{a}/{b}: only {len(common)} shared observations in {period.label}")
        xa = np.array([sliced[a][t] for t in common])
        xb = np.array([sliced[b][t] for t in common])
        tasks.append((a, b, xa, xb, alpha, config, level))
    edges = ordered_map(_pair_task, tasks, config.workers)
    return CausalNetwork(tuple(nodes), tuple(edges), period, alpha, metric)


@dataclass
class NodeCounts:
    cause: int = 0
    effect: int = 0
    bidirectional: int = 0

    @property
    def total(self) -> int:
        return self.cause + self.effect + self.bidirectional

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.cause, self.effect, self.bidirectional)


def relation_counts(net: CausalNetwork) -> dict[str, NodeCounts]:
    counts = {n: NodeCounts() for n in net.nodes}
    for r in net.edges:
        if r.kind is RelationKind.A_TO_B:
            counts[r.a].cause += 1
            counts[r.b].effect += 1
        elif r.kind is RelationKind.B_TO_A:
            counts[r.b].cause += 1
            counts[r.a].effect += 1
        elif r.kind is RelationKind.BIDIRECTIONAL:
            counts[r.a].bidirectional += 1
            counts[r.b].bidirectional += 1
    return counts


_COLOR_BUCKETS = ((0.0, "#e0ecf4"), (1 / 3, "#9ebcda"), (2 / 3, "#8856a7"))


def _node_color(total: int, n_nodes: int) -> str:
    frac = total / max(1, n_nodes - 1)
    color = _COLOR_BUCKETS[0][1]
    for lower, c in _COLOR_BUCKETS:
        if frac > lower:
            color = c
    return color if total else _COLOR_BUCKETS[0][1]


def _dot_id(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(net: CausalNetwork, comments: Sequence[str] = ()) -> str:
    """Graphviz digraph; bidirectional relations get a single ``dir=both`` edge."""
    counts = relation_counts(net)
    lines = [f"// {c}" for c in comments]
    lines.append(f"digraph {_dot_id(net.metric + ' ' + net.period.label if net.metric else net.period.label)} {{")
    lines.append("  node [shape=ellipse, style=filled];")
    for n in net.nodes:
        total = counts[n].total
        lines.append(f"  {_dot_id(n)} [fillcolor={_dot_id(_node_color(total, len(net.nodes)))}, relations={total}];")
    for r in net.edges:
        if r.kind is RelationKind.A_TO_B:
            lines.append(f"  {_dot_id(r.a)} -> {_dot_id(r.b)};")
        elif r.kind is RelationKind.B_TO_A:
            lines.append(f"  {_dot_id(r.b)} -> {_dot_id(r.a)};")
        elif r.kind is RelationKind.BIDIRECTIONAL:
            lines.append(f"  {_dot_id(r.a)} -> {_dot_id(r.b)} [dir=both];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_json(net: CausalNetwork, extra: Mapping | None = None) -> str:
    data = net.to_dict()
    if extra:
        data = {**extra, **data}
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def import_json(text: str) -> CausalNetwork:
    return CausalNetwork.from_dict(json.loads(text))


def counts_csv(net: CausalNetwork, comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["period", "node", "unidirectional_cause", "unidirectional_effect", "bidirectional"])
    for node, c in relation_counts(net).items():
        w.writerow([net.period.label, node, *c.as_tuple()])
    return buf.getvalue()


def granger_rows(net: CausalNetwork) -> list[list]:
    """One row per tested direction: period, metric, direction, lag, F, p, decision."""
    rows = []
    for r in net.edges:
        ab, ba = r.tests
        forward = r.kind in (RelationKind.A_TO_B, RelationKind.BIDIRECTIONAL)
        backward = r.kind in (RelationKind.B_TO_A, RelationKind.BIDIRECTIONAL)
        for t, sig in ((ab, forward), (ba, backward)):
            rows.append([net.period.label, net.metric, f"{t.cause}->{t.effect}", t.lag,
                         f"{t.f_statistic:.6g}", f"{t.p_value:.6g}", "reject" if sig else "accept"])
    return rows


GRANGER_HEADER = ["period", "metric", "direction", "lag", "F", "p", "decision"]
