"""Serialization of reports: delimited text, JSON, and figures.

CSV column order for censuses is fixed (class, observed, predicted_num,
predicted_den, ratio, deviation) and floats are written with repr so output
is byte-stable across runs.  Exact integers are always emitted as JSON
integers, never floats.  Figures are rendered to files with matplotlib and
sit alongside the delimited output; they carry no new information.
"""

from __future__ import annotations

import io
import json
from fractions import Fraction
from typing import Optional

from .census import AverageRankSurvey, CensusReport, NormalOrderSurvey
from .construct import ConstructionCertificate


def _plt():
    # Deferred so that figure-free invocations never pay the import.
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def census_csv(report: CensusReport) -> str:
    out = io.StringIO()
    out.write("class,observed,predicted_num,predicted_den,ratio,deviation\n")
    for row in report.rows:
        pn = "" if row.predicted is None else row.predicted.numerator
        pd = "" if row.predicted is None else row.predicted.denominator
        out.write(f"{row.label},{row.observed},{pn},{pd},"
                  f"{_num(row.ratio)},{_num(row.deviation)}\n")
    return out.getvalue()


def _fraction_json(f: Optional[Fraction]):
    if f is None:
        return None
    return {"num": f.numerator, "den": f.denominator}


def census_json(report: CensusReport) -> dict:
    baseline_value = report.baseline_value
    if isinstance(baseline_value, float) and baseline_value.is_integer() \
            and report.baseline != "li-of-x":
        baseline_value = int(baseline_value)
    return {
        "label": report.label,
        "x": report.x,
        "baseline": {"kind": report.baseline, "value": baseline_value},
        "rows": [
            {
                "class": r.label,
                "observed": r.observed,
                "predicted": _fraction_json(r.predicted),
                "ratio": r.ratio,
                "deviation": r.deviation,
                "flag": r.flag,
            }
            for r in report.rows
        ],
        "notes": report.notes,
    }


def census_table(report: CensusReport) -> str:
    lines = [f"{report.label}  (x = {report.x}, baseline {report.baseline} "
             f"= {report.baseline_value})"]
    lines.append(f"{'class':<14}{'observed':>10}  {'predicted':>10}  "
                 f"{'ratio':>12}  {'deviation':>12}")
    for r in report.rows:
        pred = "-" if r.predicted is None else str(r.predicted)
        dev = "-" if r.deviation is None else f"{r.deviation:.6f}"
        flag = f"  [{r.flag}]" if r.flag else ""
        lines.append(f"{r.label:<14}{r.observed:>10}  {pred:>10}  "
                     f"{r.ratio:>12.8f}  {dev:>12}{flag}")
    for key, val in report.notes.items():
        if key != "members":
            lines.append(f"note {key}: {val}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------- surveys
def average_survey_json(s: AverageRankSurvey) -> dict:
    return {
        "q": s.q, "p": s.p, "x": s.x,
        "count": s.count, "sum_iq": s.sum_iq,
        "mean_iq": s.mean_iq, "median_iq": s.median_iq,
        "max_iq": s.max_iq, "argmax_d": s.argmax_d,
        "envelope": s.envelope, "envelope_flag": "observational",
        "samples": [[d, v] for d, v in s.samples],
    }


def average_survey_csv(s: AverageRankSurvey) -> str:
    out = io.StringIO()
    out.write("d,i_q\n")
    for d, v in s.samples:
        out.write(f"{d},{v}\n")
    return out.getvalue()


def average_survey_table(s: AverageRankSurvey) -> str:
    return (
        f"invariant survey q={s.q} over members <= {s.x}\n"
        f"count    {s.count}\n"
        f"mean     {s.mean_iq!r}\n"
        f"median   {s.median_iq!r}\n"
        f"max      {s.max_iq} at d = {s.argmax_d}\n"
        f"envelope {s.envelope!r} [observational]\n"
    )


def normal_survey_json(s: NormalOrderSurvey) -> dict:
    return {
        "p": s.p, "x": s.x, "sample_size": s.sample_size,
        "seed": s.seed, "exhaustive": s.exhaustive,
        "y": s.y, "l_bound": s.l_bound,
        "target": s.target, "tolerance": s.tolerance,
        "mean_h": s.mean_h, "median_h": s.median_h,
        "within_fraction": s.within_fraction,
        "flag": "observational",
        "samples": [
            {"d": t.d, "d_p": t.d_p, "ratio_log": t.ratio_log, "h_p": t.h_p}
            for t in s.samples
        ],
    }


def normal_survey_csv(s: NormalOrderSurvey) -> str:
    out = io.StringIO()
    out.write("d,d_p,ratio_log,h_p\n")
    for t in s.samples:
        out.write(f"{t.d},{t.d_p},{_num(t.ratio_log)},{_num(t.h_p)}\n")
    return out.getvalue()


def normal_survey_table(s: NormalOrderSurvey) -> str:
    return (
        f"order-statistic survey p={s.p}, x={s.x}, "
        f"{'exhaustive' if s.exhaustive else f'{s.sample_size} samples, seed {s.seed}'}\n"
        f"y        {s.y!r}\n"
        f"target   {s.target!r} (y log y / 3)  [observational]\n"
        f"mean h   {s.mean_h!r}\n"
        f"median h {s.median_h!r}\n"
        f"within   {s.within_fraction!r} of samples inside target +/- {s.tolerance!r}\n"
    )


# -------------------------------------------------------------- certificates
def certificate_json(c: ConstructionCertificate) -> dict:
    weak = c.weak_lower
    if isinstance(weak, Fraction):
        weak = int(weak) if weak.denominator == 1 else float(weak)
    return {
        "q": c.q,
        "d": c.d,
        "support": list(c.support),
        "m_y": c.m_y,
        "up_class": {
            "p": c.up_class.p, "d": c.up_class.d, "member": c.up_class.member,
            "k": c.up_class.k, "witness_exponent": c.up_class.witness_exponent,
            "rejection": c.up_class.rejection,
        },
        "order": c.order,
        "i_q": c.i_q,
        "rank_lower": c.rank_lower,
        "weak_lower": weak,
    }


def certificates_json(certs: list[ConstructionCertificate]) -> dict:
    return {"certificates": [certificate_json(c) for c in certs]}


def certificates_csv(certs: list[ConstructionCertificate]) -> str:
    out = io.StringIO()
    out.write("d,support,m_y,order,i_q,rank_lower,witness_exponent\n")
    for c in certs:
        support = ";".join(str(r) for r in c.support)
        out.write(f"{c.d},{support},{c.m_y},{c.order},{c.i_q},{c.rank_lower},"
                  f"{c.up_class.witness_exponent}\n")
    return out.getvalue()


def certificates_table(certs: list[ConstructionCertificate]) -> str:
    lines = [f"{'d':>12} {'support':<24} {'order':>8} {'i_q':>6} {'rank>=':>7}"]
    for c in certs:
        support = "*".join(str(r) for r in c.support) or "1"
        lines.append(f"{c.d:>12} {support:<24} {c.order:>8} {c.i_q:>6} "
                     f"{c.rank_lower:>7}")
    return "\n".join(lines) + "\n"


# -------------------------------------------------------------------- figures
def render_census_figure(report: CensusReport, path: str) -> None:
    """Bar chart of observed ratios with predicted-density markers."""
    plt = _plt()
    rows = report.rows
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = range(len(rows))
    ax.bar(xs, [r.ratio for r in rows], color="#4878a8", label="observed ratio")
    pred_x = [i for i, r in enumerate(rows) if r.predicted is not None]
    pred_y = [float(rows[i].predicted) for i in pred_x]
    if pred_x:
        ax.plot(pred_x, pred_y, "k_", markersize=22, label="predicted density")
    ax.set_xticks(list(xs))
    ax.set_xticklabels([r.label for r in rows], rotation=30, ha="right")
    ax.set_ylabel(f"share of baseline ({report.baseline})")
    ax.set_title(report.label + f", x = {report.x}")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_average_survey_figure(s: AverageRankSurvey, path: str) -> None:
    """Invariant scatter over the members, with the mean marked."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4))
    if s.samples:
        ax.scatter([d for d, _ in s.samples], [v for _, v in s.samples],
                   s=9, color="#4878a8", label="invariant")
    ax.axhline(s.mean_iq, color="#a85448", lw=1.2,
               label=f"mean = {s.mean_iq:.3f}")
    ax.set_xlabel("d")
    ax.set_ylabel("invariant")
    ax.set_title(f"invariant over members, q = {s.q}, x = {s.x}")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_normal_survey_figure(s: NormalOrderSurvey, path: str) -> None:
    """Histogram of the additive statistic with its normal-order target."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist([t.h_p for t in s.samples], bins=40, color="#4878a8")
    ax.axvline(s.target, color="#a85448", lw=1.2,
               label=f"target = {s.target:.3f}")
    ax.set_xlabel("h_p")
    ax.set_ylabel("samples")
    ax.set_title(f"order statistic, p = {s.p}, x = {s.x}")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_certificates_figure(certs: list[ConstructionCertificate],
                               path: str) -> None:
    """Invariant and certified lower bound per constructed d."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = range(len(certs))
    ax.bar(xs, [c.i_q for c in certs], color="#4878a8", label="invariant")
    ax.bar(xs, [c.rank_lower for c in certs], color="#a85448",
           width=0.45, label="certified rank lower bound")
    ax.set_xticks(list(xs))
    ax.set_xticklabels([str(c.d) for c in certs], rotation=30, ha="right")
    ax.set_xlabel("constructed d")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"
