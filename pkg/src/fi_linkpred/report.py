"""Markdown rendering of an evaluation report dict."""
from __future__ import annotations

from .similarity import METRICS, MetricId


def _fmt(v, nd=3):
    if v is None:
        return "undefined"
    if isinstance(v, float):
        return f"{v:.{nd}f}"
    return str(v)


def _hp(hp: dict) -> str:
    return ", ".join(f"{k}={v}" for k, v in hp.items())


def _table(header, rows) -> list[str]:
    out = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    out += ["| " + " | ".join(str(c) for c in r) + " |" for r in rows]
    return out


def render_markdown(report: dict) -> str:
    lines = ["# Feature-interaction link prediction report", ""]
    prov = report["provenance"]
    lines += [
        f"- master seed: `{report['seed']}`",
        f"- config digest: `{prov['config_digest']}`",
        f"- graph digest: `{prov['graph_digest'][:16]}`",
        f"- dataset: {report['dataset']['rows']} pairs "
        f"({report['dataset']['unwanted']} unwanted, {report['dataset']['wanted']} wanted)",
        f"- test rows: {len(report['split']['test_indices'])}, CV folds: {report['folds']['k']}",
        "- metric parameters: " + _hp(report["metric_params"]),
        "",
        "## Tuning (cross-validated accuracy on the training partition)",
        "",
    ]
    for fam, res in report["tuning"].items():
        lines.append(f"### {fam}")
        lines.append("")
        rows = []
        for point in res["grid"]:
            acc = point["cv_accuracy"]
            rows.append([_hp(point["hyperparameters"]) or "-", "infeasible" if acc is None else _fmt(acc)])
        lines += _table(["hyperparameters", "CV accuracy"], rows)
        best = res["best_spec"]["hyperparameters"]
        lines += ["", f"selected: {_hp(best)} (CV accuracy {_fmt(res['best_cv_accuracy'])})", ""]

    lines += ["## Test-set performance", ""]
    rows = [[fam, _fmt(m["accuracy"], 2), _fmt(m["sensitivity"], 2), _fmt(m["specificity"], 2),
             f"{m['tp']}/{m['fp']}/{m['tn']}/{m['fn']}"] for fam, m in report["test_metrics"].items()]
    lines += _table(["model", "accuracy", "sensitivity", "specificity", "tp/fp/tn/fn"], rows)
    lines.append("")

    lines += ["## Variable importance", ""]
    imp = report["importance"]
    header = ["metric"] + [f"{k} ({v['method']})" for k, v in imp.items()]
    rows = []
    for m in METRICS:
        rows.append([m.value] + [_fmt(v["scores"].get(m.value)) for v in imp.values()])
    lines += _table(header, rows)
    lines.append("")

    loo = report["loo"]
    shown = loo["metrics"]
    lines += ["## Leave-one-out detection", "",
              "Each unwanted edge is removed, the graph rescored, and the edge ranked among all non-edges. "
              "Cells give AUC (rank).", ""]
    rows = []
    for e in loo["per_edge"]:
        rows.append(["-".join(e["edge"])] + [f"{e['auc'][m]:.3f} ({e['rank'][m]})" for m in shown])
    lines += _table(["held-out edge"] + [MetricId(m).column for m in shown], rows)
    lines += ["", "Detections (held-out edge ranked first):", ""]
    lines += _table(["metric", "detected"], [[m, loo["detections"][m]] for m in shown])
    lines += ["", "---", "",
              f"Leave-one-out detection covers {len(shown)} metric(s), set by `loo_metrics` in the config; "
              "local_path is quasi-local and is grouped with the global metrics in comparisons.", ""]
    return "\n".join(lines)
