"""Command-line surface: generate QA data, validate predictions, evaluate.

Defaults mirror the reference configuration (negatives 1:2, 40-token
windows, strategy parameters alpha=10/beta=20 or k=3, lambda=10, c=0.9),
so a bare invocation runs the standard pipeline.  Every output file gets a
sibling ``<name>.manifest.json`` recording parameters and content digests.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import __version__
from .core import RelationSchema, StrategyI, StrategyII, ValidationConfig, schema_from_labels
from .engine import (
    parse_updated_predictions,
    validate_dataset,
    write_updated_predictions,
)
from .errors import QavalError
from .evaluate import (
    collect_fact_predictions,
    compare_reports,
    count_gold_facts,
    metrics_report,
    parse_metrics_report,
    pr_curve,
    report_to_json,
    write_pr_curve,
)
from .ingest import parse_bags, parse_rc_predictions
from .manifest import build_manifest, write_manifest
from .samples import generate_qa_dataset, parse_qa_samples, write_qa_samples
from .scoring import RemoteSpec, SyntheticScorer, SyntheticSpec, facts_from_bags
from .synthetic import make_synthetic_dataset
from .wire import RemoteScorer


def load_schema(path: str | Path) -> RelationSchema:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return schema_from_labels([str(l) for l in obj["labels"]], str(obj["na"]))


def load_bags(path: str | Path, schema: RelationSchema):
    with open(path, "rb") as f:
        return parse_bags(f, schema)


def load_rc(path: str | Path, schema: RelationSchema):
    with open(path, "rb") as f:
        return parse_rc_predictions(f, schema)


def parse_scorer_flag(value: str):
    """"synthetic[:k=v,...]" or "remote:<endpoint>" into a scorer spec."""
    kind, _, rest = value.partition(":")
    if kind == "remote":
        if not rest:
            raise click.UsageError("remote scorer needs an endpoint: remote:host:port")
        return RemoteSpec(endpoint=rest)
    if kind == "synthetic":
        params = {}
        if rest:
            for item in rest.split(","):
                key, sep, val = item.partition("=")
                if not sep:
                    raise click.UsageError(f"bad synthetic scorer parameter {item!r}")
                params[key.strip()] = val.strip()
        unknown = set(params) - {"noise", "seed"}
        if unknown:
            raise click.UsageError(f"unknown synthetic scorer parameters: {sorted(unknown)}")
        try:
            return SyntheticSpec(noise=float(params.get("noise", 0.0)), seed=int(params.get("seed", 0)))
        except ValueError as exc:
            raise click.UsageError(f"bad synthetic scorer spec {value!r}: {exc}")
    raise click.UsageError(f"scorer must be synthetic[:...] or remote:<endpoint>, got {value!r}")


def build_scorer(spec, schema, bags):
    if isinstance(spec, RemoteSpec):
        return RemoteScorer(spec.endpoint)
    facts = spec.fact_table if spec.fact_table is not None else facts_from_bags(bags, schema)
    return SyntheticScorer(schema, facts, noise=spec.noise, seed=spec.seed)


@click.group()
@click.version_option(version=__version__, prog_name="qaval")
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool):
    """Validate relation-classification predictions with extractive QA."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _fail(exc: Exception) -> "click.ClickException":
    err = click.ClickException(str(exc))
    err.exit_code = 1
    return err


@main.command("gen-qa")
@click.option("--bags", "bags_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=True))
@click.option("--neg-per-pos", default=2, show_default=True, type=click.IntRange(min=0))
@click.option("--window", default=40, show_default=True, type=click.IntRange(min=0))
@click.option("--seed", default=0, show_default=True, type=int)
def cmd_gen_qa(bags_path, schema_path, out_path, neg_per_pos, window, seed):
    """Generate the QA sample file from gold-labelled bags."""
    try:
        schema = load_schema(schema_path)
        bags = load_bags(bags_path, schema)
        samples = generate_qa_dataset(bags, schema, neg_per_pos=neg_per_pos, window=window, seed=seed)
        with open(out_path, "w", encoding="utf-8", newline="\n") as f:
            write_qa_samples(samples, f)
        manifest = build_manifest(
            command="gen-qa",
            params={"neg_per_pos": neg_per_pos, "window": window, "seed": seed},
            inputs={"bags": bags_path, "schema": schema_path},
            outputs={"qa_samples": out_path},
        )
        write_manifest(manifest, out_path)
    except (QavalError, OSError, ValueError, KeyError) as exc:
        raise _fail(exc)
    n_pos = sum(s.answerable for s in samples)
    click.echo(f"wrote {len(samples)} samples ({n_pos} answerable) to {out_path}", err=True)


def _resolve(flag_value, config: dict, key: str, default):
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


@main.command("validate")
@click.option("--bags", "bags_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rc-scores", "rc_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=True))
@click.option("--scorer", "scorer_flag", default=None, help="synthetic[:noise=..,seed=..] or remote:<endpoint>")
@click.option("--strategy", type=click.Choice(["I", "II"]), default=None)
@click.option("--alpha", type=float, default=None, help="Strategy I: top percent to validate.")
@click.option("--beta", type=float, default=None, help="Strategy I: bottom percent to validate.")
@click.option("--k", type=int, default=None, help="Strategy II: classifier top-k to validate.")
@click.option("--lambda", "lambda_", type=float, default=None, help="QA weight in the fusion.")
@click.option("--c", "c_", type=float, default=None, help="Stand-in QA score for unvalidated relations.")
@click.option("--window", type=int, default=None)
@click.option("--parallelism", type=int, default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
def cmd_validate(
    bags_path, rc_path, schema_path, out_path, scorer_flag, strategy, alpha, beta, k,
    lambda_, c_, window, parallelism, config_path,
):
    """Update RC scores with QA validation (writes updated predictions)."""
    config_file = {}
    if config_path:
        config_file = json.loads(Path(config_path).read_text(encoding="utf-8"))
    strategy = _resolve(strategy, config_file, "strategy", "II")
    if strategy == "I":
        if k is not None:
            raise click.UsageError("--k is a strategy II parameter (strategy I takes --alpha/--beta)")
        strat = StrategyI(
            alpha_percent=_resolve(alpha, config_file, "alpha", 10.0),
            beta_percent=_resolve(beta, config_file, "beta", 20.0),
        )
    else:
        if alpha is not None or beta is not None:
            raise click.UsageError("--alpha/--beta are strategy I parameters (strategy II takes --k)")
        strat = StrategyII(k=_resolve(k, config_file, "k", 3))
    scorer_flag = _resolve(scorer_flag, config_file, "scorer", None)
    if scorer_flag is None:
        raise click.UsageError("--scorer is required (synthetic[:...] or remote:<endpoint>)")
    spec = parse_scorer_flag(scorer_flag)
    window = int(_resolve(window, config_file, "window", 40))
    parallelism = int(_resolve(parallelism, config_file, "parallelism", 1))
    try:
        vconfig = ValidationConfig(
            strategy=strat,
            qa_weight=float(_resolve(lambda_, config_file, "lambda", 10.0)),
            neutral_score=float(_resolve(c_, config_file, "c", 0.9)),
        )
        schema = load_schema(schema_path)
        vconfig.check_against_schema(schema)
        bags = load_bags(bags_path, schema)
        rc_preds = load_rc(rc_path, schema)
        scorer = build_scorer(spec, schema, bags)
        try:
            updated = validate_dataset(
                bags, rc_preds, scorer, vconfig, schema, window=window, parallelism=parallelism
            )
        finally:
            if isinstance(scorer, RemoteScorer):
                scorer.close()
        with open(out_path, "w", encoding="utf-8", newline="\n") as f:
            write_updated_predictions(updated, f)
        manifest = build_manifest(
            command="validate",
            params={
                "strategy": strategy,
                **(
                    {"alpha": strat.alpha_percent, "beta": strat.beta_percent}
                    if isinstance(strat, StrategyI)
                    else {"k": strat.k}
                ),
                "lambda": vconfig.qa_weight,
                "c": vconfig.neutral_score,
                "window": window,
                "scorer": scorer_flag,
            },
            inputs={"bags": bags_path, "rc_scores": rc_path, "schema": schema_path},
            outputs={"updated": out_path},
            deterministic=not isinstance(spec, RemoteSpec),
        )
        write_manifest(manifest, out_path)
    except (QavalError, OSError, ValueError, KeyError) as exc:
        raise _fail(exc)
    n_validated = sum(any(u.validated_mask) for u in updated)
    click.echo(f"validated {n_validated}/{len(updated)} bags -> {out_path}", err=True)


@main.command("eval")
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--bags", "bags_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--pn", default="100,200,300", show_default=True, help="Comma-separated Precision@N cutoffs.")
@click.option("--pr-out", "pr_out", required=True, type=click.Path(dir_okay=False, writable=True))
@click.option("--report-out", "report_out", type=click.Path(dir_okay=False, writable=True), default=None)
@click.option("--fig-out", "fig_out", type=click.Path(dir_okay=False, writable=True), default=None,
              help="PR figure path (default: <pr-out>.png; --no-fig disables).")
@click.option("--no-fig", is_flag=True, help="Skip rendering the PR figure.")
def cmd_eval(pred_path, bags_path, schema_path, pn, pr_out, report_out, fig_out, no_fig):
    """Evaluate a prediction file: metrics report to stdout, curve to file."""
    try:
        p_at_ns = [int(v) for v in pn.split(",") if v.strip()]
    except ValueError:
        raise click.UsageError(f"--pn must be comma-separated integers, got {pn!r}")
    if not p_at_ns or any(n < 1 for n in p_at_ns):
        raise click.UsageError("--pn cutoffs must be >= 1")
    try:
        schema = load_schema(schema_path)
        bags = load_bags(bags_path, schema)
        with open(pred_path, "rb") as f:
            preds = parse_updated_predictions(f)
        facts = collect_fact_predictions(preds, bags, schema)
        total_gold = count_gold_facts(bags, schema)
        report = metrics_report(facts, total_gold, p_at_ns)
        curve = pr_curve(facts, total_gold)
        with open(pr_out, "w", encoding="utf-8", newline="\n") as f:
            write_pr_curve(curve, f)
        outputs = {"pr_curve": pr_out}
        if report_out:
            Path(report_out).write_text(report_to_json(report), encoding="utf-8")
            outputs["report"] = report_out
        if not no_fig:
            from .report import render_pr_figure

            fig_path = fig_out or str(Path(pr_out).with_suffix(".png"))
            render_pr_figure([(Path(pred_path).stem, curve)], fig_path)
            outputs["figure"] = fig_path
        manifest = build_manifest(
            command="eval",
            params={"pn": p_at_ns},
            inputs={"pred": pred_path, "bags": bags_path, "schema": schema_path},
            outputs=outputs,
        )
        write_manifest(manifest, pr_out)
    except (QavalError, OSError, ValueError, KeyError) as exc:
        raise _fail(exc)
    click.echo(report_to_json(report), nl=False)


@main.command("compare")
@click.argument("before", type=click.Path(exists=True, dir_okay=False))
@click.argument("after", type=click.Path(exists=True, dir_okay=False))
def cmd_compare(before, after):
    """Delta report between two saved metrics reports (before vs after)."""
    try:
        rep_before = parse_metrics_report(Path(before).read_text(encoding="utf-8"))
        rep_after = parse_metrics_report(Path(after).read_text(encoding="utf-8"))
        delta = compare_reports(rep_before, rep_after)
    except (QavalError, OSError, ValueError, KeyError) as exc:
        raise _fail(exc)
    click.echo(json.dumps(delta.to_obj(), indent=2))


@main.command("check")
@click.option("--kind", type=click.Choice(["bags", "rc", "qa", "pred"]), required=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def cmd_check(kind, schema_path, path):
    """Schema-check a data file; exit 0 if every record is valid."""
    try:
        if kind in ("bags", "rc"):
            if schema_path is None:
                raise click.UsageError(f"--schema is required for --kind {kind}")
            schema = load_schema(schema_path)
        with open(path, "rb") as f:
            if kind == "bags":
                records = parse_bags(f, schema)
            elif kind == "rc":
                records = parse_rc_predictions(f, schema)
            elif kind == "qa":
                records = parse_qa_samples(f)
            else:
                records = parse_updated_predictions(f)
    except (QavalError, OSError, ValueError, KeyError) as exc:
        raise _fail(exc)
    click.echo(f"{path}: {len(records)} valid {kind} record(s)")


@main.command("synth")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--n-bags", default=500, show_default=True, type=click.IntRange(min=1))
@click.option("--n-relations", default=12, show_default=True, type=click.IntRange(min=2))
@click.option("--flip-rate", default=0.3, show_default=True, type=click.FloatRange(0.0, 1.0))
@click.option("--na-fraction", default=0.0, show_default=True, type=click.FloatRange(0.0, 1.0))
@click.option("--seed", default=0, show_default=True, type=int)
def cmd_synth(out_dir, n_bags, n_relations, flip_rate, na_fraction, seed):
    """Write a seeded synthetic dataset (schema, bags, RC scores) for demos."""
    from .ingest import write_bags, write_rc_predictions

    try:
        data = make_synthetic_dataset(
            n_bags, n_relations=n_relations, seed=seed, flip_rate=flip_rate, na_fraction=na_fraction
        )
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "schema.json").write_text(
            json.dumps({"labels": list(data.schema.labels), "na": data.schema.na_label}, indent=2)
            + "\n",
            encoding="utf-8",
        )
        with open(out / "bags.jsonl", "w", encoding="utf-8", newline="\n") as f:
            write_bags(data.bags, data.schema, f)
        with open(out / "rc.jsonl", "w", encoding="utf-8", newline="\n") as f:
            write_rc_predictions((data.rc_preds[b.bag_id] for b in data.bags), f)
        manifest = build_manifest(
            command="synth",
            params={
                "n_bags": n_bags,
                "n_relations": n_relations,
                "flip_rate": flip_rate,
                "na_fraction": na_fraction,
                "seed": seed,
            },
            inputs={},
            outputs={
                "schema": out / "schema.json",
                "bags": out / "bags.jsonl",
                "rc": out / "rc.jsonl",
            },
        )
        write_manifest(manifest, out / "bags.jsonl")
    except (QavalError, OSError, ValueError, KeyError) as exc:
        raise _fail(exc)
    click.echo(
        f"wrote {n_bags} bags ({len(data.flipped_bag_ids)} with flipped argmax) to {out_dir}",
        err=True,
    )


if __name__ == "__main__":
    main()
