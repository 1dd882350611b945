"""Command-line front end.

Subcommands: ``cluster`` (run the pipeline and write a model file),
``eval`` (score a model against a labeled dataset), ``sample-size``
(print the sample-size formula result), ``bench`` (parameter sweeps and
baseline comparison). Configuration values resolve as command-line flags
over config-file entries over built-in defaults, and every report echoes
the full effective configuration so a run can be reproduced from its
report alone.
"""

import argparse
import dataclasses
import logging
import sys
import time

import numpy as np

from . import model_io, sampling
from .errors import ParseError, StageError
from .ingest import (DatasetSchema, apply_minmax, encode_categorical,
                     load_dataset, plan_partitions, read_records)
from .metrics import EvalReport, assign, confusion_accuracy, relative_speedup, \
    silhouette_width
from .pipeline import PipelineOptions, derive_rng, run_bigfcm
from .solvers import FcmParams, fcm_fast, initial_centers

__all__ = ["RunConfig", "build_parser", "load_config_file", "main"]

_DEFAULT_OUTPUT = "bigfcm-model.txt"


@dataclasses.dataclass
class RunConfig:
    """Fully resolved run configuration (defaults mirror the pipeline's)."""

    input: str = None
    clusters: int = 2
    intermediate_clusters: int = None
    fuzzifier: float = 2.0
    epsilon: float = 5.0e-7
    driver_epsilon: float = None
    max_iter: int = 1000
    partitions: int = 1
    parallelism: int = 1
    seed: int = 0
    sample_size: int = None
    alpha: float = 0.05
    rel_diff: float = 0.10
    normalize: bool = True
    label_column: int = None
    categorical: tuple = ()
    delimiter: str = ","
    header: bool = False
    output: str = None
    deterministic: bool = True
    force_flag: int = None  # pin the driver's solver choice (0 or 1)
    v_alpha_table: tuple = ()  # extra (alpha, v_alpha) pairs, config-file only

    def effective(self):
        """Flat echo of every field, floats in full precision."""
        out = {}
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if isinstance(value, float):
                out[field.name] = repr(value)
            elif field.name == "v_alpha_table":
                out[field.name] = ",".join(f"{a}:{v}" for a, v in value)
            elif isinstance(value, (tuple, list)):
                out[field.name] = ",".join(str(v) for v in value)
            else:
                out[field.name] = str(value)
        return out

    def alpha_table(self):
        table = dict(sampling.V_ALPHA_TABLE)
        table.update({a: v for a, v in self.v_alpha_table})
        return table

    def schema(self):
        return DatasetSchema(
            delimiter=self.delimiter,
            has_header=self.header,
            label_column=self.label_column,
            categorical_columns=self.categorical,
        )

    def params(self):
        return FcmParams(
            c=self.clusters,
            c_intermediate=self.intermediate_clusters,
            m=self.fuzzifier,
            epsilon=self.epsilon,
            max_iterations=self.max_iter,
            seed=self.seed,
        )


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _parse_bool(text):
    low = text.strip().lower()
    if low in _BOOL_TRUE:
        return True
    if low in _BOOL_FALSE:
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_int_list(text):
    text = text.strip()
    if not text:
        return ()
    return tuple(int(tok) for tok in text.split(","))


def _parse_alpha_table(text):
    """'0.01:2.5759,0.10:1.0' -> ((0.01, 2.5759), (0.10, 1.0))"""
    pairs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        alpha, sep, value = chunk.partition(":")
        if not sep:
            raise ValueError(f"expected alpha:value, got {chunk!r}")
        pairs.append((float(alpha), float(value)))
    return tuple(pairs)


_FIELD_PARSERS = {
    "input": str,
    "clusters": int,
    "intermediate_clusters": int,
    "fuzzifier": float,
    "epsilon": float,
    "driver_epsilon": float,
    "max_iter": int,
    "partitions": int,
    "parallelism": int,
    "seed": int,
    "sample_size": int,
    "alpha": float,
    "rel_diff": float,
    "normalize": _parse_bool,
    "label_column": int,
    "categorical": _parse_int_list,
    "delimiter": str,
    "header": _parse_bool,
    "output": str,
    "deterministic": _parse_bool,
    "force_flag": int,
    "v_alpha_table": _parse_alpha_table,
}


def load_config_file(path):
    """Parse a flat key=value config file; '#' starts a comment line."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(
                    f"{path}: line {line_no}: expected key=value, got {line!r}"
                )
            key = key.strip().replace("-", "_")
            if key not in _FIELD_PARSERS:
                raise ValueError(f"{path}: line {line_no}: unknown key {key!r}")
            values[key] = _FIELD_PARSERS[key](value.strip())
    return values


def _resolve_config(args):
    """Defaults, then config file, then explicit command-line flags."""
    merged = {}
    if getattr(args, "config", None):
        merged.update(load_config_file(args.config))
    for name in _FIELD_PARSERS:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            merged[name] = flag_value
    return RunConfig(**merged)


def _add_schema_flags(parser):
    parser.add_argument("--delimiter", help="field delimiter (default ,)")
    parser.add_argument("--header", action="store_const", const=True,
                        default=None, help="skip the first line")
    parser.add_argument("--label-column", type=int, dest="label_column",
                        help="0-based label column, excluded from features")
    parser.add_argument("--categorical", type=_parse_int_list,
                        help="comma-separated 0-based categorical columns")


def _add_cluster_flags(parser):
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--input", help="input dataset path")
    parser.add_argument("--clusters", type=int, help="final cluster count c")
    parser.add_argument("--intermediate-clusters", type=int,
                        dest="intermediate_clusters",
                        help="per-partition cluster count (default: c)")
    parser.add_argument("--fuzzifier", type=float, help="fuzziness m > 1")
    parser.add_argument("--epsilon", type=float,
                        help="reducer/combiner convergence threshold")
    parser.add_argument("--driver-epsilon", type=float, dest="driver_epsilon",
                        help="driver threshold (default: epsilon / 100)")
    parser.add_argument("--max-iter", type=int, dest="max_iter")
    parser.add_argument("--partitions", type=int)
    parser.add_argument("--parallelism", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--sample-size", type=int, dest="sample_size",
                        help="explicit driver sample size")
    parser.add_argument("--alpha", type=float,
                        help="confidence level for the sample-size formula")
    parser.add_argument("--rel-diff", type=float, dest="rel_diff",
                        help="relative difference r for the sample-size formula")
    parser.add_argument("--normalize", action="store_const", const=True,
                        default=None, dest="normalize")
    parser.add_argument("--no-normalize", action="store_const", const=False,
                        dest="normalize")
    parser.add_argument("--deterministic", action="store_const", const=True,
                        default=None, dest="deterministic",
                        help="pool combiner outputs in partition order (default)")
    parser.add_argument("--free-order", action="store_const", const=False,
                        dest="deterministic",
                        help="pool combiner outputs in completion order")
    parser.add_argument("--force-flag", type=int, choices=(0, 1),
                        dest="force_flag",
                        help="pin the combiner solver instead of timing "
                             "(1 = plain FCM, 0 = block-progressive)")
    _add_schema_flags(parser)
    parser.add_argument("--output", help="output path")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bigfcm",
        description="Scalable fuzzy c-means: cluster, evaluate, benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cluster = sub.add_parser("cluster", help="run the pipeline, write a model")
    _add_cluster_flags(p_cluster)

    p_eval = sub.add_parser("eval", help="evaluate a model on labeled data")
    p_eval.add_argument("--model", required=True, help="model file path")
    p_eval.add_argument("--input", help="labeled dataset path")
    p_eval.add_argument("--config", help="flat key=value config file")
    p_eval.add_argument("--seed", type=int, help="silhouette sampling seed")
    p_eval.add_argument("--silhouette-cap", type=int, dest="silhouette_cap",
                        default=4000, help="max points scored (default 4000)")
    _add_schema_flags(p_eval)
    p_eval.add_argument("--output", help="write the report here too")

    p_size = sub.add_parser("sample-size", help="print the sample-size formula")
    p_size.add_argument("--config", help="config file (can extend the v(alpha) table)")
    p_size.add_argument("--alpha", type=float, default=0.05)
    p_size.add_argument("--clusters", type=int)
    p_size.add_argument("--rel-diff", type=float, dest="rel_diff",
                        help="relative difference r (cluster-count formula)")
    p_size.add_argument("--abs-diff", type=float, dest="abs_diff",
                        help="absolute difference d (proportion formula)")

    p_bench = sub.add_parser("bench", help="sweeps and baseline comparison")
    _add_cluster_flags(p_bench)
    p_bench.add_argument("--mode", required=True,
                         choices=["epsilon-sweep", "size-sweep",
                                  "partition-sweep", "baseline-compare"])
    p_bench.add_argument("--epsilons", help="comma-separated epsilon values")
    p_bench.add_argument("--sizes", help="comma-separated record counts")
    p_bench.add_argument("--partition-list", dest="partition_list",
                         help="comma-separated partition counts")
    p_bench.add_argument("--budget", type=float,
                         help="wall-clock budget in seconds")
    return parser


def _echo_lines(config_echo, prefix=""):
    return [f"{prefix}{key} = {config_echo[key]}" for key in sorted(config_echo)]


def _print_report(lines, output):
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _sample_size_from(config):
    if config.sample_size is not None:
        return config.sample_size
    spec = sampling.SampleSpec.resolve(config.alpha, config.clusters,
                                       config.rel_diff, config.alpha_table())
    return spec.resolved_size


def _ingest(config):
    if config.input is None:
        raise ValueError("an input dataset is required (--input)")
    try:
        return load_dataset(config.input, config.schema(),
                            normalize=config.normalize)
    except FileNotFoundError:
        raise ValueError(f"input path not found: {config.input}") from None


def cmd_cluster(config):
    """Ingest, run the pipeline, write model file + ingest sidecar."""
    try:
        ingested = _ingest(config)
    except (ParseError, ValueError, OSError) as exc:
        print(f"error: ingest: {exc}", file=sys.stderr)
        return 1
    try:
        params = config.params()
        plan = plan_partitions(ingested.features.shape[0], config.partitions)
        options = PipelineOptions(
            driver_epsilon=config.driver_epsilon,
            sample_size=_sample_size_from(config),
            deterministic=config.deterministic,
            force_flag=config.force_flag,
        )
        model = run_bigfcm(ingested.features, params,
                           parallelism=config.parallelism,
                           partition_plan=plan, options=options)
    except StageError as exc:
        print(f"error: pipeline: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 1
    output = config.output or _DEFAULT_OUTPUT
    stage_fields = dataclasses.asdict(model.stage_report)
    try:
        model_io.write_model(output, model.final_centers, model.final_weights,
                             model.objective, stage_fields, config.effective())
        model_io.write_sidecar(output, ingested.norm_stats,
                               ingested.categorical_maps, config.schema())
    except OSError as exc:
        print(f"error: output: {exc}", file=sys.stderr)
        return 1
    report = model.stage_report
    print(f"model written: {output}")
    print(f"flag={report.flag} partitions={report.partition_count} "
          f"sample={report.sample_size} total_ms={report.total_ms:.1f} "
          f"objective={model.objective!r}")
    return 0


def _schema_for_eval(args, sidecar):
    stored = (sidecar or {}).get("schema", {})
    delimiter = args.delimiter or stored.get("delimiter", ",")
    header = args.header if args.header is not None else stored.get("has_header", False)
    label = args.label_column if args.label_column is not None \
        else stored.get("label_column")
    categorical = args.categorical if args.categorical is not None \
        else tuple(stored.get("categorical_columns", ()))
    return DatasetSchema(delimiter=delimiter, has_header=header,
                         label_column=label, categorical_columns=categorical)


def cmd_eval(args):
    """Score a model file against a labeled dataset."""
    try:
        model = model_io.read_model(args.model)
    except (OSError, ValueError) as exc:
        print(f"error: model: {exc}", file=sys.stderr)
        return 1
    sidecar = model_io.read_sidecar(args.model)
    input_path = args.input or model["config"].get("input")
    t_eval0 = time.perf_counter()
    try:
        if input_path is None:
            raise ValueError("a labeled dataset is required (--input)")
        schema = _schema_for_eval(args, sidecar)
        if schema.label_column is None:
            raise ValueError("label column required for evaluation "
                             "(--label-column)")
        try:
            pairs = list(read_records(input_path, schema))
        except FileNotFoundError:
            raise ValueError(f"input path not found: {input_path}") from None
        rows = [fields for fields, _ in pairs]
        labels = [label for _, label in pairs]
        maps = dict((sidecar or {}).get("categorical_maps") or {})
        features, _ = encode_categorical(rows, maps or None)
        stats = (sidecar or {}).get("norm_stats")
        if stats is not None:
            features = apply_minmax(features, stats)
        centers = model["centers"]
        if features.shape[1] != centers.shape[1]:
            raise ValueError(
                f"dimension mismatch: model has d={centers.shape[1]}, "
                f"data has d={features.shape[1]}"
            )
    except (ParseError, ValueError) as exc:
        print(f"error: eval: {exc}", file=sys.stderr)
        return 1

    fuzzifier = float(model["config"].get("fuzzifier", 2.0))
    seed = args.seed if args.seed is not None \
        else int(model["config"].get("seed", 0))
    assignments = assign(features, centers, m=fuzzifier)
    accuracy, mapping = confusion_accuracy(assignments, labels)
    cap = args.silhouette_cap
    try:
        silhouette = silhouette_width(features, assignments,
                                      sample_cap=cap, seed=seed)
        silhouette_n = min(len(features), cap)
    except Exception:
        silhouette = float("nan")
        silhouette_n = 0
    eval_ms = (time.perf_counter() - t_eval0) * 1e3
    runtimes = {"eval_ms": eval_ms}
    for key in ("sample_ms", "driver_ms", "combine_ms", "reduce_ms", "total_ms"):
        if key in model["stages"]:
            runtimes[f"model_{key}"] = float(model["stages"][key])
    report = EvalReport(
        accuracy=accuracy, mapping=mapping, silhouette=silhouette,
        silhouette_sample_size=silhouette_n, runtimes=runtimes,
    )

    mapping_text = ", ".join(
        f"{cluster} -> {label}" for cluster, label in sorted(report.mapping.items())
    )
    lines = ["[metrics]"]
    lines.append(f"accuracy   = {report.accuracy:.6f}")
    lines.append(f"mapping    = {mapping_text}")
    lines.append(f"silhouette = {report.silhouette:.6f} "
                 f"(sample {report.silhouette_sample_size})")
    for key in sorted(report.runtimes):
        lines.append(f"{key} = {report.runtimes[key]:.3f}")
    lines.append("")
    lines.append("[config]")
    lines.extend(_echo_lines(model["config"]))
    _print_report(lines, args.output)
    return 0


def cmd_sample_size(args):
    """Print the sample size and the formula instantiation behind it."""
    table = dict(sampling.V_ALPHA_TABLE)
    if getattr(args, "config", None):
        extra = load_config_file(args.config).get("v_alpha_table", ())
        table.update({a: v for a, v in extra})
    alpha = args.alpha
    if alpha not in table:
        supported = ", ".join(str(a) for a in sorted(table))
        print(f"error: no tabulated critical value for alpha={alpha}; "
              f"supported: {supported}", file=sys.stderr)
        return 1
    v_alpha = table[alpha]
    try:
        if args.abs_diff is not None:
            lam = sampling.thompson_size(alpha, args.abs_diff, table)
            print(f"lambda = ceil({v_alpha} / {args.abs_diff}^2) = {lam}")
        else:
            if args.clusters is None:
                print("error: --clusters is required with --rel-diff",
                      file=sys.stderr)
                return 1
            r = args.rel_diff if args.rel_diff is not None else 0.10
            lam = sampling.parker_hall_size(v_alpha, args.clusters, r)
            print(f"lambda = ceil({v_alpha} * {args.clusters}^2 / {r}^2) = {lam}")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _bench_total_iterations(model):
    report = model.stage_report
    return (sum(report.combiner_iterations)
            + sum(report.intermediate_reducer_iterations)
            + report.reducer_iterations)


def cmd_bench(config, args):
    """Run one sweep mode and print a tab-separated table."""
    try:
        ingested = _ingest(config)
    except (ParseError, ValueError, OSError) as exc:
        print(f"error: ingest: {exc}", file=sys.stderr)
        return 1
    features = ingested.features
    n = features.shape[0]
    start = time.perf_counter()

    def out_of_budget():
        return args.budget is not None and \
            (time.perf_counter() - start) > args.budget

    def one_run(points, params, partitions, sample_size):
        plan = plan_partitions(points.shape[0], partitions)
        options = PipelineOptions(
            driver_epsilon=config.driver_epsilon,
            sample_size=sample_size,
            deterministic=config.deterministic,
            force_flag=config.force_flag,
        )
        t0 = time.perf_counter()
        model = run_bigfcm(points, params, parallelism=config.parallelism,
                           partition_plan=plan, options=options)
        wall_ms = (time.perf_counter() - t0) * 1e3
        return wall_ms, model

    rows = []
    incomplete = False
    speedup_line = None
    sample_size = _sample_size_from(config)
    try:
        if args.mode == "epsilon-sweep":
            if args.epsilons:
                values = [float(tok) for tok in args.epsilons.split(",")]
            else:
                values = [5e-2, 5e-3, 5e-5, 5e-7]
            for eps in values:
                if out_of_budget():
                    incomplete = True
                    break
                params = dataclasses.replace(config.params(), epsilon=eps)
                wall_ms, model = one_run(features, params, config.partitions,
                                         sample_size)
                rows.append((f"{eps:g}", wall_ms,
                             _bench_total_iterations(model), model.objective))
        elif args.mode == "size-sweep":
            if args.sizes:
                values = [int(tok) for tok in args.sizes.split(",")]
            else:
                values = [max(1, n // 8), max(1, n // 4), max(1, n // 2), n]
            for size in values:
                if out_of_budget():
                    incomplete = True
                    break
                subset = features[:size]
                wall_ms, model = one_run(subset, config.params(),
                                         config.partitions,
                                         min(sample_size, size))
                rows.append((str(size), wall_ms,
                             _bench_total_iterations(model), model.objective))
        elif args.mode == "partition-sweep":
            if args.partition_list:
                values = [int(tok) for tok in args.partition_list.split(",")]
            else:
                values = [1, 2, 4, 8]
            base_parallelism = config.parallelism
            for partitions in values:
                if out_of_budget():
                    incomplete = True
                    break
                config.parallelism = max(base_parallelism, partitions)
                wall_ms, model = one_run(features, config.params(), partitions,
                                         sample_size)
                rows.append((str(partitions), wall_ms,
                             _bench_total_iterations(model), model.objective))
            config.parallelism = base_parallelism
        else:  # baseline-compare
            wall_ms, model = one_run(features, config.params(),
                                     config.partitions, sample_size)
            rows.append(("bigfcm", wall_ms,
                         _bench_total_iterations(model), model.objective))
            if out_of_budget():
                incomplete = True
            else:
                params = config.params()
                init = initial_centers(features, params.c,
                                       derive_rng(params.seed, "baseline.init"))
                t0 = time.perf_counter()
                baseline = fcm_fast(features, init, params)
                base_ms = (time.perf_counter() - t0) * 1e3
                rows.append(("fcm_fast", base_ms, baseline.iterations,
                             baseline.objective))
                speedup_line = (
                    f"# relative_speedup = "
                    f"{relative_speedup(base_ms, wall_ms):.3f}"
                )
    except KeyboardInterrupt:
        incomplete = True
    except (StageError, ValueError) as exc:
        print(f"error: bench: {exc}", file=sys.stderr)
        return 1

    lines = [f"# bench mode={args.mode} records={n}"]
    lines.extend(_echo_lines(config.effective(), prefix="# "))
    lines.append("value\twall_ms\titerations\tobjective")
    for value, wall_ms, iterations, objective in rows:
        lines.append(f"{value}\t{wall_ms:.3f}\t{iterations}\t{objective!r}")
    if speedup_line:
        lines.append(speedup_line)
    if incomplete:
        lines.append("# incomplete: time budget exceeded")
    _print_report(lines, config.output)
    return 1 if incomplete else 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    package_logger = logging.getLogger("bigfcm")
    package_logger.addHandler(handler)
    package_logger.setLevel(logging.INFO)

    try:
        if args.command == "cluster":
            config = _resolve_config(args)
            return cmd_cluster(config)
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "sample-size":
            return cmd_sample_size(args)
        if args.command == "bench":
            config = _resolve_config(args)
            return cmd_bench(config, args)
        parser.error(f"unknown command {args.command!r}")
    except KeyboardInterrupt:
        print("aborted by signal; report may be incomplete", file=sys.stderr)
        return 130
    except ValueError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 1
    finally:
        package_logger.removeHandler(handler)
    return 0


if __name__ == "__main__":
    sys.exit(main())
