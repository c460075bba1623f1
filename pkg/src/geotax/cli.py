"""Command-line surface.

Most analysis subcommands assemble a flat config and hand it to the
pipeline runner, so a CLI invocation and a config-file run produce
identical artifacts.  Exit codes: 0 ok, 2 config error, 3 data error,
4 network error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core.embedding import EmbeddingMatrix
from .core.io import load_matrix, write_embeddings
from .core.rng import SeedSpec, rng_create
from .core.sequence import DNA, SymbolSequence
from .dynamics import (
    GlobalRange,
    Trajectory,
    discretize,
    fit_global_range,
    gen_lorenz,
    gen_oscillator,
    gen_waveform,
    sample_oscillator_params,
)
from .errors import ConfigError, DataError, GeotaxError, NetworkError
from .ingest.cache import ResultCache
from .ingest.config import Config
from .ingest.fasta import FastaRecord, parse_fasta, write_fasta
from .perturb import PerturbationSpec, apply_perturbation
from .procrustes import frozen_head_classifier
from .mine.probes import mlp_probe_cv
from .ingest.fetch import FetchSpec, fetch_genome
from .report import rerun_from_provenance, run_pipeline

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NETWORK = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geotax", description=__doc__)
    parser.add_argument("--version", action="version", version=f"geotax {__version__}")
    parser.add_argument("--seed", type=int, default=320)
    parser.add_argument("--config", type=Path, help="flat key=value config file")
    parser.add_argument("--out-dir", type=Path, default=Path("geotax-run"))
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--cache-dir", type=Path, default=None)
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--csv-header", action="store_true",
                        help="CSV inputs carry one header line to skip")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate synthetic dynamical-system datasets")
    p.add_argument("--system", choices=("waveform", "oscillator", "lorenz"), required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--length", type=int, default=512)
    p.add_argument("--components", type=int, default=3)

    p = sub.add_parser("discretize", help="two-pass global discretization")
    p.add_argument("--input", type=Path, required=True, nargs="+")
    p.add_argument("--range", type=Path, dest="range_file")
    p.add_argument("--bins", type=int, default=256)

    p = sub.add_parser("perturb", help="apply a perturbation to a trajectory or sequence")
    p.add_argument("--input", type=Path)
    p.add_argument("--kind", choices=(
        "value_noise", "time_reverse", "reverse", "substitute", "reverse_complement"))
    p.add_argument("--rate", type=float, default=0.01)
    p.add_argument("--magnitude", type=float, default=1.0)
    p.add_argument("--output", type=Path)
    p.add_argument("--manifest", type=Path, help="CSV of input,kind,rate,seed rows")

    p = sub.add_parser("stability", help="run the stability harness")
    p.add_argument("--clean", type=Path, required=True)
    p.add_argument("--pert", action="append", required=True,
                   metavar="NAME=PATH", help="repeatable perturbed matrix")
    p.add_argument("--deltas", type=Path)
    p.add_argument("--splits", type=int, default=30)
    p.add_argument("--max-samples", type=int, default=2500)
    p.add_argument("--bootstrap", type=int, default=5)
    p.add_argument("--composite-variant", choices=("anchor", "perturbation"), default="anchor")

    p = sub.add_parser("procrustes", help="spin test: optimal rotation + scale")
    p.add_argument("--clean", type=Path, required=True)
    p.add_argument("--pert", type=Path, required=True)
    p.add_argument("--export-rotation", action="store_true")

    p = sub.add_parser("walk", help="build an interpolation or mutation walk")
    p.add_argument("--mode", choices=("mutation", "interpolation"), default="mutation")
    p.add_argument("--fasta", type=Path)
    p.add_argument("--n-mutations", type=int, default=120)
    p.add_argument("--length", type=int, default=2000)
    p.add_argument("--steps", type=int, default=101)

    p = sub.add_parser("lipschitz", help="per-step embedding displacement profile")
    p.add_argument("--embeddings", type=Path, required=True)
    p.add_argument("--metric", choices=("cosine", "l2"), default="cosine")

    p = sub.add_parser("mine", help="excess mutual information estimate")
    p.add_argument("--features", type=Path)
    p.add_argument("--features-fasta", type=Path,
                   help="extract compositional features from FASTA instead")
    p.add_argument("--feature-kind", choices=("dna", "protein"), default="dna")
    p.add_argument("--embeddings", type=Path, required=True)
    p.add_argument("--seeds", type=str, default=None)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--condition", type=str, default="model")

    p = sub.add_parser("mine-sanity", help="estimator check on known-MI Gaussians")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--seeds", type=str, default=None)

    p = sub.add_parser("texture", help="four-condition RC texture test")
    p.add_argument("--fasta", type=Path)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--length", type=int, default=400)
    p.add_argument("--splits", type=int, default=10)
    p.add_argument("--bootstrap", type=int, default=1)

    p = sub.add_parser("probe", help="frozen linear / MLP probes with stratified CV")
    p.add_argument("--embeddings", type=Path, required=True)
    p.add_argument("--labels", type=Path, required=True)
    p.add_argument("--arch", choices=("linear", "mlp", "mlp-wide"), default="linear")
    p.add_argument("--folds", type=int, default=5)

    p = sub.add_parser("fetch", help="fetch a genomic span (cached)")
    p.add_argument("--source", choices=("genome-rest", "synthetic"), default="genome-rest")
    p.add_argument("--assembly", default="hg38")
    p.add_argument("--chrom", default="chr22")
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--end", type=int, default=0)
    p.add_argument("--n-policy", choices=("reject", "replace"), default="reject")
    p.add_argument("--output", type=Path, required=True)

    p = sub.add_parser("report", help="run a config-declared experiment")
    p.add_argument("--rerun", type=Path, help="re-execute from a report's provenance")

    p = sub.add_parser("vq-sweep", help="codebook size sweep: reconstruction vs geometry")
    p.add_argument("--data", type=Path)
    p.add_argument("--k-values", type=str, default="32,64,128,256,512,1024")
    p.add_argument("--sigma", type=float, default=0.05)

    return parser


def _pipeline_config(args, experiment: str, extra: dict) -> Config:
    values = {
        "experiment": experiment,
        "seed": str(args.seed),
        "threads": str(args.threads),
        "io.csv_header": str(args.csv_header).lower(),
    }
    values.update({k: str(v) for k, v in extra.items() if v is not None})
    return Config(values, source="<cli>")


def _cmd_gen(args) -> int:
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    trajs: list[Trajectory] = []
    rng = rng_create(SeedSpec(args.seed, "gen"))
    for i in range(args.n):
        spec = SeedSpec(args.seed, f"gen/{i}")
        if args.system == "oscillator":
            trajs.append(gen_oscillator(sample_oscillator_params(rng), args.length))
        elif args.system == "waveform":
            trajs.append(gen_waveform(spec, args.components, args.length))
        else:
            trajs.append(gen_lorenz(spec, args.length))
    grange = fit_global_range(trajs)
    for i, traj in enumerate(trajs):
        write_embeddings(out / f"traj_{i:04d}.emb1", EmbeddingMatrix(traj.values))
    write_embeddings(
        out / "range.emb1", EmbeddingMatrix(np.vstack([grange.minimum, grange.maximum]))
    )
    meta = {
        "system": args.system,
        "n": args.n,
        "length": args.length,
        "seed": args.seed,
        "dt": trajs[0].dt,
    }
    (out / "meta.cfg").write_text("".join(f"{k} = {v}\n" for k, v in meta.items()))
    print(f"wrote {args.n} trajectories to {out}")
    return EXIT_OK


def _read_range(path: Path) -> GlobalRange:
    mat = load_matrix(path)
    if mat.n != 2:
        raise DataError(f"{path}: range file must hold exactly 2 rows (min, max)")
    return GlobalRange(mat.data[0], mat.data[1])


def _cmd_discretize(args) -> int:
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    if args.range_file:
        grange = _read_range(args.range_file)
    else:
        trajs = [Trajectory(load_matrix(p).data, 1.0) for p in args.input]
        grange = fit_global_range(trajs)
    for path in args.input:
        traj = Trajectory(load_matrix(path).data, 1.0)
        seq = discretize(traj, grange, args.bins)
        target = out / (Path(path).stem + ".sym.csv")
        target.write_text(",".join(str(s) for s in seq.symbols) + "\n")
    print(f"discretized {len(args.input)} file(s) into {out}")
    return EXIT_OK


def _perturb_one(input_path: Path, kind: str, rate: float, magnitude: float,
                 seed: int, output: Path) -> None:
    spec = PerturbationSpec(kind, rate, magnitude, SeedSpec(seed, f"perturb/{kind}"))
    if input_path.suffix in (".fa", ".fasta"):
        records = parse_fasta(input_path)
        out_records = []
        for rec in records:
            seq = SymbolSequence.from_string(rec.sequence.upper(), DNA)
            out_records.append(FastaRecord(rec.header, apply_perturbation(seq, spec).to_string()))
        write_fasta(out_records, output)
    else:
        traj = Trajectory(load_matrix(input_path).data, 1.0)
        result = apply_perturbation(traj, spec)
        write_embeddings(output, EmbeddingMatrix(result.values))


def _cmd_perturb(args) -> int:
    args.out_dir.mkdir(parents=True, exist_ok=True)
    if args.manifest:
        lines = args.manifest.read_text().strip().splitlines()
        for i, line in enumerate(lines):
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 4:
                raise ConfigError(f"{args.manifest}:{i + 1}: expected input,kind,rate,seed")
            path, kind, rate, seed = parts
            output = args.out_dir / f"{Path(path).stem}.{kind}.{i}{Path(path).suffix or '.emb1'}"
            _perturb_one(Path(path), kind, float(rate), args.magnitude, int(seed), output)
        print(f"applied {len(lines)} manifest rows into {args.out_dir}")
        return EXIT_OK
    if not (args.input and args.kind and args.output):
        raise ConfigError("perturb needs --input/--kind/--output or --manifest")
    _perturb_one(args.input, args.kind, args.rate, args.magnitude, args.seed, args.output)
    print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_stability(args) -> int:
    extra = {
        "stability.clean": args.clean,
        "stability.deltas": args.deltas,
        "stability.n_splits": args.splits,
        "stability.max_samples": args.max_samples,
        "stability.n_bootstrap": args.bootstrap,
        "stability.composite_variant": args.composite_variant,
    }
    for item in args.pert:
        if "=" not in item:
            raise ConfigError(f"--pert expects NAME=PATH, got {item!r}")
        name, path = item.split("=", 1)
        extra[f"stability.pert.{name}"] = path
    run_pipeline(_pipeline_config(args, "stability", extra), args.out_dir)
    print(f"stability report in {args.out_dir}")
    return EXIT_OK


def _cmd_procrustes(args) -> int:
    extra = {
        "procrustes.clean": args.clean,
        "procrustes.pert": args.pert,
        "procrustes.export_rotation": str(args.export_rotation).lower(),
    }
    run_pipeline(_pipeline_config(args, "procrustes", extra), args.out_dir)
    print(f"procrustes report in {args.out_dir}")
    return EXIT_OK


def _cmd_walk(args) -> int:
    extra = {
        "walk.mode": args.mode,
        "walk.fasta": args.fasta,
        "walk.n_mutations": args.n_mutations,
        "walk.length": args.length,
        "walk.n_steps": args.steps,
    }
    run_pipeline(_pipeline_config(args, "walk", extra), args.out_dir)
    print(f"walk written to {args.out_dir}")
    return EXIT_OK


def _cmd_lipschitz(args) -> int:
    extra = {"lipschitz.embeddings": args.embeddings, "lipschitz.metric": args.metric}
    run_pipeline(_pipeline_config(args, "lipschitz", extra), args.out_dir)
    print(f"profile in {args.out_dir}")
    return EXIT_OK


def _cmd_mine(args) -> int:
    if not args.features and not args.features_fasta:
        raise ConfigError("mine needs --features or --features-fasta")
    extra = {
        "mine.features": args.features,
        "mine.features_fasta": args.features_fasta,
        "mine.feature_kind": args.feature_kind,
        "mine.embeddings": args.embeddings,
        "mine.seeds": args.seeds,
        "mine.epochs": args.epochs,
        "mine.condition": args.condition,
    }
    run_pipeline(_pipeline_config(args, "mine", extra), args.out_dir)
    print(f"MI report in {args.out_dir}")
    return EXIT_OK


def _cmd_mine_sanity(args) -> int:
    extra = {"mine.n": args.n, "mine.seeds": args.seeds}
    run_pipeline(_pipeline_config(args, "mine-sanity", extra), args.out_dir)
    print(f"sanity report in {args.out_dir}")
    return EXIT_OK


def _cmd_texture(args) -> int:
    extra = {
        "texture.fasta": args.fasta,
        "texture.n": args.n,
        "texture.length": args.length,
        "stability.n_splits": args.splits,
        "stability.n_bootstrap": args.bootstrap,
    }
    run_pipeline(_pipeline_config(args, "texture", extra), args.out_dir)
    print(f"texture table in {args.out_dir}")
    return EXIT_OK


def _cmd_probe(args) -> int:
    emb = load_matrix(args.embeddings)
    labels = np.loadtxt(args.labels, delimiter=",", dtype=np.int64, ndmin=1)
    if args.arch == "linear":
        mean, std = frozen_head_classifier(emb, labels, args.folds, SeedSpec(args.seed, "probe"))
    else:
        mean, std = mlp_probe_cv(emb, labels, args.arch, args.folds, SeedSpec(args.seed, "probe"))
    if args.format == "csv":
        print("arch,folds,accuracy,std")
        print(f"{args.arch},{args.folds},{mean:.6f},{std:.6f}")
    else:
        print(json.dumps({"arch": args.arch, "folds": args.folds,
                          "accuracy": mean, "std": std}))
    return EXIT_OK


def _cmd_fetch(args) -> int:
    spec = FetchSpec(
        source=args.source,
        assembly=args.assembly,
        chromosome=args.chrom,
        start=args.start,
        end=args.end,
        n_policy=args.n_policy,
        seed=SeedSpec(args.seed, "fetch"),
    )
    cache = ResultCache(args.cache_dir) if args.cache_dir else ResultCache()
    seq = fetch_genome(spec, cache=cache)
    header = f"{args.assembly}:{args.chrom}:{args.start}-{args.end}" \
        if args.source == "genome-rest" else f"synthetic seed={args.seed}"
    write_fasta([FastaRecord(header, seq.to_string())], args.output)
    print(f"wrote {args.output} ({len(seq)} bases)")
    return EXIT_OK


def _cmd_report(args) -> int:
    if args.rerun:
        run_dir = rerun_from_provenance(args.rerun, args.out_dir)
    else:
        if not args.config:
            raise ConfigError("report needs --config or --rerun")
        run_dir = run_pipeline(args.config, args.out_dir)
    print(f"report in {run_dir}")
    return EXIT_OK


def _cmd_vq_sweep(args) -> int:
    extra = {"vq.data": args.data, "vq.k_values": args.k_values, "vq.sigma": args.sigma}
    run_pipeline(_pipeline_config(args, "vq-sweep", extra), args.out_dir)
    print(f"sweep in {args.out_dir}")
    return EXIT_OK


COMMANDS = {
    "gen": _cmd_gen,
    "discretize": _cmd_discretize,
    "perturb": _cmd_perturb,
    "stability": _cmd_stability,
    "procrustes": _cmd_procrustes,
    "walk": _cmd_walk,
    "lipschitz": _cmd_lipschitz,
    "mine": _cmd_mine,
    "mine-sanity": _cmd_mine_sanity,
    "texture": _cmd_texture,
    "probe": _cmd_probe,
    "fetch": _cmd_fetch,
    "report": _cmd_report,
    "vq-sweep": _cmd_vq_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NetworkError as exc:
        print(f"network error: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    except (DataError, GeotaxError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
