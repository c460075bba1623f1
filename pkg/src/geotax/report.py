"""Experiment pipeline: config-driven runs with reproducible reports.

A run directory holds ``report.json`` (results + provenance), a CSV view,
and SVG plots where applicable.  Provenance embeds the exact config text,
seeds, and tool version; ``rerun_from_provenance`` re-executes a report
from that block and must reproduce it byte for byte.  Reports carry no
timestamps for exactly that reason.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import __version__
from .core.io import load_matrix, write_embeddings
from .core.embedding import EmbeddingMatrix
from .core.rng import SeedSpec
from .core.sequence import DNA, SymbolSequence
from .dynamics import fit_global_range, gen_lorenz, gen_oscillator, sample_oscillator_params
from .core.rng import rng_create
from .errors import ConfigError
from .ingest.config import Config
from .ingest.fasta import FastaRecord, parse_fasta, write_fasta
from .mine.estimator import DEFAULT_SEEDS, excess_mi_report, sanity_suite
from .mine.features import features_from_fasta
from .mine.mlp import MLPConfig
from .procrustes import classify_regime, procrustes_align
from .quantize import vq_double_bind_sweep
from .stability import SplitConfig, evaluate
from .texture import four_condition_experiment, heterogeneous_corpus
from .walks import (
    build_interpolation_walk,
    build_mutation_walk,
    lipschitz_cosine,
    lipschitz_l2,
    pca_trajectory,
)

STABILITY_CSV_HEADER = "Perturbation,RDM Sim.,Pert. Stab.,Pert. Mag.,Composite"


def dump_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _split_config(cfg: Config) -> SplitConfig:
    return SplitConfig(
        n_splits=cfg.get_int("stability.n_splits", 30),
        max_samples=cfg.get_int("stability.max_samples", 2500),
        n_bootstrap=cfg.get_int("stability.n_bootstrap", 5),
        anchor_count=cfg.get_int("stability.anchor_count", None),
        rank_normalize_anchors=cfg.get_bool("stability.rank_normalize_anchors", False),
        composite_variant=cfg.get("stability.composite_variant", "anchor"),
    )


def _provenance(cfg: Config, seed: int) -> dict:
    return {
        "version": __version__,
        "seed": seed,
        "config_echo": cfg.dump(),
    }


def _loader(cfg: Config):
    header = cfg.get_bool("io.csv_header", False)
    return lambda path: load_matrix(path, csv_header=header)


def run_pipeline(config: Config | str | Path, out_dir: str | Path) -> Path:
    """Execute the experiment a config declares; returns the run directory."""
    cfg = config if isinstance(config, Config) else Config.load(config)
    experiment = cfg.require("experiment")
    seed = cfg.get_int("seed", 320)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runners = {
        "stability": _run_stability,
        "procrustes": _run_procrustes,
        "walk": _run_walk,
        "lipschitz": _run_lipschitz,
        "mine": _run_mine,
        "mine-sanity": _run_mine_sanity,
        "texture": _run_texture,
        "vq-sweep": _run_vq_sweep,
    }
    if experiment not in runners:
        raise ConfigError(
            f"{cfg.source}: unknown experiment {experiment!r}; choose from {sorted(runners)}"
        )
    results = runners[experiment](cfg, seed, out)
    report = {
        "experiment": experiment,
        "results": results,
        "provenance": _provenance(cfg, seed),
    }
    dump_json(report, out / "report.json")
    return out


def rerun_from_provenance(report_path: str | Path, out_dir: str | Path) -> Path:
    """Re-execute a run from its embedded provenance block."""
    report = json.loads(Path(report_path).read_text())
    echo = report["provenance"]["config_echo"]
    cfg = Config.parse(echo, source=f"{report_path}#provenance")
    return run_pipeline(cfg, out_dir)


# -- experiment runners -------------------------------------------------------


def _run_stability(cfg: Config, seed: int, out: Path) -> dict:
    load = _loader(cfg)
    clean = load(cfg.require("stability.clean"))
    pairs = cfg.section("stability.pert")
    if not pairs:
        raise ConfigError(f"{cfg.source}: no stability.pert.<name> entries")
    scfg = _split_config(cfg)
    deltas_path = cfg.get("stability.deltas")
    deltas = None
    if deltas_path:
        deltas = np.loadtxt(deltas_path, delimiter=",", ndmin=1)
    rows = {}
    ndjson_lines = []
    csv_lines = [STABILITY_CSV_HEADER]
    for name in sorted(pairs):
        pert = load(pairs[name])
        report = evaluate(clean, pert, deltas, scfg, SeedSpec(seed, f"stability/{name}"))
        rows[name] = report.to_dict()
        ndjson_lines.append(json.dumps({"perturbation": name, **report.to_dict()}, sort_keys=True))
        m = report.metrics
        csv_lines.append(
            f"{name},{m['rdm_similarity']:.6f},"
            f"{m.get('perturbation_stability', float('nan')):.6f},"
            f"{m['perturbation_magnitude']:.6f},{report.composite:.6f}"
        )
    (out / "report.ndjson").write_text("\n".join(ndjson_lines) + "\n")
    (out / "report.csv").write_text("\n".join(csv_lines) + "\n")
    return rows


def _run_procrustes(cfg: Config, seed: int, out: Path) -> dict:
    load = _loader(cfg)
    clean = load(cfg.require("procrustes.clean"))
    pert = load(cfg.require("procrustes.pert"))
    res = procrustes_align(clean, pert)
    regime = classify_regime(res)
    if cfg.get_bool("procrustes.export_rotation", False):
        write_embeddings(out / "rotation.emb1", EmbeddingMatrix(res.rotation))
    return {
        "raw_error": res.raw_error,
        "aligned_error": res.aligned_error,
        "ratio": res.ratio,
        "reduction_percent": res.reduction_percent,
        "scale": res.scale,
        "exact_match": res.exact_match,
        "regime": regime.label,
    }


def _serialize_walk(walk, out: Path) -> None:
    if walk.kind == "interpolation":
        # discretized continuous steps travel as an EMB1 matrix + alpha list
        from .walks import walk_to_matrix

        write_embeddings(out / "walk.emb1", walk_to_matrix(walk))
        lines = ["step,alpha"] + [f"{i},{a:.6f}" for i, a in enumerate(walk.step_meta)]
        (out / "walk_steps.csv").write_text("\n".join(lines) + "\n")
        return
    records = []
    for i, (step, meta) in enumerate(zip(walk.steps, walk.step_meta)):
        header = f"step={i} pos={-1 if meta is None else meta}"
        if walk.landmark_index == i:
            header += " landmark=1"
        records.append(FastaRecord(header, step.to_string()))
    write_fasta(records, out / "walk.fasta", width=80)


def _run_walk(cfg: Config, seed: int, out: Path) -> dict:
    mode = cfg.get("walk.mode", "mutation")
    if mode == "mutation":
        fasta = cfg.get("walk.fasta")
        if fasta:
            wt = SymbolSequence.from_string(parse_fasta(fasta)[0].sequence.upper(), DNA)
        else:
            length = cfg.get_int("walk.length", 2000)
            wt = SymbolSequence(
                rng_create(SeedSpec(seed, "walk-wt")).integers(0, 4, size=length), DNA
            )
        core = (
            cfg.get_int("walk.core_start", len(wt) // 4),
            cfg.get_int("walk.core_end", 3 * len(wt) // 4),
        )
        walk = build_mutation_walk(
            wt,
            cfg.get_int("walk.n_mutations", 120),
            core,
            SeedSpec(seed, "walk"),
        )
        result = {
            "mode": mode,
            "steps": len(walk),
            "landmark_index": walk.landmark_index,
        }
    elif mode == "interpolation":
        rng = rng_create(SeedSpec(seed, "walk-interp"))
        ta = gen_oscillator(sample_oscillator_params(rng))
        tb = gen_oscillator(sample_oscillator_params(rng))
        grange = fit_global_range([ta, tb])
        walk = build_interpolation_walk(
            ta, tb, grange, cfg.get_int("walk.n_steps", 101)
        )
        result = {"mode": mode, "steps": len(walk)}
    else:
        raise ConfigError(f"{cfg.source}: walk.mode must be mutation or interpolation")
    _serialize_walk(walk, out)
    return result


def _run_lipschitz(cfg: Config, seed: int, out: Path) -> dict:
    emb = _loader(cfg)(cfg.require("lipschitz.embeddings"))
    metric = cfg.get("lipschitz.metric", "cosine")
    if metric == "cosine":
        profile = lipschitz_cosine(emb)
    elif metric == "l2":
        profile = lipschitz_l2(emb)
    else:
        raise ConfigError(f"{cfg.source}: lipschitz.metric must be cosine or l2")
    lines = ["step,L"] + [f"{i},{v:.10g}" for i, v in enumerate(profile.values)]
    (out / "profile.csv").write_text("\n".join(lines) + "\n")
    pca_res, svg = pca_trajectory(emb, k=min(3, emb.d, emb.n))
    (out / "trajectory.svg").write_text(svg)
    return {
        "metric": metric,
        "mean": profile.mean,
        "max": profile.max,
        "smoothness_ratio": profile.smoothness_ratio,
        "spikes": list(profile.spikes),
        "pca_explained": [float(v) for v in pca_res.explained_variance_ratio],
    }


def _run_mine(cfg: Config, seed: int, out: Path) -> dict:
    load = _loader(cfg)
    fasta = cfg.get("mine.features_fasta")
    if fasta:
        x = features_from_fasta(fasta, cfg.get("mine.feature_kind", "dna"))
    else:
        x = load(cfg.require("mine.features")).data
    z = load(cfg.require("mine.embeddings")).data
    seeds = _parse_seeds(cfg.get("mine.seeds"))
    mlp_cfg = MLPConfig(
        epochs=cfg.get_int("mine.epochs", 500),
        lr=cfg.get_float("mine.lr", 1e-4),
    )
    est = excess_mi_report(
        x, z, mlp_cfg, seeds, workers=cfg.get_int("threads", 1)
    )
    condition = cfg.get("mine.condition", "model")
    (out / "report.csv").write_text(
        "condition,length,mean,std,baseline,ceiling,excess\n"
        f"{condition},{x.shape[0]},{est.mean:.6f},{est.std:.6f},"
        f"{est.baseline:.6f},{est.ceiling:.6f},{est.excess:.6f}\n"
    )
    payload = est.to_dict()
    payload["traces"] = {str(r.seed): [list(p) for p in r.trace] for r in est.runs}
    return payload


def _run_mine_sanity(cfg: Config, seed: int, out: Path) -> dict:
    seeds = _parse_seeds(cfg.get("mine.seeds"))
    cases = sanity_suite(
        n=cfg.get_int("mine.n", 2000),
        seeds=seeds,
        data_seed=seed,
        workers=cfg.get_int("threads", 1),
    )
    csv_lines = ["rho,true_mi,estimate,std,tolerance,passed"]
    for c in cases:
        csv_lines.append(
            f"{c.rho},{c.true_mi:.6f},{c.estimate:.6f},{c.std:.6f},{c.tolerance:.6f},{int(c.passed)}"
        )
    (out / "report.csv").write_text("\n".join(csv_lines) + "\n")
    return {
        "cases": [
            {
                "rho": c.rho,
                "true_mi": c.true_mi,
                "estimate": c.estimate,
                "std": c.std,
                "tolerance": c.tolerance,
                "passed": c.passed,
            }
            for c in cases
        ],
        "all_passed": all(c.passed for c in cases),
    }


def _run_texture(cfg: Config, seed: int, out: Path) -> dict:
    fasta = cfg.get("texture.fasta")
    if fasta:
        corpus = [
            SymbolSequence.from_string(rec.sequence.upper(), DNA) for rec in parse_fasta(fasta)
        ]
    else:
        corpus = heterogeneous_corpus(
            cfg.get_int("texture.n", 200),
            cfg.get_int("texture.length", 400),
            SeedSpec(seed, "texture-corpus"),
        )
    rows = four_condition_experiment(
        corpus, SeedSpec(seed, "texture"), split_config=_split_config(cfg)
    )
    csv_lines = ["Condition,RC RDM,RC Composite,Recovery"]
    for r in rows:
        csv_lines.append(f"{r.condition},{r.rc_rdm:.6f},{r.rc_composite:.6f},{r.recovery:.6f}")
    (out / "report.csv").write_text("\n".join(csv_lines) + "\n")
    return {
        "conditions": [
            {
                "condition": r.condition,
                "rc_rdm": r.rc_rdm,
                "rc_composite": r.rc_composite,
                "recovery": r.recovery,
            }
            for r in rows
        ]
    }


def _run_vq_sweep(cfg: Config, seed: int, out: Path) -> dict:
    source = cfg.get("vq.data")
    if source:
        data = _loader(cfg)(source).data
    else:
        traj = gen_lorenz(SeedSpec(seed, "vq-lorenz"), cfg.get_int("vq.n", 2000))
        data = traj.values
    k_values = tuple(
        int(k) for k in cfg.get("vq.k_values", "32,64,128,256,512,1024").split(",")
    )
    curve = vq_double_bind_sweep(
        data,
        k_values,
        sigma=cfg.get_float("vq.sigma", 0.05),
        seed=SeedSpec(seed, "vq"),
        nested=cfg.get_bool("vq.nested", True),
    )
    csv_lines = ["K,recon_mse,procrustes_D"]
    for k, mse, d in curve.rows():
        csv_lines.append(f"{k},{mse:.10g},{d:.10g}")
    (out / "report.csv").write_text("\n".join(csv_lines) + "\n")
    return {
        "rows": [list(r) for r in curve.rows()],
        "fit": {"a": curve.fit_intercept, "b": curve.fit_slope, "r2": curve.fit_r2},
    }


def _parse_seeds(raw: str | None) -> tuple:
    if not raw:
        return DEFAULT_SEEDS
    try:
        return tuple(int(s) for s in raw.split(","))
    except ValueError as exc:
        raise ConfigError(f"mine.seeds: {raw!r} is not a comma-separated integer list") from exc
