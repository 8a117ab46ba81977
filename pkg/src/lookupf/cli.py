"""Command-line surface.

Machine-readable JSON goes to stdout; progress and human summaries go to
stderr (verbosity via the LOOKUPF_LOG environment variable). Every
command that writes files also writes a run manifest recording the tool
version, the argument snapshot, the seed, and input digests, so a run
can be reproduced or audited later. Exit codes: 0 success, 1 domain
error, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .datagen import (
    DatasetConfig,
    augment_image,
    builtin_plans,
    dedup_references,
    emit_dataset_layout,
    generate_copy_move,
    generate_splicing,
    item_rng,
    random_copy_move_recipe,
    random_splicing_recipe,
)
from .descriptor import DEFAULT_GIST, gist_descriptor
from .detect import baseline_suite, oracle_suite
from .errors import LookupfError
from .evaluation import (
    compute_metrics,
    proportion_buckets,
    read_gt_csv,
    read_predictions_csv,
    read_proportions_csv,
    write_predictions_csv,
    PredictionRun,
)
from .imgio import load_corpus, load_image, load_mask, save_image, save_mask
from .index import build_index, load_index, query_topk, save_index
from .maskops import extract_segments, forgery_proportion, save_segment
from .pipeline import PipelineConfig, verify_batch

log = logging.getLogger("lookupf")


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record written beside every command's outputs."""

    tool: str
    command: str
    config: dict
    master_seed: int | None = None
    input_digests: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)


def _digest_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _digest_path(path: Path) -> str:
    if path.is_file():
        return _digest_file(path)
    lines = []
    for p in sorted(path.rglob("*")):
        if p.is_file():
            lines.append(f"{p.relative_to(path)}:{_digest_file(p)}")
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def _write_manifest(manifest: RunManifest, out: Path) -> None:
    """File outputs get a sibling <stem>.manifest.json; directories get
    manifest.json inside."""
    if out.suffix and not out.is_dir():
        target = out.parent / f"{out.stem}.manifest.json"
    else:
        target = out / "manifest.json"
    target.write_text(json.dumps(asdict(manifest), sort_keys=True, indent=2) + "\n")


def _manifest(args: argparse.Namespace, command: str, inputs: dict[str, Path], errors: dict | None = None) -> RunManifest:
    config = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in vars(args).items()
        if k != "func" and not k.startswith("_")
    }
    return RunManifest(
        tool=f"lookupf {__version__}",
        command=command,
        config=config,
        master_seed=getattr(args, "seed", None),
        input_digests={name: _digest_path(Path(p)) for name, p in inputs.items()},
        errors=dict(errors or {}),
    )


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _default_threads() -> int:
    return os.cpu_count() or 1


# --- subcommand handlers ------------------------------------------------------


def _cmd_index_build(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.images)
    log.info("extracting descriptors for %d images", len(corpus))
    bank_manifest = json.dumps(
        {
            "descriptor": "gist",
            "resize_edge": DEFAULT_GIST.resize_edge,
            "scales": DEFAULT_GIST.scales,
            "orientations_per_scale": list(DEFAULT_GIST.orientations_per_scale),
            "grid": DEFAULT_GIST.grid,
        },
        sort_keys=True,
    )
    idx = build_index(((img.id, gist_descriptor(img)) for img in corpus), manifest=bank_manifest)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_index(idx, out)
    _write_manifest(_manifest(args, "index build", {"images": Path(args.images)}), out)
    _emit({"dim": idx.dim, "indexed": len(idx), "out": str(out)})
    return 0


def _cmd_index_query(args: argparse.Namespace) -> int:
    idx = load_index(args.index)
    corpus = load_corpus(args.images)
    rows = []
    for img in corpus:
        for cand in query_topk(idx, gist_descriptor(img), args.topk):
            rows.append((img.id, cand.reference_id, cand.confidence))
    run = PredictionRun(rows=tuple(rows))
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        write_predictions_csv(out, run)
        _write_manifest(
            _manifest(args, "index query", {"index": Path(args.index), "images": Path(args.images)}), out
        )
        _emit({"out": str(out), "queries": len(corpus), "rows": len(rows)})
    else:
        _emit({
            "rows": [
                {"query_id": q, "reference_id": r, "score": s} for q, r, s in rows
            ]
        })
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    idx = load_index(args.index)
    if args.detector == "oracle":
        if not args.labels:
            raise LookupfError("--detector oracle requires --labels")
        suite = oracle_suite(args.labels)
    else:
        suite = baseline_suite()
    cfg = PipelineConfig(
        detector=suite,
        index=idx,
        topk_global=args.topk_global,
        topk_local=args.topk_local,
        local_enabled=not args.global_only,
    )
    corpus = load_corpus(args.images)
    log.info("verifying %d queries on %d-entry index", len(corpus), len(idx))
    reports, errors = verify_batch(cfg, corpus, threads=args.threads)

    out = Path(args.out)
    (out / "reports").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(exist_ok=True)

    rows = []
    for rep in reports:
        for cand in rep.candidates:
            rows.append((rep.query_id, cand.reference_id, cand.confidence))
        mask_rel = None
        if rep.forgery_mask is not None:
            mask_rel = f"masks/{rep.query_id}.png"
            save_mask(rep.forgery_mask, out / mask_rel)
        payload = {
            "authentic": rep.authentic,
            "candidates": [
                {
                    "confidence": c.confidence,
                    "provenance": {"kind": c.provenance.kind, "segment_index": c.provenance.segment_index},
                    "reference_id": c.reference_id,
                }
                for c in rep.candidates
            ],
            "forgery_type": rep.forgery_type.canonical if rep.forgery_type else None,
            "mask": mask_rel,
            "query_id": rep.query_id,
        }
        (out / "reports" / f"{rep.query_id}.json").write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n"
        )

    write_predictions_csv(out / "predictions.csv", PredictionRun(rows=tuple(rows)))
    inputs = {"index": Path(args.index), "images": Path(args.images)}
    if args.labels:
        inputs["labels"] = Path(args.labels)
    _write_manifest(_manifest(args, "verify", inputs, errors), out)
    _emit(
        {
            "authentic": sum(1 for r in reports if r.authentic),
            "errors": len(errors),
            "forged": sum(1 for r in reports if not r.authentic),
            "out": str(out),
            "queries": len(reports),
        }
    )
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    run = read_predictions_csv(args.predictions)
    gt = read_gt_csv(args.gt)
    ks = tuple(int(k) for k in args.ks.split(","))
    metrics = compute_metrics(run, gt, ks=ks)
    payload: dict = {
        "micro_ap": metrics.micro_ap,
        "recall_at_p90": metrics.recall_at_p90,
        "recall_at_rank": {str(k): v for k, v in metrics.recall_at_rank.items()},
        "threshold_at_p90": metrics.threshold_at_p90,
    }
    buckets = None
    if args.proportions:
        proportions = read_proportions_csv(args.proportions)
        buckets = proportion_buckets(run, gt, proportions)
        payload["proportion_buckets"] = [
            {"bucket": i, "micro_ap": ap} for i, ap in buckets
        ]
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        if buckets is not None:
            lines = ["bucket,lo,hi,micro_ap"]
            for i, ap in buckets:
                lines.append(f"{i},{i / 10.0!r},{(i + 1) / 10.0!r},{'' if ap is None else repr(ap)}")
            (out / "buckets.csv").write_text("\n".join(lines) + "\n")
        inputs = {"predictions": Path(args.predictions), "gt": Path(args.gt)}
        if args.proportions:
            inputs["proportions"] = Path(args.proportions)
        _write_manifest(_manifest(args, "eval", inputs), out)
    _emit(payload)
    return 0


def _cmd_gen_copy_move(args: argparse.Namespace) -> int:
    img = load_image(args.image)
    rng = item_rng(args.seed, img.id)
    recipe = random_copy_move_recipe(rng, img)
    if args.alpha is not None:
        recipe = type(recipe)(
            kind=recipe.kind, source_id=recipe.source_id, object_mask=recipe.object_mask,
            placement=recipe.placement, scale=recipe.scale, alpha=args.alpha,
        )
    forged, mask = generate_copy_move(img, recipe)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_image(forged.with_id(f"{img.id}_cm"), out / f"{img.id}_cm.png")
    save_mask(mask, out / f"{img.id}_cm_mask.png")
    ann = {
        "alpha": recipe.alpha,
        "originals": [img.id],
        "proportion": forgery_proportion(mask),
        "scale": recipe.scale,
        "type": "copy-move",
    }
    (out / f"{img.id}_cm.json").write_text(json.dumps(ann, sort_keys=True, indent=2) + "\n")
    _write_manifest(_manifest(args, "gen copy-move", {"image": Path(args.image)}), out)
    _emit({"out": str(out), "proportion": ann["proportion"], "type": "copy-move"})
    return 0


def _cmd_gen_splice(args: argparse.Namespace) -> int:
    target = load_image(args.target)
    donor = load_image(args.donor)
    donor_mask = load_mask(args.donor_mask)
    rng = item_rng(args.seed, f"{target.id}|{donor.id}")
    recipe = random_splicing_recipe(rng, target, donor, donor_mask)
    forged, mask = generate_splicing(target, donor, recipe)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{target.id}_sp"
    save_image(forged.with_id(stem), out / f"{stem}.png")
    save_mask(mask, out / f"{stem}_mask.png")
    ann = {
        "alpha": recipe.alpha,
        "originals": sorted([target.id, donor.id]),
        "proportion": forgery_proportion(mask),
        "scale": recipe.scale,
        "type": "image-splicing",
    }
    (out / f"{stem}.json").write_text(json.dumps(ann, sort_keys=True, indent=2) + "\n")
    _write_manifest(
        _manifest(
            args, "gen splice",
            {"target": Path(args.target), "donor": Path(args.donor), "donor_mask": Path(args.donor_mask)},
        ),
        out,
    )
    _emit({"out": str(out), "proportion": ann["proportion"], "type": "image-splicing"})
    return 0


def _cmd_augment(args: argparse.Namespace) -> int:
    plans = {p.name: p for p in builtin_plans()}
    if args.plan not in plans:
        raise LookupfError(f"unknown plan {args.plan!r}; known: {', '.join(sorted(plans))}")
    corpus = load_corpus(args.images)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for img in corpus:
        seed = int.from_bytes(
            hashlib.blake2b(f"{args.seed}:{img.id}".encode(), digest_size=8).digest(), "little"
        )
        augmented = augment_image(img, plans[args.plan].with_seed(seed))
        save_image(augmented.with_id(img.id), out / f"{img.id}.png")
    _write_manifest(_manifest(args, "augment", {"images": Path(args.images)}), out)
    _emit({"augmented": len(corpus), "out": str(out), "plan": args.plan})
    return 0


def _cmd_dedup(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.images)
    kept, removed = dedup_references(corpus, args.tau)
    _emit({"kept": kept, "removed": [list(pair) for pair in removed]})
    return 0


def _cmd_extract_segments(args: argparse.Namespace) -> int:
    img = load_image(args.image)
    mask = load_mask(args.mask)
    segments = extract_segments(
        img, mask, min_area_fraction=args.min_area_fraction, max_segments=args.max_segments
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, seg in enumerate(segments):
        save_segment(seg, out, f"seg_{i:04d}")
    _write_manifest(
        _manifest(args, "extract-segments", {"image": Path(args.image), "mask": Path(args.mask)}), out
    )
    _emit({"boxes": [list(s.box) for s in segments], "out": str(out), "segments": len(segments)})
    return 0


def _cmd_dataset_emit(args: argparse.Namespace) -> int:
    config = DatasetConfig(
        reference_count=args.references,
        training_count=args.training,
        query_count=args.queries,
        segment_count=args.segments,
        image_edge=args.edge,
        master_seed=args.seed,
    )
    metadata = emit_dataset_layout(args.root, config, threads=args.threads)
    _write_manifest(_manifest(args, "dataset emit", {}), Path(args.root))
    _emit(metadata)
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lookupf",
        description="Image fact verification: forgery identification plus original-image retrieval.",
    )
    parser.add_argument("--version", action="version", version=f"lookupf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build or query a reference index")
    index_sub = p_index.add_subparsers(dest="index_command", required=True)

    p_build = index_sub.add_parser("build", help="index every image in a directory")
    p_build.add_argument("--images", required=True)
    p_build.add_argument("--out", required=True)
    p_build.set_defaults(func=_cmd_index_build)

    p_query = index_sub.add_parser("query", help="top-k search for each image in a directory")
    p_query.add_argument("--index", required=True)
    p_query.add_argument("--images", required=True)
    p_query.add_argument("--topk", type=int, default=10)
    p_query.add_argument("--out", default=None)
    p_query.set_defaults(func=_cmd_index_query)

    p_verify = sub.add_parser("verify", help="run the full two-phase verification")
    p_verify.add_argument("--index", required=True)
    p_verify.add_argument("--images", required=True)
    p_verify.add_argument("--detector", choices=["oracle", "baseline"], default="oracle")
    p_verify.add_argument("--labels", default=None, help="sidecar directory for the oracle detector")
    p_verify.add_argument("--global-only", action="store_true", help="disable local retrieval")
    p_verify.add_argument("--topk-global", type=int, default=10)
    p_verify.add_argument("--topk-local", type=int, default=10)
    p_verify.add_argument("--threads", type=int, default=_default_threads())
    p_verify.add_argument("--out", required=True)
    p_verify.set_defaults(func=_cmd_verify)

    p_eval = sub.add_parser("eval", help="score a predictions CSV against ground truth")
    p_eval.add_argument("--predictions", required=True)
    p_eval.add_argument("--gt", required=True)
    p_eval.add_argument("--proportions", default=None)
    p_eval.add_argument("--ks", default="1,10", help="comma-separated ranks for recall@k")
    p_eval.add_argument("--out", default=None)
    p_eval.set_defaults(func=_cmd_eval)

    p_gen = sub.add_parser("gen", help="synthesize forgeries")
    gen_sub = p_gen.add_subparsers(dest="gen_command", required=True)

    p_cm = gen_sub.add_parser("copy-move", help="duplicate a region within one image")
    p_cm.add_argument("--image", required=True)
    p_cm.add_argument("--out", required=True)
    p_cm.add_argument("--seed", type=int, default=0)
    p_cm.add_argument("--alpha", type=float, default=None)
    p_cm.set_defaults(func=_cmd_gen_copy_move)

    p_sp = gen_sub.add_parser("splice", help="paste a donor object into a target image")
    p_sp.add_argument("--target", required=True)
    p_sp.add_argument("--donor", required=True)
    p_sp.add_argument("--donor-mask", required=True)
    p_sp.add_argument("--out", required=True)
    p_sp.add_argument("--seed", type=int, default=0)
    p_sp.set_defaults(func=_cmd_gen_splice)

    p_aug = sub.add_parser("augment", help="apply a named augmentation plan to a directory")
    p_aug.add_argument("--images", required=True)
    p_aug.add_argument("--plan", required=True)
    p_aug.add_argument("--out", required=True)
    p_aug.add_argument("--seed", type=int, default=0)
    p_aug.set_defaults(func=_cmd_augment)

    p_dedup = sub.add_parser("dedup", help="report near-duplicate images")
    p_dedup.add_argument("--images", required=True)
    p_dedup.add_argument("--tau", type=float, required=True)
    p_dedup.set_defaults(func=_cmd_dedup)

    p_seg = sub.add_parser("extract-segments", help="cut forged regions out of an image")
    p_seg.add_argument("--image", required=True)
    p_seg.add_argument("--mask", required=True)
    p_seg.add_argument("--out", required=True)
    p_seg.add_argument("--min-area-fraction", type=float, default=0.001)
    p_seg.add_argument("--max-segments", type=int, default=8)
    p_seg.set_defaults(func=_cmd_extract_segments)

    p_data = sub.add_parser("dataset", help="dataset construction")
    data_sub = p_data.add_subparsers(dest="dataset_command", required=True)
    p_emit = data_sub.add_parser("emit", help="generate the seven-folder dataset layout")
    p_emit.add_argument("--root", required=True)
    p_emit.add_argument("--seed", type=int, default=0)
    p_emit.add_argument("--references", type=int, default=200)
    p_emit.add_argument("--training", type=int, default=200)
    p_emit.add_argument("--queries", type=int, default=40)
    p_emit.add_argument("--segments", type=int, default=20)
    p_emit.add_argument("--edge", type=int, default=128)
    p_emit.add_argument("--threads", type=int, default=_default_threads())
    p_emit.set_defaults(func=_cmd_dataset_emit)

    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("LOOKUPF_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LookupfError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
