"""Command-line pipeline: ``simon <command> [options]``.

Corpus files are paired by filename stem across the image, saliency and mask
directories.  Settings come from ``--config`` files and ``--set key=value``
flags (see :mod:`simon.config`).  ``SIMON_LOG`` sets the log level.
"""
import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import align, dissociation, embedding, foveation, imaging, retrieval, sas, synth
from .config import ConfigError, RunConfig, parse_assignment

log = logging.getLogger("simon")

_IMAGE_SUFFIXES = (".png", ".pgm", ".ppm", ".pnm")


class CommandError(RuntimeError):
    pass


def _stems(directory):
    if not directory or not os.path.isdir(directory):
        raise CommandError(f"not a directory: {directory}")
    out = {}
    for name in sorted(os.listdir(directory)):
        stem, ext = os.path.splitext(name)
        if ext.lower() in _IMAGE_SUFFIXES:
            out.setdefault(stem, os.path.join(directory, name))
    return out


def _gray(path):
    img = imaging.load_image(path)
    return img.mean(axis=2) if img.ndim == 3 else img


def _pmap(fn, items, jobs):
    """Apply ``fn`` to ``items`` with a bounded pool; returns ``[(item, result, error)]``."""

    def safe(item):
        try:
            return item, fn(item), None
        except Exception as exc:  # reported per item, the batch keeps going
            return item, None, exc

    if jobs <= 1 or len(items) <= 1:
        return [safe(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(safe, items))


def _report_failures(results, what):
    failed = [(item, err) for item, _, err in results if err is not None]
    for item, err in failed:
        log.error("%s %s failed: %s", what, item, err)
    if failed:
        print(f"{len(failed)} {what}(s) failed:", file=sys.stderr)
        for item, err in failed:
            print(f"  {item}: {err}", file=sys.stderr)
    return 1 if failed else 0


def _makedirs_for(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_sample(args, cfg):
    images, sal, masks = _stems(args.images), _stems(args.saliency), _stems(args.masks)
    stems = sorted(set(images) | set(sal) | set(masks))
    if not stems:
        raise CommandError("no input images found")
    config = cfg.sampling()

    def run(stem):
        missing = [kind for kind, table in (("image", images), ("saliency", sal), ("mask", masks)) if stem not in table]
        if missing:
            raise CommandError(f"missing {', '.join(missing)}")
        return sas.sample(_gray(sal[stem]), _gray(masks[stem]), config)

    results = _pmap(run, stems, cfg.jobs)
    _makedirs_for(args.out)
    sas.write_fixations_csv(args.out, [(stem, fs) for stem, fs, err in results if err is None])
    return _report_failures(results, "image")


def cmd_foveate(args, cfg):
    images, masks = _stems(args.images), _stems(args.masks)
    fixations = sas.read_fixations_csv(args.fixations)
    if not fixations:
        raise CommandError("fixation file has no rows")
    config = cfg.foveation()
    os.makedirs(args.out, exist_ok=True)

    def run(image_id):
        if image_id not in images:
            raise CommandError("no such image")
        img = imaging.load_image(images[image_id])
        if image_id in masks:
            matte = _gray(masks[image_id])
        else:
            raise CommandError("no mask")
        views = foveation.generate_views(img, matte, fixations[image_id], config)
        for k, view in enumerate(views, start=1):
            imaging.save_image(os.path.join(args.out, f"{image_id}_view{k}.png"), view.image)
        return len(views)

    results = _pmap(run, sorted(fixations), cfg.jobs)
    return _report_failures(results, "image")


def _group_views(directory):
    groups = {}
    for stem, path in _stems(directory).items():
        image_id, sep, k = stem.rpartition("_view")
        if not sep or not k.isdigit():
            continue
        groups.setdefault(image_id, []).append((int(k), path))
    return {i: [p for _, p in sorted(v)] for i, v in groups.items()}


def cmd_aggregate(args, cfg):
    if bool(args.views) == bool(args.emb):
        raise CommandError("give exactly one of --views or --emb")
    if args.views:
        groups = _group_views(args.views)
        if not groups:
            raise CommandError(f"no <id>_view<k> images in {args.views}")
        dim = cfg["embedding.dim"]

        def run(image_id):
            rows = [embedding.toy_view_encoder(imaging.load_image(p), dim) for p in groups[image_id]]
            return embedding.aggregate_views(rows)

        ids = sorted(groups)
    else:
        data, labels = embedding.read_emb(args.emb)
        if labels is None:
            raise CommandError("per-view EMB1 input needs a .labels sidecar with <image_id>:<k> labels")
        grouped = {}
        for row, label in zip(data, labels):
            image_id, sep, k = label.rpartition(":")
            if not sep:
                raise CommandError(f"label {label!r} is not <image_id>:<k>")
            grouped.setdefault(image_id, []).append((int(k), row))

        def run(image_id):
            return embedding.aggregate_views([r for _, r in sorted(grouped[image_id], key=lambda kr: kr[0])])

        ids = sorted(grouped)
    results = _pmap(run, ids, cfg.jobs)
    status = _report_failures(results, "image")
    ok = [(i, vec) for i, vec, err in results if err is None]
    if not ok:
        raise CommandError("every image failed to aggregate")
    _makedirs_for(args.out)
    embedding.write_emb(args.out, np.vstack([v for _, v in ok]), [i for i, _ in ok])
    return status


def cmd_align(args, cfg):
    z_s, _ = embedding.read_emb(args.semantic)
    z_b, _ = embedding.read_emb(args.brain)
    z_p = embedding.read_emb(args.perceptual)[0] if args.perceptual else None
    result = align.train_align(z_s, z_b, cfg.train(), cfg["manifold.curvature"], z_perceptual=z_p)
    _makedirs_for(args.out_params)
    embedding.write_emb(args.out_params, align.params_to_matrix(result.params))
    _makedirs_for(args.out_history)
    align.write_history_csv(args.out_history, result.history)
    return 0


def cmd_retrieve(args, cfg):
    queries, _ = embedding.read_emb(args.queries)
    gallery, _ = embedding.read_emb(args.gallery)
    truth = retrieval.read_truth_csv(args.truth)
    params = align.params_from_matrix(embedding.read_emb(args.params)[0]) if args.params else None
    report = retrieval.topk_accuracy(queries, gallery, truth, cfg["retrieval.ks"], cfg["retrieval.metric"],
                                     params, cfg["manifold.curvature"])
    _makedirs_for(args.out)
    retrieval.write_report_csv(args.out, report)
    return 0


def cmd_offsets(args, cfg):
    sal, masks = _stems(args.saliency), _stems(args.masks)
    stems = sorted(set(sal) | set(masks))
    if not stems:
        raise CommandError("no input maps found")
    config = cfg.sampling()

    def run(stem):
        if stem not in sal or stem not in masks:
            raise CommandError("missing saliency or mask")
        return dissociation.semantic_offset(_gray(sal[stem]), _gray(masks[stem]), config)

    results = _pmap(run, stems, cfg.jobs)
    status = _report_failures(results, "image")
    records = [dissociation.OffsetRecord(stem, off) for stem, off, err in results if err is None]
    if not records:
        raise CommandError("no offsets computed")
    os.makedirs(args.out_dir, exist_ok=True)
    report = dissociation.corpus_report(records)
    dissociation.write_offsets_csv(os.path.join(args.out_dir, "offsets.csv"), records)
    dissociation.write_histogram_csv(os.path.join(args.out_dir, "histogram.csv"), report)
    dissociation.write_buckets_csv(os.path.join(args.out_dir, "buckets.csv"), dissociation.bucket_offsets(records))
    dissociation.write_summary_csv(os.path.join(args.out_dir, "summary.csv"), report)
    return status


def cmd_mask_stability(args, cfg):
    masks = _stems(args.masks)
    if not masks:
        raise CommandError("no masks found")
    lo, hi = cfg["stability.tau_lo"], cfg["stability.tau_hi"]

    def run(stem):
        return dissociation.mask_stability(_gray(masks[stem]), lo, hi)

    results = _pmap(run, sorted(masks), cfg.jobs)
    _makedirs_for(args.out)
    dissociation.write_stability_csv(args.out, [(s, *r) for s, r, err in results if err is None])
    return _report_failures(results, "mask")


def cmd_synth(args, cfg):
    seed = cfg["run.seed"]
    if args.kind == "images":
        spec = synth.SynthSpec(cfg["synth.count"], cfg["synth.width"], cfg["synth.height"], None, seed,
                               cfg["sampling.k"], cfg["sampling.gamma"], cfg["sampling.tau"])
        synth.generate_corpus(spec, args.out)
        return 0
    os.makedirs(args.out, exist_ok=True)
    labels = None
    if args.source:
        source, labels = embedding.read_emb(args.source)
        z, brain, rot = synth.synth_pairs(len(source), noise=cfg["synth.noise"], rng_seed=seed, source=source)
    else:
        z, brain, rot = synth.synth_pairs(cfg["synth.pairs"], cfg["synth.dim"], cfg["synth.noise"], seed)
    embedding.write_emb(os.path.join(args.out, "semantic.emb"), z, labels)
    embedding.write_emb(os.path.join(args.out, "brain.emb"), brain, labels)
    n_test = cfg["synth.test_pairs"]
    if n_test > 0:
        tz, tb, _ = synth.synth_pairs(n_test, noise=cfg["synth.noise"], rng_seed=seed + 1, rotation=rot)
        embedding.write_emb(os.path.join(args.out, "test_semantic.emb"), tz)
        embedding.write_emb(os.path.join(args.out, "test_brain.emb"), tb)
        retrieval.write_truth_csv(os.path.join(args.out, "test_truth.csv"), range(n_test))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _global_flags(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="key = value settings file")
    parser.add_argument("--seed", type=int, default=default, help="shorthand for --set run.seed=N")
    parser.add_argument("--jobs", type=int, default=default, help="worker threads (default: logical cores)")
    parser.add_argument("--set", dest="settings", action="append", metavar="KEY=VALUE",
                        default=argparse.SUPPRESS if suppress else [], help="override one setting")


def build_parser():
    parser = argparse.ArgumentParser(prog="simon", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("sample", cmd_sample, "select fixation centers per image")
    p.add_argument("--images", required=True)
    p.add_argument("--saliency", required=True)
    p.add_argument("--masks", required=True)
    p.add_argument("--out", required=True, help="fixations CSV")

    p = add("foveate", cmd_foveate, "render foveated views")
    p.add_argument("--images", required=True)
    p.add_argument("--masks", required=True)
    p.add_argument("--fixations", required=True)
    p.add_argument("--out", required=True, help="output directory")

    p = add("aggregate", cmd_aggregate, "mean-pool normalised view embeddings")
    p.add_argument("--views", help="directory of <id>_view<k>.png (toy encoder)")
    p.add_argument("--emb", help="per-view EMB1 with <id>:<k> labels")
    p.add_argument("--out", required=True)

    p = add("align", cmd_align, "train the hyperbolic alignment")
    p.add_argument("--semantic", required=True)
    p.add_argument("--brain", required=True)
    p.add_argument("--perceptual")
    p.add_argument("--out-params", required=True)
    p.add_argument("--out-history", required=True)

    p = add("retrieve", cmd_retrieve, "top-k retrieval report")
    p.add_argument("--queries", required=True)
    p.add_argument("--gallery", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--params")
    p.add_argument("--out", required=True)

    p = add("offsets", cmd_offsets, "center-to-fixation offset analysis")
    p.add_argument("--saliency", required=True)
    p.add_argument("--masks", required=True)
    p.add_argument("--out-dir", required=True)

    p = add("mask-stability", cmd_mask_stability, "foreground threshold stability")
    p.add_argument("--masks", required=True)
    p.add_argument("--out", required=True)

    p = add("synth", cmd_synth, "generate a synthetic corpus or embedding pairs")
    p.add_argument("kind", choices=("images", "pairs"))
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--source", help="pairs: semantic rows from this EMB1 file")
    return parser


def _setup_logging():
    level = os.environ.get("SIMON_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        overrides = [parse_assignment(s) for s in args.settings]
        if args.seed is not None:
            overrides.append(("run.seed", str(args.seed)))
        if args.jobs is not None:
            overrides.append(("run.jobs", str(args.jobs)))
        cfg = RunConfig.build(args.config, overrides)
    except (ConfigError, OSError) as exc:
        print(f"simon: config error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args, cfg)
    except (CommandError, ValueError, OSError) as exc:
        print(f"simon {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
