"""Command line surface: synth, prepare, train, segment, eval, sweep.

Exit codes: 0 success, 2 input/config error, 3 runtime/numeric failure.
Every command is deterministic given its config file and seeds.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .classifier import predict, read_model, softmax, train_baseline, write_model
from .config import RunConfig, load_run_config, load_synth_spec
from .corpus import (read_annotation_corpus, read_stats, write_annotation_corpus,
                     write_stats, write_wav)
from .errors import InputError, TrainingDivergedError
from .evaluate import (compose_scores, evaluate_corpus, format_report,
                       report_csv_header, report_csv_row, write_report)
from .labeling import AugmentConfig, augment_labels, write_labels
from .logits_io import read_logits
from .pipeline import (LoadedCorpus, ManifestEntry, build_samples, load_corpus,
                       prepare_datasets, read_manifest, reference_boundaries,
                       write_manifest)
from .postprocess import (BoundaryList, SelectionStrategy, boundary_times_from_frames,
                          collapse_clusters, decode, frames_to_times, read_boundaries,
                          segment, write_boundaries, write_segments)
from .synth import synthesize_corpus
from .util import atomic_write


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segwords",
        description="Word boundary detection: BIO frame labels, frame "
                    "classifiers, boundary decoding, segmentation metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a seeded synthetic corpus")
    p.add_argument("--spec", required=True, help="synthesis spec file (INI)")
    p.add_argument("--out", required=True, help="output corpus directory")

    for name, doc in (("prepare", "export stats, frame labels, and reference boundaries"),
                      ("train", "train the built-in frame classifier"),
                      ("segment", "predict word-start boundaries"),
                      ("sweep", "tabulate metrics across a parameter axis")):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="run config file (INI)")
        p.add_argument("--frame-ms", type=float, default=None)
        p.add_argument("--tolerance-ms", type=float, default=None)
        p.add_argument("--aug-radius", type=int, default=None)
        p.add_argument("--selection", default=None, choices=["first", "mid", "last"])
        p.add_argument("--seed", type=int, default=None, help="training seed override")
        if name == "train":
            p.add_argument("--model-dir", default=None,
                           help="output directory (default <out_dir>/model)")
        if name == "segment":
            p.add_argument("--model-dir", default=None,
                           help="directory with model.txt and stats.txt")
            p.add_argument("--logits-dir", default=None,
                           help="directory of .wseg interchange files")
            p.add_argument("--split", default="test", choices=["train", "val", "test"])
            p.add_argument("--out", default=None, help="boundary CSV path")
            p.add_argument("--segments", default=None,
                           help="also write a word segment CSV (model mode only)")
        if name == "sweep":
            p.add_argument("--axis", required=True,
                           choices=["aug_radius", "selection", "tolerance"])
            p.add_argument("--values", default=None,
                           help="comma-separated axis values (defaults per axis)")
            p.add_argument("--split", default="val", choices=["train", "val", "test"])
            p.add_argument("--out", default=None, help="sweep CSV path")

    p = sub.add_parser("eval", help="score predicted boundaries against references")
    p.add_argument("--pred", default=None, help="predicted boundary CSV")
    p.add_argument("--ref", default=None,
                   help="reference boundary CSV or annotation CSV (sample units)")
    p.add_argument("--manifest", default=None, help="manifest to select a split")
    p.add_argument("--split", default=None, choices=["train", "val", "test"])
    p.add_argument("--sample-rate", type=int, default=16000,
                   help="rate for annotation-format references")
    p.add_argument("--tolerance-ms", type=float, default=40.0)
    p.add_argument("--aggregate", default="micro", choices=["micro", "macro"])
    p.add_argument("--out", default=None, help="write the report here as well")
    p.add_argument("--from-rates", default=None, metavar="PRC,RCL,OS[;...]",
                   help="debug: compose F/R directly from rate triples")
    return parser


def _load_config(args) -> RunConfig:
    cfg = load_run_config(args.config)
    if args.frame_ms is not None:
        cfg = replace(cfg, frame_ms=args.frame_ms)
    if args.tolerance_ms is not None:
        cfg = replace(cfg, tolerance_ms=args.tolerance_ms)
    if args.aug_radius is not None:
        cfg = cfg.with_aug_radius(args.aug_radius)
    if args.selection is not None:
        cfg = replace(cfg, selection=SelectionStrategy.parse(args.selection))
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, train=replace(cfg.train, seed=args.seed))
    if cfg.corpus_dir is None:
        raise InputError("config is missing [paths] corpus_dir")
    if cfg.out_dir is None:
        raise InputError("config is missing [paths] out_dir")
    return cfg


def cmd_synth(args) -> int:
    spec, split_sizes = load_synth_spec(args.spec)
    out = Path(args.out)
    (out / "wavs").mkdir(parents=True, exist_ok=True)
    waveforms, annotations = synthesize_corpus(spec)

    entries = []
    names = ("train",) * split_sizes[0] + ("val",) * split_sizes[1] + ("test",) * split_sizes[2]
    for w, split in zip(waveforms, names):
        rel = f"wavs/{w.utterance_id}.wav"
        write_wav(out / rel, w)
        entries.append(ManifestEntry(w.utterance_id, rel, split))
    write_annotation_corpus(out / "annotations.csv",
                            {w.utterance_id: a for w, a in zip(waveforms, annotations)})
    write_manifest(out / "manifest.csv", entries)
    print(f"synthesized {len(waveforms)} utterances into {out} "
          f"(train/val/test = {split_sizes[0]}/{split_sizes[1]}/{split_sizes[2]})")
    return 0


def cmd_prepare(args) -> int:
    cfg = _load_config(args)
    corpus = load_corpus(cfg.corpus_dir)
    datasets, stats = prepare_datasets(corpus, cfg.frame_ms, cfg.aggregation)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    write_stats(out / "stats.txt", stats)

    n_lines = 0
    for split, samples in datasets.items():
        labeled = {}
        for s in samples:
            y = s.labels
            if split == "train" and cfg.aug_radius > 0:
                y = augment_labels(y, AugmentConfig(cfg.aug_radius))
            labeled[s.utterance_id] = y
        write_labels(out / f"labels_{split}.tsv", labeled)
        n_lines += len(labeled)
        write_boundaries(out / f"refs_{split}.csv",
                         reference_boundaries(corpus, split).values())
    print(f"prepared {n_lines} utterances across {len(datasets)} splits into {out}")
    return 0


def _train(cfg: RunConfig, corpus: LoadedCorpus, log_path: Path | None):
    datasets, stats = prepare_datasets(corpus, cfg.frame_ms, cfg.aggregation)
    if "val" not in datasets:
        raise InputError("manifest has no val utterances")
    history: list[tuple[int, float, float]] = []
    params = train_baseline(datasets["train"], datasets["val"], cfg.train,
                            on_epoch=lambda e, l, r: history.append((e, l, r)))
    if log_path is not None:
        with atomic_write(log_path) as fh:
            fh.write("epoch,train_loss,val_score\n")
            for epoch, loss, score in history:
                fh.write(f"{epoch},{loss:.6f},{score:.6f}\n")
    return params, stats


def cmd_train(args) -> int:
    cfg = _load_config(args)
    corpus = load_corpus(cfg.corpus_dir)
    model_dir = Path(args.model_dir) if args.model_dir else cfg.out_dir / "model"
    model_dir.mkdir(parents=True, exist_ok=True)
    params, stats = _train(cfg, corpus, model_dir / "train_log.csv")
    write_model(model_dir / "model.txt", params)
    write_stats(model_dir / "stats.txt", stats)
    print(f"trained model written to {model_dir}")
    return 0


def _segment_with_model(cfg: RunConfig, corpus: LoadedCorpus, model_dir: Path,
                        split: str) -> dict[str, BoundaryList]:
    params = read_model(model_dir / "model.txt")
    stats = read_stats(model_dir / "stats.txt")
    samples = build_samples(corpus, split, stats, cfg.frame_ms, cfg.aggregation)
    frame_us = round(cfg.frame_ms * 1000)
    out = {}
    for s in samples:
        logits = predict(params, s.features, utterance_id=s.utterance_id,
                         frame_duration_us=frame_us)
        labels = decode(softmax(logits), s.labels.valid_frames, s.features.frame_len)
        idx = collapse_clusters(labels, cfg.selection)
        out[s.utterance_id] = frames_to_times(idx, s.features.frame_len, s.sample_rate,
                                              origin=cfg.origin,
                                              utterance_id=s.utterance_id)
    return out


def _segment_from_logits(cfg: RunConfig, logits_dir: Path) -> dict[str, BoundaryList]:
    files = sorted(Path(logits_dir).glob("*.wseg"))
    if not files:
        raise InputError(f"no .wseg files in {logits_dir}")
    expected_us = round(cfg.frame_ms * 1000)
    out = {}
    for f in files:
        l = read_logits(f)
        if l.frame_duration_us != expected_us:
            raise InputError(
                f"{f}: frame_duration_us {l.frame_duration_us} does not match "
                f"config frame_ms {cfg.frame_ms} ({expected_us} us)"
            )
        labels = decode(softmax(l), l.num_frames, frame_len=1)
        idx = collapse_clusters(labels, cfg.selection)
        out[l.utterance_id] = boundary_times_from_frames(
            idx, l.frame_duration_us / 1e6, origin=cfg.origin, utterance_id=l.utterance_id)
    return out


def cmd_segment(args) -> int:
    cfg = _load_config(args)
    if bool(args.model_dir) == bool(args.logits_dir):
        raise InputError("pass exactly one of --model-dir or --logits-dir")
    out_path = Path(args.out) if args.out else cfg.out_dir / f"boundaries_{args.split}.csv"
    out_path.parent.mkdir(parents=True, exist_ok=True)

    if args.logits_dir:
        if args.segments:
            raise InputError("--segments needs waveform durations; model mode only")
        boundaries = _segment_from_logits(cfg, Path(args.logits_dir))
    else:
        corpus = load_corpus(cfg.corpus_dir)
        boundaries = _segment_with_model(cfg, corpus, Path(args.model_dir), args.split)
        if args.segments:
            cuts = {utt: segment(corpus.waveforms[utt], b)
                    for utt, b in boundaries.items()}
            write_segments(Path(args.segments), cuts)
    write_boundaries(out_path, boundaries.values())
    n = sum(len(b) for b in boundaries.values())
    print(f"wrote {n} boundaries for {len(boundaries)} utterances to {out_path}")
    return 0


def _read_refs(path: Path, sample_rate: int) -> dict[str, BoundaryList]:
    try:
        with open(path) as fh:
            head = fh.readline().strip()
    except OSError as exc:
        raise InputError(f"unreadable reference file: {path} ({exc})")
    if head == "utterance_id,time_s":
        return read_boundaries(path)
    corpus = read_annotation_corpus(path)
    return {utt: BoundaryList(ann.start_times(sample_rate), utterance_id=utt)
            for utt, ann in corpus.items()}


def cmd_eval(args) -> int:
    if args.from_rates is not None:
        for part in filter(None, (p.strip() for p in args.from_rates.split(";"))):
            try:
                prc, rcl, os_rate = (float(v) for v in part.split(","))
            except ValueError:
                raise InputError(f"bad rate triple {part!r}; expected PRC,RCL,OS")
            f_value, r_value = compose_scores(prc, rcl, os_rate)
            print(f"prc={prc:.4f} rcl={rcl:.4f} os={os_rate:.4f} "
                  f"f_value={f_value:.4f} r_value={r_value:.4f}")
        return 0

    if not args.pred or not args.ref:
        raise InputError("eval needs --pred and --ref (or --from-rates)")
    preds = read_boundaries(Path(args.pred))
    refs = _read_refs(Path(args.ref), args.sample_rate)
    if args.manifest:
        keep = {e.utterance_id for e in read_manifest(args.manifest)
                if args.split is None or e.split == args.split}
        refs = {u: b for u, b in refs.items() if u in keep}

    extra = sorted(set(preds) - set(refs))
    if extra:
        raise InputError(f"predictions for unknown utterances: {extra[:5]}")
    for utt in sorted(set(refs) - set(preds)):
        print(f"warning: no predictions for utterance {utt}; counting zero detections",
              file=sys.stderr)
        preds[utt] = BoundaryList(np.array([]), utterance_id=utt)

    report = evaluate_corpus(preds, refs, args.tolerance_ms / 1000.0,
                             aggregate=args.aggregate)
    sys.stdout.write(format_report(report))
    if args.out:
        write_report(Path(args.out), report)
    return 0


_SWEEP_DEFAULTS = {
    "aug_radius": ["0", "1", "2", "3"],
    "selection": ["first", "mid", "last"],
    "tolerance": ["10", "20", "30", "40"],
}


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    if args.values is None:
        values = _SWEEP_DEFAULTS[args.axis]
    else:
        values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise InputError("empty sweep value list")

    corpus = load_corpus(cfg.corpus_dir)
    refs = reference_boundaries(corpus, args.split)
    rows = []

    def _score(cfg_run: RunConfig, params, stats, tolerance_s: float,
               selection: SelectionStrategy):
        samples = build_samples(corpus, args.split, stats, cfg_run.frame_ms,
                                cfg_run.aggregation)
        boundaries = {}
        for s in samples:
            logits = predict(params, s.features, utterance_id=s.utterance_id)
            labels = decode(softmax(logits), s.labels.valid_frames, s.features.frame_len)
            idx = collapse_clusters(labels, selection)
            boundaries[s.utterance_id] = frames_to_times(
                idx, s.features.frame_len, s.sample_rate, origin=cfg_run.origin,
                utterance_id=s.utterance_id)
        return evaluate_corpus(boundaries, refs, tolerance_s, aggregate=cfg.aggregate)

    if args.axis == "aug_radius":
        for v in values:
            cfg_run = cfg.with_aug_radius(int(v))
            params, stats = _train(cfg_run, corpus, None)
            rows.append((v, _score(cfg_run, params, stats, cfg.tolerance_s, cfg.selection)))
    elif args.axis == "selection":
        params, stats = _train(cfg, corpus, None)
        for v in values:
            rows.append((v, _score(cfg, params, stats, cfg.tolerance_s,
                                   SelectionStrategy.parse(v))))
    else:  # tolerance, in ms
        params, stats = _train(cfg, corpus, None)
        for v in values:
            rows.append((v, _score(cfg, params, stats, float(v) / 1000.0, cfg.selection)))

    out_path = Path(args.out) if args.out else cfg.out_dir / f"sweep_{args.axis}.csv"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    header = f"axis,value,{report_csv_header()}"
    lines = [header] + [f"{args.axis},{v},{report_csv_row(r)}" for v, r in rows]
    with atomic_write(out_path) as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "prepare": cmd_prepare,
    "train": cmd_train,
    "segment": cmd_segment,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingDivergedError as exc:
        print(f"training failure: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
