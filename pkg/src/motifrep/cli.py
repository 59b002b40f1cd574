"""Command-line surface over the whole pipeline.

Subcommands: synth-corpus, ingest, build-dataset, train, generate, classify,
evaluate, serve. Every failure exits non-zero with a one-line message.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import __version__


def _fail(message: str) -> "NoReturn":  # noqa: F821 - py3.10 typing
    print(f"error: {message}", file=sys.stderr)
    raise SystemExit(1)


def _parse_label_list(spec: str):
    """Parse 'StR,TrR:-2,SyR' into (labels, t-list)."""
    from .rules import TRAINABLE_TYPES, parse_type

    labels, ts = [], []
    for token in spec.split(","):
        token = token.strip()
        name, _, t_part = token.partition(":")
        label = parse_type(name)  # raises ValueError on junk
        if label not in TRAINABLE_TYPES:
            raise ValueError(f"label {name!r} is not generatable")
        labels.append(label)
        ts.append(int(t_part) if t_part else None)
    if not labels:
        raise ValueError("empty label list")
    return tuple(labels), tuple(ts)


def _load_motif_json(path: str):
    from .vocab import TokenMatrix

    with open(path) as fh:
        return TokenMatrix.from_json_dict(json.load(fh))


# ---------------------------------------------------------------------------
# subcommands

def cmd_synth_corpus(args) -> int:
    from .midi_io import write_midi_file
    from .synthetic import synthetic_corpus

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    corpus = synthetic_corpus(songs_per_type=args.songs_per_type, seed=args.seed)
    for song_id, seq in corpus:
        write_midi_file(seq, out / f"{song_id}.mid")
    print(f"wrote {len(corpus)} songs to {out}")
    return 0


def cmd_ingest(args) -> int:
    from .chords import slot_chords
    from .midi_io import parse_midi_file
    from .notes import quantize, segment_bars
    from .vocab import tokenize

    midi_dir = Path(args.midi_dir)
    files = sorted(midi_dir.glob("*.mid")) + sorted(midi_dir.glob("*.midi"))
    if not files:
        _fail(f"no MIDI files under {midi_dir}")
    count = 0
    with open(args.output, "w") as fh:
        for path in files:
            try:
                seq = quantize(parse_midi_file(path))
            except ValueError as e:
                _fail(f"{path.name}: {e}")
            for motif in segment_bars(seq):
                tm = tokenize(
                    motif,
                    tempo=seq.tempo_at(motif.bar_index * seq.ticks_per_bar),
                    chords=slot_chords(motif),
                )
                fh.write(
                    json.dumps(
                        tm.to_json_dict(song_id=path.stem, bar_index=motif.bar_index),
                        separators=(",", ":"),
                    )
                    + "\n"
                )
                count += 1
    print(f"wrote {count} motifs to {args.output}")
    return 0


def _songs_from_motif_dump(path: str):
    """Rebuild per-song note sequences from an ingest dump."""
    from .notes import Note, NoteSequence
    from .vocab import TokenMatrix, detokenize, motif_tempo

    by_song: dict[str, list] = {}
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            by_song.setdefault(d["song_id"], []).append(d)
    corpus = []
    tpq = 480
    bar_ticks = 4 * tpq
    for song_id, dumps in sorted(by_song.items()):
        notes = []
        tempo = 120.0
        for d in sorted(dumps, key=lambda x: x["bar_index"]):
            tm = TokenMatrix.from_json_dict(d)
            if d["bar_index"] == min(x["bar_index"] for x in dumps):
                tempo = motif_tempo(tm)
            bar = detokenize(tm, ticks_per_quarter=tpq)
            offset = d["bar_index"] * bar_ticks
            notes.extend(
                Note(n.pitch, n.onset + offset, n.duration, n.velocity)
                for n in bar.notes.notes
            )
        corpus.append(
            (
                song_id,
                NoteSequence(
                    notes=tuple(notes), ticks_per_quarter=tpq, tempo_events=((0, tempo),)
                ),
            )
        )
    return corpus


def cmd_build_dataset(args) -> int:
    from .dataset import BuildConfig, build_dataset, write_dataset

    config = BuildConfig.from_file(args.config) if args.config else BuildConfig()
    corpus = _songs_from_motif_dump(args.motifs)
    if not corpus:
        _fail(f"no motifs in {args.motifs}")
    result = build_dataset(corpus, config)
    try:
        train_m, test_m = write_dataset(args.output, result, config)
    except ValueError as e:
        _fail(str(e))
    print(
        f"train {sum(train_m.counts.values())} samples, "
        f"test {sum(test_m.counts.values())} samples -> {args.output}"
    )
    return 0


def cmd_train(args) -> int:
    from .dataset import read_jsonl
    from .model import ModelConfig, save_checkpoint, train
    from .model.training import TrainingDivergedError

    config = ModelConfig.from_file(args.config) if args.config else ModelConfig()
    samples = read_jsonl(Path(args.dataset) / "train.jsonl")
    if not samples:
        _fail("training set is empty")
    try:
        state, log = train(samples, config, args.variant)
    except TrainingDivergedError as e:
        _fail(str(e))
    save_checkpoint(state, args.output)
    log_path = Path(args.output).with_suffix(".log.csv")
    log.write_csv(log_path)
    print(f"trained {state.step} steps (variant {args.variant}) -> {args.output}")
    print(f"loss trace -> {log_path}")
    return 0


def cmd_generate(args) -> int:
    from .generate import GenerationRequest, generate_piece, render_midi, write_piece_json
    from .model import load_checkpoint

    try:
        labels, ts = _parse_label_list(args.labels)
    except ValueError as e:
        _fail(str(e))
    model = load_checkpoint(args.model) if args.model else None
    motif = _load_motif_json(args.input)
    try:
        request = GenerationRequest(
            motif=motif,
            labels=labels,
            t=ts,
            seed=args.seed,
            chaining=not args.no_chaining,
        )
        piece = generate_piece(request, model)
    except ValueError as e:
        _fail(str(e))
    render_midi(piece, args.output)
    if args.json_out:
        write_piece_json(piece, args.json_out)
    print(f"wrote {len(piece.motifs)}-motif piece to {args.output}")
    return 0


def cmd_classify(args) -> int:
    from .notes import EmptyMotifError
    from .rules import classify, infer_pair_key
    from .vocab import detokenize

    a = detokenize(_load_motif_json(args.motif_a))
    b = detokenize(_load_motif_json(args.motif_b), bar_index=1)
    try:
        label = classify(a, b, infer_pair_key(a, b))
    except EmptyMotifError as e:
        _fail(str(e))
    print(label.variant.value)
    return 0


def cmd_evaluate(args) -> int:
    from .dataset import read_jsonl
    from .evaluate import evaluate_variant, write_report
    from .model import load_checkpoint

    model = load_checkpoint(args.model)
    samples = read_jsonl(Path(args.dataset) / "test.jsonl")
    if not samples:
        _fail("test set is empty")
    if args.limit:
        samples = samples[: args.limit]
    motifs = [s.input for s in samples]
    report = evaluate_variant(args.variant, model, motifs, seed=args.seed)
    write_report(report, args.output)
    print(report.table())
    print(f"report -> {args.output}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig.from_file(args.config) if args.config else ServiceConfig()
    if args.checkpoint:
        config = config.with_checkpoint(args.checkpoint)
    app = create_app(config)
    host, _, port = config.bind.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8571))
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motifrep",
        description="Detect, label, learn, and generate motif-level music repetitions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-corpus", help="write the bundled synthetic corpus as MIDI files")
    p.add_argument("output", help="output directory")
    p.add_argument("--songs-per-type", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth_corpus)

    p = sub.add_parser("ingest", help="parse, quantize, segment, and tokenize a MIDI directory")
    p.add_argument("midi_dir")
    p.add_argument("-o", "--output", required=True, help="motifs JSONL path")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-dataset", help="pair and classify motifs into a labeled dataset")
    p.add_argument("motifs", help="motifs JSONL from ingest")
    p.add_argument("-c", "--config", help="TOML/JSON build config")
    p.add_argument("-o", "--output", required=True, help="dataset directory")
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("train", help="train a model on a dataset directory")
    p.add_argument("dataset")
    p.add_argument("-c", "--config", help="TOML/JSON model config")
    p.add_argument("-o", "--output", required=True, help="checkpoint path")
    p.add_argument(
        "--variant",
        choices=["V", "R", "RR"],
        default="RR",
        help="V trains without the repetition matrix; R and RR train with it "
        "(they differ only at generation time)",
    )
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="generate repetitions from a motif JSON")
    p.add_argument("-m", "--model", help="checkpoint path (optional for StR/TrR)")
    p.add_argument("-i", "--input", required=True, help="motif JSON file")
    p.add_argument("-l", "--labels", required=True, help="e.g. StR,TrR:-2,SyR")
    p.add_argument("-o", "--output", required=True, help="output MIDI path")
    p.add_argument("--json-out", help="also write the piece as JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-chaining", action="store_true", help="generate every step from the original motif")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("classify", help="classify the repetition type of two motif JSON files")
    p.add_argument("-a", "--motif-a", required=True)
    p.add_argument("-b", "--motif-b", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="matching-rate evaluation on a dataset's test split")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("-d", "--dataset", required=True)
    p.add_argument("--variant", choices=["V", "R", "RR"], default="RR")
    p.add_argument("-o", "--output", required=True, help="report JSON path")
    p.add_argument("--limit", type=int, default=0, help="cap the number of test motifs")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="run the HTTP service for the composer UI")
    p.add_argument("-c", "--config", help="TOML/JSON service config")
    p.add_argument("--checkpoint", help="override the checkpoint path")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    warnings.simplefilter("default")
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    raise SystemExit(main())
