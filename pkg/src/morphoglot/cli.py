"""Command-line entry point.

Subcommands: synth, train-encoder, build-lexicon, train-decoder, gloss,
eval, extend-lexicon, sweep, analogy, flops, serve.  Hyperparameters come
from defaults < config file (``--config`` or $MORPHOGLOT_CONFIG) <
``--profile`` < ``--set field=value`` overrides.  Every artifact gets a
JSON sidecar (``<artifact>.meta.json``) recording the effective
configuration, seed, and command line; binary checkpoints additionally
embed their configuration in their own headers.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import time
from dataclasses import asdict

import numpy as np

from . import __version__
from .analysis import (
    CostModelInput,
    REFERENCE_ANCHORS,
    StackShape,
    TransformationGroup,
    analogy_consistency,
    flops_estimate,
    pca_2d,
)
from .config import RunConfig, load_config_file
from .decoder import DecoderModel, train_decoder
from .encoder import EncoderModel, train_encoder
from .igt import Corpus, ParseDiagnostic, save_corpus
from .lexicon import Lexicon, build_lexicon
from .metrics import corpus_mer, glossing_accuracy, segmentation_scores
from .pipeline import GlossingPipeline, fit_pipeline
from .seeding import sub_seed
from .synth import SynthSpec, generate_corpus, paradigm_grid, split_with_target_oov, standard_spec


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------

_PROFILES = {
    "reference": RunConfig.reference_scale,
    "desk": RunConfig.desk_scale,
    "sweep": lambda: RunConfig.desk_scale(
        enc_d_model=64, enc_d_ff=256, embedding_dim=64,
        dec_d_model=64, dec_d_ff=256,
        enc_epochs=12, dec_epochs=24, enc_batch_size=64,
        enc_target_p_at_1=None, enc_patience=None, dec_patience=None,
        dec_eval_every=4,
    ),
    "default": RunConfig,
}


def add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None,
                        help="config file (default: $MORPHOGLOT_CONFIG when set)")
    parser.add_argument("--profile", choices=sorted(_PROFILES), default="desk",
                        help="base hyperparameter profile (default: desk)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="FIELD=VALUE",
                        help="override a RunConfig field, e.g. --set enc_epochs=10")
    parser.add_argument("--seed", type=int, default=None, help="run seed")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = _PROFILES[args.profile]()
    path = args.config or os.environ.get("MORPHOGLOT_CONFIG")
    if path:
        config = load_config_file(path, base=config)
    values = config.to_dict()
    for item in args.overrides:
        if "=" not in item:
            raise CliError(f"bad --set override {item!r}; expected FIELD=VALUE")
        name, raw = item.split("=", 1)
        name = name.strip()
        if name not in values:
            raise CliError(f"unknown RunConfig field {name!r}")
        from .config import _parse_value
        from dataclasses import fields

        kind = {f.name: str(f.type) for f in fields(RunConfig)}[name]
        values[name] = _parse_value(raw, kind)
    config = RunConfig(**values)
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    return config


def write_meta(artifact_path: str, config: RunConfig | None, extra: dict | None = None) -> None:
    meta = {
        "tool": "morphoglot",
        "version": __version__,
        "command": sys.argv,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    if config is not None:
        meta["config"] = config.to_dict()
        meta["seed"] = config.seed
    if extra:
        meta.update(extra)
    with open(str(artifact_path) + ".meta.json", "w", encoding="utf-8") as handle:
        json.dump(meta, handle, indent=2, sort_keys=True)


def _load(path: str, language: str, split: str) -> Corpus:
    diagnostics: list[ParseDiagnostic] = []
    with open(path, "r", encoding="utf-8") as handle:
        from .igt import parse_corpus

        corpus = parse_corpus(handle, language, split, diagnostics=diagnostics)
    for diagnostic in diagnostics:
        print(f"warning: {path}: rejected block at {diagnostic}", file=sys.stderr)
    if len(corpus) == 0:
        raise CliError(f"{path}: no parseable sentences")
    return corpus


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------


def load_synth_spec(path: str | None, args: argparse.Namespace) -> SynthSpec:
    values = dict(
        stem_count=50, n_slots=2, affixes_per_slot=4, occupancy=0.85,
        sentence_len_min=3, sentence_len_max=6, seed=0, allomorphy=False,
        zipf_exponent=0.0, stem_syllables=1,
    )
    if path:
        parser = configparser.ConfigParser()
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
        if not text.lstrip().startswith("["):
            text = "[synth]\n" + text  # bare key=value files are accepted
        parser.read_string(text)
        if not parser.has_section("synth"):
            raise CliError(f"{path}: missing [synth] section")
        for key, raw in parser.items("synth"):
            if key not in values:
                raise CliError(f"unknown synth key {key!r}")
            current = values[key]
            if isinstance(current, bool):
                values[key] = raw.strip().lower() in ("true", "yes", "on", "1")
            elif isinstance(current, int):
                values[key] = int(raw)
            else:
                values[key] = float(raw)
    for key in values:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return standard_spec(
        stem_count=values["stem_count"],
        n_slots=values["n_slots"],
        affixes_per_slot=values["affixes_per_slot"],
        occupancy=values["occupancy"],
        sentence_length=(values["sentence_len_min"], values["sentence_len_max"]),
        seed=values["seed"],
        allomorphy=values["allomorphy"],
        zipf_exponent=values["zipf_exponent"],
        stem_syllables=values["stem_syllables"],
    )


def add_synth_spec_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spec", default=None, help="synth spec file ([synth] section)")
    parser.add_argument("--stem-count", dest="stem_count", type=int, default=None)
    parser.add_argument("--n-slots", dest="n_slots", type=int, default=None)
    parser.add_argument("--affixes-per-slot", dest="affixes_per_slot", type=int, default=None)
    parser.add_argument("--occupancy", type=float, default=None)
    parser.add_argument("--sentence-len-min", dest="sentence_len_min", type=int, default=None)
    parser.add_argument("--sentence-len-max", dest="sentence_len_max", type=int, default=None)
    parser.add_argument("--synth-seed", dest="seed", type=int, default=None)
    parser.add_argument("--allomorphy", dest="allomorphy", action="store_const", const=True,
                        default=None)
    parser.add_argument("--zipf-exponent", dest="zipf_exponent", type=float, default=None)
    parser.add_argument("--stem-syllables", dest="stem_syllables", type=int, default=None)


def cmd_synth(args: argparse.Namespace) -> int:
    spec = load_synth_spec(args.spec, args)
    corpus = generate_corpus(spec, args.sentences)
    if args.oov_target is not None:
        result = split_with_target_oov(corpus, args.train_fraction, args.oov_target)
        save_corpus(result.train, args.out_train)
        save_corpus(result.eval, args.out_eval)
        for path in (args.out_train, args.out_eval):
            write_meta(path, None, {"synth_sentences": args.sentences,
                                    "achieved_oov": result.achieved_oov,
                                    "oov_warning": result.warning})
        print(f"train: {len(result.train)} sentences -> {args.out_train}")
        print(f"eval:  {len(result.eval)} sentences -> {args.out_eval}")
        print(f"achieved p_oov: {result.achieved_oov:.6f}"
              + ("  (warning: target missed by > 0.02)" if result.warning else ""))
    else:
        save_corpus(corpus, args.out)
        write_meta(args.out, None, {"synth_sentences": args.sentences})
        print(f"wrote {len(corpus)} sentences -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# training / artifacts
# ---------------------------------------------------------------------------


def cmd_train_encoder(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    train = _load(args.train, args.language, "train")
    dev = _load(args.dev, args.language, "dev") if args.dev else None
    encoder, log = train_encoder(
        train,
        config.encoder_config(),
        dev_corpus=dev,
        prompt_options=config.prompt_options(),
        epochs=config.enc_epochs,
        batch_size=config.enc_batch_size,
        lr=config.enc_lr,
        warmup_steps=config.enc_warmup_steps,
        weight_decay=config.enc_weight_decay,
        seed=config.seed,
        patience=config.enc_patience,
        target_p_at_1=config.enc_target_p_at_1,
    )
    encoder.save(args.out)
    write_meta(args.out, config, {
        "epochs_run": len(log.epoch_losses),
        "best_epoch": log.best_epoch,
        "dev_p_at_1": log.dev_p_at_1,
        "wall_time_s": log.wall_time,
    })
    best = max(log.dev_p_at_1) if log.dev_p_at_1 else float("nan")
    print(f"encoder -> {args.out} ({len(log.epoch_losses)} epochs, "
          f"best dev P@1 {best:.4f}, {log.wall_time:.1f}s)")
    return 0


def cmd_build_lexicon(args: argparse.Namespace) -> int:
    encoder = EncoderModel.load(args.encoder)
    corpus = _load(args.train, args.language, "train")
    lexicon = build_lexicon(encoder, corpus)
    lexicon.save(args.out)
    write_meta(args.out, None, {"entries": len(lexicon)})
    if args.tsv:
        with open(args.tsv, "w", encoding="utf-8") as handle:
            handle.write(lexicon.to_tsv())
    print(f"lexicon -> {args.out} ({len(lexicon)} entries incl. EOS)")
    return 0


def cmd_train_decoder(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    encoder = EncoderModel.load(args.encoder)
    lexicon = Lexicon.load(args.lexicon)
    train = _load(args.train, args.language, "train")
    dev = _load(args.dev, args.language, "dev") if args.dev else None
    decoder, log = train_decoder(
        encoder, lexicon, train, config.decoder_config(),
        dev_corpus=dev,
        epochs=config.dec_epochs,
        batch_size=config.dec_batch_size,
        lr=config.dec_lr,
        weight_decay=config.dec_weight_decay,
        clip_norm=config.dec_clip_norm,
        warmup_steps=config.dec_warmup_steps,
        seed=config.seed,
        patience=config.dec_patience,
        beam_width=config.beam_width,
        eval_every=config.dec_eval_every,
        eval_beam_width=config.dec_eval_beam,
    )
    decoder.save(args.out)
    write_meta(args.out, config, {
        "epochs_run": len(log.epoch_losses),
        "best_epoch": log.best_epoch,
        "dev_mer": log.dev_mer,
        "wall_time_s": log.wall_time,
    })
    best = min(log.dev_mer) if log.dev_mer else float("nan")
    print(f"decoder -> {args.out} ({len(log.epoch_losses)} epochs, "
          f"best dev MER {best:.4f}, {log.wall_time:.1f}s)")
    return 0


def _load_pipeline(args: argparse.Namespace) -> GlossingPipeline:
    if args.model_dir:
        return GlossingPipeline.load_dir(args.model_dir)
    if not (args.encoder and args.lexicon and args.decoder):
        raise CliError("provide --model-dir or all of --encoder/--lexicon/--decoder")
    pipeline = GlossingPipeline(
        EncoderModel.load(args.encoder),
        Lexicon.load(args.lexicon),
        DecoderModel.load(args.decoder),
    )
    return pipeline


def add_model_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model-dir", default=None,
                        help="directory with encoder.mgle/lexicon.mglx/decoder.mgld")
    parser.add_argument("--encoder", default=None)
    parser.add_argument("--lexicon", default=None)
    parser.add_argument("--decoder", default=None)


def cmd_gloss(args: argparse.Namespace) -> int:
    pipeline = _load_pipeline(args)
    beam = args.beam_width
    if args.text is not None:
        words = pipeline.gloss(args.text, args.translation, beam_width=beam)
        for w in words:
            seg = "-".join(w.segments) if w.segments else w.surface
            gloss = "-".join(w.glosses) if w.glosses else w.surface
            print(f"{w.surface}\t{seg}\t{gloss}\t{w.log_prob:.4f}")
        return 0
    if not args.input:
        raise CliError("provide --input CORPUS or --text SENTENCE")
    corpus = _load(args.input, args.language, "test")
    pred, details = pipeline.gloss_corpus(corpus, beam_width=beam)
    save_corpus(pred, args.out)
    write_meta(args.out, None, {"sentences": len(pred), "beam_width": beam or pipeline.beam_width})
    if args.report:
        report = [
            [
                {
                    "surface": w.surface,
                    "segments": w.segments,
                    "glosses": w.glosses,
                    "log_prob": w.log_prob,
                    "alternatives": w.alternatives,
                }
                for w in sentence
            ]
            for sentence in details
        ]
        with open(args.report, "w", encoding="utf-8") as handle:
            json.dump(report, handle, indent=2)
    print(f"glossed {len(pred)} sentences -> {args.out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    gold = _load(args.gold, args.language, "test")
    if args.pred:
        pred = _load(args.pred, args.language, "test")
        gloss = corpus_mer(gold, pred, "gloss")
        seg = corpus_mer(gold, pred, "segment")
        morpheme_acc, word_acc = glossing_accuracy(gold, pred)
        seg_f1, seg_acc = segmentation_scores(gold, pred)
        print(f"gloss MER          {gloss.aggregate:.4f}")
        print(f"segmentation MER   {seg.aggregate:.4f}")
        print(f"morpheme accuracy  {morpheme_acc:.4f}")
        print(f"word accuracy      {word_acc:.4f}")
        print(f"segmentation F1    {seg_f1:.4f}")
        print(f"whole-word acc     {seg_acc:.4f}")
        return 0
    pipeline = _load_pipeline(args)
    settings = ("train", "extended") if args.extended else ("train",)
    reports = pipeline.evaluate(gold, settings, beam_width=args.beam_width)
    for name in settings:
        print(f"--- {name} lexicon ---")
        print(reports[name].to_text())
    if args.extended:
        print(f"delta_mer          {reports['extended'].delta_mer:.4f}")
    if args.out:
        payload = {name: report.to_dict() for name, report in reports.items()}
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
        write_meta(args.out, None, {"gold": args.gold, "settings": list(settings)})
    return 0


def cmd_extend_lexicon(args: argparse.Namespace) -> int:
    encoder = EncoderModel.load(args.encoder)
    lexicon = Lexicon.load(args.lexicon)
    corpus = _load(args.corpus, args.language, "test")
    added = lexicon.extend_with_oracle(corpus, encoder)
    lexicon.save(args.out)
    write_meta(args.out, None, {"added": added, "entries": len(lexicon)})
    print(f"added {added} oracle entries -> {args.out} ({len(lexicon)} total)")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    corpus = _load(args.train, args.language, "train")
    dev = _load(args.dev, args.language, "dev")
    sizes = sorted({int(s) for s in args.sizes.split(",")})
    if any(size > len(corpus) for size in sizes):
        raise CliError(f"sweep size exceeds corpus size {len(corpus)}")
    rows = []
    for size in sizes:
        mers = []
        for seed_index in range(args.seeds):
            rng = np.random.default_rng(sub_seed(config.seed, f"sweep-{seed_index}"))
            order = rng.permutation(len(corpus))  # nested subsets per seed
            subset = Corpus(tuple(corpus.sentences[i] for i in order[:size]), "train")
            run_config = config.replace(seed=sub_seed(config.seed, f"sweep-run-{seed_index}"))
            pipeline, _ = fit_pipeline(subset, run_config, dev_corpus=dev)
            report = pipeline.evaluate(dev, ("train",), with_retrieval=False)["train"]
            mers.append(report.gloss_mer)
            print(f"size {size} seed {seed_index}: dev gloss MER {mers[-1]:.4f}")
        rows.append((size, mers, sum(mers) / len(mers)))
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write("# morphoglot sweep: dev glossing MER vs training sentences\n")
        handle.write(f"# config seed {config.seed}, {args.seeds} seeds per size\n")
        header = ["size"] + [f"mer_seed{i}" for i in range(args.seeds)] + ["mer_mean"]
        handle.write("\t".join(header) + "\n")
        for size, mers, mean in rows:
            handle.write(
                "\t".join([str(size)] + [f"{m:.6f}" for m in mers] + [f"{mean:.6f}"]) + "\n"
            )
    write_meta(args.out, config, {"sizes": sizes, "seeds": args.seeds})
    print(f"sweep -> {args.out}")
    return 0


def cmd_analogy(args: argparse.Namespace) -> int:
    encoder = EncoderModel.load(args.encoder)
    spec = load_synth_spec(args.spec, args)
    grid, raw_groups = paradigm_grid(spec, args.slot, encoder.prompt_options)
    groups = [TransformationGroup(name, tuple(pairs)) for name, pairs in raw_groups]
    lines = ["# group\tpairs\tmean_pairwise_cosine"]
    for group in groups:
        value = analogy_consistency(encoder, group)
        lines.append(f"{group.name}\t{len(group.pairs)}\t{value:.6f}")
        print(lines[-1])
    with open(args.out_groups, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
    write_meta(args.out_groups, None, {"slot": args.slot})

    if args.out_pca:
        words = []
        for sentence in grid:
            from .igt import word_in_context

            words.append(word_in_context(sentence, 0, encoder.prompt_options))
        vectors = encoder.embed_words(words)
        result = pca_2d(vectors)
        with open(args.out_pca, "w", encoding="utf-8") as handle:
            handle.write("# word\tx\ty\n")
            handle.write(f"# explained_variance_ratio\t{result.explained_variance_ratio[0]:.6f}"
                         f"\t{result.explained_variance_ratio[1]:.6f}\n")
            for w, (x, y) in zip(words, result.coordinates):
                handle.write(f"{w.word}\t{x:.6f}\t{y:.6f}\n")
        write_meta(args.out_pca, None, {"slot": args.slot})
    return 0


def cmd_flops(args: argparse.Namespace) -> int:
    inp = CostModelInput(
        encoder=StackShape(args.enc_layers, args.enc_d_model, args.enc_d_ff),
        decoder=StackShape(args.dec_layers, args.dec_d_model, args.dec_d_ff),
        encoder_seq_len=args.enc_seq_len,
        words_per_sentence=args.words_per_sentence,
        morphemes_per_word=args.morphemes_per_word,
        beam_width=args.beam_width_flops,
        decoder_steps=args.decoder_steps,
        cross_attention=args.cross_attention,
        cross_memory_len=args.cross_memory_len or args.enc_seq_len,
    )
    breakdown = flops_estimate(inp)
    print(f"encoder FLOPs/sentence: {breakdown.encoder_total:,}")
    print(f"decoder FLOPs/sentence: {breakdown.decoder_total:,}")
    print(f"total   FLOPs/sentence: {breakdown.sentence_total:,}")
    print()
    print("reference anchors (reported totals under the published workload; "
          "not comparable unless sequence lengths match):")
    for name, anchor in REFERENCE_ANCHORS.items():
        print(f"  {name}: total {anchor['sentence_total']:.3e} "
              f"(encoder {anchor['encoder']:.3e}, decoder {anchor['decoder']:.3e})")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump(breakdown.as_dict(), handle, indent=2)
        write_meta(args.out, None, {"input": asdict(inp)})
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    pipeline = _load_pipeline(args)
    host = args.host or os.environ.get("MORPHOGLOT_HOST", "127.0.0.1")
    port = args.port if args.port is not None else int(os.environ.get("MORPHOGLOT_PORT", "8077"))
    print(f"serving on http://{host}:{port}")
    serve(pipeline, host, port)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morphoglot",
        description="Retrieval-constrained interlinear glossing toolkit",
    )
    parser.add_argument("--version", action="version", version=f"morphoglot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic IGT corpus")
    add_synth_spec_arguments(p)
    p.add_argument("--sentences", type=int, required=True)
    p.add_argument("--out", default="corpus.txt")
    p.add_argument("--oov-target", type=float, default=None,
                   help="also split with this target eval OOV rate")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--out-train", default="train.txt")
    p.add_argument("--out-eval", default="eval.txt")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train-encoder", help="contrastively train the dual encoder")
    add_config_arguments(p)
    p.add_argument("--train", required=True)
    p.add_argument("--dev", default=None)
    p.add_argument("--language", default="und")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_encoder)

    p = sub.add_parser("build-lexicon", help="embed training morphemes into a lexicon")
    p.add_argument("--encoder", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--language", default="und")
    p.add_argument("--out", required=True)
    p.add_argument("--tsv", default=None, help="also write the human-readable export")
    p.set_defaults(func=cmd_build_lexicon)

    p = sub.add_parser("train-decoder", help="train the glossing decoder")
    add_config_arguments(p)
    p.add_argument("--encoder", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--dev", default=None)
    p.add_argument("--language", default="und")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_decoder)

    p = sub.add_parser("gloss", help="gloss a corpus file or one sentence")
    add_model_arguments(p)
    p.add_argument("--input", default=None, help="corpus file to gloss")
    p.add_argument("--text", default=None, help="a single transcription")
    p.add_argument("--translation", default=None)
    p.add_argument("--language", default="und")
    p.add_argument("--beam-width", type=int, default=None)
    p.add_argument("--out", default="predicted.txt")
    p.add_argument("--report", default=None, help="JSON sidecar with scores/alternatives")
    p.set_defaults(func=cmd_gloss)

    p = sub.add_parser("eval", help="score predictions or run the evaluation protocol")
    add_model_arguments(p)
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", default=None, help="predicted corpus file (file-vs-file mode)")
    p.add_argument("--extended", action="store_true",
                   help="also evaluate with the oracle-extended lexicon")
    p.add_argument("--language", default="und")
    p.add_argument("--beam-width", type=int, default=None)
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("extend-lexicon", help="add a corpus's missing morphemes (oracle)")
    p.add_argument("--encoder", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--language", default="und")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extend_lexicon)

    p = sub.add_parser("sweep", help="training-set-size sweep (mean MER over seeds)")
    add_config_arguments(p)
    p.set_defaults(profile="sweep")
    p.add_argument("--train", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--sizes", required=True, help="comma-separated subset sizes")
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--language", default="und")
    p.add_argument("--out", default="sweep.tsv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analogy", help="difference-vector consistency + PCA coordinates")
    add_synth_spec_arguments(p)
    p.add_argument("--encoder", required=True)
    p.add_argument("--slot", type=int, default=0)
    p.add_argument("--out-groups", default="analogy.tsv")
    p.add_argument("--out-pca", default=None)
    p.set_defaults(func=cmd_analogy)

    p = sub.add_parser("flops", help="transformer inference cost model")
    p.add_argument("--enc-layers", type=int, default=2)
    p.add_argument("--enc-d-model", type=int, default=128)
    p.add_argument("--enc-d-ff", type=int, default=512)
    p.add_argument("--enc-seq-len", type=int, default=96)
    p.add_argument("--dec-layers", type=int, default=2)
    p.add_argument("--dec-d-model", type=int, default=128)
    p.add_argument("--dec-d-ff", type=int, default=512)
    p.add_argument("--words-per-sentence", type=int, default=8)
    p.add_argument("--morphemes-per-word", type=int, default=3)
    p.add_argument("--beam-width", dest="beam_width_flops", type=int, default=5)
    p.add_argument("--decoder-steps", type=int, default=None)
    p.add_argument("--cross-attention", action="store_true")
    p.add_argument("--cross-memory-len", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_flops)

    p = sub.add_parser("serve", help="run the HTTP glossing service")
    add_model_arguments(p)
    p.add_argument("--host", default=None, help="bind address (or MORPHOGLOT_HOST)")
    p.add_argument("--port", type=int, default=None, help="port (or MORPHOGLOT_PORT)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
