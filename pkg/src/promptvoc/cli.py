"""Command-line surface: feature extraction, tokenizer fitting, training,
re-synthesis, conversion and objective evaluation.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numeric
failure.  Machine-readable results go to stdout as one JSON record per
command; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import features as feat
from .config import (
    ModelConfig,
    TrainConfig,
    desk_model_config,
    desk_train_config,
    dump_config,
    load_config,
)
from .data import Manifest, SyntheticFeatureProvider, build_manifest
from .dsp import InvalidDesignError, UndefinedMetricError, load_wav, save_wav
from .features import FormatError
from .generator import count_params
from .metrics import eval_pcorr, secs
from .model import converter_from_checkpoint
from .trainer import NonFiniteLossError, Trainer


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(record: dict) -> None:
    print(json.dumps(record))


def _configs(args) -> tuple[ModelConfig, TrainConfig]:
    if getattr(args, "config", None):
        model_cfg, train_cfg = load_config(args.config)
    elif getattr(args, "desk", False):
        model_cfg, train_cfg = desk_model_config(), desk_train_config()
    else:
        model_cfg, train_cfg = ModelConfig(), TrainConfig()
    if getattr(args, "seed", None) is not None:
        train_cfg.seed = args.seed
    if getattr(args, "deterministic", False):
        train_cfg.deterministic = True
    return model_cfg, train_cfg


def _save_tokenizer(path, tok: feat.SyntheticTokenizer) -> None:
    import dataclasses

    meta = {
        "mel_cfg": dataclasses.asdict(tok.mel_cfg),
        "content_dim": tok.content_dim,
        "seed": tok.seed,
        "groups": tok.groups,
    }
    arrays = {f"centroids_{g}": c for g, c in enumerate(tok.centroids)}
    np.savez(path, meta=json.dumps(meta), **arrays)


def _load_tokenizer(path) -> feat.SyntheticTokenizer:
    from .dsp import MelConfig

    data = np.load(path, allow_pickle=False)
    meta = json.loads(str(data["meta"]))
    centroids = [data[f"centroids_{g}"] for g in range(meta["groups"])]
    return feat.SyntheticTokenizer(
        centroids,
        MelConfig(**meta["mel_cfg"]),
        content_dim=meta["content_dim"],
        seed=meta["seed"],
    )


def cmd_fit_tokenizer(args) -> None:
    model_cfg, _ = _configs(args)
    manifest = build_manifest(args.audio_dir, min_s=args.min_s, max_s=args.max_s)
    corpus = [load_wav(e.audio_path, target_rate=model_cfg.sample_rate) for e in manifest]
    tok = feat.fit_synthetic_tokenizer(
        corpus,
        groups=model_cfg.groups,
        codebook_size=model_cfg.codebook_size,
        content_dim=model_cfg.content_dim,
        seed=args.seed if args.seed is not None else 0,
    )
    _save_tokenizer(args.out, tok)
    _emit(
        {
            "tokenizer": args.out,
            "groups": tok.groups,
            "codebook_size": tok.codebook_size,
            "utterances": len(manifest),
        }
    )


def cmd_extract_features(args) -> None:
    model_cfg, _ = _configs(args)
    w = load_wav(args.audio, target_rate=model_cfg.sample_rate)
    record = {"audio": args.audio}
    if args.tokens_out:
        tok = _load_tokenizer(args.tokenizer)
        tokens = feat.tokenize(w, tok)
        feat.write_token_file(args.tokens_out, tokens)
        record["tokens"] = args.tokens_out
        record["frames"] = tokens.frames
    if args.prompt_out:
        extractor = feat.SyntheticPromptExtractor(
            prompt_dim=model_cfg.prompt_dim,
            seed=args.seed if args.seed is not None else 0,
        )
        prompt = extractor.extract(w)
        feat.write_feature_file(args.prompt_out, prompt)
        record["prompt"] = args.prompt_out
        record["prompt_frames"] = int(prompt.shape[0])
    if not args.tokens_out and not args.prompt_out:
        raise UsageError("nothing to do: pass --tokens-out and/or --prompt-out")
    _emit(record)


def cmd_train(args) -> None:
    model_cfg, train_cfg = _configs(args)
    manifest = build_manifest(
        args.data, min_s=train_cfg.min_duration_s, max_s=train_cfg.max_duration_s
    )
    if args.tokenizer:
        tok = _load_tokenizer(args.tokenizer)
    else:
        corpus = [load_wav(e.audio_path, target_rate=model_cfg.sample_rate) for e in manifest]
        tok = feat.fit_synthetic_tokenizer(
            corpus,
            groups=model_cfg.groups,
            codebook_size=model_cfg.codebook_size,
            content_dim=model_cfg.content_dim,
            seed=train_cfg.seed,
        )
    extractor = feat.SyntheticPromptExtractor(
        prompt_dim=model_cfg.prompt_dim, seed=train_cfg.seed
    )
    provider = SyntheticFeatureProvider(tok, extractor)
    if args.resume:
        trainer = Trainer.from_checkpoint(args.resume, manifest, provider, args.workdir)
    else:
        trainer = Trainer(model_cfg, train_cfg, manifest, provider, args.workdir)
    ckpt = trainer.train()
    _emit({"checkpoint": ckpt, "steps": trainer.step})


def cmd_resynth(args) -> None:
    converter = converter_from_checkpoint(args.checkpoint)
    source = load_wav(args.source, target_rate=converter.cfg.sample_rate)
    prompt = (
        load_wav(args.prompt, target_rate=converter.cfg.sample_rate) if args.prompt else None
    )
    out = converter.resynthesize(source, prompt=prompt)
    save_wav(args.out, out)
    _emit({"output": args.out, "samples": len(out), "sample_rate": out.sample_rate})


def cmd_convert(args) -> None:
    converter = converter_from_checkpoint(args.checkpoint, min_reference_s=args.min_reference_s)
    source = load_wav(args.source, target_rate=converter.cfg.sample_rate)
    reference = load_wav(args.reference, target_rate=converter.cfg.sample_rate)
    out = converter.convert(source, reference)
    save_wav(args.out, out)
    _emit({"output": args.out, "samples": len(out), "sample_rate": out.sample_rate})


def cmd_eval_pcorr(args) -> None:
    a = load_wav(args.source)
    b = load_wav(args.converted, target_rate=a.sample_rate)
    _emit({"p_corr": eval_pcorr(a, b)})


def cmd_eval_secs(args) -> None:
    ea = feat.read_feature_file(args.embed_a)
    eb = feat.read_feature_file(args.embed_b)
    # Multi-row files are mean-pooled into a single embedding.
    va = ea.mean(axis=0) if ea.shape[0] > 1 else ea[0]
    vb = eb.mean(axis=0) if eb.shape[0] > 1 else eb[0]
    _emit({"secs": secs(va, vb)})


def cmd_count_params(args) -> None:
    model_cfg, _ = _configs(args)
    _emit({"params": count_params(model_cfg)})


def cmd_dump_config(args) -> None:
    model_cfg, train_cfg = _configs(args)
    sys.stdout.write(dump_config(model_cfg, train_cfg))


def build_parser() -> _Parser:
    parser = _Parser(prog="promptvoc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--desk", action="store_true", help="use the small CPU-scale preset")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--deterministic", action="store_true")

    p = sub.add_parser("fit-tokenizer", help="fit the synthetic stand-in tokenizer")
    p.add_argument("audio_dir")
    p.add_argument("--out", required=True)
    p.add_argument("--min-s", type=float, default=0.1)
    p.add_argument("--max-s", type=float, default=1e9)
    common(p)
    p.set_defaults(func=cmd_fit_tokenizer)

    p = sub.add_parser("extract-features", help="emit token/prompt feature files")
    p.add_argument("audio")
    p.add_argument("--tokenizer")
    p.add_argument("--tokens-out")
    p.add_argument("--prompt-out")
    common(p)
    p.set_defaults(func=cmd_extract_features)

    p = sub.add_parser("train", help="adversarial training")
    p.add_argument("--data", required=True)
    p.add_argument("--workdir", required=True)
    p.add_argument("--tokenizer")
    p.add_argument("--resume", help="checkpoint to resume from")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("resynth", help="re-synthesize a waveform from its own tokens")
    p.add_argument("source")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--prompt", help="optional prompt audio (defaults to the source)")
    common(p)
    p.set_defaults(func=cmd_resynth)

    p = sub.add_parser("convert", help="any-to-any voice conversion")
    p.add_argument("source")
    p.add_argument("reference")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-reference-s", type=float, default=1.0)
    common(p)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("eval-pcorr", help="pitch contour correlation of two files")
    p.add_argument("source")
    p.add_argument("converted")
    common(p)
    p.set_defaults(func=cmd_eval_pcorr)

    p = sub.add_parser("eval-secs", help="speaker embedding cosine similarity")
    p.add_argument("embed_a")
    p.add_argument("embed_b")
    common(p)
    p.set_defaults(func=cmd_eval_secs)

    p = sub.add_parser("count-params", help="trainable parameter count of a config")
    common(p)
    p.set_defaults(func=cmd_count_params)

    p = sub.add_parser("dump-config", help="print all config keys and defaults")
    common(p)
    p.set_defaults(func=cmd_dump_config)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (UndefinedMetricError, NonFiniteLossError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except (FormatError, InvalidDesignError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
