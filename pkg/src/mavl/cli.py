"""Command-line interface.

Four subcommands cover the experimental workflows:

    mavl translate --dataset corpus.json --target-lang KO --mock-script s.json
    mavl evaluate  --dataset corpus.json --hypotheses runs/.../hypotheses.jsonl
    mavl ablate    --dataset corpus.json --mock-script s.json --grid stages
    mavl stats     --dataset corpus.json

Flags may also come from a config file (``--config``) holding one KEY=VALUE
pair per line, with ``#`` comments; explicit command-line flags win over file
values.  Credentials are never accepted as flags or file values: remote
providers read their key from the environment variable named by
``--api-key-env``.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import (
    ConfigError,
    DatasetParseError,
    DatasetValidationError,
    EmptyLineError,
    MavlError,
    MissingRuleTableError,
    NumberRangeError,
    ProviderError,
)
from .harness import (
    HypothesisSet,
    RunConfig,
    ThresholdExceededError,
    cmd_ablate,
    cmd_evaluate,
    cmd_stats,
    cmd_translate,
    _load_dataset,
)
from .languages import Language
from .metrics import ALL_COMPONENTS
from .pipeline import Modality, PipelineVariant, PromptStyle
from .reports import render_report_table, report_to_json, rows_to_csv

__all__ = ["main", "build_parser"]


VARIANT_CHOICES = {
    "full": dict(use_syllable_list=True, use_refine=True, style=PromptStyle.STAGED),
    "no-list": dict(use_syllable_list=False, use_refine=True, style=PromptStyle.STAGED),
    "no-refine": dict(use_syllable_list=True, use_refine=False, style=PromptStyle.STAGED),
    "minimal": dict(use_syllable_list=False, use_refine=False, style=PromptStyle.STAGED),
    "direct": dict(use_syllable_list=False, use_refine=False, style=PromptStyle.DIRECT),
}

_MODALITY_TOKENS = {
    "t": Modality.TEXT,
    "text": Modality.TEXT,
    "a": Modality.AUDIO,
    "audio": Modality.AUDIO,
    "v": Modality.VIDEO,
    "video": Modality.VIDEO,
}


def parse_modalities(spec: str) -> frozenset:
    mods = {Modality.TEXT}
    for token in spec.replace(",", "+").split("+"):
        token = token.strip().lower()
        if not token:
            continue
        if token not in _MODALITY_TOKENS:
            raise ConfigError(f"unknown modality {token!r} (use t, a, v)")
        mods.add(_MODALITY_TOKENS[token])
    return frozenset(mods)


def _parse_language(value: str) -> Language:
    try:
        return Language.parse(value)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config_file(path: str) -> dict:
    """KEY=VALUE per line; keys match long flag names (hyphens optional)."""
    values: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(
                        f"{path}:{lineno}: expected KEY=VALUE, got {line!r}"
                    )
                key, _, value = line.partition("=")
                values[key.strip().lower().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mavl",
        description="Singable lyrics translation: pipeline, metrics, dataset tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, *, provider: bool = True) -> None:
        p.add_argument("--dataset", required=True, help="path to the dataset JSON")
        p.add_argument("--config", help="KEY=VALUE file with flag defaults")
        p.add_argument("--source-lang", default="EN")
        p.add_argument(
            "--target-lang",
            action="append",
            default=None,
            help="target language code; repeat for several",
        )
        p.add_argument("--variant", choices=sorted(VARIANT_CHOICES), default="full")
        p.add_argument(
            "--modalities", default="t", help="modality set, e.g. t, t+a, t+a+v"
        )
        p.add_argument("--beta", type=float, default=2.0)
        p.add_argument("--out", default="runs", help="output root directory")
        p.add_argument("--parallelism", type=int, default=1)
        p.add_argument("--max-reprompts", type=int, default=2)
        p.add_argument("--order-seed", type=int, default=None)
        p.add_argument("--failure-threshold", type=float, default=0.5)
        p.add_argument(
            "--format", choices=["csv", "json", "table"], default="table",
            dest="fmt",
        )
        p.add_argument(
            "--components",
            default="syllabic,semantic,phonetic",
            help="comma-separated metric components to compute",
        )
        if provider:
            p.add_argument("--provider", choices=["mock", "remote"], default="mock")
            p.add_argument("--mock-script", default=None)
            p.add_argument("--endpoint", default=None)
            p.add_argument("--model-id", default=None)
            p.add_argument("--api-key-env", default="MAVL_API_KEY")

    p_translate = sub.add_parser("translate", help="translate dataset lines")
    add_common(p_translate)

    p_evaluate = sub.add_parser("evaluate", help="score a hypothesis set")
    add_common(p_evaluate)
    p_evaluate.add_argument("--hypotheses", help="hypotheses.jsonl from a translate run")
    p_evaluate.add_argument(
        "--from-dubbed",
        action="store_true",
        help="score the dubbed reference lines themselves (human baseline)",
    )

    p_ablate = sub.add_parser("ablate", help="run a variant comparison grid")
    add_common(p_ablate)
    p_ablate.add_argument("--grid", choices=["stages", "modalities"], default="stages")

    p_stats = sub.add_parser("stats", help="dataset summary table")
    p_stats.add_argument("--dataset", required=True)
    p_stats.add_argument(
        "--format", choices=["json", "table"], default="table", dest="fmt"
    )

    return parser


def _known_dests(parser: argparse.ArgumentParser) -> set[str]:
    # argparse has no public way to enumerate destinations across subcommands
    dests: set[str] = set()
    stack = [parser]
    while stack:
        current = stack.pop()
        for action in current._actions:
            dests.add(action.dest)
            if isinstance(action, argparse._SubParsersAction):
                stack.extend(action.choices.values())
    return dests - {"help", "command"}


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    path = argv[argv.index("--config") + 1]
    values = load_config_file(path)
    known = _known_dests(parser)
    defaults = {}
    for key, value in values.items():
        if key == "target_lang":
            defaults["target_lang"] = [v.strip() for v in value.split(",") if v.strip()]
        elif key in known:
            defaults[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    # subcommands parse into their own namespace, so the file-provided
    # defaults must be planted on every parser in the tree to take effect
    stack = [parser]
    while stack:
        current = stack.pop()
        current.set_defaults(**defaults)
        for action in current._actions:
            if isinstance(action, argparse._SubParsersAction):
                stack.extend(action.choices.values())
    return argv


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.variant not in VARIANT_CHOICES:
        raise ConfigError(f"unknown variant {args.variant!r}")
    variant_fields = dict(VARIANT_CHOICES[args.variant])
    variant_fields["modalities"] = parse_modalities(args.modalities)
    components = frozenset(
        token.strip() for token in str(args.components).split(",") if token.strip()
    )
    unknown = components - ALL_COMPONENTS
    if unknown:
        raise ConfigError(f"unknown metric components: {sorted(unknown)}")
    targets = tuple(
        _parse_language(code) for code in (args.target_lang or [])
    )
    return RunConfig(
        dataset_path=args.dataset,
        source_lang=_parse_language(args.source_lang),
        target_langs=targets,
        variant=PipelineVariant(**variant_fields),
        provider=getattr(args, "provider", "mock"),
        mock_script=getattr(args, "mock_script", None),
        endpoint=getattr(args, "endpoint", None),
        model_id=getattr(args, "model_id", None),
        api_key_env=getattr(args, "api_key_env", "MAVL_API_KEY"),
        components=components,
        beta=float(args.beta),
        out_dir=args.out,
        parallelism=int(args.parallelism),
        max_reprompts=int(args.max_reprompts),
        order_seed=None if args.order_seed is None else int(args.order_seed),
        failure_threshold=float(args.failure_threshold),
        fmt=args.fmt,
    )


def _run_translate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    outcome = cmd_translate(config)
    for warning in outcome.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"run directory: {outcome.run_dir}")
    print(f"translated lines: {len(outcome.hypotheses.entries)}")
    print(f"failed lines: {len(outcome.failures)}")
    return 0


def _load_hypotheses(args: argparse.Namespace, config: RunConfig) -> HypothesisSet:
    if args.from_dubbed and args.hypotheses:
        raise ConfigError("pass either --hypotheses or --from-dubbed, not both")
    if args.from_dubbed:
        dataset = _load_dataset(config.dataset_path)
        languages = list(config.target_langs) or [
            lang for lang in Language if lang is not config.source_lang
        ]
        return HypothesisSet.from_dubbed(dataset, languages)
    if not args.hypotheses:
        raise ConfigError("evaluate needs --hypotheses or --from-dubbed")
    try:
        with open(args.hypotheses, encoding="utf-8") as fh:
            return HypothesisSet.from_jsonl(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read hypotheses: {exc}") from exc


def _run_evaluate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    config.require_paths()
    hyp = _load_hypotheses(args, config)
    outcome = cmd_evaluate(config, hyp)
    if config.fmt == "csv":
        sys.stdout.write(rows_to_csv(outcome.rows))
    elif config.fmt == "json":
        if outcome.report is not None:
            sys.stdout.write(report_to_json(outcome.report))
        else:
            sys.stdout.write("{}\n")
    else:
        if outcome.report is not None:
            sys.stdout.write(render_report_table(outcome.report))
        print(f"scored rows: {len(outcome.rows) - outcome.skipped}")
        print(f"skipped rows: {outcome.skipped}")
    print(f"run directory: {outcome.run_dir}", file=sys.stderr)
    return 0


def _run_ablate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    outcome = cmd_ablate(config, grid=args.grid)
    if config.fmt == "json":
        sys.stdout.write(
            json.dumps(outcome.summaries, ensure_ascii=False, indent=2, sort_keys=True)
            + "\n"
        )
    else:
        sys.stdout.write(outcome.table)
    print(f"run directory: {outcome.run_dir}", file=sys.stderr)
    return 0


def _run_stats(args: argparse.Namespace) -> int:
    stats, table = cmd_stats(args.dataset)
    if args.fmt == "json":
        payload = {
            lang.value: {
                "songs": per.songs,
                "sections": per.sections,
                "lines": per.lines,
            }
            for lang, per in sorted(
                stats.per_language.items(), key=lambda kv: kv[0].value
            )
        }
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(table)
    return 0


_DISPATCH = {
    "translate": _run_translate,
    "evaluate": _run_evaluate,
    "ablate": _run_ablate,
    "stats": _run_stats,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return _DISPATCH[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        DatasetParseError,
        DatasetValidationError,
        EmptyLineError,
        NumberRangeError,
        MissingRuleTableError,
    ) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except ThresholdExceededError as exc:
        print(f"failure threshold exceeded: {exc}", file=sys.stderr)
        return 5
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return 4
    except MavlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
