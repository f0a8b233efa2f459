"""Command-line driver: analyze, eval, dump-ir, grammar.

Exit status: 0 clean, 1 at least one high finding (analyze), 2 operational error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .config import AnalysisConfig
from .errors import FlashscanError
from .frontend import subset_grammar
from .ir import export_ir_json
from .pipeline import analyze_ir, load_contracts, stage_documents
from .reasoning import EngineConfig
from .report import build_report, compute_metrics, dumps, high_findings, report_text

EXIT_CLEAN, EXIT_FINDINGS, EXIT_ERROR = 0, 1, 2
LABELS_FILE = "labels.json"


def write_atomic(path: Path, text: str) -> None:
    """Write through a temp file in the same directory, then rename over the target."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _engine(args: argparse.Namespace) -> EngineConfig:
    e = EngineConfig(mode=args.engine, endpoint=args.endpoint, model=args.model,
                     api_key_env=args.api_key_env, timeout_secs=args.timeout_secs,
                     max_retries=args.max_retries, batch_size=args.batch_size,
                     concurrency=args.concurrency)
    e.validate()
    return e


def _analysis(args: argparse.Namespace) -> AnalysisConfig:
    if args.config:
        p = Path(args.config)
        if not p.is_file():
            raise FlashscanError("file-not-found", f"no such file: {p}", str(p))
        try:
            cfg = AnalysisConfig.from_json(json.loads(p.read_text(encoding="utf-8")))
        except (ValueError, TypeError) as e:
            raise FlashscanError("bad-config", str(e), str(p)) from e
    else:
        cfg = AnalysisConfig()
    if args.max_paths is not None:
        cfg.max_paths_per_pair = args.max_paths
    if args.max_iterations is not None:
        cfg.max_iterations = args.max_iterations
    return cfg


def _echo(args: argparse.Namespace, engine: EngineConfig, cfg: AnalysisConfig) -> dict:
    return {"engine": engine.to_json(), "analysis": cfg.to_json(), "stageDump": bool(args.stage_dump)}


def analyze_file(path: Path, cfg: AnalysisConfig, engine: EngineConfig, echo: dict,
                 stage_dir: Optional[Path] = None) -> dict:
    """File-level report document: one entry per concrete contract in ``path``."""
    contracts, diags = load_contracts(path)
    reports = []
    for ir in contracts:
        a = analyze_ir(ir, cfg, engine)
        reports.append(build_report(a, echo))
        if stage_dir is not None:
            for name, doc in stage_documents(a).items():
                write_atomic(stage_dir / ir.name / name, dumps(doc))
    return {"reportVersion": 1, "input": str(path), "config": echo,
            "diagnostics": diags, "contracts": reports}


def cmd_analyze(args: argparse.Namespace) -> int:
    engine, cfg = _engine(args), _analysis(args)
    echo = _echo(args, engine, cfg)
    run_dir = Path(args.run_dir)
    docs = []
    for raw in args.inputs:
        stage_dir = run_dir / "stages" / Path(raw).stem if args.stage_dump else None
        docs.append(analyze_file(Path(raw), cfg, engine, echo, stage_dir))
    doc = docs[0] if len(docs) == 1 else {"reportVersion": 1, "config": echo, "files": docs}
    text = report_text({"contracts": [c for d in docs for c in d["contracts"]]}) if args.text else dumps(doc)
    if args.output:
        write_atomic(Path(args.output), text)
    else:
        sys.stdout.write(text)
    highs = sum(high_findings(c) for d in docs for c in d["contracts"])
    return EXIT_FINDINGS if highs else EXIT_CLEAN


def bundled_corpus() -> Path:
    return Path(str(resources.files("flashscan") / "corpus"))


def cmd_eval(args: argparse.Namespace) -> int:
    engine, cfg = _engine(args), _analysis(args)
    if engine.mode == "remote" and not args.allow_remote_eval:
        raise FlashscanError("bad-config", "remote engine under eval needs --allow-remote-eval")
    corpus = Path(args.corpus) if args.corpus else bundled_corpus()
    labels_path = Path(args.labels) if args.labels else corpus / LABELS_FILE
    if not labels_path.is_file():
        raise FlashscanError("file-not-found", f"no labels manifest at {labels_path}", str(labels_path))
    labels = json.loads(labels_path.read_text(encoding="utf-8"))
    files = sorted(p for p in corpus.iterdir()
                   if p.suffix in (".sol", ".json") and p.name != LABELS_FILE and p != labels_path)
    echo = _echo(args, engine, cfg)
    run_dir = Path(args.run_dir)

    def one(p: Path):
        if p.name not in labels:
            return p.name, None, {"code": "label-missing", "message": f"no label for {p.name}"}
        try:
            stage_dir = run_dir / "stages" / p.stem if args.stage_dump else None
            return p.name, analyze_file(p, cfg, engine, echo, stage_dir), None
        except FlashscanError as e:
            return p.name, None, {"code": e.code, "message": e.message}

    if args.concurrency > 1:
        with ThreadPoolExecutor(max_workers=args.concurrency) as pool:
            results = list(pool.map(one, files))
    else:
        results = [one(p) for p in files]

    reports, skipped = {}, []
    for name, rep, err in results:
        if err is not None:
            skipped.append({"contract": name, **err})
            print(f"{name}: {err['code']}: {err['message']}", file=sys.stderr)
            continue
        reports[name] = rep
        write_atomic(run_dir / "reports" / f"{Path(name).stem}.json", dumps(rep))
    if not reports:
        raise FlashscanError("file-not-found", f"no analyzable contracts in {corpus}")
    metrics = compute_metrics(labels, reports)
    per_contract = {name: {"label": labels[name], "high": sum(high_findings(c) for c in rep["contracts"])}
                    for name, rep in sorted(reports.items())}
    doc = {"metricsVersion": 1, "metrics": metrics.to_json(), "contracts": per_contract,
           "skipped": skipped, "config": echo}
    write_atomic(run_dir / "metrics.json", dumps(doc))
    sys.stdout.write(metrics.table())
    return EXIT_CLEAN


def cmd_dump_ir(args: argparse.Namespace) -> int:
    contracts, _ = load_contracts(Path(args.input))
    docs = [export_ir_json(ir) for ir in contracts]
    text = dumps(docs[0] if len(docs) == 1 else docs) if docs else "[]\n"
    if args.output:
        write_atomic(Path(args.output), text)
    else:
        sys.stdout.write(text)
    return EXIT_CLEAN


def cmd_grammar(args: argparse.Namespace) -> int:
    rows = subset_grammar()
    if args.json:
        sys.stdout.write(json.dumps(rows, indent=2) + "\n")
    else:
        for r in rows:
            mark = "yes" if r["supported"] else "no"
            note = f"  ({r['note']})" if r["note"] else ""
            sys.stdout.write(f"{r['category']:<12} {mark:<4} {r['name']}{note}\n")
    return EXIT_CLEAN


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--engine", choices=("offline", "remote"), default="offline")
    p.add_argument("--endpoint", help="chat-completions URL for the remote engine")
    p.add_argument("--model", default="default")
    p.add_argument("--api-key-env", metavar="NAME", help="environment variable holding the API key")
    p.add_argument("--timeout-secs", type=float, default=60.0)
    p.add_argument("--max-retries", type=int, default=2)
    p.add_argument("--batch-size", type=int, default=8, help="filtering groups per request (1-8)")
    p.add_argument("--concurrency", type=int, default=4)
    p.add_argument("--config", help="JSON analysis configuration; list values replace the defaults")
    p.add_argument("--max-paths", type=int, help="path cap per (source, sink) pair")
    p.add_argument("--max-iterations", type=int, help="fixpoint iteration cap")
    p.add_argument("--stage-dump", action="store_true", help="write per-stage documents under RUN_DIR/stages")
    p.add_argument("--run-dir", default="flashscan-run")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flashscan", description="Price-manipulation detector for Solidity contracts.")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="analyze Solidity files or IR documents")
    a.add_argument("inputs", nargs="+")
    a.add_argument("-o", "--output")
    a.add_argument("--text", action="store_true", help="human-readable output instead of JSON")
    _common(a)
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("eval", help="score a labeled corpus")
    e.add_argument("corpus", nargs="?", help="corpus directory (default: the bundled mini-corpus)")
    e.add_argument("--labels", help="labels manifest (default: CORPUS/labels.json)")
    e.add_argument("--allow-remote-eval", action="store_true")
    _common(e)
    e.set_defaults(func=cmd_eval)

    d = sub.add_parser("dump-ir", help="print the IR interchange document")
    d.add_argument("input")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_dump_ir)

    g = sub.add_parser("grammar", help="list the supported Solidity subset")
    g.add_argument("--json", action="store_true")
    g.set_defaults(func=cmd_grammar)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_CLEAN
    try:
        return args.func(args)
    except FlashscanError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
