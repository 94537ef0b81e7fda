"""Command-line entry point: ``mobilicast <command> [options]``.

Exit codes: 0 success, 1 validation error, 2 degraded batch (some
generations failed), 3 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import evaluation as ev
from .backend import DecodingConfig, HttpBackend, MockBackend, MockParams, read_records, run_batch, write_records
from .clustering import flatten, ward_cluster
from .errors import ConfigError, InsufficientData, IoFailure, MobilicastError
from .ingest import dump_json, load_corpus, load_priors, save_corpus, write_text_atomic
from .model import SCHEMES, TYPE6, TYPE11, Corpus, builtin_taxonomy
from .parser import FilterConfig, build_corpus, render_diary_table
from .persona import NHTS_END, NHTS_START, plan_assignments, render_metadata_prompt, render_prompt

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

logger = logging.getLogger("mobilicast")

EXIT_OK, EXIT_INVALID, EXIT_DEGRADED, EXIT_IO = 0, 1, 2, 3


@dataclass
class RunConfig:
    region_id: str = ""
    priors_path: Path | None = None
    date_range: tuple[dt.date, dt.date] = (NHTS_START, NHTS_END)
    count: int = 0
    backend: str = "mock"
    endpoint: str = ""
    model: str = ""
    decoding: DecodingConfig = field(default_factory=DecodingConfig)
    mock_params_path: Path | None = None
    seed: int | None = None
    filters: FilterConfig = field(default_factory=FilterConfig)
    scheme: str = TYPE11
    concurrency_limit: int = 1
    prompt_template: Path | None = None
    max_attempts: int = 5
    backoff_initial: float = 1.0
    timeout: float = 60.0

    @classmethod
    def from_mapping(cls, data: dict[str, Any], base: Path = Path(".")) -> "RunConfig":
        def path(key):
            value = data.get(key)
            return None if value in (None, "") else (base / value)

        http = data.get("http", {})
        try:
            dr = data.get("date_range")
            date_range = (
                (dt.date.fromisoformat(str(dr[0])), dt.date.fromisoformat(str(dr[1])))
                if dr else (NHTS_START, NHTS_END)
            )
            filters = data.get("filters", {})
            return cls(
                region_id=str(data.get("region_id", "")),
                priors_path=path("priors_path"),
                date_range=date_range,
                count=int(data.get("count", 0)),
                backend=str(data.get("backend", "mock")),
                endpoint=str(http.get("endpoint", data.get("endpoint", ""))),
                model=str(http.get("model", data.get("model", ""))),
                decoding=DecodingConfig.from_dict(data.get("decoding")),
                mock_params_path=path("mock_params_path"),
                seed=None if data.get("seed") is None else int(data["seed"]),
                filters=FilterConfig(
                    max_gap_minutes=int(filters.get("max_gap_minutes", 120)),
                    drop_code_97=bool(filters.get("drop_code_97", True)),
                    require_times=bool(filters.get("require_times", True)),
                ),
                scheme=str(data.get("scheme", TYPE11)),
                concurrency_limit=int(data.get("concurrency_limit", 1)),
                prompt_template=path("prompt_template"),
                max_attempts=int(http.get("max_attempts", 5)),
                backoff_initial=float(http.get("backoff_initial", 1.0)),
                timeout=float(http.get("timeout", 60.0)),
            )
        except (TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path | None) -> "RunConfig":
        if path is None:
            return cls()
        p = Path(path)
        try:
            raw = p.read_bytes()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
        try:
            data = tomllib.loads(raw.decode("utf-8")) if p.suffix == ".toml" else json.loads(raw)
        except (ValueError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot parse config {p}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a table/object")
        return cls.from_mapping(data, p.parent)

    def validate_generation(self) -> None:
        if self.count < 1:
            raise ConfigError("count must be at least 1")
        if self.seed is None:
            raise ConfigError("an explicit seed is required")
        if self.date_range[0] > self.date_range[1]:
            raise ConfigError("date_range start is after its end")
        if self.priors_path is None:
            raise ConfigError("priors_path is required")
        if self.backend not in ("mock", "http"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.backend == "http" and not (self.endpoint and self.model):
            raise ConfigError("http backend needs endpoint and model")
        if self.concurrency_limit < 1:
            raise ConfigError("concurrency_limit must be at least 1")
        if self.max_attempts < 1 or self.backoff_initial < 0 or self.timeout <= 0:
            raise ConfigError("http retry settings must be positive")
        self.validate_scheme()

    def validate_scheme(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}")


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    for name in ("seed", "count", "scheme", "concurrency_limit"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    return cfg


def _write_csv(path: Path, rows: list[list]) -> None:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    write_text_atomic(path, buf.getvalue())


def _ensure_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {path}: {exc}") from exc
    return path


# -- commands ------------------------------------------------------------------

def cmd_generate(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(RunConfig.load(args.config), args)
    cfg.validate_generation()
    priors = load_priors(cfg.priors_path)
    if cfg.region_id and cfg.region_id != priors.region_id:
        raise ConfigError(f"config region {cfg.region_id!r} differs from priors {priors.region_id!r}")
    template = None
    template_path = args.prompt_template or cfg.prompt_template
    if template_path:
        try:
            template = Path(template_path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read prompt template: {exc}") from exc

    plan = plan_assignments(priors, *cfg.date_range, cfg.count, cfg.seed)
    assignments = [a for a, _ in plan]
    try:
        prompts = [render_prompt(a, template) for a in assignments]
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"prompt template has an unknown or malformed placeholder: {exc}") from exc

    if cfg.backend == "mock":
        params = MockParams.load(cfg.mock_params_path) if cfg.mock_params_path else None
        backend = MockBackend(params, seed=cfg.seed)
    else:
        backend = HttpBackend(cfg.endpoint, cfg.model, max_attempts=cfg.max_attempts,
                              backoff_initial=cfg.backoff_initial, timeout=cfg.timeout)
    try:
        records = run_batch(
            assignments, backend, cfg.decoding, cfg.concurrency_limit,
            seeds=[s for _, s in plan], prompts=prompts,
        )
    finally:
        if isinstance(backend, HttpBackend):
            backend.close()
    write_records(records, args.out)
    failed = sum(not r.ok for r in records)
    logger.info("wrote %d records (%d failed) to %s", len(records), failed, args.out)
    return EXIT_DEGRADED if failed else EXIT_OK


def cmd_parse(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(RunConfig.load(args.config), args)
    cfg.validate_scheme()
    filters = cfg.filters
    if args.max_gap is not None or args.keep_code_97 or args.allow_missing_times:
        filters = FilterConfig(
            max_gap_minutes=args.max_gap if args.max_gap is not None else filters.max_gap_minutes,
            drop_code_97=filters.drop_code_97 and not args.keep_code_97,
            require_times=filters.require_times and not args.allow_missing_times,
        )
    records = read_records(args.records)
    corpus, summary = build_corpus(records, filters, builtin_taxonomy(), region_id=args.region or cfg.region_id or None)
    summary_path = Path(args.summary) if args.summary else Path(args.out).with_suffix(".rejections.json")
    save_corpus(corpus, args.out)
    write_text_atomic(summary_path, dump_json(summary))
    logger.info("accepted %d of %d records; rejections %s", len(corpus), len(records), summary)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(RunConfig.load(args.config), args)
    cfg.validate_scheme()
    actual = load_corpus(args.actual)
    generated = load_corpus(args.generated)
    references = [load_corpus(p) for p in args.reference or ()]
    report = ev.evaluate(actual, generated, references, builtin_taxonomy(), cfg.scheme)
    out = _ensure_dir(Path(args.out))
    write_text_atomic(out / "report.json", dump_json(report))
    for name, rows in ev.plot_tables(report).items():
        _write_csv(out / f"{name}.csv", rows)
    return EXIT_OK


def downsample(corpus: Corpus, n: int, rng: np.random.Generator) -> Corpus:
    """Uniform sample of ``n`` diaries without replacement, original order kept."""
    if n >= len(corpus):
        return corpus
    keep = np.sort(rng.choice(len(corpus), size=n, replace=False))
    return Corpus(corpus.region_id, corpus.source, tuple(corpus.diaries[i] for i in keep))


def compare_pol(actual: Corpus, generated: Corpus, pol: Corpus, seed: int = 0) -> dict:
    """Size-matched comparison of generated and POL corpora against ``actual`` (6 types)."""
    n = min(len(generated), len(pol))
    rng = np.random.default_rng(seed)
    gen_s, pol_s = downsample(generated, n, rng), downsample(pol, n, rng)
    tax = builtin_taxonomy()
    return {
        "scheme": TYPE6,
        "sample_size": n,
        "generated": ev.evaluate(actual, gen_s, (), tax, TYPE6),
        "pol": ev.evaluate(actual, pol_s, (), tax, TYPE6),
    }


def cmd_compare_pol(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(RunConfig.load(args.config), args)
    actual, generated, pol = (load_corpus(p) for p in (args.actual, args.generated, args.pol))
    report = compare_pol(actual, generated, pol, cfg.seed if cfg.seed is not None else 0)
    write_text_atomic(Path(args.out), dump_json(report))
    return EXIT_OK


def cluster_corpora(corpora: Sequence[Corpus], ks: Sequence[int], scheme: str = TYPE11,
                    features: str = "first") -> dict:
    tax = builtin_taxonomy()
    seen: dict[str, int] = {}
    vectors = []
    for c in corpora:
        n = seen.get(c.region_id, 0)
        seen[c.region_id] = n + 1
        label = c.region_id if n == 0 else f"{c.region_id}#{n + 1}"
        vec = flatten(ev.transition_model(c, tax, scheme, 1))
        if features == "first+second":
            vec = np.concatenate([vec, ev.transition_model(c, tax, scheme, 2).matrix.reshape(-1)])
        vectors.append((label, vec))
    ks = list(ks) or [2]
    dendro, _ = ward_cluster(vectors, ks[0])
    return {
        "scheme": scheme,
        "features": features,
        "dendrogram": dendro.to_dict(),
        "assignments": {str(k): dendro.labels_for_k(k) for k in ks},
    }


def cmd_cluster(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(RunConfig.load(args.config), args)
    cfg.validate_scheme()
    if len(args.corpus) < 2:
        raise ConfigError("clustering needs at least two corpora")
    corpora = [load_corpus(p) for p in args.corpus]
    result = cluster_corpora(corpora, args.k or [2], cfg.scheme, args.features)
    write_text_atomic(Path(args.out), dump_json(result))
    return EXIT_OK


def export_finetune(corpora: Sequence[Corpus], n: int, exclude_regions: Sequence[str] = (),
                    seed: int = 0) -> list[dict]:
    """Sample ``n`` diaries outside ``exclude_regions`` as prompt/completion pairs."""
    excluded = set(exclude_regions)
    pool = []
    for corpus in corpora:
        for d in corpus.diaries:
            meta = dict(d.persona or {})
            region = str(meta.get("region_id", corpus.region_id))
            if region not in excluded and corpus.region_id not in excluded:
                pool.append((region, d, meta))
    if n < 1 or len(pool) < n:
        raise InsufficientData(f"requested {n} diaries but only {len(pool)} remain after exclusion")
    order = np.random.default_rng(seed).permutation(len(pool))[:n]
    out = []
    for i in order:
        region, d, meta = pool[i]
        out.append({
            "persona_id": d.persona_id,
            "region_id": region,
            "date": d.survey_date.isoformat(),
            "prompt": render_metadata_prompt(meta, d.survey_date),
            "completion": render_diary_table(d.entries),
        })
    return out


def cmd_export_finetune(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(RunConfig.load(args.config), args)
    corpora = [load_corpus(p) for p in args.corpus]
    pairs = export_finetune(corpora, args.n, args.exclude_region or (),
                            cfg.seed if cfg.seed is not None else 0)
    write_text_atomic(Path(args.out), "".join(json.dumps(p, ensure_ascii=False) + "\n" for p in pairs))
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mobilicast", description="Synthetic travel-diary generation and evaluation."
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="TOML or JSON run configuration")
        p.add_argument("--seed", type=int)
        p.add_argument("--scheme", choices=SCHEMES)
        p.set_defaults(func=func)
        return p

    p = command("generate", cmd_generate, "sample personas and generate raw diaries")
    p.add_argument("--count", type=int)
    p.add_argument("--concurrency-limit", dest="concurrency_limit", type=int)
    p.add_argument("--prompt-template", help="override the embedded prompt template")
    p.add_argument("--out", default="records.jsonl")

    p = command("parse", cmd_parse, "extract and filter diaries from generation records")
    p.add_argument("--records", required=True)
    p.add_argument("--out", default="corpus.json")
    p.add_argument("--summary", help="rejection summary path (default: <out>.rejections.json)")
    p.add_argument("--region", help="region id for the corpus (default: from records)")
    p.add_argument("--max-gap", type=int, help="maximum minutes between places")
    p.add_argument("--keep-code-97", action="store_true", help="accept location type 97")
    p.add_argument("--allow-missing-times", action="store_true")

    p = command("eval", cmd_eval, "compare a generated corpus against an actual one")
    p.add_argument("--actual", required=True)
    p.add_argument("--generated", required=True)
    p.add_argument("--reference", action="append", help="actual corpus of another city (repeatable)")
    p.add_argument("--out", default="eval")

    p = command("compare-pol", cmd_compare_pol, "size-matched comparison with a POL corpus")
    p.add_argument("--actual", required=True)
    p.add_argument("--generated", required=True)
    p.add_argument("--pol", required=True)
    p.add_argument("--out", default="pol_report.json")

    p = command("cluster", cmd_cluster, "Ward-cluster cities by transition matrices")
    p.add_argument("--corpus", action="append", required=True)
    p.add_argument("--k", type=int, action="append")
    p.add_argument("--features", choices=("first", "first+second"), default="first")
    p.add_argument("--out", default="clusters.json")

    p = command("export-finetune", cmd_export_finetune, "export prompt/completion pairs")
    p.add_argument("--corpus", action="append", required=True)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--exclude-region", action="append")
    p.add_argument("--out", default="finetune.jsonl")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except IoFailure as exc:
        logger.error("%s", exc)
        return EXIT_IO
    except (MobilicastError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
