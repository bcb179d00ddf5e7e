"""
attributist.cli
~~~~~~~~~~~~~~~
Command line interface::

    attributist ingest corpus/manifest.csv --dump dumps/
    attributist cluster corpus/manifest.csv --delta eder --linkage ward
    attributist attribute corpus/manifest.csv --measures perplexity,cosine
    attributist run corpus/manifest.csv
    attributist selftest --verbose

Options are read, in increasing precedence, from the built-in defaults, the
`ATTRIBUTIST_OUTPUT_DIR` environment variable, the `[attributist]` section of
the `--config` INI file and the command line.

Exit codes: 0 on success, 1 on bad input or configuration (or a failed
self-test), 2 on an internal error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import TYPE_CHECKING, Optional

import regex

from attributist.attribution import (
    MEAN_TOLERANCE,
    attribute,
    attribution_config,
    check_published_means,
    rank_authors,
)
from attributist.clustering import (
    DEFAULT_DELTA,
    DEFAULT_LINKAGE,
    DELTA_VARIANTS,
    LINKAGES,
    cluster,
    serialize_tree,
)
from attributist.corpus import ingest, load_manifest
from attributist.distances import (
    DEFAULT_SMOOTHING,
    MEASURE_LABELS,
    PROFILE_MEASURES,
    MeasureId,
    parse_measures,
)
from attributist.errors import AttributistError, ConfigError, MeasureError
from attributist.features import (
    DEFAULT_CHAR_N,
    DEFAULT_MFW_SIZE,
    WORD_UNIGRAM,
    char_ngram,
    compute_corpus_stats,
    dump_stats,
    dump_vector,
)
from attributist.report import (
    align,
    render_attribution_csv,
    render_attribution_report,
    render_cluster_report,
)
from attributist.synthetic import (
    DEFAULT_SEED,
    desk_corpus,
    near_duplicate_corpus,
    to_corpus,
)

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from attributist.corpus import Corpus

logger = logging.getLogger(__name__)

ENV_OUTPUT_DIR = "ATTRIBUTIST_OUTPUT_DIR"
CONFIG_SECTION = "attributist"
DEFAULT_OUTPUT_DIR = "attributist-output"
MODES = ("cluster", "attribute", "both")

_SLUG_RE = regex.compile(r"[^\w.]+")


@dataclass(frozen=True)
class RunConfig:
    manifest: Optional[Path] = None
    mode: str = "both"
    mfw_size: int = DEFAULT_MFW_SIZE
    char_n: int = DEFAULT_CHAR_N
    delta: str = DEFAULT_DELTA
    linkage: str = DEFAULT_LINKAGE
    measures: tuple[MeasureId, ...] = PROFILE_MEASURES
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)
    jobs: Optional[int] = None
    seed: int = DEFAULT_SEED
    smoothing: float = DEFAULT_SMOOTHING

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        if self.mfw_size < 1:
            raise ConfigError(f"mfw_size must be at least 1, got {self.mfw_size}")
        if self.char_n < 1:
            raise ConfigError(f"char_n must be at least 1, got {self.char_n}")
        if self.delta not in DELTA_VARIANTS:
            raise ConfigError(
                f"delta must be one of {', '.join(DELTA_VARIANTS)}, got {self.delta!r}"
            )
        if self.linkage not in LINKAGES:
            raise ConfigError(
                f"linkage must be one of {', '.join(LINKAGES)}, got {self.linkage!r}"
            )
        if not self.measures:
            raise ConfigError("at least one measure is needed")
        if self.jobs is not None and self.jobs < 1:
            raise ConfigError(f"jobs must be at least 1, got {self.jobs}")
        if self.smoothing < 0:
            raise ConfigError(f"smoothing must not be negative, got {self.smoothing}")

    @property
    def delta_label(self) -> str:
        measure = MeasureId.EDER_DELTA if self.delta == "eder" else MeasureId.BURROWS_DELTA
        return MEASURE_LABELS[measure]

    def echo(self) -> tuple[tuple[str, str], ...]:
        """Report header describing this run."""
        return (
            ("manifest", str(self.manifest or "")),
            ("delta", f"{self.delta} [{self.delta_label}]"),
            ("linkage", self.linkage),
            *attribution_config(self.mfw_size, self.char_n, self.smoothing, self.measures),
        )


# --- Configuration

_CONVERTERS = {
    "manifest": Path,
    "mode": str,
    "mfw_size": int,
    "char_n": int,
    "delta": str,
    "linkage": str,
    "measures": lambda value: parse_measures(value.split(",")),
    "output_dir": Path,
    "jobs": int,
    "seed": int,
    "smoothing": float,
}


def read_config_file(config_path: Path) -> dict[str, str]:
    """Raw values of the `[attributist]` section of an INI file."""
    parser = configparser.ConfigParser()
    try:
        with open(config_path, encoding="utf-8") as f:
            parser.read_file(f)
    except OSError as err:
        raise ConfigError(f"cannot read config file {config_path}: {err}") from err
    except configparser.Error as err:
        raise ConfigError(f"{config_path}: {err}") from err
    if not parser.has_section(CONFIG_SECTION):
        raise ConfigError(f"{config_path}: no [{CONFIG_SECTION}] section")

    values = dict(parser.items(CONFIG_SECTION))
    unknown = sorted(set(values) - set(_CONVERTERS))
    if unknown:
        raise ConfigError(f"{config_path}: unknown key(s) {', '.join(unknown)}")
    # Paths in the file are relative to the file
    for key in ("manifest", "output_dir"):
        if key in values and not Path(values[key]).is_absolute():
            values[key] = str(config_path.parent / values[key])
    return values


def build_config(values: dict[str, object]) -> RunConfig:
    """A RunConfig from raw values; strings are converted, anything else kept."""
    kwargs = {}
    for key, value in values.items():
        if value is None:
            continue
        if key not in _CONVERTERS:
            raise ConfigError(f"unknown option {key!r}")
        if isinstance(value, str):
            try:
                value = _CONVERTERS[key](value.strip())
            except (ValueError, MeasureError) as err:
                raise ConfigError(f"bad value for {key}: {err}") from err
        kwargs[key] = value
    return RunConfig(**kwargs)


def load_config(
    args: argparse.Namespace, environ: Optional[Mapping[str, str]] = None
) -> RunConfig:
    environ = os.environ if environ is None else environ
    values: dict[str, object] = {}
    if environ.get(ENV_OUTPUT_DIR):
        values["output_dir"] = environ[ENV_OUTPUT_DIR]
    if getattr(args, "config", None):
        values.update(read_config_file(Path(args.config)))
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    return build_config(values)


def prepare_output_dir(directory: Path) -> Path:
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise ConfigError(f"cannot create output directory {directory}: {err}") from err
    if not os.access(directory, os.W_OK):
        raise ConfigError(f"output directory {directory} is not writable")
    return directory


def slugify(title: str, taken: set[str]) -> str:
    """A file name for `title`, different from every name in `taken`."""
    base = _SLUG_RE.sub("-", title.lower()).strip("-.") or "text"
    slug, number = base, 1
    while slug in taken:
        number += 1
        slug = f"{base}-{number}"
    taken.add(slug)
    return slug


def _write(file_path: Path, content: str) -> Path:
    with open(file_path, "w", encoding="utf-8", newline="") as f:
        f.write(content)
    logger.info("Wrote %s", file_path)
    return file_path


def _load_corpus(config: RunConfig) -> Corpus:
    if config.manifest is None:
        raise ConfigError("no manifest given (pass one or set it in the config file)")
    return ingest(load_manifest(config.manifest), config.jobs)


# --- Commands


def cmd_ingest(config: RunConfig, dump_dir: Optional[Path] = None) -> int:
    corpus = _load_corpus(config)
    rows = [["title", "author", "tokens"]]
    rows += [[doc.title, doc.author_label, str(doc.token_count)] for doc in corpus]
    sys.stdout.write("\n".join(align(rows)) + "\n")

    if dump_dir is not None:
        dump_dir = prepare_output_dir(dump_dir)
        stats = compute_corpus_stats(corpus, WORD_UNIGRAM, config.mfw_size, jobs=config.jobs)
        dump_stats(stats, dump_dir / "stats.tsv")
        taken: set[str] = set()
        char_kind = char_ngram(config.char_n)
        for doc in corpus:
            slug = slugify(doc.title, taken)
            dump_vector(doc.vector(WORD_UNIGRAM), dump_dir / f"{slug}.words.tsv")
            dump_vector(doc.vector(char_kind), dump_dir / f"{slug}.char{config.char_n}.tsv")
        logger.info("Dumped %d documents to %s", len(corpus), dump_dir)
    return 0


def cmd_cluster(config: RunConfig, corpus: Optional[Corpus] = None) -> int:
    """Write the dendrogram (Newick, DOT), the distance matrix and a report."""
    corpus = _load_corpus(config) if corpus is None else corpus
    stats = compute_corpus_stats(corpus, WORD_UNIGRAM, config.mfw_size, jobs=config.jobs)
    matrix, tree = cluster(corpus, stats, config.delta, config.linkage, config.jobs)

    out = prepare_output_dir(config.output_dir)
    written = [
        _write(out / "dendrogram.nwk", serialize_tree(tree, "newick")),
        _write(out / "dendrogram.dot", serialize_tree(tree, "dot")),
        _write(out / "distances.csv", matrix.to_csv()),
        _write(out / "cluster_report.txt", render_cluster_report(matrix, tree, config.echo())),
    ]
    sys.stdout.write("".join(f"{p}\n" for p in written))
    return 0


def cmd_attribute(config: RunConfig, corpus: Optional[Corpus] = None) -> int:
    """Write one report per unknown text and a CSV covering all of them."""
    corpus = _load_corpus(config) if corpus is None else corpus
    report = attribute(
        corpus,
        mfw_size=config.mfw_size,
        char_n=config.char_n,
        smoothing=config.smoothing,
        measures=config.measures,
        jobs=config.jobs,
        config=config.echo(),
    )

    out = prepare_output_dir(config.output_dir)
    report_dir = prepare_output_dir(out / "attribution")
    taken: set[str] = set()
    for result in report.results:
        slug = slugify(result.unknown_title, taken)
        _write(report_dir / f"{slug}.txt", render_attribution_report(result, report.config))
    _write(out / "attribution.csv", render_attribution_csv(report))

    for result in report.results:
        margin = result.verdict.margin
        sys.stdout.write(
            "{}: {}{}\n".format(
                result.unknown_title,
                ", ".join(result.verdict.best),
                "" if margin is None else f" (margin {margin:.4f})",
            )
        )
    return 0


def cmd_run(config: RunConfig) -> int:
    corpus = _load_corpus(config)
    if config.mode in ("cluster", "both"):
        cmd_cluster(config, corpus)
    if config.mode in ("attribute", "both"):
        cmd_attribute(config, corpus)
    return 0


@dataclass
class Check:
    name: str
    ok: bool = True
    summary: str = ""
    details: list[str] = field(default_factory=list)


def check_fixture_means(fixtures_dir: Optional[str] = None) -> Check:
    check = Check("published means")
    try:
        means = check_published_means(fixtures_dir)
    except AttributistError as err:
        return Check("published means", ok=False, summary=str(err))
    for c in means:
        actual = "missing" if c.actual is None else f"{c.actual:.4f}"
        check.details.append(
            f"{c.unknown} / {c.author}: expected {c.expected:.4f}, got {actual}"
            f" [{'ok' if c.ok else 'FAIL'}]"
        )
    passed = sum(c.ok for c in means)
    check.ok = bool(means) and passed == len(means)
    check.summary = f"{passed}/{len(means)} means within {MEAN_TOLERANCE}"
    return check


def check_synthetic_attribution(config: RunConfig) -> Check:
    check = Check("synthetic attribution")
    texts = desk_corpus(config.seed)
    truth = {t.title: t.author for t in texts}
    report = attribute(
        to_corpus(texts),
        mfw_size=config.mfw_size,
        char_n=config.char_n,
        smoothing=config.smoothing,
        jobs=config.jobs,
    )
    verdicts = 0
    passed = 0
    for result in report.results:
        expected = truth[result.unknown_title]
        table = result.table
        ranked = {str(m): rank_authors(table.normalized[m]) for m in table.measures}
        ranked["mean"] = result.verdict
        for name, verdict in ranked.items():
            ok = verdict.best == (expected,)
            verdicts += 1
            passed += ok
            check.details.append(
                f"{result.unknown_title} / {name}: {', '.join(verdict.best)}"
                f" [{'ok' if ok else 'FAIL, expected ' + expected}]"
            )
    check.ok = verdicts > 0 and passed == verdicts
    check.summary = f"{passed}/{verdicts} verdicts name the true author"
    return check


def check_near_duplicate(config: RunConfig) -> Check:
    corpus = to_corpus(near_duplicate_corpus(config.seed))
    stats = compute_corpus_stats(corpus, WORD_UNIGRAM, config.mfw_size, jobs=config.jobs)
    _, tree = cluster(corpus, stats, "burrows", config.linkage, config.jobs)
    first = tree.merges[0]
    ok = set(first.leaves()) == {"base", "variant"}
    return Check(
        "near duplicate",
        ok=ok,
        summary=f"first merge {' + '.join(first.leaves())} at {first.height:.4f}",
        details=[f"{a} + {b} at {h:.4f}" for a, b, h in tree.siblings()],
    )


def cmd_selftest(
    config: RunConfig, fixtures_dir: Optional[str] = None, verbose: bool = False
) -> int:
    """Run the fixture and synthetic checks; exit 1 if any fails."""
    checks = [
        check_fixture_means(fixtures_dir),
        check_synthetic_attribution(config),
        check_near_duplicate(config),
    ]
    for check in checks:
        sys.stdout.write(f"{'PASS' if check.ok else 'FAIL'} {check.name}: {check.summary}\n")
        if verbose:
            sys.stdout.write("".join(f"    {line}\n" for line in check.details))
    return 0 if all(c.ok for c in checks) else 1


# --- Entry point


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ConfigError(f"{self.prog}: {message}")


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {number}")
    return number


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="errors only")
    common.add_argument("--config", help="INI file with an [attributist] section")
    common.add_argument("--jobs", type=_positive_int, help="worker threads")
    common.add_argument("--output-dir", dest="output_dir", help="where results are written")
    common.add_argument("--mfw-size", dest="mfw_size", type=_positive_int)
    common.add_argument("--char-n", dest="char_n", type=_positive_int)

    corpus = argparse.ArgumentParser(add_help=False)
    corpus.add_argument("manifest", nargs="?", help="manifest CSV")

    clustering = argparse.ArgumentParser(add_help=False)
    clustering.add_argument("--delta", choices=DELTA_VARIANTS)
    clustering.add_argument("--linkage", choices=tuple(LINKAGES))

    profiles = argparse.ArgumentParser(add_help=False)
    profiles.add_argument(
        "--measures", help="comma separated, from: " + ", ".join(m.value for m in MeasureId)
    )
    profiles.add_argument("--smoothing", type=float)

    parser = _ArgumentParser(prog="attributist", description="Authorship attribution.")
    commands = parser.add_subparsers(dest="command", required=True)

    ingest_cmd = commands.add_parser(
        "ingest", parents=[common, corpus], help="load and check a corpus"
    )
    ingest_cmd.add_argument("--dump", help="write feature tables to this directory")
    commands.add_parser(
        "cluster", parents=[common, corpus, clustering], help="instance based clustering"
    )
    commands.add_parser(
        "attribute", parents=[common, corpus, profiles], help="profile based attribution"
    )
    run_cmd = commands.add_parser(
        "run", parents=[common, corpus, clustering, profiles], help="cluster and attribute"
    )
    run_cmd.add_argument("--mode", choices=MODES)
    selftest_cmd = commands.add_parser(
        "selftest", parents=[common, clustering], help="check the shipped fixtures"
    )
    selftest_cmd.add_argument(
        "--fixtures", help="directory holding normalized_scores.csv and mean_scores.csv"
    )
    selftest_cmd.add_argument("--seed", type=int)
    return parser


def setup_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.ERROR if quiet else logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        setup_logging(args.verbose, args.quiet)
        if isinstance(getattr(args, "measures", None), str):
            args.measures = parse_measures(args.measures.split(","))
        config = load_config(args)

        if args.command == "ingest":
            return cmd_ingest(config, Path(args.dump) if args.dump else None)
        if args.command == "cluster":
            return cmd_cluster(replace(config, mode="cluster"))
        if args.command == "attribute":
            return cmd_attribute(replace(config, mode="attribute"))
        if args.command == "run":
            return cmd_run(config)
        return cmd_selftest(config, args.fixtures, args.verbose)
    except AttributistError as err:
        logger.debug("Command failed", exc_info=True)
        prefix = "internal error" if err.exit_code == 2 else "error"
        sys.stderr.write(f"{prefix}: {err}\n")
        return err.exit_code
    except Exception as err:
        logger.debug("Unexpected failure", exc_info=True)
        sys.stderr.write(f"internal error: {err}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
