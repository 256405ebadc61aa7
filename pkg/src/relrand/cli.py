"""Command-line front end.

Commands: ``test`` (run a hypothesis from a config file), ``paths`` (original
and expected path matrices at one randomization point), ``props`` (identity
checks on random small instances), ``gen-synthetic`` and ``ingest-movielens``
(emit relation files).

A config file is INI-style::

    [relations]
    GM = gm.tsv

    [chain]
    relations = GM, MD, DA
    selection = Drama            ; optional
    semantics = path_count       ; optional, defaults to the statistic's need

    [hypothesis]
    statistic = weighted_average_destination
    tail = upper
    samples = 999
    seed = 7

    [parameters]
    group = History

Chain entries may carry a ``^T`` suffix to use a relation transposed.
"""
from __future__ import annotations

import configparser
from pathlib import Path

import click
import numpy as np

from . import oracle
from .movielens import load_movielens
from .randomize import KIND_RELATION, RandomizationPoint
from .relations import (
    BinaryRelation,
    ChainQuery,
    EngineError,
    PATH_COUNT,
    SEMANTICS,
    load_relation,
    save_relation,
    transpose,
)
from .significance import (
    HypothesisSpec,
    QUICK_SAMPLES,
    TAILS,
    expected_path_matrix,
    point_label,
    run_hypothesis,
)
from .stats import StatisticSpec
from .synthetic import SyntheticConfig, generate_anti, generate_structured


class ConfigError(EngineError):
    """A config file is missing or inconsistent; the message names the field."""


def _parse_config(path: Path) -> configparser.ConfigParser:
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # relation names are case-sensitive
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for section in ("relations", "chain", "hypothesis"):
        if section not in parser:
            raise ConfigError(f"{path}: missing section [{section}]")
    return parser


def _get(parser, section: str, key: str, default=None, required: bool = False) -> str | None:
    value = parser[section].get(key)
    if value is None or not value.strip():
        if required:
            raise ConfigError(f"config field [{section}] {key} is required")
        return default
    return value.strip()


def _get_int(parser, section: str, key: str, default: int | None = None) -> int | None:
    raw = _get(parser, section, key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"config field [{section}] {key}: '{raw}' is not an integer") from None


def _load_chain(parser, config_dir: Path) -> tuple[dict[str, BinaryRelation], list[BinaryRelation]]:
    relations: dict[str, BinaryRelation] = {}
    for name, rel_path in parser["relations"].items():
        full = (config_dir / rel_path.strip()).resolve()
        try:
            relations[name] = load_relation(full, name=name)
        except EngineError as exc:
            raise ConfigError(f"config field [relations] {name}: {exc}") from exc
    order_raw = _get(parser, "chain", "relations", required=True)
    chain: list[BinaryRelation] = []
    for item in order_raw.split(","):
        token = item.strip()
        flip = token.endswith("^T")
        key = token[:-2].strip() if flip else token
        if key not in relations:
            raise ConfigError(
                f"config field [chain] relations: '{key}' is not declared in [relations]"
            )
        chain.append(transpose(relations[key]) if flip else relations[key])
    if not chain:
        raise ConfigError("config field [chain] relations: empty chain")
    return relations, chain


def _build_hypothesis(
    parser,
    config_dir: Path,
    samples_override: int | None,
    seed_override: int | None,
    tail_override: str | None,
    quick: bool,
) -> HypothesisSpec:
    _, chain = _load_chain(parser, config_dir)
    stat_name = _get(parser, "hypothesis", "statistic", required=True)
    parameters = {}
    if "parameters" in parser:
        parameters = {k: v.strip() for k, v in parser["parameters"].items()}
    statistic = StatisticSpec(stat_name, parameters)
    try:
        registered = statistic.resolve()
    except EngineError as exc:
        raise ConfigError(f"config field [hypothesis] statistic: {exc}") from exc

    semantics = _get(parser, "chain", "semantics")
    if semantics is None:
        semantics = registered.semantics or PATH_COUNT
    if semantics not in SEMANTICS:
        raise ConfigError(
            f"config field [chain] semantics: '{semantics}' is not one of {SEMANTICS}"
        )
    selection_raw = _get(parser, "chain", "selection")
    selection = None
    if selection_raw:
        selection = tuple(s.strip() for s in selection_raw.split(",") if s.strip())

    tail = tail_override or _get(parser, "hypothesis", "tail", required=True)
    if tail not in TAILS:
        raise ConfigError(f"config field [hypothesis] tail: '{tail}' is not one of {TAILS}")
    samples = samples_override
    if samples is None:
        samples = QUICK_SAMPLES if quick else _get_int(parser, "hypothesis", "samples", 999)
    seed = seed_override if seed_override is not None else _get_int(parser, "hypothesis", "seed", 0)
    alpha_raw = _get(parser, "hypothesis", "alpha")
    multiplier = _get_int(parser, "hypothesis", "multiplier", 10)

    try:
        query = ChainQuery(tuple(chain), selection=selection, semantics=semantics)
        query.validate()
        return HypothesisSpec(
            query=query,
            statistic=statistic,
            tail=tail,
            samples_k=samples,
            master_seed=seed,
            alpha=float(alpha_raw) if alpha_raw is not None else 0.05,
            attempts_multiplier=multiplier,
        )
    except EngineError as exc:
        raise ConfigError(f"config field [hypothesis] samples/chain: {exc}") from exc


@click.group()
def main() -> None:
    """Randomization significance testing for chain joins over binary relations."""


@main.command("test")
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path))
@click.option("--out", "out_prefix", default="report", show_default=True,
              help="Prefix for <prefix>.txt and <prefix>.tsv report files.")
@click.option("--samples", type=int, default=None, help="Override [hypothesis] samples.")
@click.option("--seed", type=int, default=None, help="Override [hypothesis] seed.")
@click.option("--tail", type=click.Choice(TAILS), default=None, help="Override [hypothesis] tail.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--quick", is_flag=True, help=f"Use {QUICK_SAMPLES} samples for a preliminary run.")
@click.option("--include-nulls", is_flag=True, help="Append the raw null values to each record.")
def cmd_test(config_path, out_prefix, samples, seed, tail, workers, quick, include_nulls):
    """Run the configured hypothesis at every randomization point."""
    try:
        parser = _parse_config(config_path)
        spec = _build_hypothesis(parser, config_path.parent, samples, seed, tail, quick)
        report = run_hypothesis(spec, workers=workers)
    except EngineError as exc:
        raise click.ClickException(str(exc)) from exc
    machine_path = Path(f"{out_prefix}.tsv")
    human_path = Path(f"{out_prefix}.txt")
    machine_path.write_text(report.machine_text(include_nulls=include_nulls), encoding="utf-8")
    human_path.write_text(report.human_text(), encoding="utf-8")
    click.echo(report.human_text(), nl=False)
    click.echo(f"reports written to {machine_path} and {human_path}")


def _parse_point(raw: str, chain_len: int) -> RandomizationPoint:
    try:
        kind, pos_raw = raw.split(":", 1)
        point = RandomizationPoint(kind.strip(), int(pos_raw))
    except (ValueError, EngineError) as exc:
        raise click.ClickException(
            f"--point must look like 'relation:0' or 'junction:1', got '{raw}' ({exc})"
        ) from exc
    limit = chain_len if point.kind == KIND_RELATION else chain_len - 1
    if point.position >= limit:
        raise click.ClickException(
            f"--point {raw} is out of range for a chain of {chain_len} relations"
        )
    return point


def _matrix_text(row_labels, col_labels, matrix, fmt: str) -> str:
    lines = ["\t".join(["" , *col_labels])]
    for label, row in zip(row_labels, matrix):
        lines.append("\t".join([label, *(format(v, fmt) for v in row)]))
    return "\n".join(lines) + "\n"


@main.command("paths")
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path))
@click.option("--point", "point_raw", required=True,
              help="Randomization point, e.g. 'relation:0' or 'junction:1'.")
@click.option("--samples", type=int, default=10_000, show_default=True)
@click.option("--seed", type=int, default=None, help="Override [hypothesis] seed.")
@click.option("--out", "out_prefix", default="paths", show_default=True)
def cmd_paths(config_path, point_raw, samples, seed, out_prefix):
    """Emit the original path matrix, its row proportions, and the expected
    matrix under the chosen randomization point."""
    try:
        parser = _parse_config(config_path)
        spec = _build_hypothesis(parser, config_path.parent, None, seed, None, False)
    except EngineError as exc:
        raise click.ClickException(str(exc)) from exc
    point = _parse_point(point_raw, len(spec.query.relations))
    original = spec.query.evaluate()
    expected = expected_path_matrix(
        spec.query, point, samples, spec.master_seed, spec.attempts_multiplier
    )
    totals = original.counts.sum(axis=1, keepdims=True).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        proportions = np.where(totals > 0, 100.0 * original.counts / totals, 0.0)
    rows = original.row_domain.labels
    cols = original.col_domain.labels
    Path(f"{out_prefix}_original.tsv").write_text(
        _matrix_text(rows, cols, original.counts, "d"), encoding="utf-8"
    )
    Path(f"{out_prefix}_proportions.tsv").write_text(
        _matrix_text(rows, cols, proportions, ".6g"), encoding="utf-8"
    )
    Path(f"{out_prefix}_expected.tsv").write_text(
        _matrix_text(rows, cols, expected, ".6g"), encoding="utf-8"
    )
    label = point_label(spec.query.relations, point)
    click.echo(f"path matrices for {label} written to {out_prefix}_*.tsv")


def _random_instance(rng: np.random.Generator, prop_id: str, max_dim: int):
    """A join-compatible (A, B) pair, structured as the identity requires."""
    from .relations import AttributeDomain

    def domain(prefix: str, size: int) -> AttributeDomain:
        return AttributeDomain(prefix, tuple(f"{prefix}{i}" for i in range(size)))

    n = int(rng.integers(2, max_dim + 1))
    m = int(rng.integers(2, max_dim + 1))
    k = int(rng.integers(2, min(max_dim, 3) + 1))
    density = rng.uniform(0.2, 0.8)
    dom_i, dom_j, dom_k = domain("I", n), domain("J", m), domain("K", k)

    def bernoulli(rows: AttributeDomain, cols: AttributeDomain) -> BinaryRelation:
        return BinaryRelation.from_dense(
            rows, cols, rng.random((rows.size, cols.size)) < density
        )

    def permutation(rows: AttributeDomain, cols: AttributeDomain) -> BinaryRelation:
        dense = np.zeros((rows.size, cols.size), dtype=bool)
        dense[np.arange(rows.size), rng.permutation(rows.size)] = True
        return BinaryRelation.from_dense(rows, cols, dense)

    if prop_id == "P0c":
        dense = np.zeros((n, m), dtype=bool)
        if rng.random() < 0.5:
            dense[np.arange(n), rng.integers(0, m, size=n)] = True
        else:
            dense[rng.integers(0, n, size=m), np.arange(m)] = True
        return BinaryRelation.from_dense(dom_i, dom_j, dense), bernoulli(dom_j, dom_k)
    if prop_id == "P2a":
        return bernoulli(dom_i, dom_j), permutation(dom_j, domain("K", m))
    if prop_id == "P2b":
        square = domain("J", n)
        return permutation(dom_i, square), bernoulli(square, dom_k)
    return bernoulli(dom_i, dom_j), bernoulli(dom_j, dom_k)


@main.command("props")
@click.option("--max-dim", type=int, default=4, show_default=True,
              help="Largest row/column count of the random instances.")
@click.option("--trials", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--member-limit", type=int, default=5000, show_default=True,
              help="Skip instances whose enumerated sets exceed this size.")
def cmd_props(max_dim, trials, seed, member_limit):
    """Check the swap/permutation identities on random small instances."""
    if trials <= 0:
        click.echo("warning: trials=0, nothing checked (vacuous pass)")
        return
    rng = np.random.default_rng(seed)
    failed: list[str] = []
    for prop_id in oracle.PROPOSITION_IDS:
        passed = 0
        attempts = 0
        counterexample = None
        while passed < trials and counterexample is None:
            attempts += 1
            if attempts > trials * 20:
                raise click.ClickException(
                    f"{prop_id}: could not draw {trials} enumerable instances"
                )
            a, b = _random_instance(rng, prop_id, max_dim)
            try:
                check = oracle.verify_proposition(prop_id, a, b, member_limit)
            except oracle.EnumerationLimitError:
                continue
            if check.ok:
                passed += 1
            else:
                counterexample = (a, b, check)
        if counterexample is None:
            click.echo(f"{prop_id}: {passed}/{trials} pass")
        else:
            a, b, check = counterexample
            click.echo(f"{prop_id}: COUNTEREXAMPLE after {passed} passes")
            click.echo(f"A =\n{_dense_text(a)}\nB =\n{_dense_text(b)}")
            click.echo(check.detail)
            failed.append(prop_id)
    if failed:
        raise click.ClickException(f"proposition checks failed: {', '.join(failed)}")


def _dense_text(rel: BinaryRelation) -> str:
    return "\n".join(
        "".join("1" if v else "0" for v in row) for row in rel.dense
    )


@main.command("gen-synthetic")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-dir", type=click.Path(path_type=Path), default=Path("synthetic"),
              show_default=True)
def cmd_gen_synthetic(seed, out_dir):
    """Write the patterned tables, their structure-free counterparts, and a
    ready-to-run hypothesis config."""
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = SyntheticConfig(seed=seed)
    su, um, mg = generate_structured(cfg)
    rsu, rum, rmg = generate_anti(cfg)
    for rel, fname in [
        (su, "su.tsv"), (um, "um.tsv"), (mg, "mg.tsv"),
        (rsu, "rsu.tsv"), (rum, "rum.tsv"), (rmg, "rmg.tsv"),
    ]:
        save_relation(rel, out_dir / fname)
    config_text = (
        "[relations]\n"
        "SU = su.tsv\nUM = um.tsv\nMG = mg.tsv\n\n"
        "[chain]\nrelations = SU, UM, MG\n\n"
        "[hypothesis]\nstatistic = l1_distribution_distance\n"
        f"tail = upper\nsamples = 999\nseed = {seed}\n\n"
        "[parameters]\ngroup_a = M\ngroup_b = F\n"
    )
    (out_dir / "synthetic.cfg").write_text(config_text, encoding="utf-8")
    click.echo(f"synthetic tables and synthetic.cfg written to {out_dir}/")


@main.command("ingest-movielens")
@click.option("--dir", "data_dir", required=True, type=click.Path(path_type=Path),
              help="Directory with u.data, u.item, u.user, u.genre, u.occupation.")
@click.option("--out-dir", type=click.Path(path_type=Path), default=Path("movielens"),
              show_default=True)
def cmd_ingest_movielens(data_dir, out_dir):
    """Convert MovieLens-100K raw files into relation files."""
    try:
        tables = load_movielens(data_dir)
    except EngineError as exc:
        raise click.ClickException(str(exc)) from exc
    out_dir.mkdir(parents=True, exist_ok=True)
    for rel, fname in [
        (tables.um, "um.tsv"), (tables.mg, "mg.tsv"), (tables.uo, "uo.tsv"),
        (tables.us, "us.tsv"), (tables.ua, "ua.tsv"),
    ]:
        save_relation(rel, out_dir / fname)
    click.echo(tables.summary())
    click.echo(f"relation files written to {out_dir}/")


if __name__ == "__main__":
    main()
