"""Command-line interface.

Exit status: 0 when every requested check passes, 1 when a check fails or
stays undecided, 2 on usage and parse errors. Structured output
(--format json) uses the stable keys entry, check, expected, computed, status.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from dataclasses import dataclass

import click

from . import __version__
from .algebra import Algebra, parse_structure, render
from .catalog import (CATALOG_ENV, PASS, SKIP, Catalog, CatalogError, VerifyOptions,
                      default_catalog_path, identify, load_catalog, verify_catalog)
from .expr import ExprError

ABOUT = f"""nilstrata {__version__}
field          Q(z), z a primitive 24th root of unity; gamma = z^4
structures     p(i,j;k) means e_i e_j = e_k (1-based)
composition    phi o psi = sum_i (-1)^((i-1)(n-1)) phi o_i psi
bracket        [phi,psi] = phi o psi - (-1)^((m-1)(n-1)) psi o phi
cohomology     h_n = dim C^n - rank D_n - rank D_(n-1), D = [d, -]
forms          B[j][i] = beta(e_i, e_j); cogredience C = P^T B P
catalog        ${CATALOG_ENV} overrides the bundled file"""


@dataclass
class CliConfig:
    catalog: str | None = None
    fmt: str = "table"
    jobs: int = 1
    seed: int = 0
    budget: int = 300

    def __post_init__(self):
        if self.jobs < 1:
            raise click.BadParameter("jobs must be >= 1", param_hint="--jobs")

    def load(self) -> Catalog:
        try:
            return load_catalog(self.catalog)
        except (CatalogError, OSError) as exc:
            raise click.UsageError(f"cannot load catalog: {exc}") from exc


pass_config = click.make_pass_decorator(CliConfig)


def _print_about(ctx, _param, value):
    if not value or ctx.resilient_parsing:
        return
    click.echo(ABOUT)
    ctx.exit(0)


# --- output --------------------------------------------------------------------

def _table(rows: list[dict], columns: list[str]) -> str:
    cells = [[str(r.get(c, "")) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines)


def _emit(cfg: CliConfig, payload, rows: list[dict] | None = None, columns: list[str] | None = None) -> None:
    if cfg.fmt == "json":
        click.echo(json.dumps(payload, indent=2, default=str))
    elif rows is not None:
        click.echo(_table(rows, columns or list(rows[0]) if rows else []))
    else:
        for k, v in payload.items():
            click.echo(f"{k}: {v if not isinstance(v, (list, dict)) else json.dumps(v, default=str)}")


def _check_rows(results) -> list[dict]:
    return [r.to_dict() for r in results]


def _exit_for(statuses) -> None:
    sys.exit(0 if all(s == PASS or s == SKIP for s in statuses) else 1)


# --- argument parsing ------------------------------------------------------------

def _algebra_arg(cfg: CliConfig, text: str, dim: int | None, hint: str) -> Algebra:
    """A catalog reference like d75(1:-1), or psi text together with --dim."""
    cat = cfg.load()
    try:
        return cat.algebra(text)
    except KeyError:
        pass
    if dim is None:
        dim = _infer_dim(text)
        if dim is None:
            raise click.BadParameter(f"{text!r} is not a catalog name; give --dim for psi text", param_hint=hint)
    try:
        return parse_structure(text, dim)
    except (ExprError, ValueError) as exc:
        raise click.BadParameter(str(exc), param_hint=hint) from exc


def _infer_dim(text: str) -> int | None:
    import re

    idx = [int(x) for m in re.finditer(r"p\(\s*(\d+)\s*,\s*(\d+)\s*;\s*(\d+)\s*\)", text) for x in m.groups()]
    return max(idx) if idx else None


def _matrix_arg(text: str, hint: str):
    from .linalg import ExactMatrix

    try:
        M = ExactMatrix.parse(text)
    except (ExprError, ValueError) as exc:
        raise click.BadParameter(str(exc), param_hint=hint) from exc
    n, m = M.shape
    if n != m:
        raise click.BadParameter("matrix must be square", param_hint=hint)
    return M


# --- commands --------------------------------------------------------------------

@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--about", is_flag=True, expose_value=False, is_eager=True, callback=_print_about,
              help="Print version and conventions, then exit.")
@click.option("--catalog", type=click.Path(dir_okay=False), default=None,
              help=f"Catalog file (default: ${CATALOG_ENV} or the bundled catalog).")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table", show_default=True)
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--budget", type=click.IntRange(min=1), default=300, show_default=True,
              help="Numeric solves allowed per isomorphism or cogredience search.")
@click.option("-v", "--verbose", count=True)
@click.pass_context
def main(ctx, catalog, fmt, jobs, seed, budget, verbose):
    """Exact workbench for nilpotent associative algebras of small dimension."""
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2), format="%(name)s: %(message)s")
    ctx.obj = CliConfig(catalog or os.environ.get(CATALOG_ENV), fmt, jobs, seed, budget)


@main.command("verify-catalog")
@click.option("--entry", "entries", multiple=True, help="Entry name (repeatable; default all).")
@click.option("--h-max", type=click.IntRange(0, 3), default=3, show_default=True)
@click.option("--samples", type=click.IntRange(min=0), default=None,
              help="Generic samples per family (default: all listed).")
@click.option("--no-cohomology", is_flag=True, help="Skip cohomology checks.")
@pass_config
def verify_catalog_cmd(cfg: CliConfig, entries, h_max, samples, no_cohomology):
    """Check every recorded claim of the catalog."""
    cat = cfg.load()
    for e in entries:
        if e not in cat:
            raise click.BadParameter(f"unknown entry {e!r}", param_hint="--entry")
    opts = VerifyOptions(h_max=h_max, budget=cfg.budget, seed=cfg.seed,
                         cohomology=not no_cohomology, samples=samples)
    path = cfg.catalog or str(default_catalog_path())
    report = verify_catalog(cat, list(entries) or None, opts, jobs=cfg.jobs, path=path)
    rows = _check_rows(report.results)
    if cfg.fmt == "json":
        _emit(cfg, rows)
    else:
        _emit(cfg, None, [{k: r[k] for k in ("entry", "check", "expected", "computed", "status")} for r in rows],
              ["entry", "check", "expected", "computed", "status"])
        failed = report.failures()
        click.echo(f"\n{len(rows)} checks, {len(failed)} failed")
    _exit_for(r.status for r in report.results)


@main.command()
@click.option("--algebra", "text", required=True, help="Catalog reference or psi text.")
@click.option("--dim", type=click.IntRange(min=0), default=None)
@click.option("--max-degree", type=click.IntRange(0, 3), default=3, show_default=True)
@pass_config
def cohomology(cfg: CliConfig, text, dim, max_degree):
    """Hochschild cohomology dimensions h_0..h_n."""
    from .hochschild import cohomology_dims

    A = _algebra_arg(cfg, text, dim, "--algebra")
    dims = list(cohomology_dims(A, max_degree).dims)
    _emit(cfg, {"algebra": A.name or render(A) or "0", "dim": A.dim, "cohomology": dims})


@main.command()
@click.option("--left", required=True)
@click.option("--right", required=True)
@click.option("--dim", type=click.IntRange(min=0), default=None)
@click.option("--expect", type=click.Choice(["witness", "refuted"]), default=None,
              help="Exit 1 unless the verdict is this one.")
@click.option("--thorough", is_flag=True, help="Compare cohomology dimensions as well.")
@pass_config
def iso(cfg: CliConfig, left, right, dim, expect, thorough):
    """Decide isomorphism: Witness (exact g), Refuted or Inconclusive."""
    from .isomorphism import are_isomorphic

    A = _algebra_arg(cfg, left, dim, "--left")
    B = _algebra_arg(cfg, right, dim, "--right")
    v = are_isomorphic(A, B, budget=cfg.budget, seed=cfg.seed, thorough=thorough)
    payload = {"left": left, "right": right, **v.to_dict()}
    if cfg.fmt == "json":
        _emit(cfg, payload)
    else:
        click.echo(v.summary())
    if expect is not None:
        sys.exit(0 if v.kind == expect else 1)
    sys.exit(1 if v.is_inconclusive else 0)


@main.command()
@click.option("--algebra", "text", required=True)
@click.option("--dim", type=click.IntRange(min=0), default=None)
@click.option("--cohomology", "with_h", is_flag=True, help="Include cohomology dimensions.")
@pass_config
def fingerprint(cfg: CliConfig, text, dim, with_h):
    """Basis-independent invariants."""
    from .isomorphism import fingerprint as fp

    A = _algebra_arg(cfg, text, dim, "--algebra")
    _emit(cfg, {"algebra": A.name or render(A) or "0", **fp(A, cohomology=with_h).to_dict()})


@main.command()
@click.option("--matrix", "text", required=True, help='Rows separated by ";", e.g. "1,2;3,0".')
@pass_config
def canon2(cfg: CliConfig, text):
    """Canonical class of a 2x2 bilinear form."""
    from .bilinear import canon2 as c2

    M = _matrix_arg(text, "--matrix")
    if M.shape != (2, 2):
        raise click.BadParameter("canon2 needs a 2x2 matrix", param_hint="--matrix")
    cls = c2(M)
    target = cls.matrix()
    verified = bool(cls.witness is not None and target is not None
                    and (cls.witness.T @ M @ cls.witness) == target)
    _emit(cfg, {"class": cls.label(), "tag": cls.tag,
                "params": [str(x) for x in cls.params] if cls.params else None,
                "witness": cls.witness.text() if cls.witness is not None else None,
                "verified": verified, "note": cls.note})


@main.command()
@click.option("--matrix", "text", required=True)
@pass_config
def canon3(cfg: CliConfig, text):
    """Canonical class of a 3x3 bilinear form, with the matching second-list label."""
    from .bilinear import canon3 as c3

    M = _matrix_arg(text, "--matrix")
    if M.shape != (3, 3):
        raise click.BadParameter("canon3 needs a 3x3 matrix", param_hint="--matrix")
    cls = c3(M, search_budget=cfg.budget, seed=cfg.seed)
    target = cls.matrix()
    verified = bool(cls.witness is not None and target is not None
                    and (cls.witness.T @ M @ cls.witness) == target)
    _emit(cfg, {"class": cls.label(), "tag": cls.tag, "alternate": cls.alt_label(),
                "params": [str(x) for x in cls.params] if cls.params else None,
                "witness": cls.witness.text() if cls.witness is not None else None,
                "verified": verified, "note": cls.note})


@main.command()
@click.option("--left", required=True)
@click.option("--right", required=True)
@pass_config
def cogredient(cfg: CliConfig, left, right):
    """Decide whether P^T left P = right for some invertible P."""
    from .bilinear import are_cogredient

    B = _matrix_arg(left, "--left")
    C = _matrix_arg(right, "--right")
    if B.shape != C.shape:
        raise click.BadParameter("matrices of different size", param_hint="--right")
    v = are_cogredient(B, C, budget=cfg.budget, seed=cfg.seed)
    if cfg.fmt == "json":
        _emit(cfg, {"left": left, "right": right, **v.to_dict()})
    else:
        click.echo(v.summary())
    sys.exit(1 if v.is_inconclusive else 0)


def _extension_rows(cfg: CliConfig, algs: list[Algebra], cat: Catalog, dim: int, params) -> list[dict]:
    rows = []
    for A in algs:
        label = identify(A, cat, dim, params=params, budget=min(cfg.budget, 120), seed=cfg.seed)
        rows.append({"name": A.name, "structure": render(A) or "0", "match": label or "-"})
    return rows


@main.command()
@click.option("--core", "name", required=True, help="Catalog algebra of dimension <= 3 (the quotient W).")
@pass_config
def extend(cfg: CliConfig, name):
    """Extensions of an algebra by a 1-dimensional completely trivial ideal."""
    from .extensions import central_ext_classes, central_grid

    cat = cfg.load()
    A = _algebra_arg(cfg, name, None, "--core")
    if A.dim > 3:
        raise click.BadParameter("the quotient must have dimension <= 3", param_hint="--core")
    grid = central_grid()
    algs = central_ext_classes(A, grid=grid, budget=min(cfg.budget, 60), seed=cfg.seed)
    rows = _extension_rows(cfg, algs, cat, A.dim + 1, grid)
    if cfg.fmt == "json":
        _emit(cfg, {"core": name, "classes": rows})
    else:
        _emit(cfg, None, rows, ["name", "structure", "match"])


@main.command("extend-codim1")
@click.option("--ideal", "name", required=True, help="3-dimensional nilpotent catalog algebra (or psi text).")
@click.option("--grid", "ngrid", type=click.IntRange(0, 5), default=2, show_default=True,
              help="Generic ratios added to the special values.")
@click.option("--max-terms", type=click.IntRange(1, 3), default=3, show_default=True)
@pass_config
def extend_codim1(cfg: CliConfig, name, ngrid, max_terms):
    """Extensions of the trivial 1-dimensional algebra by a 3-dimensional ideal."""
    from .bilinear import normalize_pair
    from .extensions import codim1_ext_enumerate, parameter_grid

    cat = cfg.load()
    mu = _algebra_arg(cfg, name, 3, "--ideal")
    grid = parameter_grid(ngrid)
    algs = codim1_ext_enumerate(mu, grid=grid, max_terms=max_terms, budget=40, seed=cfg.seed)
    params = [normalize_pair(1, t) for t in grid]
    rows = _extension_rows(cfg, algs, cat, mu.dim + 1, params)
    if cfg.fmt == "json":
        _emit(cfg, {"ideal": name, "structures": rows})
    else:
        _emit(cfg, None, rows, ["name", "structure", "match"])


@main.command("deform-check")
@click.option("--entry", "name", required=True)
@click.option("--order", type=click.IntRange(2, 3), default=3, show_default=True)
@pass_config
def deform_check(cfg: CliConfig, name, order):
    """Check the recorded deformation data of an entry."""
    from .deformations import check_entry

    cat = cfg.load()
    if name not in cat:
        raise click.BadParameter(f"unknown entry {name!r}", param_hint="--entry")
    try:
        results = check_entry(cat[name], order)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    rows = _check_rows(results)
    if cfg.fmt == "json":
        _emit(cfg, rows)
    else:
        _emit(cfg, None, [{k: r.get(k, "") for k in ("entry", "check", "expected", "computed", "status", "note")}
                          for r in rows], ["entry", "check", "expected", "computed", "status", "note"])
    _exit_for(r.status for r in results)


def run(argv: list[str] | None = None) -> int:
    """Entry point returning the exit status instead of exiting."""
    try:
        main.main(args=argv, prog_name="nilstrata", standalone_mode=True)
    except SystemExit as exc:
        return int(exc.code or 0)
    return 0


if __name__ == "__main__":
    main()
