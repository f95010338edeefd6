"""The shipped registry of strata and the checks that verify it.

See ``data/catalog.txt`` for the block grammar. Parameter keys are
normalized projective pairs rendered as ``p:q`` with the first nonzero
coordinate scaled to 1.
"""

from __future__ import annotations

import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .algebra import (Algebra, annihilator_kernel, core_of, is_associative, is_commutative,
                      is_nilpotent, opposite, parse_structure)
from .bilinear import normalize_pair, pair_text
from .cyclo import DEFAULT_ORDER, CycloScalar
from .expr import ExprError, parse_psi_sum, parse_scalar
from .hochschild import cohomology_dims
from .isomorphism import are_isomorphic

CATALOG_ENV = "NILSTRATA_CATALOG"
NO_CLAIM = "-"

PASS, FAIL, SKIP = "pass", "fail", "skip"

_MULTI = {"alt", "note"}
_PER_PARAM = {"override", "candidate", "cohomology", "kernel", "core", "commutative", "self_opposite",
              "level", "presentation", "presentation_basis", "presentation_structure", "presentation_same"}
_SINGLE = {"name", "dim", "structure", "params", "special", "samples",
           "deform.cocycles", "deform.family", "deform.relations"}


class CatalogError(ValueError):
    pass


Pair = tuple[CycloScalar, CycloScalar]


def parse_pair(text: str, order: int = DEFAULT_ORDER) -> Pair:
    parts = text.strip().strip("()").split(":")
    if len(parts) != 2:
        raise ExprError(f"expected a projective pair p:q, got {text!r}")
    return normalize_pair(parse_scalar(parts[0], order=order), parse_scalar(parts[1], order=order), order)


def pair_key(pq: Pair) -> str:
    return pair_text(normalize_pair(*pq, order=pq[0].order)).strip("()")


@dataclass
class CatalogEntry:
    name: str
    dim: int
    structure: str
    family: bool = False
    sigma2: bool = False
    values: dict = field(default_factory=dict)  # key -> {param key or "": value}
    alts: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    special: list = field(default_factory=list)
    samples: list = field(default_factory=list)
    deform: dict = field(default_factory=dict)
    line: int = 0
    order: int = DEFAULT_ORDER

    def value(self, key: str, pkey: str = ""):
        """Per-parameter value with fallback to the family-wide one; None if unclaimed."""
        table = self.values.get(key, {})
        v = table.get(pkey, table.get("") if key not in ("override", "candidate") else None)
        if v == NO_CLAIM:
            return None
        return v

    def special_keys(self) -> list[str]:
        """Parameter keys with their own data (table rows) plus declared special values."""
        keys = []
        for table in self.values.values():
            for k in table:
                if k and k not in keys:
                    keys.append(k)
        for k in self.special:
            if k not in keys:
                keys.append(k)
        return keys

    def table_rows(self) -> list[str]:
        """Parameter keys of the rows that carry expected cohomology."""
        return [k for k in self.values.get("cohomology", {}) if k]

    def is_special(self, pkey: str) -> bool:
        keys = set(self.special_keys())
        if pkey in keys:
            return True
        if self.sigma2:
            p, q = pkey.split(":")
            return pair_key(parse_pair(f"{q}:{p}", self.order)) in keys
        return False

    def label(self, pkey: str = "") -> str:
        return f"{self.name}({pkey})" if pkey else self.name


@dataclass
class Catalog:
    entries: dict[str, CatalogEntry] = field(default_factory=dict)

    def __getitem__(self, name: str) -> CatalogEntry:
        return self.entries[name]

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def __iter__(self):
        return iter(self.entries.values())

    def __len__(self):
        return len(self.entries)

    def names(self) -> list[str]:
        return sorted(self.entries)

    def resolve(self, ref: str) -> tuple[CatalogEntry, Pair | None]:
        """'d75(1:-1)' or 'd87' -> (entry, params)."""
        m = re.fullmatch(r"\s*([A-Za-z_][\w]*)\s*(?:\((.*)\))?\s*", ref)
        if not m or m.group(1) not in self.entries:
            raise KeyError(f"unknown catalog algebra {ref!r}")
        entry = self.entries[m.group(1)]
        params = parse_pair(m.group(2), entry.order) if m.group(2) else None
        if entry.family and params is None:
            raise KeyError(f"{entry.name} is a family; give parameters as {entry.name}(p:q)")
        if not entry.family and params is not None:
            raise KeyError(f"{entry.name} takes no parameters")
        return entry, params

    def algebra(self, ref: str) -> Algebra:
        entry, params = self.resolve(ref)
        return instantiate(entry, params)


def _check_structure(text: str, dim: int, allowed: set[str], where: str) -> None:
    try:
        psi = parse_psi_sum(text, env=None)
    except ExprError as exc:
        raise CatalogError(f"{where}: {exc}") from None
    for (i, j, k), coeff in psi.terms.items():
        if max(i, j, k) >= dim:
            raise CatalogError(f"{where}: index out of range in p({i + 1},{j + 1};{k + 1}) for dim {dim}")
        extra = coeff.symbols() - allowed
        if extra:
            raise CatalogError(f"{where}: unresolved parameter symbol(s) {', '.join(sorted(extra))}")


def parse_catalog(text: str, source: str = "<catalog>") -> Catalog:
    cat = Catalog()
    blocks: list[tuple[int, list[tuple[int, str, str]]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "[algebra]":
            blocks.append((lineno, []))
            continue
        if "=" not in line:
            raise CatalogError(f"{source}:{lineno}: expected 'key = value'")
        if not blocks:
            raise CatalogError(f"{source}:{lineno}: pair outside an [algebra] block")
        key, value = (s.strip() for s in line.split("=", 1))
        blocks[-1][1].append((lineno, key, value))
    for start, pairs in blocks:
        entry = _build_entry(start, pairs, source)
        if entry.name in cat.entries:
            raise CatalogError(f"{source}:{start}: duplicate algebra name {entry.name!r}")
        cat.entries[entry.name] = entry
    return cat


def _build_entry(start: int, pairs, source: str) -> CatalogEntry:
    single: dict[str, tuple[int, str]] = {}
    multi: dict[str, list[str]] = {k: [] for k in _MULTI}
    per: dict[str, dict[str, tuple[int, str]]] = {}
    for lineno, key, value in pairs:
        base, _, at = key.partition("@")
        if base in _MULTI and not at:
            multi[base].append(value)
        elif base in _PER_PARAM:
            per.setdefault(base, {})[at] = (lineno, value)
        elif base in _SINGLE and not at:
            if base in single:
                raise CatalogError(f"{source}:{lineno}: repeated key {base!r}")
            single[base] = (lineno, value)
        else:
            raise CatalogError(f"{source}:{lineno}: unknown key {key!r}")
    for req in ("name", "dim", "structure"):
        if req not in single:
            raise CatalogError(f"{source}:{start}: block lacks {req!r}")
    name = single["name"][1]
    where = f"{source}:{start} ({name})"
    try:
        dim = int(single["dim"][1])
    except ValueError:
        raise CatalogError(f"{where}: dim must be an integer") from None
    params = single.get("params", (0, ""))[1].split()
    family = bool(params)
    if params and params[0] != "pq" or len(params) > 2 or (len(params) == 2 and params[1] != "sigma2"):
        raise CatalogError(f"{where}: params must be 'pq' or 'pq sigma2'")
    allowed = {"p", "q"} if family else set()
    entry = CatalogEntry(name, dim, single["structure"][1], family, len(params) == 2, line=start)
    _check_structure(entry.structure, dim, allowed, where)

    def pkey(at: str, lineno: int) -> str:
        if not at:
            return ""
        if not family:
            raise CatalogError(f"{source}:{lineno}: {name} is not a family; '@' keys are not allowed")
        try:
            return pair_key(parse_pair(at))
        except ExprError as exc:
            raise CatalogError(f"{source}:{lineno}: {exc}") from None

    for base, table in per.items():
        out = {}
        for at, (lineno, value) in table.items():
            k = pkey(at, lineno)
            if base in ("override", "candidate", "presentation_structure") and value != NO_CLAIM:
                _check_structure(value, dim, set(), f"{source}:{lineno}")
            if base == "cohomology" and value != NO_CLAIM:
                try:
                    value = tuple(int(x) for x in value.split(","))
                except ValueError:
                    raise CatalogError(f"{source}:{lineno}: cohomology must be integers") from None
                if len(value) != 4:
                    raise CatalogError(f"{source}:{lineno}: expected cohomology has length {len(value)}, not 4")
            elif base == "kernel" and value != NO_CLAIM:
                value = int(value)
            elif base in ("commutative", "self_opposite") and value != NO_CLAIM:
                if value not in ("true", "false"):
                    raise CatalogError(f"{source}:{lineno}: {base} must be true or false")
                value = value == "true"
            out[k] = value
        entry.values[base] = out
    for alt in multi["alt"]:
        _check_structure(alt, dim, set(), where)
    entry.alts = multi["alt"]
    entry.notes = multi["note"]
    for key in ("special", "samples"):
        if key in single:
            lineno, value = single[key]
            keys = [pair_key(parse_pair(s)) for s in value.split(",") if s.strip()]
            setattr(entry, key, keys)
    for s in entry.samples:
        if entry.is_special(s):
            raise CatalogError(f"{where}: generic sample {s} is a special value")
    for key in ("deform.cocycles", "deform.family", "deform.relations"):
        if key in single:
            entry.deform[key.split(".", 1)[1]] = single[key][1]
    for text in entry.deform.get("cocycles", "").split("|"):
        if text.strip():
            _check_structure(text, dim, set(), where)
    if "family" in entry.deform:
        _check_structure(entry.deform["family"], dim, {"t", "t1", "t2", "t3"}, where)
    return entry


def default_catalog_path() -> Path:
    env = os.environ.get(CATALOG_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("nilstrata") / "data" / "catalog.txt"))


def load_catalog(path: str | os.PathLike | None = None) -> Catalog:
    p = Path(path) if path is not None else default_catalog_path()
    return parse_catalog(p.read_text(), str(p))


def instantiate(entry: CatalogEntry, params: Pair | None = None, use_candidate: bool = False) -> Algebra:
    """The algebra for (entry, params); listed special values use their own structure."""
    if not entry.family:
        if params is not None:
            raise ValueError(f"{entry.name} takes no parameters")
        return parse_structure(entry.structure, entry.dim, order=entry.order, name=entry.name)
    if params is None:
        raise ValueError(f"{entry.name} needs parameters (p:q)")
    p, q = normalize_pair(*params, order=entry.order)
    key = pair_key((p, q))
    text = None
    if use_candidate:
        text = entry.value("candidate", key)
    if text is None:
        text = entry.value("override", key)
    if text is not None:
        return parse_structure(text, entry.dim, order=entry.order, name=entry.label(key))
    return parse_structure(entry.structure, entry.dim, {"p": p, "q": q}, entry.order, entry.label(key))


def generic_formula(entry: CatalogEntry, params: Pair) -> Algebra:
    """The family formula at params, ignoring overrides."""
    p, q = normalize_pair(*params, order=entry.order)
    return parse_structure(entry.structure, entry.dim, {"p": p, "q": q}, entry.order,
                           f"{entry.name}-formula({pair_key((p, q))})")


# ---------------------------------------------------------------- verification


@dataclass
class CheckResult:
    entry: str
    check: str
    expected: object
    computed: object
    status: str
    note: str = ""

    def to_dict(self) -> dict:
        def plain(x):
            if isinstance(x, tuple):
                return list(x)
            return x if isinstance(x, (int, str, bool, list, type(None))) else str(x)

        out = {"entry": self.entry, "check": self.check, "expected": plain(self.expected),
               "computed": plain(self.computed), "status": self.status}
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class VerificationReport:
    results: list[CheckResult] = field(default_factory=list)

    def add(self, *args, **kw) -> None:
        self.results.append(CheckResult(*args, **kw))

    def extend(self, other: VerificationReport) -> None:
        self.results.extend(other.results)

    @property
    def ok(self) -> bool:
        return all(r.status != FAIL for r in self.results)

    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if r.status == FAIL]

    def find(self, entry: str, check: str) -> CheckResult | None:
        for r in self.results:
            if r.entry == entry and r.check == check:
                return r
        return None


@dataclass
class VerifyOptions:
    h_max: int = 3
    budget: int = 300
    seed: int = 0
    cohomology: bool = True
    samples: int | None = None  # generic samples per family (default: all listed)


def parameter_cases(entry: CatalogEntry, samples: int | None = None) -> list[tuple[str, bool]]:
    """(param key, is_generic_sample) for every case a family is checked at."""
    if not entry.family:
        return [("", False)]
    rows = [(k, False) for k in entry.special_keys()]
    gens = entry.samples if samples is None else entry.samples[:samples]
    return rows + [(k, True) for k in gens]


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


def _check_case(entry: CatalogEntry, pkey: str, generic: bool, cat: Catalog, opts: VerifyOptions,
                report: VerificationReport) -> None:
    label = entry.label(pkey)
    params = parse_pair(pkey, entry.order) if pkey else None
    A = instantiate(entry, params)
    assoc, bad = is_associative(A)
    report.add(label, "associative", True, assoc, _status(assoc),
               "" if assoc else f"violating triples {bad[:3]}")
    nil = is_nilpotent(A)
    report.add(label, "nilpotent", True, nil, _status(nil))
    if not assoc:
        return
    fallback = "" if generic else pkey
    comm = entry.value("commutative", fallback)
    if comm is not None:
        got = is_commutative(A)
        report.add(label, "commutative", comm, got, _status(got == comm))
    kdim = entry.value("kernel", fallback)
    if kdim is not None:
        got = annihilator_kernel(A).dim
        report.add(label, "kernel dim", kdim, got, _status(got == kdim))
    core = entry.value("core", fallback)
    if core is not None and nil:
        C = core_of(A)
        try:
            target = cat.algebra(core)
        except KeyError as exc:
            report.add(label, "core", core, str(exc), FAIL)
        else:
            v = are_isomorphic(C, target, budget=opts.budget, seed=opts.seed)
            report.add(label, "core", core, v.kind, _status(v.is_witness), v.summary())
    if entry.value("self_opposite", fallback):
        v = are_isomorphic(A, opposite(A), budget=opts.budget, seed=opts.seed)
        report.add(label, "self-opposite", True, v.kind, _status(v.is_witness), v.summary())
    # expected cohomology belongs to table rows; unlisted special values have none
    h = entry.value("cohomology", "" if generic else None) if generic or not pkey else \
        entry.values.get("cohomology", {}).get(pkey)
    if h is not None and opts.cohomology:
        got = cohomology_dims(A, opts.h_max).dims
        want = tuple(h[: opts.h_max + 1])
        report.add(label, "cohomology", want, got, _status(got == want))
    cand = entry.value("candidate", pkey) if pkey else None
    if cand is not None:
        B = instantiate(entry, params, use_candidate=True)
        if h is not None and opts.cohomology:
            got = cohomology_dims(B, opts.h_max).dims
            report.add(label, "candidate cohomology", tuple(h[: opts.h_max + 1]), got,
                       _status(got == tuple(h[: opts.h_max + 1])), cand)
        v = are_isomorphic(A, B, budget=opts.budget, seed=opts.seed)
        report.add(label, "candidate isomorphic", "witness", v.kind,
                   PASS if v.is_witness else (FAIL if v.is_refuted else SKIP), v.summary())


def verify_entry(entry: CatalogEntry, cat: Catalog | None = None, opts: VerifyOptions | None = None,
                 only: str | None = None) -> VerificationReport:
    """Run every recorded claim for an entry; `only` restricts to one parameter key."""
    cat = cat or load_catalog()
    opts = opts or VerifyOptions()
    report = VerificationReport()
    for pkey, generic in parameter_cases(entry, opts.samples):
        if only is not None and pkey != only:
            continue
        _check_case(entry, pkey, generic, cat, opts, report)
    if only is None:
        for n, alt in enumerate(entry.alts, start=1):
            A = instantiate(entry)
            B = parse_structure(alt, entry.dim, order=entry.order)
            v = are_isomorphic(A, B, budget=opts.budget, seed=opts.seed)
            report.add(entry.name, f"alternate presentation {n}", "witness", v.kind,
                       _status(v.is_witness), v.summary())
        for pkey in [k for k in entry.values.get("presentation_structure", {})]:
            report.extend(presentation_check(entry, pkey, cat, opts))
    return report


def presentation_check(entry: CatalogEntry, pkey: str = "", cat: Catalog | None = None,
                 opts: VerifyOptions | None = None) -> VerificationReport:
    """The constants derived from the commutative presentation against the stratum."""
    cat = cat or load_catalog()
    opts = opts or VerifyOptions()
    report = VerificationReport()
    label = entry.label(pkey)
    text = entry.values.get("presentation_structure", {}).get(pkey)
    if text is None:
        report.add(label, "presentation", "presentation", None, SKIP, "no presentation recorded")
        return report
    T = parse_structure(text, entry.dim, order=entry.order)
    assoc, _ = is_associative(T)
    report.add(label, "presentation associative", True, assoc, _status(assoc))
    comm = is_commutative(T)
    report.add(label, "presentation commutative", True, comm, _status(comm))
    A = instantiate(entry, parse_pair(pkey, entry.order) if pkey else None)
    v = are_isomorphic(T, A, budget=opts.budget, seed=opts.seed)
    report.add(label, "presentation isomorphic", "witness", v.kind, _status(v.is_witness), v.summary())
    same = entry.values.get("presentation_same", {}).get(pkey)
    if same:
        v = are_isomorphic(A, cat.algebra(same), budget=opts.budget, seed=opts.seed)
        report.add(label, f"equals {same}", "witness", v.kind, _status(v.is_witness), v.summary())
    return report


def _verify_one(args) -> VerificationReport:
    path, name, opts = args
    cat = load_catalog(path)
    return verify_entry(cat[name], cat, opts)


def verify_catalog(cat: Catalog | None = None, names: list[str] | None = None,
                   opts: VerifyOptions | None = None, jobs: int = 1,
                   path: str | None = None) -> VerificationReport:
    """Verify entries (sorted by name); jobs > 1 fans entries out to worker processes."""
    opts = opts or VerifyOptions()
    if cat is None:
        cat = load_catalog(path)
    names = sorted(names or cat.names())
    report = VerificationReport()
    if jobs > 1:
        src = str(path or default_catalog_path())
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_verify_one, [(src, n, opts) for n in names]):
                report.extend(part)
    else:
        for n in names:
            report.extend(verify_entry(cat[n], cat, opts))
    return report


# ---------------------------------------------------------------- identification

def catalog_pool(cat: Catalog, dim: int, params=None) -> list[tuple[str, Algebra, dict]]:
    """(label, algebra, fingerprint fields) for every catalog instance of a dimension.

    Families contribute their table rows, their samples and the extra params.
    """
    from .isomorphism import fingerprint

    pool = []
    for entry in cat:
        if entry.dim != dim:
            continue
        if not entry.family:
            keys = [""]
        else:
            keys = list(dict.fromkeys(entry.special_keys() + entry.samples
                                      + [pair_key(p) for p in (params or [])]))
        for k in keys:
            A = instantiate(entry, parse_pair(k, entry.order) if k else None)
            pool.append((entry.label(k), A, fingerprint(A).fields()))
    return pool


def identify(A: Algebra, cat: Catalog | list, dim: int | None = None, params=None,
             budget: int = 120, seed: int = 0) -> str | None:
    """Label of a catalog instance with an exact isomorphism witness to A, if any."""
    from .isomorphism import fingerprint

    pool = cat if isinstance(cat, list) else catalog_pool(cat, dim or A.dim, params)
    fp = fingerprint(A).fields()
    for label, B, fpb in pool:
        if fpb != fp:
            continue
        if are_isomorphic(B, A, budget=budget, seed=seed).is_witness:
            return label
    return None
