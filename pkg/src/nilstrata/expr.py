"""Parser for scalar expressions and psi-notation structure sums.

Scalars are integers combined with + - * / ^ and parentheses; ``z`` is the
primitive N-th root of unity. Other identifiers are free parameters and are
carried symbolically as polynomials until substituted. A term ``p(i,j;k)``
denotes the elementary product e_i * e_j = e_k (1-based).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .cyclo import DEFAULT_ORDER, CycloScalar


class ExprError(ValueError):
    pass


Monomial = tuple[tuple[str, int], ...]


class Poly:
    """Polynomial in named parameters with CycloScalar coefficients."""

    __slots__ = ("terms", "order")

    def __init__(self, terms: dict[Monomial, CycloScalar] | None = None, order: int = DEFAULT_ORDER):
        self.order = order
        self.terms = {m: c for m, c in (terms or {}).items() if not c.is_zero()}

    @classmethod
    def const(cls, c, order: int = DEFAULT_ORDER) -> Poly:
        return cls({(): CycloScalar.coerce(c, order)}, order)

    @classmethod
    def var(cls, name: str, order: int = DEFAULT_ORDER) -> Poly:
        return cls({((name, 1),): CycloScalar.rational(1, order)}, order)

    def is_constant(self) -> bool:
        return all(m == () for m in self.terms)

    def constant(self) -> CycloScalar:
        return self.terms.get((), CycloScalar((), self.order))

    def symbols(self) -> set[str]:
        return {name for m in self.terms for name, _ in m}

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.terms), default=0)

    def __add__(self, other: Poly) -> Poly:
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return Poly(out, self.order)

    def __neg__(self) -> Poly:
        return Poly({m: -c for m, c in self.terms.items()}, self.order)

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other: Poly) -> Poly:
        out: dict[Monomial, CycloScalar] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out[m] + c1 * c2 if m in out else c1 * c2
        return Poly(out, self.order)

    def scale(self, c: CycloScalar) -> Poly:
        return Poly({m: v * c for m, v in self.terms.items()}, self.order)

    def substitute(self, values: dict[str, CycloScalar]) -> Poly:
        out = Poly({}, self.order)
        for m, c in self.terms.items():
            coeff = c
            rest = []
            for name, e in m:
                if name in values:
                    coeff = coeff * CycloScalar.coerce(values[name], self.order) ** e
                else:
                    rest.append((name, e))
            out = out + Poly({tuple(rest): coeff}, self.order)
        return out

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __repr__(self):
        return f"Poly({self.terms!r})"


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    exps: dict[str, int] = dict(a)
    for name, e in b:
        exps[name] = exps.get(name, 0) + e
    return tuple(sorted(exps.items()))


@dataclass
class PsiSum:
    """Linear combination of elementary products, keyed by 0-based (i, j, k)."""

    terms: dict[tuple[int, int, int], Poly]
    order: int = DEFAULT_ORDER

    def __add__(self, other: PsiSum) -> PsiSum:
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out[key] + c if key in out else c
        return PsiSum(out, self.order)

    def __neg__(self) -> PsiSum:
        return PsiSum({k: -c for k, c in self.terms.items()}, self.order)

    def scale(self, p: Poly) -> PsiSum:
        return PsiSum({k: c * p for k, c in self.terms.items()}, self.order)


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<psi>p\(\s*\d+\s*,\s*\d+\s*;\s*\d+\s*\))
      | (?P<num>\d+)
      | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>[-+*/^()])
    )""",
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    pos = 0
    toks = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprError(f"unexpected character at position {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, text: str, order: int, env: dict | None = None):
        self.toks = _tokenize(text)
        self.env = {k: CycloScalar.coerce(v, order) for k, v in (env or {}).items()}
        self.i = 0
        self.order = order
        self.text = text

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            raise ExprError(f"expected {value!r} at position {pos}")

    def parse(self):
        if not self.toks:
            return None
        val = self.expr()
        if self.i != len(self.toks):
            raise ExprError(f"trailing input at position {self.peek()[2]}")
        return val

    def expr(self):
        val = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            val = _add(val, rhs if op == "+" else _neg(rhs))
        return val

    def term(self):
        val = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            val = _mul(val, rhs) if op == "*" else _div(val, rhs)
        return val

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return _neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            exp = self.unary()
            if not isinstance(exp, Poly) or not exp.is_constant():
                raise ExprError("exponent must be a constant integer")
            e = exp.constant()
            if not e.is_rational() or e.to_fraction().denominator != 1:
                raise ExprError("exponent must be an integer")
            return _pow(base, int(e.to_fraction()))
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind is None:
            raise ExprError("unexpected end of expression")
        if kind == "num":
            return Poly.const(int(val), self.order)
        if kind == "ident":
            if val == "z":
                return Poly.const(CycloScalar.zeta(1, self.order), self.order)
            if val in self.env:
                return Poly.const(self.env[val], self.order)
            return Poly.var(val, self.order)
        if kind == "psi":
            i, j, k = (int(x) for x in re.findall(r"\d+", val))
            if min(i, j, k) < 1:
                raise ExprError(f"psi indices are 1-based: {val}")
            return PsiSum({(i - 1, j - 1, k - 1): Poly.const(1, self.order)}, self.order)
        if val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ExprError(f"unexpected {val!r} at position {pos}")


def _add(a, b):
    if isinstance(a, Poly) and isinstance(b, Poly):
        return a + b
    if isinstance(a, PsiSum) and isinstance(b, PsiSum):
        return a + b
    raise ExprError("cannot add a scalar to a psi term")


def _neg(a):
    return -a


def _mul(a, b):
    if isinstance(a, Poly) and isinstance(b, Poly):
        return a * b
    if isinstance(a, PsiSum) and isinstance(b, Poly):
        return a.scale(b)
    if isinstance(a, Poly) and isinstance(b, PsiSum):
        return b.scale(a)
    raise ExprError("product of two psi terms is not a structure")


def _div(a, b):
    if not isinstance(b, Poly) or not b.is_constant():
        raise ExprError("division only by constant scalars")
    c = b.constant()
    if c.is_zero():
        raise ExprError("division by zero")
    inv = c.inverse()
    return a.scale(inv) if isinstance(a, Poly) else a.scale(Poly.const(inv, a.order))


def _pow(a, e: int):
    if not isinstance(a, Poly):
        raise ExprError("psi terms cannot be raised to a power")
    if e < 0:
        if not a.is_constant():
            raise ExprError("negative powers only of constants")
        if a.constant().is_zero():
            raise ExprError("division by zero")
        return Poly.const(a.constant() ** e, a.order)
    out = Poly.const(1, a.order)
    for _ in range(e):
        out = out * a
    return out


def parse_expression(text: str, order: int = DEFAULT_ORDER, env: dict | None = None):
    """Parse text into a Poly, a PsiSum, or None for the empty string.

    Identifiers found in env are replaced by their values while parsing.
    """
    return _Parser(text, order, env).parse()


def parse_scalar(text: str, params: dict | None = None, order: int = DEFAULT_ORDER) -> CycloScalar:
    val = parse_expression(text, order, params)
    if val is None:
        raise ExprError("empty scalar expression")
    if isinstance(val, PsiSum):
        raise ExprError("expected a scalar, found a psi term")
    if not val.is_constant():
        raise ExprError(f"unresolved parameter symbol(s): {', '.join(sorted(val.symbols()))}")
    return val.constant()


def parse_psi_sum(text: str, order: int = DEFAULT_ORDER, env: dict | None = None) -> PsiSum:
    val = parse_expression(text, order, env)
    if val is None:
        return PsiSum({}, order)
    if isinstance(val, Poly):
        if not val.terms:
            return PsiSum({}, order)
        raise ExprError("expected a sum of p(i,j;k) terms")
    return val


def render_scalar_coeff(c: CycloScalar) -> str:
    """Coefficient text that re-parses to c."""
    if c.is_rational():
        f = c.to_fraction()
        return str(f) if f.denominator == 1 else f"({f})"
    return f"({c})"

