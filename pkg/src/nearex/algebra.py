"""Sparse complex multivariate polynomials and parameterized polynomial systems.

Polynomials are stored as a map from exponent vectors to complex
coefficients.  A ``PolySystem`` bundles an ordered list of polynomials with a
role tag per indeterminate (variable / parameter / auxiliary / multiplier),
which is what lets the rest of the package treat "the same" polynomials as a
family over parameters, as unknowns in a fiber product, or as a homotopy.
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass, field

import numpy as np

VARIABLE = "variable"
PARAMETER = "parameter"
AUXILIARY = "auxiliary"
MULTIPLIER = "multiplier"
ROLES = (VARIABLE, PARAMETER, AUXILIARY, MULTIPLIER)


def seeded_rng(seed, *key):
    """Deterministic generator; extra integers derive independent streams."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def unit_complex(rng, n=None):
    """Random point(s) on the complex unit circle."""
    u = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return np.exp(1j * u)


class Polynomial:
    """A multivariate polynomial over the complex numbers.

    Terms with exactly zero coefficient are never stored, so two equal
    polynomials always have equal term maps.
    """

    __slots__ = ("terms", "arity")

    def __init__(self, terms, arity):
        items = terms.items() if isinstance(terms, dict) else terms
        clean = {}
        for exps, coeff in items:
            exps = tuple(int(e) for e in exps)
            if len(exps) != arity:
                raise ValueError(f"exponent vector {exps} has length {len(exps)}, expected {arity}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            coeff = complex(coeff)
            if exps in clean:
                coeff = clean[exps] + coeff
            if coeff == 0:
                clean.pop(exps, None)
            else:
                clean[exps] = coeff
        self.terms = clean
        self.arity = arity

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, arity):
        return cls({}, arity)

    @classmethod
    def constant(cls, value, arity):
        return cls({(0,) * arity: value}, arity)

    @classmethod
    def variable(cls, index, arity, coeff=1.0):
        exps = [0] * arity
        exps[index] = 1
        return cls({tuple(exps): coeff}, arity)

    @classmethod
    def monomial(cls, coeff, exps):
        return cls({tuple(exps): coeff}, len(exps))

    # -- queries ------------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def degree(self, indices=None):
        """Total degree, optionally restricted to a subset of indeterminates."""
        if not self.terms:
            return 0
        if indices is None:
            return max(sum(e) for e in self.terms)
        idx = list(indices)
        return max(sum(e[i] for i in idx) for e in self.terms)

    def coefficient_norm(self):
        if not self.terms:
            return 0.0
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.terms.values())))

    def __eq__(self, other):
        return (
            isinstance(other, Polynomial)
            and self.arity == other.arity
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.arity, frozenset(self.terms.items())))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other, self.arity)
        if other.arity != self.arity:
            raise ValueError("arity mismatch")
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        return Polynomial(out, self.arity)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({e: -c for e, c in self.terms.items()}, self.arity)

    def __sub__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other, self.arity)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            other = complex(other)
            return Polynomial({e: c * other for e, c in self.terms.items()}, self.arity)
        if other.arity != self.arity:
            raise ValueError("arity mismatch")
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return Polynomial(out, self.arity)

    __rmul__ = __mul__

    def __pow__(self, n):
        n = int(n)
        if n < 0:
            raise ValueError("negative power")
        result = Polynomial.constant(1.0, self.arity)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def diff(self, index):
        """Partial derivative with respect to indeterminate ``index``."""
        if not 0 <= index < self.arity:
            raise IndexError(index)
        out = {}
        for e, c in self.terms.items():
            k = e[index]
            if k == 0:
                continue
            de = list(e)
            de[index] = k - 1
            out[tuple(de)] = c * k
        return Polynomial(out, self.arity)

    def evaluate(self, point):
        point = np.asarray(point, dtype=complex)
        if point.shape[0] != self.arity:
            raise ValueError("point length does not match arity")
        total = 0.0 + 0.0j
        for e, c in self.terms.items():
            v = c
            for i, k in enumerate(e):
                if k:
                    v *= point[i] ** k
            total += v
        return total

    def remap(self, new_arity, index_map):
        """Embed into a larger (or reordered) indeterminate list.

        ``index_map[i]`` is the new index of old indeterminate ``i``.
        """
        out = {}
        for e, c in self.terms.items():
            ne = [0] * new_arity
            for i, k in enumerate(e):
                if k:
                    ne[index_map[i]] += k
            key = tuple(ne)
            out[key] = out.get(key, 0) + c
        return Polynomial(out, new_arity)

    def compose(self, args, new_arity):
        """Substitute ``args[i]`` (a Polynomial of ``new_arity``) for each indeterminate."""
        if len(args) != self.arity:
            raise ValueError("need one replacement per indeterminate")
        total = Polynomial.zero(new_arity)
        for e, c in self.terms.items():
            term = Polynomial.constant(c, new_arity)
            for i, k in enumerate(e):
                if k:
                    term = term * args[i] ** k
            total = total + term
        return total

    def substitute(self, values):
        """Partially evaluate: ``values`` maps indeterminate index -> complex.

        Returns a polynomial over the remaining indeterminates (in order).
        """
        keep = [i for i in range(self.arity) if i not in values]
        pos = {i: j for j, i in enumerate(keep)}
        out = {}
        for e, c in self.terms.items():
            v = c
            for i, val in values.items():
                if e[i]:
                    v *= complex(val) ** e[i]
            key = tuple(e[i] for i in keep)
            s = out.get(key, 0) + v
            if s == 0:
                out.pop(key, None)
            else:
                out[key] = s
        return Polynomial(out, len(keep))

    def __repr__(self):
        return f"Polynomial({format_polynomial(self)})"


def format_polynomial(poly, names=None):
    if not poly.terms:
        return "0"
    names = names or [f"z{i}" for i in range(poly.arity)]
    pieces = []
    for e in sorted(poly.terms, key=lambda t: (sum(t), t)):
        c = poly.terms[e]
        factors = [_format_complex(c)]
        for i, k in enumerate(e):
            if k == 1:
                factors.append(names[i])
            elif k > 1:
                factors.append(f"{names[i]}^{k}")
        pieces.append("*".join(factors))
    return " + ".join(pieces)


def _format_complex(c):
    if c.imag == 0:
        return f"({c.real!r})"
    return f"({c.real!r}+{c.imag!r}i)" if c.imag >= 0 else f"({c.real!r}-{abs(c.imag)!r}i)"


class CompiledSystem:
    """Flat-array form of a polynomial list for fast evaluation and Jacobians."""

    def __init__(self, polynomials, arity):
        self.arity = arity
        self.n_eqs = len(polynomials)
        rows, coeffs, fvar, fexp, fterm = [], [], [], [], []
        t = 0
        for r, poly in enumerate(polynomials):
            for e, c in poly.terms.items():
                rows.append(r)
                coeffs.append(c)
                for i, k in enumerate(e):
                    if k:
                        fvar.append(i)
                        fexp.append(k)
                        fterm.append(t)
                t += 1
        self.rows = np.asarray(rows, dtype=np.intp)
        self.coeffs = np.asarray(coeffs, dtype=complex)
        self.fvar = np.asarray(fvar, dtype=np.intp)
        self.fexp = np.asarray(fexp, dtype=np.intp)
        self.fterm = np.asarray(fterm, dtype=np.intp)
        self.n_terms = t

        jrow, jcol, jcoeff, jfvar, jfexp, jfterm = [], [], [], [], [], []
        jt = 0
        for r, poly in enumerate(polynomials):
            for e, c in poly.terms.items():
                for i, k in enumerate(e):
                    if not k:
                        continue
                    jrow.append(r)
                    jcol.append(i)
                    jcoeff.append(c * k)
                    for i2, k2 in enumerate(e):
                        k2 = k2 - 1 if i2 == i else k2
                        if k2:
                            jfvar.append(i2)
                            jfexp.append(k2)
                            jfterm.append(jt)
                    jt += 1
        self.jrow = np.asarray(jrow, dtype=np.intp)
        self.jcol = np.asarray(jcol, dtype=np.intp)
        self.jcoeff = np.asarray(jcoeff, dtype=complex)
        self.jfvar = np.asarray(jfvar, dtype=np.intp)
        self.jfexp = np.asarray(jfexp, dtype=np.intp)
        self.jfterm = np.asarray(jfterm, dtype=np.intp)
        self.jn_terms = jt

        self.coefficient_norm = float(np.linalg.norm(self.coeffs)) if t else 0.0

    def evaluate(self, point):
        point = np.asarray(point, dtype=complex)
        if point.shape[0] != self.arity:
            raise ValueError(f"point length {point.shape[0]} != arity {self.arity}")
        mono = np.ones(self.n_terms, dtype=complex)
        if self.fvar.size:
            np.multiply.at(mono, self.fterm, point[self.fvar] ** self.fexp)
        out = np.zeros(self.n_eqs, dtype=complex)
        np.add.at(out, self.rows, self.coeffs * mono)
        return out

    def jacobian(self, point):
        point = np.asarray(point, dtype=complex)
        mono = np.ones(self.jn_terms, dtype=complex)
        if self.jfvar.size:
            np.multiply.at(mono, self.jfterm, point[self.jfvar] ** self.jfexp)
        out = np.zeros(self.n_eqs * self.arity, dtype=complex)
        np.add.at(out, self.jrow * self.arity + self.jcol, self.jcoeff * mono)
        return out.reshape(self.n_eqs, self.arity)


class PolySystem:
    """An ordered list of polynomials with per-indeterminate roles and names.

    Instances are immutable by convention; all operations return new systems.
    """

    def __init__(self, polynomials, roles, names):
        roles = list(roles)
        names = list(names)
        if len(roles) != len(names):
            raise ValueError("roles and names must have equal length")
        if len(set(names)) != len(names):
            raise ValueError("indeterminate names must be unique")
        for r in roles:
            if r not in ROLES:
                raise ValueError(f"unknown role {r!r}")
        arity = len(roles)
        for p in polynomials:
            if p.arity != arity:
                raise ValueError(
                    f"polynomial arity {p.arity} does not match indeterminate count {arity}"
                )
        self.polynomials = list(polynomials)
        self.roles = roles
        self.names = names
        self._compiled = None

    @property
    def arity(self):
        return len(self.roles)

    def indices(self, *roles):
        return [i for i, r in enumerate(self.roles) if r in roles]

    def index_of(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(name) from None

    @property
    def compiled(self):
        if self._compiled is None:
            self._compiled = CompiledSystem(self.polynomials, self.arity)
        return self._compiled

    def evaluate(self, point):
        return self.compiled.evaluate(point)

    def jacobian(self, point, cols=None):
        J = self.compiled.jacobian(point)
        return J if cols is None else J[:, list(cols)]

    def coefficient_norm(self):
        return self.compiled.coefficient_norm

    def degrees(self, indices=None):
        return [p.degree(indices) for p in self.polynomials]

    def substitute(self, values):
        """Fix indeterminates (index -> value); remaining ones keep their order."""
        keep = [i for i in range(self.arity) if i not in values]
        return PolySystem(
            [p.substitute(values) for p in self.polynomials],
            [self.roles[i] for i in keep],
            [self.names[i] for i in keep],
        )

    def substitute_params(self, values):
        """Fix all parameter-role indeterminates to the given vector."""
        par = self.indices(PARAMETER)
        if len(par) != len(values):
            raise ValueError(f"expected {len(par)} parameter values, got {len(values)}")
        return self.substitute(dict(zip(par, values)))

    def with_polynomials(self, polynomials):
        return PolySystem(polynomials, self.roles, self.names)

    def __len__(self):
        return len(self.polynomials)

    def __repr__(self):
        return f"PolySystem({len(self.polynomials)} eqs, names={self.names})"

    def __eq__(self, other):
        return (
            isinstance(other, PolySystem)
            and self.roles == other.roles
            and self.names == other.names
            and self.polynomials == other.polynomials
        )


@dataclass
class HomogenizationScheme:
    """Partition of the variable indices into multihomogeneous groups.

    ``hom_indices`` and ``patches`` are filled in by :func:`homogenize`, or may
    be supplied for systems that are already homogeneous.
    """

    groups: list
    hom_names: list = None
    hom_indices: list = None
    patches: list = None  # per group: affine patch coefficients, or None

    def n_groups(self):
        return len(self.groups)


class ParseError(ValueError):
    def __init__(self, message, line, col):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?i?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*^();,])
    """,
    re.VERBOSE,
)


def _tokenize(text):
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            tokens.append((kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    tokens.append(("eof", "", line, col))
    return tokens


class _Parser:
    """Recursive-descent parser for the problem-source grammar."""

    ROLE_KEYWORDS = {"vars": VARIABLE, "params": PARAMETER, "aux": AUXILIARY}

    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.names = []
        self.roles = []
        self.index = {}
        self.polys = []

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            raise ParseError(f"expected {want!r}, found {tok[1]!r}", tok[2], tok[3])
        return tok

    def parse(self):
        while self.peek()[0] != "eof":
            tok = self.peek()
            if tok[0] != "name":
                raise ParseError(f"expected a declaration or 'poly', found {tok[1]!r}", tok[2], tok[3])
            if tok[1] in self.ROLE_KEYWORDS:
                self.declaration(self.ROLE_KEYWORDS[tok[1]])
            elif tok[1] == "poly":
                self.poly_statement()
            else:
                raise ParseError(f"unknown statement {tok[1]!r}", tok[2], tok[3])
        if not self.polys:
            raise ParseError("no polynomials declared", *self.peek()[2:])
        return PolySystem(self.polys, self.roles, self.names)

    def declaration(self, role):
        if self.polys:
            tok = self.peek()
            raise ParseError("declarations must precede poly statements", tok[2], tok[3])
        self.next()
        while True:
            tok = self.expect("name")
            name = tok[1]
            if name in self.index:
                raise ParseError(f"duplicate indeterminate {name!r}", tok[2], tok[3])
            self.index[name] = len(self.names)
            self.names.append(name)
            self.roles.append(role)
            tok = self.next()
            if tok[1] == ";":
                return
            if tok[1] != ",":
                raise ParseError(f"expected ',' or ';', found {tok[1]!r}", tok[2], tok[3])

    def poly_statement(self):
        self.next()
        poly = self.expression()
        self.expect("op", ";")
        self.polys.append(poly)

    @property
    def arity(self):
        return len(self.names)

    def expression(self):
        sign = 1.0
        tok = self.peek()
        while tok[1] in ("+", "-"):
            if tok[1] == "-":
                sign = -sign
            self.next()
            tok = self.peek()
        total = self.term() * sign
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            rhs = self.term()
            total = total + rhs if op == "+" else total - rhs
        return total

    def term(self):
        total = self.factor()
        while self.peek()[1] == "*":
            self.next()
            total = total * self.factor()
        return total

    def factor(self):
        tok = self.peek()
        if tok[1] in ("+", "-"):
            self.next()
            f = self.factor()
            return f if tok[1] == "+" else -f
        base = self.atom()
        if self.peek()[1] == "^":
            self.next()
            etok = self.next()
            if etok[0] != "number":
                raise ParseError("exponent must be an integer literal", etok[2], etok[3])
            text = etok[1]
            if text.endswith("i") or "." in text or "e" in text or "E" in text:
                raise ParseError(f"non-integer exponent {text!r}", etok[2], etok[3])
            return base ** int(text)
        return base

    def atom(self):
        tok = self.next()
        if tok[0] == "number":
            text = tok[1]
            if text.endswith("i"):
                return Polynomial.constant(1j * float(text[:-1]), self.arity)
            return Polynomial.constant(float(text), self.arity)
        if tok[0] == "name":
            if tok[1] in self.index:
                return Polynomial.variable(self.index[tok[1]], self.arity)
            if tok[1] == "i":
                return Polynomial.constant(1j, self.arity)
            raise ParseError(f"undeclared indeterminate {tok[1]!r}", tok[2], tok[3])
        if tok[1] == "(":
            inner = self.expression()
            self.expect("op", ")")
            return inner
        raise ParseError(f"unexpected token {tok[1]!r}", tok[2], tok[3])


def parse_system(text):
    """Parse the problem-source grammar into a :class:`PolySystem`."""
    return _Parser(text).parse()


def format_system(sys):
    """Serialize to the problem-source grammar (parse round-trips exactly)."""
    keyword = {VARIABLE: "vars", PARAMETER: "params", AUXILIARY: "aux"}
    lines = []
    i = 0
    while i < sys.arity:
        role = sys.roles[i]
        j = i
        while j < sys.arity and sys.roles[j] == role:
            j += 1
        lines.append(f"{keyword[role]} {','.join(sys.names[i:j])};")
        i = j
    for p in sys.polynomials:
        lines.append(f"poly {format_polynomial(p, sys.names)};")
    return "\n".join(lines) + "\n"


def evaluate(sys, point):
    """Evaluate every polynomial of ``sys`` at ``point`` (full arity)."""
    point = np.asarray(point, dtype=complex)
    if point.shape[0] != sys.arity:
        raise ValueError(f"point length {point.shape[0]} != arity {sys.arity}")
    return sys.evaluate(point)


def differentiate(sys, wrt):
    """Term-wise symbolic partial derivative of every polynomial."""
    if not 0 <= wrt < sys.arity:
        raise IndexError(wrt)
    return sys.with_polynomials([p.diff(wrt) for p in sys.polynomials])


def homogenize(sys, scheme, seed=0):
    """(Multi)homogenize the variable blocks and add one generic patch per group.

    Each group gains a homogenizing variable; every polynomial becomes
    homogeneous of its group-degrees; an affine patch with unit-modulus random
    coefficients (or the scheme's fixed patch) is appended per group.  Returns
    ``(new_system, realized_scheme)``.
    """
    var_idx = sys.indices(VARIABLE)
    flat = [i for g in scheme.groups for i in g]
    if sorted(flat) != sorted(var_idx) or len(flat) != len(set(flat)):
        raise ValueError("scheme groups must partition the variable indices")
    rng = seeded_rng(seed)
    g = len(scheme.groups)
    old_arity = sys.arity
    new_arity = old_arity + g
    hom_names = list(scheme.hom_names or [f"h{k}" for k in range(g)])
    for nm in hom_names:
        if nm in sys.names:
            raise ValueError(f"homogenizing name {nm!r} already in use")
    index_map = list(range(old_arity))
    hom_indices = [old_arity + k for k in range(g)]

    new_polys = []
    for p in sys.polynomials:
        out = {}
        gdegs = [max((sum(e[i] for i in grp) for e in p.terms), default=0)
                 for grp in scheme.groups]
        for e, c in p.terms.items():
            ne = list(e) + [0] * g
            for k, grp in enumerate(scheme.groups):
                ne[hom_indices[k]] = gdegs[k] - sum(e[i] for i in grp)
            out[tuple(ne)] = c
        new_polys.append(Polynomial(out, new_arity))

    patches = []
    patch_polys = []
    for k, grp in enumerate(scheme.groups):
        support = [hom_indices[k]] + [index_map[i] for i in grp]
        if scheme.patches is not None and scheme.patches[k] is not None:
            coeffs = np.asarray(scheme.patches[k], dtype=complex)
            if coeffs.shape[0] != len(support):
                raise ValueError("patch coefficient count mismatch")
        else:
            coeffs = unit_complex(rng, len(support))
        if not np.any(coeffs):
            raise ValueError("patch must have a nonzero coefficient")
        terms = {}
        for i, c in zip(support, coeffs):
            e = [0] * new_arity
            e[i] = 1
            terms[tuple(e)] = c
        terms[(0,) * new_arity] = -1.0
        patch_polys.append(Polynomial(terms, new_arity))
        patches.append(coeffs)

    out_sys = PolySystem(
        new_polys + patch_polys,
        sys.roles + [VARIABLE] * g,
        sys.names + hom_names,
    )
    realized = HomogenizationScheme(
        groups=[list(grp) for grp in scheme.groups],
        hom_names=hom_names,
        hom_indices=hom_indices,
        patches=patches,
    )
    return out_sys, realized


def dehomogenize_check(hom_sys, scheme, original):
    """True if setting homogenizing variables to 1 and dropping patches gives back ``original``."""
    n_pat = scheme.n_groups()
    sub = {i: 1.0 for i in scheme.hom_indices}
    stripped = hom_sys.with_polynomials(hom_sys.polynomials[: len(hom_sys.polynomials) - n_pat])
    return stripped.substitute(sub) == original


def randomize(sys, target_count, seed=0):
    """[I | R] randomization: keep the first ``target_count`` rows, folding in
    unit-modulus random multiples of the trailing polynomials."""
    k = len(sys.polynomials)
    if target_count > k:
        raise ValueError(f"target_count {target_count} exceeds polynomial count {k}")
    rng = seeded_rng(seed)
    trailing = sys.polynomials[target_count:]
    out = []
    for i in range(target_count):
        p = sys.polynomials[i]
        for q in trailing:
            p = p + q * complex(unit_complex(rng))
        out.append(p)
    return sys.with_polynomials(out)


def generic_slice(n_vars, codim, seed=0, coefficients=None):
    """``codim`` generic affine-linear polynomials in ``n_vars`` indeterminates.

    ``coefficients`` (rows of length n_vars+1, constant last) fixes the slice
    instead of drawing it from the seed.
    """
    if not 0 < codim <= n_vars:
        raise ValueError(f"codim must be in 1..{n_vars}, got {codim}")
    if coefficients is not None:
        coeffs = np.asarray(coefficients, dtype=complex).reshape(codim, n_vars + 1)
    else:
        rng = seeded_rng(seed)
        coeffs = unit_complex(rng, (codim, n_vars + 1))
    polys = []
    for row in coeffs:
        terms = {}
        for i in range(n_vars):
            if row[i] != 0:
                e = [0] * n_vars
                e[i] = 1
                terms[tuple(e)] = row[i]
        if row[n_vars] != 0:
            terms[(0,) * n_vars] = row[n_vars]
        polys.append(Polynomial(terms, n_vars))
    names = [f"s{i}" for i in range(n_vars)]
    return PolySystem(polys, [VARIABLE] * n_vars, names)


def slice_coefficient_rows(slice_sys):
    """Extract the (codim, n+1) affine coefficient rows of a linear system."""
    n = slice_sys.arity
    rows = np.zeros((len(slice_sys.polynomials), n + 1), dtype=complex)
    for r, p in enumerate(slice_sys.polynomials):
        for e, c in p.terms.items():
            if sum(e) == 0:
                rows[r, n] = c
            elif sum(e) == 1:
                rows[r, e.index(1)] = c
            else:
                raise ValueError("system is not affine-linear")
    return rows


def concat_systems(parts, roles, names):
    """Stack the polynomials of several systems sharing one indeterminate list."""
    polys = []
    for part in parts:
        polys.extend(part.polynomials)
    return PolySystem(polys, roles, names)
