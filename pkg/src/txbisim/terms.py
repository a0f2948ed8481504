"""Process terms: construction, interning, parsing, printing, substitution.

The term language has deadlock ``0``, action prefixing ``alpha.E`` (where an
action is a visible name, the internal step ``tau``, or the time-out ``t``),
binary choice ``E + F``, synchronised parallel composition ``E ||{S} F``,
abstraction ``tau{I}(E)``, relational renaming ``ren{a->b,...}(E)``, the
environment operators ``theta{L;U}(E)`` and ``psi{X}(E)``, and recursion via
named specifications ``<x|S>``.

Terms are interned: construction goes through the ``mk_*`` factories, which
normalise sums (flatten, drop ``0`` summands, sort children) and return a
shared node per distinct structure.  Identical structure therefore means
identical object, and every node carries a stable integer ``uid``.  Summand
duplication is deliberately kept: ``x + x`` does not collapse to ``x``.

The store is append-only after construction; concurrent readers are safe,
construction itself is single-writer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InvalidTermError, ParseError, UndefinedNameError

__all__ = [
    "Action",
    "TAU",
    "TIMEOUT",
    "visible",
    "EnvSet",
    "envset",
    "EMPTY_ENV",
    "Term",
    "Nil",
    "Prefix",
    "Choice",
    "Par",
    "Abstract",
    "Rename",
    "Theta",
    "Psi",
    "Var",
    "RecCall",
    "RecSpec",
    "NIL",
    "mk_prefix",
    "mk_choice",
    "sum_of",
    "summands",
    "mk_par",
    "mk_abstract",
    "mk_rename",
    "mk_theta",
    "mk_psi",
    "mk_var",
    "mk_recspec",
    "mk_reccall",
    "spec_close",
    "free_vars",
    "validate",
    "ValidationReport",
    "substitute",
    "alphabet",
    "Definitions",
    "parse_file",
    "parse_term",
    "term_text",
    "definitions_text",
]

# Names reserved for the action and label namespace.  ``tau`` and ``t`` are
# the internal step and the time-out; the remaining spellings are claimed by
# the transition-system label conventions.
RESERVED = frozenset({"tau", "t", "t_eps", "def", "spec", "theta", "psi", "ren"})

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_ACT_RE = re.compile(r"[a-z][a-z0-9_]*\Z")


def _check_action_name(name):
    if not _ACT_RE.match(name):
        raise InvalidTermError(f"action names are lowercase identifiers: {name!r}")
    if name in RESERVED or name.startswith("eps_"):
        raise InvalidTermError(f"reserved spelling cannot name a visible action: {name!r}")


# ---------------------------------------------------------------------------
# Actions


@dataclass(frozen=True, slots=True)
class Action:
    """A transition label at the term level: visible name, ``tau``, or ``t``."""

    kind: str  # "vis" | "tau" | "t"
    name: str

    @property
    def is_visible(self):
        return self.kind == "vis"

    @property
    def in_a_tau(self):
        """Membership in the instantaneous actions (visible or ``tau``)."""
        return self.kind != "t"

    def sort_key(self):
        return ({"vis": 0, "tau": 1, "t": 2}[self.kind], self.name)

    def __str__(self):
        return self.name


TAU = Action("tau", "tau")
TIMEOUT = Action("t", "t")

_VISIBLE_CACHE: dict[str, Action] = {}


def visible(name):
    """The visible action with the given (validated) name."""
    act = _VISIBLE_CACHE.get(name)
    if act is None:
        _check_action_name(name)
        act = Action("vis", name)
        _VISIBLE_CACHE[name] = act
    return act


# ---------------------------------------------------------------------------
# Environment sets


class EnvSet:
    """An immutable, canonically ordered set of visible action names."""

    __slots__ = ("names", "_set")

    def __init__(self, names):
        object.__setattr__(self, "names", tuple(names))
        object.__setattr__(self, "_set", frozenset(self.names))

    def __contains__(self, name):
        return name in self._set

    def __iter__(self):
        return iter(self.names)

    def __len__(self):
        return len(self.names)

    def __eq__(self, other):
        return isinstance(other, EnvSet) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __le__(self, other):
        return self._set <= other._set

    def union(self, other):
        return envset(self._set | set(other))

    def intersection(self, other):
        return envset(self._set & set(other))

    def isdisjoint(self, other):
        return self._set.isdisjoint(set(other))

    def text(self):
        return "{" + ",".join(self.names) + "}"

    def __repr__(self):
        return f"EnvSet({self.names!r})"


_ENVSET_CACHE: dict[tuple, EnvSet] = {}


def envset(names=()):
    """Canonical EnvSet over the given visible action names."""
    ordered = tuple(sorted(set(names)))
    cached = _ENVSET_CACHE.get(ordered)
    if cached is None:
        for n in ordered:
            _check_action_name(n)
        cached = EnvSet(ordered)
        _ENVSET_CACHE[ordered] = cached
    return cached


EMPTY_ENV = envset()


# ---------------------------------------------------------------------------
# Term nodes

_INTERN: dict[tuple, "Term"] = {}
_UID = 0


def _next_uid():
    global _UID
    _UID += 1
    return _UID


class Term:
    """Base class of interned process terms.

    Every node caches its free variables (``fv``), the variables that occur
    free inside the body of some ``theta``/``psi`` subterm and are not yet
    bound (``tp_pending``), and a validity bit: a term is invalid when a
    ``theta``/``psi`` body has a free variable that a surrounding recursive
    specification binds.
    """

    __slots__ = ("uid", "fv", "tp_pending", "valid", "size")

    kindname = "term"

    def __repr__(self):
        return f"<{term_text(self)}>"


def _finish(node, fv, tp_pending, valid, size):
    node.uid = _next_uid()
    node.fv = fv
    node.tp_pending = tp_pending
    node.valid = valid
    node.size = size
    return node


class Nil(Term):
    __slots__ = ()
    kindname = "nil"


NIL = _finish(Nil(), frozenset(), frozenset(), True, 1)
_INTERN[("nil",)] = NIL


class Prefix(Term):
    __slots__ = ("action", "body")
    kindname = "prefix"


class Choice(Term):
    __slots__ = ("left", "right")
    kindname = "choice"


class Par(Term):
    __slots__ = ("left", "sync", "right")
    kindname = "par"


class Abstract(Term):
    __slots__ = ("hide", "body")
    kindname = "abstract"


class Rename(Term):
    __slots__ = ("pairs", "body")
    kindname = "rename"


class Theta(Term):
    __slots__ = ("lower", "upper", "body")
    kindname = "theta"


class Psi(Term):
    __slots__ = ("env", "body")
    kindname = "psi"


class Var(Term):
    __slots__ = ("name",)
    kindname = "var"


class RecCall(Term):
    __slots__ = ("var", "spec")
    kindname = "reccall"


class RecSpec:
    """A recursive specification: one defining equation per variable.

    Interned like terms; equality is object identity.  The display name used
    by the concrete syntax lives in ``Definitions``, not here, so the same
    specification parsed under two names is shared.
    """

    __slots__ = ("uid", "vars", "bodies", "fv", "tp_pending", "valid")

    def __init__(self, vars_, bodies):
        self.vars = vars_
        self.bodies = bodies
        self.uid = _next_uid()
        binder = frozenset(vars_)
        self.fv = frozenset().union(*(b.fv for b in bodies)) - binder if bodies else frozenset()
        pend = frozenset().union(*(b.tp_pending for b in bodies)) if bodies else frozenset()
        # the capture check: a theta/psi body below must not mention a
        # variable this specification binds
        self.valid = all(b.valid for b in bodies) and not (pend & binder)
        self.tp_pending = pend - binder

    def body(self, var):
        return self.bodies[self.vars.index(var)]

    def equations(self):
        return dict(zip(self.vars, self.bodies))

    def __repr__(self):
        eqs = "; ".join(f"{v} = {term_text(b)}" for v, b in zip(self.vars, self.bodies))
        return f"<spec {eqs}>"


_SPEC_INTERN: dict[tuple, RecSpec] = {}


def mk_recspec(equations):
    """Intern a recursive specification from a var -> term mapping."""
    if not equations:
        raise InvalidTermError("a recursive specification needs at least one equation")
    items = sorted(equations.items())
    for v, _ in items:
        if not _NAME_RE.match(v) or v in RESERVED:
            raise InvalidTermError(f"bad specification variable: {v!r}")
    key = tuple((v, b.uid) for v, b in items)
    spec = _SPEC_INTERN.get(key)
    if spec is None:
        spec = RecSpec(tuple(v for v, _ in items), tuple(b for _, b in items))
        _SPEC_INTERN[key] = spec
    return spec


# ---------------------------------------------------------------------------
# Factories


def mk_prefix(action, body):
    if not isinstance(action, Action):
        raise InvalidTermError(f"prefix needs an Action, got {action!r}")
    key = ("pre", action.kind, action.name, body.uid)
    node = _INTERN.get(key)
    if node is None:
        node = Prefix()
        node.action = action
        node.body = body
        _finish(node, body.fv, body.tp_pending, body.valid, body.size + 1)
        _INTERN[key] = node
    return node


def summands(term):
    """The flat summand list of a sum (a non-sum term is its own summand)."""
    out = []
    stack = [term]
    while stack:
        node = stack.pop()
        if isinstance(node, Choice):
            stack.append(node.left)
            stack.append(node.right)
        else:
            out.append(node)
    out.reverse()
    return out


def _raw_choice(left, right):
    # plain binary node, no normalisation; the basis mk_choice builds on
    key = ("cho", left.uid, right.uid)
    node = _INTERN.get(key)
    if node is None:
        node = Choice()
        node.left = left
        node.right = right
        _finish(
            node,
            left.fv | right.fv,
            left.tp_pending | right.tp_pending,
            left.valid and right.valid,
            left.size + right.size + 1,
        )
        _INTERN[key] = node
    return node


def mk_choice(left, right):
    """Sum of two terms, normalised: flattened, ``0`` dropped, sorted.

    Duplicate summands are kept; idempotence is an equivalence to be proved,
    not a structural identity.
    """
    items = [s for s in summands(left) + summands(right) if s is not NIL]
    if not items:
        return NIL
    items.sort(key=lambda t: t.uid)
    acc = items[0]
    for item in items[1:]:
        acc = _raw_choice(acc, item)
    return acc


def sum_of(terms):
    acc = NIL
    for term in terms:
        acc = mk_choice(acc, term)
    return acc


def mk_par(left, sync, right):
    key = ("par", left.uid, sync.names, right.uid)
    node = _INTERN.get(key)
    if node is None:
        node = Par()
        node.left = left
        node.sync = sync
        node.right = right
        _finish(
            node,
            left.fv | right.fv,
            left.tp_pending | right.tp_pending,
            left.valid and right.valid,
            left.size + right.size + 1,
        )
        _INTERN[key] = node
    return node


def mk_abstract(hide, body):
    key = ("abs", hide.names, body.uid)
    node = _INTERN.get(key)
    if node is None:
        node = Abstract()
        node.hide = hide
        node.body = body
        _finish(node, body.fv, body.tp_pending, body.valid, body.size + 1)
        _INTERN[key] = node
    return node


def mk_rename(pairs, body):
    """Renaming by a finite relation on visible actions, given as (src, dst) pairs."""
    canon = tuple(sorted(set(pairs)))
    for src, dst in canon:
        _check_action_name(src)
        _check_action_name(dst)
    key = ("ren", canon, body.uid)
    node = _INTERN.get(key)
    if node is None:
        node = Rename()
        node.pairs = canon
        node.body = body
        _finish(node, body.fv, body.tp_pending, body.valid, body.size + 1)
        _INTERN[key] = node
    return node


def mk_theta(lower, upper, body):
    if not lower <= upper:
        raise InvalidTermError(
            f"theta needs lower within upper: {lower.text()} vs {upper.text()}"
        )
    key = ("theta", lower.names, upper.names, body.uid)
    node = _INTERN.get(key)
    if node is None:
        node = Theta()
        node.lower = lower
        node.upper = upper
        node.body = body
        _finish(node, body.fv, body.tp_pending | body.fv, body.valid, body.size + 1)
        _INTERN[key] = node
    return node


def mk_psi(env, body):
    key = ("psi", env.names, body.uid)
    node = _INTERN.get(key)
    if node is None:
        node = Psi()
        node.env = env
        node.body = body
        _finish(node, body.fv, body.tp_pending | body.fv, body.valid, body.size + 1)
        _INTERN[key] = node
    return node


def mk_var(name):
    if not _NAME_RE.match(name) or name in RESERVED:
        raise InvalidTermError(f"bad variable name: {name!r}")
    key = ("var", name)
    node = _INTERN.get(key)
    if node is None:
        node = Var()
        node.name = name
        _finish(node, frozenset({name}), frozenset(), True, 1)
        _INTERN[key] = node
    return node


def mk_reccall(var, spec):
    if var not in spec.vars:
        raise InvalidTermError(f"{var!r} is not a variable of the specification")
    key = ("rec", var, spec.uid)
    node = _INTERN.get(key)
    if node is None:
        node = RecCall()
        node.var = var
        node.spec = spec
        _finish(node, spec.fv, spec.tp_pending, spec.valid, 2)
        _INTERN[key] = node
    return node


def spec_close(term, spec):
    """The derived call binding a term by a specification.

    Substitutes ``<y|spec>`` for every specification variable ``y`` free in
    the term.
    """
    return substitute(term, {v: mk_reccall(v, spec) for v in spec.vars})


# ---------------------------------------------------------------------------
# Queries


def free_vars(term):
    """Variables with a free occurrence; spec-bound occurrences do not count."""
    return term.fv


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    closed: bool
    violations: tuple[str, ...]

    @property
    def is_process(self):
        return self.ok and self.closed


def validate(term):
    """Check the static restriction on the environment operators.

    A term is rejected when some ``theta``/``psi`` body has a variable
    occurrence that is free in the body but bound by a surrounding recursive
    specification: the operator would otherwise be smuggled into a recursion
    it must not guard.  Violations are reported as paths from the root.
    """
    if term.valid:
        return ValidationReport(True, not term.fv, ())
    violations = []

    def walk(node, path, binders):
        # a subtree matters only if it still awaits a binding that would
        # put an environment operator inside a recursion
        if node.valid and not (node.tp_pending & binders):
            return
        if isinstance(node, (Theta, Psi)):
            hit = node.body.fv & binders
            if hit:
                violations.append(
                    f"{path or 'root'}: {node.kindname} body has bound variable(s) "
                    + ", ".join(sorted(hit))
                )
            walk(node.body, f"{path}.{node.kindname}", binders)
        elif isinstance(node, Prefix):
            walk(node.body, f"{path}.prefix", binders)
        elif isinstance(node, Choice):
            for i, s in enumerate(summands(node)):
                walk(s, f"{path}.sum[{i}]", binders)
        elif isinstance(node, Par):
            walk(node.left, f"{path}.par.left", binders)
            walk(node.right, f"{path}.par.right", binders)
        elif isinstance(node, (Abstract, Rename)):
            walk(node.body, f"{path}.{node.kindname}", binders)
        elif isinstance(node, RecCall):
            inner = binders | set(node.spec.vars)
            for v, b in zip(node.spec.vars, node.spec.bodies):
                walk(b, f"{path}.<{node.var}|...>.{v}", inner)

    walk(term, "", frozenset())
    return ValidationReport(False, not term.fv, tuple(violations))


# ---------------------------------------------------------------------------
# Substitution


_FRESH_COUNTER = 0


def _fresh_name(base, avoid):
    global _FRESH_COUNTER
    stem = base.rstrip("0123456789")
    while True:
        _FRESH_COUNTER += 1
        cand = f"{stem}{_FRESH_COUNTER}"
        if cand not in avoid and cand not in RESERVED:
            return cand


def substitute(term, mapping):
    """Capture-avoiding simultaneous substitution of terms for free variables.

    Bound specification variables are renamed apart when an image would be
    captured.
    """
    mapping = {v: img for v, img in mapping.items() if v in term.fv and img is not mk_var(v)}
    if not mapping:
        return term
    return _subst(term, mapping)


def _subst(term, mapping):
    live = {v: img for v, img in mapping.items() if v in term.fv}
    if not live:
        return term
    if isinstance(term, Var):
        return live.get(term.name, term)
    if isinstance(term, Prefix):
        return mk_prefix(term.action, _subst(term.body, live))
    if isinstance(term, Choice):
        return sum_of(_subst(s, live) for s in summands(term))
    if isinstance(term, Par):
        return mk_par(_subst(term.left, live), term.sync, _subst(term.right, live))
    if isinstance(term, Abstract):
        return mk_abstract(term.hide, _subst(term.body, live))
    if isinstance(term, Rename):
        return mk_rename(term.pairs, _subst(term.body, live))
    if isinstance(term, Theta):
        return mk_theta(term.lower, term.upper, _subst(term.body, live))
    if isinstance(term, Psi):
        return mk_psi(term.env, _subst(term.body, live))
    if isinstance(term, RecCall):
        spec, var = _subst_spec(term.spec, term.var, live)
        return mk_reccall(var, spec)
    raise InvalidTermError(f"cannot substitute into {term!r}")


def _subst_spec(spec, var, mapping):
    live = {v: img for v, img in mapping.items() if v in spec.fv}
    if not live:
        return spec, var
    binder = set(spec.vars)
    image_frees = set().union(*(img.fv for img in live.values()))
    clash = binder & image_frees
    vars_ = spec.vars
    bodies = spec.bodies
    if clash:
        avoid = binder | image_frees | set(live) | set().union(*(b.fv for b in bodies))
        ren = {old: _fresh_name(old, avoid) for old in sorted(clash)}
        ren_map = {old: mk_var(new) for old, new in ren.items()}
        vars_ = tuple(ren.get(v, v) for v in vars_)
        bodies = tuple(_subst(b, ren_map) for b in bodies)
        var = ren.get(var, var)
    new_bodies = tuple(_subst(b, live) for b in bodies)
    new_spec = mk_recspec(dict(zip(vars_, new_bodies)))
    return new_spec, var


# ---------------------------------------------------------------------------
# Alphabet

_ALPHABET_CACHE: dict[int, EnvSet] = {}


def alphabet(term):
    """A finite superset of every visible action the term can ever perform.

    Collects the syntactically occurring visible prefix actions together
    with the sources and targets of every renaming.  The operator index sets
    cannot enable actions of their own, so they do not contribute.
    """
    cached = _ALPHABET_CACHE.get(term.uid)
    if cached is not None:
        return cached
    names: set[str] = set()
    seen: set[int] = set()

    def walk(node):
        if node.uid in seen:
            return
        seen.add(node.uid)
        if isinstance(node, Prefix):
            if node.action.is_visible:
                names.add(node.action.name)
            walk(node.body)
        elif isinstance(node, Choice):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Par):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, (Abstract, Rename, Theta, Psi)):
            if isinstance(node, Rename):
                for src, dst in node.pairs:
                    names.add(src)
                    names.add(dst)
            walk(node.body)
        elif isinstance(node, RecCall):
            for b in node.spec.bodies:
                walk(b)

    walk(term)
    result = envset(names)
    _ALPHABET_CACHE[term.uid] = result
    return result


# ---------------------------------------------------------------------------
# Concrete syntax: tokenizer


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+|\#[^\n]*)
    | (?P<arrow>->)
    | (?P<parpipe>\|\|)
    | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
    | (?P<zero>0)
    | (?P<punct>[+.(){};,<>|=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text):
    toks = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            toks.append(_Tok(kind, chunk, line, pos - line_start + 1))
        line += chunk.count("\n")
        if "\n" in chunk:
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    """Recursive-descent parser for process files and standalone terms."""

    def __init__(self, text, definitions=None):
        self.toks = _tokenize(text)
        self.pos = 0
        self.defs = definitions if definitions is not None else Definitions()
        self.spec_vars: tuple[str, ...] = ()

    # -- token plumbing

    def peek(self, ahead=0):
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self):
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, text):
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, tok.line, tok.col)

    # -- items

    def parse_items(self):
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.text == "def":
                self.parse_def()
            elif tok.text == "spec":
                self.parse_spec()
            else:
                self.fail(f"expected 'def' or 'spec', found {tok.text!r}")
        return self.defs

    def parse_def(self):
        self.expect("def")
        name_tok = self.next()
        name = name_tok.text
        if name_tok.kind != "ident" or name in RESERVED:
            self.fail(f"bad definition name {name!r}", name_tok)
        if name in self.defs.defs or name in self.defs.specs:
            self.fail(f"duplicate name {name!r}", name_tok)
        self.expect("=")
        term = self.parse_proc()
        self.expect(";")
        term = self.resolve_names(term, name_tok)
        report = validate(term)
        if not report.ok:
            self.fail(f"invalid definition {name!r}: {report.violations[0]}", name_tok)
        self.defs.add_def(name, term)

    def parse_spec(self):
        self.expect("spec")
        name_tok = self.next()
        name = name_tok.text
        if name_tok.kind != "ident" or name in RESERVED:
            self.fail(f"bad specification name {name!r}", name_tok)
        if name in self.defs.defs or name in self.defs.specs:
            self.fail(f"duplicate name {name!r}", name_tok)
        self.expect("{")
        raw = []
        var_names = []
        while self.peek().text != "}":
            var_tok = self.next()
            if var_tok.kind != "ident" or var_tok.text in RESERVED:
                self.fail(f"bad specification variable {var_tok.text!r}", var_tok)
            if var_tok.text in var_names:
                self.fail(f"duplicate equation for {var_tok.text!r}", var_tok)
            self.expect("=")
            body = self.parse_proc()
            self.expect(";")
            raw.append((var_tok, body))
            var_names.append(var_tok.text)
        self.expect("}")
        self.spec_vars = tuple(var_names)
        try:
            equations = {}
            for var_tok, body in raw:
                equations[var_tok.text] = self.resolve_names(body, var_tok)
            spec = mk_recspec(equations)
        finally:
            self.spec_vars = ()
        if not spec.valid:
            sample = mk_reccall(spec.vars[0], spec)
            self.fail(
                f"invalid specification {name!r}: {validate(sample).violations[0]}",
                name_tok,
            )
        self.defs.add_spec(name, spec)

    def resolve_names(self, term, at_tok):
        """Resolve bare identifiers against earlier definitions.

        Identifiers bound by the specification being parsed stay variables;
        everything else must name an earlier ``def`` and is inlined.
        """
        pending = term.fv - set(self.spec_vars)
        images = {}
        for n in sorted(pending):
            if n in self.defs.defs:
                images[n] = self.defs.defs[n]
            elif n in self.defs.specs:
                raise UndefinedNameError(
                    f"{n!r} names a specification, not a process",
                    at_tok.line, at_tok.col,
                )
            else:
                raise UndefinedNameError(
                    f"reference to undefined name {n!r}", at_tok.line, at_tok.col
                )
        return substitute(term, images) if images else term

    # -- processes

    def parse_proc(self):
        term = self.parse_par()
        while self.peek().text == "+":
            self.next()
            term = mk_choice(term, self.parse_par())
        return term

    def parse_par(self):
        term = self.parse_prefix()
        while self.peek().kind == "parpipe":
            self.next()
            self.expect("{")
            sync = self.parse_acts("}")
            self.expect("}")
            term = mk_par(term, sync, self.parse_prefix())
        return term

    def parse_prefix(self):
        tok = self.peek()
        if tok.kind == "ident" and self.peek(1).text == "." and tok.text not in (
            "theta", "psi", "ren",
        ):
            self.next()
            self.next()
            action = self.action_for(tok)
            return mk_prefix(action, self.parse_prefix())
        return self.parse_atom()

    def action_for(self, tok):
        if tok.text == "tau":
            return TAU
        if tok.text == "t":
            return TIMEOUT
        try:
            return visible(tok.text)
        except InvalidTermError as exc:
            self.fail(str(exc), tok)

    def parse_atom(self):
        tok = self.peek()
        if tok.kind == "zero":
            self.next()
            return NIL
        if tok.text == "(":
            self.next()
            term = self.parse_proc()
            self.expect(")")
            return term
        if tok.text == "<":
            return self.parse_reccall()
        if tok.kind == "ident":
            if tok.text == "tau" and self.peek(1).text == "{":
                return self.parse_abstract()
            if tok.text == "ren" and self.peek(1).text == "{":
                return self.parse_rename()
            if tok.text == "theta" and self.peek(1).text == "{":
                return self.parse_theta()
            if tok.text == "psi" and self.peek(1).text == "{":
                return self.parse_psi()
            if tok.text in RESERVED:
                self.fail(f"reserved word {tok.text!r} cannot stand alone here")
            self.next()
            return mk_var(tok.text)
        self.fail(f"expected a process, found {tok.text or 'end of input'!r}")

    def parse_reccall(self):
        self.expect("<")
        var_tok = self.next()
        if var_tok.kind != "ident" or var_tok.text in RESERVED:
            self.fail(f"bad variable {var_tok.text!r}", var_tok)
        self.expect("|")
        name_tok = self.next()
        spec = self.defs.specs.get(name_tok.text)
        if spec is None:
            raise UndefinedNameError(
                f"reference to undefined specification {name_tok.text!r}",
                name_tok.line, name_tok.col,
            )
        self.expect(">")
        if var_tok.text not in spec.vars:
            self.fail(
                f"{var_tok.text!r} is not a variable of {name_tok.text!r}", var_tok
            )
        return mk_reccall(var_tok.text, spec)

    def parse_acts(self, closer, minimum=0):
        names = []
        while self.peek().text != closer:
            tok = self.next()
            if tok.kind != "ident":
                self.fail(f"expected an action name, found {tok.text!r}", tok)
            try:
                names.append(visible(tok.text).name)
            except InvalidTermError as exc:
                self.fail(str(exc), tok)
            if self.peek().text == ",":
                self.next()
            elif self.peek().text != closer:
                self.fail(f"expected ',' or {closer!r}")
        if len(names) < minimum:
            self.fail("this operator needs at least one action")
        return envset(names)

    def parse_abstract(self):
        self.next()
        self.expect("{")
        hide = self.parse_acts("}", minimum=1)
        self.expect("}")
        self.expect("(")
        body = self.parse_proc()
        self.expect(")")
        return mk_abstract(hide, body)

    def parse_rename(self):
        self.next()
        self.expect("{")
        pairs = []
        while self.peek().text != "}":
            src = self.next()
            self.expect("->")
            dst = self.next()
            for tok in (src, dst):
                if tok.kind != "ident":
                    self.fail(f"expected an action name, found {tok.text!r}", tok)
            try:
                pairs.append((visible(src.text).name, visible(dst.text).name))
            except InvalidTermError as exc:
                self.fail(str(exc), src)
            if self.peek().text == ",":
                self.next()
        self.expect("}")
        if not pairs:
            self.fail("a renaming needs at least one pair")
        self.expect("(")
        body = self.parse_proc()
        self.expect(")")
        return mk_rename(pairs, body)

    def parse_theta(self):
        open_tok = self.next()
        self.expect("{")
        lower = self.parse_acts(";")
        self.expect(";")
        upper = self.parse_acts("}")
        self.expect("}")
        self.expect("(")
        body = self.parse_proc()
        self.expect(")")
        try:
            return mk_theta(lower, upper, body)
        except InvalidTermError as exc:
            self.fail(str(exc), open_tok)

    def parse_psi(self):
        self.next()
        self.expect("{")
        env = self.parse_acts("}")
        self.expect("}")
        self.expect("(")
        body = self.parse_proc()
        self.expect(")")
        return mk_psi(env, body)


class Definitions:
    """Named processes and specifications from one source file."""

    def __init__(self):
        self.defs: dict[str, Term] = {}
        self.specs: dict[str, RecSpec] = {}
        self.order: list[tuple[str, str]] = []

    def add_def(self, name, term):
        self.defs[name] = term
        self.order.append(("def", name))

    def add_spec(self, name, spec):
        self.specs[name] = spec
        self.order.append(("spec", name))

    def spec_names(self):
        return {spec.uid: name for name, spec in self.specs.items()}

    def __eq__(self, other):
        return (
            isinstance(other, Definitions)
            and self.order == other.order
            and self.defs == other.defs
            and self.specs == other.specs
        )


def parse_file(text):
    """Parse a process file into definitions with resolved cross-references."""
    return _Parser(text).parse_items()


def parse_term(text, definitions=None, allow_free=False):
    """Parse a single process expression.

    Earlier definitions may be supplied for name resolution; otherwise bare
    identifiers are errors unless ``allow_free`` keeps them as variables.
    """
    parser = _Parser(text, definitions)
    term = parser.parse_proc()
    tok = parser.peek()
    if tok.kind != "eof":
        parser.fail(f"trailing input {tok.text!r}")
    if not allow_free:
        term = parser.resolve_names(term, parser.toks[0])
    return term


# ---------------------------------------------------------------------------
# Printing


def _level(term):
    if isinstance(term, Choice):
        return 0
    if isinstance(term, Par):
        return 1
    if isinstance(term, Prefix):
        return 2
    return 3


def term_text(term, spec_names=None):
    """Concrete syntax for a term; inverse of ``parse_term`` on its output."""
    names = spec_names or {}

    def render(node, min_level):
        text = plain(node)
        return f"({text})" if _level(node) < min_level else text

    def plain(node):
        if node is NIL:
            return "0"
        if isinstance(node, Var):
            return node.name
        if isinstance(node, Prefix):
            return f"{node.action}.{render(node.body, 2)}"
        if isinstance(node, Choice):
            return " + ".join(render(s, 1) for s in summands(node))
        if isinstance(node, Par):
            chain = []
            cursor = node
            while isinstance(cursor, Par):
                chain.append((cursor.sync, cursor.right))
                cursor = cursor.left
            parts = [render(cursor, 2)]
            for sync, right in reversed(chain):
                parts.append(f"||{{{','.join(sync.names)}}} {render(right, 2)}")
            return " ".join(parts)
        if isinstance(node, Abstract):
            return f"tau{{{','.join(node.hide.names)}}}({plain(node.body)})"
        if isinstance(node, Rename):
            pairs = ",".join(f"{s}->{d}" for s, d in node.pairs)
            return f"ren{{{pairs}}}({plain(node.body)})"
        if isinstance(node, Theta):
            return (
                f"theta{{{','.join(node.lower.names)};"
                f"{','.join(node.upper.names)}}}({plain(node.body)})"
            )
        if isinstance(node, Psi):
            return f"psi{{{','.join(node.env.names)}}}({plain(node.body)})"
        if isinstance(node, RecCall):
            name = names.get(node.spec.uid, f"S{node.spec.uid}")
            return f"<{node.var}|{name}>"
        raise InvalidTermError(f"cannot print {node!r}")

    return plain(term)


def _collect_specs(term, found, order):
    stack = [term]
    while stack:
        node = stack.pop()
        if isinstance(node, Prefix):
            stack.append(node.body)
        elif isinstance(node, Choice):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, Par):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, (Abstract, Rename, Theta, Psi)):
            stack.append(node.body)
        elif isinstance(node, RecCall):
            if node.spec.uid not in found:
                found.add(node.spec.uid)
                for b in node.spec.bodies:
                    _collect_specs(b, found, order)
                order.append(node.spec)


def definitions_text(definitions):
    """Render definitions back to file syntax; parses to equal definitions."""
    names = definitions.spec_names()
    lines = []
    emitted: set[int] = set()

    def emit_spec(spec, name):
        eqs = "".join(
            f" {v} = {term_text(b, names)};" for v, b in zip(spec.vars, spec.bodies)
        )
        lines.append(f"spec {name} {{{eqs} }}")
        emitted.add(spec.uid)

    for kind, name in definitions.order:
        if kind == "spec":
            spec = definitions.specs[name]
            if spec.uid not in emitted:
                emit_spec(spec, name)
        else:
            term = definitions.defs[name]
            found: set[int] = set(emitted)
            fresh: list[RecSpec] = []
            _collect_specs(term, found, fresh)
            for spec in fresh:
                emit_spec(spec, names.setdefault(spec.uid, f"S{spec.uid}"))
            lines.append(f"def {name} = {term_text(term, names)};")
    return "\n".join(lines) + "\n"
