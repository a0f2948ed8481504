"""Modal formulas over reactive systems.

The logic observes a process together with the environment it runs in.  A
formula is evaluated either *triggered* (the environment is busy choosing
what to allow next, written mode ``None``) or under a set ``Y`` of allowed
actions.  The operators:

``T``              truth
``phi & phi``      conjunction (any width)
``~phi``           negation
``<tau>phi``       one internal step, same mode
``<a>phi``         one ``a`` step; under a mode the environment must allow
                   ``a`` or the process must be at a dead end, and the step
                   lands triggered
``<{a,b}>phi``     a time-out observed while the environment allows exactly
                   the written set; the target is judged under that set
``<eps>phi``       any number of internal steps, same mode
``<^a>phi``        like ``<a>`` but for ``tau`` also satisfied by staying put

Time-outs have no plain diamond: ``<t>`` is rejected, the environment set
form is the only way to see one fire.

Two sublogics matter: the characteristic one for branching reactive
bisimilarity (``"Lbc"``), whose modalities always sit under an ``<eps>``,
and its rooted refinement (``"Lbcr"``), which adds one leading strong
modality.  :func:`distinguish` synthesises a formula in the appropriate
sublogic for any inequivalent pair of terms, replaying the recorded
refutation of the fixpoint computation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .equiv import Analysis, _rooted_pair_fail
from .errors import ParseError, TxbisimError, WitnessError
from .lts import iter_bits
from .terms import envset

__all__ = [
    "And",
    "Diamond",
    "EnvDiamond",
    "Eps",
    "Formula",
    "HatDiamond",
    "Not",
    "TOP",
    "Top",
    "distinguish",
    "formula_text",
    "in_subclass",
    "parse_formula",
    "satisfies",
]


# --------------------------------------------------------------------------
# syntax


class Formula:
    __slots__ = ()

    def __str__(self):
        return formula_text(self)


@dataclass(frozen=True, slots=True)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True)
class And(Formula):
    children: tuple

    def __post_init__(self):
        if len(self.children) < 2:
            raise TxbisimError("a conjunction needs at least two conjuncts")


@dataclass(frozen=True, slots=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class Diamond(Formula):
    """One strong step: label ``tau`` or a visible action, never ``t``."""

    label: str
    sub: Formula

    def __post_init__(self):
        _check_diamond_label(self.label)


@dataclass(frozen=True, slots=True)
class HatDiamond(Formula):
    """Like Diamond, but ``tau`` may also be satisfied without moving."""

    label: str
    sub: Formula

    def __post_init__(self):
        _check_diamond_label(self.label)


@dataclass(frozen=True, slots=True)
class EnvDiamond(Formula):
    """A time-out fired while the environment allows exactly ``names``."""

    names: tuple
    sub: Formula

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(envset(self.names)))


@dataclass(frozen=True, slots=True)
class Eps(Formula):
    sub: Formula


TOP = Top()


def _check_diamond_label(label):
    if label in ("t", "t_eps") or label.startswith("eps"):
        raise TxbisimError(
            f"<{label}> is not a modality; time-outs are observed with <{{...}}>"
        )


def conjunction(formulas):
    """Conjunction of a possibly empty, possibly redundant list."""
    unique = tuple(dict.fromkeys(formulas))
    if not unique:
        return TOP
    if len(unique) == 1:
        return unique[0]
    return And(unique)


def formula_text(phi):
    def wrap(sub):
        text = formula_text(sub)
        return f"({text})" if isinstance(sub, And) else text

    match phi:
        case Top():
            return "T"
        case And(children):
            return " & ".join(wrap(c) for c in children)
        case Not(sub):
            return "~" + wrap(sub)
        case Diamond(label, sub):
            return f"<{label}>" + wrap(sub)
        case HatDiamond(label, sub):
            return f"<^{label}>" + wrap(sub)
        case EnvDiamond(names, sub):
            return "<{" + ",".join(names) + "}>" + wrap(sub)
        case Eps(sub):
            return "<eps>" + wrap(sub)
    raise TxbisimError(f"not a formula: {phi!r}")


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<top>T\b)
      | (?P<not>~)
      | (?P<and>&)
      | (?P<lpar>\()
      | (?P<rpar>\))
      | <\s*eps\s*>               (?P<eps>)
      | <\s*\^\s*(?P<hat>[A-Za-z_][A-Za-z0-9_]*)\s*>
      | <\s*\{(?P<env>[^}]*)\}\s*>
      | <\s*(?P<diamond>[A-Za-z_][A-Za-z0-9_]*)\s*>
    )""",
    re.VERBOSE,
)


def parse_formula(text):
    """Parse the textual formula syntax; unary operators bind tighter
    than ``&``."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == m.start():
            rest = text[pos:].strip()
            if not rest:
                break
            raise ParseError(f"cannot read formula at {rest[:12]!r}")
        pos = m.end()
        kind = m.lastgroup
        if kind is None:
            for k in ("top", "not", "and", "lpar", "rpar", "eps", "hat", "env", "diamond"):
                if m.group(k) is not None:
                    kind = k
                    break
        tokens.append((kind, m.group(kind) if kind else None))
    tokens.append(("end", None))

    at = 0

    def peek():
        return tokens[at][0]

    def take(kind):
        nonlocal at
        if tokens[at][0] != kind:
            raise ParseError(f"expected {kind}, found {tokens[at][0]}")
        at += 1
        return tokens[at - 1][1]

    def parse_conj():
        parts = [parse_unary()]
        while peek() == "and":
            take("and")
            parts.append(parse_unary())
        if len(parts) == 1:
            return parts[0]
        return And(tuple(parts))

    def parse_unary():
        kind = peek()
        if kind == "not":
            take("not")
            return Not(parse_unary())
        if kind == "eps":
            take("eps")
            return Eps(parse_unary())
        if kind == "hat":
            name = take("hat")
            _diamond_name_ok(name)
            return HatDiamond(name, parse_unary())
        if kind == "env":
            raw = take("env")
            names = [n.strip() for n in raw.split(",") if n.strip()]
            return EnvDiamond(tuple(names), parse_unary())
        if kind == "diamond":
            name = take("diamond")
            _diamond_name_ok(name)
            return Diamond(name, parse_unary())
        if kind == "top":
            take("top")
            return TOP
        if kind == "lpar":
            take("lpar")
            inner = parse_conj()
            take("rpar")
            return inner
        raise ParseError(f"unexpected {kind} in formula")

    def _diamond_name_ok(name):
        if name in ("t", "t_eps") or name.startswith("eps"):
            raise ParseError(
                f"<{name}> is not a modality; write <{{...}}> to observe a time-out"
            )

    result = parse_conj()
    take("end")
    return result


# --------------------------------------------------------------------------
# satisfaction


def _visible_labels(lts, i):
    return [lab for lab in lts.out_labels(i) if lab not in ("tau", "t")]


def _lts_deadend(lts, i, allowed):
    if not lts.is_stable(i):
        return False
    return all(lab not in allowed for lab in _visible_labels(lts, i))


def satisfies(lts, state, formula, mode=None):
    """Whether a state satisfies a formula, triggered (``mode=None``) or
    under a set of allowed actions."""
    m = None if mode is None else envset(mode)
    memo: dict = {}

    def sat(i, phi, env):
        key = (id(phi), i, env)
        hit = memo.get(key)
        if hit is None:
            memo[key] = hit = _eval(i, phi, env)
        return hit

    def _eval(i, phi, env):
        match phi:
            case Top():
                return True
            case And(children):
                return all(sat(i, c, env) for c in children)
            case Not(sub):
                return not sat(i, sub, env)
            case Diamond("tau", sub):
                return any(
                    sat(j, sub, env) for j in iter_bits(lts.succ_mask(i, "tau"))
                )
            case Diamond(label, sub):
                if env is not None and label not in env:
                    if not _lts_deadend(lts, i, env):
                        return False
                return any(
                    sat(j, sub, None) for j in iter_bits(lts.succ_mask(i, label))
                )
            case HatDiamond("tau", sub):
                return sat(i, sub, env) or any(
                    sat(j, sub, env) for j in iter_bits(lts.succ_mask(i, "tau"))
                )
            case HatDiamond(label, sub):
                return sat(i, Diamond(label, sub), env)
            case EnvDiamond(names, sub):
                x = envset(names)
                blocked = x if env is None else x.union(env)
                if not _lts_deadend(lts, i, blocked):
                    return False
                return any(
                    sat(j, sub, x) for j in iter_bits(lts.succ_mask(i, "t"))
                )
            case Eps(sub):
                reach = lts.tau_closure(1 << i)
                return any(sat(j, sub, env) for j in iter_bits(reach))
        raise TxbisimError(f"not a formula: {phi!r}")

    return sat(lts.index[state], formula, m)


# --------------------------------------------------------------------------
# the characteristic sublogics


def in_subclass(phi, cls):
    """Membership in the characteristic sublogic ``"Lbc"`` (unrooted) or
    ``"Lbcr"`` (rooted)."""
    if cls == "Lbc":
        return _lbc(phi)
    if cls == "Lbcr":
        return _lbcr(phi)
    raise TxbisimError(f"unknown sublogic {cls!r}")


def _lbc(phi):
    match phi:
        case Top():
            return True
        case And(children):
            return all(_lbc(c) for c in children)
        case Not(sub):
            return _lbc(sub)
        case Eps(And((first, HatDiamond(_, second)))):
            return _lbc(first) and _lbc(second)
        case Eps(EnvDiamond(_, sub)):
            return _lbc(sub)
        case Eps(Not(Diamond("tau", Top()))):
            return True
    return False


def _lbcr(phi):
    match phi:
        case Top():
            return True
        case And(children):
            return all(_lbcr(c) for c in children)
        case Not(sub):
            return _lbcr(sub)
        case Diamond(_, sub):
            return _lbc(sub)
        case EnvDiamond(_, sub):
            return _lbc(sub)
    return False


# --------------------------------------------------------------------------
# synthesis of distinguishing formulas


class _Synthesizer:
    """Turns removal records into formulas.

    For a removed pair ``(p, q)`` the produced formula holds at ``p`` and
    fails at ``q``; likewise for triples under their environment.  A record
    from round ``r`` only ever refers to entries removed strictly earlier,
    so the recursion terminates.
    """

    def __init__(self, analysis):
        self.an = analysis
        self.lts = analysis.lts
        self.pf = analysis.profile
        self.res = analysis.gen
        self._pairs: dict = {}
        self._trips: dict = {}

    # -- entry points

    def pair(self, p, q):
        key = (p, q)
        got = self._pairs.get(key)
        if got is None:
            rec = self.res.records.get(("p", p, q))
            if rec is None:
                got = Not(self.pair(q, p))
            else:
                got = self._from_pair(p, q, rec)
            self._pairs[key] = got
        return got

    def trip(self, p, x, q):
        key = (p, x, q)
        got = self._trips.get(key)
        if got is None:
            rec = self.res.records.get(("t", p, x, q))
            if rec is None:
                got = Not(self.trip(q, x, p))
            else:
                got = self._from_trip(p, x, q, rec)
            self._trips[key] = got
        return got

    # -- clause replay

    def _closure(self, q):
        return list(iter_bits(self.lts.tau_closure(1 << q)))

    def _split(self, q, round_, removed_round):
        """Closure members refuted before the recorded round vs the rest."""
        bad, good = [], []
        for q1 in self._closure(q):
            r1 = removed_round(q1)
            (bad if r1 is not None and r1 < round_ else good).append(q1)
        return bad, good

    def _from_pair(self, p, q, rec):
        if rec.clause == "stability":
            return Eps(Not(Diamond("tau", TOP)))
        res, lts = self.res, self.lts
        if rec.clause == "move":
            lab, p2 = rec.label, rec.succ
            bad1, good = self._split(q, rec.round, lambda q1: res.pair_round(p, q1))
            bad2 = []
            for q1 in good:
                bad2.extend(iter_bits(lts.succ_mask(q1, lab)))
                if lab == "tau":
                    bad2.append(q1)
            for q2 in bad2:
                assert _earlier(res.pair_round(p2, q2), rec.round)
            first = conjunction(self.pair(p, q1) for q1 in bad1)
            second = conjunction(self.pair(p2, q2) for q2 in dict.fromkeys(bad2))
            return Eps(And((first, HatDiamond(lab, second))))
        # timeout: every timed successor of the closure is already refuted
        x = self.pf.env_mask(rec.env)
        p2 = rec.succ
        bad = []
        for q1 in self._closure(q):
            bad.extend(iter_bits(self.lts.succ_mask(q1, "t")))
        for q2 in bad:
            assert _earlier(self.res.trip_round(p2, x, q2), rec.round)
        body = conjunction(self.trip(p2, x, q2) for q2 in dict.fromkeys(bad))
        return Eps(EnvDiamond(rec.env, body))

    def _from_trip(self, p, x, q, rec):
        if rec.clause == "stability":
            return Eps(Not(Diamond("tau", TOP)))
        res, lts = self.res, self.lts
        if rec.clause == "move":
            lab, p2 = rec.label, rec.succ
            bad1, good = self._split(
                q, rec.round, lambda q1: res.trip_round(p, x, q1)
            )
            first = conjunction(self.trip(p, x, q1) for q1 in bad1)
            bad2 = []
            for q1 in good:
                bad2.extend(iter_bits(lts.succ_mask(q1, lab)))
                if lab == "tau":
                    bad2.append(q1)
            if lab == "tau":
                for q2 in bad2:
                    assert _earlier(res.trip_round(p2, x, q2), rec.round)
                second = conjunction(self.trip(p2, x, q2) for q2 in dict.fromkeys(bad2))
            else:
                for q2 in bad2:
                    assert _earlier(res.pair_round(p2, q2), rec.round)
                second = conjunction(self.pair(p2, q2) for q2 in dict.fromkeys(bad2))
            return Eps(And((first, HatDiamond(lab, second))))
        y = self.pf.env_mask(rec.env)
        p2 = rec.succ
        bad = []
        for q1 in self._closure(q):
            bad.extend(iter_bits(self.lts.succ_mask(q1, "t")))
        for q2 in bad:
            assert _earlier(self.res.trip_round(p2, y, q2), rec.round)
        body = conjunction(self.trip(p2, y, q2) for q2 in dict.fromkeys(bad))
        return Eps(EnvDiamond(rec.env, body))

    # -- rooted layer

    def rooted(self, side, rec):
        p, q = (self.an.ip, self.an.iq) if side == 0 else (self.an.iq, self.an.ip)
        lts = self.lts
        a2 = rec.succ
        if rec.clause == "move":
            body = conjunction(
                self.pair(a2, q2) for q2 in iter_bits(lts.succ_mask(q, rec.label))
            )
            psi = Diamond(rec.label, body)
        else:
            x = self.pf.env_mask(rec.env)
            body = conjunction(
                self.trip(a2, x, q2) for q2 in iter_bits(lts.succ_mask(q, "t"))
            )
            psi = EnvDiamond(rec.env, body)
        return psi if side == 0 else Not(psi)


def _earlier(round_, bound):
    return round_ is not None and round_ < bound


def distinguish(p, q, rooted=False, opts=None):
    """A formula telling two closed terms apart, or None if none exists.

    The result lies in the characteristic sublogic of the chosen
    equivalence, holds at ``p`` and fails at ``q``; both facts are checked
    before returning.
    """
    an = Analysis(p, q, opts)
    if rooted:
        fail = _rooted_pair_fail(an.profile, an.gen, an.ip, an.iq)
        if fail is None:
            return None
        phi = _Synthesizer(an).rooted(*fail)
        cls = "Lbcr"
    else:
        if an.gen.pair_has(an.ip, an.iq):
            return None
        phi = _Synthesizer(an).pair(an.ip, an.iq)
        cls = "Lbc"
    if not in_subclass(phi, cls):
        raise WitnessError(f"synthesised formula left {cls}: {formula_text(phi)}")
    if not satisfies(an.lts, p, phi) or satisfies(an.lts, q, phi):
        raise WitnessError(
            f"synthesised formula fails to separate the terms: {formula_text(phi)}"
        )
    return phi
