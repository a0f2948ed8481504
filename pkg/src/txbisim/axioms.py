"""Equational laws and a fuzz harness that probes their soundness.

Each law is represented by a random instance builder.  The harness draws
many instances, decides each with the bisimilarity checkers, and reports
per-law failure counts.  One law in the catalogue, idempotence written with
a zero right-hand side, is deliberately unsound; the harness is expected to
find counterexamples for it and none for the rest.

Laws marked ``strong_ok`` hold for rooted branching bisimilarity on the raw
transition system (time-outs matched like any other label), so instances of
those are decided under that relation as well as under the reactive one.
The two remaining laws depend on the environment semantics of time-outs and
are checked only reactively.

The term constructors canonicalise sums (flattening, ordering, dropping
zero summands), so associativity, commutativity and the zero unit hold by
representation; their builders are kept for completeness and produce
syntactically identical sides.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations

from .equiv import CheckOptions, process_universe, r_sr_branching, rbrb
from .gen import GenConfig, equivalent_pair, rand_guarded_spec, rand_term
from .semantics import explore, unfold
from .terms import (
    NIL,
    TAU,
    TIMEOUT,
    envset,
    mk_abstract,
    mk_choice,
    mk_par,
    mk_prefix,
    mk_psi,
    mk_reccall,
    mk_rename,
    mk_theta,
    sum_of,
    term_text,
    visible,
)

__all__ = ["AXIOMS", "Axiom", "AxiomResult", "axiom_by_name", "fuzz_axioms"]


@dataclass(frozen=True)
class Axiom:
    """One law: a name, soundness expectation, and instance builder."""

    name: str
    sound: bool
    kind: str  # "equation" or "implication"
    strong_ok: bool
    note: str = ""

    def instantiate(self, rng, cfg):
        return _BUILDERS[self.name](rng, cfg)


@dataclass
class AxiomResult:
    """Outcome of fuzzing one law."""

    name: str
    sound: bool
    instances: int
    failures: int
    vacuous: int = 0
    counterexample: tuple[str, str] | None = None

    @property
    def ok(self):
        """Did the run match the expectation: sound laws never fail, the
        unsound one fails at least once."""
        if self.sound:
            return self.failures == 0
        return self.failures > 0

    def to_json_dict(self):
        out = {
            "axiom": self.name,
            "expected_sound": self.sound,
            "instances": self.instances,
            "failures": self.failures,
            "ok": self.ok,
        }
        if self.vacuous:
            out["vacuous"] = self.vacuous
        if self.counterexample:
            out["counterexample"] = {
                "lhs": self.counterexample[0],
                "rhs": self.counterexample[1],
            }
        return out


# --------------------------------------------------------------------------
# instance builders


def _sub(rng, cfg):
    return rand_term(rng, cfg, rng.randint(0, cfg.max_depth))


def _some_env(rng, cfg, min_size=0):
    names = [a for a in cfg.alphabet if rng.random() < 0.5]
    while len(names) < min_size:
        extra = rng.choice(cfg.alphabet)
        if extra not in names:
            names.append(extra)
    return envset(names)


def _nested_envs(rng, cfg):
    """A random pair lower <= upper of action sets."""
    upper = _some_env(rng, cfg)
    lower = envset(a for a in upper if rng.random() < 0.6)
    return lower, upper


def _action_from(rng, names, tau=False, timeout=False):
    pool = [visible(a) for a in names]
    if tau:
        pool.append(TAU)
    if timeout:
        pool.append(TIMEOUT)
    return rng.choice(pool)


def _bi_assoc(rng, cfg):
    x, y, z = _sub(rng, cfg), _sub(rng, cfg), _sub(rng, cfg)
    return mk_choice(x, mk_choice(y, z)), mk_choice(mk_choice(x, y), z)


def _bi_comm(rng, cfg):
    x, y = _sub(rng, cfg), _sub(rng, cfg)
    return mk_choice(x, y), mk_choice(y, x)


def _bi_idem_zero(rng, cfg):
    x = _sub(rng, cfg)
    return mk_choice(x, x), NIL


def _bi_idem(rng, cfg):
    x = _sub(rng, cfg)
    return mk_choice(x, x), x


def _bi_unit(rng, cfg):
    x = _sub(rng, cfg)
    return mk_choice(x, NIL), x


def _bi_hide_sum(rng, cfg):
    hide = _some_env(rng, cfg, 1)
    x, y = _sub(rng, cfg), _sub(rng, cfg)
    return (
        mk_abstract(hide, mk_choice(x, y)),
        mk_choice(mk_abstract(hide, x), mk_abstract(hide, y)),
    )


def _bi_hide_free(rng, cfg):
    hide = _some_env(rng, cfg, 1)
    act = _action_from(
        rng, [a for a in cfg.alphabet if a not in hide], tau=True, timeout=True
    )
    x = _sub(rng, cfg)
    return (
        mk_abstract(hide, mk_prefix(act, x)),
        mk_prefix(act, mk_abstract(hide, x)),
    )


def _bi_hide_hidden(rng, cfg):
    hide = _some_env(rng, cfg, 1)
    act = visible(rng.choice(tuple(hide)))
    x = _sub(rng, cfg)
    return (
        mk_abstract(hide, mk_prefix(act, x)),
        mk_prefix(TAU, mk_abstract(hide, x)),
    )


def _rand_pairs(rng, cfg):
    pairs = set()
    for _ in range(rng.randint(1, 2)):
        pairs.add((rng.choice(cfg.alphabet), rng.choice(cfg.alphabet)))
    return pairs


def _bi_rename_sum(rng, cfg):
    pairs = _rand_pairs(rng, cfg)
    x, y = _sub(rng, cfg), _sub(rng, cfg)
    return (
        mk_rename(pairs, mk_choice(x, y)),
        mk_choice(mk_rename(pairs, x), mk_rename(pairs, y)),
    )


def _bi_rename_tau(rng, cfg):
    pairs = _rand_pairs(rng, cfg)
    x = _sub(rng, cfg)
    return (
        mk_rename(pairs, mk_prefix(TAU, x)),
        mk_prefix(TAU, mk_rename(pairs, x)),
    )


def _bi_rename_timeout(rng, cfg):
    pairs = _rand_pairs(rng, cfg)
    x = _sub(rng, cfg)
    return (
        mk_rename(pairs, mk_prefix(TIMEOUT, x)),
        mk_prefix(TIMEOUT, mk_rename(pairs, x)),
    )


def _bi_rename_action(rng, cfg):
    pairs = _rand_pairs(rng, cfg)
    a = rng.choice(cfg.alphabet)
    x = _sub(rng, cfg)
    images = sorted(dst for src, dst in pairs if src == a)
    return (
        mk_rename(pairs, mk_prefix(visible(a), x)),
        sum_of(mk_prefix(visible(b), mk_rename(pairs, x)) for b in images),
    )


def _bi_expansion(rng, cfg):
    sync = _some_env(rng, cfg)
    ps = [
        (_action_from(rng, cfg.alphabet, tau=True, timeout=True), _sub(rng, cfg))
        for _ in range(rng.randint(0, 2))
    ]
    qs = [
        (_action_from(rng, cfg.alphabet, tau=True, timeout=True), _sub(rng, cfg))
        for _ in range(rng.randint(0, 2))
    ]
    p = sum_of(mk_prefix(a, x) for a, x in ps)
    q = sum_of(mk_prefix(b, y) for b, y in qs)

    def free(act):
        return not (act.is_visible and act.name in sync)

    parts = [mk_prefix(a, mk_par(x, sync, q)) for a, x in ps if free(a)]
    parts += [mk_prefix(b, mk_par(p, sync, y)) for b, y in qs if free(b)]
    parts += [
        mk_prefix(a, mk_par(x, sync, y))
        for a, x in ps
        for b, y in qs
        if a == b and not free(a)
    ]
    return mk_par(p, sync, q), sum_of(parts)


def _bi_branching(rng, cfg):
    act = _action_from(rng, cfg.alphabet, tau=True, timeout=True)
    x, y = _sub(rng, cfg), _sub(rng, cfg)
    grown = mk_choice(x, y)
    return (
        mk_prefix(act, mk_choice(mk_prefix(TAU, grown), x)),
        mk_prefix(act, grown),
    )


def _bi_unfold(rng, cfg):
    spec = rand_guarded_spec(rng, cfg)
    call = mk_reccall(rng.choice(spec.vars), spec)
    return call, unfold(call)


def _bi_theta_skip_sum(rng, cfg):
    lower, upper = _nested_envs(rng, cfg)
    free = [a for a in cfg.alphabet if a not in lower]
    parts = [
        mk_prefix(_action_from(rng, free, timeout=True), _sub(rng, cfg))
        for _ in range(rng.randint(1, 3))
    ]
    body = sum_of(parts)
    return mk_theta(lower, upper, body), body


def _bi_theta_prune(rng, cfg):
    lower, upper = _nested_envs(rng, cfg)
    alpha = _action_from(rng, tuple(lower), tau=True)
    beta = _action_from(
        rng, [a for a in cfg.alphabet if a not in upper], timeout=True
    )
    x, y, z = _sub(rng, cfg), _sub(rng, cfg), _sub(rng, cfg)
    kept = mk_choice(x, mk_prefix(alpha, y))
    return (
        mk_theta(lower, upper, mk_choice(kept, mk_prefix(beta, z))),
        mk_theta(lower, upper, kept),
    )


def _bi_theta_split(rng, cfg):
    lower, upper = _nested_envs(rng, cfg)
    alpha = _action_from(rng, tuple(lower), tau=True)
    beta = _action_from(rng, tuple(upper), tau=True)
    x, y, z = _sub(rng, cfg), _sub(rng, cfg), _sub(rng, cfg)
    kept = mk_choice(x, mk_prefix(alpha, y))
    split = mk_prefix(beta, z)
    return (
        mk_theta(lower, upper, mk_choice(kept, split)),
        mk_choice(mk_theta(lower, upper, kept), mk_theta(lower, upper, split)),
    )


def _bi_theta_prefix(rng, cfg):
    lower, upper = _nested_envs(rng, cfg)
    act = _action_from(rng, cfg.alphabet, timeout=True)
    x = _sub(rng, cfg)
    body = mk_prefix(act, x)
    return mk_theta(lower, upper, body), body


def _bi_theta_tau(rng, cfg):
    lower, upper = _nested_envs(rng, cfg)
    x = _sub(rng, cfg)
    return (
        mk_theta(lower, upper, mk_prefix(TAU, x)),
        mk_prefix(TAU, mk_theta(lower, upper, x)),
    )


def _psi_env(rng, cfg, proper=False):
    env = _some_env(rng, cfg)
    while proper and len(env) == len(cfg.alphabet):
        env = envset(a for a in env if rng.random() < 0.5)
    return env


def _bi_psi_free(rng, cfg):
    env = _psi_env(rng, cfg, proper=True)
    alpha = visible(rng.choice([a for a in cfg.alphabet if a not in env]))
    x, y = _sub(rng, cfg), _sub(rng, cfg)
    return (
        mk_psi(env, mk_choice(x, mk_prefix(alpha, y))),
        mk_choice(mk_psi(env, x), mk_prefix(alpha, y)),
    )


def _bi_psi_prune(rng, cfg):
    env = _psi_env(rng, cfg)
    alpha = _action_from(rng, tuple(env), tau=True)
    x, y, z = _sub(rng, cfg), _sub(rng, cfg), _sub(rng, cfg)
    kept = mk_choice(x, mk_prefix(alpha, y))
    return (
        mk_psi(env, mk_choice(kept, mk_prefix(TIMEOUT, z))),
        mk_psi(env, kept),
    )


def _bi_psi_split(rng, cfg):
    env = _psi_env(rng, cfg)
    alpha = _action_from(rng, tuple(env), tau=True)
    beta = _action_from(rng, tuple(env), tau=True)
    x, y, z = _sub(rng, cfg), _sub(rng, cfg), _sub(rng, cfg)
    kept = mk_choice(x, mk_prefix(alpha, y))
    split = mk_prefix(beta, z)
    return (
        mk_psi(env, mk_choice(kept, split)),
        mk_choice(mk_psi(env, kept), split),
    )


def _bi_psi_prefix(rng, cfg):
    env = _psi_env(rng, cfg)
    act = _action_from(rng, cfg.alphabet, tau=True)
    x = _sub(rng, cfg)
    body = mk_prefix(act, x)
    return mk_psi(env, body), body


def _bi_psi_timeouts(rng, cfg):
    env = _psi_env(rng, cfg)
    targets = [_sub(rng, cfg) for _ in range(rng.randint(1, 2))]
    return (
        mk_psi(env, sum_of(mk_prefix(TIMEOUT, y) for y in targets)),
        sum_of(mk_prefix(TIMEOUT, mk_theta(env, env, y)) for y in targets),
    )


def _bi_tau_shadow(rng, cfg):
    x, y = _sub(rng, cfg), _sub(rng, cfg)
    return (
        mk_choice(mk_prefix(TAU, x), mk_prefix(TIMEOUT, y)),
        mk_prefix(TAU, x),
    )


def _approx_premise_pair(rng, cfg):
    if rng.random() < 0.6:
        return equivalent_pair(rng, cfg)
    return rand_term(rng, cfg), rand_term(rng, cfg)


_BUILDERS = {
    "choice-assoc": _bi_assoc,
    "choice-comm": _bi_comm,
    "choice-idem-zero": _bi_idem_zero,
    "choice-idem": _bi_idem,
    "choice-unit": _bi_unit,
    "hide-sum": _bi_hide_sum,
    "hide-prefix-free": _bi_hide_free,
    "hide-prefix-hidden": _bi_hide_hidden,
    "rename-sum": _bi_rename_sum,
    "rename-tau": _bi_rename_tau,
    "rename-timeout": _bi_rename_timeout,
    "rename-action": _bi_rename_action,
    "expansion": _bi_expansion,
    "branching": _bi_branching,
    "rec-unfold": _bi_unfold,
    "theta-skip-sum": _bi_theta_skip_sum,
    "theta-prune": _bi_theta_prune,
    "theta-split": _bi_theta_split,
    "theta-prefix": _bi_theta_prefix,
    "theta-tau": _bi_theta_tau,
    "psi-free-action": _bi_psi_free,
    "psi-prune-timeout": _bi_psi_prune,
    "psi-split": _bi_psi_split,
    "psi-prefix": _bi_psi_prefix,
    "psi-timeouts": _bi_psi_timeouts,
    "tau-shadows-timeout": _bi_tau_shadow,
    "reactive-approximation": _approx_premise_pair,
}

AXIOMS = (
    Axiom("choice-assoc", True, "equation", True, "identity by canonical sums"),
    Axiom("choice-comm", True, "equation", True, "identity by canonical sums"),
    Axiom(
        "choice-idem-zero",
        False,
        "equation",
        True,
        "x+x = 0: idempotence is not cancellation",
    ),
    Axiom("choice-idem", True, "equation", True),
    Axiom("choice-unit", True, "equation", True, "identity by canonical sums"),
    Axiom("hide-sum", True, "equation", True),
    Axiom("hide-prefix-free", True, "equation", True),
    Axiom("hide-prefix-hidden", True, "equation", True),
    Axiom("rename-sum", True, "equation", True),
    Axiom("rename-tau", True, "equation", True),
    Axiom("rename-timeout", True, "equation", True),
    Axiom("rename-action", True, "equation", True),
    Axiom("expansion", True, "equation", True),
    Axiom("branching", True, "equation", True),
    Axiom("rec-unfold", True, "equation", True),
    Axiom("theta-skip-sum", True, "equation", True),
    Axiom("theta-prune", True, "equation", True),
    Axiom("theta-split", True, "equation", True),
    Axiom("theta-prefix", True, "equation", True),
    Axiom("theta-tau", True, "equation", True),
    Axiom("psi-free-action", True, "equation", True),
    Axiom("psi-prune-timeout", True, "equation", True),
    Axiom("psi-split", True, "equation", True),
    Axiom("psi-prefix", True, "equation", True),
    Axiom("psi-timeouts", True, "equation", True),
    Axiom(
        "tau-shadows-timeout",
        True,
        "equation",
        False,
        "an internal step pre-empts time-outs; reactive only",
    ),
    Axiom(
        "reactive-approximation",
        True,
        "implication",
        False,
        "agreement under every environment implies equivalence",
    ),
)


def axiom_by_name(name):
    for axiom in AXIOMS:
        if axiom.name == name:
            return axiom
    raise KeyError(name)


# --------------------------------------------------------------------------
# harness


def _env_subsets(names):
    names = tuple(names)
    for size in range(len(names) + 1):
        for combo in combinations(names, size):
            yield envset(combo)


def _holds_reactively(lhs, rhs, opts):
    return bool(rbrb(lhs, rhs, opts))


def _holds_strongly(lhs, rhs, opts):
    lts = explore((lhs, rhs), opts.max_states)
    return bool(r_sr_branching(lts, lhs, rhs))


def _check_equation(axiom, lhs, rhs, opts):
    if not _holds_reactively(lhs, rhs, opts):
        return False
    if axiom.strong_ok and not _holds_strongly(lhs, rhs, opts):
        return False
    return True


def _check_approximation(lhs, rhs, opts):
    """Returns (holds, vacuous) for one implication instance."""
    universe = process_universe(lhs, rhs, limit=opts.max_alphabet)
    for env in _env_subsets(universe):
        if not _holds_reactively(mk_psi(env, lhs), mk_psi(env, rhs), opts):
            return True, True
    return _holds_reactively(lhs, rhs, opts), False


def fuzz_axioms(instances=50, seed=0, cfg=None, opts=None, names=None):
    """Fuzz every law (or the named subset) with ``instances`` random
    instances each; returns one :class:`AxiomResult` per law."""
    cfg = cfg or GenConfig(max_depth=3)
    opts = opts or CheckOptions()
    results = []
    for axiom in AXIOMS:
        if names is not None and axiom.name not in names:
            continue
        rng = random.Random(f"{seed}:{axiom.name}")
        failures = 0
        vacuous = 0
        counterexample = None
        for _ in range(instances):
            lhs, rhs = axiom.instantiate(rng, cfg)
            if axiom.kind == "implication":
                holds, skip = _check_approximation(lhs, rhs, opts)
                vacuous += skip
            else:
                holds = _check_equation(axiom, lhs, rhs, opts)
            if not holds:
                failures += 1
                if counterexample is None:
                    counterexample = (term_text(lhs), term_text(rhs))
        results.append(
            AxiomResult(
                name=axiom.name,
                sound=axiom.sound,
                instances=instances,
                failures=failures,
                vacuous=vacuous,
                counterexample=counterexample,
            )
        )
    return results
