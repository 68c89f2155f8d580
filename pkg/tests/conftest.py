"""Shared fixtures: the incubator excerpt, seeded model/store generators,
and independent oracles used by the property and acceptance tests."""

from __future__ import annotations

import random
from itertools import product

import pytest

from dtinsight.model import (
    DescriptionModel,
    Instance,
    RelationAssertion,
    ScalarAssertion,
)
from dtinsight.store import Query, Triple, TriplePattern, Variable, render_term, term_key
from dtinsight.vocab import QualifiedName

EXCERPT = """\
// a service of the twin
instance what_if_sim : DTDFVocab:Service [DTDFVocab:provides what_if_sim_results DTDFVocab:atStage baseDesc:operation]
// an enabler backing it
instance simulator : DTDFVocab:Enabler [DTDFVocab:enables what_if_sim]
// a model feeding three enablers
instance controller_model : DTDFVocab:Model [DTDFVocab:inputTo simulator DTDFVocab:inputTo state_estimator DTDFVocab:inputTo optimization_algs]
// a described characteristic
instance standardization : DTDFVocab:Standardization [base:desc "Communication is carried out using AMQP standard via RabbitMQ. Behavioral models have been produced following the FMI standard version 2."]
"""

C20_PREFIX = "Communication is carried out using AMQP standard"


@pytest.fixture
def excerpt_source() -> str:
    return EXCERPT


# -- random valid models ---------------------------------------------------------

_KEYWORD_LIKE = {
    "description", "instance", "uses", "extends", "vocabulary", "concept",
    "aspect", "relation", "scalar", "property", "entity", "from", "to",
    "forward", "reverse", "domain", "range", "functional", "true", "false",
    "desc",
}

# forward name -> (kinds satisfying the domain, kinds satisfying the range)
_RELATION_KINDS = {
    "provides": (("Service",), ("ProvidedThing",)),
    "enables": (("Enabler",), ("Service",)),
    "inputTo": (("Model", "Data"), ("Enabler",)),
    "asData": (("DataTransmitted",), ("Data",)),
    "atStage": (
        ("DTComponent", "Service", "Enabler", "Model", "Data"),
        ("LifecycleStage",),
    ),
}

_CONCRETE_KINDS = (
    "Service", "Enabler", "Model", "Data", "DTComponent", "Standardization",
    "TimeScaleThing", "ProvidedThing", "LifecycleStage", "PTComponent",
    "Operator", "Machine", "SystemEnvironment", "System",
    "SensorsDataTransmission", "DataTransmitted",
)

_ALPHA = "abcdefghijklmnopqrstuvwxyz_ABCDEFGHIJKLMNOPQRSTUVWXYZ"
_ALNUM = _ALPHA + "0123456789"


def random_identifier(rng: random.Random, max_len: int = 10) -> str:
    while True:
        length = rng.randint(1, max_len)
        name = rng.choice(_ALPHA) + "".join(
            rng.choice(_ALNUM) for _ in range(length - 1)
        )
        if name not in _KEYWORD_LIKE:
            return name


def random_text(rng: random.Random, max_len: int = 40) -> str:
    pool = "abc XYZ 019 \"'\\\n\t@#$%&*()[]{}<>,.:;!?/-+= é世界"
    return "".join(rng.choice(pool) for _ in range(rng.randint(0, max_len)))


def random_scalar(rng: random.Random):
    pick = rng.randrange(4)
    if pick == 0:
        return rng.choice((True, False))
    if pick == 1:
        return rng.randint(-10**9, 10**9)
    if pick == 2:
        # Plain decimals plus the occasional value whose repr is exponential.
        if rng.random() < 0.2:
            return rng.random() * 10.0 ** rng.randint(-20, 20)
        return round(rng.uniform(-1e6, 1e6), rng.randint(0, 6))
    return random_text(rng, 20)


def random_valid_model(rng: random.Random, max_instances: int = 50) -> DescriptionModel:
    """A model that validates with zero errors (warnings allowed)."""
    model_name = random_identifier(rng)
    count = rng.randint(0, max_instances)
    ids: list[str] = []
    seen = set()
    while len(ids) < count:
        candidate = random_identifier(rng)
        if candidate not in seen:
            seen.add(candidate)
            ids.append(candidate)
    kinds = {i: rng.choice(_CONCRETE_KINDS) for i in ids}
    by_kind: dict[str, list[str]] = {}
    for inst_id, kind in kinds.items():
        by_kind.setdefault(kind, []).append(inst_id)

    def fresh_dangling() -> str:
        while True:
            candidate = random_identifier(rng)
            if candidate not in seen:
                return candidate

    instances = []
    for inst_id in ids:
        kind = kinds[inst_id]
        relations = []
        for forward, (domains, ranges) in _RELATION_KINDS.items():
            if kind not in domains:
                continue
            for _ in range(rng.randint(0, 2)):
                in_model = [
                    t for r in ranges for t in by_kind.get(r, ()) if t != inst_id
                ]
                if in_model and rng.random() < 0.7:
                    target = rng.choice(in_model)
                else:
                    target = fresh_dangling()
                relations.append(
                    RelationAssertion(
                        forward, QualifiedName(model_name, target)
                    )
                )
        scalars = []
        for _ in range(rng.randint(0, 2)):
            scalars.append(
                ScalarAssertion(random_identifier(rng), random_scalar(rng))
            )
        if kind == "Enabler" and rng.random() < 0.3:
            scalars.append(ScalarAssertion("IsCommEnabler", rng.choice((True, False))))
        desc = random_text(rng) if rng.random() < 0.4 else None
        if desc == "":
            desc = None
        instances.append(
            Instance(
                QualifiedName(model_name, inst_id),
                QualifiedName("DTDFVocab", kind),
                tuple(relations),
                tuple(scalars),
                desc,
            )
        )
    imports = ("DTDFVocab",) if rng.random() < 0.8 else ()
    return DescriptionModel(model_name, imports, tuple(instances))


# -- random triple stores and queries ----------------------------------------------


def random_store(rng: random.Random, max_triples: int = 200) -> list[Triple]:
    subjects = [QualifiedName("m", f"s{i}") for i in range(rng.randint(1, 6))]
    predicates = [QualifiedName("v", f"p{i}") for i in range(rng.randint(1, 4))]
    objects: list = subjects + [
        QualifiedName("m", f"o{i}") for i in range(rng.randint(0, 3))
    ]
    objects += [True, False, 0, 1, 2.5, "x", "y"][: rng.randint(0, 7)]
    triples = []
    for _ in range(rng.randint(0, max_triples)):
        triples.append(
            Triple(
                rng.choice(subjects),
                rng.choice(predicates),
                rng.choice(objects),
            )
        )
    return triples


def random_query(rng: random.Random, triples: list[Triple]) -> Query:
    var_names = ["a", "b", "c"]
    pattern_count = rng.randint(1, 3)
    patterns = []
    used_vars: set[str] = set()

    def term_or_var(value, allow_literal: bool):
        roll = rng.random()
        if roll < 0.45:
            name = rng.choice(var_names)
            used_vars.add(name)
            return Variable(name)
        if roll < 0.9 or not allow_literal:
            if isinstance(value, QualifiedName):
                return value
            name = rng.choice(var_names)
            used_vars.add(name)
            return Variable(name)
        return value

    for _ in range(pattern_count):
        if triples and rng.random() < 0.75:
            base = rng.choice(triples)
        else:
            base = Triple(
                QualifiedName("m", "s0"), QualifiedName("v", "p0"), "zzz"
            )
        patterns.append(
            TriplePattern(
                term_or_var(base.subject, allow_literal=False),
                term_or_var(base.predicate, allow_literal=False),
                term_or_var(base.object, allow_literal=True),
            )
        )
    if not used_vars:
        var = Variable(rng.choice(var_names))
        pat = patterns[0]
        patterns[0] = TriplePattern(var, pat.predicate, pat.object)
        used_vars.add(var.name)
    select_count = rng.randint(1, len(used_vars))
    select_vars = tuple(sorted(used_vars))[:select_count]
    return Query(select_vars, tuple(patterns), distinct=rng.random() < 0.5)


def brute_force_select(query: Query, triples: list[Triple]) -> list[tuple]:
    """Assignment-enumeration oracle for basic-graph-pattern selection."""
    universe: dict[tuple, object] = {}
    for triple in triples:
        for term in (triple.subject, triple.predicate, triple.object):
            universe.setdefault(term_key(term), term)
    terms = list(universe.values())
    ground = {
        (term_key(t.subject), term_key(t.predicate), term_key(t.object))
        for t in triples
    }
    var_names = sorted(
        {
            term.name
            for pat in query.patterns
            for term in (pat.subject, pat.predicate, pat.object)
            if isinstance(term, Variable)
        }
    )

    def instantiate(term, env):
        return env[term.name] if isinstance(term, Variable) else term

    rows = []
    for assignment in product(terms, repeat=len(var_names)):
        env = dict(zip(var_names, assignment))
        if all(
            (
                term_key(instantiate(p.subject, env)),
                term_key(instantiate(p.predicate, env)),
                term_key(instantiate(p.object, env)),
            )
            in ground
            for p in query.patterns
        ):
            rows.append(tuple(env[v] for v in query.select_vars))
    if query.distinct:
        seen = set()
        deduped = []
        for row in rows:
            key = tuple(term_key(t) for t in row)
            if key not in seen:
                seen.add(key)
                deduped.append(row)
        rows = deduped
    rows.sort(
        key=lambda row: (
            tuple(render_term(t) for t in row),
            tuple(term_key(t) for t in row),
        )
    )
    return rows


# -- graph oracles -------------------------------------------------------------


def bfs_closure(edges: list[tuple[str, str]], start: str, direction: str) -> set[str]:
    out = {start}
    changed = True
    while changed:
        changed = False
        for src, dst in edges:
            if direction in ("forward", "both") and src in out and dst not in out:
                out.add(dst)
                changed = True
            if direction in ("backward", "both") and dst in out and src not in out:
                out.add(src)
                changed = True
    return out


def crossing_oracle(
    upper: list[str], lower: list[str], edges: list[tuple[str, str]]
) -> int:
    """Count pairwise edge crossings between two ordered layers."""
    upper_pos = {n: i for i, n in enumerate(upper)}
    lower_pos = {n: i for i, n in enumerate(lower)}
    spans = [
        (upper_pos[a], lower_pos[b]) for a, b in edges if a in upper_pos and b in lower_pos
    ]
    count = 0
    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            (a1, b1), (a2, b2) = spans[i], spans[j]
            if (a1 < a2 and b1 > b2) or (a1 > a2 and b1 < b2):
                count += 1
    return count
