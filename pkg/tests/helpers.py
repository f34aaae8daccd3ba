"""Shared builders for the test suite: random expressions and standard systems."""

import random

from hypothesis import strategies as st

from jetcurv.applications import lemniscate, random_connection
from jetcurv.connection import Connection, adapted_slice, build_split_frame, free_connection, make_slice
from jetcurv.jetcalc import JetContext
from jetcurv.symcore import SymbolTable, parse

NAMES = ["a", "b", "c"]
TABLE = SymbolTable(NAMES, ["base"] * 3)

# atoms and unary wrappers that stay finite and smooth on the sampling box [0.25, 1.75]
_ATOMS = NAMES + ["1", "2", "3/2"]
_UNARY = ["sin({})", "cos({})", "exp({}/4)", "ln(1 + ({})^2)", "sqrt(1 + ({})^2)", "1/(2 + ({})^2)"]
_BINARY = ["({}) + ({})", "({}) - ({})", "({})*({})", "({})/(1 + ({})^2)"]


def random_expression_text(rng: random.Random, depth: int = 3) -> str:
    if depth == 0 or rng.random() < 0.25:
        return rng.choice(_ATOMS)
    if rng.random() < 0.4:
        return rng.choice(_UNARY).format(random_expression_text(rng, depth - 1))
    return rng.choice(_BINARY).format(random_expression_text(rng, depth - 1),
                                      random_expression_text(rng, depth - 1))


def random_expression(rng: random.Random, depth: int = 3):
    return parse(random_expression_text(rng, depth), TABLE)


@st.composite
def expressions(draw, depth=3):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_expression(random.Random(seed), depth)


@st.composite
def polynomials(draw, names=NAMES, max_terms=4, max_degree=3):
    """Text of a random polynomial with small rational coefficients."""
    terms = []
    for _ in range(draw(st.integers(1, max_terms))):
        coef = draw(st.integers(-3, 3).filter(lambda k: k != 0))
        powers = [draw(st.integers(0, max_degree)) for _ in names]
        mono = "*".join(f"{n}^{p}" for n, p in zip(names, powers) if p)
        terms.append(f"({coef})" + (f"*{mono}" if mono else ""))
    return " + ".join(terms)


def free_system(n=2, m=1):
    return free_connection(JetContext.default(n, m))


def systems():
    """The three systems used by the identity criteria."""
    return {
        "free": free_system(2, 1),
        "lemniscate": lemniscate(),
        "random": random_connection(3, 2),
    }


def lemniscate_slices(c):
    ctx = c.ctx
    return {
        "t": make_slice(ctx, [1, 0], [1, 0]),
        "th": make_slice(ctx, [0, 1], [0, 1]),
    }


def frame(c, s=None, **kw):
    return build_split_frame(c, s if s is not None else adapted_slice(c.ctx), **kw)


def connection_from_text(x, y, entries):
    ctx = JetContext.create(x, y)
    return Connection(ctx, {k: parse(v, ctx.symbols) for k, v in entries.items()})
