"""Minimal computer-algebra core used by the jet calculus."""

from .expr import (
    FUNCTIONS, Add, Const, DomainError, EvalError, Expr, Func, MissingSymbolError, Mul,
    ONE, Pow, Sym, ZERO, cos, denominators, diff, evaluate, exp, func, ln, mul, power,
    simplify, sin, sqrt, subs, sum_exprs, symbol, sympify,
)
from .parser import ParseError, SymbolTable, UnknownIdentifierError, parse
from .printer import to_string
from .zero import ZeroResult, all_zero, current_tolerance, is_zero, numeric_tolerance, sample_point

eval_expr = evaluate

__all__ = [
    "FUNCTIONS", "Add", "Const", "DomainError", "EvalError", "Expr", "Func",
    "MissingSymbolError", "Mul", "ONE", "ParseError", "Pow", "Sym", "SymbolTable",
    "UnknownIdentifierError", "ZERO", "ZeroResult", "all_zero", "cos", "current_tolerance", "denominators",
    "diff", "eval_expr", "evaluate", "exp", "func", "is_zero", "ln", "mul", "numeric_tolerance", "parse",
    "power", "sample_point", "simplify", "sin", "sqrt", "subs", "sum_exprs", "symbol",
    "sympify", "to_string",
]
