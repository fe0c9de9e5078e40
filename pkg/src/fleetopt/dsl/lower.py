"""Lowering validated objectives onto a fleet MIP.

Linear monomials map straight onto the model's decision expressions.
Bilinear fare-times-allocation terms are expanded against the fare
selection binaries of a gridded model, one product auxiliary per
(binary, allocation) pair. Absolute-value terms introduce one bounded
auxiliary and two tightening rows; they are accepted only in the
orientation the LP can honor (penalized, not rewarded).
"""

from __future__ import annotations

import re

from ..fleet import FleetInstance
from ..mip.problem import CONTINUOUS, GE, LE, MAX, MIN, MipProblem, Objective
from .analysis import CanonicalForm, canonicalize
from .parser import DslError, ObjectiveAst

_UHAT_RE = re.compile(r"u_hat\[(-?\d+),(-?\d+)\]")


def _expr_bounds(mip: MipProblem, terms, const: float) -> tuple[float, float]:
    lo = hi = const
    for idx, c in terms.items():
        var = mip.variables[idx]
        if c >= 0:
            lo += c * var.lb
            hi += c * var.ub
        else:
            lo += c * var.ub
            hi += c * var.lb
    return lo, hi


def _token_expr(mip: MipProblem, token: str):
    try:
        return mip.expr_map[token]
    except KeyError:
        raise DslError(f"decision {token} is not present in this model") from None


def _lower_abs(mip: MipProblem, form: CanonicalForm, token: str, tag: int) -> int:
    terms_by_token, const = form.abs_form(token)
    terms: dict[int, float] = {}
    total_const = const
    for tok, c in terms_by_token:
        expr = _token_expr(mip, tok)
        for idx, coeff in expr.terms.items():
            terms[idx] = terms.get(idx, 0.0) + c * coeff
        total_const += c * expr.constant
    lo, hi = _expr_bounds(mip, terms, total_const)
    aux = mip.add_variable(f"absval[{tag}]", CONTINUOUS, 0.0, max(abs(lo), abs(hi), 0.0))
    # aux >= L  and  aux >= -L
    row1 = {aux: 1.0}
    for idx, c in terms.items():
        row1[idx] = row1.get(idx, 0.0) - c
    mip.add_constraint(row1, GE, total_const, name=f"abs+[{tag}]")
    row2 = {aux: 1.0}
    for idx, c in terms.items():
        row2[idx] = row2.get(idx, 0.0) + c
    mip.add_constraint(row2, GE, -total_const, name=f"abs-[{tag}]")
    return aux


def _lower_product(
    mip: MipProblem, instance: FleetInstance, tok_u: str, tok_x: str
) -> list[tuple[int, float]]:
    """Product u_hat * x as grid-weighted auxiliaries; returns
    (variable index, price weight) pairs."""
    match = _UHAT_RE.fullmatch(tok_u)
    if not match:
        raise DslError(f"cannot lower product of {tok_u} and {tok_x}")
    j_id, k = int(match.group(1)), int(match.group(2))
    rhos = getattr(mip, "price_rhos", {}).get((j_id, k))
    if not rhos:
        raise DslError(
            f"product {tok_u}*{tok_x} needs fare selection binaries; "
            "build the model with a price grid"
        )
    x_expr = _token_expr(mip, tok_x)
    if len(x_expr.terms) != 1 or x_expr.constant != 0.0:
        raise DslError(f"{tok_x} does not map to a single column")
    x_idx = next(iter(x_expr.terms))
    x_ub = mip.variables[x_idx].ub
    cache = getattr(mip, "product_cache", None)
    if cache is None:
        cache = {}
        mip.product_cache = cache
    out = []
    for p, (rho_idx, price) in enumerate(rhos):
        key = (rho_idx, x_idx)
        if key in cache:
            out.append((cache[key], price))
            continue
        name = f"prod[{mip.variables[rho_idx].name}*{mip.variables[x_idx].name}]"
        prod = mip.add_variable(name, CONTINUOUS, 0.0, x_ub)
        mip.add_constraint({prod: 1.0, rho_idx: -x_ub}, LE, 0.0, name=f"{name}:cap")
        mip.add_constraint({prod: 1.0, x_idx: -1.0}, LE, 0.0, name=f"{name}:le_x")
        mip.add_constraint(
            {prod: 1.0, x_idx: -1.0, rho_idx: -x_ub}, GE, -x_ub, name=f"{name}:ge"
        )
        cache[key] = prod
        out.append((prod, price))
    return out


def lower_to_mip(
    ast: ObjectiveAst,
    instance: FleetInstance,
    mip: MipProblem,
    as_secondary: bool = True,
) -> Objective:
    """Install an objective into a model built over the same instance.

    With ``as_secondary`` the objective lands in the model's secondary
    slot (the usual arrangement: predicted profit stays primary);
    otherwise it replaces the primary objective.
    """
    form = canonicalize(ast, instance)
    sense = MAX if form.sense == "max" else MIN
    coeffs: dict[int, float] = {}
    constant = 0.0

    def accumulate(idx: int, value: float):
        coeffs[idx] = coeffs.get(idx, 0.0) + value

    abs_tags = 0
    for coeff, tokens in form.monomials:
        if not tokens:
            constant += coeff
            continue
        if len(tokens) == 1:
            tok = tokens[0]
            if tok.startswith("|"):
                penalized = (sense == MIN and coeff > 0) or (sense == MAX and coeff < 0)
                if not penalized:
                    raise DslError(
                        "abs() term is rewarded by the objective sense and "
                        "cannot be lowered linearly"
                    )
                aux = _lower_abs(mip, form, tok, abs_tags)
                abs_tags += 1
                accumulate(aux, coeff)
            else:
                expr = _token_expr(mip, tok)
                for idx, c in expr.terms.items():
                    accumulate(idx, coeff * c)
                constant += coeff * expr.constant
            continue
        tok_a, tok_b = tokens
        if tok_a.startswith("u_hat") and tok_b.startswith("x"):
            for prod_idx, price in _lower_product(mip, instance, tok_a, tok_b):
                accumulate(prod_idx, coeff * price)
        else:
            raise DslError(
                f"product {tok_a}*{tok_b} is not representable in the linear model"
            )

    if as_secondary:
        mip.set_secondary_objective(sense, coeffs, constant)
        return mip.secondary
    mip.set_objective(sense, coeffs, constant)
    return mip.objective
