"""Static checks, canonical expansion and numeric evaluation of objectives.

The safeguard validates a parsed objective against an instance the way
a solver-facing code review would: identifiers must exist, index usage
must line up with the declared sets, the polynomial degree in decision
variables is capped at two, and abs() may wrap affine forms only. The
canonicalizer then expands all comprehensions over the concrete index
sets and folds every parameter to a number, leaving a sorted monomial
list over decision tokens, which is the objective's content stripped
of all spelling choices.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..fleet import FleetInstance
from .parser import (
    ATOMS,
    Abs,
    And,
    Atom,
    BinOp,
    DslError,
    IndexVar,
    Neg,
    Num,
    ObjectiveAst,
    Sum,
)

COEFF_TOL = 1e-12


class SafeguardError(DslError):
    """Validation failure; carries all diagnostics found."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class ObjectiveInfo:
    """Outcome of a successful safeguard pass."""

    degree: int
    linear: bool
    uses_abs: bool
    decision_atoms: tuple[str, ...]


def _walk_degree(node, diagnostics: list[str]) -> tuple[int, bool]:
    """Returns (decision degree, contains abs over decisions)."""
    if isinstance(node, Num):
        return 0, False
    if isinstance(node, IndexVar):
        return 0, False
    if isinstance(node, Atom):
        if node.name not in ATOMS:
            diagnostics.append(f"unknown identifier {node.name!r}")
            return 0, False
        return (1, False) if ATOMS[node.name][0] == "decision" else (0, False)
    if isinstance(node, Neg):
        return _walk_degree(node.operand, diagnostics)
    if isinstance(node, Abs):
        deg, inner_abs = _walk_degree(node.operand, diagnostics)
        if inner_abs:
            diagnostics.append("abs() may not be nested")
        if deg > 1:
            diagnostics.append("abs() applies to affine subexpressions only")
        return deg, deg > 0
    if isinstance(node, Sum):
        return _walk_degree(node.body, diagnostics)
    if isinstance(node, BinOp):
        dl, al = _walk_degree(node.left, diagnostics)
        dr, ar = _walk_degree(node.right, diagnostics)
        if node.op == "*":
            if al or ar:
                diagnostics.append("abs() terms may not appear inside products")
            return dl + dr, al or ar
        return max(dl, dr), al or ar
    raise TypeError(f"unexpected AST node {type(node).__name__}")


def _check_indices(node, instance: FleetInstance, diagnostics: list[str]) -> None:
    if isinstance(node, Atom):
        if node.name in ATOMS:
            expected = ATOMS[node.name][1]
            for pos, (idx, set_name) in enumerate(zip(node.indices, expected)):
                if isinstance(idx, IndexVar):
                    if idx.set_name != set_name:
                        diagnostics.append(
                            f"{node.name} index {pos + 1} ranges over {set_name}, "
                            f"got a variable bound to {idx.set_name}"
                        )
                elif isinstance(idx, int):
                    continue  # membership checked at expansion time
                else:
                    diagnostics.append(
                        f"{node.name} index {pos + 1} must be a bound variable "
                        "or an integer literal"
                    )
        return
    if isinstance(node, (Neg, Abs)):
        _check_indices(node.operand, instance, diagnostics)
    elif isinstance(node, Sum):
        _check_indices(node.body, instance, diagnostics)
    elif isinstance(node, BinOp):
        _check_indices(node.left, instance, diagnostics)
        _check_indices(node.right, instance, diagnostics)


def _collect_decisions(node, found: set[str]) -> None:
    if isinstance(node, Atom) and node.name in ATOMS and ATOMS[node.name][0] == "decision":
        found.add(node.name)
    elif isinstance(node, (Neg, Abs)):
        _collect_decisions(node.operand, found)
    elif isinstance(node, Sum):
        _collect_decisions(node.body, found)
    elif isinstance(node, BinOp):
        _collect_decisions(node.left, found)
        _collect_decisions(node.right, found)


def safeguard(ast: ObjectiveAst, instance: FleetInstance) -> ObjectiveInfo:
    """Validate an objective; raises :class:`SafeguardError` on failure."""
    diagnostics: list[str] = []
    degree, uses_abs = _walk_degree(ast.body, diagnostics)
    if degree > 2:
        diagnostics.append(f"decision degree {degree} exceeds the maximum of 2")
    _check_indices(ast.body, instance, diagnostics)
    if diagnostics:
        raise SafeguardError(diagnostics)
    decisions: set[str] = set()
    _collect_decisions(ast.body, decisions)
    linear = degree <= 1 and not uses_abs
    return ObjectiveInfo(
        degree=degree,
        linear=linear,
        uses_abs=uses_abs,
        decision_atoms=tuple(sorted(decisions)),
    )


def check(ast: ObjectiveAst, instance: FleetInstance):
    """Non-raising safeguard: returns (info or None, diagnostics)."""
    try:
        return safeguard(ast, instance), []
    except SafeguardError as err:
        return None, err.diagnostics


# --- canonical form ---


@dataclass(frozen=True)
class CanonicalForm:
    """Sense plus sorted monomials over decision tokens.

    ``monomials`` pairs a coefficient with a sorted tuple of tokens
    (empty for the constant term). Tokens are decision entries such as
    ``x[0,8,1]``/``u_hat[8,2]`` or ``|...|`` composites whose inner
    affine form over decision tokens is kept in ``abs_forms``.
    """

    sense: str
    monomials: tuple[tuple[float, tuple[str, ...]], ...]
    abs_forms: tuple[tuple[str, tuple[tuple[str, float], ...], float], ...] = ()

    def as_string(self) -> str:
        parts = [self.sense]
        for coeff, tokens in self.monomials:
            if tokens:
                parts.append(f"{coeff:+.10g}*{'*'.join(tokens)}")
            else:
                parts.append(f"{coeff:+.10g}")
        return " ".join(parts)

    def abs_form(self, token: str):
        for tok, terms, const in self.abs_forms:
            if tok == token:
                return terms, const
        raise KeyError(token)

    def evaluate(self, token_values: dict[str, float]) -> float:
        total = 0.0
        for coeff, tokens in self.monomials:
            term = coeff
            for tok in tokens:
                if tok.startswith("|"):
                    terms, const = self.abs_form(tok)
                    inner = const + sum(c * token_values[t] for t, c in terms)
                    term *= abs(inner)
                else:
                    term *= token_values[tok]
            total += term
        return total


class _Poly:
    """Polynomial over decision tokens during expansion."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: dict[tuple[str, ...], float] = terms or {}

    @classmethod
    def const(cls, value: float) -> "_Poly":
        return cls({(): float(value)} if value else {})

    @classmethod
    def token(cls, token: str, coeff: float = 1.0) -> "_Poly":
        return cls({(token,): coeff})

    def add(self, other: "_Poly", sign: float = 1.0) -> "_Poly":
        out = dict(self.terms)
        for key, val in other.terms.items():
            out[key] = out.get(key, 0.0) + sign * val
        return _Poly(out)

    def scale(self, factor: float) -> "_Poly":
        return _Poly({k: v * factor for k, v in self.terms.items()})

    def mul(self, other: "_Poly") -> "_Poly":
        out: dict[tuple[str, ...], float] = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                key = tuple(sorted(k1 + k2))
                if len(key) > 2:
                    raise DslError("decision degree exceeds 2 after expansion")
                if any(t.startswith("|") for t in key) and len(key) > 1:
                    raise DslError("abs() terms may not appear inside products")
                out[key] = out.get(key, 0.0) + v1 * v2
        return _Poly(out)

    def degree(self) -> int:
        return max((len(k) for k, v in self.terms.items() if abs(v) > COEFF_TOL), default=0)

    def affine_parts(self):
        const = self.terms.get((), 0.0)
        linear = []
        for key, val in self.terms.items():
            if not key or abs(val) <= COEFF_TOL:
                continue
            if len(key) > 1 or key[0].startswith("|"):
                raise DslError("expected an affine form")
            linear.append((key[0], val))
        return sorted(linear), const


class _Expander:
    def __init__(self, instance: FleetInstance):
        self.instance = instance
        self.sets = {
            "I": list(instance.supply_areas),
            "J": list(instance.demand_areas),
            "K": list(range(instance.soc_levels)),
        }
        for name, members in self.sets.items():
            if not members:
                raise DslError(f"index set {name} is empty")
        self.abs_forms: dict[str, tuple[tuple[tuple[str, float], ...], float]] = {}
        inv = instance.supply.mean() if instance.supply.size else 0.0
        self.demand_avg = instance.demand.mean(axis=1)
        self.inventory_avg = float(inv)

    def _index_value(self, node, env) -> int:
        if isinstance(node, int):
            return node
        if isinstance(node, IndexVar):
            return env[node.name]
        if isinstance(node, BinOp):
            left = self._index_value(node.left, env)
            right = self._index_value(node.right, env)
            return left + right if node.op == "+" else left - right
        raise DslError("invalid index expression")

    def _cond(self, node, env) -> bool:
        if node is None:
            return True
        if isinstance(node, And):
            return self._cond(node.left, env) and self._cond(node.right, env)
        left = self._index_value(node.left, env)
        right = self._index_value(node.right, env)
        return {
            "==": left == right,
            "!=": left != right,
            "<": left < right,
            "<=": left <= right,
            ">": left > right,
            ">=": left >= right,
        }[node.op]

    def _positions(self, atom: Atom, env) -> tuple[int, ...]:
        inst = self.instance
        expected = ATOMS[atom.name][1]
        out = []
        for pos, (idx, set_name) in enumerate(zip(atom.indices, expected)):
            value = self._index_value(idx, env)
            members = self.sets[set_name]
            if value not in members:
                raise DslError(
                    f"{atom.name} index {pos + 1} = {value} is not a member of {set_name}"
                )
            if set_name == "I":
                out.append(inst.supply_index(value))
            elif set_name == "J":
                out.append(inst.demand_index(value))
            else:
                out.append(value)
        return tuple(out)

    def _atom_ids(self, atom: Atom, env) -> tuple[int, ...]:
        out = []
        for idx in atom.indices:
            out.append(self._index_value(idx, env))
        return tuple(out)

    def expand(self, node, env) -> _Poly:
        inst = self.instance
        if isinstance(node, Num):
            return _Poly.const(node.value)
        if isinstance(node, IndexVar):
            return _Poly.const(float(env[node.name]))
        if isinstance(node, Neg):
            return self.expand(node.operand, env).scale(-1.0)
        if isinstance(node, BinOp):
            left = self.expand(node.left, env)
            right = self.expand(node.right, env)
            if node.op == "+":
                return left.add(right)
            if node.op == "-":
                return left.add(right, sign=-1.0)
            return left.mul(right)
        if isinstance(node, Abs):
            inner = self.expand(node.operand, env)
            if inner.degree() == 0:
                return _Poly.const(abs(inner.terms.get((), 0.0)))
            linear, const = inner.affine_parts()
            body = " ".join(f"{c:+.10g}*{t}" for t, c in linear)
            token = f"|{const:+.10g} {body}|"
            self.abs_forms[token] = (tuple(linear), const)
            return _Poly.token(token)
        if isinstance(node, Sum):
            total = _Poly()
            sets = [self.sets[b.set_name] for b in node.bindings]
            names = [b.name for b in node.bindings]

            def recurse(depth, env):
                nonlocal total
                if depth == len(sets):
                    if self._cond(node.filter, env):
                        total = total.add(self.expand(node.body, env))
                    return
                for member in sets[depth]:
                    env[names[depth]] = member
                    recurse(depth + 1, env)
                del env[names[depth]]

            recurse(0, dict(env))
            return total
        if isinstance(node, Atom):
            name = node.name
            if name == "x":
                ids = self._atom_ids(node, env)
                self._positions(node, env)  # membership check
                return _Poly.token(f"x[{ids[0]},{ids[1]},{ids[2]}]")
            if name == "u_hat":
                ids = self._atom_ids(node, env)
                self._positions(node, env)
                return _Poly.token(f"u_hat[{ids[0]},{ids[1]}]")
            if name == "u":
                ids = self._atom_ids(node, env)
                pos = self._positions(node, env)
                fee = float(inst.booking_fee[pos[0]])
                token = f"u_hat[{ids[0]},{ids[1]}]"
                return _Poly.token(token, inst.theta).add(_Poly.const(fee))
            pos = self._positions(node, env)
            if name == "S":
                return _Poly.const(float(inst.supply[pos[0], pos[1]]))
            if name == "z":
                return _Poly.const(float(inst.demand[pos[0], pos[1]]))
            if name == "dist":
                return _Poly.const(float(inst.distance_km[pos[0], pos[1]]))
            if name == "w":
                return _Poly.const(float(inst.reposition_cost[pos[0], pos[1]]))
            if name == "demand_avg":
                return _Poly.const(float(self.demand_avg[pos[0]]))
            if name == "inventory_avg":
                return _Poly.const(self.inventory_avg)
            raise DslError(f"unknown identifier {name!r}")
        raise TypeError(f"unexpected AST node {type(node).__name__}")


def canonicalize(ast: ObjectiveAst, instance: FleetInstance) -> CanonicalForm:
    """Expand an objective over the instance into sorted monomials."""
    expander = _Expander(instance)
    poly = expander.expand(ast.body, {})
    monomials = sorted(
        ((v, k) for k, v in poly.terms.items() if abs(v) > COEFF_TOL),
        key=lambda item: (len(item[1]), item[1]),
    )
    used = {t for _, key in monomials for t in key if t.startswith("|")}
    abs_forms = tuple(
        (tok, expander.abs_forms[tok][0], expander.abs_forms[tok][1])
        for tok in sorted(used)
    )
    return CanonicalForm(
        sense=ast.sense,
        monomials=tuple((float(v), k) for v, k in monomials),
        abs_forms=abs_forms,
    )


def evaluate(ast, instance: FleetInstance, decision, fulfillment=None) -> float:
    """Numeric value of the objective at a decision.

    ``fulfillment`` is accepted for signature symmetry with the profit
    function; no current atom reads it.
    """
    inst = instance
    ev = _Evaluator(inst, decision)
    return float(ev.eval(ast.body, {}))


class _Evaluator:
    def __init__(self, instance: FleetInstance, decision):
        self.instance = instance
        self.decision = decision
        self.sets = {
            "I": list(instance.supply_areas),
            "J": list(instance.demand_areas),
            "K": list(range(instance.soc_levels)),
        }
        self.demand_avg = instance.demand.mean(axis=1)
        self.inventory_avg = float(instance.supply.mean())

    def _index_value(self, node, env) -> int:
        if isinstance(node, int):
            return node
        if isinstance(node, IndexVar):
            return env[node.name]
        if isinstance(node, BinOp):
            left = self._index_value(node.left, env)
            right = self._index_value(node.right, env)
            return left + right if node.op == "+" else left - right
        raise DslError("invalid index expression")

    def _cond(self, node, env) -> bool:
        if node is None:
            return True
        if isinstance(node, And):
            return self._cond(node.left, env) and self._cond(node.right, env)
        left = self._index_value(node.left, env)
        right = self._index_value(node.right, env)
        return {
            "==": left == right,
            "!=": left != right,
            "<": left < right,
            "<=": left <= right,
            ">": left > right,
            ">=": left >= right,
        }[node.op]

    def _resolve(self, atom: Atom, env) -> tuple[int, ...]:
        inst = self.instance
        expected = ATOMS[atom.name][1]
        out = []
        for pos, (idx, set_name) in enumerate(zip(atom.indices, expected)):
            value = self._index_value(idx, env)
            if value not in self.sets[set_name]:
                raise DslError(
                    f"{atom.name} index {pos + 1} = {value} is not a member of {set_name}"
                )
            if set_name == "I":
                out.append(inst.supply_index(value))
            elif set_name == "J":
                out.append(inst.demand_index(value))
            else:
                out.append(value)
        return tuple(out)

    def eval(self, node, env) -> float:
        inst = self.instance
        if isinstance(node, Num):
            return node.value
        if isinstance(node, IndexVar):
            return float(env[node.name])
        if isinstance(node, Neg):
            return -self.eval(node.operand, env)
        if isinstance(node, Abs):
            return abs(self.eval(node.operand, env))
        if isinstance(node, BinOp):
            left = self.eval(node.left, env)
            right = self.eval(node.right, env)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            return left * right
        if isinstance(node, Sum):
            sets = [self.sets[b.set_name] for b in node.bindings]
            names = [b.name for b in node.bindings]
            total = 0.0

            def recurse(depth, env):
                nonlocal total
                if depth == len(sets):
                    if self._cond(node.filter, env):
                        total += self.eval(node.body, env)
                    return
                for member in sets[depth]:
                    env[names[depth]] = member
                    recurse(depth + 1, env)
                del env[names[depth]]

            recurse(0, dict(env))
            return total
        if isinstance(node, Atom):
            name = node.name
            pos = self._resolve(node, env)
            if name == "x":
                return float(self.decision.x[pos])
            if name == "u_hat":
                return float(self.decision.u_hat[pos])
            if name == "u":
                return float(
                    inst.theta * self.decision.u_hat[pos] + inst.booking_fee[pos[0]]
                )
            if name == "S":
                return float(inst.supply[pos])
            if name == "z":
                return float(inst.demand[pos])
            if name == "dist":
                return float(inst.distance_km[pos])
            if name == "w":
                return float(inst.reposition_cost[pos])
            if name == "demand_avg":
                return float(self.demand_avg[pos[0]])
            if name == "inventory_avg":
                return self.inventory_avg
            raise DslError(f"unknown identifier {name!r}")
        raise TypeError(f"unexpected AST node {type(node).__name__}")
