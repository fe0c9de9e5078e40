import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fleetopt.dsl import (
    DslError,
    SafeguardError,
    canonicalize,
    evaluate,
    ground_truth_catalog,
    linear_entries,
    nonlinear_entries,
    parse,
    safeguard,
    validate_catalog,
)
from fleetopt.fleet import Decision, FleetInstance


@pytest.fixture
def inst():
    return FleetInstance(
        supply_areas=(0, 1),
        demand_areas=(8, 9),
        soc_levels=3,
        supply=[[2, 1, 3], [0, 2, 2]],
        demand=[[1, 2, 0], [2, 0, 1]],
        distance_km=[[4.0, 2.0], [3.0, 1.0]],
    )


def random_decision(rng, inst):
    return Decision(
        x=rng.integers(0, 3, (inst.n_supply, inst.n_demand, inst.soc_levels)),
        u_hat=rng.uniform(*inst.fare_bounds, (inst.n_demand, inst.soc_levels)),
    )


class TestParse:
    def test_allocation_sum(self, inst):
        ast = parse("maximize sum(i in I, j in J, k in K) x[i,j,k]")
        assert ast.sense == "max"
        info = safeguard(ast, inst)
        assert info.linear and info.degree == 1

    def test_fare_sum(self, inst):
        ast = parse("minimize sum(j in J, k in K) u[j,k]")
        assert ast.sense == "min"
        assert safeguard(ast, inst).linear

    def test_arity_violation_is_a_parse_error(self):
        with pytest.raises(DslError, match="3 indices"):
            parse("maximize sum(i in I) x[i]")

    def test_unbound_index(self):
        with pytest.raises(DslError, match="unbound"):
            parse("maximize x[i,j,k]")

    def test_syntax_error_carries_position(self):
        with pytest.raises(DslError) as exc:
            parse("maximize sum(i in I x[i,0,0]")
        assert exc.value.line == 1 and exc.value.col > 0

    def test_empty_source(self):
        with pytest.raises(DslError):
            parse("   ")

    def test_filter_and_literal_indices(self, inst):
        ast = parse("maximize sum(i in I, j in J, k in K if k > 0) x[i,j,k]")
        safeguard(ast, inst)
        ast = parse("maximize sum(i in I, j in J) x[i,j,2]")
        safeguard(ast, inst)


class TestSafeguard:
    def test_unknown_identifier(self, inst):
        with pytest.raises(SafeguardError) as exc:
            safeguard(parse("maximize sum(i in I) y[i]"), inst)
        assert any("unknown identifier" in d for d in exc.value.diagnostics)

    def test_degree_three_rejected(self, inst):
        src = "maximize sum(i in I, j in J, k in K) (x[i,j,k]*x[i,j,k]*x[i,j,k])"
        with pytest.raises(SafeguardError) as exc:
            safeguard(parse(src), inst)
        assert any("degree" in d for d in exc.value.diagnostics)

    def test_abs_of_quadratic_rejected(self, inst):
        src = "minimize sum(j in J, k in K) abs(u_hat[j,k] * sum(i in I) x[i,j,k])"
        with pytest.raises(SafeguardError):
            safeguard(parse(src), inst)

    def test_dispatching_efficiency_is_nonlinear(self, inst):
        src = "maximize sum(i in I, j in J, k in K) ((u[j,k] - w[i,j]) * x[i,j,k])"
        info = safeguard(parse(src), inst)
        assert not info.linear and info.degree == 2

    def test_index_set_mismatch(self, inst):
        with pytest.raises(SafeguardError):
            safeguard(parse("maximize sum(i in I, j in J, k in K) x[j,i,k]"), inst)

    def test_reserialized_acceptance_is_stable(self, inst):
        for entry in ground_truth_catalog():
            again = parse(entry.source)
            safeguard(again, inst)  # must not raise


class TestCanonicalize:
    def test_level_weights_expand(self, inst):
        cf = canonicalize(parse("maximize sum(k in K) ((k + 1) * x[0,8,k])"), inst)
        assert [m[0] for m in cf.monomials] == [1.0, 2.0, 3.0]

    def test_binding_order_is_immaterial(self, inst):
        a = canonicalize(parse("maximize sum(j in J, k in K) u_hat[j,k]"), inst)
        b = canonicalize(parse("maximize sum(k in K, j in J) u_hat[j,k]"), inst)
        assert a.as_string() == b.as_string()

    def test_filtered_variant_drops_bottom_level(self, inst):
        full = canonicalize(parse("maximize sum(j in J, k in K) u_hat[j,k]"), inst)
        part = canonicalize(
            parse("maximize sum(j in J, k in K if k > 0) u_hat[j,k]"), inst
        )
        full_tokens = {m[1] for m in full.monomials}
        part_tokens = {m[1] for m in part.monomials}
        dropped = {t[0] for t in full_tokens - part_tokens}
        assert dropped == {"u_hat[8,0]", "u_hat[9,0]"}

    def test_idempotent_under_reparse(self, inst):
        for entry in ground_truth_catalog():
            once = canonicalize(parse(entry.source), inst)
            twice = canonicalize(parse(entry.source), inst)
            assert once.as_string() == twice.as_string()

    def test_index_rename_invariance(self, inst):
        a = canonicalize(
            parse("maximize sum(i in I, j in J, k in K) (k * x[i,j,k])"), inst
        )
        b = canonicalize(
            parse("maximize sum(p in I, q in J, r in K) (r * x[p,q,r])"), inst
        )
        assert a.as_string() == b.as_string()

    def test_parameters_fold_to_constants(self, inst):
        cf = canonicalize(
            parse("minimize sum(i in I, k in K) (S[i,k] - sum(j in J) x[i,j,k])"), inst
        )
        const = [m for m in cf.monomials if not m[1]]
        assert const and const[0][0] == float(inst.supply.sum())


class TestEvaluate:
    def test_allocation_total(self, inst):
        rng = np.random.default_rng(0)
        dec = random_decision(rng, inst)
        ast = parse("maximize sum(i in I, j in J, k in K) x[i,j,k]")
        assert evaluate(ast, inst, dec) == float(dec.x.sum())

    def test_average_travel_price_value(self, inst):
        dec = Decision(x=np.zeros((2, 2, 3)), u_hat=np.full((2, 3), 10.0))
        ast = parse("minimize sum(j in J, k in K) u[j,k]")
        # u = 0.2 * 10 + 5 = 7 summed over six (j, k) cells
        assert evaluate(ast, inst, dec) == pytest.approx(42.0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1))
    def test_matches_canonical_dot_product(self, seed):
        inst = FleetInstance(
            supply_areas=(0, 1),
            demand_areas=(8, 9),
            soc_levels=3,
            supply=[[2, 1, 3], [0, 2, 2]],
            demand=[[1, 2, 0], [2, 0, 1]],
            distance_km=[[4.0, 2.0], [3.0, 1.0]],
        )
        rng = np.random.default_rng(seed)
        dec = random_decision(rng, inst)
        tokens = {}
        for i_pos, i in enumerate(inst.supply_areas):
            for j_pos, j in enumerate(inst.demand_areas):
                for k in range(3):
                    tokens[f"x[{i},{j},{k}]"] = float(dec.x[i_pos, j_pos, k])
        for j_pos, j in enumerate(inst.demand_areas):
            for k in range(3):
                tokens[f"u_hat[{j},{k}]"] = float(dec.u_hat[j_pos, k])
        for entry in ground_truth_catalog():
            ast = entry.ast()
            direct = evaluate(ast, inst, dec)
            via_form = canonicalize(ast, inst).evaluate(tokens)
            assert direct == pytest.approx(via_form, abs=1e-9)


class TestCatalog:
    def test_eighteen_entries_with_three_nonlinear(self):
        assert len(ground_truth_catalog()) == 18
        assert len(linear_entries()) == 15
        assert len(nonlinear_entries()) == 3

    def test_all_entries_validate(self, inst):
        validate_catalog(inst)

    def test_nonlinear_set(self):
        names = {e.query for e in nonlinear_entries()}
        assert names == {
            "Dispatching efficiency of taxis",
            "Supply-demand matching degree of taxis",
            "Market share of taxis",
        }

    def test_shared_formulas_stay_distinct_entries(self):
        sources = [e.source for e in ground_truth_catalog()]
        # several queries intentionally share one formula
        assert len(set(sources)) < len(sources)
