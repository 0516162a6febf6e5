import math

import numpy as np
import pytest

from entcrit import criteria, explore
from entcrit.criteria import NumericalError, get_criterion
from entcrit.space import CompositeSpace
from entcrit.states import basis_state, violating_family


class TestAudit:
    spec = {"type": "random_separable", "cap": 2, "K": 4}

    def test_separable_audit_has_no_violations(self, boson3):
        rep = explore.mc_audit(get_criterion("boson3_product"), self.spec, 200, seed=1, space=boson3)
        assert rep.violations == 0 and rep.samples == 200
        assert rep.min_margin >= 0
        assert rep.criterion_id == "boson3_product"

    def test_deterministic_and_thread_independent(self, boson3):
        crit = get_criterion("boson3_hur")
        a = explore.mc_audit(crit, self.spec, 40, seed=9, space=boson3)
        b = explore.mc_audit(crit, self.spec, 40, seed=9, space=boson3, threads=4)
        assert a.margins == b.margins
        ja, jb = a.to_json(), b.to_json()
        ja.pop("elapsed"), jb.pop("elapsed")
        assert ja == jb
        c = explore.mc_audit(crit, self.spec, 40, seed=10, space=boson3)
        assert c.margins != a.margins

    def test_many_criteria_share_samples(self, boson3):
        crits = [get_criterion("boson3_product"), get_criterion("boson3_sum", c=2)]
        reports = explore.mc_audit_many(crits, self.spec, 20, seed=3, space=boson3)
        single = explore.mc_audit(crits[1], self.spec, 20, seed=3, space=boson3)
        assert reports[1].margins == single.margins

    def test_global_states_report_only(self, boson3):
        rep = explore.mc_audit(get_criterion("boson3_product"), {"type": "random_density", "cap": 2}, 30, 2, space=boson3)
        assert rep.samples == 30 and math.isfinite(rep.min_margin)

    def test_callable_sampler(self, boson3):
        rep = explore.mc_audit(get_criterion("boson3_product"), lambda rng: basis_state(boson3, (0, 0, 0)), 3, 0)
        assert rep.margins == [rep.margins[0]] * 3 and rep.violations == 0

    def test_space_mismatch(self, boson3, spin1):
        with pytest.raises(ValueError):
            explore.mc_audit(get_criterion("boson3_product"), lambda rng: basis_state(spin1, (0, 0, 0)), 2, 0, space=boson3)
        with pytest.raises(ValueError):
            explore.mc_audit(get_criterion("boson3_product"), self.spec, 2, 0)

    def test_empty_audit(self, boson3):
        rep = explore.mc_audit(get_criterion("boson3_product"), self.spec, 0, 0, space=boson3)
        assert rep.violations == 0 and math.isnan(rep.min_margin)


class TestMaximize:
    def family(self, space):
        return lambda x: violating_family(space, x[0], x[1])

    def test_finds_violation(self, boson3):
        cfg = explore.OptConfig(restarts=4)
        res = explore.maximize_violation(
            get_criterion("boson3_product"), self.family(boson3), [(0, math.pi / 2), (0, 2 * math.pi)], cfg, seed=1
        )
        assert res.best_margin <= -0.187
        assert res.restarts_used == 4 and len(res.restart_margins) == 4
        recomputed = criteria.boson3_product(violating_family(CompositeSpace.bosons(3, 4), *res.best_params)).margin
        assert abs(recomputed - res.best_margin) <= 1e-12

    def test_su2_family(self, spin1):
        cfg = explore.OptConfig(restarts=4)
        res = explore.maximize_violation(
            get_criterion("su2_product"), self.family(spin1), [(0, math.pi / 2), (0, 2 * math.pi)], cfg, seed=2
        )
        assert res.best_margin <= -3.9

    def test_constant_family(self, boson3):
        state = basis_state(boson3, (0, 0, 0))
        res = explore.maximize_violation(get_criterion("boson3_product"), lambda x: state, [(0, 1)], explore.OptConfig(restarts=2))
        assert res.converged
        assert res.best_margin == criteria.boson3_product(state).margin

    def test_seeded_and_thread_independent(self, boson3):
        args = (get_criterion("boson3_product"), self.family(boson3), [(0, math.pi / 2), (0, 2 * math.pi)])
        a = explore.maximize_violation(*args, explore.OptConfig(restarts=3), seed=5)
        b = explore.maximize_violation(*args, explore.OptConfig(restarts=3), seed=5, threads=3)
        assert a == b

    def test_recompute_guard(self, boson3):
        calls = {"n": 0}

        def drifting(state):
            calls["n"] += 1
            return criteria.CriterionReport("drift", 0.0, -calls["n"] * 1e-6)

        with pytest.raises(NumericalError):
            explore.maximize_violation(drifting, self.family(boson3), [(0, 1), (0, 1)], explore.OptConfig(restarts=1, max_iter=5))

    def test_family_errors_propagate(self):
        def bad(x):
            raise RuntimeError("boom")

        with pytest.raises(RuntimeError):
            explore.maximize_violation(get_criterion("boson3_product"), bad, [(0, 1)])

    def test_config(self):
        assert explore.OptConfig.from_json({"restarts": 2}).restarts == 2
        with pytest.raises(ValueError):
            explore.OptConfig.from_json({"temperature": 1})
        with pytest.raises(ValueError):
            explore.maximize_violation(get_criterion("boson3_product"), None, [(1, 0)])


class TestLimitStudy:
    @pytest.mark.parametrize("kind", ["su2", "su11"])
    def test_monotone_and_first_order(self, kind):
        study = explore.hp_limit_study(kind, [4, 8, 16, 32, 64])
        assert study.monotone()
        # asymptotically every deviation halves when j (k) doubles
        last = study.ratios[-1]
        for col in explore.LIMIT_COLUMNS:
            assert 0.45 <= last[col] <= 0.55

    def test_single_mode_element(self):
        study = explore.hp_limit_study("su2", [8, 16])
        for row in study.rows:
            j = row["value"]
            expected = abs(math.sqrt(2) * math.sqrt(1 - 1 / (2 * j)) - math.sqrt(2))
            assert abs(row["err_single"] - expected) < 1e-14
        assert 0.4 <= study.ratios[0]["err_single"] <= 0.6

    def test_single_value_has_no_ratio(self):
        study = explore.hp_limit_study("su11", [4])
        assert len(study.rows) == 1 and study.ratios == []

    def test_non_doubling_ratio_is_none(self):
        assert explore.hp_limit_study("su2", [4, 6]).ratios == [None]

    def test_input_errors(self):
        with pytest.raises(ValueError):
            explore.hp_limit_study("su2", [0.5], probe_max=2)
        with pytest.raises(ValueError):
            explore.hp_limit_study("su3", [4])
        with pytest.raises(ValueError):
            explore.hp_limit_study("su2", [8, 4])
        with pytest.raises(ValueError):
            explore.hp_limit_study("su2", [4.3])

    def test_json(self):
        js = explore.hp_limit_study("su2", [4, 8]).to_json()
        assert js["kind"] == "su2" and len(js["rows"]) == 2
