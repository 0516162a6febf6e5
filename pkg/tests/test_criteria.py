import math

import numpy as np
import pytest

from conftest import assert_close, cat_110_001
from entcrit import criteria, ops
from entcrit.criteria import (
    CriterionReport,
    NumericalError,
    Verdict,
    boson3_hur,
    boson3_product,
    boson3_sum,
    duan_criterion,
    get_criterion,
    npartite_criterion,
    operator_criterion,
    srir_margin,
    su2_criterion,
    su11_criterion,
)
from entcrit.space import CompositeSpace
from entcrit.states import QuantumState, basis_state, random_density, random_pure, rng_stream, superpose, tmsv


class TestReport:
    def test_margin_and_verdict(self):
        r = CriterionReport("x", 1.0, 1.5)
        assert r.margin == -0.5 and r.verdict is Verdict.DETECTED and r.detected
        assert CriterionReport("x", 1.0, 1.0 + 1e-10).verdict is Verdict.NOT_DETECTED
        assert CriterionReport("x", 1.0, 1.1, tolerance=0.2).verdict is Verdict.NOT_DETECTED

    def test_json(self):
        js = CriterionReport("x", 2, 1, {"m": np.float64(0.5)}, flags=("clamped:A",)).to_json()
        assert js == {
            "criterion_id": "x", "lhs": 2.0, "rhs": 1.0, "margin": 1.0, "verdict": "NotDetected",
            "tolerance": 1e-9, "moments": {"m": 0.5}, "flags": ["clamped:A"],
        }


class TestBosonCriteria:
    def test_cat_state(self, boson3):
        s = cat_110_001(boson3)
        assert_close(boson3_product(s).margin, -3 / 16, 1e-12)
        assert_close(boson3_hur(s).margin, -0.25, 1e-12)
        assert_close(boson3_sum(s, 1.0).margin, -0.25, 1e-12)
        assert_close(boson3_product(s).moments["mean_correction"], 2.0, 1e-15)

    def test_vacuum_saturates(self, boson3):
        r = boson3_product(basis_state(boson3, (0, 0, 0)))
        assert_close(r.lhs, 1 / 16, 1e-15)
        assert_close(r.margin, 0, 1e-12)
        assert r.verdict is Verdict.NOT_DETECTED

    def test_ghz_not_detected(self, boson3):
        s = superpose(boson3, [(1, (0, 0, 0)), (1, (1, 1, 1))])
        assert_close(boson3_product(s).margin, 9 / 16, 1e-12)

    def test_cutoff_independence(self):
        margins = [boson3_product(cat_110_001(CompositeSpace.bosons(3, c))).margin for c in (3, 4, 6)]
        assert max(margins) - min(margins) < 1e-12

    def test_sum_form_rearrangement(self, boson3, rng):
        s = random_density(boson3, rng, cap=2)
        for c in (0.5, 1.0, 2.0):
            r = boson3_sum(s, c)
            m = r.moments
            assert_close(m["lhs_c1_form"] - m["rhs_c1_form"], r.margin, 1e-12)
        with pytest.raises(ValueError):
            boson3_sum(s, 0)

    def test_npartite_matches_three_mode(self, boson3):
        for i in range(10):
            s = random_pure(boson3, rng_stream(2, i), cap=2)
            assert abs(npartite_criterion(s).margin - boson3_product(s).margin) < 1e-12

    def test_npartite_four_modes(self):
        space = CompositeSpace.bosons(4, 3)
        s = superpose(space, [(1, (1, 1, 1, 0)), (1, (0, 0, 0, 1))])
        assert_close(npartite_criterion(s).margin, -5 / 16, 1e-10)
        with pytest.raises(ValueError):
            npartite_criterion(basis_state(CompositeSpace.bosons(2, 2), (0, 0)))

    def test_space_checks(self, spin1):
        with pytest.raises(ValueError):
            boson3_product(basis_state(spin1, (0, 0, 0)))


class TestAlgebraCriteria:
    def test_su2(self, spin1):
        assert_close(su2_criterion(cat_110_001(spin1)).margin, -4, 1e-9)
        half = CompositeSpace.spins(3, 0.5)
        assert_close(su2_criterion(cat_110_001(half)).margin, 0, 1e-9)

    def test_su11(self):
        space = CompositeSpace.su11s(3, 0.5, 3)
        r = su11_criterion(cat_110_001(space))
        assert_close(r.margin, -0.625, 1e-9)
        assert_close(r.moments["mean_F"], 9, 1e-12)
        assert_close(r.moments["mean_Dz"], -5, 1e-12)

    def test_kind_mismatch(self, boson3, spin1):
        with pytest.raises(ValueError):
            su2_criterion(basis_state(boson3, (0, 0, 0)))
        with pytest.raises(ValueError):
            su11_criterion(basis_state(spin1, (0, 0, 0)))


class TestDuan:
    def test_vacuum(self):
        space = CompositeSpace.bosons(2, 4)
        r = duan_criterion(basis_state(space, (0, 0)), 1.0)
        assert_close(r.margin, 0, 1e-12)

    def test_tmsv(self):
        space = CompositeSpace.bosons(2, 30)
        r = duan_criterion(tmsv(space, 0.5), -1.0)
        assert_close(r.lhs, 2 * math.exp(-1), 1e-4)
        assert_close(r.margin, 2 * math.exp(-1) - 2, 1e-4)


class TestGenericRelations:
    def test_srir_holds_on_random_states(self, spin1):
        fam = ops.build_su2_families(spin1)
        for i in range(20):
            s = random_density(spin1, rng_stream(8, i))
            assert srir_margin(fam.Ax, fam.Ay, fam.Az, s).margin >= -1e-10

    def test_pt_paths_equal_builtin(self, boson3):
        s = cat_110_001(boson3)
        h = ops.build_boson_H(boson3)
        prod = criteria.pt_product_criterion(h.x, h.y, h.z, s, [3])
        assert abs(prod.margin - boson3_product(s).margin) < 1e-12
        summ = criteria.pt_sum_criterion(h.x, h.y, h.z, 1.0, s, [3])
        assert abs(summ.margin - boson3_sum(s).margin) < 1e-12

    def test_commutator_check(self, boson3):
        h = ops.build_boson_H(boson3)
        assert criteria.check_commutator(h.x, h.y, h.z) < 1e-10
        with pytest.raises(ValueError):
            criteria.check_commutator(h.x, h.y, 2 * h.z)

    def test_operator_criterion_factory(self, boson3):
        h = ops.build_boson_H(boson3)
        crit = operator_criterion("pt_sum", h.x, h.y, h.z, [3], c_param=2.0)
        assert crit.criterion_id == "pt_sum"
        s = cat_110_001(boson3)
        assert abs(crit(s).margin - boson3_sum(s, 2.0).margin) < 1e-12
        with pytest.raises(ValueError):
            operator_criterion("pt_product", h.x, h.y, h.z)
        with pytest.raises(ValueError):
            operator_criterion("witness", h.x, h.y, h.z, [3])


class TestVarianceClamp:
    def test_tiny_negative_is_flagged(self):
        flags = []
        assert criteria._clamp(-1e-14, 1.0, "L_x", flags) == 0.0
        assert flags == ["clamped:L_x"]
        assert criteria._clamp(0.25, 1.0, "L_x", flags) == 0.25

    def test_large_negative_raises(self, boson3):
        # an indefinite "density" makes the variance genuinely negative
        a = basis_state(boson3, (0, 0, 0)).density()
        b = cat_110_001(boson3).density()
        rho = 2 * a - b
        with pytest.raises(NumericalError):
            boson3_product(QuantumState.mixed(boson3, rho, check=False))

    def test_eigenstate_variance_not_negative(self, boson3):
        lx = ops.build_boson_L(boson3).x
        w, v = np.linalg.eigh(lx.data)
        s = QuantumState.pure(boson3, v[:, -1], normalize=True)
        r = boson3_product(s)
        assert r.moments["var_Lx"] >= 0
        assert all(f.startswith("clamped:") for f in r.flags)


class TestRegistry:
    def test_get_criterion(self, boson3):
        crit = get_criterion("boson3_sum", c=2)
        assert crit.criterion_id == "boson3_sum"
        s = cat_110_001(boson3)
        assert crit(s).moments["c"] == 2
        with pytest.raises(ValueError):
            get_criterion("nope")

    def test_all_ids_present(self):
        assert set(criteria.CRITERIA) == {
            "boson3_product", "boson3_sum", "boson3_hur", "su2_product", "su11_product", "duan", "nmode_product",
        }
