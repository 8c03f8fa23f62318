import logging

import numpy as np
import pytest

from simplex_spectra import oracle
from simplex_spectra.oracle import (CrossCheck, newton_kkt_batch, newton_multistart,
                                    verify_census_against_multistart,
                                    verify_rank_one_contractions)
from simplex_spectra.stationary import random_feasible
from simplex_spectra.tensor import SymTensor, from_frame

from conftest import cached_census


def corrupted(frame, m):
    S = from_frame(frame, m)
    e = np.array(S.entries)
    e[(0,) * m] += 1e-6
    return SymTensor(m, S.d, e, frame)


class TestContractionCheck:
    def test_grid_passes(self):
        cc = verify_rank_one_contractions([(3, 3), (4, 3), (4, 4), (5, 3)])
        assert cc.passed and cc.verdict == "pass"
        assert cc.max_discrepancy < 1e-12
        assert set(cc.details["per_cell"]) == {"3,3", "4,3", "4,4", "5,3"}
        (name, value, tol), = cc.gates
        assert name == "relative_large_norm" and value < tol == 1e-10

    def test_corrupted_tensor_fails(self):
        cc = verify_rank_one_contractions([(4, 3)], tensor_factory=corrupted)
        assert not cc.passed

    def test_as_dict(self):
        d = CrossCheck("x", [(3, 3)], 0.1, 1.0).as_dict()
        assert d["verdict"] == "pass" and d["grid"] == [[3, 3]]

    def test_gate_failure_fails(self):
        assert not CrossCheck("x", [], 0.0, 1.0, gates=[("g", 2.0, 1.0)]).passed


class TestNewtonOracle:
    def test_certified_points_are_census_points(self):
        pts = newton_multistart(4, 4, 500, seed=0)
        ref = np.array([p.u for p in cached_census(4, 4).points])
        assert pts
        for p in pts:
            assert p.kkt_residual < 1e-10
            assert np.min(np.max(np.abs(ref - p.u), axis=1)) < 1e-6

    def test_batch_mask(self):
        U, ok = newton_kkt_batch(4, 3, random_feasible(np.random.default_rng(0), 20, 4))
        assert U.shape == (20, 4) and ok.dtype == bool


class TestMultistartCheck:
    @pytest.mark.parametrize("n,m,count", [(3, 3, 3), (4, 4, 13)])
    def test_full_coverage(self, n, m, count):
        cc = verify_census_against_multistart(n, m, starts=10 ** 4, seed=0)
        assert cc.passed
        assert cc.details["census_count"] == count
        assert cc.details["extras"] == 0 and cc.details["uncovered"] == 0

    def test_small_sample_warns_only(self, caplog):
        with caplog.at_level(logging.WARNING, logger="simplex_spectra.oracle"):
            cc = verify_census_against_multistart(4, 3, starts=10, seed=0)
        assert cc.passed and cc.details["extras"] == 0
        assert not cc.details["coverage_required"]

    def test_extra_point_fails(self):
        # drop one census point from the reference: the oracle finds it as an extra
        ref = cached_census(3, 3).points[1:]
        cc = verify_census_against_multistart(3, 3, starts=200, seed=0, reference=ref)
        assert not cc.passed and cc.details["extras"] >= 1

    def test_guard(self):
        with pytest.raises(ValueError):
            verify_census_against_multistart(6, 3)

    def test_seeded(self):
        a = verify_census_against_multistart(4, 3, starts=100, seed=4).as_dict()
        b = verify_census_against_multistart(4, 3, starts=100, seed=4).as_dict()
        assert a == b


def test_factory_is_resolved_at_call_time(monkeypatch):
    monkeypatch.setattr(oracle, "from_frame", corrupted)
    assert not verify_rank_one_contractions([(3, 3)]).passed
