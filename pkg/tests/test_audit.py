import json

import numpy as np
import pytest

from bifluid_lab.constitutive import AdmissibleRegion, make_law
from bifluid_lab.constitutive.audit import (EXPONENT_FAIL, EXPONENT_PASS, AuditSampling,
                                            audit_hypotheses, tail_verdict)
from bifluid_lab.constitutive.laws import PressureLaw
from bifluid_lab.constitutive.report import Check, compare_upper


@pytest.mark.parametrize("name,params", [
    ("e1", {"gamma": 2, "beta": 2}),
    ("e1", {"gamma": 2, "beta": 2, "couplings": [{"C": 1.0, "r": 0.5, "s": 1.0}]}),
    ("e2", {"gamma": 2}),
    ("power", {"gamma": 3}),
])
def test_catalog_laws_pass(name, params):
    report = audit_hypotheses(make_law(name, **params))
    assert report.verdict == "pass", report.summary_lines()


def test_two_species_law_passes():
    reg = AdmissibleRegion((0.1, 0.0), (0.5, 1.0))
    report = audit_hypotheses(make_law("e1", region=reg, gamma=2, beta=[2, 2]))
    assert report.verdict == "pass", report.summary_lines()


def test_dZ_exponent_too_large_without_lower_band():
    """With a_lower = 0 only gamma + gamma_BOG = 7/3 is available for dP/dZ."""
    reg = AdmissibleRegion((0.1, 0.0), (0.5, 1.0))
    report = audit_hypotheses(make_law("e1", region=reg, gamma=2, beta=[2, 2.5]))
    check = report.check("H3.dZ_bound[1]")
    assert check.verdict == "fail"
    assert check.bound == pytest.approx(7 / 3)
    assert check.witness["rho"] > 1


def test_persistent_dip_fails_with_witness():
    report = audit_hypotheses(make_law("log_oscillating"))
    check = report.check("H4.decomposition")
    assert check.verdict == "fail"
    assert check.witness["rho"] > AuditSampling().rho_max / 100
    assert check.witness["dip"] > 0
    assert report.verdict == "fail"
    assert [c.name for c in report.failures()] == ["H4.decomposition"]


def test_compact_dip_is_repaired_by_the_scan():
    """P = rho^2 - rho^3 on [0, 1): the dip sits inside a compact set."""
    reg = AdmissibleRegion.single(0.0, 1.0)

    def evaluate(rho, Z):
        rho = np.asarray(rho, dtype=float)
        return rho ** 2 - np.where(rho < 1, rho ** 3, 0.0) + np.sum(np.asarray(Z) ** 2, axis=0)

    law = PressureLaw("dip", evaluate, reg, 2.0, (2.0,), 2.0)
    check = audit_hypotheses(law).check("H4.decomposition")
    assert check.verdict == "pass"
    assert check.constants["support_radius"] <= 1.0


def test_report_json_is_deterministic():
    a = audit_hypotheses(make_law("e1")).to_json()
    b = audit_hypotheses(make_law("e1")).to_json()
    assert a == b
    doc = json.loads(a)
    assert list(doc) == ["subject", "verdict", "checks", "sampling"]
    assert doc["sampling"]["band"] == 0.05


def test_tail_and_band_verdicts():
    assert tail_verdict(EXPONENT_PASS / 2) == "pass"
    assert tail_verdict((EXPONENT_PASS + EXPONENT_FAIL) / 2) == "indeterminate"
    assert tail_verdict(2 * EXPONENT_FAIL) == "fail"
    assert compare_upper(0.5, 1.0) == "pass"
    assert compare_upper(0.98, 1.0) == "indeterminate"
    assert compare_upper(1.2, 1.0) == "fail"


def test_fail_requires_witness():
    with pytest.raises(ValueError):
        Check("x", "fail")
