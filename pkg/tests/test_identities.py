import math

import pytest

from refractlib import CramerLundbergExp, RefractedModel, StableThreeHalves
from refractlib import identities
from refractlib.identities import (
    IdentityCheck,
    classical_checks,
    complement_checks,
    denominator_checks,
    exp_kernel_checks,
    kernel_form_checks,
    run_identities,
)


def test_identity_check_passed():
    """Test the pass rule, including non-finite residuals."""
    assert IdentityCheck("a", {}, 1e-9, 1e-8).passed
    assert IdentityCheck("a", {}, -1e-9, 1e-8).passed
    assert not IdentityCheck("a", {}, 1e-7, 1e-8).passed
    assert not IdentityCheck("a", {}, math.nan, 1e-8).passed
    assert not IdentityCheck("a", {}, math.inf, 1e-8).passed


def test_identity_check_to_dict():
    """Test the dictionary form of a check."""
    check = IdentityCheck("classical_ruin", {"x": 1.0}, 0.0, 1e-10)
    assert check.to_dict() == {
        "name": "classical_ruin", "parameters": {"x": 1.0}, "residual": 0.0, "tolerance": 1e-10, "passed": True
    }


def test_exp_kernel_checks(cl_refracted):
    """Test the exponential kernel identity over a small grid."""
    checks = exp_kernel_checks(cl_refracted, qs=(0.0, 0.1), rs=(1.0,))
    assert len(checks) == 2
    assert all(check.passed for check in checks)
    assert checks[1].parameters["q"] == 0.1
    assert checks[1].parameters["delta"] == 3.0


def test_kernel_form_checks(brownian_refracted):
    """Test that both forms of the auxiliary kernels agree."""
    checks = kernel_form_checks(brownian_refracted, points=(1.0, 3.0))
    assert {check.name for check in checks} == {"kernel_forms", "kernel_forms_refracted"}
    assert all(check.passed for check in checks)


def test_classical_checks(cl_refracted):
    """Test that Y and the refracted process have the same classical ruin probability."""
    assert all(check.passed for check in classical_checks(cl_refracted))


def test_denominator_checks(cl_refracted):
    """Test that the two ruin denominators agree."""
    checks = denominator_checks(cl_refracted, rs=(1.0,))
    assert checks[0].name == "ruin_denominator"
    assert checks[0].passed


def test_complement_checks(cl_refracted):
    """Test that Parisian ruin and exit above a are complementary."""
    check = complement_checks(cl_refracted)[0]
    assert check.name == "complementarity"
    assert check.passed


def test_run_identities_default_models():
    """Test that the whole suite passes on the default models."""
    checks = run_identities()
    names = {check.name for check in checks}
    assert names == {
        "exp_kernel", "convolution", "convolution_refracted", "kernel_forms", "kernel_forms_refracted",
        "classical_ruin", "ruin_denominator", "complementarity",
    }
    failed = [check.to_dict() for check in checks if not check.passed]
    assert failed == []


def test_run_identities_skips_without_net_profit(monkeypatch):
    """Test that profit-dependent checks are skipped for a model without net profit."""
    monkeypatch.setattr(identities, "SUITE", {
        name: identities.SUITE[name] for name in ("classical_ruin", "ruin_denominator", "complementarity")
    })
    rm = RefractedModel(CramerLundbergExp(9.0, 5.0, 1.0), 6.0)
    names = {check.name for check in run_identities([rm])}
    assert "ruin_denominator" not in names
    assert "complementarity" not in names
    assert "classical_ruin" in names


def test_run_identities_skips_unsupported(monkeypatch):
    """Test that checks the stable model cannot run are skipped, not raised."""
    marker = IdentityCheck("marker", {}, 0.0, 1.0)
    monkeypatch.setattr(identities, "SUITE", {"exp_kernel": exp_kernel_checks, "marker": lambda rm: [marker]})
    checks = run_identities([RefractedModel(StableThreeHalves(2.0), 1.0)])
    assert checks == [marker]


@pytest.mark.parametrize("rs", [(0.5,), (2.0,)])
def test_denominator_checks_delays(brownian_refracted, rs):
    """Test the denominator agreement for the Brownian model at several delays."""
    assert denominator_checks(brownian_refracted, rs=rs)[0].passed
