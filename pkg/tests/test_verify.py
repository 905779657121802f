from hara_learning import MarketParams, Prior
from hara_learning.verify import Check, format_checks, run_suite, suite_passed

MKT = MarketParams(0.2, 1.0, 0.02)
GRID = dict(ts=[0.0, 0.5], xs=[1.0], ys=[-0.5, 0.5], gammas=[-10.0, -2.0, -0.5, 0.3, 0.9])


def test_positive_and_negative_two_point_priors_pass():
    for atoms in ([(0.2, 0.5), (0.6, 0.5)], [(-0.6, 0.5), (-0.2, 0.5)]):
        checks = run_suite(Prior.discrete(atoms), MKT, **GRID)
        assert suite_passed(checks), format_checks(checks)
        assert not any(c.detection_only for c in checks)


def test_uniform_prior_passes():
    checks = run_suite(Prior.uniform(0.05, 0.5), MKT, **GRID)
    assert suite_passed(checks), format_checks(checks)


def test_gaussian_includes_oracle_checks():
    checks = run_suite(Prior.gaussian(0.5, 0.5), MKT, **GRID)
    names = {c.name for c in checks}
    assert "gaussian oracle: pi_hat" in names
    assert suite_passed(checks), format_checks(checks)


def test_mixed_prior_reports_without_failing():
    checks = run_suite(Prior.discrete([(-0.4, 0.5), (0.6, 0.5)]), MKT, [0.0, 0.5], [1.0], [-0.5, 0.0, 0.5])
    assert suite_passed(checks)
    flagged = [c for c in checks if c.detection_only]
    assert flagged and any(not c.passed for c in flagged)


def test_suite_passed_ignores_detection_only():
    assert suite_passed([Check("a", True), Check("b", False, detection_only=True)])
    assert not suite_passed([Check("a", False)])
