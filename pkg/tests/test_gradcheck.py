import numpy as np

from edgesplat.gradcheck import CHECKS, _run, format_report, run_gradcheck


def _quadratic(scale):
    def make(rng):
        x = rng.normal(size=5)
        return (lambda y: float(np.sum(y**3))), x, scale * 3 * x**2

    return make


def test_correct_gradient_passes():
    result = _run("cubic", _quadratic(1.0), 5, 1e-6, np.random.default_rng(0))
    assert result.passed and result.retries == 0


def test_wrong_gradient_is_flagged():
    result = _run("cubic", _quadratic(1.01), 5, 1e-6, np.random.default_rng(0))
    assert not result.passed
    assert result.max_rel_error > 1e-3


def test_kinks_are_redrawn_not_failed():
    def make(rng):
        # |x| checked exactly at its kink with the right-hand slope
        x = np.zeros(1) if rng.random() < 0.5 else rng.uniform(1, 2, size=1)
        return (lambda y: float(np.abs(y).sum())), x, np.ones(1)

    result = _run("abs", make, 10, 1e-6, np.random.default_rng(1))
    assert result.passed and result.retries > 0


def test_all_checks_pass_and_report_is_stable():
    names = ["convolve_same_pullback", "splat_pullback", "chamfer_gradient"]
    a = run_gradcheck(seed=3, instances=5, names=names)
    assert [r.name for r in a] == names and all(r.passed for r in a)
    assert format_report(a) == format_report(run_gradcheck(seed=3, instances=5, names=names))
    assert format_report(a).endswith("gradcheck PASSED\n")


def test_selection_does_not_change_streams():
    full = {r.name: r for r in run_gradcheck(seed=4, instances=3)}
    one = run_gradcheck(seed=4, instances=3, names=["visual_maps_pullback"])[0]
    assert one == full["visual_maps_pullback"]
    assert len(full) == len(CHECKS)
