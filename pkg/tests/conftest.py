import pytest

CRITERIA = {
    1: "divergence rate equals -log dilation",
    2: "power law c(f^k) = k c(f)",
    3: "parabolic null rate and step dichotomy",
    4: "step-limit formula at the Denjoy-Wolff point",
    5: "Julia inclusion on sampled horospheres",
    6: "canonical semi-model of hyperbolic LFT forms",
    7: "parabolic LFT dichotomy and model domain",
    8: "Valiron and Abel residuals, K-limit divergence",
    9: "semigroup linearity and semigroup law",
    10: "geometry kernel and suite runtime",
}

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n = mark.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes.setdefault(n, []).append((item.name, rep.passed, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, text in CRITERIA.items():
        runs = _outcomes.get(n)
        if runs is None:
            tr.write_line(f"criterion {n:2d}  NOT RUN  {text}")
            continue
        ok = all(p for _, p, _ in runs)
        secs = sum(d for _, _, d in runs)
        tr.write_line(f"criterion {n:2d}  {'PASS' if ok else 'FAIL'}  {text}  "
                      f"({len(runs)} checks, {secs:.2f} s)")
