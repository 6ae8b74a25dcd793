import numpy as np
import pytest

from lipbounds import BoxDomain, FunctionModel
from lipbounds._backend import available_backends
from lipbounds.corpus import corpus_list

BACKENDS = available_backends()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(params=sorted(BACKENDS))
def kernel(request):
    return BACKENDS[request.param]


@pytest.fixture(scope="session")
def corpus():
    return corpus_list()


def poly1d(coeffs, lo=-1.0, hi=1.0, name="poly"):
    """1-d polynomial model with analytic derivatives; coeffs low to high."""
    p = np.polynomial.Polynomial(coeffs)
    dp, d2p = p.deriv(1), p.deriv(2)
    box = BoxDomain([lo], [hi]).expanded(1e-2)
    return FunctionModel(
        dim=1,
        eval=lambda x: p(x[..., 0]),
        grad=lambda x: dp(x),
        hess=lambda x: d2p(x)[..., None],
        domain=box,
        name=name,
    )


@pytest.fixture
def square():
    return poly1d([0, 0, 1], name="x^2")


# -- acceptance summary ---------------------------------------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or rep.failed:
        number, title = mark.args
        ok = rep.passed and _ACCEPTANCE.get(number, (title, True))[1]
        _ACCEPTANCE[number] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}  {'PASS' if ok else 'FAIL'}  {title}")
