import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--run-extended", action="store_true", default=False,
        help="run long extended acceptance checks (Stewart-Gough recovery)",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-extended"):
        return
    skip = pytest.mark.skip(reason="extended check; pass --run-extended to run")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)
