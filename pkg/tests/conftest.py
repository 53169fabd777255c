import sys

import pytest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and item.fspath.basename == "test_acceptance.py":
        label = item.name.replace("test_", "", 1).replace("_", "-")
        verdict = "PASS" if rep.passed else "FAIL"
        print(f"ACCEPTANCE {verdict}: {label}", file=sys.__stdout__)
