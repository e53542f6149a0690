import os

import pytest


@pytest.fixture(scope="session", autouse=True)
def _fresh_acceptance_report():
    # the acceptance tests append pass/fail lines; start each session clean
    path = os.path.join(os.path.dirname(__file__), "_artifacts",
                        "acceptance_report.txt")
    if os.path.exists(path):
        os.remove(path)
    yield
