import os
import sys

from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    REPORT = getattr(mod, "REPORT", None)
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for key in sorted(REPORT, key=lambda k: (int(k.split("-")[0]), k)):
            terminalreporter.write_line(REPORT[key])
