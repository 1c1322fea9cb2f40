import sys

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
        name, ok, detail = mod.RESULTS[key]
        terminalreporter.write_line(f"AC{key:<12} {'PASS' if ok else 'FAIL'}  {name}  {detail}")
