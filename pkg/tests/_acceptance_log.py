"""Registry the acceptance tests write into; conftest prints it at the end."""

from typing import Optional

RESULTS: dict[str, tuple[Optional[bool], str]] = {}


def record(name: str, passed: Optional[bool], detail: str = "") -> None:
    """passed=True/False prints PASS/FAIL; passed=None prints SKIP."""
    RESULTS[name] = (passed if passed is None else bool(passed), detail)
