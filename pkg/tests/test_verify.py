"""The umbrella release gate: every module invariant passes at desk scale."""

from latgauss.verify import verify_suite


def test_default_suite_passes_everywhere():
    verdicts = verify_suite()
    failures = [v.line() for v in verdicts if not v.ok]
    assert not failures, "\n".join(failures)
    assert len(verdicts) >= 20


def test_verdict_lines_are_stable_and_named():
    verdicts = verify_suite()
    names = [v.name for v in verdicts]
    assert len(names) == len(set(names))
    assert names == [v.name for v in verify_suite()]
    for v in verdicts:
        assert v.line().startswith(("PASS ", "FAIL "))
        assert v.name in v.line()
