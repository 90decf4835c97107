import functools

# criterion number -> (passed, detail); filled by tests decorated with ``criterion``
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
_NOTES: dict[int, list[str]] = {}


def note(n: int, text: str) -> None:
    _NOTES.setdefault(n, []).append(text)


def criterion(n: int, title: str):
    """Record PASS/FAIL for acceptance criterion ``n`` in the terminal summary."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            _NOTES[n] = []
            try:
                fn(*args, **kwargs)
            except BaseException as exc:
                detail = "; ".join(_NOTES[n] + [f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"])
                ACCEPTANCE[n] = (False, f"{title} -- {detail}")
                raise
            ACCEPTANCE[n] = (True, f"{title} -- " + "; ".join(_NOTES[n]))

        return run

    return wrap


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
