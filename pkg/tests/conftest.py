import hypothesis
import pytest

from contagion.contact_log import Channel, ContactEvent, ContactLog

hypothesis.settings.register_profile("default", deadline=None, max_examples=60)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.load_profile("default")

I = Channel.INTERACTION
P = Channel.PROXIMITY

# criterion id -> (passed, detail); printed by pytest_terminal_summary
ACCEPTANCE_RESULTS = {}


def chain_log(first=(0, 1, 10.0), second=(1, 2, 20.0), duration=100.0, n_days=1, day_length=480.0):
    (a1, b1, s1), (a2, b2, s2) = first, second
    return ContactLog.from_events(3, n_days, day_length, [
        ContactEvent(a1, b1, s1, duration, I),
        ContactEvent(a2, b2, s2, duration, I),
    ])


@pytest.fixture
def chain():
    return chain_log()


@pytest.fixture
def reversed_chain():
    return chain_log(first=(1, 2, 10.0), second=(0, 1, 20.0))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k.split()[0])):
        status, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"[{status}] criterion {key}: {detail}")
