"""Exception hierarchy shared across the testbed."""


class TestbedError(Exception):
    """Base class for all testbed errors."""


class ScenarioError(TestbedError):
    """Scenario file problem; carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(TestbedError):
    """Action or object failed validation against the registry/schema."""


class RegistryError(TestbedError):
    """Element registry conflict (duplicate id, unknown id)."""


class TraceError(TestbedError):
    """Trace log misuse (append after close) or storage failure."""


class TransportError(TestbedError):
    """Virtual/loopback network failure: port conflict, unknown device, dead device."""


class AnalysisError(TestbedError):
    """Insufficient or incompatible data for baseline/anomaly analysis."""


class CriteriaError(TestbedError):
    """Verdict criteria missing or malformed for a test kind."""
