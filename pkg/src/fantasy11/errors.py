"""Exception hierarchy shared across the package."""

from __future__ import annotations


class Fantasy11Error(Exception):
    """Base class for all domain errors raised by this package."""


class MalformedTeamError(Fantasy11Error):
    """A team fails its structural invariants (size, C/VC membership)."""


class UnknownPlayerError(Fantasy11Error):
    """A referenced player id cannot be resolved in the active pool."""


class MissingPerformanceError(Fantasy11Error):
    """A team member has no performance record."""

    def __init__(self, player_id: str):
        super().__init__(f"no performance record for player {player_id!r}")
        self.player_id = player_id


class ConfigError(Fantasy11Error):
    """A rules or scoring config document is missing fields or inconsistent."""


class DataLoadError(Fantasy11Error):
    """An input file does not conform to its documented schema."""


class IngestError(Fantasy11Error):
    """Contest entry ingestion failed (unreadable source, too many bad rows)."""


class InfeasibleError(Fantasy11Error):
    """No rule-valid team exists for the given pool and rules."""


class DegenerateSampleError(Fantasy11Error):
    """A statistic is undefined for the sample (e.g. zero variance)."""


class BackendError(Fantasy11Error):
    """LLM or HTTP backend failure after retries."""


class MissingFixtureError(BackendError):
    """Mock backend has no fixture for the request fingerprint."""

    def __init__(self, fingerprint: str, detail: str = ""):
        msg = f"no fixture for fingerprint {fingerprint}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.fingerprint = fingerprint


class MalformedAfterRetriesError(BackendError):
    """Structured completion kept failing validation; raw attempts attached."""

    def __init__(self, problems: list[str], raw_responses: list[str]):
        super().__init__(
            "structured completion failed after "
            f"{len(raw_responses)} attempt(s): {'; '.join(problems)}"
        )
        self.problems = problems
        self.raw_responses = raw_responses


class PipelineError(Fantasy11Error):
    """An agent step failed; carries the slot or player that broke."""


class StuckStateError(PipelineError):
    """Supervisor routing found no applicable rule (indicates a bug)."""


class CannotProduceValidSlateError(PipelineError):
    """Selector exhausted its retry budget without a fully valid slate."""
