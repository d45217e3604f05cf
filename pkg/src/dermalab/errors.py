"""Exception taxonomy shared across the toolkit.

Every failure mode that callers are expected to handle gets its own class so
that the CLI can map error families onto exit codes without string matching.
"""


class DermalabError(Exception):
    """Base class for all toolkit errors."""


# --- ingest -----------------------------------------------------------------

class IngestError(DermalabError):
    """Base class for session-file parsing and alignment failures."""


class MalformedRow(IngestError):
    pass


class NonMonotonicTime(IngestError):
    pass


class EmptyFile(IngestError):
    pass


class MissingChannel(IngestError):
    pass


class InvalidTimeline(IngestError):
    pass


class PartialCoverage(IngestError):
    pass


class EmptyWindow(IngestError):
    pass


# --- dsp --------------------------------------------------------------------

class DspError(DermalabError):
    pass


class TooShort(DspError):
    pass


class NonFiniteInput(DspError):
    pass


class InvalidCutoff(DspError):
    pass


class OddOrder(DspError):
    pass


class RateMismatch(DspError):
    pass


class DegenerateInput(DspError):
    pass


# --- convex decomposition ---------------------------------------------------

class InvalidTimeConstants(DermalabError):
    pass


class SolverDiverged(DermalabError):
    pass


# --- features ---------------------------------------------------------------

class ZeroDuration(DermalabError):
    pass


# --- forest / shapley -------------------------------------------------------

class ModelError(DermalabError):
    pass


class TooFewRows(ModelError):
    pass


class InvalidRatio(ModelError):
    pass


class DegenerateTarget(ModelError):
    pass


class EmptyData(ModelError):
    pass


class ArityMismatch(ModelError):
    pass


class TooManyFeatures(ModelError):
    pass


class EmptyBackground(ModelError):
    pass


# --- stats ------------------------------------------------------------------

class StatsError(DermalabError):
    pass


class TooFewGroups(StatsError):
    pass


class EmptyGroup(StatsError):
    pass


class LengthMismatch(StatsError):
    pass


class NegativeStatistic(StatsError):
    pass


# --- synth ------------------------------------------------------------------

class InvalidSpec(DermalabError):
    pass
