"""Exception types shared across the package.

Every error raised deliberately by jobrec derives from :class:`JobRecError`
so callers (and the CLI) can distinguish expected failure modes from bugs.
"""

from __future__ import annotations


class JobRecError(Exception):
    """Base class for all jobrec errors."""


class ConfigError(JobRecError):
    """Bad or unknown configuration key/value."""


# -- data loading -------------------------------------------------------------

class ParseError(JobRecError):
    """A record line could not be parsed."""

    def __init__(self, path: str, line_no: int, reason: str) -> None:
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason


class DuplicateId(JobRecError):
    """An id (or interaction key) occurred more than once."""


class DanglingReference(JobRecError):
    """An interaction references a candidate or job id that does not exist."""


class NoSnapshotBefore(JobRecError):
    """No candidate snapshot exists at or before the queried time."""


# -- featurization ------------------------------------------------------------

class EmptySkill(JobRecError):
    """Skill token is empty after normalization."""


class EmptyVocabulary(JobRecError):
    """No skills found in the dataset."""


class DimensionTooLarge(JobRecError):
    """Requested embedding dimension exceeds the vocabulary size."""


class DegenerateMatrix(JobRecError):
    """Co-occurrence matrix carries no signal (all zeros)."""


class KTooLarge(JobRecError):
    """Requested more competency groups than there are skills."""


class UnknownSkill(JobRecError):
    """Skill token is not in the vocabulary."""


class EmptySkillSet(JobRecError):
    """An operation requiring skills received an empty set."""


class AllSkillsUnknown(JobRecError):
    """Every skill of an entity is missing from the vocabulary."""


# -- similarity ---------------------------------------------------------------

class ZeroVector(JobRecError):
    """Cosine similarity is undefined for an all-zero vector."""


class LengthMismatch(JobRecError):
    """Vectors (or prediction/label lists) differ in length."""


class UnknownJob(JobRecError):
    """Job id has no vector in the index."""


class UnknownCandidate(JobRecError):
    """Candidate id has no vector in the index."""


# -- sequence model -----------------------------------------------------------

class ShapeMismatch(JobRecError):
    """Input width does not match the model's expected width."""


class SingleClassDataset(JobRecError):
    """Training requires examples of both classes."""


class NonFiniteLoss(JobRecError):
    """Loss became NaN/inf during training."""

    def __init__(self, epoch: int, batch: int) -> None:
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


class NoInteractionHistory(JobRecError):
    """Candidate has no positive interaction to supply the first timestep."""


# -- evaluation ---------------------------------------------------------------

class EmptyInput(JobRecError):
    """Metric computation received no observations."""


class ZeroImpressions(JobRecError):
    """Chi-square test received an arm with zero impressions."""


class CategoryMismatch(JobRecError):
    """Homogeneity test received distributions over different category sets."""


class DegenerateTest(JobRecError):
    """Test has zero degrees of freedom."""


class EmptyArm(JobRecError):
    """CTR simulation arm produced no impressions."""


# -- generation ---------------------------------------------------------------

class ConfigInvalid(JobRecError):
    """Generator configuration violates its invariants."""


# -- command line ---------------------------------------------------------------

class UnknownSubcommand(JobRecError):
    """Command line named a subcommand that does not exist."""
