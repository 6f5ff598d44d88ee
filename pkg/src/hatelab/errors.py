"""Exception types shared across the toolkit.

Every error that a pipeline stage can raise lives here so callers (and the
CLI, which maps them to exit code 2) have a single import point.
"""


class HatelabError(Exception):
    """Base class for all toolkit errors."""


class RuleTableInvalid(HatelabError):
    """The conversion rule file failed validation (bad pattern, duplicate
    priority, or a pattern that can match the empty string)."""


class NotNormalized(HatelabError):
    """Text handed to a stage that requires normalized Unicode still carries
    Zawgyi marker patterns."""


class FileUnreadable(HatelabError):
    """Input file missing or not decodable as UTF-8."""


class HeaderMismatch(HatelabError):
    """CSV input is missing required columns."""

    def __init__(self, missing: list[str]):
        self.missing = list(missing)
        super().__init__(f"missing required columns: {', '.join(self.missing)}")


class EmptyLexicon(HatelabError):
    """A lexicon file produced zero terms after normalization."""


class OddAnnotatorCount(HatelabError):
    """Pairing requires an even number of annotators."""


class InsufficientPosts(HatelabError):
    """Not enough posts to fill the paired phase."""

    def __init__(self, required: int, available: int):
        self.required = required
        self.available = available
        super().__init__(
            f"paired phase needs {required} posts, only {available} available "
            f"(shortfall {required - available})"
        )


class BatchMismatch(HatelabError):
    """Two annotators' label sets cover different posts."""


class RaggedMatrix(HatelabError):
    """Fleiss input rows do not all have the same number of ratings."""


class MissingLabel(HatelabError):
    """Adjudication needs both pair members' labels."""


class SingleClass(HatelabError):
    """Training data contains only one class."""


class NonFiniteLoss(HatelabError):
    """Training diverged to a non-finite loss."""

    def __init__(self, epoch: int):
        self.epoch = epoch
        super().__init__(f"non-finite loss at epoch {epoch}")


class EmptyVocab(HatelabError):
    """No n-gram survived the min_count threshold."""


class FeatureConfigMismatch(HatelabError):
    """Input was featurized with a different configuration than the model's."""


class IdMismatch(HatelabError):
    """Prediction and gold id sets differ."""


class TooFewMinority(HatelabError):
    """Stratified CV needs at least k minority examples."""


class SampleTooLarge(HatelabError):
    """Requested review sample exceeds the number of items."""


class MissingExpertLabels(HatelabError):
    """Disagreement report requires expert labels on every item."""


class InvalidLabel(HatelabError):
    """Label violates the decision/characteristics invariants."""


class UnknownPost(HatelabError):
    """Post id is not part of the plan/corpus in use."""
