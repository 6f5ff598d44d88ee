"""hatelab: an end-to-end toolkit for low-resource Burmese hate speech work.

Stages: corpus ingestion and cleaning, Burmese script normalization and
segmentation, lexicon-driven filtering, paired human annotation with
agreement metrics, imbalanced-data text classification, and an
expert-in-the-loop validation cycle.
"""

__version__ = "0.1.0"
