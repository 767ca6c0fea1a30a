"""Explainable content moderation: boolean text rules, an exemplar-paired
contrastive dual encoder, rule-grounded predictions, and unsupervised
rule-quality strategies."""

__version__ = "0.1.0"
