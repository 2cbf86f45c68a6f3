"""Job recommendation engine.

Learns candidates' progression of job selections with a bidirectional
recurrent classifier and composes recommendation slates that blend the
model's predictions with similar-job and similar-candidate retrieval.
"""

__version__ = "0.1.0"
