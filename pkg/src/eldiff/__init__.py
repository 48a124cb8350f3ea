"""Entity-linking difficulty toolkit.

Derives HARD/MEDIUM/EASY difficulty labels from the agreement of multiple
entity-linking systems, computes mention/document/temporal features, trains
from-scratch classifiers to predict difficulty, analyzes feature importance
and correlation, and simulates the accuracy impact of routing difficult
mentions to human judgement.
"""

__version__ = "0.1.0"

from . import consensus, corpus, embeddings, features, learn, simulate, synth

__all__ = ["consensus", "corpus", "embeddings", "features", "learn", "simulate", "synth"]
