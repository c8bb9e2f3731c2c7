"""Corpus analytics for competency questions and their SPARQL-OWL translations."""

__version__ = "0.1.0"
