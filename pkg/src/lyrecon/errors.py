"""Shared exception root for the lyrecon package."""


class LyreconError(Exception):
    """Base class for every error lyrecon raises on purpose.

    Parsers attach 1-based line or row numbers to their subclasses so the
    CLI can point at the offending input.
    """
