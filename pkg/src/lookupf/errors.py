"""Exception hierarchy shared by all lookupf modules."""

from __future__ import annotations


class LookupfError(Exception):
    """Base class for all domain errors raised by this package."""


class UnknownForgeryType(LookupfError):
    """A forgery-type string outside the closed enumeration."""


class DimensionMismatch(LookupfError):
    """Image/mask (or mask/mask) dimensions disagree."""


class NotSingleChannel(LookupfError):
    """Operation requires a 1-channel (luminance) image."""


class InvalidParams(LookupfError):
    """Parameter object fails its own validity constraints."""


class DimMismatch(LookupfError):
    """Descriptor/vector dimensions disagree."""


class TooFewSamples(LookupfError):
    """Not enough training vectors for the requested output dimension."""


class DuplicateId(LookupfError):
    """Two index entries (or corpus images) share an id."""


class BadMagic(LookupfError):
    """File does not start with the descriptor-store magic bytes."""


class TruncatedFile(LookupfError):
    """File ended before the declared record payload was complete."""


class ChecksumMismatch(LookupfError):
    """Trailing CRC32 does not match the file contents."""


class UnsupportedType(LookupfError):
    """Mask prediction requested for a type that carries no mask."""


class MissingLabel(LookupfError):
    """Oracle detector could not find the sidecar (or a required field)."""


class PlacementOutOfBounds(LookupfError):
    """Scaled, placed object does not lie fully inside the target image."""


class EmptyObjectMask(LookupfError):
    """Forgery recipe's object mask selects no pixels."""


class EmptyCorpus(LookupfError):
    """An operation requiring a non-empty image corpus got an empty one."""


class EmptyGroundTruth(LookupfError):
    """Ground-truth table contains no positive pairs."""


class MissingProportion(LookupfError):
    """A scored query has no forgery-proportion entry."""


class DegenerateGroundTruth(LookupfError):
    """Pixel-level AUC needs both classes present in the ground truth."""
