"""Exception taxonomy shared across the engine.

Every error raised on a user-facing path derives from ConvscopeError so the
CLI and the HTTP layer can translate validation failures uniformly.
"""

from __future__ import annotations


class ConvscopeError(Exception):
    """Base class for all validation and contract errors."""


# snapshot files
class MalformedFile(ConvscopeError):
    """Snapshot document violates the file schema or its semantic rules."""


class DanglingReference(ConvscopeError):
    """An edge points at a neuron id that does not exist."""


class MissingActivation(ConvscopeError):
    """The activation table does not cover every (neuron, class) pair."""


# layer grouping
class OrphanActivation(ConvscopeError):
    """An activation layer has no preceding conv or FC layer in its group."""


class MappingMismatch(ConvscopeError):
    """A merged layer pair does not have a 1-1 neuron correspondence."""


class UndisplayableGroup(ConvscopeError):
    """A layer group contains no layer that can be shown."""


# tiny network evaluation
class WindowTooLarge(ConvscopeError):
    """A convolution window exceeds the input grid."""


class NonDivisibleDims(ConvscopeError):
    """Pooling input dimensions are not divisible by the pool size."""


class EmptyClass(ConvscopeError):
    """A class has no samples to average over."""


# clustering
class InvalidK(ConvscopeError):
    """Requested cluster count is outside [1, n]."""


class NonPositiveBandwidth(ConvscopeError):
    """Mean-shift bandwidth must be strictly positive."""


# interactions
class UnknownNeuron(ConvscopeError):
    """A command names a neuron absent from the addressed layer."""


class UnknownTargetCluster(ConvscopeError):
    """A command names a cluster id absent from the addressed layer."""


class EmptyClassSet(ConvscopeError):
    """A class filter selected zero classes."""


class CountUnderflow(ConvscopeError):
    """A resize would leave a cluster with fewer than one representative."""


# facets and geometry
class MissingContributionData(ConvscopeError):
    """Contribution scores were requested but the snapshot has none."""


class MissingFacetData(ConvscopeError):
    """The requested edge facet has no backing table in the snapshot."""


class MissingPosition(ConvscopeError):
    """Bundle geometry was asked for a cluster without a placed node."""


class InsufficientArea(ConvscopeError):
    """Bounds are too small for the demanded leaf areas."""


class TooManyRows(ConvscopeError):
    """Exact seriation was asked for more rows than the DP limit allows."""
