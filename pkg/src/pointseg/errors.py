"""Exception types shared across the engine."""


class PointsegError(Exception):
    """Base class for all engine errors."""


# --- tensor I/O ---

class BadMagic(PointsegError):
    """File does not start with the NPY v1.0 magic sequence."""


class DtypeMismatch(PointsegError):
    """Tensor element type is not little-endian 32-bit float."""


class NonFinite(PointsegError):
    """Tensor contains NaN or Inf elements."""


class IoFailure(PointsegError):
    """Underlying filesystem write/read failed."""


class MissingFile(PointsegError):
    """Bundle directory is missing a required file."""


class DimMismatch(PointsegError):
    """Shapes of related tensors are inconsistent."""


# --- attention / markov ---

class WeightError(PointsegError):
    """Block weights are all zero."""


class DegenerateRow(PointsegError):
    """A row became all-zero after temperature powering."""


class NoConvergence(PointsegError):
    """IPF hit its iteration cap while far from doubly stochastic."""


class NotDoublyStochastic(PointsegError):
    """Markov iteration requires a doubly stochastic operator."""


class SeedOutOfRange(PointsegError):
    """Seed state index exceeds the operator size."""


# --- scoring / segmenter ---

class NoCandidates(PointsegError):
    """No usable scale candidates (map is constant zero)."""


class EmptyPromptSet(PointsegError):
    """Fusion needs at least one scaled map."""


class OutOfBounds(PointsegError):
    """Prompt point lies outside the image."""


class EmptyHistory(PointsegError):
    """Undo called with no committed clicks."""


# --- evaluator / synth ---

class NoError(PointsegError):
    """Prediction equals ground truth; no click can be placed."""


class SpecInvalid(PointsegError):
    """Synthetic scene spec violates its invariants."""
