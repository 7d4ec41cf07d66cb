"""Exception types shared across the toolkit."""


class MimicryError(Exception):
    """Base class for all toolkit errors."""


# --- lexing / abstraction ---------------------------------------------------

class UnterminatedLiteral(MimicryError):
    """A string/char literal or block comment reaches end of input or line."""


class InvalidCharacter(MimicryError):
    """A character that starts no legal token."""


class IndexOutOfRange(MimicryError):
    """A token index outside the sequence passed to a windowing call."""


# --- mutation ---------------------------------------------------------------

class SpanMismatch(MimicryError):
    """Abstraction and mask-site token indices disagree."""


# --- predictors -------------------------------------------------------------

class NoMaskToken(MimicryError):
    """The masked sequence contains no ``<mask>`` token."""


class MultipleMaskTokens(MimicryError):
    """The masked sequence contains more than one ``<mask>`` token."""


class PredictorUnavailable(MimicryError):
    """Remote predictor unreachable after retry."""


class MalformedResponse(MimicryError):
    """Remote predictor answered outside the wire schema."""


# --- harness ----------------------------------------------------------------

class FileMissing(MimicryError):
    """Mutant references a file absent from the workspace."""


class CloneDirty(MimicryError):
    """Workspace content does not match the pristine project sources."""


class ParserFailure(MimicryError):
    """No test identifiers extractable from a failing run."""


# --- semantics --------------------------------------------------------------

class EmptyPoV(MimicryError):
    """Vulnerability record with an empty failing-test set."""


# --- embedding --------------------------------------------------------------

class EmptyCorpus(MimicryError):
    """Vocabulary construction over an empty corpus."""


class SequenceTooLong(MimicryError):
    """Sequence exceeds the model's configured maximum length."""


class NonFiniteLoss(MimicryError):
    """Training loss became NaN or infinite."""


# --- classifier -------------------------------------------------------------

class DegenerateDataset(MimicryError):
    """Single-class training data without allow_degenerate."""


class DimensionMismatch(MimicryError):
    """Feature vector length differs from the training dimension."""


class LengthMismatch(MimicryError):
    """Prediction and truth lists differ in length."""


class TooFewGroups(MimicryError):
    """Fewer distinct groups than requested folds."""


# --- cli --------------------------------------------------------------------

class ConfigInvalid(MimicryError):
    """Run configuration fails validation."""


class MissingUpstreamArtifact(MimicryError):
    """A stage input produced by an earlier stage is absent."""
