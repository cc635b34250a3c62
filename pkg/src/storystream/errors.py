"""Exception types shared across the package."""


class StoryStreamError(Exception):
    """Base class for every error raised by storystream."""


# --- embedding ---

class EmptyTextError(StoryStreamError):
    """Text produced no tokens after normalization."""


class BadDimensionError(StoryStreamError):
    """Requested vector dimension is below the minimum of 2."""


class ParseError(StoryStreamError):
    """A line of an input file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DimensionMismatchError(StoryStreamError):
    """Vector dimensions disagree with each other or with the configured d."""


class DuplicateIdError(StoryStreamError):
    """The same article id appeared twice in a vector file."""


# --- similarity graph ---

class ZeroVectorError(StoryStreamError):
    """Cosine similarity is undefined for a zero-norm vector."""


class DuplicateNodeError(StoryStreamError):
    """Node id already present in the graph."""


class UnknownNodeError(StoryStreamError):
    """Node id not present in the graph."""


# --- community detection ---

class PartitionMismatchError(StoryStreamError):
    """Partition does not cover exactly the expected node set."""


class EmptyGraphError(StoryStreamError):
    """Community detection needs at least one node."""


# --- inching window ---

class OutOfOrderError(StoryStreamError):
    """Article timestamp fell behind the high-water mark minus lateness."""


class DuplicateArticleError(StoryStreamError):
    """Article id is already live in the window."""


class NotInInchingPhaseError(StoryStreamError):
    """slide() is only valid once the first window has been clustered."""


class EmptyWindowError(StoryStreamError):
    """flush() needs at least one live article."""


# --- story network ---

class UnknownStoryError(StoryStreamError):
    """Story id does not resolve to a live story."""


class EmptyTopicError(StoryStreamError):
    """A topic with no members cannot become a story."""


class MissingVectorError(StoryStreamError):
    """An article's vector is no longer retained, so it cannot be moved."""


class NotAMemberError(StoryStreamError):
    """Article does not belong to the story it is being migrated from."""


# --- evaluation ---

class IdSetMismatchError(StoryStreamError):
    """Predicted and gold labelings cover different article ids."""

    def __init__(self, message, only_pred=(), only_gold=()):
        super().__init__(message)
        self.only_pred = tuple(only_pred)
        self.only_gold = tuple(only_gold)
