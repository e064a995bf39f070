"""Fixed 12-class label scheme: silence, unknown, then the ten target words.

The order is pinned because checkpoints, the REST service, and the CLI all
exchange class indices.
"""

KEYWORDS = ("yes", "no", "up", "down", "left", "right", "on", "off", "stop", "go")

SILENCE_INDEX = 0
UNKNOWN_INDEX = 1

LABELS = ("silence", "unknown") + KEYWORDS

LABEL_TO_INDEX = {name: i for i, name in enumerate(LABELS)}

N_LABELS = len(LABELS)


def label_name(index: int) -> str:
    return LABELS[index]


def keyword_index(word: str) -> int:
    """Class index for a corpus word: keywords map to 2..11, anything else to unknown."""
    return LABEL_TO_INDEX.get(word, UNKNOWN_INDEX)
