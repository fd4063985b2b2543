"""Post-call field review: n-best transcript correction, extraction, and
auto-approval with a human-in-the-loop queue."""

__version__ = "0.1.0"

from .core import (
    CallTranscript,
    Criticality,
    FieldRecord,
    FieldSpec,
    NOT_PROVIDED,
    ReviewDecision,
    Speaker,
    Strategy,
    Utterance,
    Verdict,
    normalized_edit_distance,
    validate_call,
)
from .fields import standard_field_specs

__all__ = [
    "CallTranscript",
    "Criticality",
    "FieldRecord",
    "FieldSpec",
    "NOT_PROVIDED",
    "ReviewDecision",
    "Speaker",
    "Strategy",
    "Utterance",
    "Verdict",
    "normalized_edit_distance",
    "validate_call",
    "standard_field_specs",
    "__version__",
]
