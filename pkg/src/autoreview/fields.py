"""Domain vocabulary shared by the simulator and the parsers.

Holds the phonetic-alphabet table, digit words and their sound-alikes,
filler words stripped from value spans, and the standard field
configurations for benefit-verification calls.
"""
from __future__ import annotations

from importlib import resources

from .core import Criticality, FieldSpec

AGENT_NAME = "AgentName"
REFERENCE_NUMBER = "ReferenceNumber"
GROUP_NUMBER = "GroupNumber"

# Name the conversational AI introduces itself with; never a valid agent name.
BOT_NAME = "ava"

NATO_TABLE: dict[str, str] = {
    "A": "alpha",
    "B": "bravo",
    "C": "charlie",
    "D": "delta",
    "E": "echo",
    "F": "foxtrot",
    "G": "golf",
    "H": "hotel",
    "I": "india",
    "J": "juliett",
    "K": "kilo",
    "L": "lima",
    "M": "mike",
    "N": "november",
    "O": "oscar",
    "P": "papa",
    "Q": "quebec",
    "R": "romeo",
    "S": "sierra",
    "T": "tango",
    "U": "uniform",
    "V": "victor",
    "W": "whiskey",
    "X": "xray",
    "Y": "yankee",
    "Z": "zulu",
}

# Informal code words agents actually use ("n as in nancy", "b for boy").
ALT_CODE_WORDS: dict[str, tuple[str, ...]] = {
    "A": ("apple", "adam"),
    "B": ("boy", "baker"),
    "C": ("cat", "candy"),
    "D": ("david", "dog"),
    "E": ("edward", "easy"),
    "F": ("frank", "fox"),
    "G": ("george", "gold"),
    "H": ("henry", "harry"),
    "I": ("ida", "item"),
    "J": ("john", "jack"),
    "K": ("king", "kite"),
    "L": ("larry", "love"),
    "M": ("mary", "mother"),
    "N": ("nancy", "nora"),
    "O": ("ocean", "olive"),
    "P": ("paul", "peter"),
    "Q": ("queen", "quiet"),
    "R": ("robert", "roger"),
    "S": ("sam", "sugar"),
    "T": ("tom", "thomas"),
    "U": ("uncle", "union"),
    "V": ("victory", "vincent"),
    "W": ("william", "walter"),
    "X": ("xylophone",),
    "Y": ("young", "yellow"),
    "Z": ("zebra",),
}

DIGIT_WORDS: dict[str, str] = {
    "zero": "0",
    "one": "1",
    "two": "2",
    "three": "3",
    "four": "4",
    "five": "5",
    "six": "6",
    "seven": "7",
    "eight": "8",
    "nine": "9",
}

# Sound-alike tokens the recognizer confuses with digits. Only treated as
# digits when they sit next to other spelled-out characters.
DIGIT_HOMOPHONES: dict[str, str] = {
    "oh": "0",
    "o": "0",
    "won": "1",
    "to": "2",
    "too": "2",
    "for": "4",
    "ate": "8",
}

# Words dropped from value spans before assembling candidates.
FILLER_WORDS: frozenset[str] = frozenset(
    """
    a an and the it its thats this that is are was be will would of
    my your their his her our me i you we they am not
    name number group reference ref member id plan policy call date
    yes yeah no sure okay ok alright so um uh hmm well let see please
    thanks thank here go goes give gave said says say share
    correction correct make change changed information available
    spelled spell spelling out with on moment hold sec second just
    can could cannot have has had do did dont got get check
    """.split()
)

# Words that terminate a spelling run and mark the following letter as the
# agent's last-name initial ("... o t t r i c last initial is d").
INITIAL_MARKERS: frozenset[str] = frozenset({"last", "initial", "initials", "first"})

# Connectors recognized inside phonetic phrases: "c as in charlie",
# "c like tango", "b for boy". "is in" covers the common "as in" mishearing.
NATO_CONNECTORS: frozenset[str] = frozenset({"as", "like", "for", "is"})


def standard_field_specs() -> dict[str, FieldSpec]:
    return {
        AGENT_NAME: FieldSpec(
            field_id=AGENT_NAME,
            triggers=(
                "may i have your name",
                "can i get your name",
                "who am i speaking with",
            ),
            format_pattern=r"[A-Z][a-z]+ [A-Z]",
            criticality=Criticality.NON_CRITICAL,
            normalization=("strip", "collapse_ws", "name_title"),
        ),
        REFERENCE_NUMBER: FieldSpec(
            field_id=REFERENCE_NUMBER,
            triggers=(
                "is there a reference number for this call",
                "could i get a reference number",
            ),
            format_pattern=r"[A-Z][a-z]+ [A-Z] \d{8}",
            criticality=Criticality.CRITICAL,
            normalization=("strip", "collapse_ws", "name_title"),
        ),
        GROUP_NUMBER: FieldSpec(
            field_id=GROUP_NUMBER,
            triggers=(
                "what is the member's group number",
                "could you verify the group number",
            ),
            format_pattern=r"[A-Z0-9]{6,10}",
            criticality=Criticality.CRITICAL,
            normalization=("strip", "strip_separators", "upper"),
        ),
    }


def first_names() -> tuple[str, ...]:
    """Bundled first-name list used by the simulator's gold-value generator."""
    text = resources.files("autoreview").joinpath("data/first_names.txt").read_text("utf-8")
    return tuple(line.strip() for line in text.splitlines() if line.strip())
