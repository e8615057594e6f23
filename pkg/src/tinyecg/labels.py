"""Beat class vocabulary and the AAMI annotation-symbol grouping.

Four classes are kept for classification; everything else (paced,
unclassifiable, non-beat annotations) collapses to ``OTHER`` and is
dropped before windowing.
"""

from __future__ import annotations

# Fixed class order; model outputs and confusion matrices follow it.
CLASSES = ("N", "S", "V", "F")
OTHER = "OTHER"

LABEL_INDEX = {c: i for i, c in enumerate(CLASSES)}

# MIT-BIH annotation symbols grouped per the AAMI recommended practice:
#   N: normal, bundle branch block, atrial/nodal escape
#   S: supraventricular ectopic
#   V: ventricular ectopic
#   F: fusion of ventricular and normal
AAMI_GROUPS = {
    "N": frozenset("NLRej"),
    "S": frozenset("AaJS"),
    "V": frozenset("VE"),
    "F": frozenset("F"),
}

_SYMBOL_TO_CLASS = {sym: cls for cls, syms in AAMI_GROUPS.items() for sym in syms}


def aami_class(symbol: str) -> str:
    """Map a raw annotation symbol to N/S/V/F, or OTHER if outside the four."""
    return _SYMBOL_TO_CLASS.get(symbol, OTHER)
