"""Frozen reference values for the closed-form horoconvex evaluators.

Each entry is ``(N, D, value)`` with the value as a 50-significant-digit
string, produced once by :mod:`gapforge.oracles` at 120-digit working
precision and then frozen.  ``C_N = 1`` for the explicit bound.
"""

EXPLICIT = [
    (3, 1, "3.8719235407112877540916772062244018369256342476325e-2529"),
    (2, 0.5, "4.8209646231136756409788504015990822097865660848492e-524"),
    (2, 2, "3.2404218649139671820176765553605529388429830609717e-37134"),
    (5, 1, "1.5713037088948707308066323327776343640314701023785e-5048"),
    (10, 8, "4.5926315420614446801291389523838596784025757599026e-372071049238541"),
]

ASYMPTOTIC = [
    (3, 12.0, "4.8719774152536873249232007841537448927243765139256e-351052380024355921505042"),
    (2, 1.0, "4.7106300021910561836838403129928822451043425462833e-109"),
    (4, 20.0, "1.3086243734468563438100952807337325849402368836437e-115500562936883484158425268235408677667"),
    (10, 3.0, "8.0770125094203331252464306257093887859245705752389e-22958257"),
]
