"""Tetrad gravity in the language of differential forms, checked numerically.

Modules: ``expr`` (symbolic expressions), ``forms`` (exterior calculus on
sampled jets), ``tetrad`` (frame geometry), ``gravfield`` (field theory),
``energy`` (surface integrals), ``oracle`` (Christoffel cross-check),
``scenario``/``checks``/``cli`` (scenarios and the certification runner).
"""

__version__ = "0.1.0"
