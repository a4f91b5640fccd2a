"""Loewner curves from driving functions by composing explicit slit maps.

Modules: ``driver`` (sampled driving functions), ``slitmap`` (single-step
maps), ``zipper`` (composition into curves), ``odesolver`` (direct ODE
integration used as an independent oracle), ``diagnostics`` (checks and
convergence studies), ``output`` and ``cli``.
"""
__version__ = "0.1.0"
