"""
Core module for scompress.

Submodules are imported directly (src.core.concepts, src.core.dimensions,
src.core.schemes, src.core.reductions); the data models import
src.core.errors, so this package stays free of eager imports.
"""
