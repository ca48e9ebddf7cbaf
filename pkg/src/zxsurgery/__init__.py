"""ZX-calculus rewriting and lattice-surgery semantics for the planar surface code."""

from . import rewrite, surfacesim, surgery, tableau, tensorcore, verify, zxgraph, zxio

__all__ = ["rewrite", "surfacesim", "surgery", "tableau", "tensorcore", "verify", "zxgraph", "zxio"]
__version__ = "0.1.0"
