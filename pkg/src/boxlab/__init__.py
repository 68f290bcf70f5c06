"""boxlab: exact-rational analysis of nonsignaling correlation boxes.

Submodules:
    core          scenarios, boxes, marginals, conditioning, relabeling
    lp            exact simplex with Farkas / dual certificates
    polytope      deterministic strategies, nonsignaling constraint rows
    bell          CHSH, CGLMP, normalization, unique maximizers
    locality      local models, nonlocality certificates, secrecy content
    shareability  symmetric extensions, cloning, monogamy, polygamy
    isotropic     the isotropic family, depolarization, shrinking
    incompat      joint measurability, incompatibility, entropy bounds
    boxio, cli    file formats and the command line front end
"""

from .core import Box, Scenario

__all__ = ["Box", "Scenario"]
__version__ = "0.1.0"
