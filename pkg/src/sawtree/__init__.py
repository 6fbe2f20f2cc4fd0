"""Biased random walks on self-avoiding-walk trees and related trees.

Subpackages by topic:

- :mod:`sawtree.lattice`: points, domains and adjacency on Z^2
- :mod:`sawtree.saw_tree`: self-avoiding walks and their lazily built trees
- :mod:`sawtree.gallery`: spherically symmetric examples, join, graft, periodic closure
- :mod:`sawtree.conductance`: truncated conductance, certified intervals, Monte Carlo
- :mod:`sawtree.walks`: the biased walk, limit-walk samplers, line statistics
- :mod:`sawtree.combinatorics`: walk, bridge and irreducible-bridge counts, Kesten sampling
- :mod:`sawtree.experiments`: reproducible recipes behind the ``sawtree`` CLI
"""

__version__ = "0.1.0"
