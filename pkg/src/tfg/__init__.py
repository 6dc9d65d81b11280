"""Random triangle-free graphs near their chromatic thresholds, and bipartite random 2-SAT.

Submodules:

* ``numerics``: threshold functions and parameter cascades
* ``graphcore``: planted graphs and structural queries
* ``hardcore``: exact hard-core sampling on the product of defect graphs
* ``sampler``: the planted samplers and a rejection oracle
* ``coloring``: chromatic decision procedures
* ``twosat``: bipartite 2-SAT, implication digraphs, spines, cluster laws
* ``coupling``: the per-square coupling of crossing edges and clauses
* ``enumeration``: connected bipartite subgraph counts and cluster-law formulas
* ``branching``: the bipartite Karp exploration process
* ``experiments`` / ``cli``: batch harness and the ``tfg`` command
"""

__version__ = "0.1.0"
