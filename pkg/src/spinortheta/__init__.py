"""Symplectic spinor representations and theta-type generating functions.

The subpackages are organised along the pipeline

    weyl      exact Weyl algebra W_n and the sp(2n) dictionary
    groups    Heisenberg group, metaplectic words, Siegel space actions
    reps      Gaussian and Fock models of the canonical representation
    coherent  coherent families, annihilation data, chain subsets
    theta     lattice theta sums and branched generating functions
    frobenius semisimple structures over flat tori, spectral data
    novikov   Novikov series, spectral numbers, fixed point bounds
    flows     symplectic integration and coincidence detection
    cli       command line entry point
"""

__version__ = "0.1.0"
