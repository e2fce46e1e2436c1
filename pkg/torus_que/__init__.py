"""
Torus QUE - Quantized Kronecker and perturbed Kronecker maps on the 2-torus

Weyl-Heisenberg operators on C^N, exact eigenbases of the quantized
translations, diophantine tools and the experiments that measure how fast
eigenfunction matrix elements converge to the phase-space mean.
"""

__version__ = "0.3.0"
