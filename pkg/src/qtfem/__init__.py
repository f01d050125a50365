"""Finite elements on quadtree meshes with hanging nodes.

Four treatments of cells with hanging nodes are provided: transition
elements (``fem``), Laplace-interpolant polygons (``pfem``), cell-based
strain smoothing with one or n subcells (``nsfem1``, ``nsfemn``) and scaled
boundary polygons (``sbfem``).
"""
import logging

from .kernels import BACKEND
from .material import Material
from .mesh import Domain, QuadtreeMesh, build_quadtree, balance_two_to_one, generate_mesh
from .solver import (apply_dirichlet, assemble, l2_error, make_treatment, run_patch_test,
                     run_poisson_convergence, solve)

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = ["BACKEND", "Material", "Domain", "QuadtreeMesh", "build_quadtree",
           "balance_two_to_one", "generate_mesh", "assemble", "apply_dirichlet", "solve",
           "l2_error", "make_treatment", "run_patch_test", "run_poisson_convergence"]
__version__ = "0.1.0"
