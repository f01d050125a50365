"""Constitutive models and strain-displacement operators."""
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Material:
    """Linear constitutive law.

    ``kind`` is ``"scalar"`` (diffusion, one dof per node, gradient as the
    "strain") or ``"plane_strain"`` (two dofs per node, engineering strain
    ``[exx, eyy, gxy]``).
    """

    kind: str = "scalar"
    conductivity: float = 1.0
    young: float = 1.0
    poisson: float = 0.3
    D: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "scalar":
            if not self.conductivity > 0:
                raise ValueError("conductivity must be positive")
            D = self.conductivity * np.eye(2)
        elif self.kind == "plane_strain":
            E, nu = self.young, self.poisson
            if not E > 0 or not 0 <= nu < 0.5:
                raise ValueError("need E > 0 and 0 <= nu < 0.5")
            c = E / ((1 + nu) * (1 - 2 * nu))
            D = c * np.array([[1 - nu, nu, 0.0],
                              [nu, 1 - nu, 0.0],
                              [0.0, 0.0, (1 - 2 * nu) / 2]])
        else:
            raise ValueError(f"unknown material kind {self.kind!r}")
        D.setflags(write=False)
        object.__setattr__(self, "D", D)

    @classmethod
    def scalar(cls, k=1.0):
        return cls("scalar", conductivity=k)

    @classmethod
    def plane_strain(cls, E=1.0, nu=0.3):
        return cls("plane_strain", young=E, poisson=nu)

    @property
    def dofs_per_node(self):
        return 1 if self.kind == "scalar" else 2

    @property
    def n_strain(self):
        return 2 if self.kind == "scalar" else 3

    @property
    def key(self):
        return (self.kind, self.conductivity, self.young, self.poisson)


def strain_matrix(dN, dofs_per_node):
    """Strain-displacement matrix from shape gradients.

    Parameters
    ----------
    dN : (n, 2) array
        Columns are d/dx and d/dy of the n shape functions.
    dofs_per_node : int
        1 (scalar) or 2 (plane strain).
    """
    dN = np.asarray(dN, dtype=float)
    n = dN.shape[0]
    if dofs_per_node == 1:
        return dN.T.copy()
    B = np.zeros((3, 2 * n))
    B[0, 0::2] = dN[:, 0]
    B[1, 1::2] = dN[:, 1]
    B[2, 0::2] = dN[:, 1]
    B[2, 1::2] = dN[:, 0]
    return B


def expand_shape(N, dofs_per_node):
    """Shape value row(s) -> interpolation matrix of shape (d, n*d)."""
    N = np.asarray(N, dtype=float)
    if dofs_per_node == 1:
        return N[None, :]
    M = np.zeros((2, 2 * N.size))
    M[0, 0::2] = N
    M[1, 1::2] = N
    return M
