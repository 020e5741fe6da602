import numpy as np
import pytest
import scipy.sparse as sp

from splitgap.model import coupling_table


def zbasis_hamiltonian(params):
    """Full 2**L chain Hamiltonian built from Kronecker products in the z basis."""
    L = params.L
    sx = sp.csr_matrix([[0.0, 1.0], [1.0, 0.0]])
    sz = sp.csr_matrix([[1.0, 0.0], [0.0, -1.0]])

    def site(o, j):
        m = sp.identity(1, format="csr")
        for k in range(L):
            m = sp.kron(m, o if k == j else sp.identity(2), format="csr")
        return m

    X = [site(sx, j) for j in range(L)]
    Z = [site(sz, j) for j in range(L)]
    f = coupling_table(params)
    H = -sum(Z[j] @ Z[(j + 1) % L] for j in range(L))
    for i in range(L):
        for j in range(L):
            if f[(i - j) % L]:
                H = H + params.lam * f[(i - j) % L] * (X[i] @ X[j])
    return H.toarray()


def zbasis_sector_ground(params):
    """Lowest energies (E_plus, E_minus) of the spin-flip-even and -odd sectors."""
    H = zbasis_hamiltonian(params)
    N = 2**params.L
    idx = np.arange(N)
    flip = idx ^ (N - 1)
    reps = idx[idx < flip]
    out = []
    for s in (1.0, -1.0):
        Q = np.zeros((N, reps.size))
        cols = np.arange(reps.size)
        Q[reps, cols] = 2**-0.5
        Q[flip[reps], cols] += s * 2**-0.5
        out.append(float(np.linalg.eigvalsh(Q.T @ H @ Q)[0]))
    return tuple(out)


@pytest.fixture
def zbasis_oracle():
    return zbasis_sector_ground
