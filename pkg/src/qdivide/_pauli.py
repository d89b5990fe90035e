"""Pauli basis constants shared by the kernels and the linear-algebra helpers."""

import numpy as np

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# (4, 2, 2): identity followed by sigma_1, sigma_2, sigma_3
SIGMA = np.stack([SIGMA_0, SIGMA_1, SIGMA_2, SIGMA_3])
SIGMA.setflags(write=False)

# Two-qubit products sigma_mu (x) sigma_nu, shape (4, 4, 4, 4)
BASIS4 = np.array([[np.kron(a, b) for b in SIGMA] for a in SIGMA])
BASIS4.setflags(write=False)
