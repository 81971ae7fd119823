__all__ = ["PAULI_TYPES"]

import numpy as np

PAULI_TYPES = {

    "I": {
        "matrix": np.eye(2, dtype=complex),
        "anticommutes": "",  # Single-qubit Paulis this one anticommutes with
    },

    "X": {
        "matrix": np.array([[0, 1], [1, 0]], dtype=complex),
        "anticommutes": "YZ",
    },

    "Y": {
        "matrix": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "anticommutes": "XZ",
    },

    "Z": {
        "matrix": np.array([[1, 0], [0, -1]], dtype=complex),
        "anticommutes": "XY",
    },

}
