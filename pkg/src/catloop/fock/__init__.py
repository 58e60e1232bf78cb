"""Truncated-Fock-space states, gates, measurements and channels."""
from .basis import (DensityMatrix, FockCutoff, PureState, annihilation,
                    coherent_state, fock_state, gkp_delta, gkp_state,
                    number_op, product_state, quadrature_x, squeezed_cat,
                    squeezed_vacuum, vacuum)
from .channels import loss_channel, loss_kraus_operators
from .gates import (GateMatrix, apply_gate, build_beamsplitter, build_cz,
                    build_displacement, build_rotation, build_squeeze,
                    cz_apply_vec, displacement_unitary, rotation_diag,
                    squeeze_unitary)
from .measure import (homodyne_density_grid, homodyne_project, homodyne_sample,
                      pnr_probabilities, pnr_project, pnr_sample,
                      hermite_wavefunctions)
from .metrics import fidelity, overlap
from .stateio import load_state, save_state
from .wigner import default_grid, wigner, wigner_png, wigner_to_csv

__all__ = [
    "DensityMatrix", "FockCutoff", "GateMatrix", "PureState",
    "annihilation", "apply_gate", "build_beamsplitter", "build_cz",
    "build_displacement", "build_rotation", "build_squeeze", "coherent_state",
    "cz_apply_vec", "default_grid", "displacement_unitary", "fidelity",
    "fock_state", "gkp_delta", "gkp_state", "hermite_wavefunctions",
    "homodyne_density_grid", "homodyne_project", "homodyne_sample",
    "load_state", "loss_channel", "loss_kraus_operators", "number_op",
    "overlap", "pnr_probabilities", "pnr_project", "pnr_sample",
    "product_state", "quadrature_x", "rotation_diag", "save_state",
    "squeeze_unitary", "squeezed_cat", "squeezed_vacuum", "vacuum", "wigner",
    "wigner_png", "wigner_to_csv",
]
