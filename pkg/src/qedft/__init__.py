"""Quantum-enhanced lattice DFT for Fermi-Hubbard models.

Exchange-correlation functionals are built from emulated-VQE or
exact-diagonalization energies of small homogeneous lattices (or imported
from files, e.g. quantum-hardware data) and applied inside a self-consistent
Kohn-Sham loop on large inhomogeneous lattices.
"""

from .exact import SpectrumResult, ed_filling_scan, ed_ground_state, sz_split
from .functional import (
    FillingCurve,
    XcFunctional,
    balda_beta,
    balda_functional,
    balda_homogeneous_energy,
    build_functional,
    differentiate_xc,
    functional_error_norm,
    functional_from_scan,
    hf_functional,
    hf_reference_curve,
    load_functional,
    pseudo_functional,
    qelda_curve,
    save_functional,
    xc_curve,
)
from .hamiltonian import (
    HubbardModel,
    PauliHamiltonian,
    SectorBasis,
    assemble_sector_matrix,
    build_sector_basis,
    dimer_compressed_hamiltonian,
    jordan_wigner_encode,
)
from .ksdft import DftResult, KsConfig, scf_solve
from .lattice import (
    Composite,
    Disorder,
    ExternalPotential,
    Impurity,
    NoPotential,
    Quadratic,
    SiteGraph,
    build_lattice,
    build_potential,
    chain,
    grid,
)
from .vqe import (
    AnsatzSpec,
    OptimizerConfig,
    VqeResult,
    apply_ansatz,
    build_ansatz,
    energy_and_gradient,
    prepare_initial_state,
    vqe_filling_scan,
    vqe_minimize,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "SiteGraph", "ExternalPotential", "chain", "grid", "build_lattice", "build_potential",
    "NoPotential", "Quadratic", "Impurity", "Disorder", "Composite",
    "HubbardModel", "SectorBasis", "PauliHamiltonian", "build_sector_basis",
    "assemble_sector_matrix", "jordan_wigner_encode", "dimer_compressed_hamiltonian",
    "SpectrumResult", "ed_ground_state", "ed_filling_scan", "sz_split",
    "AnsatzSpec", "OptimizerConfig", "VqeResult", "build_ansatz", "prepare_initial_state",
    "apply_ansatz", "energy_and_gradient", "vqe_minimize", "vqe_filling_scan",
    "FillingCurve", "XcFunctional", "qelda_curve", "hf_reference_curve", "xc_curve",
    "differentiate_xc", "build_functional", "functional_from_scan", "hf_functional",
    "pseudo_functional", "balda_functional", "balda_beta", "balda_homogeneous_energy",
    "save_functional", "load_functional", "functional_error_norm",
    "KsConfig", "DftResult", "scf_solve",
]
