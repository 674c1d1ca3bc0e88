"""Completely positive maps in arbitrary operator bases.

Superoperators, Choi and GKS matrices, Kraus decompositions, Lindblad
generators and the short-time expansion of open-system dynamics.
"""

from cpkit.bases import OperatorBasis, gellmann_basis, rotated_basis, standard_basis, structure_constants
from cpkit.channels import (
    GksMatrix,
    KrausSet,
    SuperOp,
    check,
    choi,
    choi_inverse,
    gks,
    gks_change_basis,
    gks_inverse,
    kraus_from_gks,
    superop_from_kraus,
    superop_from_map,
)
from cpkit.errors import CPKitError
from cpkit.lindblad import (
    GeneratorMatrix,
    LindbladForm,
    generator_apply,
    generator_to_lindblad,
    integrate_gks,
    lindblad_apply,
    lindblad_to_generator,
)
from cpkit.opensys import OpenSystemModel, expansion, extract_generator, reduced_superop, verify_expansion

__version__ = "0.1.0"
