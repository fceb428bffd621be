"""Representation theory of finite regular left duo monoids over F_p."""
from .errors import DuorepError
from .monoid import (
    AxiomReport,
    FiniteMonoid,
    GreenStructure,
    MaximalSubgroup,
    SupportLattice,
    check_axioms,
    conjugate_idempotent,
    contraction,
    dagger,
    green_structure,
    maximal_subgroup,
    omega_power,
    read_table,
    support_lattice,
    write_table,
)
from .hsiao import (
    Character,
    FiniteAbelianGroup,
    OrderedSetPartition,
    build_group_zmod,
    build_hsiao,
    build_sigma_n,
    dual_group,
    fubini,
    splitting_prime,
    tits_product,
)

__version__ = "0.1.0"
