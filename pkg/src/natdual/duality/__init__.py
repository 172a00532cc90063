"""Alter egos, dual spaces and the test-spaces pipeline."""

from .egos import brute_force_alter_ego
from .functors import (
    dual_space,
    eval_functor,
    functor_on_morphism,
    natural_evaluation,
    structure_evaluation,
)
from .lattice import SubstructureLattice, dual_min_gen_set, y_substructure_lattice
from .structures import (
    AlterEgo,
    FiniteStructure,
    StructMorphism,
    check_compatibility,
    enumerate_struct_morphisms,
    power_structure,
    substructure_closure,
)
from .tsm import (
    SearchExhausted,
    TSConfiguration,
    TSHint,
    TSMResult,
    search_ts_configuration,
    test_spaces_method,
    verify_ts_configuration,
)
