"""Contextuality toolkit: scenarios, classical bounds, sheaf tables, quantum
realisations, pre- and post-selection and ontological models."""

__version__ = "0.1.0"

from .errors import CtxError, SolverError, UnknownResource, ValidationError
from .scenario import Scenario, bell_scenario, exclusivity_graph, foulis_randall_product, new_scenario
from .models import ProbModel, enumerate_deterministic, is_classical, is_no_signaling, validate_model
from .graph_invariants import WeightedGraph, csw_report, independence_number, lovasz_theta
from .sheaf import EmpiricalTable, Level, PossibilityTable, build_table, classify, has_global_distribution
from .quantum_kernel import Ket, HermitianOp, POVM, PVM, born_probability, cabello18, kcbs_realization
from .pps_weak import PPSExperiment, abl_distribution, is_logical_pps_paradox, weak_value
from .ontomodels import OntologicalModel, kunjwal_spekkens_bound, predict, prep_contextuality_infeasible

__all__ = [
    "__version__",
    "CtxError", "SolverError", "UnknownResource", "ValidationError",
    "Scenario", "bell_scenario", "exclusivity_graph", "foulis_randall_product", "new_scenario",
    "ProbModel", "enumerate_deterministic", "is_classical", "is_no_signaling", "validate_model",
    "WeightedGraph", "csw_report", "independence_number", "lovasz_theta",
    "EmpiricalTable", "Level", "PossibilityTable", "build_table", "classify", "has_global_distribution",
    "Ket", "HermitianOp", "POVM", "PVM", "born_probability", "cabello18", "kcbs_realization",
    "PPSExperiment", "abl_distribution", "is_logical_pps_paradox", "weak_value",
    "OntologicalModel", "kunjwal_spekkens_bound", "predict", "prep_contextuality_infeasible",
]
