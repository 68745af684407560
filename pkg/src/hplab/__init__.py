"""Desk-scale laboratory for powers of Hamiltonian cycles in dense graphs
augmented by sparse random edges: exact searches and oracles, extremal
constructions, the constructive absorption pipeline, probability-bound
calculators, and Monte Carlo threshold experiments."""

from .graphs import (
    Graph,
    PowerSeq,
    check_neighborhood_degrees,
    complete_graph,
    cycle_graph,
    is_clique,
    is_power_seq,
    joint_neighborhood,
    min_degree,
    path_graph,
    power,
    read_edge_list,
    write_edge_list,
)
from .constructions import (
    ExtremalSpec,
    blowup_kminus,
    dense_host,
    extremal_graph,
    extremal_layout,
    pminus,
    pminus_coloring,
)
from .augment import (
    AugmentedGraph,
    RandomPart,
    check_random_properties,
    sample_gnp,
    subseed,
    union,
)
from .search import (
    CycleCertificate,
    SearchBudget,
    brute_force_oracle,
    find_power_ham_cycle,
    find_power_path,
    max_disjoint_cliques,
    verify_certificate,
)
from .absorption import (
    Absorber,
    AbsorbingPath,
    PipelineParams,
    absorb,
    assemble,
    build_absorber_graph,
    build_absorbing_path,
    build_reservoir,
    connect,
    connect_through_reservoir,
    cover,
    enumerate_kwalks,
    select_absorber_family,
)
from .bounds import (
    chernoff_hypergeometric,
    janson_forest_bound,
    janson_generic_bound,
    union_bound,
)
from .experiments import (
    ExperimentConfig,
    RunRecord,
    emit_report,
    estimate_success,
    pipeline_preset,
    run_trial,
    threshold_bisect,
)

__version__ = "0.1.0"
