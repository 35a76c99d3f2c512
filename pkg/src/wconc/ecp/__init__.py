"""Concentration protocol: states, stages, closed forms, exact trees and ensembles."""
from .closed_form import (
    MAX_ROUNDS,
    ProbabilityTable,
    balanced_alpha,
    chain_totals,
    closed_form,
    round_probabilities,
    step1_probabilities,
    step2_probabilities,
)
from .ensemble import (
    EnsembleRun,
    ResourcePool,
    RoundLedger,
    chain_estimate,
    run_ensemble,
    simulate,
)
from .protocol import Branch, Fate, GenerationMismatch, fate_probabilities, recycle_round, step1, step2
from .states import (
    Resource,
    WParams,
    generation_coefficients,
    generation_form,
    make_w_input,
    random_wparams,
    three_photon_form,
    two_photon_form,
    w_plus,
)
from .tree import exact_table
