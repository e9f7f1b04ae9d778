"""Kochen-Specker sets, pre/post-selection, and weak values at desk scale."""

from contextua.pauli import (
    PauliObservable,
    PhasedProduct,
    parse_pauli,
    multiply,
    commutation_sign,
    id_sign,
    conjugate_stabilizer,
)
from contextua.stabilizer import StabilizerProjector, Basis, eigenbasis, enumerate_complete_bases
from contextua.ksverify import (
    ObservableKsSet,
    ProjectorKsSet,
    KsCertificate,
    catalog,
    verify_observable_ks,
    verify_projector_ks,
    complete_substabilizers,
)
from contextua.ppsengine import (
    PpsPair,
    TruthAssignment,
    WeakValueReport,
    weak_value,
    abl_probability,
    propagate,
    detect_pigeonhole,
    nonks_pigeonhole,
)
from contextua.orbit import (
    AbstractKsStructure,
    OrbitGraph,
    uv_coefficient,
    build_orbits,
    solve_orbit_weak_values,
    detect_zero_orbits,
    wheel_closed_forms,
    sign_product_check,
)
from contextua.oracle import DenseState, oracle_weak_value, oracle_abl, sequential_measure
from contextua.meanking import KingWitness, king_witness, povm_integrality, search_pps

__version__ = "0.1.0"
