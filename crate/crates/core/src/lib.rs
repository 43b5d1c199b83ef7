//! Orthogonal pairs of Cartan subalgebras, mutually unbiased bases and
//! complex Hadamard matrices: construction, verification, invariants,
//! tangent dimensions and numerical continuation of the moduli.

pub mod config;
pub mod continuation;
pub mod formats;
pub mod invariants;
pub mod linalg;
pub mod relations;
pub mod tangent;

pub use config::{
    from_hadamard, is_complex_hadamard, standard_pair, to_hadamard, HadamardPoint, PairConfiguration, ProjectorSystem,
};
pub use continuation::{newton_correct, sample_family, tangent_frame, trace_path, ContinuationOptions};
pub use invariants::{identity_check, membership_test, solve_complement, u_invariants, InvariantVector};
pub use linalg::{numerical_rank, CMatrix, Complex64, ComplexMatrix, DoubleDouble, RankReport, Real};
pub use relations::{restrict, restrict_bipartite, AlgebraRepPoint, LooplessGraph};
pub use tangent::{dephased_defect, fiber_rank_check, moduli_tangent_dim, TangentReport};
