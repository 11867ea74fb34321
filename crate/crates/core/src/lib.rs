//! Twisting weights on Khovanov-style cubes of resolutions, and the
//! chain isomorphisms they induce between complexes built from a Frobenius
//! algebra and its twists.

pub mod cube;
pub mod diagram;
pub mod frobenius;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod weights;

pub use diagram::{parse_pd, Circle, Crossing, DiagramError, EdgeId, LinkDiagram, Resolution, Saddle, SaddleKind, State};
pub use frobenius::{AlgebraElement, AlgebraError, FrobeniusAlgebra};
pub use linalg::IntMatrix;
pub use weights::{
    check_weight, compatible_pair, construct, construct_connected, transfer, transfer_back, TwistingWeight,
    PartialAssignment, Violation, ViolationKind, ViolationReport, WeightError,
};
pub use oracle::{oracle_solve, oracle_solve_with_cap, OracleError, DEFAULT_ORACLE_CAP};
pub use cube::{
    assemble_complex, build_cube, build_theta_iso, complex_of, homology_snf, non_commuting_faces, theta_inverse,
    theta_map, verify_chain_map, verify_iso, ChainComplex, ChainMap, CubeError, CubeOfModules, HomologyGroup,
};
