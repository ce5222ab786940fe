//! Exact enumeration and classification of elementary subalgebras of matrix
//! Lie algebras over finite fields, and of the elementary abelian
//! `p`-subgroups they correspond to under the truncated exponential.

pub mod bridge;
pub mod evariety;
pub mod field;
pub mod liealg;
pub mod matrix;
pub mod orbits;
pub mod poly;
pub mod springer;
pub mod subspace;

pub use bridge::{bridge_backward, bridge_forward, fq_closure, is_fq_linear, subgroup_from_generators, ElemAbelianSubgroup};
pub use evariety::{enumerate_naive, enumerate_seeded, Budget, PointSet};
pub use field::{FieldCtx, FieldElem};
pub use liealg::{AmbientAlgebra, ElemSubalgebra, Family, Partition};
pub use matrix::Matrix;
pub use orbits::{census, gl_generators, orbit_partition, GroupGenerators, MergeProbe, OrbitCensus, OrbitRecord};
pub use poly::{lagrange_fit, RationalPoly};
pub use springer::{springer_identity_suite, ExpLog, SpringerMap};
pub use subspace::{KeyCodec, PackedKey, Subspace};
