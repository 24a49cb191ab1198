//! Group averaging over Følner windows and the invariant constructions built on it.
//!
//! Finite groups are enumerated exactly. Infinite amenable groups (`Z`, `Z^d`,
//! the discrete Heisenberg group, finitary permutations) are handled through
//! explicit Følner windows. On top of the averaging primitives sit orbitopes,
//! invariant kernels, invariant couplings, invariant tests and cocycle
//! symmetrization, all solved with the dense simplex in [`lp`].

pub mod actions;
pub mod averaging;
pub mod cocycles;
pub mod couplings;
pub mod decisions;
pub mod embeddings;
pub mod error;
pub mod groups;
pub mod linalg;
pub mod lp;
pub mod orbitopes;
pub mod verify;

pub use actions::{Action, LinearAction, Mode, PointAction};
pub use error::{Error, Result};
pub use groups::{folner_ratio, make_group, Element, FolnerFamily, Group, GroupKind, GroupSpec, Perm};
pub use linalg::Matrix;
pub use lp::{HalfspaceSystem, LinearProgram, LpSolution, LpStatus, Tolerances};
