//! Synergy-based spacetime integration measures for small boolean networks.
//!
//! The crate models an n-node binary threshold network as a deterministic
//! transition system, builds the causal chain A -> S -> Z induced by a
//! uniform prior on the past state, and computes:
//!
//! * the IIT4-style irreducibility baseline (`iit4`): intrinsic
//!   informations, causal marginalization across directional cuts, and
//!   phi_c / phi_e / phi_s with a normalized minimum-information-partition
//!   search;
//! * partial-information-decomposition quantities (`pid`): the union
//!   distribution (a convex minimization over marginal-constrained
//!   polytopes), Shannon synergy, and the synergistic intrinsic
//!   difference into a single target state;
//! * the four synergy-based integration measures S1..S4 (`measures`)
//!   together with partition enumeration and MIP search;
//! * table/report assembly for the bundled comparison suites (`report`).

pub mod iit4;
pub mod lp;
pub mod measures;
pub mod netspec;
pub mod partition;
pub mod pid;
pub mod probcore;
pub mod report;

pub use measures::{MeasureKind, MeasureResult, Side};
pub use netspec::{builtin_battery, Gate, NetworkSpec, NodeSpec, TransitionModel};
pub use partition::{CutSet, Partition, PartitionMode};
pub use pid::{PredictorSystem, UnionDistribution};
pub use probcore::{CausalTriple, Epoch, VariableView};
