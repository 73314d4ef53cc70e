//! Random normed modules over finite atomic probability spaces.
//!
//! The crate models an RN module E = L⁰(F, ℝ^d) with an ℓ_q fiber norm, its
//! random conjugate E*, the Lᵖ(E) spaces, random asymptotically nonexpansive
//! self-maps of a.s. bounded L⁰-convex bodies, the decomposition of such a map
//! into classical asymptotically nonexpansive maps on partition pieces, and a
//! scenario harness that checks the random demiclosedness principle.

pub mod body;
pub mod convexity;
pub mod duality;
pub mod dynamics;
pub mod element;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod measure;
pub mod partition;
pub mod scenario;
pub mod selftest;

pub use body::{BodyShape, ConvexBody};
pub use duality::{HolderPair, RandomFunctional};

pub use dynamics::{AsymptoticMap, EtaSequence, IterationTrace, MapKind, Schedule};
pub use element::{glue, FiberSpec, RNElement};
pub use error::{Error, Result};
pub use exec::Exec;
pub use measure::{AtomicSpace, L0Real, MeasurableSet, Partition};
pub use partition::PieceData;

