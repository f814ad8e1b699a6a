//! Finite-resolution constructions approximating separately continuous
//! functions `f: X × Y → G` on products of Cantor spaces by jointly continuous
//! (locally constant) ones, together with exact checkers for every
//! quantitative condition those constructions rely on.

pub mod cantor;
pub mod clopen;
pub mod discrete;
pub mod dyadic;
pub mod error;
pub mod group;
pub mod net;
pub mod sepfun;
pub mod text;
pub mod uniform;
pub mod zerodim;

pub use cantor::{basis_cylinder, partition_at_depth, point_dist, CantorPoint, Cylinder, ProbeGrid};
pub use clopen::{ClopenSet, ClosedSet};
pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use group::{FiniteGroup, GroupElement, GroupSpec};
pub use net::{ball_net, SeparatedNet};
pub use sepfun::{Axis, Compact, PointMap, SepFunction, Side, SubbasicNbhd};
pub use text::parse_function;
pub use uniform::BallSide;
pub use zerodim::{run_zerodim, ZeroDimConfig};
