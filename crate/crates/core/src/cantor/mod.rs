//! Parameters whose lines have non-dense `exp∘exp` image.
//!
//! For a parameter interval the construction keeps nested families of
//! subintervals on which the spiral's crossings at levels `k0 < k ≤ nN`
//! stay outside a tiny window on the imaginary axis. Only the
//! `component_cap` widest children of each node are retained, so all
//! dimension figures describe that subset.

mod ball;
mod boxdim;
mod config;
mod mdp;
mod sweep;
mod theta;
mod tree;

pub use ball::{ball_avoidance, forbidden_ball, slope_constant, BallSamples, ForbiddenBall};
pub use boxdim::{box_dimension, middle_thirds, BoxDimension};
pub use config::{
    check_arc, choose_config, choose_config_with, phi_k, psi_k, AxisPoint, CantorConfig,
    Projection, DEFAULT_DYADIC_BITS, DEFAULT_MARGIN,
};
pub use mdp::{mdp_check, middle_thirds_partitions, MdpResult};
pub use theta::{export_theta, theta_avoidance, ThetaCheck};
pub use tree::{build_tree, AvoidanceReport, ComponentTree, Node};
