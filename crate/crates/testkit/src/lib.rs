//! Seeded generators and brute-force oracles behind the property suites:
//! random networks, AC-feasible points built by construction, grid checks of
//! envelope containment and exact tiny LPs for comparing trilinear
//! relaxations.

pub mod criteria;
mod feasible;
mod network;
mod oracle;
mod plane;

pub use feasible::{gen_feasible_point, FEASIBLE_RETRIES};
pub use network::{gen_network, RandomNetworkSpec, Topology};
pub use oracle::{envelope_oracle, random_trilinear_box, trilinear_envelope, trilinear_range, OracleKind, TrilinearBox};
pub use plane::{t_range, HalfPlane};
