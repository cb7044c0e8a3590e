//! Ground states of `E[u] = (1/2)\int |u'|^2 - (beta/p)\int |u|^p` at fixed
//! mass, on the line and on the torus, and the tools built on them.

mod distance;
mod energy;
mod gns;
mod line;
mod minimize;
mod scaling;
mod soliton;
mod unfold;

pub use distance::{soliton_distance, SolitonDistance, SolitonManifold};
pub use energy::{Domain, EnergyFunctional};
pub use gns::{
    critical_mass_n0, critical_mass_n0_quartic_form, gns_constant, gns_ratio, gns_torus_check, GnsEstimate,
    TorusGnsCheck, GNS6_CRITICAL,
};
pub use line::LineGrid;
pub use minimize::{minimize_a, minimize_b, MinimizationResult, SolverOptions};
pub use scaling::{scaling_transport, Transport};
pub use soliton::{ground_state_energy, soliton_closed_form, ClosedForm, SolitonProfile};
pub use unfold::{unfold_periodic, LineField};
