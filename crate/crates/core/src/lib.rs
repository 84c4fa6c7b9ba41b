//! Human-robot collaborative task planning with learned synergies.
//!
//! * [`process`]: process descriptions, plans and synergy tables.
//! * [`milp`]: the mixed-binary LP solver used by the planner.
//! * [`planner`]: scheduling models built on top of [`milp`].
//! * [`learn`]: Bayesian estimation of synergy coefficients.
//! * [`sim`]: discrete-time execution of plans in a shared cell.

pub mod learn;
pub mod milp;
pub mod planner;
pub mod process;
pub mod sim;
