//! Low-complexity designs: weighted beamforming directions, power
//! allocation with uniform or per-user power splitting, the weight
//! searches, and the baseline directions used for comparison.

mod directions;
mod energy;
mod pa;
mod search;

pub use directions::{
    baseline_directions, combine, mrt_directions, proposed_directions, svd_energy_direction, weight_grid,
    weighted_direction, zf_directions, BaselineKind, ProposedDirections, WeightProvenance, WeightedDirections,
};
pub use energy::{energy_only, maxmin_powers, EnergyScheme};
pub use pa::{solve_dps, solve_dps_from, solve_ups, MMatrix, PsSolution};
pub use search::{design_for, dwa_search, solve_ps, sweep_order, uwa_search, PsMode, SearchOutcome};
