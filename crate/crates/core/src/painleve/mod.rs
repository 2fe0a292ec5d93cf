//! The r-equation of the double scaling limit and its PIII form.

mod bvp;
mod series;
mod solution;

pub use series::{r_from_first_integral, LargeSeries, LocalSeries, SeriesValue};
pub use solution::{
    boundary_point, integrate_piii, integrate_r, taylor_start, PainleveParams, PainleveSolution,
    PiiiSolution, RState, S0,
};
