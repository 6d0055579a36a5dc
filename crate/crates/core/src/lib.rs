//! Cl(3) space algebra, a nonlinear Dirac evolution on periodic grids and
//! hydrodynamic diagnostics of the resulting fields.

pub mod clifford;
pub mod spinor;
pub mod evolution;
pub mod hydro;
pub mod io;
