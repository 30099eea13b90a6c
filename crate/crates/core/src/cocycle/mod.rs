//! Circle-to-matrix maps, cocycle products along words and the
//! perturbation families used by the search experiments.

mod file;
mod map;
mod product;
mod trig;

pub use file::{potential_at_energy, CocycleDefinition, CocycleFile, MapSpec, PotentialSpec, FILE_WEIGHT_TOL};
pub use map::{
    make_schrodinger, rescale_diagonal, right_rotate, GroupTag, TrigMatrixMap, CERT_GRID, DET_FLOOR, SL2_DET_TOL,
};
pub use product::{RandomProduct, WEIGHT_SUM_TOL};
pub use trig::{fejer_bump, shift_potential, ScalarPotential, TrigPoly};
