pub mod asymptotics;
pub mod bounds;
pub mod closed_forms;
pub mod curvature;
pub mod density;
pub mod entropy;
pub mod error;
pub mod fokker_planck;
pub mod model;
pub mod report;
pub mod sde;
pub mod semigroup;
pub mod stencil;
pub mod testfn;
