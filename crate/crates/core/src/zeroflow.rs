//! Zero-curvature integration in the base coordinate: the Killing-field flow `dξ + [α(ξ), ξ] = 0`,
//! extended frames `dF = Fα`, Sym companions `dG = Gα + Fβ`, monodromy, and residual checks
//! of the Pinkall–Sterling relations.

mod grid;
mod integrate;
mod residuals;

pub use grid::{sweep, PathOrder, Step, ZGrid};
pub use integrate::{
    integrate_companion_cmc, integrate_companion_kdv, integrate_frame, integrate_pkf, integrate_pkf_cmc, integrate_pkf_kdv,
    monodromy, monodromy_with_steps, transport, CompanionField, FlowOptions, FrameGrid, PkfField,
};
pub use residuals::{minimal_degree_witness, ps_residuals_cmc, ps_residuals_kdv, DegreeVerdict, PsReport};
