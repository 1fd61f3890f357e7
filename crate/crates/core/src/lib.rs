//! Positive and conservative time integration of production–destruction
//! systems with the two-stage MPRK22(alpha) and MPRK22ncs(alpha) schemes,
//! plus the tools to analyse their stability on the 2x2 linear test problem.
//!
//! ```
//! use mprk_core::{mprk22_step, LinearPdsMatrix, SchemeParams, StateVector, Variant};
//!
//! let a = LinearPdsMatrix::from_rows(2, &[-25.0, 25.0, 25.0, -25.0]).unwrap();
//! let params = SchemeParams::new(1.0, Variant::ConservativeStages).unwrap();
//! let y0 = StateVector::new(vec![0.998, 0.002]).unwrap();
//! let step = mprk22_step(&a.production_system(), &y0, 4.0, &params).unwrap();
//! assert!(step.next.is_positive());
//! assert!((step.next.total_mass() - 1.0).abs() < 1e-14);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linear2d;
pub mod mprk;
pub mod pds;
pub mod solve;
pub mod stability;

pub use error::{Error, Result, Substep};
pub use linear2d::{degenerate_amplification, Linear2x2Pds, MapEvaluation};
pub use mprk::{
    integrate, mprk22_step, mprk22_step_linear, IntegrationError, SchemeParams, StepResult,
    Trajectory, Variant,
};
pub use pds::{
    total_mass, validate_linear_pds, FnProduction, LinearPdsMatrix, LinearProduction,
    ProductionSystem, StateVector,
};
pub use stability::{
    boundary_f, classify, critical_time_step, finite_difference_jacobian, raster_region,
    spectral_check, stability_function, stability_r0, stability_r1, RegionRaster, ScaledStepPoint,
    SpectralCheck, StabilityVerdict,
};

pub use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
