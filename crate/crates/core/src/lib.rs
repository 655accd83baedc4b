//! Uncertainty measures for a quantum particle on the circle and on the
//! two-sphere.
//!
//! On the sphere the azimuthal coordinate is only defined modulo `2π`, so its
//! variance depends on where the integration window is placed. This crate
//! locates packet centers from the fixed-point condition on the windowed
//! mean, evaluates the centred azimuthal variance together with the `θ`
//! variance, and checks uncertainty relations built from Gram–Robertson
//! matrices of first-order differential operators.
//!
//! Everything is generic over the floating-point type through [`Real`]; the
//! aliases below fix it to `f64` or `f32`.
//!
//! ```
//! use sphereum::{centered_phi_variance, make_cs_state, GridSpec64, StateParams};
//! use std::f64::consts::{FRAC_PI_2, PI};
//!
//! let spec = GridSpec64::default();
//! let cs = make_cs_state(&StateParams::coherent(PI, FRAC_PI_2, 1.0), &spec).unwrap();
//! let v = centered_phi_variance(&cs, &spec).unwrap();
//! assert!((v - 1.567).abs() < 1e-3);
//! ```

pub mod circle;
pub mod error;
pub mod measures;
pub mod operators;
pub mod quadrature;
pub mod scalar;
pub mod states;
pub mod uncertainty;

pub use circle::{
    centroid_measure, circle_measures, kr_measures, make_circle_reference_states,
    momentum_variance, trig_uncertainty, trig_variances, CircleMeasureSet, TrigMoments,
};
pub use error::{Error, Result};
pub use measures::{
    centered_phi_variance, combined_measures, find_packet_centers, moment_phi,
    scanned_min_variance, stereo_second_moments, theta_variance, variance_phi_at, MeasureSet,
    PacketCenter, PacketCenterResult, PhiMarginal,
};
pub use operators::{
    apply, generalized_cov, operator_variance, symmetry_defect, AppliedState, DiffOperator,
    GeneralizedCov, Observable,
};
pub use quadrature::{ConvergenceResult, ConvergenceStatus, Estimate, GridSpec};
pub use scalar::Real;
pub use states::{
    make_cs_state, make_f_state, make_reference_states, most_delocalized_state, uniform_state,
    CircleState, Normalize, SphereState, StateParams,
};
pub use uncertainty::{
    best_complementary_study, characteristic_coefficients, check_schrodinger_ur, gram_matrix,
    ComplementaryStudy, GramReport, SchrodingerCheck, Verdict,
};

pub type GridSpec64 = GridSpec<f64>;
pub type GridSpec32 = GridSpec<f32>;
pub type SphereState64 = SphereState<f64>;
pub type SphereState32 = SphereState<f32>;
pub type CircleState64 = CircleState<f64>;
pub type CircleState32 = CircleState<f32>;
pub type StateParams64 = StateParams<f64>;
pub type DiffOperator64 = DiffOperator<f64>;
pub type Observable64 = Observable<f64>;
pub type MeasureSet64 = MeasureSet<f64>;
pub type GramReport64 = GramReport<f64>;
