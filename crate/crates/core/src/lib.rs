//! Trigger-enabled lateral stepping for a trotting quadruped.
//!
//! A Hopf-oscillator network drives the trot. Four extra units drive the
//! laterally movable hip joints and are switched on only while the robot
//! recovers from a sideways push. Step length comes from the capture point
//! of a linear inverted pendulum. A lumped lateral plant, a Butterworth-filtered
//! accelerometer and the reflex controller close the loop.
//!
//! ```
//! use lateral_trot::scenario::{run_scenario, ScenarioConfig};
//!
//! let cfg = ScenarioConfig { duration_s: 4.0, ..ScenarioConfig::impact(220.0, true) };
//! let (_, summary) = run_scenario(&cfg).unwrap();
//! assert!(!summary.fallen);
//! ```
//!
//! The guide in `book/` walks through each module.

// `!(a > b)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cpg;
pub mod filter;
pub mod gait;
pub mod ode;
pub mod plant;
pub mod plot;
pub mod reflex;
pub mod scenario;
pub mod zmp;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/cpg.md")]
    mod cpg {}
    #[doc = include_str!("../../../book/src/gait.md")]
    mod gait {}
    #[doc = include_str!("../../../book/src/zmp.md")]
    mod zmp {}
    #[doc = include_str!("../../../book/src/plant.md")]
    mod plant {}
    #[doc = include_str!("../../../book/src/reflex.md")]
    mod reflex {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
}
