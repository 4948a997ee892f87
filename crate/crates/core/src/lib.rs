//! Capital processes of constant-proportion and mixture betting strategies
//! in the one-sided unbounded forecasting game, with closed-form lower
//! bounds, prior validation and the prior / upper-class function calculus.
//!
//! Everything is generic over the scalar (`f32` or `f64`); the `*64` aliases
//! below fix `f64`.

pub mod bounds;
pub mod error;
pub mod game;
pub mod logmath;
pub mod priors;
pub mod quadrature;
pub mod reality;
pub mod scalar;
pub mod skeptic;
pub mod upper_class;

pub use bounds::{BoundOutcome, BoundQuery, BoundValue, LeadingConstant};
pub use error::{Error, Result};
pub use game::{run_game, GameRun, GameState, GameVariant, RealityStrategy, RoundRecord, RunOptions, Strategy, Verdict};
pub use priors::{build_staircase_tilt, validate_assumption1, Prior, StaircaseTilt};
pub use quadrature::{QuadratureSpec, TailVerdict};
pub use reality::{ComplyingAdversary, IidDist, IidSampler, PayoffScheme, ScriptedPath};
pub use scalar::Real;
pub use skeptic::{BSequence, ConstantProportion, DiscreteMixture, Kronecker, MixtureBank, MixtureStrategy};
pub use upper_class::{apply_f, apply_g, compose_fg, compose_gf, integral_test, FgComposer, UpperClassFunction};

pub type Prior64 = Prior<f64>;
pub type GameState64 = GameState<f64>;
pub type MixtureStrategy64 = MixtureStrategy<f64>;
pub type UpperClassFunction64 = UpperClassFunction<f64>;
pub type StaircaseTilt64 = StaircaseTilt<f64>;
pub type BoundOutcome64 = BoundOutcome<f64>;
