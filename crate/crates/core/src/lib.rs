pub mod ball;
pub mod error;
pub mod fem;
pub mod perturb;
pub mod roots;
pub mod specfun;
pub mod spectrum;

pub use ball::{BallProblem, ConcentratedDensity};
pub use error::{Error, Result};
pub use spectrum::{ModeLabel, Spectrum};
