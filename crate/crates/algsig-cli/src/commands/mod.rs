mod approx;
mod certify;
mod density_check;
mod fractional;
mod sweep;

pub use approx::run_approx;
pub use certify::run_certify;
pub use density_check::run_density_check;
pub use fractional::run_fractional;
pub use sweep::run_sweep;

use crate::error::{CliError, Result, Status};
use crate::output::Artifact;

pub struct Outcome {
    pub artifact: Artifact,
    pub status: Status,
}

/// The only entry of a list that must hold exactly one value.
fn single<'a, T>(what: &str, v: &'a [T]) -> Result<&'a T> {
    match v {
        [x] => Ok(x),
        _ => Err(CliError::Config(format!("this command takes exactly one `{what}`, got {}", v.len()))),
    }
}
