use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate protocol: {0}")]
    DegenerateProtocol(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("species data: {0}")]
    SpeciesData(String),

    #[error("integrator failure at t = {t:e} (step {step:e}, {steps} steps): {reason}")]
    Integrator {
        t: f64,
        step: f64,
        steps: usize,
        reason: String,
    },

    #[error("light-shift pole: {ground} ground state to F'={f_prime} is {detuning:e} rad/s from resonance")]
    Singularity {
        ground: &'static str,
        f_prime: u32,
        detuning: f64,
    },

    #[error("no sign change of the summed light shift in [{:e}, {:e}] rad/s", .bracket.0, .bracket.1)]
    NoRoot {
        bracket: (f64, f64),
        /// Sampled (delta_omega, sum) pairs across the bracket.
        profile: Vec<(f64, f64)>,
    },

    #[error("ambiguous fringe peak, candidates at {candidates:?}")]
    AmbiguousPeak { candidates: Vec<f64> },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical method rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::DegenerateProtocol(_)
                | Error::Integrator { .. }
                | Error::Singularity { .. }
                | Error::NoRoot { .. }
                | Error::AmbiguousPeak { .. }
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Csv(_) | Error::Io(_))
    }
}

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite, got {x}")))
    }
}
