use thiserror::Error;

/// Failure modes of the validated pipeline. None of these are recoverable
/// by weakening a bound: an error always aborts the enclosure chain that
/// produced it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by an interval containing zero")]
    DivisionByZero,

    #[error("negative radicand (lower bound {lo})")]
    NegativeRadicand { lo: f64 },

    #[error("unsupported rational exponent {num}/{den}")]
    UnsupportedExponent { num: i32, den: u32 },

    #[error("empty intersection: an enclosure assumption was violated")]
    EmptyIntersection,

    #[error("non-finite bound in {context}")]
    Overflow { context: &'static str },

    #[error("approximate inversion of the midpoint matrix failed")]
    SingularMidpoint,

    #[error("rough enclosure not accepted above the minimum step {min_step:e}")]
    EnclosureFailure { min_step: f64 },

    #[error("cannot parse number {text:?}")]
    ParseNumber { text: String },

    #[error("vector field parse error: {0}")]
    ParseField(String),

    #[error("section crossing is not transverse (flow direction not sign-definite)")]
    Tangency,

    #[error("could not isolate the section crossing within a single step")]
    CrossingNotIsolated,

    #[error("no section crossing found before t = {t_max}")]
    NoCrossing { t_max: f64 },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Config(String),
}

impl Error {
    pub fn at_step(self, step: usize) -> Error {
        Error::AtStep { step, source: Box::new(self) }
    }
}
