use thiserror::Error;

/// Errors produced by the model, propagator, oracle, and sweep layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed the `PhysParams`/`TimeGrid`/`DensityMatrix2` invariants.
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// An operation that needs a finite spectral width was called with the
    /// infinite (memoryless) sentinel.
    #[error("spectral width is infinite: {context}")]
    InfiniteWidth { context: &'static str },

    /// The memoryless right-hand side was called with a finite spectral width.
    #[error("spectral width is finite; use the finite-width equations")]
    FiniteWidth,

    /// A propagator value with |g| > 1 + 1e-9 was passed to the qubit map.
    #[error("unphysical propagator magnitude |g| = {magnitude}")]
    UnphysicalPropagator { magnitude: f64 },

    /// Non-finite numeric input where a finite value is required.
    #[error("non-finite input: {what}")]
    NonFinite { what: &'static str },

    /// The denominator cubic has a triple root at this parameter point; the
    /// confluent expansion is not supported there. Nudge lambda by ~1e-9
    /// relative and retry.
    #[error(
        "triple pole at kappa = {kappa}, lambda = {lambda}, gamma = {gamma}; \
         perturb lambda by ~1e-9 relative to split the degeneracy"
    )]
    TripleRoot { kappa: f64, lambda: f64, gamma: f64 },

    /// An internal consistency check failed (complex residue sum, unstable
    /// pole, imaginary leakage in G(t), ...).
    #[error("internal consistency failure: {what}")]
    Internal { what: String },

    /// A threshold bracket does not straddle the Markovian transition.
    #[error(
        "bracket [{lo}, {hi}] does not straddle the transition \
         (markovian at lo: {lo_markovian}, at hi: {hi_markovian})"
    )]
    Bracket {
        lo: f64,
        hi: f64,
        lo_markovian: bool,
        hi_markovian: bool,
    },

    /// The step-halving smoke test found a convergence ratio incompatible
    /// with a fourth-order integrator.
    #[error("integrator order failure: step-halving error ratio {ratio} outside [8, 32]")]
    IntegratorOrder { ratio: f64 },

    /// Excitation bookkeeping left [-1e-8, 1 + 1e-8].
    #[error("norm conservation failure: reservoir population {value}")]
    NormConservation { value: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
