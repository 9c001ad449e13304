//! Verification toolkit for operational process theories: a real-vector
//! representation of quantum, classical and polytopic theories, a circuit
//! DSL, convex-geometry primitives, decoherence maps, and numerical checks of
//! the no-go argument against hyperdecoherence.

pub mod convex;
pub mod decoherence;
pub mod diagram;
pub mod error;
pub mod lp;
pub mod nogo;
pub mod report;
pub mod tensor;
pub mod theory;

pub use error::{Error, Result};
pub use report::{Check, Status, VerificationReport};
pub use theory::{ProcessRep, SystemType, Theory};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/theories.md")]
    mod theories {}
    #[doc = include_str!("../../../book/src/diagrams.md")]
    mod diagrams {}
    #[doc = include_str!("../../../book/src/convexity.md")]
    mod convexity {}
    #[doc = include_str!("../../../book/src/decoherence.md")]
    mod decoherence {}
    #[doc = include_str!("../../../book/src/nogo.md")]
    mod nogo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
