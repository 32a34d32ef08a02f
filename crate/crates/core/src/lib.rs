//! Exact intersection theory on declared divisor-class lattices.
//!
//! The crate builds the lattices of an abelian surface `Y = E x E`, a
//! blow-up `Y'` of it, a double cover `X` and a blow-up `X~` of the cover,
//! and certifies, for each odd `n >= 3`, that the divisor
//! `D_n = pi^* f^* A_n - 2(E1 + E2 + E3)` on `X~` has `D_n^2 = 4` while
//! `h0(m D_n) = 1` for every `1 <= m <= (n^2 + 3) / 4`.
//!
//! All arithmetic is on arbitrary-precision integers.
//!
//! ```
//! use dlv::pipeline::{verify_instance, InstanceStatus};
//!
//! let r = verify_instance(5, 3)?;
//! assert_eq!(r.status, InstanceStatus::Verified);
//! assert_eq!(r.certificate_value, (-17).into());
//! # Ok::<(), dlv::Error>(())
//! ```

#![allow(clippy::needless_range_loop)]

pub mod constructions;
pub mod error;
pub mod expr;
pub mod lattice;
mod linalg;
pub mod linsys;
pub mod modelfile;
pub mod oracle;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
pub use lattice::{DivisorClass, SurfaceKind, SurfaceModel};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lattices.md")]
    mod lattices {}
    #[doc = include_str!("../../../book/src/constructions.md")]
    mod constructions {}
    #[doc = include_str!("../../../book/src/linear-systems.md")]
    mod linear_systems {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
