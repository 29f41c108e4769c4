//! Exact mod-p computations with smooth representations of `GL_2(Q_p)` at
//! finite congruence level.
//!
//! The crate is layered bottom-up:
//!
//! * [`gf`]: dense linear algebra over `F_p`;
//! * [`zq`]: 2x2 integer matrices read p-adically, congruence subgroups,
//!   `P^1(Z/p^n)` and Bruhat-Tits tree vertices;
//! * [`weights`]: symmetric-power weights, induced representations of `K`
//!   and the invariants engine;
//! * [`tree`]: truncated compact induction, the Hecke operator and the
//!   quotients `π(r, λ, ω^a)`;
//! * [`growth`]: dimension tables, growth exponents and the small
//!   structural checks built on top;
//! * [`cli`]: the command-line driver behind the `gl2rep` binary.

pub mod cli;
pub mod error;
pub mod gf;
pub mod growth;
pub mod tree;
pub mod weights;
pub mod zq;

pub use error::{Error, Result};
pub use gf::{Fp, FpMatrix};
pub use zq::{Family, SubgroupSpec, ZMat2};
