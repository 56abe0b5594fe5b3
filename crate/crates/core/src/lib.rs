//! Exact mod-p arithmetic for adelic q-expansions of Hilbert modular forms
//! over real quadratic fields Q(sqrt D).
//!
//! The stack, bottom to top: integer helpers ([`arith`]), the field and its
//! ideals ([`number_field`], [`ideal`], [`class_group`]), coefficient fields
//! ([`finite_field`]), expansions ([`qexp`]), operators ([`operators`]),
//! Eisenstein series ([`eigenforms`]), and the Hecke-orbit experiment
//! ([`doubling`]).

pub mod arith;
pub mod class_group;
pub mod doubling;
pub mod eigenforms;
pub mod error;
pub mod finite_field;
pub mod ideal;
pub mod linalg;
pub mod number_field;
pub mod operators;
pub mod qexp;

pub use class_group::{Character, NarrowClassGroup};
pub use error::{Error, Result};
pub use finite_field::{Gf, GfContext, QuadraticRoots};
pub use ideal::{Factorization, IdealHnf, PrimeIdeal};
pub use number_field::{FieldElement, OmegaKind, QuadraticField};
pub use qexp::{AdelicQExpansion, GroupRingVector, QExpJson};
pub use doubling::{run_experiment, DoublingReport, ExperimentConfig, RootChoice};
pub use eigenforms::{constant_form, eisenstein, verify_eigenform, ConstantMode, EigenCheck};
pub use linalg::Matrix;
