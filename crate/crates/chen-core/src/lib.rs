//! Truncated free tensor algebra over `X_0,...,X_d`, Chen-Strichartz
//! coefficients, closed-form Stratonovich moments, Clifford algebra with
//! supertrace, and curvature forms with the A-hat top-degree coefficient.
//!
//! Everything in this crate is pure value arithmetic: no IO, no clocks, no
//! global state. Samplers, matrix models and the CLI live in the companion
//! `chen-heat` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod chen;
pub mod clifford;
pub mod curvature;
pub mod forms;
pub mod moments;
pub mod tensor;
pub mod word;

pub use chen::{chen_coefficients, ChenCoefficients, ChenPlan};
pub use clifford::{cl_exp, d_map, dr_element, supertrace, CliffordElement, SkewMatrix};
pub use curvature::CurvatureTensor;
pub use forms::{a_genus_top, curvature_form, FormElement, FormMatrix};
pub use moments::{in_concat_set, stratonovich_moment};
pub use tensor::{commutator_expand, Cap, SignatureEngine, TensorSeries};
pub use word::Word;
