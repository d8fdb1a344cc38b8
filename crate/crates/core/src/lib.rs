//! Hamiltonian formulation of degenerate quadratic Lagrangians
//! `L = 1/2 a_ij(t,q) qdot^i qdot^j + b_i(t,q) qdot^i + c(t,q)`.
//!
//! The crate covers exact polynomial arithmetic, the splitting of the
//! degenerate mass matrix, the family of associated Hamiltonian forms,
//! constraint classification, numerical integration with constraint
//! monitoring, and the Koszul-Tate resolution of the primary constraints
//! together with its BRST charge.
//!
//! ```
//! use quadham::model::catalog::regular_oscillator;
//! use quadham::model::ReferenceFrame;
//! use quadham::split::default_sigma;
//! use quadham::hamiltonian::build_hamiltonian;
//!
//! let model = regular_oscillator();
//! let split = default_sigma(&model).unwrap();
//! let h = build_hamiltonian(&model, &split, &ReferenceFrame::zero(1)).unwrap();
//! assert_eq!(h.hfun().to_string(), "(1/2)*q1^2 + (1/2)*p1^2");
//! ```

pub mod constraints;
pub mod dynamics;
pub mod error;
pub mod graded;
pub mod hamiltonian;
pub mod koszul_tate;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod split;

pub use error::{Error, Result};
pub use graded::{GradedElement, Generator};
pub use hamiltonian::HamiltonianForm;
pub use koszul_tate::KTComplex;
pub use model::{QuadraticModel, ReferenceFrame};
pub use poly::{CoeffPoly, PolyMatrix, Rational, Var};
pub use split::SigmaSplit;
