//! Exact computational engine for the algebraic layer of involutive
//! Heegaard Floer theory: graded chain complexes over F2[U], F2[u,v] and
//! F2[U,Q]/Q^2, hyperbox compression, iota- and iota_K-complexes, the
//! involutive surgery mapping cone and its 2-handle cobordism map, and
//! the basepoint-twist automorphism.

pub mod complex;
pub mod error;
pub mod fixtures;
pub mod grading;
pub mod homology;
pub mod hypercube;
pub mod involutive;
pub mod io;
pub mod knots;
pub mod ring;
pub mod solve;
pub mod surgery;
pub mod synth;

pub use complex::{ChainMap, FreeComplex, Generator, SparseMat, ValidationReport};
pub use error::{Error, Result};
pub use grading::Gr;
pub use homology::{homology, GradedHomology};
pub use hypercube::Hyperbox;
pub use involutive::IotaComplex;
pub use knots::IotaKComplex;
pub use ring::{Coefficient, Mode, Monomial};
