pub mod dtable;
pub mod error;
pub mod goeritz;
pub mod group;
pub mod knotdb;
pub mod lattice;
pub mod lens;
pub mod matrix;
pub mod obstruction;
pub mod rational;
pub mod smith;

pub use dtable::DTable;
pub use error::{Error, Result};
pub use group::{FiniteAbelianGroup, GroupElement};
pub use lens::{d_lens, d_table_lens, LensSpace, Orientation};
pub use matrix::IntMatrix;
pub use rational::Rational;
pub use smith::{cokernel, smith_normal_form, Cokernel, SmithDecomposition};
