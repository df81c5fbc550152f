//! Landau-Ginzburg state spaces, Berglund-Hübsch-Krawitz duality and
//! Borcea-Voisin mirror symmetry, computed exactly over ℚ.

pub mod bvlg;
pub mod catalog;
pub mod chenruan;
pub mod error;
pub mod frobenius;
pub mod linalg;
pub mod milnor;
pub mod poly;
pub mod statespace;
pub mod symmetry;

pub use error::{Error, Result};
