//! Dense complex linear algebra and tensor-product bookkeeping.

mod eigen;
mod matrix;
mod space;
mod sparse;

pub use eigen::{hermitian_eig, EigenDecomposition, HERMITICITY_TOL};
pub use matrix::{
    basis_vector, destroy, inner, kron, kron_vec, norm, number, sigma_minus, sigma_x, sigma_z,
    ComplexMatrix,
};
pub use space::{embed, embed_product, LevelKind, SpaceDescriptor, Subspace, Subsystem};
pub use sparse::SparseMatrix;
