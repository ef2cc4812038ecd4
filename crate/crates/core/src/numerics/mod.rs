//! Dense linear algebra and calculus kernels: SU(2)/SO(3) maps, 3×3 SVD,
//! quadrature and finite differences.

pub mod eigen;
pub mod linalg;
pub mod quad;
pub mod su2;
pub mod svd;

pub use eigen::{min_eigenvalue, sym_eigen, SymEigen};
pub use linalg::{Mat2c, Mat3, Vec3};
pub use quad::{central_diff, integrate, integrate2d, trapezoid_weights};
pub use su2::{bloch_vector, so3_from_su2, su2_exp, su2_log, su2_rotation};
pub use svd::{nearest_orthogonal, nuclear_norm2, svd3, Svd3};
