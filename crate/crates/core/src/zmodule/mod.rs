//! Exact integer linear algebra: Bézout vectors, Smith normal form and
//! linear congruence solving over Z and Z/n.

mod gcd;
mod matrix;
mod snf;
mod solve;

pub use gcd::{ext_gcd, ext_gcd_pair, gcd_all};
pub use matrix::IntMatrix;
pub use snf::{smith_normal_form, SnfDecomposition};
pub use solve::{integer_kernel, rank, solve_mod};
