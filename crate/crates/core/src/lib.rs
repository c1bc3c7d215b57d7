pub mod error;
pub mod grid;
pub mod linalg;
pub mod poly;
pub mod rational;
pub mod statespace;
pub mod transfer;

pub use error::{QeqError, Result};
pub use grid::FrequencyGrid;
pub use linalg::CMatrix;
pub use poly::PolynomialC;
pub use rational::RationalC;
pub use statespace::{lyapunov_solve, StateSpaceModel};
pub use transfer::TransferMatrix;
pub mod design;
pub mod io;
pub mod oracle;
pub mod psd;
pub mod realizability;
