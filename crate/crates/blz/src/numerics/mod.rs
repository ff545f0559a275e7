//! Grids, quadrature, special functions, root finding and tail fitting.

mod banded;
mod conv;
mod fit;
mod gamma;
mod grid;
mod interp;
pub mod quad;
mod roots;

pub use banded::BandMatrix;
pub use conv::{convolve, Convolution, FftConvolver};
pub use fit::{fit_exponential_tail, TailFit};
pub use gamma::{gamma, ln_gamma, log_gamma};
pub use grid::{RapidityGrid, SampledFunction};
pub use interp::{interp_uniform, interp_uniform_complex};
pub use roots::find_root_increasing;

pub type C64 = num_complex::Complex64;
