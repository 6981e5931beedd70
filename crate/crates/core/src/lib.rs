pub mod error;
pub mod image;
pub mod io;
pub mod mc;
pub mod metrics;
pub mod phantom;
pub mod poisson;
pub mod radon;
pub mod ridgelet;
pub mod seed;
pub mod shrinkage;
pub mod spd;
pub mod wavelet;

pub use error::{Error, Result};
pub use image::{CountImage, Grid, IntensityImage};
