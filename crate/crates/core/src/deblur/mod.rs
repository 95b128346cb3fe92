//! Blind deconvolution: gradient steps, kernel projection, pyramid and the full pipeline.

mod blind;
mod config;
mod nonblind;
mod pyramid;
mod steps;

pub use blind::{deblur_blind, BlindResult, EnergyRecord};
pub use config::{DeblurConfig, StepRule};
pub use nonblind::{deblur_nonblind, deblur_nonblind_with, NonblindOptions, DEFAULT_NONBLIND_LAMBDA};
pub use pyramid::{build_pyramid, resize_bilinear, resize_kernel, PyramidLevel};
pub use steps::{data_energy, filtered_data_energy, k_gradient, k_gradient_step, model_energy, project_kernel, u_gradient, u_gradient_step, GradientModel};
