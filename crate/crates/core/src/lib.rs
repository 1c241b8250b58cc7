//! Omnidirectional (360°) image toolkit.
//!
//! Sphere/plane mappings for seven projection formats (ERP, CMP, EAC, ISP,
//! OHP, TSP, SSP), resampling between them through the sphere, spherically
//! weighted quality metrics, and a round-trip super-resolution evaluation
//! harness: project a low-resolution ERP frame into a format, upscale it
//! there, map it back to ERP and score it against the high-resolution
//! original.

#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod imageio;
pub mod metrics;
pub mod pipeline;
pub mod projection;
pub mod raster;
pub mod resample;
pub mod scaler;

pub use error::{Error, Result};
pub use exec::Exec;
pub use geometry::{angular_error, dir_to_latlon, latlon_to_dir, LatLon, SphereDir};
pub use raster::{ColorModel, PlanarImage};
pub use projection::{
    active_mask, default_grid, eac_remap, eac_unmap, project, unproject, ActiveMask, ImagePoint,
    ProjectionFormat, ProjectionGrid,
};
pub use resample::InterpKernel;
