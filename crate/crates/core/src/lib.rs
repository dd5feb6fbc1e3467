//! Feed-forward semantic Gaussian splatting on the CPU.
//!
//! The pipeline takes per-view mask annotations with embeddings, clusters the
//! embeddings into a compact semantic bank, tags each Gaussian with a single
//! bank index, renders color and blended semantic buffers with a tile-based
//! rasterizer, and answers open-vocabulary queries against the recovered
//! feature map. Nothing is optimized per scene.
//!
//! | module        | role                                                     |
//! |---------------|----------------------------------------------------------|
//! | [`model`]     | Gaussians, cameras, rasters, covariance and SH kernels   |
//! | [`annotation`]| mask NMS and label-map rasterization                     |
//! | [`bank`]      | K-Means semantic bank and per-view index maps            |
//! | [`lift`]      | semantic index assignment to Gaussians                   |
//! | [`render`]    | tile rasterizer plus a brute-force reference renderer    |
//! | [`query`]     | feature recovery, relevancy and segmentation             |
//! | [`metrics`]   | IoU, PSNR, SSIM and the evaluation report                |
//! | [`io`]        | PLY, embedding, label-map, bank and buffer file formats  |
//! | [`synth`]     | deterministic synthetic scenes for tests and demos       |
//! | [`cli`]       | the `semsplat` command-line driver                       |
//!
//! Runnable walkthroughs for each stage live in `crates/core/examples/`.

pub mod annotation;
pub mod bank;
pub mod cli;
pub mod error;
pub mod io;
pub mod lift;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod query;
pub mod render;
pub mod synth;

pub use annotation::{nms_masks, rasterize_label_map, MaskAnnotation, ViewAnnotation};
pub use bank::{build_bank, compute_cluster_count, kmeans, KMeansResult, SemanticBank, SemanticIndexMap};
pub use error::{Error, Result};
pub use lift::{assign_by_projection, attach_pixel_aligned, PixelAlignedScene};
pub use model::{build_covariance, eval_sh, Camera, GaussianPrimitive, Raster};
pub use pipeline::PipelineConfig;
pub use query::{recover_features, relevancy_map, segment, FeatureMap, QueryConfig};
pub use render::{project_gaussian, render, render_bruteforce, ProjectedGaussian, RenderBuffers, RenderSettings};
