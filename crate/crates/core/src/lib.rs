//! Protein structures as multiview orthographic images.
//!
//! Pipeline: PDBx/XML atom sites ([`structure`]) are reduced to one point per
//! residue, quantized into the integer cube `[0, 3200]^3` ([`grid`]), projected
//! onto the XY, XZ and YZ planes and composited into a 299x299 RGB image
//! ([`render`]) whose dot colors encode amino acids ([`palette`]). Negatives are
//! produced by seeded recoloring ([`mutation`]); [`dataset`] ties it together
//! with a JSON manifest.

pub mod amino;
pub mod dataset;
pub mod grid;
pub mod mutation;
pub mod palette;
pub mod render;
pub mod scalar;
pub mod structure;

pub use amino::AminoAcid;
pub use dataset::{
    build_dataset, split, stats, DatasetConfig, DatasetError, DatasetManifest, Label, Split,
};
pub use grid::{fit_transform, map_point, map_structure, GridPoint, DOMAIN_EXTENT};
pub use mutation::{mutate, replay, MutationLog, MutationSpec};
pub use palette::{default_palette, AminoAcidPalette, Decoded, Rgb};
pub use render::{
    compose_multiview, project_view, render_fitted, render_protein, Plane, RasterImage,
    RenderConfig,
};
pub use scalar::Scalar;
pub use structure::{deduplicate, parse_structure, ResidueKey};

pub type ResidueRecord64 = structure::ResidueRecord<f64>;
pub type ResidueRecord32 = structure::ResidueRecord<f32>;
pub type ProteinStructure64 = structure::ProteinStructure<f64>;
pub type ProteinStructure32 = structure::ProteinStructure<f32>;
pub type GridTransform64 = grid::GridTransform<f64>;
pub type GridTransform32 = grid::GridTransform<f32>;
