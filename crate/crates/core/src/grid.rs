//! Translation and integer quantization of coordinates into `[0, 3200]^3`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amino::AminoAcid;
use crate::scalar::{Scalar, Vec3};
use crate::structure::{ProteinStructure, ResidueKey};

/// Upper bound of the integer domain on every axis.
pub const DOMAIN_EXTENT: u32 = 3200;

/// Grid units per ångström before any downscaling (0.1 Å resolution).
pub const BASE_SCALE: f64 = 10.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("structure has no residues")]
    EmptyStructure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridTransform<T> {
    pub translation: Vec3<T>,
    /// Grid units per ångström; always positive.
    pub scale: T,
}

impl<T: Scalar> GridTransform<T> {
    pub fn new(translation: Vec3<T>, scale: T) -> Self {
        assert!(scale > T::zero(), "grid scale must be positive");
        GridTransform { translation, scale }
    }

    pub fn domain_extent(&self) -> u32 {
        DOMAIN_EXTENT
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridPoint {
    pub x: u32,
    pub y: u32,
    pub z: u32,
    pub amino_acid: AminoAcid,
    pub key: ResidueKey,
}

/// Quantized coordinates plus whether any axis had to be clamped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mapped {
    pub coords: [u32; 3],
    pub clamped: bool,
}

/// Per-protein transform: the minimum corner goes to the origin, 10 units per
/// ångström unless the largest extent would overflow the domain.
pub fn fit_transform<T: Scalar>(
    structure: &ProteinStructure<T>,
) -> Result<GridTransform<T>, GridError> {
    let first = structure
        .residues
        .first()
        .ok_or(GridError::EmptyStructure)?;
    let mut min = first.position;
    let mut max = first.position;
    for r in &structure.residues[1..] {
        for i in 0..3 {
            min[i] = min[i].min(r.position[i]);
            max[i] = max[i].max(r.position[i]);
        }
    }
    let extent = (0..3)
        .map(|i| max[i] - min[i])
        .fold(T::zero(), |a, b| a.max(b));
    let base = T::from_f64_lossy(BASE_SCALE);
    let limit = T::from_u32(DOMAIN_EXTENT).expect("domain extent fits any float");
    let scale = if extent * base > limit {
        limit / extent
    } else {
        base
    };
    Ok(GridTransform::new(min, scale))
}

/// `round((p - t) * scale)` with halves away from zero, clamped into the domain.
pub fn map_point<T: Scalar>(position: Vec3<T>, t: &GridTransform<T>) -> Mapped {
    let mut coords = [0u32; 3];
    let mut clamped = false;
    for i in 0..3 {
        let scaled = (position[i] - t.translation[i]) * t.scale;
        let (v, c) = quantize(scaled);
        coords[i] = v;
        clamped |= c;
    }
    Mapped { coords, clamped }
}

fn quantize<T: Scalar>(scaled: T) -> (u32, bool) {
    let hi = i64::from(DOMAIN_EXTENT);
    let v = scaled.to_f64_lossy();
    if v.is_nan() {
        return (0, true);
    }
    // far outside the domain: no need for the exact path
    if v < -1.0 {
        return (0, true);
    }
    if v > (hi + 1) as f64 {
        return (DOMAIN_EXTENT, true);
    }
    let per = T::SNAP_PER_UNIT;
    let snapped = (scaled * T::from_i64(per).expect("snap factor fits")).round();
    let n = snapped.to_i64().unwrap_or(0);
    let rounded = round_half_away_div(n, per);
    if rounded < 0 {
        (0, true)
    } else if rounded > hi {
        (DOMAIN_EXTENT, true)
    } else {
        (rounded as u32, false)
    }
}

/// `round(n / d)` for `d > 0`, halves away from zero.
fn round_half_away_div(n: i64, d: i64) -> i64 {
    let q = (n.abs() + d / 2) / d;
    if n < 0 {
        -q
    } else {
        q
    }
}

/// Maps every residue of a structure; returns the points and the clamp count.
pub fn map_structure<T: Scalar>(
    structure: &ProteinStructure<T>,
    t: &GridTransform<T>,
) -> (Vec<GridPoint>, usize) {
    let mut clamped = 0;
    let points = structure
        .residues
        .iter()
        .map(|r| {
            let m = map_point(r.position, t);
            clamped += usize::from(m.clamped);
            GridPoint {
                x: m.coords[0],
                y: m.coords[1],
                z: m.coords[2],
                amino_acid: r.amino_acid,
                key: r.key.clone(),
            }
        })
        .collect();
    (points, clamped)
}
