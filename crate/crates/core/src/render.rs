//! Multiview orthographic rendering: three axis-aligned projections composited
//! into one fixed-size RGB image.
//!
//! Panels follow a third-angle arrangement so neighbouring panels share an axis:
//!
//! ```text
//!   +------+
//!   |  XZ  |            top view:   horizontal x, vertical z
//!   +------+  +------+
//!   |  XY  |  |  YZ  |  front view: horizontal x, vertical y
//!   +------+  +------+  side view:  horizontal z, vertical y
//! ```
//!
//! Each panel is cropped to its occupied bounding box and all panels share one
//! rational downscale factor (never above 1 pixel per grid unit). Several dots falling in one output pixel are
//! resolved by the same rule as in-plane collisions (nearest depth, then residue
//! key), so every foreground pixel keeps an exact palette color.

use std::collections::BTreeMap;
use std::io::Cursor;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amino::AminoAcid;
use crate::grid::{fit_transform, map_structure, GridError, GridPoint, GridTransform};
use crate::palette::{AminoAcidPalette, PaletteError, Rgb};
use crate::scalar::Scalar;
use crate::structure::{ProteinStructure, ResidueKey};

pub const DEFAULT_TARGET_SIZE: u32 = 299;
pub const DEFAULT_GUTTER_PX: u32 = 4;

/// Settings recorded alongside every PNG we write.
pub const PNG_ENCODER_SETTINGS: &str = "png-0.18 rgb8 compression=balanced filter=adaptive";

#[derive(Debug, Error)]
pub enum RenderError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("all three projections are empty")]
    EmptyProjection,
    #[error(transparent)]
    Palette(#[from] PaletteError),
    #[error("invalid render config: {0}")]
    InvalidConfig(String),
    #[error("PNG encoding failed: {0}")]
    Encode(String),
    #[error("PNG decoding failed: {0}")]
    Decode(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PanelLayout {
    /// XZ top-left, XY bottom-left, YZ bottom-right, top-right empty.
    ThreePanel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DepthRule {
    NearestWins,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollisionTiebreak {
    /// `(chain_id, seq_num)` ascending.
    ResidueKeyAscending,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub target_size: u32,
    pub layout: PanelLayout,
    pub gutter_px: u32,
    pub depth_rule: DepthRule,
    pub collision_tiebreak: CollisionTiebreak,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            target_size: DEFAULT_TARGET_SIZE,
            layout: PanelLayout::ThreePanel,
            gutter_px: DEFAULT_GUTTER_PX,
            depth_rule: DepthRule::NearestWins,
            collision_tiebreak: CollisionTiebreak::ResidueKeyAscending,
        }
    }
}

impl RenderConfig {
    pub fn with_size(target_size: u32) -> Self {
        RenderConfig {
            target_size,
            ..RenderConfig::default()
        }
    }

    fn validate(&self) -> Result<(), RenderError> {
        if self.target_size < self.gutter_px + 2 {
            return Err(RenderError::InvalidConfig(format!(
                "target size {} cannot hold two panels with a {} px gutter",
                self.target_size, self.gutter_px
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Plane {
    XY,
    XZ,
    YZ,
}

impl Plane {
    pub const ALL: [Plane; 3] = [Plane::XY, Plane::XZ, Plane::YZ];

    /// `(horizontal, vertical, depth)` for a point.
    pub fn project(self, p: &GridPoint) -> (u32, u32, u32) {
        match self {
            Plane::XY => (p.x, p.y, p.z),
            Plane::XZ => (p.x, p.z, p.y),
            Plane::YZ => (p.z, p.y, p.x),
        }
    }
}

/// Winning dot of one projected position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewCell {
    pub amino_acid: AminoAcid,
    pub depth: u32,
    pub key: ResidueKey,
    /// Number of dots that landed on this position.
    pub candidates: u32,
}

impl ViewCell {
    fn beats(&self, other: &ViewCell) -> bool {
        (self.depth, &self.key, self.amino_acid) < (other.depth, &other.key, other.amino_acid)
    }
}

/// Sparse projection in the `0..=3200` view frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectedView {
    pub plane: Plane,
    pub cells: BTreeMap<(u32, u32), ViewCell>,
}

impl ProjectedView {
    /// `(u_min, u_max, v_min, v_max)`, `None` when empty.
    pub fn bounds(&self) -> Option<(u32, u32, u32, u32)> {
        let mut it = self.cells.keys();
        let &(u, v) = it.next()?;
        Some(it.fold((u, u, v, v), |(a, b, c, d), &(u, v)| {
            (a.min(u), b.max(u), c.min(v), d.max(v))
        }))
    }
}

pub fn project_view(points: &[GridPoint], plane: Plane) -> ProjectedView {
    let mut cells: BTreeMap<(u32, u32), ViewCell> = BTreeMap::new();
    for p in points {
        let (u, v, depth) = plane.project(p);
        let candidate = ViewCell {
            amino_acid: p.amino_acid,
            depth,
            key: p.key.clone(),
            candidates: 1,
        };
        cells
            .entry((u, v))
            .and_modify(|cell| {
                let count = cell.candidates + 1;
                if candidate.beats(cell) {
                    *cell = candidate.clone();
                }
                cell.candidates = count;
            })
            .or_insert(candidate);
    }
    ProjectedView { plane, cells }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB triples, row 0 at the top.
    pub pixels: Vec<u8>,
}

impl RasterImage {
    pub fn black(width: u32, height: u32) -> Self {
        RasterImage {
            width,
            height,
            pixels: vec![0; width as usize * height as usize * 3],
        }
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        assert!(
            x < self.width && y < self.height,
            "pixel ({x}, {y}) out of bounds"
        );
        (y as usize * self.width as usize + x as usize) * 3
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let i = self.offset(x, y);
        Rgb(self.pixels[i], self.pixels[i + 1], self.pixels[i + 2])
    }

    pub fn set(&mut self, x: u32, y: u32, c: Rgb) {
        let i = self.offset(x, y);
        self.pixels[i] = c.0;
        self.pixels[i + 1] = c.1;
        self.pixels[i + 2] = c.2;
    }

    pub fn non_black_pixels(&self) -> impl Iterator<Item = (u32, u32, Rgb)> + '_ {
        let w = self.width as usize;
        self.pixels
            .chunks_exact(3)
            .enumerate()
            .filter_map(move |(i, c)| {
                let rgb = Rgb(c[0], c[1], c[2]);
                (!rgb.is_black()).then(|| ((i % w) as u32, (i / w) as u32, rgb))
            })
    }

    pub fn non_black_count(&self) -> usize {
        self.non_black_pixels().count()
    }

    pub fn count_non_black_in(&self, rect: &PanelRect) -> usize {
        self.non_black_pixels()
            .filter(|&(x, y, _)| rect.contains(x, y))
            .count()
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, RenderError> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width, self.height);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            enc.set_compression(png::Compression::Balanced);
            enc.set_filter(png::Filter::Adaptive);
            let mut writer = enc
                .write_header()
                .map_err(|e| RenderError::Encode(e.to_string()))?;
            writer
                .write_image_data(&self.pixels)
                .map_err(|e| RenderError::Encode(e.to_string()))?;
            writer
                .finish()
                .map_err(|e| RenderError::Encode(e.to_string()))?;
        }
        Ok(out)
    }

    pub fn decode_png(bytes: &[u8]) -> Result<Self, RenderError> {
        let decoder = png::Decoder::new(Cursor::new(bytes));
        let mut reader = decoder
            .read_info()
            .map_err(|e| RenderError::Decode(e.to_string()))?;
        let size = reader
            .output_buffer_size()
            .ok_or_else(|| RenderError::Decode("image too large".into()))?;
        let mut buf = vec![0; size];
        let info = reader
            .next_frame(&mut buf)
            .map_err(|e| RenderError::Decode(e.to_string()))?;
        if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
            return Err(RenderError::Decode(format!(
                "expected 8-bit RGB, found {:?} {:?}",
                info.color_type, info.bit_depth
            )));
        }
        buf.truncate(info.buffer_size());
        Ok(RasterImage {
            width: info.width,
            height: info.height,
            pixels: buf,
        })
    }

    pub fn read_png(path: &Path) -> Result<Self, RenderError> {
        RasterImage::decode_png(&std::fs::read(path)?)
    }
}

/// Where one view landed in the final image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelRect {
    pub plane: Plane,
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl PanelRect {
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }
}

/// Placement and scale shared by the three panels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiviewLayout {
    pub target_size: u32,
    /// Output pixels per grid unit, as `numerator / denominator`.
    pub scale: (u64, u64),
    /// Only non-empty views get a panel.
    pub panels: Vec<PanelRect>,
}

impl MultiviewLayout {
    pub fn panel(&self, plane: Plane) -> Option<&PanelRect> {
        self.panels.iter().find(|p| p.plane == plane)
    }
}

/// Smaller of two non-negative fractions.
fn min_ratio(a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
    if u128::from(a.0) * u128::from(b.1) <= u128::from(b.0) * u128::from(a.1) {
        a
    } else {
        b
    }
}

fn scaled(extent: u32, scale: (u64, u64)) -> u32 {
    (u64::from(extent) * scale.0 / scale.1) as u32
}

/// Pixel index of offset `d` in a panel of source extent `e` and `width` pixels.
///
/// Offsets are scaled about the panel centre, `floor((d - e/2) * s + width/2)`,
/// so reflecting the source (`d -> e - d`) reflects the pixel (`i -> width - 1 - i`)
/// except at exact ties.
fn bin(d: u32, e: u32, width: u32, scale: (u64, u64)) -> u32 {
    let (num, den) = (i128::from(scale.0), i128::from(scale.1));
    let t = (2 * i128::from(d) - i128::from(e)) * num + i128::from(width) * den;
    (t / (2 * den)) as u32
}

/// Largest scale so that `sum(floor(e_i * s) + 1) + gutters <= target` along one axis.
fn axis_limit(
    extents: &[Option<u32>],
    gutter: u32,
    target: u32,
) -> Result<Option<(u64, u64)>, RenderError> {
    let present: Vec<u32> = extents.iter().flatten().copied().collect();
    if present.is_empty() {
        return Ok(None);
    }
    let n = present.len() as u32;
    let fixed = n + gutter * (n - 1);
    if fixed > target {
        return Err(RenderError::InvalidConfig(format!(
            "target size {target} too small for {n} panels"
        )));
    }
    let sum: u64 = present.iter().map(|&e| u64::from(e)).sum();
    Ok((sum > 0).then(|| (u64::from(target - fixed), sum)))
}

/// Computes crop boxes, shared scale and panel placement.
pub fn layout_multiview(
    views: &[ProjectedView],
    cfg: &RenderConfig,
) -> Result<MultiviewLayout, RenderError> {
    cfg.validate()?;
    let bounds = |plane: Plane| {
        views
            .iter()
            .find(|v| v.plane == plane)
            .and_then(ProjectedView::bounds)
    };
    let (xy, xz, yz) = (bounds(Plane::XY), bounds(Plane::XZ), bounds(Plane::YZ));
    if xy.is_none() && xz.is_none() && yz.is_none() {
        return Err(RenderError::EmptyProjection);
    }
    let u_ext = |b: Option<(u32, u32, u32, u32)>| b.map(|(a, c, _, _)| c - a);
    let v_ext = |b: Option<(u32, u32, u32, u32)>| b.map(|(_, _, a, c)| c - a);
    let max_opt = |a: Option<u32>, b: Option<u32>| match (a, b) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };

    let left = max_opt(u_ext(xz), u_ext(xy));
    let right = u_ext(yz);
    let top = v_ext(xz);
    let bottom = max_opt(v_ext(xy), v_ext(yz));

    let limits = [
        axis_limit(&[left, right], cfg.gutter_px, cfg.target_size)?,
        axis_limit(&[top, bottom], cfg.gutter_px, cfg.target_size)?,
    ];
    // never magnify: one grid unit covers at most one pixel
    let scale = match limits {
        [Some(a), Some(b)] => min_ratio(min_ratio(a, b), (1, 1)),
        [Some(a), None] | [None, Some(a)] => min_ratio(a, (1, 1)),
        [None, None] => (1, 1),
    };

    let size = |e: Option<u32>| e.map_or(0, |e| scaled(e, scale) + 1);
    let (left_w, right_w, top_h, bottom_h) = (size(left), size(right), size(top), size(bottom));
    let gap = |a: u32, b: u32| if a > 0 && b > 0 { cfg.gutter_px } else { 0 };
    let total_w = left_w + gap(left_w, right_w) + right_w;
    let total_h = top_h + gap(top_h, bottom_h) + bottom_h;
    debug_assert!(total_w <= cfg.target_size && total_h <= cfg.target_size);
    let ox = (cfg.target_size - total_w) / 2;
    let oy = (cfg.target_size - total_h) / 2;
    let right_x = ox + left_w + gap(left_w, right_w);
    let bottom_y = oy + top_h + gap(top_h, bottom_h);

    let mut panels = Vec::new();
    let mut place = |plane, b: Option<(u32, u32, u32, u32)>, x, y| {
        if let Some((u0, u1, v0, v1)) = b {
            panels.push(PanelRect {
                plane,
                x,
                y,
                width: scaled(u1 - u0, scale) + 1,
                height: scaled(v1 - v0, scale) + 1,
            });
        }
    };
    place(Plane::XY, xy, ox, bottom_y);
    place(Plane::XZ, xz, ox, oy);
    place(Plane::YZ, yz, right_x, bottom_y);

    Ok(MultiviewLayout {
        target_size: cfg.target_size,
        scale,
        panels,
    })
}

/// Composites the three views onto a black `target_size` square.
pub fn compose_multiview(
    views: &[ProjectedView],
    palette: &AminoAcidPalette,
    cfg: &RenderConfig,
) -> Result<(RasterImage, MultiviewLayout), RenderError> {
    let layout = layout_multiview(views, cfg)?;
    let mut image = RasterImage::black(cfg.target_size, cfg.target_size);
    for view in views {
        let (Some(panel), Some((u0, u1, v0, v1))) = (layout.panel(view.plane), view.bounds())
        else {
            continue;
        };
        let mut bins: BTreeMap<(u32, u32), &ViewCell> = BTreeMap::new();
        for (&(u, v), cell) in &view.cells {
            let key = (
                bin(u - u0, u1 - u0, panel.width, layout.scale),
                bin(v - v0, v1 - v0, panel.height, layout.scale),
            );
            bins.entry(key)
                .and_modify(|cur| {
                    if cell.beats(cur) {
                        *cur = cell;
                    }
                })
                .or_insert(cell);
        }
        for ((bu, bv), cell) in bins {
            let color = palette.encode(cell.amino_acid)?;
            // v grows upwards, image rows grow downwards
            image.set(panel.x + bu, panel.y + panel.height - 1 - bv, color);
        }
    }
    Ok((image, layout))
}

/// Output of [`render_protein`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub image: RasterImage,
    pub layout: MultiviewLayout,
    /// Residues whose grid coordinates had to be clamped into the domain.
    pub clamped: usize,
}

/// Grid-maps, projects and composites a deduplicated structure.
pub fn render_protein<T: Scalar>(
    structure: &ProteinStructure<T>,
    palette: &AminoAcidPalette,
    transform: &GridTransform<T>,
    cfg: &RenderConfig,
) -> Result<Rendered, RenderError> {
    if structure.is_empty() {
        return Err(GridError::EmptyStructure.into());
    }
    let (points, clamped) = map_structure(structure, transform);
    let views = Plane::ALL.map(|plane| project_view(&points, plane));
    let (image, layout) = compose_multiview(&views, palette, cfg)?;
    Ok(Rendered {
        image,
        layout,
        clamped,
    })
}

/// [`render_protein`] with the structure's own fitted transform.
pub fn render_fitted<T: Scalar>(
    structure: &ProteinStructure<T>,
    palette: &AminoAcidPalette,
    cfg: &RenderConfig,
) -> Result<Rendered, RenderError> {
    let transform = fit_transform(structure)?;
    render_protein(structure, palette, &transform, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::palette::{default_palette, Decoded};
    use crate::structure::ResidueRecord;

    fn gp(x: u32, y: u32, z: u32, aa: AminoAcid, seq: i32) -> GridPoint {
        GridPoint {
            x,
            y,
            z,
            amino_acid: aa,
            key: ResidueKey::new("A", seq),
        }
    }

    fn structure(points: &[([f64; 3], AminoAcid)]) -> ProteinStructure<f64> {
        ProteinStructure::new(
            "R",
            points
                .iter()
                .enumerate()
                .map(|(i, &(p, aa))| ResidueRecord {
                    key: ResidueKey::new("A", i as i32 + 1),
                    amino_acid: aa,
                    position: p,
                    occupancy: 1.0,
                    alt_loc: None,
                    model_num: 1,
                })
                .collect(),
        )
    }

    #[test]
    fn projection_drops_normal_axis() {
        let v = project_view(&[gp(10, 20, 30, AminoAcid::Ala, 1)], Plane::XY);
        let cell = &v.cells[&(10, 20)];
        assert_eq!(cell.depth, 30);
        assert_eq!(v.cells.len(), 1);
    }

    #[test]
    fn nearest_wins() {
        let pts = [
            gp(5, 5, 9, AminoAcid::Gly, 1),
            gp(5, 5, 1, AminoAcid::Lys, 2),
        ];
        let v = project_view(&pts, Plane::XY);
        assert_eq!(v.cells[&(5, 5)].amino_acid, AminoAcid::Lys);
    }

    #[test]
    fn equal_depth_collision_uses_residue_key() {
        // brute force over both orders of the pair: lower key wins each time
        let a = gp(7, 7, 3, AminoAcid::Ser, 4);
        let b = gp(7, 7, 3, AminoAcid::Trp, 2);
        for pts in [[a.clone(), b.clone()], [b.clone(), a.clone()]] {
            let v = project_view(&pts, Plane::XY);
            assert_eq!(v.cells.len(), 1);
            let cell = &v.cells[&(7, 7)];
            assert_eq!(cell.amino_acid, AminoAcid::Trp);
            assert_eq!(cell.candidates, 2);
        }
    }

    #[test]
    fn single_residue_gives_three_pixels() {
        let s = structure(&[([1.0, 2.0, 3.0], AminoAcid::Ala)]);
        let r = render_fitted(&s, &default_palette(), &RenderConfig::default()).unwrap();
        assert_eq!((r.image.width, r.image.height), (299, 299));
        assert_eq!(r.image.pixels.len(), 299 * 299 * 3);
        let px: Vec<_> = r.image.non_black_pixels().collect();
        assert_eq!(px.len(), 3);
        assert!(px.iter().all(|p| p.2 == Rgb(0, 0, 128)));
    }

    #[test]
    fn total_collision_gives_three_pixels() {
        let s = structure(&[
            ([1.0, 1.0, 1.0], AminoAcid::Ala),
            ([1.0, 1.0, 1.0], AminoAcid::Gly),
            ([1.0, 1.0, 1.0], AminoAcid::Lys),
        ]);
        let r = render_fitted(&s, &default_palette(), &RenderConfig::default()).unwrap();
        assert_eq!(r.image.non_black_count(), 3);
    }

    #[test]
    fn empty_views_rejected() {
        let views = Plane::ALL.map(|plane| project_view(&[], plane));
        assert!(matches!(
            compose_multiview(&views, &default_palette(), &RenderConfig::default()),
            Err(RenderError::EmptyProjection)
        ));
        let s = structure(&[]);
        assert!(matches!(
            render_fitted(&s, &default_palette(), &RenderConfig::default()),
            Err(RenderError::Grid(GridError::EmptyStructure))
        ));
    }

    #[test]
    fn tiny_target_rejected() {
        let s = structure(&[([1.0, 2.0, 3.0], AminoAcid::Ala)]);
        let cfg = RenderConfig {
            target_size: 5,
            gutter_px: 4,
            ..RenderConfig::default()
        };
        assert!(matches!(
            render_fitted(&s, &default_palette(), &cfg),
            Err(RenderError::InvalidConfig(_))
        ));
    }

    #[test]
    fn panels_fit_and_do_not_overlap() {
        let s = structure(&[
            ([0.0, 0.0, 0.0], AminoAcid::Ala),
            ([40.0, 10.0, 5.0], AminoAcid::Gly),
            ([12.0, 33.0, 41.0], AminoAcid::Lys),
        ]);
        let r = render_fitted(&s, &default_palette(), &RenderConfig::default()).unwrap();
        let panels = &r.layout.panels;
        assert_eq!(panels.len(), 3);
        for p in panels {
            assert!(p.x + p.width <= 299 && p.y + p.height <= 299);
            assert!(r.image.count_non_black_in(p) >= 1, "{p:?}");
        }
        for (i, a) in panels.iter().enumerate() {
            for b in &panels[i + 1..] {
                let disjoint = a.x + a.width <= b.x
                    || b.x + b.width <= a.x
                    || a.y + a.height <= b.y
                    || b.y + b.height <= a.y;
                assert!(disjoint, "{a:?} overlaps {b:?}");
            }
        }
        // the composite fills the target along its limiting axis (structure > 30 Å)
        let xy = r.layout.panel(Plane::XY).unwrap();
        let yz = r.layout.panel(Plane::YZ).unwrap();
        let xz = r.layout.panel(Plane::XZ).unwrap();
        let width = yz.x + yz.width - xy.x;
        let height = xy.y + xy.height - xz.y;
        assert!(width.max(height) >= 299 - 2, "{width}x{height}");
    }

    #[test]
    fn colors_are_pure() {
        let palette = default_palette();
        let pts: Vec<_> = (0..200)
            .map(|i| {
                let f = i as f64;
                (
                    [(f * 1.7).sin() * 30.0, (f * 0.3).cos() * 25.0, f * 0.2],
                    AminoAcid::STANDARD[i % 20],
                )
            })
            .collect();
        let r = render_fitted(&structure(&pts), &palette, &RenderConfig::default()).unwrap();
        assert!(r.image.non_black_count() <= 3 * pts.len());
        for (_, _, c) in r.image.non_black_pixels() {
            assert!(matches!(palette.decode(c), Decoded::Amino(_)));
        }
    }

    #[test]
    fn binning_is_in_range_monotone_and_reflective() {
        for e in 0..300u32 {
            for scale in [(1, 1), (293, 1553), (1, 3), (97, 100), (2, 7)] {
                let w = scaled(e, scale) + 1;
                let mut prev = 0;
                for d in 0..=e {
                    let i = bin(d, e, w, scale);
                    assert!(i < w && i >= prev, "e={e} d={d} {scale:?}");
                    prev = i;
                    let mirrored = bin(e - d, e, w, scale);
                    let exact =
                        (2 * d as i128 - e as i128) * scale.0 as i128 + w as i128 * scale.1 as i128;
                    if exact % (2 * scale.1 as i128) != 0 {
                        assert_eq!(mirrored, w - 1 - i, "e={e} d={d} {scale:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn png_round_trip_preserves_pixels() {
        let s = structure(&[
            ([0.0, 0.0, 0.0], AminoAcid::Ala),
            ([3.8, 0.0, 0.0], AminoAcid::Gly),
        ]);
        let r = render_fitted(&s, &default_palette(), &RenderConfig::default()).unwrap();
        let png = r.image.encode_png().unwrap();
        assert_eq!(RasterImage::decode_png(&png).unwrap(), r.image);
        assert_eq!(r.image.encode_png().unwrap(), png);
    }
}
