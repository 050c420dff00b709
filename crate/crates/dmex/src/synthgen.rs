//! Deterministic generator of binary shape images (squares, ellipses) with
//! per-sample ground-truth masks.
//!
//! Rendering samples each pixel at its center `(col + 0.5, row + 0.5)` in a
//! continuous frame where the image spans `[0, W] x [0, H]`. A pixel is
//! foreground iff its center passes the shape's inclusion test after the
//! offset from the shape center is rotated back into the shape's local frame.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pnm;
use crate::rng;

/// Which of the two test populations a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    X,
    Y,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::X => write!(f, "X"),
            Group::Y => write!(f, "Y"),
        }
    }
}

impl std::str::FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Group::X),
            "Y" | "y" => Ok(Group::Y),
            other => Err(Error::Config(format!("unknown group {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeKind {
    Square,
    Ellipse,
}

impl ShapeKind {
    /// Parse a manifest subgroup label into a shape kind.
    pub fn from_subgroup(label: &str) -> Result<Self> {
        match label {
            "square" => Ok(ShapeKind::Square),
            "ellipse" => Ok(ShapeKind::Ellipse),
            other => Err(Error::Config(format!("unknown subgroup {other:?}"))),
        }
    }

    pub fn subgroup(&self) -> &'static str {
        match self {
            ShapeKind::Square => "square",
            ShapeKind::Ellipse => "ellipse",
        }
    }
}

/// Geometry of one shape in continuous image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    /// Center, x = column axis, y = row axis.
    pub center_x: f64,
    pub center_y: f64,
    /// Half extents along the shape's local axes; squares have a = b.
    pub half_extent_a: f64,
    pub half_extent_b: f64,
    /// Radians; squares use [0, pi/2), ellipses [0, pi).
    pub rotation: f64,
}

/// Shapes never shrink below this half extent.
pub const MIN_HALF_EXTENT: f64 = 4.0;

impl ShapeSpec {
    /// Radius of the circle circumscribing the shape.
    pub fn circumradius(&self) -> f64 {
        match self.kind {
            ShapeKind::Square => self.half_extent_a.hypot(self.half_extent_b),
            ShapeKind::Ellipse => self.half_extent_a.max(self.half_extent_b),
        }
    }

    /// Check the spec against image dimensions: extents at least
    /// [`MIN_HALF_EXTENT`] and the circumscribing circle at least one pixel
    /// inside every border.
    pub fn validate(&self, height: usize, width: usize) -> Result<()> {
        if self.half_extent_a < MIN_HALF_EXTENT || self.half_extent_b < MIN_HALF_EXTENT {
            return Err(Error::Bounds(format!(
                "half extents ({}, {}) below minimum {MIN_HALF_EXTENT}",
                self.half_extent_a, self.half_extent_b
            )));
        }
        let r = self.circumradius();
        let fits = |c: f64, dim: usize| c - r >= 1.0 && c + r <= dim as f64 - 1.0;
        if !fits(self.center_x, width) || !fits(self.center_y, height) {
            return Err(Error::Bounds(format!(
                "shape with circumradius {r:.3} at ({}, {}) leaves less than one \
                 pixel of margin in a {width}x{height} image",
                self.center_x, self.center_y
            )));
        }
        Ok(())
    }

    /// Inclusion test for a continuous point.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let dx = x - self.center_x;
        let dy = y - self.center_y;
        let (sin, cos) = self.rotation.sin_cos();
        let u = dx * cos + dy * sin;
        let v = -dx * sin + dy * cos;
        let (a, b) = (self.half_extent_a, self.half_extent_b);
        match self.kind {
            ShapeKind::Square => u.abs() <= a && v.abs() <= b,
            ShapeKind::Ellipse => (u / a).powi(2) + (v / b).powi(2) <= 1.0,
        }
    }
}

/// One rendered sample: binary pixels, the matching foreground mask, and the
/// spec it was rendered from (absent for images loaded from disk).
#[derive(Debug, Clone)]
pub struct SampleImage {
    pub id: String,
    pub pixels: Array2<f64>,
    pub mask: Array2<bool>,
    pub spec: Option<ShapeSpec>,
}

impl SampleImage {
    pub fn height(&self) -> usize {
        self.pixels.nrows()
    }

    pub fn width(&self) -> usize {
        self.pixels.ncols()
    }

    /// Load from a PGM file; pixels map to v/255 and the mask marks v = 255.
    pub fn from_pgm(path: &Path, id: impl Into<String>) -> Result<Self> {
        let raw = pnm::read_pgm(path)?;
        let pixels = raw.mapv(|v| v as f64 / 255.0);
        let mask = raw.mapv(|v| v == 255);
        Ok(SampleImage {
            id: id.into(),
            pixels,
            mask,
            spec: None,
        })
    }

    /// Write as binary PGM with foreground 255.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let bytes = self.pixels.mapv(|v| (v * 255.0 + 0.5).floor() as u8);
        pnm::write_pgm(path, &bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: String,
    pub group: Group,
    pub subgroup: String,
    /// Image path relative to the manifest file's directory.
    pub path: PathBuf,
}

/// Ordered listing of generated samples with their group/subgroup tags.
#[derive(Debug, Clone, Default)]
pub struct GroupManifest {
    pub entries: Vec<ManifestEntry>,
    pub seed: u64,
}

impl GroupManifest {
    /// Sample counts per (group, subgroup).
    pub fn counts(&self) -> BTreeMap<(Group, String), usize> {
        let mut counts = BTreeMap::new();
        for e in &self.entries {
            *counts.entry((e.group, e.subgroup.clone())).or_insert(0) += 1;
        }
        counts
    }

    /// Append another manifest's entries, rejecting duplicate ids.
    pub fn merge(&mut self, other: GroupManifest) -> Result<()> {
        for e in other.entries {
            if self.entries.iter().any(|x| x.id == e.id) {
                return Err(Error::Config(format!("duplicate sample id {:?}", e.id)));
            }
            self.entries.push(e);
        }
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        w.write_record(["id", "group", "subgroup", "path"])
            .map_err(|e| Error::Format(e.to_string()))?;
        for e in &self.entries {
            w.write_record([
                e.id.as_str(),
                &e.group.to_string(),
                e.subgroup.as_str(),
                &e.path.display().to_string(),
            ])
            .map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let mut entries = Vec::new();
        for record in r.records() {
            let record = record.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            if record.len() != 4 {
                return Err(Error::Format(format!(
                    "{}: expected 4 columns, got {}",
                    path.display(),
                    record.len()
                )));
            }
            entries.push(ManifestEntry {
                id: record[0].to_string(),
                group: record[1].parse()?,
                subgroup: record[2].to_string(),
                path: PathBuf::from(&record[3]),
            });
        }
        Ok(GroupManifest { entries, seed: 0 })
    }
}

/// Rasterize one shape into a fresh image.
///
/// Only the rows and columns intersecting the circumscribing circle are
/// scanned; the full-frame inclusion test is the oracle the tests compare
/// against.
pub fn render_shape(
    spec: &ShapeSpec,
    height: usize,
    width: usize,
    id: impl Into<String>,
) -> Result<SampleImage> {
    spec.validate(height, width)?;
    let mut pixels = Array2::zeros((height, width));
    let mut mask = Array2::from_elem((height, width), false);

    let r = spec.circumradius();
    let lo = |c: f64| ((c - r) - 0.5).ceil().max(0.0) as usize;
    let hi = |c: f64, dim: usize| (((c + r) - 0.5).floor() as usize).min(dim - 1);
    for row in lo(spec.center_y)..=hi(spec.center_y, height) {
        for col in lo(spec.center_x)..=hi(spec.center_x, width) {
            if spec.contains(col as f64 + 0.5, row as f64 + 0.5) {
                pixels[[row, col]] = 1.0;
                mask[[row, col]] = true;
            }
        }
    }

    Ok(SampleImage {
        id: id.into(),
        pixels,
        mask,
        spec: Some(*spec),
    })
}

/// Uniform sampling ranges for generated shapes. Half extents are drawn from
/// `[extent_lo, extent_hi]`; centers are drawn uniformly over every legal
/// position for the drawn extents.
#[derive(Debug, Clone, Copy)]
pub struct SampleRanges {
    pub extent_lo: f64,
    pub extent_hi: f64,
}

impl Default for SampleRanges {
    fn default() -> Self {
        SampleRanges {
            extent_lo: 6.0,
            extent_hi: 12.0,
        }
    }
}

/// Draw one shape spec from substream `index` of `seed`.
fn draw_spec(
    kind: ShapeKind,
    seed: u64,
    index: u64,
    height: usize,
    width: usize,
    ranges: &SampleRanges,
) -> ShapeSpec {
    let mut rng = rng::stream(seed, index);
    let (lo, hi) = (ranges.extent_lo, ranges.extent_hi);
    let a = rng::uniform_f64(&mut rng, lo, hi);
    let (b, rotation) = match kind {
        ShapeKind::Square => (a, rng::uniform_f64(&mut rng, 0.0, std::f64::consts::FRAC_PI_2)),
        ShapeKind::Ellipse => (
            rng::uniform_f64(&mut rng, lo, hi),
            rng::uniform_f64(&mut rng, 0.0, std::f64::consts::PI),
        ),
    };
    let mut spec = ShapeSpec {
        kind,
        center_x: 0.0,
        center_y: 0.0,
        half_extent_a: a,
        half_extent_b: b,
        rotation,
    };
    let r = spec.circumradius();
    spec.center_x = rng::uniform_f64(&mut rng, r + 1.0, width as f64 - 1.0 - r);
    spec.center_y = rng::uniform_f64(&mut rng, r + 1.0, height as f64 - 1.0 - r);
    spec
}

/// Generate `count` samples for one group.
///
/// `kind_counts` maps subgroup labels ("square", "ellipse") to how many
/// samples each contributes; labels are assigned in sorted order, and every
/// sample's randomness comes from substream `(seed, index)`, so generation is
/// a pure function of its arguments.
pub fn generate_group(
    group: Group,
    count: usize,
    kind_counts: &BTreeMap<String, usize>,
    seed: u64,
    height: usize,
    width: usize,
) -> Result<(Vec<SampleImage>, GroupManifest)> {
    let total: usize = kind_counts.values().sum();
    if total != count {
        return Err(Error::Config(format!(
            "subgroup counts sum to {total}, expected {count}"
        )));
    }
    let ranges = SampleRanges::default();
    let prefix = match group {
        Group::X => "x",
        Group::Y => "y",
    };

    let mut images = Vec::with_capacity(count);
    let mut entries = Vec::with_capacity(count);
    let mut index = 0u64;
    for (label, &n) in kind_counts {
        let kind = ShapeKind::from_subgroup(label)?;
        for _ in 0..n {
            let id = format!("{prefix}{index:04}");
            let spec = draw_spec(kind, seed, index, height, width, &ranges);
            images.push(render_shape(&spec, height, width, &id)?);
            entries.push(ManifestEntry {
                id,
                group,
                subgroup: label.clone(),
                path: PathBuf::from(format!("images/{prefix}{index:04}.pgm")),
            });
            index += 1;
        }
    }
    Ok((images, GroupManifest { entries, seed }))
}

/// Write images under `dir` following the manifest's relative paths, then the
/// manifest itself as `manifest.csv`. Returns the manifest path.
pub fn save_dataset(
    dir: &Path,
    images: &[SampleImage],
    manifest: &GroupManifest,
) -> Result<PathBuf> {
    if images.len() != manifest.entries.len() {
        return Err(Error::Config(format!(
            "{} images for {} manifest entries",
            images.len(),
            manifest.entries.len()
        )));
    }
    for (image, entry) in images.iter().zip(&manifest.entries) {
        let path = dir.join(&entry.path);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
        image.write_pgm(&path)?;
    }
    let manifest_path = dir.join("manifest.csv");
    manifest.write_csv(&manifest_path)?;
    Ok(manifest_path)
}

/// Load every image referenced by a manifest, resolving relative paths
/// against `base`. Fails with the offending sample id on unreadable files.
pub fn load_images(manifest: &GroupManifest, base: &Path) -> Result<Vec<SampleImage>> {
    manifest
        .entries
        .iter()
        .map(|e| {
            SampleImage::from_pgm(&base.join(&e.path), &e.id)
                .map_err(|err| Error::io(
                    format!("sample {} ({})", e.id, e.path.display()),
                    std::io::Error::other(err.to_string()),
                ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn centered_square(half: f64) -> ShapeSpec {
        ShapeSpec {
            kind: ShapeKind::Square,
            center_x: 32.0,
            center_y: 32.0,
            half_extent_a: half,
            half_extent_b: half,
            rotation: 0.0,
        }
    }

    /// Full-frame rasterization oracle: the inclusion test applied to every
    /// pixel center, with no bounding-box shortcut.
    fn oracle_mask(spec: &ShapeSpec, height: usize, width: usize) -> Array2<bool> {
        let mut mask = Array2::from_elem((height, width), false);
        for r in 0..height {
            for c in 0..width {
                mask[[r, c]] = spec.contains(c as f64 + 0.5, r as f64 + 0.5);
            }
        }
        mask
    }

    #[test]
    fn axis_aligned_square_covers_exact_rectangle() {
        let img = render_shape(&centered_square(8.0), 64, 64, "sq").unwrap();
        for r in 0..64 {
            for c in 0..64 {
                let inside = (24..=39).contains(&r) && (24..=39).contains(&c);
                assert_eq!(img.mask[[r, c]], inside, "pixel ({r}, {c})");
                assert_eq!(img.pixels[[r, c]], if inside { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn ellipse_area_close_to_analytic() {
        let spec = ShapeSpec {
            kind: ShapeKind::Ellipse,
            center_x: 32.0,
            center_y: 32.0,
            half_extent_a: 10.0,
            half_extent_b: 5.0,
            rotation: 0.0,
        };
        let img = render_shape(&spec, 64, 64, "el").unwrap();
        let count = img.mask.iter().filter(|&&m| m).count() as f64;
        let analytic = std::f64::consts::PI * 10.0 * 5.0;
        assert!(
            (count - analytic).abs() <= 0.05 * analytic,
            "count {count} vs analytic {analytic}"
        );
    }

    #[test]
    fn corner_most_legal_square_stays_in_bounds() {
        let r = (4.0f64).hypot(4.0);
        let spec = ShapeSpec {
            kind: ShapeKind::Square,
            center_x: r + 1.0,
            center_y: r + 1.0,
            half_extent_a: 4.0,
            half_extent_b: 4.0,
            rotation: 0.0,
        };
        let img = render_shape(&spec, 64, 64, "corner").unwrap();
        assert!(img.mask.iter().any(|&m| m));
        assert_eq!(img.mask, oracle_mask(&spec, 64, 64));
    }

    #[test]
    fn out_of_bounds_spec_is_rejected() {
        let mut spec = centered_square(8.0);
        spec.center_x = 5.0;
        assert!(matches!(render_shape(&spec, 64, 64, "oob"), Err(Error::Bounds(_))));
        spec = centered_square(3.0);
        assert!(matches!(render_shape(&spec, 64, 64, "tiny"), Err(Error::Bounds(_))));
    }

    #[test]
    fn group_generation_is_deterministic_and_counts_match() {
        let counts: BTreeMap<String, usize> =
            [("square".to_string(), 5), ("ellipse".to_string(), 7)].into();
        let (imgs1, man1) = generate_group(Group::Y, 12, &counts, 9, 64, 64).unwrap();
        let (imgs2, man2) = generate_group(Group::Y, 12, &counts, 9, 64, 64).unwrap();
        assert_eq!(imgs1.len(), 12);
        for (a, b) in imgs1.iter().zip(&imgs2) {
            assert_eq!(a.pixels, b.pixels);
            assert_eq!(a.id, b.id);
        }
        assert_eq!(man1.counts(), man2.counts());
        assert_eq!(man1.counts()[&(Group::Y, "ellipse".to_string())], 7);
        assert_eq!(man1.counts()[&(Group::Y, "square".to_string())], 5);

        let ids: std::collections::BTreeSet<_> =
            man1.entries.iter().map(|e| e.id.clone()).collect();
        assert_eq!(ids.len(), 12);
    }

    #[test]
    fn inconsistent_counts_are_rejected() {
        let counts: BTreeMap<String, usize> = [("square".to_string(), 5)].into();
        assert!(matches!(
            generate_group(Group::X, 6, &counts, 1, 64, 64),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn generated_images_have_foreground_and_background() {
        let counts: BTreeMap<String, usize> =
            [("square".to_string(), 10), ("ellipse".to_string(), 10)].into();
        let (imgs, _) = generate_group(Group::X, 20, &counts, 3, 64, 64).unwrap();
        for img in &imgs {
            let fg = img.mask.iter().filter(|&&m| m).count();
            assert!(fg > 0, "{} has empty foreground", img.id);
            assert!(fg < 64 * 64, "{} has empty background", img.id);
        }
    }

    #[test]
    fn dataset_round_trips_through_pgm_and_csv() {
        let dir = tempfile::tempdir().unwrap();
        let counts: BTreeMap<String, usize> = [("ellipse".to_string(), 3)].into();
        let (imgs, man) = generate_group(Group::X, 3, &counts, 4, 64, 64).unwrap();
        let manifest_path = save_dataset(dir.path(), &imgs, &man).unwrap();

        let loaded_man = GroupManifest::read_csv(&manifest_path).unwrap();
        assert_eq!(loaded_man.entries, man.entries);
        let loaded = load_images(&loaded_man, dir.path()).unwrap();
        for (orig, back) in imgs.iter().zip(&loaded) {
            assert_eq!(orig.pixels, back.pixels);
            assert_eq!(orig.mask, back.mask);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(120))]

        /// Rendered masks equal the full-frame inclusion-test oracle.
        #[test]
        fn rendered_mask_matches_oracle(
            kind_square in any::<bool>(),
            a in 4.0f64..14.0,
            b in 4.0f64..14.0,
            rot in 0.0f64..std::f64::consts::PI,
            cx01 in 0.0f64..1.0,
            cy01 in 0.0f64..1.0,
        ) {
            let kind = if kind_square { ShapeKind::Square } else { ShapeKind::Ellipse };
            let (a, b, rot) = match kind {
                ShapeKind::Square => (a, a, rot / 2.0),
                ShapeKind::Ellipse => (a, b, rot),
            };
            let mut spec = ShapeSpec {
                kind, center_x: 0.0, center_y: 0.0,
                half_extent_a: a, half_extent_b: b, rotation: rot,
            };
            let r = spec.circumradius();
            spec.center_x = r + 1.0 + cx01 * (64.0 - 2.0 * (r + 1.0));
            spec.center_y = r + 1.0 + cy01 * (64.0 - 2.0 * (r + 1.0));

            let img = render_shape(&spec, 64, 64, "p").unwrap();
            prop_assert_eq!(&img.mask, &oracle_mask(&spec, 64, 64));
            prop_assert!(img.mask.iter().any(|&m| m));
        }
    }
}
