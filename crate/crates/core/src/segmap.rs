//! Label-raster segmentation maps: palette semantics, connected-component
//! region extraction, contours, and raster editing.
//!
//! A [`SegMap`] is a dense grid of small-integer label ids; a [`Palette`]
//! gives each label a semantic role (clothing, arms, ...) and a display
//! color. Logic is driven by roles, never by colors. Maps round-trip
//! losslessly through indexed 8-bit PNG (palette index = label id) plus a
//! JSON palette sidecar.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SegMapError {
    #[error("palette: {0}")]
    InvalidPalette(String),
    #[error("unknown label {0}")]
    UnknownLabel(u8),
    #[error("grid has {len} values but dimensions are {width}x{height}")]
    GridSizeMismatch { len: usize, width: u32, height: u32 },
    #[error("grid contains label {0} absent from the palette")]
    LabelNotInPalette(u8),
    #[error("unsupported png layout: {0}")]
    UnsupportedPng(String),
    #[error("png decode: {0}")]
    PngDecode(#[from] png::DecodingError),
    #[error("png encode: {0}")]
    PngEncode(#[from] png::EncodingError),
    #[error("palette json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Semantic meaning of a palette label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemanticRole {
    Background,
    Clothing,
    LeftArm,
    RightArm,
    SkinNeck,
    Face,
    Hair,
    LowerBody,
    Other,
}

impl SemanticRole {
    /// Compositing precedence: when an edited region is written back, a
    /// label only overwrites pixels whose current role has precedence at
    /// most its own. Arms, skin, face and hair sit above clothing, so the
    /// body is drawn over an enlarged garment while the garment may cover
    /// background and lower-body pixels.
    pub fn precedence(self) -> u8 {
        match self {
            SemanticRole::Background => 0,
            SemanticRole::Other => 1,
            SemanticRole::LowerBody => 1,
            SemanticRole::Clothing => 2,
            SemanticRole::LeftArm | SemanticRole::RightArm => 3,
            SemanticRole::SkinNeck => 4,
            SemanticRole::Face => 5,
            SemanticRole::Hair => 6,
        }
    }

    pub fn is_arm(self) -> bool {
        matches!(self, SemanticRole::LeftArm | SemanticRole::RightArm)
    }
}

impl fmt::Display for SemanticRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SemanticRole::Background => "background",
            SemanticRole::Clothing => "clothing",
            SemanticRole::LeftArm => "left_arm",
            SemanticRole::RightArm => "right_arm",
            SemanticRole::SkinNeck => "skin_neck",
            SemanticRole::Face => "face",
            SemanticRole::Hair => "hair",
            SemanticRole::LowerBody => "lower_body",
            SemanticRole::Other => "other",
        };
        f.write_str(name)
    }
}

/// Integer pixel location. Orders row-major (y, then x) so that sorted
/// pixel lists match raster scan order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pixel {
    pub x: i32,
    pub y: i32,
}

impl Pixel {
    pub fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    /// The 4 edge-sharing neighbors.
    pub fn neighbors4(self) -> [Pixel; 4] {
        [
            Pixel::new(self.x, self.y - 1),
            Pixel::new(self.x - 1, self.y),
            Pixel::new(self.x + 1, self.y),
            Pixel::new(self.x, self.y + 1),
        ]
    }

    /// The 8 surrounding neighbors.
    pub fn neighbors8(self) -> [Pixel; 8] {
        [
            Pixel::new(self.x - 1, self.y - 1),
            Pixel::new(self.x, self.y - 1),
            Pixel::new(self.x + 1, self.y - 1),
            Pixel::new(self.x - 1, self.y),
            Pixel::new(self.x + 1, self.y),
            Pixel::new(self.x - 1, self.y + 1),
            Pixel::new(self.x, self.y + 1),
            Pixel::new(self.x + 1, self.y + 1),
        ]
    }
}

impl Ord for Pixel {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Pixel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Pixel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Axis-aligned integer bounding box, inclusive on all sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub min_x: i32,
    pub min_y: i32,
    pub max_x: i32,
    pub max_y: i32,
}

impl Bounds {
    pub fn of_pixel(p: Pixel) -> Self {
        Self {
            min_x: p.x,
            min_y: p.y,
            max_x: p.x,
            max_y: p.y,
        }
    }

    pub fn include(&mut self, p: Pixel) {
        self.min_x = self.min_x.min(p.x);
        self.min_y = self.min_y.min(p.y);
        self.max_x = self.max_x.max(p.x);
        self.max_y = self.max_y.max(p.y);
    }

    pub fn union(self, other: Bounds) -> Bounds {
        Bounds {
            min_x: self.min_x.min(other.min_x),
            min_y: self.min_y.min(other.min_y),
            max_x: self.max_x.max(other.max_x),
            max_y: self.max_y.max(other.max_y),
        }
    }

    pub fn contains(&self, p: Pixel) -> bool {
        (self.min_x..=self.max_x).contains(&p.x) && (self.min_y..=self.max_y).contains(&p.y)
    }

    /// Center-to-center horizontal extent (max_x - min_x).
    pub fn width_extent(&self) -> i32 {
        self.max_x - self.min_x
    }

    /// Center-to-center vertical extent (max_y - min_y).
    pub fn height_extent(&self) -> i32 {
        self.max_y - self.min_y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaletteEntry {
    pub role: SemanticRole,
    pub color: [u8; 3],
}

/// Label-id to (role, display color) mapping.
///
/// Exactly one label carries the `clothing` role and exactly one carries
/// `background`; display colors are unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    entries: BTreeMap<u8, PaletteEntry>,
}

#[derive(Serialize, Deserialize)]
struct PaletteFile {
    entries: Vec<PaletteFileEntry>,
}

#[derive(Serialize, Deserialize)]
struct PaletteFileEntry {
    label: u8,
    role: SemanticRole,
    color: [u8; 3],
}

impl Palette {
    pub fn new(entries: impl IntoIterator<Item = (u8, PaletteEntry)>) -> Result<Self, SegMapError> {
        let mut map = BTreeMap::new();
        for (label, entry) in entries {
            if map.insert(label, entry).is_some() {
                return Err(SegMapError::InvalidPalette(format!(
                    "duplicate label {label}"
                )));
            }
        }
        let palette = Self { entries: map };
        palette.validate()?;
        Ok(palette)
    }

    fn validate(&self) -> Result<(), SegMapError> {
        let count = |role: SemanticRole| {
            self.entries
                .values()
                .filter(|entry| entry.role == role)
                .count()
        };
        if count(SemanticRole::Clothing) != 1 {
            return Err(SegMapError::InvalidPalette(format!(
                "expected exactly one clothing label, found {}",
                count(SemanticRole::Clothing)
            )));
        }
        if count(SemanticRole::Background) != 1 {
            return Err(SegMapError::InvalidPalette(format!(
                "expected exactly one background label, found {}",
                count(SemanticRole::Background)
            )));
        }
        let mut colors = HashSet::new();
        for entry in self.entries.values() {
            if !colors.insert(entry.color) {
                return Err(SegMapError::InvalidPalette(format!(
                    "duplicate display color {:?}",
                    entry.color
                )));
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (u8, &PaletteEntry)> {
        self.entries.iter().map(|(&label, entry)| (label, entry))
    }

    pub fn contains(&self, label: u8) -> bool {
        self.entries.contains_key(&label)
    }

    pub fn role_of(&self, label: u8) -> Option<SemanticRole> {
        self.entries.get(&label).map(|entry| entry.role)
    }

    pub fn labels_with_role(&self, role: SemanticRole) -> Vec<u8> {
        self.entries
            .iter()
            .filter(|(_, entry)| entry.role == role)
            .map(|(&label, _)| label)
            .collect()
    }

    pub fn clothing_label(&self) -> u8 {
        self.labels_with_role(SemanticRole::Clothing)[0]
    }

    pub fn background_label(&self) -> u8 {
        self.labels_with_role(SemanticRole::Background)[0]
    }

    pub fn skin_neck_label(&self) -> Option<u8> {
        self.labels_with_role(SemanticRole::SkinNeck).first().copied()
    }

    pub fn max_label(&self) -> u8 {
        *self.entries.keys().next_back().expect("palette non-empty")
    }

    pub fn from_json_str(json: &str) -> Result<Self, SegMapError> {
        let file: PaletteFile = serde_json::from_str(json)?;
        Self::new(file.entries.into_iter().map(|e| {
            (
                e.label,
                PaletteEntry {
                    role: e.role,
                    color: e.color,
                },
            )
        }))
    }

    pub fn to_json_string(&self) -> String {
        let file = PaletteFile {
            entries: self
                .entries
                .iter()
                .map(|(&label, entry)| PaletteFileEntry {
                    label,
                    role: entry.role,
                    color: entry.color,
                })
                .collect(),
        };
        let mut json = serde_json::to_string_pretty(&file).expect("palette serialization");
        json.push('\n');
        json
    }

    pub fn load(path: &Path) -> Result<Self, SegMapError> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), SegMapError> {
        fs::write(path, self.to_json_string())?;
        Ok(())
    }

    /// PLTE chunk bytes: RGB triples indexed by label id. Unused slots
    /// below the highest label are black; they never occur in a valid grid.
    fn plte_bytes(&self) -> Vec<u8> {
        let len = self.max_label() as usize + 1;
        let mut plte = vec![0u8; len * 3];
        for (&label, entry) in &self.entries {
            let at = label as usize * 3;
            plte[at..at + 3].copy_from_slice(&entry.color);
        }
        plte
    }
}

/// One 8-connected component of a single label.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    label: u8,
    pixels: Vec<Pixel>,
    contour: Vec<Pixel>,
    centroid: (f64, f64),
    bbox: Bounds,
}

impl Region {
    /// Builds a region from a pixel set (sorted and deduplicated here).
    /// Returns `None` for an empty set. Connectivity is not checked; use
    /// [`SegMap::extract_regions`] to obtain genuine components.
    pub fn from_pixels(label: u8, mut pixels: Vec<Pixel>) -> Option<Self> {
        pixels.sort_unstable();
        pixels.dedup();
        if pixels.is_empty() {
            return None;
        }
        let contour = contour_of(&pixels);
        let mut bbox = Bounds::of_pixel(pixels[0]);
        let (mut sum_x, mut sum_y) = (0.0, 0.0);
        for &p in &pixels {
            bbox.include(p);
            sum_x += p.x as f64;
            sum_y += p.y as f64;
        }
        let n = pixels.len() as f64;
        Some(Self {
            label,
            pixels,
            contour,
            centroid: (sum_x / n, sum_y / n),
            bbox,
        })
    }

    pub fn label(&self) -> u8 {
        self.label
    }

    /// Pixels in row-major order.
    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    /// Boundary pixels (those with a 4-neighbor outside the region), in
    /// row-major order.
    pub fn contour(&self) -> &[Pixel] {
        &self.contour
    }

    pub fn centroid(&self) -> (f64, f64) {
        self.centroid
    }

    pub fn bbox(&self) -> Bounds {
        self.bbox
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// The region moved rigidly by (dx, dy).
    pub fn translated(&self, dx: i32, dy: i32) -> Region {
        let shift = |p: &Pixel| Pixel::new(p.x + dx, p.y + dy);
        let mut bbox = self.bbox;
        bbox.min_x += dx;
        bbox.max_x += dx;
        bbox.min_y += dy;
        bbox.max_y += dy;
        Region {
            label: self.label,
            pixels: self.pixels.iter().map(shift).collect(),
            contour: self.contour.iter().map(shift).collect(),
            centroid: (self.centroid.0 + dx as f64, self.centroid.1 + dy as f64),
            bbox,
        }
    }
}

/// Pixels of `pixels` that have at least one 4-neighbor outside the set.
/// Input need not be sorted; output is row-major sorted.
pub fn contour_of(pixels: &[Pixel]) -> Vec<Pixel> {
    let mut sorted: Vec<Pixel> = pixels.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let Some(&first) = sorted.first() else {
        return Vec::new();
    };
    let mut bbox = Bounds::of_pixel(first);
    for &p in &sorted {
        bbox.include(p);
    }
    let gw = bbox.width_extent() as usize + 3; // 1-px margin on each side
    let gh = bbox.height_extent() as usize + 3;
    if gw.saturating_mul(gh) <= 8 * sorted.len() + 4096 {
        let mut grid = vec![false; gw * gh];
        let at = |p: Pixel| (p.y - bbox.min_y + 1) as usize * gw + (p.x - bbox.min_x + 1) as usize;
        for &p in &sorted {
            grid[at(p)] = true;
        }
        sorted
            .into_iter()
            .filter(|&p| {
                let i = at(p);
                !(grid[i - 1] && grid[i + 1] && grid[i - gw] && grid[i + gw])
            })
            .collect()
    } else {
        // Sparse set spread over a huge bbox: probe a hash set instead.
        let set: HashSet<Pixel> = sorted.iter().copied().collect();
        sorted
            .into_iter()
            .filter(|p| p.neighbors4().iter().any(|n| !set.contains(n)))
            .collect()
    }
}

/// Dense label raster with its palette.
#[derive(Debug, Clone, PartialEq)]
pub struct SegMap {
    width: u32,
    height: u32,
    labels: Vec<u8>,
    palette: Palette,
}

impl SegMap {
    pub fn new(
        width: u32,
        height: u32,
        labels: Vec<u8>,
        palette: Palette,
    ) -> Result<Self, SegMapError> {
        if labels.len() != width as usize * height as usize {
            return Err(SegMapError::GridSizeMismatch {
                len: labels.len(),
                width,
                height,
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| !palette.contains(l)) {
            return Err(SegMapError::LabelNotInPalette(bad));
        }
        Ok(Self {
            width,
            height,
            labels,
            palette,
        })
    }

    pub fn filled(
        width: u32,
        height: u32,
        label: u8,
        palette: Palette,
    ) -> Result<Self, SegMapError> {
        Self::new(
            width,
            height,
            vec![label; width as usize * height as usize],
            palette,
        )
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn palette(&self) -> &Palette {
        &self.palette
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn in_bounds(&self, p: Pixel) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as u32) < self.width && (p.y as u32) < self.height
    }

    fn index(&self, p: Pixel) -> usize {
        p.y as usize * self.width as usize + p.x as usize
    }

    /// Label at `p`, or `None` outside the raster.
    pub fn get(&self, p: Pixel) -> Option<u8> {
        self.in_bounds(p).then(|| self.labels[self.index(p)])
    }

    pub fn role_at(&self, p: Pixel) -> Option<SemanticRole> {
        self.get(p).and_then(|label| self.palette.role_of(label))
    }

    pub fn count_label(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn count_role(&self, role: SemanticRole) -> usize {
        let labels = self.palette.labels_with_role(role);
        self.labels
            .iter()
            .filter(|&&l| labels.contains(&l))
            .count()
    }

    /// All 8-connected components of the pixels whose label carries `role`,
    /// sorted by pixel count descending (ties: topmost, then leftmost bbox
    /// corner). Empty when the role is absent from the raster.
    pub fn extract_regions(&self, role: SemanticRole) -> Vec<Region> {
        let role_labels = self.palette.labels_with_role(role);
        let mask: Vec<bool> = self.labels.iter().map(|l| role_labels.contains(l)).collect();
        let mut regions: Vec<Region> = connected_components(&mask, self.width, self.height)
            .into_iter()
            .map(|pixels| {
                let label = self.labels[self.index(pixels[0])];
                Region::from_pixels(label, pixels).expect("component is non-empty")
            })
            .collect();
        regions.sort_by(|a, b| {
            b.len()
                .cmp(&a.len())
                .then_with(|| (a.bbox.min_y, a.bbox.min_x).cmp(&(b.bbox.min_y, b.bbox.min_x)))
        });
        regions
    }

    /// Sets `pixels` to `label`, overwriting whatever is there.
    /// Out-of-bounds pixels are silently clipped.
    pub fn write_region(&mut self, pixels: &[Pixel], label: u8) -> Result<(), SegMapError> {
        if !self.palette.contains(label) {
            return Err(SegMapError::UnknownLabel(label));
        }
        for &p in pixels {
            if self.in_bounds(p) {
                let at = self.index(p);
                self.labels[at] = label;
            }
        }
        Ok(())
    }

    /// Sets `pixels` to the fill label. Same mechanics as
    /// [`write_region`](Self::write_region); the distinct name marks intent
    /// (removing a region rather than drawing one).
    pub fn erase_region(&mut self, pixels: &[Pixel], fill: u8) -> Result<(), SegMapError> {
        self.write_region(pixels, fill)
    }

    /// Writes `label` onto `pixels` respecting the compositing order: a
    /// pixel is overwritten only when the incoming role's precedence is at
    /// least the current one. Out-of-bounds pixels are clipped. Returns the
    /// pixels actually written.
    pub fn composite_region(
        &mut self,
        pixels: &[Pixel],
        label: u8,
    ) -> Result<Vec<Pixel>, SegMapError> {
        let role = self
            .palette
            .role_of(label)
            .ok_or(SegMapError::UnknownLabel(label))?;
        let precedence = role.precedence();
        let mut written = Vec::new();
        for &p in pixels {
            if !self.in_bounds(p) {
                continue;
            }
            let at = self.index(p);
            let current = self
                .palette
                .role_of(self.labels[at])
                .expect("grid labels are in the palette");
            if precedence >= current.precedence() {
                self.labels[at] = label;
                written.push(p);
            }
        }
        Ok(written)
    }

    /// Relabels a vacated pixel set: the whole set becomes skin_neck when
    /// any skin_neck pixel borders it (8-adjacency, neighbors inside the
    /// set don't count), otherwise background. Returns the fill label used.
    pub fn fill_vacated(&mut self, pixels: &[Pixel]) -> u8 {
        let set: HashSet<Pixel> = pixels.iter().copied().collect();
        let fill = match self.palette.skin_neck_label() {
            Some(skin) => {
                let touches_skin = pixels.iter().any(|p| {
                    p.neighbors8()
                        .iter()
                        .any(|n| !set.contains(n) && self.get(*n) == Some(skin))
                });
                if touches_skin {
                    skin
                } else {
                    self.palette.background_label()
                }
            }
            None => self.palette.background_label(),
        };
        self.write_region(pixels, fill)
            .expect("fill label comes from the palette");
        fill
    }

    /// Encodes as an indexed 8-bit PNG whose palette index equals the label
    /// id. The display colors go into the PLTE chunk; semantics live in the
    /// JSON sidecar.
    pub fn to_png_bytes(&self) -> Result<Vec<u8>, SegMapError> {
        let mut out = Vec::new();
        {
            let mut encoder = png::Encoder::new(&mut out, self.width, self.height);
            encoder.set_color(png::ColorType::Indexed);
            encoder.set_depth(png::BitDepth::Eight);
            encoder.set_palette(self.palette.plte_bytes());
            let mut writer = encoder.write_header()?;
            writer.write_image_data(&self.labels)?;
        }
        Ok(out)
    }

    /// Decodes an indexed 8-bit PNG produced by [`to_png_bytes`]. The
    /// palette sidecar is authoritative for label semantics; the PNG's PLTE
    /// chunk is only for viewing.
    pub fn from_png_bytes(bytes: &[u8], palette: Palette) -> Result<Self, SegMapError> {
        let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
        decoder.set_transformations(png::Transformations::IDENTITY);
        let mut reader = decoder.read_info()?;
        let info = reader.info();
        if info.color_type != png::ColorType::Indexed || info.bit_depth != png::BitDepth::Eight {
            return Err(SegMapError::UnsupportedPng(format!(
                "expected 8-bit indexed, got {:?} {:?}",
                info.color_type, info.bit_depth
            )));
        }
        let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
        let frame = reader.next_frame(&mut buf)?;
        buf.truncate(frame.buffer_size());
        Self::new(frame.width, frame.height, buf, palette)
    }

    pub fn save_png(&self, path: &Path) -> Result<(), SegMapError> {
        fs::write(path, self.to_png_bytes()?)?;
        Ok(())
    }

    pub fn load_png(path: &Path, palette: Palette) -> Result<Self, SegMapError> {
        Self::from_png_bytes(&fs::read(path)?, palette)
    }
}

/// 8-connected components of `mask`, via two-pass union-find labeling.
/// Each component's pixels come back in row-major order.
fn connected_components(mask: &[bool], width: u32, height: u32) -> Vec<Vec<Pixel>> {
    let w = width as usize;
    let h = height as usize;
    debug_assert_eq!(mask.len(), w * h);

    // 0 = unlabeled; component ids start at 1.
    let mut ids = vec![0u32; mask.len()];
    let mut parent: Vec<u32> = vec![0];

    fn find(parent: &mut [u32], mut i: u32) -> u32 {
        while parent[i as usize] != i {
            parent[i as usize] = parent[parent[i as usize] as usize];
            i = parent[i as usize];
        }
        i
    }

    for y in 0..h {
        for x in 0..w {
            let at = y * w + x;
            if !mask[at] {
                continue;
            }
            // Previously visited neighbors under 8-connectivity.
            let mut best = 0u32;
            let mut consider = |nx: isize, ny: isize, ids: &[u32], parent: &mut Vec<u32>| {
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    return;
                }
                let nid = ids[ny as usize * w + nx as usize];
                if nid == 0 {
                    return;
                }
                let root = find(parent, nid);
                if best == 0 {
                    best = root;
                } else if root != best {
                    let (lo, hi) = (best.min(root), best.max(root));
                    parent[hi as usize] = lo;
                    best = lo;
                }
            };
            consider(x as isize - 1, y as isize - 1, &ids, &mut parent);
            consider(x as isize, y as isize - 1, &ids, &mut parent);
            consider(x as isize + 1, y as isize - 1, &ids, &mut parent);
            consider(x as isize - 1, y as isize, &ids, &mut parent);
            if best == 0 {
                let fresh = parent.len() as u32;
                parent.push(fresh);
                best = fresh;
            }
            ids[at] = best;
        }
    }

    let mut groups: BTreeMap<u32, Vec<Pixel>> = BTreeMap::new();
    for y in 0..h {
        for x in 0..w {
            let at = y * w + x;
            if ids[at] != 0 {
                let root = find(&mut parent, ids[at]);
                groups
                    .entry(root)
                    .or_default()
                    .push(Pixel::new(x as i32, y as i32));
            }
        }
    }
    groups.into_values().collect()
}
