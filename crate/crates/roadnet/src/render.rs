//! Map rendering: tileset loading and synthesis, grid compositing, and
//! aligned segmentation masks.
//!
//! A tile asset is an RGB image plus three binary masks (road surface,
//! red stop lines, yellow lane lines). Tilesets only need one asset per
//! rotation class on disk; the loader closes the set under 90-degree
//! rotation and refuses sets that still miss codes. The built-in
//! synthetic tileset paints six canonical tiles with a painter that is
//! symmetric per direction, so rotated codes are pixel-exact rotations
//! of their base images.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use image::{imageops, GrayImage, Luma, Rgb, RgbImage};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::grid::Grid;
use crate::metrics::{full_report, MetricReport};
use crate::tiles::{Direction, TileCode};

/// Mask value for "on"; masks are strictly 0 or 255.
pub const MASK_ON: u8 = 255;

/// Smallest supported tile edge, in pixels.
pub const MIN_TILE_PX: u32 = 16;

/// Errors from tileset loading and map output.
#[derive(Debug, Error)]
pub enum RenderError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("tile {code} layer {layer} is {width}x{height}, expected {expected}x{expected}")]
    SizeMismatch {
        code: u8,
        layer: &'static str,
        width: u32,
        height: u32,
        expected: u32,
    },
    #[error("tile {code} layer {layer} holds value {value}; masks must be 0 or 255")]
    NonBinaryMask {
        code: u8,
        layer: &'static str,
        value: u8,
    },
    #[error("tileset misses codes {missing:?} even after rotation closure")]
    MissingCodes { missing: Vec<u8> },
}

/// RGB tile plus its three aligned binary masks.
#[derive(Clone, Debug)]
pub struct TileAsset {
    pub code: TileCode,
    pub rgb: RgbImage,
    pub road: GrayImage,
    pub red: GrayImage,
    pub yellow: GrayImage,
}

impl TileAsset {
    /// 90-degree clockwise rotation of all four layers, re-keyed to the
    /// rotated code.
    pub fn rotate_cw(&self) -> TileAsset {
        TileAsset {
            code: self.code.rotate_cw(),
            rgb: imageops::rotate90(&self.rgb),
            road: imageops::rotate90(&self.road),
            red: imageops::rotate90(&self.red),
            yellow: imageops::rotate90(&self.yellow),
        }
    }
}

/// Tile assets per code, closed under quarter-turn rotation. Codes can
/// carry several variants; explicitly provided art sorts before
/// synthesized rotations.
pub struct TileSet {
    tile_px: u32,
    assets: BTreeMap<u8, Vec<TileAsset>>,
}

impl TileSet {
    fn from_base_assets(tile_px: u32, bases: Vec<TileAsset>) -> Result<TileSet, RenderError> {
        let mut assets: BTreeMap<u8, Vec<TileAsset>> = BTreeMap::new();
        for base in &bases {
            assets
                .entry(base.code.value())
                .or_default()
                .push(base.clone());
        }
        for base in bases {
            let mut turned = base;
            for _ in 0..3 {
                turned = turned.rotate_cw();
                assets
                    .entry(turned.code.value())
                    .or_default()
                    .push(turned.clone());
            }
        }
        let missing: Vec<u8> = (0..=TileCode::MAX)
            .filter(|code| !assets.contains_key(code))
            .collect();
        if !missing.is_empty() {
            return Err(RenderError::MissingCodes { missing });
        }
        Ok(TileSet { tile_px, assets })
    }

    /// Edge length of every tile, in pixels.
    pub fn tile_px(&self) -> u32 {
        self.tile_px
    }

    /// The primary asset for a code.
    pub fn asset(&self, code: TileCode) -> &TileAsset {
        &self.assets[&code.value()][0]
    }

    /// Number of stored variants for a code.
    pub fn variant_count(&self, code: TileCode) -> usize {
        self.assets[&code.value()].len()
    }

    /// A uniformly random variant for a code.
    pub fn pick_variant<Rg: Rng + ?Sized>(&self, code: TileCode, rng: &mut Rg) -> &TileAsset {
        let variants = &self.assets[&code.value()];
        &variants[rng.random_range(0..variants.len())]
    }
}

fn open_image(path: &Path) -> Result<image::DynamicImage, RenderError> {
    image::open(path).map_err(|source| RenderError::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn check_size(
    code: u8,
    layer: &'static str,
    width: u32,
    height: u32,
    expected: u32,
) -> Result<(), RenderError> {
    if width != expected || height != expected {
        return Err(RenderError::SizeMismatch {
            code,
            layer,
            width,
            height,
            expected,
        });
    }
    Ok(())
}

fn load_mask(
    dir: &Path,
    code: u8,
    layer: &'static str,
    expected: u32,
) -> Result<GrayImage, RenderError> {
    let mask = open_image(&dir.join(format!("{layer}.png")))?.to_luma8();
    check_size(code, layer, mask.width(), mask.height(), expected)?;
    if let Some(&value) = mask.iter().find(|&&v| v != 0 && v != MASK_ON) {
        return Err(RenderError::NonBinaryMask { code, layer, value });
    }
    Ok(mask)
}

/// Loads a tileset directory: one subdirectory per decimal tile code,
/// each holding `rgb.png`, `road.png`, `red.png`, and `yellow.png`.
/// Codes without art are synthesized by rotating what is present; the
/// set must cover all 16 codes afterwards.
pub fn load_tileset(dir: &Path) -> Result<TileSet, RenderError> {
    let entries = fs::read_dir(dir).map_err(|source| RenderError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut code_dirs: Vec<(u8, PathBuf)> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| RenderError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let name = entry.file_name();
        if let Some(code) = name.to_str().and_then(|n| n.parse::<u8>().ok()) {
            if code <= TileCode::MAX && entry.path().is_dir() {
                code_dirs.push((code, entry.path()));
            }
        }
    }
    code_dirs.sort();
    let mut tile_px = 0;
    let mut bases = Vec::new();
    for (code, code_dir) in code_dirs {
        let rgb = open_image(&code_dir.join("rgb.png"))?.to_rgb8();
        if tile_px == 0 {
            tile_px = rgb.width();
        }
        check_size(code, "rgb", rgb.width(), rgb.height(), tile_px)?;
        let road = load_mask(&code_dir, code, "road", tile_px)?;
        let red = load_mask(&code_dir, code, "red", tile_px)?;
        let yellow = load_mask(&code_dir, code, "yellow", tile_px)?;
        bases.push(TileAsset {
            code: TileCode::new(code).expect("validated above"),
            rgb,
            road,
            red,
            yellow,
        });
    }
    if bases.is_empty() {
        return Err(RenderError::MissingCodes {
            missing: (0..=TileCode::MAX).collect(),
        });
    }
    TileSet::from_base_assets(tile_px, bases)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Bg,
    Road,
    White,
    Yellow,
    Red,
}

struct Palette {
    bg: Rgb<u8>,
    road: Rgb<u8>,
    white: Rgb<u8>,
    yellow: Rgb<u8>,
    red: Rgb<u8>,
}

fn jitter<Rg: Rng + ?Sized>(rng: &mut Rg, base: [u8; 3], spread: i16) -> Rgb<u8> {
    let mut out = [0u8; 3];
    for (o, b) in out.iter_mut().zip(base) {
        let v = b as i16 + rng.random_range(-spread..=spread);
        *o = v.clamp(0, 255) as u8;
    }
    Rgb(out)
}

/// Paints one tile into a class buffer. The painter treats all four
/// directions identically and keeps every cross-road feature symmetric
/// about the road axis, which makes the result commute with rotation.
fn paint_classes(code: TileCode, t: usize) -> Vec<Class> {
    let mut buf = vec![Class::Bg; t * t];
    if code.is_empty() {
        return buf;
    }
    let lo = t / 4;
    let hi = t - lo;
    let stripe = (t / 32).max(2);
    let dash_len = (t / 16).max(3) as u64;
    let bar = (t / 16).max(3);
    let yellow_w = (t / 24).max(2);
    let yl0 = (t - yellow_w) / 2;
    let yl1 = t - yl0;
    let degree = code.degree();
    // Dashes run to the tile center on through-roads and dead ends but
    // stop at the junction square of a crossing.
    let dash_reach = if degree <= 2 { t.div_ceil(2) } else { lo };

    let put = |buf: &mut Vec<Class>, d: Direction, c: usize, l: usize, class: Class| {
        let (x, y) = match d {
            Direction::North => (l, c),
            Direction::East => (t - 1 - c, l),
            Direction::South => (l, t - 1 - c),
            Direction::West => (c, l),
        };
        buf[y * t + x] = class;
    };

    for y in lo..hi {
        for x in lo..hi {
            buf[y * t + x] = Class::Road;
        }
    }
    for d in Direction::ALL {
        if !code.connects(d) {
            continue;
        }
        for c in 0..lo {
            for l in lo..hi {
                put(&mut buf, d, c, l, Class::Road);
            }
        }
        for c in 0..lo {
            for l in (lo..lo + stripe).chain(hi - stripe..hi) {
                put(&mut buf, d, c, l, Class::White);
            }
        }
        for c in 0..dash_reach {
            let half_dist = (2 * c as i64 + 1 - t as i64).unsigned_abs();
            if (half_dist / (2 * dash_len)).is_multiple_of(2) {
                for l in yl0..yl1 {
                    put(&mut buf, d, c, l, Class::Yellow);
                }
            }
        }
        if degree >= 3 {
            for c in lo - bar..lo {
                for l in lo..hi {
                    put(&mut buf, d, c, l, Class::Red);
                }
            }
        }
    }
    buf
}

fn asset_from_classes(code: TileCode, t: u32, classes: &[Class], palette: &Palette) -> TileAsset {
    let class_at = |x: u32, y: u32| classes[(y * t + x) as usize];
    TileAsset {
        code,
        rgb: RgbImage::from_fn(t, t, |x, y| match class_at(x, y) {
            Class::Bg => palette.bg,
            Class::Road => palette.road,
            Class::White => palette.white,
            Class::Yellow => palette.yellow,
            Class::Red => palette.red,
        }),
        road: GrayImage::from_fn(t, t, |x, y| {
            Luma([if class_at(x, y) == Class::Bg {
                0
            } else {
                MASK_ON
            }])
        }),
        red: GrayImage::from_fn(t, t, |x, y| {
            Luma([if class_at(x, y) == Class::Red {
                MASK_ON
            } else {
                0
            }])
        }),
        yellow: GrayImage::from_fn(t, t, |x, y| {
            Luma([if class_at(x, y) == Class::Yellow {
                MASK_ON
            } else {
                0
            }])
        }),
    }
}

/// Canonical codes the synthetic painter draws directly; one per
/// rotation class.
pub const CANONICAL_CODES: [u8; 6] = [0, 8, 10, 6, 14, 15];

/// Builds the synthetic tileset: dark roads with white edge stripes,
/// dashed yellow center lines, and red stop bars at crossing entries.
/// The RNG only jitters the palette, never per-pixel content, so every
/// tile keeps the symmetry the rotation closure relies on.
pub fn synth_tileset<Rg: Rng + ?Sized>(tile_px: u32, rng: &mut Rg) -> TileSet {
    assert!(
        tile_px >= MIN_TILE_PX,
        "tiles below {MIN_TILE_PX}px lose their markings"
    );
    let palette = Palette {
        bg: jitter(rng, [46, 68, 44], 8),
        road: jitter(rng, [52, 52, 56], 6),
        white: jitter(rng, [235, 235, 232], 6),
        yellow: jitter(rng, [232, 196, 48], 8),
        red: jitter(rng, [206, 48, 44], 8),
    };
    let bases = CANONICAL_CODES
        .iter()
        .map(|&code| {
            let code = TileCode::new(code).expect("canonical codes are valid");
            let classes = paint_classes(code, tile_px as usize);
            asset_from_classes(code, tile_px, &classes, &palette)
        })
        .collect();
    TileSet::from_base_assets(tile_px, bases).expect("canonical set covers all codes")
}

/// Fully composed map layers plus the grid and metrics they came from.
pub struct RenderedMap {
    pub rgb: RgbImage,
    pub road_mask: GrayImage,
    pub red_mask: GrayImage,
    pub yellow_mask: GrayImage,
    pub grid: Grid,
    pub report: MetricReport,
}

impl RenderedMap {
    /// Single-channel class image: 0 background, 1 road, 2 stop line,
    /// 3 lane line. Stop lines shadow lane lines, which shadow road.
    pub fn labels(&self) -> GrayImage {
        GrayImage::from_fn(self.rgb.width(), self.rgb.height(), |x, y| {
            let label = if self.red_mask.get_pixel(x, y)[0] == MASK_ON {
                2
            } else if self.yellow_mask.get_pixel(x, y)[0] == MASK_ON {
                3
            } else if self.road_mask.get_pixel(x, y)[0] == MASK_ON {
                1
            } else {
                0
            };
            Luma([label])
        })
    }

    /// Writes `map_rgb.png`, the three mask images, `labels.png`, and a
    /// `map.json` with the grid and its metrics.
    pub fn save(&self, dir: &Path) -> Result<(), RenderError> {
        fs::create_dir_all(dir).map_err(|source| RenderError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let save_png = |name: &str, img: &dyn Fn(&Path) -> image::ImageResult<()>| {
            let path = dir.join(name);
            img(&path).map_err(|source| RenderError::Image { path, source })
        };
        save_png("map_rgb.png", &|p| self.rgb.save(p))?;
        save_png("mask_road.png", &|p| self.road_mask.save(p))?;
        save_png("mask_red.png", &|p| self.red_mask.save(p))?;
        save_png("mask_yellow.png", &|p| self.yellow_mask.save(p))?;
        save_png("labels.png", &|p| self.labels().save(p))?;
        #[derive(Serialize)]
        struct MapDoc<'a> {
            grid: &'a Grid,
            metrics: &'a MetricReport,
        }
        let doc = serde_json::to_string_pretty(&MapDoc {
            grid: &self.grid,
            metrics: &self.report,
        })
        .expect("map document serializes");
        let path = dir.join("map.json");
        fs::write(&path, doc).map_err(|source| RenderError::Io { path, source })
    }
}

fn blit(map: &mut RenderedMap, asset: &TileAsset, row: usize, col: usize, t: u32) {
    let (x, y) = (col as i64 * t as i64, row as i64 * t as i64);
    imageops::replace(&mut map.rgb, &asset.rgb, x, y);
    imageops::replace(&mut map.road_mask, &asset.road, x, y);
    imageops::replace(&mut map.red_mask, &asset.red, x, y);
    imageops::replace(&mut map.yellow_mask, &asset.yellow, x, y);
}

fn empty_map(grid: &Grid, t: u32) -> RenderedMap {
    let (w, h) = (grid.width() as u32 * t, grid.height() as u32 * t);
    RenderedMap {
        rgb: RgbImage::new(w, h),
        road_mask: GrayImage::new(w, h),
        red_mask: GrayImage::new(w, h),
        yellow_mask: GrayImage::new(w, h),
        grid: grid.clone(),
        report: full_report(grid),
    }
}

/// Composites `grid` with each code's primary asset.
pub fn render(grid: &Grid, tileset: &TileSet) -> RenderedMap {
    let t = tileset.tile_px();
    let mut map = empty_map(grid, t);
    for r in 0..grid.height() {
        for c in 0..grid.width() {
            blit(&mut map, tileset.asset(grid.get(r, c)), r, c, t);
        }
    }
    map
}

/// Composites `grid`, drawing a uniformly random variant per cell.
pub fn render_with_variants<Rg: Rng + ?Sized>(
    grid: &Grid,
    tileset: &TileSet,
    rng: &mut Rg,
) -> RenderedMap {
    let t = tileset.tile_px();
    let mut map = empty_map(grid, t);
    for r in 0..grid.height() {
        for c in 0..grid.width() {
            blit(&mut map, tileset.pick_variant(grid.get(r, c), rng), r, c, t);
        }
    }
    map
}
