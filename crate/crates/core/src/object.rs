//! Heightmap object models: ingestion, mesh rasterization and rescaling.
//!
//! An object is a single-valued height field resting on the table plane
//! (`z = 0`). Cell `(r, c)` covers `[c, c + 1) x [r, r + 1)` times the
//! resolution, and the object frame origin is the center of the grid.

use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kv::{KvDoc, KvWriter};

/// Object ids end up in file paths, scene ids and `;`-separated records.
pub fn validate_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !id.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "object id {id:?} must be non-empty and use only [A-Za-z0-9._-]"
        )))
    }
}

/// Size-to-mass rule and the range objects are rescaled into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleConfig {
    pub min_longest_side: f64,
    pub max_longest_side: f64,
    /// kg per meter of longest side.
    pub mass_per_meter: f64,
}

impl Default for RescaleConfig {
    fn default() -> Self {
        RescaleConfig {
            min_longest_side: 0.08,
            max_longest_side: 0.90,
            mass_per_meter: 1.0,
        }
    }
}

impl RescaleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_longest_side > 0.0
            && self.min_longest_side <= self.max_longest_side
            && self.mass_per_meter > 0.0)
        {
            return Err(Error::InvalidConfig(format!("bad rescale config {self:?}")));
        }
        Ok(())
    }

    pub fn mass_for(&self, longest_side: f64) -> f64 {
        self.mass_per_meter * longest_side
    }
}

/// Axis-aligned extents of the part of the grid above the table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extents {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Extents {
    pub fn longest(&self) -> f64 {
        self.x.max(self.y).max(self.z)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectModel {
    id: String,
    heights: Grid<f64>,
    resolution: f64,
    longest_side: f64,
    mass: f64,
}

impl ObjectModel {
    /// Validates the height field; the mass follows the default size rule.
    pub fn new(id: impl Into<String>, heights: Grid<f64>, resolution: f64) -> Result<Self> {
        let id = id.into();
        validate_id(&id)?;
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        if let Some((r, c, v)) = heights
            .indexed()
            .find(|&(_, _, v)| !(v.is_finite() && v >= 0.0))
        {
            return Err(Error::InvalidConfig(format!(
                "height at row {r}, col {c} must be finite and non-negative, got {v}"
            )));
        }
        let ext = extents(&heights, resolution).ok_or(Error::EmptyObject)?;
        let longest_side = ext.longest();
        Ok(ObjectModel {
            id,
            heights,
            resolution,
            longest_side,
            mass: RescaleConfig::default().mass_for(longest_side),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn heights(&self) -> &Grid<f64> {
        &self.heights
    }

    /// Meters per cell.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn longest_side(&self) -> f64 {
        self.longest_side
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn extents(&self) -> Extents {
        extents(&self.heights, self.resolution).expect("validated non-empty")
    }

    /// Height at a point in the object frame (meters), `0` off the grid.
    pub fn height_at(&self, x: f64, y: f64) -> f64 {
        let c = (x / self.resolution + self.heights.cols() as f64 / 2.0).floor();
        let r = (y / self.resolution + self.heights.rows() as f64 / 2.0).floor();
        if c < 0.0 || r < 0.0 {
            return 0.0;
        }
        self.heights
            .get_signed(r as isize, c as isize)
            .unwrap_or(0.0)
    }

    /// Corners (object frame, meters) of every occupied cell's square, reduced
    /// to the footprint's convex outline candidates.
    pub fn footprint_corners(&self) -> Vec<[f64; 2]> {
        let (rows, cols) = (self.heights.rows(), self.heights.cols());
        let (ox, oy) = (cols as f64 / 2.0, rows as f64 / 2.0);
        let mut out = Vec::new();
        for r in 0..rows {
            // Leftmost and rightmost occupied cells per row bound the footprint.
            let occupied: Vec<usize> = (0..cols)
                .filter(|&c| self.heights.get(r, c) > 0.0)
                .collect();
            let (Some(&first), Some(&last)) = (occupied.first(), occupied.last()) else {
                continue;
            };
            for c in [first, last + 1] {
                for rr in [r, r + 1] {
                    out.push([
                        (c as f64 - ox) * self.resolution,
                        (rr as f64 - oy) * self.resolution,
                    ]);
                }
            }
        }
        out
    }

    /// Isotropic rescale so the longest bounding-box side equals `longest_side`.
    pub fn rescaled_to(&self, longest_side: f64, cfg: &RescaleConfig) -> ObjectModel {
        let s = longest_side / self.longest_side;
        let heights = self.heights.map(|h| h * s);
        let resolution = self.resolution * s;
        ObjectModel {
            id: self.id.clone(),
            heights,
            resolution,
            longest_side,
            mass: cfg.mass_for(longest_side),
        }
    }

    /// Writes `<dir>/<id>.meta` and `<dir>/<id>.grid`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let meta = dir.join(format!("{}.meta", self.id));
        let grid = dir.join(format!("{}.grid", self.id));
        let mut kv = KvWriter::new();
        kv.put("id", &self.id)
            .put("resolution", self.resolution)
            .put("rows", self.heights.rows())
            .put("cols", self.heights.cols());
        std::fs::write(&meta, kv.finish()).map_err(|e| Error::io(&meta, e))?;
        let mut text = String::new();
        for r in 0..self.heights.rows() {
            let row: Vec<String> = (0..self.heights.cols())
                .map(|c| self.heights.get(r, c).to_string())
                .collect();
            text.push_str(&row.join(" "));
            text.push('\n');
        }
        std::fs::write(&grid, text).map_err(|e| Error::io(&grid, e))?;
        Ok(meta)
    }
}

fn extents(heights: &Grid<f64>, resolution: f64) -> Option<Extents> {
    let mut bounds: Option<(usize, usize, usize, usize)> = None;
    let mut zmax = 0.0f64;
    for (r, c, h) in heights.indexed() {
        if h > 0.0 {
            zmax = zmax.max(h);
            bounds = Some(match bounds {
                None => (r, r, c, c),
                Some((r0, r1, c0, c1)) => (r0.min(r), r1.max(r), c0.min(c), c1.max(c)),
            });
        }
    }
    let (r0, r1, c0, c1) = bounds?;
    Some(Extents {
        x: (c1 - c0 + 1) as f64 * resolution,
        y: (r1 - r0 + 1) as f64 * resolution,
        z: zmax,
    })
}

/// Draws a longest side uniformly in the configured range and rescales.
pub fn rescale_object<R: Rng + ?Sized>(
    model: &ObjectModel,
    rng: &mut R,
    cfg: &RescaleConfig,
) -> ObjectModel {
    let target = rng.random_range(cfg.min_longest_side..=cfg.max_longest_side);
    model.rescaled_to(target, cfg)
}

/// Reads an object from its metadata file (`id`, `resolution`, `rows`, `cols`,
/// optional `grid` file name) and the sibling whitespace-separated grid.
pub fn ingest_heightmap(meta_path: &Path) -> Result<ObjectModel> {
    let doc = KvDoc::read(meta_path)?;
    let id = doc.str("id")?.to_string();
    let resolution: f64 = doc.get("resolution")?;
    let rows: usize = doc.get("rows")?;
    let cols: usize = doc.get("cols")?;
    if rows == 0 || cols == 0 {
        return Err(doc.error("rows", "grid must have at least one row and column"));
    }
    let grid_path = match doc.opt_str("grid") {
        Some(name) => meta_path.with_file_name(name),
        None => meta_path.with_extension("grid"),
    };
    let text = std::fs::read_to_string(&grid_path).map_err(|e| Error::io(&grid_path, e))?;
    let heights = parse_grid(&grid_path, &text, rows, cols)?;
    ObjectModel::new(id, heights, resolution).map_err(|e| match e {
        Error::InvalidConfig(msg) => Error::parse(&grid_path, 0, msg),
        other => other,
    })
}

fn parse_grid(path: &Path, text: &str, rows: usize, cols: usize) -> Result<Grid<f64>> {
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0usize;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        seen += 1;
        if seen > rows {
            return Err(Error::parse(path, i + 1, format!("more than {rows} rows")));
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(path, i + 1, format!("not a number: {tok:?}")))?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::parse(
                    path,
                    i + 1,
                    format!("height must be finite and >= 0, got {tok}"),
                ));
            }
            data.push(v);
        }
        let n = data.len() - before;
        if n != cols {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected {cols} values, found {n}"),
            ));
        }
    }
    if seen != rows {
        return Err(Error::parse(
            path,
            0,
            format!("expected {rows} rows, found {seen}"),
        ));
    }
    Ok(Grid::from_vec(rows, cols, data))
}

/// Triangle soup with `z` up; the table is the plane `z = 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

impl Mesh {
    /// Minimal Wavefront OBJ reader: `v` and `f` records, polygons fanned.
    pub fn read_obj(path: &Path) -> Result<Mesh> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut mesh = Mesh::default();
        for (i, line) in text.lines().enumerate() {
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let mut p = [0.0; 3];
                    for slot in &mut p {
                        let tok = it.next().ok_or_else(|| {
                            Error::parse(path, i + 1, "vertex needs 3 coordinates")
                        })?;
                        *slot = tok.parse().map_err(|_| {
                            Error::parse(path, i + 1, format!("bad coordinate {tok:?}"))
                        })?;
                    }
                    mesh.vertices.push(p);
                }
                Some("f") => {
                    let mut idx = Vec::new();
                    for tok in it {
                        let head = tok.split('/').next().unwrap_or("");
                        let k: i64 = head.parse().map_err(|_| {
                            Error::parse(path, i + 1, format!("bad face index {tok:?}"))
                        })?;
                        let n = mesh.vertices.len() as i64;
                        let abs = if k < 0 { n + k } else { k - 1 };
                        if abs < 0 || abs >= n {
                            return Err(Error::parse(
                                path,
                                i + 1,
                                format!("face index {k} out of range"),
                            ));
                        }
                        idx.push(abs as usize);
                    }
                    if idx.len() < 3 {
                        return Err(Error::parse(path, i + 1, "face needs at least 3 vertices"));
                    }
                    for k in 1..idx.len() - 1 {
                        mesh.triangles.push([idx[0], idx[k], idx[k + 1]]);
                    }
                }
                _ => {}
            }
        }
        Ok(mesh)
    }
}

/// Overhead z-buffer: each cell takes the highest triangle covering its center.
///
/// The grid spans the mesh's xy bounding box. Heights below the table clamp to 0.
pub fn rasterize_mesh(mesh: &Mesh, resolution: f64) -> Result<Grid<f64>> {
    if mesh.triangles.is_empty() {
        return Err(Error::EmptyMesh);
    }
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    if mesh.vertices.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("mesh has non-finite vertices".into()));
    }
    let used = mesh.triangles.iter().flatten().map(|&i| mesh.vertices[i]);
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for v in used {
        x0 = x0.min(v[0]);
        y0 = y0.min(v[1]);
        x1 = x1.max(v[0]);
        y1 = y1.max(v[1]);
    }
    let cols = (((x1 - x0) / resolution) - 1e-9).ceil().max(1.0) as usize;
    let rows = (((y1 - y0) / resolution) - 1e-9).ceil().max(1.0) as usize;
    let mut grid = Grid::filled(rows, cols, 0.0f64);
    for tri in &mesh.triangles {
        let [a, b, c] = tri.map(|i| mesh.vertices[i]);
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let scale = (b[0] - a[0])
            .abs()
            .max((c[0] - a[0]).abs())
            .max((b[1] - a[1]).abs())
            .max((c[1] - a[1]).abs());
        if det.abs() <= 1e-12 * scale * scale {
            // Vertical faces have no overhead footprint.
            continue;
        }
        let tx0 = a[0].min(b[0]).min(c[0]);
        let tx1 = a[0].max(b[0]).max(c[0]);
        let ty0 = a[1].min(b[1]).min(c[1]);
        let ty1 = a[1].max(b[1]).max(c[1]);
        let c_lo = (((tx0 - x0) / resolution - 0.5).floor().max(0.0)) as usize;
        let c_hi = (((tx1 - x0) / resolution - 0.5).ceil().max(0.0) as usize).min(cols - 1);
        let r_lo = (((ty0 - y0) / resolution - 0.5).floor().max(0.0)) as usize;
        let r_hi = (((ty1 - y0) / resolution - 0.5).ceil().max(0.0) as usize).min(rows - 1);
        let eps = 1e-9;
        for r in r_lo..=r_hi {
            let py = y0 + (r as f64 + 0.5) * resolution;
            for col in c_lo..=c_hi {
                let px = x0 + (col as f64 + 0.5) * resolution;
                let l1 = ((b[0] - px) * (c[1] - py) - (c[0] - px) * (b[1] - py)) / det;
                let l2 = ((c[0] - px) * (a[1] - py) - (a[0] - px) * (c[1] - py)) / det;
                let l3 = 1.0 - l1 - l2;
                if l1 >= -eps && l2 >= -eps && l3 >= -eps {
                    let z = (a[2] + l2 * (b[2] - a[2]) + l3 * (c[2] - a[2])).max(0.0);
                    if z > grid.get(r, col) {
                        grid.set(r, col, z);
                    }
                }
            }
        }
    }
    Ok(grid)
}

/// Loads every `*.meta` heightmap and `*.obj` mesh in `dir`, sorted by id.
///
/// Meshes are rasterized with `mesh_cells` cells across their longest
/// horizontal extent.
pub fn load_object_pool(dir: &Path, mesh_cells: usize) -> Result<Vec<ObjectModel>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|s| s.to_str()),
                Some("meta") | Some("obj")
            )
        })
        .collect();
    paths.sort();
    let mut objects = Vec::with_capacity(paths.len());
    for path in paths {
        let model = if path.extension().and_then(|s| s.to_str()) == Some("obj") {
            let mesh = Mesh::read_obj(&path)?;
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
            for v in &mesh.vertices {
                x0 = x0.min(v[0]);
                y0 = y0.min(v[1]);
                x1 = x1.max(v[0]);
                y1 = y1.max(v[1]);
            }
            let extent = (x1 - x0).max(y1 - y0);
            let res = extent / mesh_cells.max(1) as f64;
            let grid = rasterize_mesh(&mesh, res).map_err(|e| match e {
                Error::EmptyMesh => Error::parse(&path, 0, "mesh has no triangles"),
                other => other,
            })?;
            ObjectModel::new(id, grid, res)?
        } else {
            ingest_heightmap(&path)?
        };
        objects.push(model);
    }
    objects.sort_by(|a, b| a.id().cmp(b.id()));
    for pair in objects.windows(2) {
        if pair[0].id() == pair[1].id() {
            return Err(Error::InvalidConfig(format!(
                "duplicate object id {:?} in {}",
                pair[0].id(),
                dir.display()
            )));
        }
    }
    Ok(objects)
}
