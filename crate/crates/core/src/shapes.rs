//! Analytic height-field objects used as fixtures and demo inputs.

use crate::error::Result;
use crate::grid::Grid;
use crate::object::ObjectModel;

/// Samples `height(x, y)` at cell centers over a `size_x` × `size_y` meter
/// footprint centered on the origin.
pub fn from_fn(
    id: &str,
    size_x: f64,
    size_y: f64,
    resolution: f64,
    height: impl Fn(f64, f64) -> f64,
) -> Result<ObjectModel> {
    let cols = (size_x / resolution).round().max(1.0) as usize;
    let rows = (size_y / resolution).round().max(1.0) as usize;
    let grid = Grid::from_fn(rows, cols, |r, c| {
        let x = (c as f64 + 0.5) * resolution - cols as f64 * resolution / 2.0;
        let y = (r as f64 + 0.5) * resolution - rows as f64 * resolution / 2.0;
        height(x, y).max(0.0)
    });
    ObjectModel::new(id, grid, resolution)
}

pub fn cuboid(id: &str, lx: f64, ly: f64, h: f64, resolution: f64) -> Result<ObjectModel> {
    from_fn(id, lx, ly, resolution, |_, _| h)
}

/// An L made of two `arm` × `thick` bars sharing a corner.
pub fn l_shape(id: &str, arm: f64, thick: f64, h: f64, resolution: f64) -> Result<ObjectModel> {
    from_fn(id, arm, arm, resolution, |x, y| {
        let (u, v) = (x + arm / 2.0, y + arm / 2.0);
        if u < thick || v < thick {
            h
        } else {
            0.0
        }
    })
}

/// A T: a `bar` × `thick` crossbar with a stem of the same thickness.
pub fn t_shape(id: &str, bar: f64, thick: f64, h: f64, resolution: f64) -> Result<ObjectModel> {
    from_fn(id, bar, bar, resolution, |x, y| {
        let top = y + bar / 2.0 < thick;
        let stem = x.abs() < thick / 2.0;
        if top || stem {
            h
        } else {
            0.0
        }
    })
}

/// A cylinder standing on its base.
pub fn upright_cylinder(id: &str, radius: f64, h: f64, resolution: f64) -> Result<ObjectModel> {
    from_fn(id, 2.0 * radius, 2.0 * radius, resolution, |x, y| {
        if x * x + y * y < radius * radius {
            h
        } else {
            0.0
        }
    })
}

/// A cylinder lying along x; seen from above its top surface is curved.
pub fn lying_cylinder(id: &str, radius: f64, length: f64, resolution: f64) -> Result<ObjectModel> {
    from_fn(id, length, 2.0 * radius, resolution, |_, y| {
        if y.abs() < radius {
            radius + (radius * radius - y * y).sqrt()
        } else {
            0.0
        }
    })
}

/// A square ring (picture frame) of wall thickness `wall`.
pub fn frame(id: &str, side: f64, wall: f64, h: f64, resolution: f64) -> Result<ObjectModel> {
    from_fn(id, side, side, resolution, |x, y| {
        let inner = side / 2.0 - wall;
        if x.abs() < inner && y.abs() < inner {
            0.0
        } else {
            h
        }
    })
}

/// A stepped block: the base covers the whole footprint and a narrower block
/// sits on top of it.
pub fn stepped(
    id: &str,
    lx: f64,
    ly: f64,
    base: f64,
    top: f64,
    resolution: f64,
) -> Result<ObjectModel> {
    from_fn(id, lx, ly, resolution, |x, _| {
        if x.abs() < lx / 4.0 {
            base + top
        } else {
            base
        }
    })
}

/// The fixture pool: boxes, L- and T-shapes, cylinders, plates, frames and
/// steps of assorted proportions. Ids are unique and sorted.
pub fn fixture_pool(resolution: f64) -> Result<Vec<ObjectModel>> {
    let r = resolution;
    let mut pool = vec![
        cuboid("box-cube", 0.04, 0.04, 0.04, r)?,
        cuboid("box-brick", 0.06, 0.03, 0.04, r)?,
        cuboid("box-long", 0.12, 0.03, 0.03, r)?,
        cuboid("box-stick", 0.15, 0.015, 0.015, r)?,
        cuboid("box-slab", 0.10, 0.05, 0.02, r)?,
        cuboid("box-tall", 0.03, 0.03, 0.08, r)?,
        l_shape("l-thin", 0.10, 0.02, 0.02, r)?,
        l_shape("l-wide", 0.08, 0.035, 0.03, r)?,
        l_shape("l-flat", 0.12, 0.025, 0.01, r)?,
        t_shape("t-small", 0.08, 0.02, 0.02, r)?,
        t_shape("t-large", 0.12, 0.03, 0.025, r)?,
        upright_cylinder("cyl-can", 0.02, 0.06, r)?,
        upright_cylinder("cyl-puck", 0.03, 0.02, r)?,
        upright_cylinder("cyl-rod", 0.01, 0.10, r)?,
        lying_cylinder("cyl-lying", 0.015, 0.10, r)?,
        lying_cylinder("cyl-dowel", 0.008, 0.12, r)?,
        cuboid("plate-strip", 0.14, 0.02, 0.004, r)?,
        cuboid("plate-tile", 0.05, 0.05, 0.006, r)?,
        frame("frame-square", 0.08, 0.015, 0.02, r)?,
        frame("frame-thin", 0.10, 0.01, 0.015, r)?,
        stepped("step-block", 0.09, 0.04, 0.015, 0.02, r)?,
        stepped("step-bar", 0.12, 0.02, 0.01, 0.015, r)?,
    ];
    pool.sort_by(|a, b| a.id().cmp(b.id()));
    Ok(pool)
}
