//! Convex polygon clipping and rotated-rectangle overlap.

use crate::grasp::{Grasp, Point};

/// Signed area (positive for counterclockwise vertex order in a y-up frame).
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        acc += a[0] * b[1] - b[0] * a[1];
    }
    acc / 2.0
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Clips `subject` against the convex polygon `clip` (Sutherland-Hodgman).
///
/// Both polygons must have positive signed area. The result is convex and may
/// be empty.
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % n]);
        let input = std::mem::take(&mut out);
        let m = input.len();
        for j in 0..m {
            let cur = input[j];
            let prev = input[(j + m - 1) % m];
            let dc = cross(a, b, cur);
            let dp = cross(a, b, prev);
            let cur_in = dc >= 0.0;
            let prev_in = dp >= 0.0;
            if cur_in != prev_in {
                let t = dp / (dp - dc);
                out.push([
                    prev[0] + t * (cur[0] - prev[0]),
                    prev[1] + t * (cur[1] - prev[1]),
                ]);
            }
            if cur_in {
                out.push(cur);
            }
        }
    }
    out
}

/// Area of the intersection of two convex polygons.
pub fn intersection_area(a: &[Point], b: &[Point]) -> f64 {
    signed_area(&clip_convex(a, b)).max(0.0)
}

/// Intersection over union of two grasp rectangles, in `[0, 1]`.
pub fn iou(a: &Grasp, b: &Grasp) -> f64 {
    let inter = intersection_area(&a.corners(), &b.corners());
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(x: f64, y: f64, w: f64, h: f64, t: f64) -> Grasp {
        Grasp::new(x, y, w, h, t).unwrap()
    }

    #[test]
    fn identity_is_one() {
        let a = g(12.0, -4.0, 30.0, 11.0, 37.0);
        assert!((iou(&a, &a) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn disjoint_is_zero() {
        let a = g(0.0, 0.0, 10.0, 10.0, 20.0);
        let b = g(100.0, 0.0, 10.0, 10.0, -20.0);
        assert_eq!(iou(&a, &b), 0.0);
    }

    #[test]
    fn shifted_axis_aligned() {
        // overlap 30 x 20 = 600, union 800 + 800 - 600 = 1000
        let a = g(50.0, 50.0, 40.0, 20.0, 0.0);
        let b = g(60.0, 50.0, 40.0, 20.0, 0.0);
        assert!((iou(&a, &b) - 0.6).abs() < 1e-9);
    }

    #[test]
    fn contained_rectangle() {
        let a = g(0.0, 0.0, 10.0, 10.0, 0.0);
        let b = g(0.0, 0.0, 5.0, 5.0, 0.0);
        assert!((iou(&a, &b) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn square_rotated_45_over_itself() {
        // A unit square and the same square rotated 45° share a regular octagon
        // of area 2(√2 - 1).
        let a = g(0.0, 0.0, 1.0, 1.0, 0.0);
        let b = g(0.0, 0.0, 1.0, 1.0, 45.0);
        let inter = 2.0 * (2f64.sqrt() - 1.0);
        let want = inter / (2.0 - inter);
        assert!((iou(&a, &b) - want).abs() < 1e-12);
    }

    #[test]
    fn touching_edges_have_zero_overlap() {
        let a = g(0.0, 0.0, 2.0, 2.0, 0.0);
        let b = g(2.0, 0.0, 2.0, 2.0, 0.0);
        assert!(iou(&a, &b).abs() < 1e-12);
    }
}
