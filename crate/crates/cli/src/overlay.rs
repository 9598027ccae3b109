//! Grasp rectangles drawn over a shaded depth image. Jaw sides are darker.

use graspgen_core::{Grasp, Scene};
use image::{Rgb, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Style {
    pub side: Rgb<u8>,
    pub jaw: Rgb<u8>,
    pub dashed: bool,
}

pub const ANNOTATION: Style = Style {
    side: Rgb([90, 220, 90]),
    jaw: Rgb([0, 90, 0]),
    dashed: false,
};

pub const PREDICTION: Style = Style {
    side: Rgb([255, 90, 60]),
    jaw: Rgb([130, 0, 0]),
    dashed: true,
};

const TABLE: u8 = 20;

/// Heights shaded from dark (table) to white (tallest point).
pub fn base_image(scene: &Scene) -> RgbImage {
    let h = scene.heights();
    let top = h.data().iter().copied().fold(0.0f64, f64::max);
    RgbImage::from_fn(h.cols() as u32, h.rows() as u32, |c, r| {
        let v = h.get(r as usize, c as usize);
        let g = if v > 0.0 && top > 0.0 {
            (60.0 + 195.0 * v / top).round() as u8
        } else {
            TABLE
        };
        Rgb([g, g, g])
    })
}

fn line(img: &mut RgbImage, a: [f64; 2], b: [f64; 2], color: Rgb<u8>, dashed: bool) {
    let steps = (b[0] - a[0]).abs().max((b[1] - a[1]).abs()).ceil().max(1.0) as usize;
    for i in 0..=steps {
        if dashed && (i / 3) % 2 == 1 {
            continue;
        }
        let t = i as f64 / steps as f64;
        let x = (a[0] + t * (b[0] - a[0])).floor();
        let y = (a[1] + t * (b[1] - a[1])).floor();
        if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, color);
        }
    }
}

/// Draws one rectangle: the two sides along the closing axis in the side
/// color, the two jaw plates in the jaw color.
pub fn draw_grasp(img: &mut RgbImage, g: &Grasp, style: Style) {
    let c = g.corners();
    line(img, c[0], c[1], style.side, style.dashed);
    line(img, c[2], c[3], style.side, style.dashed);
    line(img, c[1], c[2], style.jaw, style.dashed);
    line(img, c[3], c[0], style.jaw, style.dashed);
}

pub fn render(scene: &Scene, annotations: &[Grasp], predictions: &[Grasp]) -> RgbImage {
    let mut img = base_image(scene);
    for g in annotations {
        draw_grasp(&mut img, g, ANNOTATION);
    }
    for g in predictions {
        draw_grasp(&mut img, g, PREDICTION);
    }
    img
}
