//! Ellipse glyph rendering to SVG.
//!
//! Each pixel is drawn as the orthographic shadow of its diffusion ellipsoid
//! on the grid plane: the ellipse with shape matrix `(w²)_{xy}`, the upper-left
//! 2×2 block of `w²`. Tensor x maps to grid columns and tensor y to grid rows
//! (downwards). Radii share one scale so the largest semi-axis in the field is
//! [`MAX_GLYPH_RADIUS`] pixels. Fill colour encodes fractional anisotropy.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::field::TensorField;
use crate::spd::{fractional_anisotropy, SymMat};

/// Largest glyph semi-axis, in pixel units.
pub const MAX_GLYPH_RADIUS: f64 = 0.45;
/// Rendered size of one pixel.
const PIXEL_PX: usize = 24;

/// Linear RGB ramp from black (FA = 0) to light blue (FA = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorScale {
    pub high: [u8; 3],
}

impl Default for ColorScale {
    fn default() -> Self {
        Self { high: [120, 180, 255] }
    }
}

impl ColorScale {
    /// Colour for `fa`, clamped to `[0, 1]`.
    pub fn rgb(&self, fa: f64) -> [u8; 3] {
        let t = if fa.is_nan() { 0.0 } else { fa.clamp(0.0, 1.0) };
        self.high.map(|c| (t * c as f64).round() as u8)
    }

    pub fn hex(&self, fa: f64) -> String {
        let [r, g, b] = self.rgb(fa);
        format!("#{r:02x}{g:02x}{b:02x}")
    }
}

/// Semi-axes `(major, minor)` and major-axis angle in degrees of the projected ellipse.
fn shadow(m: &SymMat) -> (f64, f64, f64) {
    let d = m.dim();
    if d == 1 {
        let r = m.get(0, 0).abs();
        return (r, r, 0.0);
    }
    // upper-left block of w²
    let sq = |i: usize, j: usize| (0..d).map(|k| m.get(i, k) * m.get(k, j)).sum::<f64>();
    let (a, c, b) = (sq(0, 0), sq(1, 1), sq(0, 1));
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let major = (mean + rad).max(0.0).sqrt();
    let minor = (mean - rad).max(0.0).sqrt();
    let angle = if rad == 0.0 { 0.0 } else { 0.5 * (2.0 * b).atan2(a - c) };
    (major, minor, angle.to_degrees())
}

/// Renders one glyph per pixel as an SVG 1.1 document.
pub fn render_svg(w: &TensorField) -> String {
    render_with(w, &ColorScale::default())
}

pub fn render_with(w: &TensorField, colors: &ColorScale) -> String {
    let glyphs: Vec<(f64, f64, f64)> = w.tensors().iter().map(|t| shadow(t.matrix())).collect();
    let largest = glyphs.iter().map(|g| g.0).fold(0.0f64, f64::max);
    let scale = if largest > 0.0 { MAX_GLYPH_RADIUS / largest } else { 0.0 };

    let (wd, ht) = (w.width(), w.height());
    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {wd} {ht}\">",
        wd * PIXEL_PX,
        ht * PIXEL_PX
    );
    let _ = writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{wd}\" height=\"{ht}\" fill=\"#ffffff\"/>"
    );
    for (i, (t, (major, minor, angle))) in w.tensors().iter().zip(&glyphs).enumerate() {
        let (cx, cy) = ((i % wd) as f64 + 0.5, (i / wd) as f64 + 0.5);
        let _ = writeln!(
            svg,
            "<ellipse cx=\"{cx:.1}\" cy=\"{cy:.1}\" rx=\"{:.5}\" ry=\"{:.5}\" transform=\"rotate({:.3} {cx:.1} {cy:.1})\" fill=\"{}\"/>",
            major * scale,
            minor * scale,
            angle,
            colors.hex(fractional_anisotropy(t))
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_svg(w: &TensorField, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_svg(w))?;
    Ok(())
}
