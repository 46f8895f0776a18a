//! Grayscale heatmaps: 1 is black, 0 is white.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{invalid, Result, SeriationError};
use crate::io::LabeledMatrix;
use crate::matrix::DenseMatrix;

/// Side length of one SVG cell in user units.
pub const SVG_CELL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Svg,
    Pgm,
}

impl ImageFormat {
    /// Format implied by a file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        path.extension()
            .and_then(|e| e.to_str())
            .ok_or_else(|| invalid(format!("cannot infer image format of {}", path.display())))?
            .parse()
    }
}

impl FromStr for ImageFormat {
    type Err = SeriationError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svg" => Ok(ImageFormat::Svg),
            "pgm" => Ok(ImageFormat::Pgm),
            other => Err(invalid(format!("unknown image format '{other}'"))),
        }
    }
}

fn gray_levels(a: &DenseMatrix) -> Vec<u8> {
    if !a.is_unit_range() {
        log::warn!("heatmap input outside [0, 1]; values are clamped");
    }
    a.data().iter().map(|&v| (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8).collect()
}

/// Binary PGM (`P5`) with one pixel per cell.
pub fn pgm_bytes(a: &DenseMatrix) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", a.cols(), a.rows()).into_bytes();
    out.extend(gray_levels(a));
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// SVG with one `rect` per cell; labels, when present, become tooltips.
pub fn svg_string(m: &LabeledMatrix) -> String {
    let a = &m.matrix;
    let (w, h) = (a.cols() * SVG_CELL, a.rows() * SVG_CELL);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" shape-rendering="crispEdges">"#
    );
    let levels = gray_levels(a);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let g = levels[i * a.cols() + j];
            let _ = write!(
                out,
                r#"<rect x="{}" y="{}" width="{SVG_CELL}" height="{SVG_CELL}" fill="rgb({g},{g},{g})""#,
                j * SVG_CELL,
                i * SVG_CELL
            );
            let row = m.row_labels.as_ref().map(|l| l[i].as_str());
            let col = m.col_labels.as_ref().map(|l| l[j].as_str());
            if row.is_some() || col.is_some() {
                let title = format!("{} / {}: {}", row.unwrap_or("-"), col.unwrap_or("-"), a.get(i, j));
                let _ = writeln!(out, "><title>{}</title></rect>", escape(&title));
            } else {
                out.push_str("/>\n");
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Writes a heatmap of `m` to `path`.
pub fn render_heatmap(m: &LabeledMatrix, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    let bytes = match format {
        ImageFormat::Svg => svg_string(m).into_bytes(),
        ImageFormat::Pgm => pgm_bytes(&m.matrix),
    };
    std::fs::write(path, bytes)?;
    Ok(())
}
