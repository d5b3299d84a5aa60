//! Space-time diagrams as plain-text portable graymaps: one pixel per cell
//! per time row, letter indices scaled to the 0–255 gray range. The plain
//! (P2) variant keeps golden files diffable.

use std::path::Path;

use pca::config::SpaceTimeDiagram;
use pca::error::Result;

const MAX_GRAY: u32 = 255;
const LINE_LIMIT: usize = 70;

/// Render the diagram: width = cells, height = time rows (oldest first),
/// gray = letter · 255 / (max letter), bit-exact for fixed input.
pub fn render_diagram(diagram: &SpaceTimeDiagram) -> String {
    let top = diagram
        .rows()
        .iter()
        .flat_map(|row| row.letters())
        .copied()
        .max()
        .unwrap_or(0)
        .max(1) as u32;
    let mut out = format!("P2\n{} {}\n{MAX_GRAY}\n", diagram.width(), diagram.height());
    let mut line = String::new();
    for row in diagram.rows() {
        for &letter in row.letters() {
            let gray = (letter as u32 * MAX_GRAY / top).to_string();
            if !line.is_empty() && line.len() + 1 + gray.len() > LINE_LIMIT {
                out.push_str(&line);
                out.push('\n');
                line.clear();
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(&gray);
        }
        // Row boundaries are line boundaries: easier to eyeball diffs.
        if !line.is_empty() {
            out.push_str(&line);
            out.push('\n');
            line.clear();
        }
    }
    out
}

pub fn save_diagram(path: impl AsRef<Path>, diagram: &SpaceTimeDiagram) -> Result<()> {
    std::fs::write(path, render_diagram(diagram))?;
    Ok(())
}
