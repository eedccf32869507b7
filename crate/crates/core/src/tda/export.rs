use std::io::Write;
use std::path::Path;

use super::PersistenceDiagram;
use crate::error::Result;
use crate::svg::Canvas;

/// `dim,birth,death` rows; infinite deaths are written as `inf`.
pub fn write_diagram_csv(diagram: &PersistenceDiagram, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "dim,birth,death")?;
    for p in &diagram.pairs {
        if p.death.is_finite() {
            writeln!(f, "{},{},{}", p.dim, p.birth, p.death)?;
        } else {
            writeln!(f, "{},{},inf", p.dim, p.birth)?;
        }
    }
    Ok(())
}

/// Birth on x, death on y, with the diagonal; H0 drawn as triangles and H1 as
/// circles. Infinite deaths sit on a dashed line above the finite ones.
pub fn write_diagram_svg(diagram: &PersistenceDiagram, path: &Path) -> Result<()> {
    let top = diagram
        .pairs
        .iter()
        .filter(|p| p.is_finite())
        .map(|p| p.death)
        .fold(0.0, f64::max)
        .max(1e-6);
    let inf_line = 1.1 * top;
    let mut c = Canvas::new((0.0, inf_line), (0.0, inf_line));
    c.line((0.0, 0.0), (inf_line, inf_line), "stroke:gray");
    c.line(
        (0.0, inf_line),
        (inf_line, inf_line),
        "stroke:gray;stroke-dasharray:4,3",
    );
    for p in &diagram.pairs {
        let y = if p.is_finite() { p.death } else { inf_line };
        if p.dim == 0 {
            c.triangle((p.birth, y), 4.0, "steelblue");
        } else {
            c.circle((p.birth, y), 4.0, "crimson");
        }
    }
    c.axes("birth", "death");
    std::fs::write(path, c.finish())?;
    Ok(())
}
