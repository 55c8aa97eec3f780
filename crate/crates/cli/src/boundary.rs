use std::io::Write;

use anyhow::{bail, Result};
use linclass::online::{boundary_roots, QuadraticBoundary};
use linclass::{BasisSpec, LinearModel};

use crate::UsageError;

/// Relative size below which a line coefficient counts as zero.
const LINE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Emitted {
    /// Two endpoints `(x, y)` of a non-vertical line.
    Line,
    /// Vertical line written as `x = c`.
    Vertical(f64),
    /// Number of `x1` samples with at least one root.
    Quadratic(usize),
    /// No real level set; nothing written.
    Empty,
}

/// Writes the level set `ωᵀφ(x) = threshold` of a two-dimensional model as
/// CSV over `x ∈ [x_min, x_max]`.
pub fn write_boundary<W: Write>(
    model: &LinearModel,
    x_min: f64,
    x_max: f64,
    samples: usize,
    mut out: W,
) -> Result<Emitted> {
    if x_min.partial_cmp(&x_max) != Some(std::cmp::Ordering::Less) {
        bail!(UsageError(format!("x range [{x_min}, {x_max}] is empty")));
    }
    if model.basis.is_planar_linear() {
        let w = &model.weights;
        let w0 = w[0] - model.threshold;
        let scale = w.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        if w[2].abs() > LINE_EPS * scale {
            writeln!(out, "x,y")?;
            for x in [x_min, x_max] {
                writeln!(out, "{},{}", x, -(w0 + w[1] * x) / w[2])?;
            }
            return Ok(Emitted::Line);
        }
        if w[1].abs() > LINE_EPS * scale {
            let c = -w0 / w[1];
            writeln!(out, "x")?;
            writeln!(out, "{c}")?;
            return Ok(Emitted::Vertical(c));
        }
        log::warn!("model has no boundary line: both slope weights vanish");
        return Ok(Emitted::Empty);
    }
    if model.basis != BasisSpec::QuadraticLift2D {
        bail!(UsageError(format!(
            "boundary needs a linear2d or quad2d model, got {}",
            model.basis
        )));
    }
    if samples < 2 {
        bail!(UsageError("--samples must be at least 2".into()));
    }
    let qb = QuadraticBoundary::from_model(model)?;
    let step = (x_max - x_min) / (samples - 1) as f64;
    let mut rows = 0;
    for i in 0..samples {
        let x1 = if i + 1 == samples {
            x_max
        } else {
            x_min + i as f64 * step
        };
        let roots = boundary_roots(&qb, x1);
        if roots.is_empty() {
            continue;
        }
        if rows == 0 {
            writeln!(out, "x1,x2_root1,x2_root2")?;
        }
        match roots.as_slice() {
            [r] => writeln!(out, "{x1},{r},")?,
            [r1, r2] => writeln!(out, "{x1},{r1},{r2}")?,
            _ => unreachable!("a quadratic has at most two roots"),
        }
        rows += 1;
    }
    if rows == 0 {
        log::warn!("no real boundary points for x1 in [{x_min}, {x_max}]");
        return Ok(Emitted::Empty);
    }
    Ok(Emitted::Quadratic(rows))
}
