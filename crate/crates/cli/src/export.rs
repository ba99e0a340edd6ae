//! Plain-text exporters: iteration histories and nodal densities.
//!
//! Densities are written with 8 significant digits. Rounding hides the
//! last-bit differences left by a global phase, so exports of `Φ` and of
//! any phase-rotated `ΦΘ` coincide byte for byte.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rotbec::optim::IterationRecord;
use rotbec::{Discretization, PFrame};

use crate::{io_err, Result};

pub const HISTORY_HEADER: &str = "k,energy,residual,tau,cg_iters,wall_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityFormat {
    Vtk,
    Csv,
}

/// `|φ_j|²` at every node, boundary included, one vector per component.
pub fn nodal_densities(disc: &Discretization, phi: &PFrame) -> Vec<Vec<f64>> {
    phi.columns().map(|c| disc.to_full_nodes(c).iter().map(|z| z.norm_sqr()).collect()).collect()
}

pub fn history_csv(records: &[IterationRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(HISTORY_HEADER);
    s.push('\n');
    for r in records {
        // Full precision: monotonicity checks read this column back.
        let _ = writeln!(
            s,
            "{},{:e},{:e},{:e},{},{:.3}",
            r.k, r.energy, r.residual, r.tau, r.cg_iters, r.wall_ms
        );
    }
    s
}

pub fn density_vtk(disc: &Discretization, phi: &PFrame) -> String {
    let nn = disc.nodes_per_dir();
    let d = disc.domain();
    let (hx, hy) = disc.mesh_width();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\ncomponent densities\nASCII\nDATASET STRUCTURED_POINTS\n");
    let _ = writeln!(s, "DIMENSIONS {nn} {nn} 1");
    let _ = writeln!(s, "ORIGIN {:e} {:e} 0", d.ax, d.ay);
    let _ = writeln!(s, "SPACING {:e} {:e} 1", 0.5 * hx, 0.5 * hy);
    let _ = writeln!(s, "POINT_DATA {}", nn * nn);
    for (j, rho) in nodal_densities(disc, phi).iter().enumerate() {
        let _ = writeln!(s, "SCALARS density_{} double 1\nLOOKUP_TABLE default", j + 1);
        for v in rho {
            let _ = writeln!(s, "{v:.7e}");
        }
    }
    s
}

pub fn density_csv(disc: &Discretization, phi: &PFrame) -> String {
    let dens = nodal_densities(disc, phi);
    let mut s = String::from("x,y");
    for j in 0..dens.len() {
        let _ = write!(s, ",density_{}", j + 1);
    }
    s.push('\n');
    for g in 0..disc.n_nodes() {
        let (x, y) = disc.node_coords(g);
        let _ = write!(s, "{x:.7e},{y:.7e}");
        for rho in &dens {
            let _ = write!(s, ",{:.7e}", rho[g]);
        }
        s.push('\n');
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err(path))?);
    f.write_all(text.as_bytes()).map_err(io_err(path))?;
    f.flush().map_err(io_err(path))
}

pub fn write_density(path: &Path, disc: &Discretization, phi: &PFrame, format: DensityFormat) -> Result<()> {
    let text = match format {
        DensityFormat::Vtk => density_vtk(disc, phi),
        DensityFormat::Csv => density_csv(disc, phi),
    };
    write_text(path, &text)
}
