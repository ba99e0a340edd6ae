//! Physical problem description and parameter validation.

use crate::error::{Error, Result};

/// Axis-aligned rectangle `[ax,bx] × [ay,by]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub ax: f64,
    pub bx: f64,
    pub ay: f64,
    pub by: f64,
}

impl Rect {
    pub fn square(half_width: f64) -> Self {
        Self { ax: -half_width, bx: half_width, ay: -half_width, by: half_width }
    }

    pub fn width(&self) -> f64 {
        self.bx - self.ax
    }

    pub fn height(&self) -> f64 {
        self.by - self.ay
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// Trapping potential `a x² + b y² + c sin²(αx) + d sin²(βy)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Potential {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Potential {
    pub fn harmonic(a: f64, b: f64) -> Self {
        Self { a, b, ..Self::default() }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let sx = (self.alpha * x).sin();
        let sy = (self.beta * y).sin();
        self.a * x * x + self.b * y * y + self.c * sx * sx + self.d * sy * sy
    }
}

/// Complete description of a rotating p-component condensate on a rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub domain: Rect,
    /// Elements per direction.
    pub elements_per_dir: usize,
    /// Gauss–Legendre points per direction.
    pub quad_order: usize,
    pub masses: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub potentials: Vec<Potential>,
    /// Row-major `p × p` interaction matrix.
    pub interaction: Vec<Vec<f64>>,
    /// Per-component margin in the trap-versus-rotation check.
    pub assumption_margin: Vec<f64>,
}

pub const DEFAULT_QUAD_ORDER: usize = 4;

impl ModelSpec {
    pub fn p(&self) -> usize {
        self.masses.len()
    }

    pub fn kappa(&self, i: usize, j: usize) -> f64 {
        self.interaction[i][j]
    }

    pub fn with_mesh(mut self, m: usize) -> Self {
        self.elements_per_dir = m;
        self
    }

    /// Checks everything that does not need a mesh. The pointwise trap
    /// condition is checked at quadrature points when discretizing.
    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        let cfg = |msg: String| Err(Error::Config(msg));
        if p == 0 {
            return cfg("at least one component is required".into());
        }
        if self.elements_per_dir < 2 {
            return cfg(format!("elements per direction must be at least 2, got {}", self.elements_per_dir));
        }
        if self.quad_order == 0 || self.quad_order > 32 {
            return cfg(format!("quadrature order {} out of range 1..=32", self.quad_order));
        }
        let d = &self.domain;
        if !(d.ax.is_finite() && d.bx.is_finite() && d.ay.is_finite() && d.by.is_finite())
            || d.bx <= d.ax
            || d.by <= d.ay
        {
            return cfg(format!("degenerate domain {d:?}"));
        }
        for (name, len) in [
            ("frequencies", self.frequencies.len()),
            ("potentials", self.potentials.len()),
            ("interaction rows", self.interaction.len()),
            ("assumption margins", self.assumption_margin.len()),
        ] {
            if len != p {
                return cfg(format!("{name}: expected {p} entries, got {len}"));
            }
        }
        for (j, &n) in self.masses.iter().enumerate() {
            if !(n > 0.0 && n.is_finite()) {
                return cfg(format!("mass of component {j} must be positive, got {n}"));
            }
        }
        for (j, &w) in self.frequencies.iter().enumerate() {
            if !w.is_finite() {
                return cfg(format!("frequency of component {j} is not finite"));
            }
        }
        for (j, &e) in self.assumption_margin.iter().enumerate() {
            if !(e > 0.0 && e.is_finite()) {
                return cfg(format!("assumption margin of component {j} must be positive, got {e}"));
            }
        }
        for (j, v) in self.potentials.iter().enumerate() {
            let coeffs = [v.a, v.b, v.c, v.d, v.alpha, v.beta];
            if coeffs.iter().any(|c| !c.is_finite()) {
                return cfg(format!("potential of component {j} has non-finite coefficients"));
            }
            if v.a < 0.0 || v.b < 0.0 || v.c < 0.0 || v.d < 0.0 {
                return cfg(format!("potential of component {j} has negative coefficients"));
            }
        }
        for (i, row) in self.interaction.iter().enumerate() {
            if row.len() != p {
                return cfg(format!("interaction row {i} has {} entries, expected {p}", row.len()));
            }
            for (j, &k) in row.iter().enumerate() {
                if !(k >= 0.0 && k.is_finite()) {
                    return cfg(format!("interaction entry ({i},{j}) = {k} must be nonnegative"));
                }
                if k != self.interaction[j][i] {
                    return cfg(format!("interaction matrix is not symmetric at ({i},{j})"));
                }
            }
        }
        Ok(())
    }

    /// `V_j − (1+ε_j)/4 · Ω_j² (x²+y²)`; must be nonnegative on the domain.
    pub fn trap_margin(&self, j: usize, x: f64, y: f64) -> f64 {
        let w = self.frequencies[j];
        self.potentials[j].eval(x, y) - (1.0 + self.assumption_margin[j]) / 4.0 * w * w * (x * x + y * y)
    }
}
