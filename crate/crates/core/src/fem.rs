//! Bi-quadratic (Q2) finite elements on a uniform rectangular grid.
//!
//! Nodes form a `(2m+1) × (2m+1)` lattice with global index
//! `iy·(2m+1) + ix`. Dirichlet nodes on the boundary are eliminated; the free
//! dofs are the interior nodes in row-major order. Quadrature points are
//! ordered element-major (elements row-major), point-minor.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::frame::PFrame;
use crate::linalg::{CsrMatrix, SparsityPattern};
use crate::model::{ModelSpec, Rect};
use crate::quadrature::gauss_legendre;
use crate::C64;

const NONE: usize = usize::MAX;
/// Local basis functions per element.
pub const NLOC: usize = 9;

/// Quadratic Lagrange basis on `[-1,1]` with nodes `-1, 0, 1`.
fn lagrange_1d(xi: f64) -> ([f64; 3], [f64; 3]) {
    ([0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)], [xi - 0.5, -2.0 * xi, xi + 0.5])
}

/// Values of a coefficient vector (and optionally its gradient) at every
/// quadrature point.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadField {
    pub values: Vec<C64>,
    pub gradients: Option<Vec<[C64; 2]>>,
}

#[derive(Debug, Clone)]
pub struct Discretization {
    domain: Rect,
    m: usize,
    q: usize,
    hx: f64,
    hy: f64,
    /// Global node → free index, or `NONE` on the boundary.
    free_index: Vec<usize>,
    /// Free index → global node.
    free_nodes: Vec<usize>,
    pattern: Arc<SparsityPattern>,
    /// Per element, CSR positions of the 81 local couplings (`NONE` if either
    /// node is on the boundary).
    elem_pos: Vec<[usize; NLOC * NLOC]>,
    /// Reference quadrature points and scaled weights (Jacobian included).
    ref_points: Vec<(f64, f64)>,
    weights: Vec<f64>,
    basis: Vec<[f64; NLOC]>,
    grads: Vec<[[f64; 2]; NLOC]>,
    /// `weights[k] · ψ_a ψ_b` at local point `k`.
    mass_products: Vec<[f64; NLOC * NLOC]>,
    quad_coords: Vec<[f64; 2]>,
    pub mass: CsrMatrix<f64>,
    pub stiffness: CsrMatrix<f64>,
    pub rotation: CsrMatrix<f64>,
    pub potential_mass: Vec<CsrMatrix<f64>>,
}

impl Discretization {
    /// Validates the spec, builds the grid and assembles the constant matrices.
    pub fn build(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        let mut disc = Self::grid(spec.domain, spec.elements_per_dir, spec.quad_order);
        for j in 0..spec.p() {
            for &[x, y] in &disc.quad_coords {
                let value = spec.trap_margin(j, x, y);
                if value < 0.0 {
                    return Err(Error::TrapTooWeak { component: j, x, y, value });
                }
            }
        }
        disc.potential_mass = spec
            .potentials
            .iter()
            .map(|v| {
                let w: Vec<f64> = disc.quad_coords.iter().map(|&[x, y]| v.eval(x, y)).collect();
                disc.assemble_weighted_mass(&w)
            })
            .collect::<Result<_>>()?;
        Ok(disc)
    }

    /// Grid, quadrature tables and the geometric matrices `M`, `S`, `R`.
    pub fn grid(domain: Rect, m: usize, q: usize) -> Self {
        assert!(m >= 1 && q >= 1);
        let nn = 2 * m + 1;
        let hx = domain.width() / m as f64;
        let hy = domain.height() / m as f64;

        let mut free_index = vec![NONE; nn * nn];
        let mut free_nodes = Vec::with_capacity((nn - 2) * (nn - 2));
        for iy in 1..nn - 1 {
            for ix in 1..nn - 1 {
                let g = iy * nn + ix;
                free_index[g] = free_nodes.len();
                free_nodes.push(g);
            }
        }
        let n = free_nodes.len();

        let elem_dofs = |e: usize| -> [usize; NLOC] {
            let (ex, ey) = (e % m, e / m);
            std::array::from_fn(|a| {
                let (ia, ib) = (a % 3, a / 3);
                free_index[(2 * ey + ib) * nn + 2 * ex + ia]
            })
        };

        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in 0..m * m {
            let d = elem_dofs(e);
            for &a in d.iter().filter(|&&a| a != NONE) {
                rows[a].extend(d.iter().copied().filter(|&b| b != NONE));
            }
        }
        let pattern = Arc::new(SparsityPattern::from_rows(rows));
        let elem_pos = (0..m * m)
            .map(|e| {
                let d = elem_dofs(e);
                std::array::from_fn(|ab| {
                    let (a, b) = (d[ab / NLOC], d[ab % NLOC]);
                    if a == NONE || b == NONE {
                        NONE
                    } else {
                        pattern.find(a, b).expect("coupling in pattern")
                    }
                })
            })
            .collect();

        let (xs, ws) = gauss_legendre(q);
        let jac = hx * hy / 4.0;
        let mut ref_points = Vec::with_capacity(q * q);
        let mut weights = Vec::with_capacity(q * q);
        let mut basis = Vec::with_capacity(q * q);
        let mut grads = Vec::with_capacity(q * q);
        for (ky, &eta) in xs.iter().enumerate() {
            for (kx, &xi) in xs.iter().enumerate() {
                let (lx, dlx) = lagrange_1d(xi);
                let (ly, dly) = lagrange_1d(eta);
                ref_points.push((xi, eta));
                weights.push(ws[kx] * ws[ky] * jac);
                basis.push(std::array::from_fn(|a| lx[a % 3] * ly[a / 3]));
                grads.push(std::array::from_fn(|a| {
                    [dlx[a % 3] * ly[a / 3] * 2.0 / hx, lx[a % 3] * dly[a / 3] * 2.0 / hy]
                }));
            }
        }
        let mass_products = (0..q * q)
            .map(|k| std::array::from_fn(|ab| weights[k] * basis[k][ab / NLOC] * basis[k][ab % NLOC]))
            .collect();
        let mut quad_coords = Vec::with_capacity(m * m * q * q);
        for e in 0..m * m {
            let (x0, y0) = (domain.ax + (e % m) as f64 * hx, domain.ay + (e / m) as f64 * hy);
            for &(xi, eta) in &ref_points {
                quad_coords.push([x0 + 0.5 * (xi + 1.0) * hx, y0 + 0.5 * (eta + 1.0) * hy]);
            }
        }

        let empty = CsrMatrix::zeros(pattern.clone());
        let mut disc = Self {
            domain,
            m,
            q,
            hx,
            hy,
            free_index,
            free_nodes,
            pattern,
            elem_pos,
            ref_points,
            weights,
            basis,
            grads,
            mass_products,
            quad_coords,
            mass: empty.clone(),
            stiffness: empty.clone(),
            rotation: empty,
            potential_mass: Vec::new(),
        };
        disc.mass = disc.assemble_real(|_, k| {
            let w = disc.weights[k];
            let b = &disc.basis[k];
            std::array::from_fn(|ab| w * b[ab / NLOC] * b[ab % NLOC])
        });
        disc.stiffness = disc.assemble_real(|_, k| {
            let w = disc.weights[k];
            let g = &disc.grads[k];
            std::array::from_fn(|ab| {
                let (a, b) = (ab / NLOC, ab % NLOC);
                w * (g[a][0] * g[b][0] + g[a][1] * g[b][1])
            })
        });
        disc.rotation = disc.assemble_real(|g_idx, k| {
            let w = disc.weights[k];
            let [x, y] = disc.quad_coords[g_idx];
            let (b, g) = (&disc.basis[k], &disc.grads[k]);
            std::array::from_fn(|ab| {
                let (a, c) = (ab / NLOC, ab % NLOC);
                w * b[a] * (x * g[c][1] - y * g[c][0])
            })
        });
        disc
    }

    /// Element loop with a per-quadrature-point local contribution.
    fn assemble_real<F>(&self, local: F) -> CsrMatrix<f64>
    where
        F: Fn(usize, usize) -> [f64; NLOC * NLOC],
    {
        let nq = self.q * self.q;
        let mut out = CsrMatrix::zeros(self.pattern.clone());
        let vals = out.values_mut();
        for (e, pos) in self.elem_pos.iter().enumerate() {
            let mut acc = [0.0; NLOC * NLOC];
            for k in 0..nq {
                let c = local(e * nq + k, k);
                for (s, v) in acc.iter_mut().zip(c) {
                    *s += v;
                }
            }
            for (ab, &p) in pos.iter().enumerate() {
                if p != NONE {
                    vals[p] += acc[ab];
                }
            }
        }
        out
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn elements_per_dir(&self) -> usize {
        self.m
    }

    pub fn quad_order(&self) -> usize {
        self.q
    }

    pub fn mesh_width(&self) -> (f64, f64) {
        (self.hx, self.hy)
    }

    /// Number of free (interior) dofs.
    pub fn n(&self) -> usize {
        self.free_nodes.len()
    }

    /// Number of Q2 nodes including the boundary, `(2m+1)²`.
    pub fn n_nodes(&self) -> usize {
        self.free_index.len()
    }

    pub fn nodes_per_dir(&self) -> usize {
        2 * self.m + 1
    }

    pub fn node_coords(&self, g: usize) -> (f64, f64) {
        let nn = self.nodes_per_dir();
        (self.domain.ax + (g % nn) as f64 * 0.5 * self.hx, self.domain.ay + (g / nn) as f64 * 0.5 * self.hy)
    }

    pub fn is_boundary(&self, g: usize) -> bool {
        self.free_index[g] == NONE
    }

    pub fn boundary_mask(&self) -> Vec<bool> {
        self.free_index.iter().map(|&f| f == NONE).collect()
    }

    /// Free index of global node `g`.
    pub fn free_index(&self, g: usize) -> Option<usize> {
        let f = self.free_index[g];
        (f != NONE).then_some(f)
    }

    /// Global node of free dof `a`.
    pub fn free_node(&self, a: usize) -> usize {
        self.free_nodes[a]
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn num_quad_points(&self) -> usize {
        self.quad_coords.len()
    }

    pub fn points_per_element(&self) -> usize {
        self.q * self.q
    }

    pub fn quad_coords(&self) -> &[[f64; 2]] {
        &self.quad_coords
    }

    /// Weight of global quadrature point `g` (Jacobian included).
    pub fn quad_weight(&self, g: usize) -> f64 {
        self.weights[g % self.weights.len()]
    }

    /// Reference coordinates in `[-1,1]²` of the local quadrature points.
    pub fn reference_points(&self) -> &[(f64, f64)] {
        &self.ref_points
    }

    /// Free indices of the nine element nodes (`None` on the boundary).
    pub fn element_dofs(&self, e: usize) -> [Option<usize>; NLOC] {
        let (m, nn) = (self.m, self.nodes_per_dir());
        let (ex, ey) = (e % m, e / m);
        std::array::from_fn(|a| self.free_index((2 * ey + a / 3) * nn + 2 * ex + a % 3))
    }

    /// Nodal interpolant on the free dofs.
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> C64) -> Vec<C64> {
        self.free_nodes
            .iter()
            .map(|&g| {
                let (x, y) = self.node_coords(g);
                f(x, y)
            })
            .collect()
    }

    /// Extends free-dof coefficients by zero boundary values.
    pub fn to_full_nodes(&self, coeffs: &[C64]) -> Vec<C64> {
        assert_eq!(coeffs.len(), self.n());
        self.free_index.iter().map(|&f| if f == NONE { C64::new(0.0, 0.0) } else { coeffs[f] }).collect()
    }

    /// Restriction of nodal values to the free dofs.
    pub fn from_full_nodes(&self, values: &[C64]) -> Result<Vec<C64>> {
        if values.len() != self.n_nodes() {
            return Err(Error::Dimension { expected: self.n_nodes(), got: values.len() });
        }
        Ok(self.free_nodes.iter().map(|&g| values[g]).collect())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::Dimension { expected: self.n(), got: len });
        }
        Ok(())
    }

    fn gather(&self, e: usize, coeffs: &[C64]) -> [C64; NLOC] {
        let d = self.element_dofs(e);
        std::array::from_fn(|a| d[a].map_or(C64::new(0.0, 0.0), |i| coeffs[i]))
    }

    /// `Σ_a c_a ψ_a(x_q)` at every quadrature point.
    pub fn eval_quadrature(&self, coeffs: &[C64]) -> Result<QuadField> {
        self.check_len(coeffs.len())?;
        Ok(QuadField { values: self.eval_values(coeffs), gradients: None })
    }

    /// Values and gradients at every quadrature point.
    pub fn eval_quadrature_with_gradients(&self, coeffs: &[C64]) -> Result<QuadField> {
        self.check_len(coeffs.len())?;
        let nq = self.points_per_element();
        let mut grads = Vec::with_capacity(self.num_quad_points());
        for e in 0..self.m * self.m {
            let c = self.gather(e, coeffs);
            for k in 0..nq {
                let mut g = [C64::new(0.0, 0.0); 2];
                for a in 0..NLOC {
                    g[0] += c[a] * self.grads[k][a][0];
                    g[1] += c[a] * self.grads[k][a][1];
                }
                grads.push(g);
            }
        }
        Ok(QuadField { values: self.eval_values(coeffs), gradients: Some(grads) })
    }

    pub(crate) fn eval_values(&self, coeffs: &[C64]) -> Vec<C64> {
        let nq = self.points_per_element();
        let mut out = Vec::with_capacity(self.num_quad_points());
        for e in 0..self.m * self.m {
            let c = self.gather(e, coeffs);
            for k in 0..nq {
                let b = &self.basis[k];
                out.push((0..NLOC).map(|a| c[a] * b[a]).sum());
            }
        }
        out
    }

    /// `|φ|²` at every quadrature point.
    pub fn density(&self, coeffs: &[C64]) -> Vec<f64> {
        self.eval_values(coeffs).iter().map(|z| z.norm_sqr()).collect()
    }

    /// Load vector `f_a = Σ_q ω_q f(x_q) ψ_a(x_q)`.
    pub fn integrate_against_basis(&self, f: &[C64]) -> Result<Vec<C64>> {
        if f.len() != self.num_quad_points() {
            return Err(Error::Dimension { expected: self.num_quad_points(), got: f.len() });
        }
        let nq = self.points_per_element();
        let mut out = vec![C64::new(0.0, 0.0); self.n()];
        for e in 0..self.m * self.m {
            let d = self.element_dofs(e);
            let mut acc = [C64::new(0.0, 0.0); NLOC];
            for k in 0..nq {
                let fw = f[e * nq + k] * self.weights[k];
                for a in 0..NLOC {
                    acc[a] += fw * self.basis[k][a];
                }
            }
            for a in 0..NLOC {
                if let Some(i) = d[a] {
                    out[i] += acc[a];
                }
            }
        }
        Ok(out)
    }

    /// `W(w)_ab = Σ_q ω_q w(x_q) ψ_a ψ_b` for a nonnegative weight.
    pub fn assemble_weighted_mass(&self, w: &[f64]) -> Result<CsrMatrix<f64>> {
        if w.len() != self.num_quad_points() {
            return Err(Error::Dimension { expected: self.num_quad_points(), got: w.len() });
        }
        if let Some((index, &value)) = w.iter().enumerate().find(|(_, &v)| !(v >= -1e-14)) {
            return Err(Error::NegativeWeight { index, value });
        }
        Ok(self.assemble_weighted_mass_signed(w))
    }

    /// Same as [`assemble_weighted_mass`](Self::assemble_weighted_mass) without the sign check.
    pub fn assemble_weighted_mass_signed(&self, w: &[f64]) -> CsrMatrix<f64> {
        assert_eq!(w.len(), self.num_quad_points());
        let nq = self.points_per_element();
        let mut out = CsrMatrix::zeros(self.pattern.clone());
        let vals = out.values_mut();
        for (e, pos) in self.elem_pos.iter().enumerate() {
            let mut acc = [0.0; NLOC * NLOC];
            for k in 0..nq {
                let wk = w[e * nq + k];
                if wk != 0.0 {
                    for (s, &v) in acc.iter_mut().zip(&self.mass_products[k]) {
                        *s += wk * v;
                    }
                }
            }
            for (ab, &p) in pos.iter().enumerate() {
                if p != NONE {
                    vals[p] += acc[ab];
                }
            }
        }
        out
    }

    /// Complex-weighted mass matrix; symmetric but not Hermitian.
    pub fn assemble_weighted_mass_complex(&self, w: &[C64]) -> CsrMatrix<C64> {
        assert_eq!(w.len(), self.num_quad_points());
        let nq = self.points_per_element();
        let mut out = CsrMatrix::zeros(self.pattern.clone());
        let vals = out.values_mut();
        for (e, pos) in self.elem_pos.iter().enumerate() {
            let mut acc = [C64::new(0.0, 0.0); NLOC * NLOC];
            for k in 0..nq {
                let wk = w[e * nq + k];
                for (s, &v) in acc.iter_mut().zip(&self.mass_products[k]) {
                    *s += wk * v;
                }
            }
            for (ab, &p) in pos.iter().enumerate() {
                if p != NONE {
                    vals[p] += acc[ab];
                }
            }
        }
        out
    }

    /// `Q_ij = ∫ |φ_i|² |φ_j|²`.
    pub fn quartic_interactions(&self, phi: &PFrame) -> Result<DMatrix<f64>> {
        self.check_len(phi.n())?;
        let dens: Vec<Vec<f64>> = phi.columns().map(|c| self.density(c)).collect();
        Ok(self.quartic_from_densities(&dens))
    }

    pub fn quartic_from_densities(&self, dens: &[Vec<f64>]) -> DMatrix<f64> {
        let p = dens.len();
        let mut out = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let s: f64 = dens[i]
                    .iter()
                    .zip(&dens[j])
                    .enumerate()
                    .map(|(g, (a, b))| self.quad_weight(g) * a * b)
                    .sum();
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    /// `Σ_q ω_q f(x_q)`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().enumerate().map(|(g, v)| self.quad_weight(g) * v).sum()
    }

    /// Mass, stiffness and rotation matrices over all nodes, before the
    /// Dirichlet rows and columns are removed.
    pub fn unconstrained_matrices(&self) -> [CsrMatrix<f64>; 3] {
        let (m, nn) = (self.m, self.nodes_per_dir());
        let dofs = |e: usize| -> [usize; NLOC] {
            let (ex, ey) = (e % m, e / m);
            std::array::from_fn(|a| (2 * ey + a / 3) * nn + 2 * ex + a % 3)
        };
        let mut rows = vec![Vec::new(); nn * nn];
        for e in 0..m * m {
            let d = dofs(e);
            for &a in &d {
                rows[a].extend_from_slice(&d);
            }
        }
        let pattern = Arc::new(SparsityPattern::from_rows(rows));
        let nq = self.points_per_element();
        let mut mats = [
            CsrMatrix::zeros(pattern.clone()),
            CsrMatrix::zeros(pattern.clone()),
            CsrMatrix::zeros(pattern.clone()),
        ];
        for e in 0..m * m {
            let d = dofs(e);
            for k in 0..nq {
                let w = self.weights[k];
                let [x, y] = self.quad_coords[e * nq + k];
                let (b, g) = (&self.basis[k], &self.grads[k]);
                for a in 0..NLOC {
                    for c in 0..NLOC {
                        let pos = pattern.find(d[a], d[c]).unwrap();
                        mats[0].values_mut()[pos] += w * b[a] * b[c];
                        mats[1].values_mut()[pos] += w * (g[a][0] * g[c][0] + g[a][1] * g[c][1]);
                        mats[2].values_mut()[pos] += w * b[a] * (x * g[c][1] - y * g[c][0]);
                    }
                }
            }
        }
        mats
    }

    /// Row sums of the unconstrained mass matrix, one weight per node.
    pub fn lumped_node_weights(&self) -> Vec<f64> {
        let [mfull, _, _] = self.unconstrained_matrices();
        let pat = mfull.pattern().clone();
        (0..pat.n()).map(|i| pat.row(i).map(|k| mfull.values()[k]).sum()).collect()
    }

    /// `‖v‖²_M` for one column.
    pub fn mass_norm_sqr(&self, v: &[C64]) -> f64 {
        let mv = self.mass.mul_vec(v);
        crate::linalg::dot_re(v, &mv)
    }
}
