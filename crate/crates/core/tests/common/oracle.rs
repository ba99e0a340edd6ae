//! Brute-force reference implementation on tiny grids: global Q2 basis
//! functions evaluated pointwise and integrated with a 10-point rule from
//! the Golub–Welsch construction.

use nalgebra::{DMatrix, DVector};
use rotbec::linalg::embedding::{block_matrix, embed, unembed};
use rotbec::{GpeProblem, MetricSelector, ModelSpec, PFrame, C64};

pub struct Oracle {
    pub spec: ModelSpec,
    pub n: usize,
    /// Free index of every node, if interior.
    free: Vec<Option<usize>>,
    nn: usize,
    h: (f64, f64),
    /// Physical quadrature points with weights.
    points: Vec<(f64, f64, f64)>,
}

fn lagrange(t: f64) -> [f64; 3] {
    [2.0 * (t - 0.5) * (t - 1.0), -4.0 * t * (t - 1.0), 2.0 * t * (t - 0.5)]
}

fn lagrange_d(t: f64) -> [f64; 3] {
    [4.0 * t - 3.0, -8.0 * t + 4.0, 4.0 * t - 1.0]
}

impl Oracle {
    pub fn new(spec: &ModelSpec) -> Self {
        let m = spec.elements_per_dir;
        let nn = 2 * m + 1;
        let free: Vec<Option<usize>> = {
            let mut k = 0;
            (0..nn * nn)
                .map(|g| {
                    let (i, j) = (g % nn, g / nn);
                    if i == 0 || j == 0 || i == nn - 1 || j == nn - 1 {
                        None
                    } else {
                        k += 1;
                        Some(k - 1)
                    }
                })
                .collect()
        };
        let d = spec.domain;
        let h = (d.width() / m as f64, d.height() / m as f64);
        let (s, w) = super::golub_welsch(10);
        let mut points = Vec::new();
        for ey in 0..m {
            for ex in 0..m {
                for (a, sa) in s.iter().enumerate() {
                    for (b, sb) in s.iter().enumerate() {
                        let x = d.ax + h.0 * (ex as f64 + 0.5 * (sa + 1.0));
                        let y = d.ay + h.1 * (ey as f64 + 0.5 * (sb + 1.0));
                        points.push((x, y, w[a] * w[b] * 0.25 * h.0 * h.1));
                    }
                }
            }
        }
        let n = (nn - 2) * (nn - 2);
        Oracle { spec: spec.clone(), n, free, nn, h, points }
    }

    /// Values and gradients of every free basis function at `(x, y)`.
    pub fn basis(&self, x: f64, y: f64) -> Vec<(usize, f64, f64, f64)> {
        let d = self.spec.domain;
        let m = self.spec.elements_per_dir;
        let fx = (x - d.ax) / self.h.0;
        let fy = (y - d.ay) / self.h.1;
        let ex = (fx.floor() as usize).min(m - 1);
        let ey = (fy.floor() as usize).min(m - 1);
        let (tx, ty) = (fx - ex as f64, fy - ey as f64);
        let (lx, ly) = (lagrange(tx), lagrange(ty));
        let (dx, dy) = (lagrange_d(tx), lagrange_d(ty));
        let mut out = Vec::new();
        for b in 0..3 {
            for a in 0..3 {
                let g = (2 * ex + a) + self.nn * (2 * ey + b);
                if let Some(k) = self.free[g] {
                    out.push((k, lx[a] * ly[b], dx[a] * ly[b] / self.h.0, lx[a] * dy[b] / self.h.1));
                }
            }
        }
        out
    }

    pub fn field(&self, c: &[C64], x: f64, y: f64) -> C64 {
        self.basis(x, y).iter().map(|&(k, v, _, _)| c[k] * v).sum()
    }

    /// `∫ f ψ_a ψ_b`, `∫ ∇ψ_a·∇ψ_b`, `∫ ψ_a (x∂_y − y∂_x) ψ_b`.
    pub fn matrices(&self, f: impl Fn(f64, f64) -> C64) -> (DMatrix<C64>, DMatrix<f64>, DMatrix<f64>) {
        let n = self.n;
        let mut wm = DMatrix::<C64>::zeros(n, n);
        let mut s = DMatrix::zeros(n, n);
        let mut r = DMatrix::zeros(n, n);
        for &(x, y, w) in &self.points {
            let fv = f(x, y);
            let bs = self.basis(x, y);
            for &(a, va, gxa, gya) in &bs {
                for &(b, vb, gxb, gyb) in &bs {
                    wm[(a, b)] += fv * (w * va * vb);
                    s[(a, b)] += w * (gxa * gxb + gya * gyb);
                    r[(a, b)] += w * va * (x * gyb - y * gxb);
                }
            }
        }
        (wm, s, r)
    }

    pub fn mass(&self) -> DMatrix<f64> {
        self.matrices(|_, _| C64::new(1.0, 0.0)).0.map(|z| z.re)
    }

    pub fn densities(&self, phi: &PFrame) -> Vec<Vec<f64>> {
        self.points
            .iter()
            .map(|&(x, y, _)| (0..phi.p()).map(|j| self.field(phi.col(j), x, y).norm_sqr()).collect())
            .collect()
    }

    pub fn linear_part(&self, j: usize) -> DMatrix<C64> {
        let pot = self.spec.potentials[j];
        let (v, s, r) = self.matrices(|x, y| C64::new(pot.eval(x, y), 0.0));
        let om = self.spec.frequencies[j];
        v + s.map(|z| C64::new(z, 0.0)) + r.map(|z| C64::new(0.0, om * z))
    }

    pub fn hamiltonian(&self, phi: &PFrame, j: usize) -> DMatrix<C64> {
        let p = phi.p();
        let kap = self.spec.interaction.clone();
        let w = self
            .matrices(|x, y| {
                let rho: f64 = (0..p).map(|i| kap[j][i] * self.field(phi.col(i), x, y).norm_sqr()).sum();
                C64::new(rho, 0.0)
            })
            .0;
        self.linear_part(j) + w
    }

    pub fn energy(&self, phi: &PFrame) -> f64 {
        let p = phi.p();
        let mut e = 0.0;
        for j in 0..p {
            let v = DVector::from_column_slice(phi.col(j));
            e += 0.5 * (v.adjoint() * self.linear_part(j) * &v)[(0, 0)].re;
        }
        for (pt, d) in self.points.iter().zip(self.densities(phi)) {
            for i in 0..p {
                for j in 0..p {
                    e += 0.25 * pt.2 * self.spec.interaction[i][j] * d[i] * d[j];
                }
            }
        }
        e
    }
}

pub fn max_rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax()
}

pub fn specs() -> Vec<ModelSpec> {
    let mut a = super::toy2(2);
    a.quad_order = 5;
    let mut b = super::toy1(2);
    b.quad_order = 10;
    let mut c = super::toy2(3);
    c.quad_order = 5;
    vec![a, b, c]
}

/// Dense real-embedded gradient for either metric.
pub fn oracle_gradient(o: &Oracle, phi: &PFrame, sel: MetricSelector) -> PFrame {
    let p = phi.p();
    let mass = o.mass();
    let mass_c = mass.map(|z| C64::new(z, 0.0));
    let mut cols = Vec::new();
    for j in 0..p {
        let a = o.hamiltonian(phi, j);
        let v = DVector::from_column_slice(phi.col(j));
        let lam = (v.adjoint() * &a * &v)[(0, 0)].re / o.spec.masses[j];
        let g_real = match sel {
            MetricSelector::EnergyAdaptive => block_matrix(&a),
            MetricSelector::Lagrangian(w) => {
                // h v + c v̄ with h = A + κ W(|φ|²) − ωλM, c = κ W(φ²).
                let k = o.spec.interaction[j][j];
                let h = &a + o.matrices(|x, y| C64::new(k * o.field(phi.col(j), x, y).norm_sqr(), 0.0)).0
                    - &mass_c * C64::new(w * lam, 0.0);
                let c = o
                    .matrices(|x, y| {
                        let f = o.field(phi.col(j), x, y);
                        f * f * k
                    })
                    .0;
                let conj = DMatrix::from_fn(2 * o.n, 2 * o.n, |i, l| {
                    if i == l {
                        if i < o.n {
                            1.0
                        } else {
                            -1.0
                        }
                    } else {
                        0.0
                    }
                });
                block_matrix(&h) + block_matrix(&c) * conj
            }
        };
        let lu = g_real.lu();
        let y = match sel {
            MetricSelector::EnergyAdaptive => v.clone(),
            _ => {
                let av = &a * &v;
                DVector::from_vec(unembed(&lu.solve(&embed(av.as_slice())).unwrap()))
            }
        };
        let mv = &mass_c * &v;
        let u = DVector::from_vec(unembed(&lu.solve(&embed(mv.as_slice())).unwrap()));
        let num = (v.adjoint() * &mass_c * &y)[(0, 0)].re;
        let den = (v.adjoint() * &mass_c * &u)[(0, 0)].re;
        let g = y - u * C64::new(num / den, 0.0);
        cols.push(g.as_slice().to_vec());
    }
    PFrame::from_columns(cols)
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Mass, stiffness, rotation, potential and `A0` against the oracle to 1e−12.
pub fn check_constant_matrices() -> Result<(), String> {
    for spec in specs() {
        let problem = GpeProblem::new(&spec).map_err(|e| e.to_string())?;
        let disc = problem.disc();
        let o = Oracle::new(&spec);
        ensure!(o.n == problem.n(), "dof count {} vs {}", o.n, problem.n());
        let (_, s, r) = o.matrices(|_, _| C64::new(1.0, 0.0));
        let dm = max_rel(&disc.mass.to_dense_real(), &o.mass());
        let ds = max_rel(&disc.stiffness.to_dense_real(), &s);
        let dr = max_rel(&disc.rotation.to_dense_real(), &r);
        ensure!(dm.max(ds).max(dr) < 1e-12, "M {dm:.2e}, S {ds:.2e}, R {dr:.2e}");
        for j in 0..spec.p() {
            let pot = spec.potentials[j];
            let v = o.matrices(|x, y| C64::new(pot.eval(x, y), 0.0)).0.map(|z| z.re);
            let dv = max_rel(&disc.potential_mass[j].to_dense_real(), &v);
            ensure!(dv < 1e-12, "V_{j}: {dv:.2e}");
            let a0 = problem.linear_part(j).to_dense();
            let d = (a0 - o.linear_part(j)).map(|z| z.norm()).max();
            ensure!(d < 1e-12 * v.amax().max(1.0), "A0_{j}: {d:.2e}");
        }
    }
    Ok(())
}

/// Energy, Hamiltonians, multipliers and residual at random frames to 1e−9.
pub fn check_energy_and_residual(seed: u64) -> Result<(), String> {
    let mut rng = super::rng(seed);
    for spec in specs() {
        let problem = GpeProblem::new(&spec).map_err(|e| e.to_string())?;
        let o = Oracle::new(&spec);
        let p = spec.p();
        for _ in 0..3 {
            let phi = rotbec::manifold::normalize(&problem, &super::random_frame(o.n, p, &mut rng))
                .map_err(|e| e.to_string())?;
            let st = problem.linearize(&phi).map_err(|e| e.to_string())?;
            let e = o.energy(&phi);
            ensure!((st.energy - e).abs() < 1e-9 * e.abs(), "energy {} vs {e}", st.energy);
            let mass = o.mass().map(|z| C64::new(z, 0.0));
            let mut r2 = 0.0;
            for j in 0..p {
                let a = o.hamiltonian(&phi, j);
                let d = (st.a[j].to_dense() - &a).map(|z| z.norm()).max();
                ensure!(d < 1e-9 * a.map(|z| z.norm()).max(), "A_{j}: {d:.2e}");
                let v = DVector::from_column_slice(phi.col(j));
                let lam = (v.adjoint() * &a * &v)[(0, 0)].re / spec.masses[j];
                ensure!(
                    (st.lambda[j] - lam).abs() < 1e-9 * lam.abs(),
                    "lambda_{j} {} vs {lam}",
                    st.lambda[j]
                );
                let res = &a * &v - &mass * &v * C64::new(lam, 0.0);
                r2 += (res.adjoint() * &mass * &res)[(0, 0)].re;
            }
            let r = st.residual().0;
            ensure!((r - r2.sqrt()).abs() < 1e-9 * r.max(1e-300), "residual {r} vs {}", r2.sqrt());
        }
    }
    Ok(())
}

/// Riemannian gradients for both metrics against dense embedded solves.
/// Returns how many Lagrangian cases were compared.
pub fn check_gradients(seed: u64) -> Result<usize, String> {
    let mut rng = super::rng(seed);
    let mut lagrangian_checked = 0;
    for spec in specs() {
        let problem = GpeProblem::new(&spec).map_err(|e| e.to_string())?;
        let o = Oracle::new(&spec);
        let phi = rotbec::manifold::normalize(&problem, &super::random_frame(o.n, spec.p(), &mut rng))
            .map_err(|e| e.to_string())?;
        let st = problem.linearize(&phi).map_err(|e| e.to_string())?;
        for sel in [MetricSelector::EnergyAdaptive, MetricSelector::Lagrangian(0.3)] {
            let g = match rotbec::manifold::riemannian_grad(&st, sel, 1e-14, None) {
                Ok(g) => g.grad,
                // A random state can make the shifted block indefinite.
                Err(rotbec::Error::IndefiniteMetric { .. }) => continue,
                Err(e) => return Err(e.to_string()),
            };
            let want = oracle_gradient(&o, &phi, sel);
            let d = g.sub(&want).max_abs();
            ensure!(d < 1e-9 * want.max_abs(), "{sel:?}: {d:.2e}");
            lagrangian_checked += usize::from(sel != MetricSelector::EnergyAdaptive);
        }
    }
    Ok(lagrangian_checked)
}
