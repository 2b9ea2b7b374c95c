//! Frame calculus on jet fields and the [`GeometrySample`] carrier.
//!
//! A frame is either a coordinate frame (zero brackets, derivatives are
//! partials of the jets) or a left-invariant frame (constant brackets, all
//! component functions constant). The same code computes connections,
//! curvature and covariant derivatives for both.

use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace};
use crate::kernels as k;
use crate::scalar::Scalar;
use crate::tensor::{AltTensor, CurvatureTensor, Metric, SymBilinear};

pub type Field = Vec<Jet>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Chart,
    Invariant,
}

/// Pointwise geometry at one point together with enough jet data to take
/// `depth` derivatives of the connection coefficients.
#[derive(Debug, Clone)]
pub struct GeometrySample {
    n: usize,
    depth: usize,
    backend: Backend,
    space: &'static JetSpace,
    brackets: Vec<f64>,
    g: Field,
    ginv: Field,
    gamma: Field,
    h: Field,
    phi: Field,
    f: Option<Jet>,
}

fn values(f: &[Jet]) -> Vec<f64> {
    f.iter().map(|j| j.value()).collect()
}

impl GeometrySample {
    /// Assemble a sample from jet fields. `brackets[(i*n+j)*n+k] = c^k_{ij}`.
    pub fn from_fields(
        backend: Backend,
        depth: usize,
        brackets: Vec<f64>,
        g: Field,
        h: Option<Field>,
        phi: Option<Field>,
        f: Option<Jet>,
    ) -> Result<GeometrySample> {
        let space = g[0].space();
        let n = space.nvars();
        if g.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: g.len() });
        }
        Metric::new(n, values(&g))?;
        let ginv = k::inverse(&g, n).ok_or(Error::NotSpd)?;
        let zero = Jet::zero(space);
        let h = h.unwrap_or_else(|| vec![zero.clone(); k::pow(n, 3)]);
        let phi = phi.unwrap_or_else(|| vec![zero.clone(); n]);
        let mut s = GeometrySample { n, depth, backend, space, brackets, g, ginv, gamma: Vec::new(), h, phi, f };
        s.gamma = s.koszul();
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn jet_depth(&self) -> usize {
        self.depth
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn space(&self) -> &'static JetSpace {
        self.space
    }

    pub fn brackets(&self) -> &[f64] {
        &self.brackets
    }

    pub fn require_depth(&self, need: usize) -> Result<()> {
        if self.backend == Backend::Chart && self.depth < need {
            return Err(Error::InsufficientJetDepth { need, have: self.depth });
        }
        Ok(())
    }

    // ---- jet level ----

    pub fn g_jet(&self) -> &Field {
        &self.g
    }

    pub fn ginv_jet(&self) -> &Field {
        &self.ginv
    }

    pub fn gamma_jet(&self) -> &Field {
        &self.gamma
    }

    pub fn h_jet(&self) -> &Field {
        &self.h
    }

    pub fn phi_jet(&self) -> &Field {
        &self.phi
    }

    pub fn f_jet(&self) -> Option<&Jet> {
        self.f.as_ref()
    }

    /// Frame derivative `e_a(x)`.
    pub fn deriv(&self, x: &Jet, a: usize) -> Jet {
        x.partial(a)
    }

    /// `Γ^k_{ij}` with `∇_{e_i} e_j = Γ^k_{ij} e_k` from the Koszul formula.
    fn koszul(&self) -> Field {
        let n = self.n;
        let c = &self.brackets;
        let gv = |i: usize, j: usize| &self.g[i * n + j];
        // lowered: L[(i*n+j)*n+l] = g(∇_i e_j, e_l)
        let mut low = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let mut x = self.deriv(gv(j, l), i);
                    x.add_scaled(&self.deriv(gv(i, l), j), 1.0);
                    x.add_scaled(&self.deriv(gv(i, j), l), -1.0);
                    for m in 0..n {
                        let cij = c[(i * n + j) * n + m];
                        let cjl = c[(j * n + l) * n + m];
                        let cli = c[(l * n + i) * n + m];
                        x.add_scaled(gv(m, l), cij);
                        x.add_scaled(gv(m, i), -cjl);
                        x.add_scaled(gv(m, j), cli);
                    }
                    low.push(x.scale(0.5));
                }
            }
        }
        let mut gamma = k::zeros(&self.g[0], n * n * n);
        for ij in 0..n * n {
            for kk in 0..n {
                let o = &mut gamma[ij * n + kk];
                for l in 0..n {
                    o.add_product(&self.ginv[kk * n + l], &low[ij * n + l]);
                }
            }
        }
        gamma
    }

    /// `Γ̃ = Γ − ½ H^k_{ij}`, the connection with torsion `−H`.
    pub fn torsion_gamma_jet(&self) -> Field {
        let n = self.n;
        let hr = k::raise(&self.h, 3, 2, &self.ginv, n);
        self.gamma.iter().zip(&hr).map(|(a, b)| a - &b.scale(0.5)).collect()
    }

    /// Curvature `R_{abcd} = g(R_{e_a,e_b} e_c, e_d)` of a connection given by coefficients.
    pub fn curvature_of(&self, gamma: &[Jet]) -> Field {
        let n = self.n;
        let gm = |i: usize, j: usize, kk: usize| &gamma[(i * n + j) * n + kk];
        let mut up = Vec::with_capacity(k::pow(n, 4));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for p in 0..n {
                        let mut x = self.deriv(gm(b, c, p), a);
                        x.add_scaled(&self.deriv(gm(a, c, p), b), -1.0);
                        for m in 0..n {
                            x.add_product(gm(b, c, m), gm(a, m, p));
                            let mut y = Jet::zero(self.space);
                            y.add_product(gm(a, c, m), gm(b, m, p));
                            x.add_scaled(&y, -1.0);
                            let cab = self.brackets[(a * n + b) * n + m];
                            if cab != 0.0 {
                                x.add_scaled(gm(m, c, p), -cab);
                            }
                        }
                        up.push(x);
                    }
                }
            }
        }
        let mut out = k::zeros(&self.g[0], k::pow(n, 4));
        for abc in 0..n * n * n {
            for d in 0..n {
                let o = &mut out[abc * n + d];
                for p in 0..n {
                    o.add_product(&self.g[d * n + p], &up[abc * n + p]);
                }
            }
        }
        out
    }

    pub fn riemann_jet(&self) -> Field {
        self.curvature_of(&self.gamma)
    }

    pub fn torsion_curvature_jet(&self) -> Field {
        self.curvature_of(&self.torsion_gamma_jet())
    }

    /// `(∇_a T)_{b1..bp}`, derivative index first; `conns[k]` acts on slot k.
    pub fn cov_deriv_mixed(&self, t: &[Jet], rank: usize, conns: &[&[Jet]]) -> Field {
        let n = self.n;
        assert_eq!(conns.len(), rank);
        let len = k::pow(n, rank);
        let mut out = Vec::with_capacity(n * len);
        for a in 0..n {
            for (pos, tv) in t.iter().enumerate() {
                let mut x = self.deriv(tv, a);
                let idx = k::unflatten(pos, n, rank);
                for (slot, conn) in conns.iter().enumerate() {
                    let stride = k::pow(n, rank - 1 - slot);
                    let base = pos - idx[slot] * stride;
                    for m in 0..n {
                        let mut y = Jet::zero(self.space);
                        y.add_product(&conn[(a * n + idx[slot]) * n + m], &t[base + m * stride]);
                        x.add_scaled(&y, -1.0);
                    }
                }
                out.push(x);
            }
        }
        out
    }

    pub fn cov_deriv_with(&self, t: &[Jet], rank: usize, conn: &[Jet]) -> Field {
        let conns: Vec<&[Jet]> = vec![conn; rank];
        self.cov_deriv_mixed(t, rank, &conns)
    }

    /// Levi-Civita covariant derivative.
    pub fn cov_deriv(&self, t: &[Jet], rank: usize) -> Field {
        if rank == 0 {
            return (0..self.n).map(|a| self.deriv(&t[0], a)).collect();
        }
        self.cov_deriv_with(t, rank, &self.gamma)
    }

    /// Exterior derivative of a p-form field (determinant normalization).
    pub fn exterior_derivative(&self, form: &[Jet], p: usize) -> Field {
        let n = self.n;
        let nab = self.cov_deriv(form, p);
        let len = k::pow(n, p + 1);
        let mut out = Vec::with_capacity(len);
        for pos in 0..len {
            let idx = k::unflatten(pos, n, p + 1);
            let mut x = Jet::zero(self.space);
            for kk in 0..=p {
                let mut rest: Vec<usize> = idx.clone();
                let a = rest.remove(kk);
                let sign = if kk % 2 == 0 { 1.0 } else { -1.0 };
                let j = a * k::pow(n, p) + k::flatten(&rest, n);
                x.add_scaled(&nab[j], sign);
            }
            out.push(x);
        }
        out
    }

    /// Codifferential `(δα)_{b..} = −g^{ij} (∇_i α)_{j b..}`.
    pub fn codifferential(&self, form: &[Jet], p: usize) -> Field {
        self.divergence(&self.cov_deriv(form, p), p).into_iter().map(|x| x.scale(-1.0)).collect()
    }

    /// `g^{ij} (∇T)_{i j ...}` for a covariant derivative of a rank-p tensor.
    pub fn divergence(&self, nab: &[Jet], p: usize) -> Field {
        let n = self.n;
        let rest = k::pow(n, p - 1);
        let mut out = k::zeros(&nab[0], rest);
        for i in 0..n {
            for j in 0..n {
                let gij = &self.ginv[i * n + j];
                for r in 0..rest {
                    out[r].add_product(gij, &nab[(i * n + j) * rest + r]);
                }
            }
        }
        out
    }

    /// `ν_g` as a jet field (fixed positive orientation).
    pub fn volume_jet(&self) -> Field {
        let n = self.n;
        let s = k::determinant(&self.g, n).sqrt();
        k::epsilon(n).into_iter().map(|e| s.scale(e)).collect()
    }

    // ---- pointwise ----

    pub fn metric(&self) -> Metric {
        Metric::new(self.n, values(&self.g)).expect("validated at construction")
    }

    pub fn christoffel(&self) -> Vec<f64> {
        values(&self.gamma)
    }

    pub fn riemann(&self) -> CurvatureTensor {
        CurvatureTensor::new(self.n, values(&self.riemann_jet())).expect("curvature is pair-antisymmetric")
    }

    pub fn ricci(&self) -> SymBilinear {
        crate::tensor::ricci(&self.riemann(), &self.metric())
    }

    pub fn scalar_curvature(&self) -> f64 {
        self.ricci().trace(&self.metric())
    }

    /// `∇R` as `[e][a][b][c][d]`.
    pub fn nabla_riemann(&self) -> Vec<f64> {
        values(&self.cov_deriv(&self.riemann_jet(), 4))
    }

    pub fn h(&self) -> AltTensor {
        AltTensor::antisymmetrized(self.n, 3, &values(&self.h)).expect("rank checked")
    }

    pub fn nabla_h(&self) -> Vec<f64> {
        values(&self.cov_deriv(&self.h, 3))
    }

    pub fn nabla2_h(&self) -> Vec<f64> {
        let nh = self.cov_deriv(&self.h, 3);
        values(&self.cov_deriv(&nh, 4))
    }

    pub fn dh(&self) -> AltTensor {
        AltTensor::antisymmetrized(self.n, 4, &values(&self.exterior_derivative(&self.h, 3))).expect("rank checked")
    }

    pub fn delta_h(&self) -> AltTensor {
        AltTensor::antisymmetrized(self.n, 2, &values(&self.codifferential(&self.h, 3))).expect("rank checked")
    }

    pub fn f(&self) -> Option<f64> {
        self.f.as_ref().map(|x| x.value())
    }

    pub fn df(&self) -> Option<Vec<f64>> {
        self.f.as_ref().map(|x| (0..self.n).map(|a| self.deriv(x, a).value()).collect())
    }

    pub fn hess_f(&self) -> Option<SymBilinear> {
        self.f.as_ref().map(|x| {
            let d: Field = (0..self.n).map(|a| self.deriv(x, a)).collect();
            SymBilinear::symmetrized(self.n, &values(&self.cov_deriv(&d, 1)))
        })
    }

    pub fn phi(&self) -> Vec<f64> {
        values(&self.phi)
    }

    pub fn nabla_phi(&self) -> Vec<f64> {
        values(&self.cov_deriv(&self.phi, 1))
    }

    pub fn torsion_curvature(&self) -> CurvatureTensor {
        CurvatureTensor::new(self.n, values(&self.torsion_curvature_jet())).expect("metric connection")
    }

    /// `R^{g,H}` assembled from `R^g`, `∇H` and `[H_u, H_v]` instead of from `Γ̃`.
    pub fn torsion_curvature_assembled(&self) -> CurvatureTensor {
        let n = self.n;
        let g = self.metric();
        let r = self.riemann();
        let nh = self.nabla_h();
        let h = self.h();
        let hr = k::raise(h.comps(), 3, 2, g.inv(), n);
        let mut out = r.comps().to_vec();
        for (i, o) in out.iter_mut().enumerate() {
            let [a, b, c, d] = [i / (n * n * n), (i / (n * n)) % n, (i / n) % n, i % n];
            // −½(∇_a H)(b, c, d) + ½(∇_b H)(a, c, d)
            *o += -0.5 * nh[((a * n + b) * n + c) * n + d] + 0.5 * nh[((b * n + a) * n + c) * n + d];
            // ¼ g([H_a, H_b] e_c, e_d) with (H_u e_c)^m = H_{u c}^m
            let mut comm = 0.0;
            for m in 0..n {
                comm += hr[(b * n + c) * n + m] * h.comps()[(a * n + m) * n + d] - hr[(a * n + c) * n + m] * h.comps()[(b * n + m) * n + d];
            }
            *o += 0.25 * comm;
        }
        CurvatureTensor::new(n, out).expect("pair antisymmetry")
    }
}

/// Pointwise values of a jet field.
pub fn field_values(f: &[Jet]) -> Vec<f64> {
    values(f)
}

/// Constant jet field from pointwise values.
pub fn constant_field(space: &'static JetSpace, v: &[f64]) -> Field {
    v.iter().map(|&x| Jet::constant(space, x)).collect()
}

/// Zero-like helper usable for any scalar type.
pub fn zero_field<S: Scalar>(like: &S, len: usize) -> Vec<S> {
    k::zeros(like, len)
}
