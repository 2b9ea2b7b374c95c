//! Left-invariant geometry: structure constants in, connection and curvature out.

use crate::error::{Error, Result};
use crate::jet::JetSpace;
use crate::kernels as k;
use crate::sample::{constant_field, Backend, GeometrySample};
use crate::tensor::{ricci, CurvatureTensor, Metric, SymBilinear};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const JACOBI_TOL: f64 = 1e-12;

/// Names accepted by [`catalog`].
pub const CATALOG: [&str; 7] = ["r3", "heisenberg", "su2", "sl2r", "e11", "e2", "hyperbolic"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LieAlgebraData {
    pub name: String,
    pub dim: usize,
    /// `c[(i*n+j)*n+k] = c^k_{ij}`, i.e. `[e_i, e_j] = c^k_{ij} e_k`.
    pub c: Vec<f64>,
}

impl LieAlgebraData {
    /// Builds from the brackets `[e_i, e_j] = Σ coef e_k` for `i < j`; fills antisymmetry.
    pub fn from_brackets(name: &str, dim: usize, brackets: &[(usize, usize, usize, f64)]) -> Result<LieAlgebraData> {
        let mut c = vec![0.0; k::pow(dim, 3)];
        for &(i, j, kk, v) in brackets {
            if i >= dim || j >= dim || kk >= dim || i == j {
                return Err(Error::Domain(format!("bad bracket index ({i},{j},{kk})")));
            }
            c[(i * dim + j) * dim + kk] += v;
            c[(j * dim + i) * dim + kk] -= v;
        }
        let alg = LieAlgebraData { name: name.to_string(), dim, c };
        let jac = alg.jacobi_residual();
        if jac > JACOBI_TOL {
            return Err(Error::Domain(format!("Jacobi identity fails ({jac:.3e})")));
        }
        Ok(alg)
    }

    pub fn bracket(&self, i: usize, j: usize) -> Vec<f64> {
        let n = self.dim;
        (0..n).map(|kk| self.c[(i * n + j) * n + kk]).collect()
    }

    pub fn bracket_vec(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let w = x[i] * y[j];
                if w != 0.0 {
                    for (kk, o) in out.iter_mut().enumerate() {
                        *o += w * self.c[(i * n + j) * n + kk];
                    }
                }
            }
        }
        out
    }

    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let e = |i: usize| -> Vec<f64> { (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect() };
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let t1 = self.bracket_vec(&e(a), &self.bracket_vec(&e(b), &e(c)));
                    let t2 = self.bracket_vec(&e(b), &self.bracket_vec(&e(c), &e(a)));
                    let t3 = self.bracket_vec(&e(c), &self.bracket_vec(&e(a), &e(b)));
                    for m in 0..n {
                        worst = worst.max((t1[m] + t2[m] + t3[m]).abs());
                    }
                }
            }
        }
        worst
    }

    /// Trace of `ad_{e_j}` for every j.
    pub fn ad_traces(&self) -> Vec<f64> {
        let n = self.dim;
        (0..n).map(|j| (0..n).map(|i| self.c[(j * n + i) * n + i]).sum()).collect()
    }

    pub fn is_unimodular(&self) -> bool {
        self.ad_traces().iter().all(|t| t.abs() <= JACOBI_TOL)
    }

    /// A left-invariant one-form is closed iff it annihilates all brackets.
    pub fn is_closed_one_form(&self, phi: &[f64]) -> bool {
        let n = self.dim;
        (0..n).all(|i| (0..n).all(|j| self.bracket(i, j).iter().zip(phi).map(|(a, b)| a * b).sum::<f64>().abs() <= 1e-12))
    }
}

/// Named three-dimensional algebras. `param` is κ for `su2` and `c` for
/// `hyperbolic`, ignored elsewhere.
pub fn catalog(name: &str, param: f64) -> Result<LieAlgebraData> {
    let n = 3;
    let b: Vec<(usize, usize, usize, f64)> = match name {
        "r3" => vec![],
        "heisenberg" => vec![(1, 2, 0, 1.0)],
        "su2" => {
            if param <= 0.0 || !param.is_finite() {
                return Err(Error::Domain("su2 needs κ > 0".into()));
            }
            let r = param.sqrt();
            vec![(1, 2, 0, 0.5 / r), (2, 0, 1, 0.5 / r), (0, 1, 2, 2.0 / r)]
        }
        "sl2r" => vec![(1, 2, 0, -1.0), (2, 0, 1, 1.0), (0, 1, 2, 1.0)],
        "e11" => vec![(1, 2, 0, 1.0), (2, 0, 1, -1.0)],
        "e2" => vec![(1, 2, 0, 1.0), (2, 0, 1, 1.0)],
        "hyperbolic" => vec![(2, 0, 0, param), (2, 1, 1, param)],
        other => return Err(Error::UnknownAlgebra(other.to_string())),
    };
    LieAlgebraData::from_brackets(name, n, &b)
}

/// Koszul formula for left-invariant fields. `Γ[(i*n+j)*n+k] = Γ^k_{ij}`.
pub fn levi_civita_invariant(alg: &LieAlgebraData, g: &Metric) -> Result<Vec<f64>> {
    let n = alg.dim;
    if g.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: g.dim() });
    }
    let c = &alg.c;
    let gl = |x: &[f64], l: usize| -> f64 { (0..n).map(|m| x[m] * g.at(m, l)).sum() };
    let mut low = vec![0.0; k::pow(n, 3)];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let cij: Vec<f64> = (0..n).map(|m| c[(i * n + j) * n + m]).collect();
                let cjl: Vec<f64> = (0..n).map(|m| c[(j * n + l) * n + m]).collect();
                let cli: Vec<f64> = (0..n).map(|m| c[(l * n + i) * n + m]).collect();
                low[(i * n + j) * n + l] = 0.5 * (gl(&cij, l) - gl(&cjl, i) + gl(&cli, j));
            }
        }
    }
    let gi = g.inv();
    let mut gamma = vec![0.0; k::pow(n, 3)];
    for ij in 0..n * n {
        for kk in 0..n {
            gamma[ij * n + kk] = (0..n).map(|l| gi[kk * n + l] * low[ij * n + l]).sum();
        }
    }
    Ok(gamma)
}

/// `g(R_{e_a,e_b} e_c, e_d)` of any left-invariant connection `Γ^k_{ij}`.
pub fn invariant_connection_curvature(alg: &LieAlgebraData, gamma: &[f64], g: &Metric) -> Vec<f64> {
    let n = alg.dim;
    let gm = |i: usize, j: usize, kk: usize| gamma[(i * n + j) * n + kk];
    let mut r = vec![0.0; k::pow(n, 4)];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut up = vec![0.0; n];
                for (p, u) in up.iter_mut().enumerate() {
                    for m in 0..n {
                        *u += gm(b, c, m) * gm(a, m, p) - gm(a, c, m) * gm(b, m, p) - alg.c[(a * n + b) * n + m] * gm(m, c, p);
                    }
                }
                for d in 0..n {
                    r[((a * n + b) * n + c) * n + d] = (0..n).map(|p| g.at(d, p) * up[p]).sum();
                }
            }
        }
    }
    r
}

/// Curvature, Ricci tensor and scalar curvature of a left-invariant metric.
pub fn invariant_curvature(alg: &LieAlgebraData, g: &Metric) -> Result<(CurvatureTensor, SymBilinear, f64)> {
    let gam = levi_civita_invariant(alg, g)?;
    let r = CurvatureTensor::new(alg.dim, invariant_connection_curvature(alg, &gam, g))?;
    let ric = ricci(&r, g);
    let s = ric.trace(g);
    Ok((r, ric, s))
}

/// `(∇_a T)_{b..} = −Σ Γ^m_{a b_k} T_{..m..}` for invariant tensors.
pub fn invariant_covariant_derivative(t: &[f64], rank: usize, gamma: &[f64], n: usize) -> Vec<f64> {
    let len = k::pow(n, rank);
    let mut out = vec![0.0; n * len];
    for a in 0..n {
        for (pos, o) in out[a * len..(a + 1) * len].iter_mut().enumerate() {
            let idx = k::unflatten(pos, n, rank);
            for slot in 0..rank {
                let stride = k::pow(n, rank - 1 - slot);
                let base = pos - idx[slot] * stride;
                for m in 0..n {
                    *o -= gamma[(a * n + idx[slot]) * n + m] * t[base + m * stride];
                }
            }
        }
    }
    out
}

/// Left-invariant metric on an algebra with optional `H = f ν_g` and closed `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantGeometry {
    pub algebra: LieAlgebraData,
    pub metric: Metric,
    pub f: Option<f64>,
    pub phi: Option<Vec<f64>>,
}

impl InvariantGeometry {
    pub fn new(algebra: LieAlgebraData, metric: Metric) -> Result<InvariantGeometry> {
        if metric.dim() != algebra.dim {
            return Err(Error::DimensionMismatch { expected: algebra.dim, got: metric.dim() });
        }
        Ok(InvariantGeometry { algebra, metric, f: None, phi: None })
    }

    pub fn with_dilaton(mut self, f: f64) -> Result<InvariantGeometry> {
        if self.algebra.dim != 3 {
            return Err(Error::Unsupported("H = f ν_g needs dimension 3".into()));
        }
        self.f = Some(f);
        Ok(self)
    }

    pub fn with_closed_phi(mut self, phi: Vec<f64>) -> Result<InvariantGeometry> {
        if phi.len() != self.algebra.dim {
            return Err(Error::DimensionMismatch { expected: self.algebra.dim, got: phi.len() });
        }
        if !self.algebra.is_closed_one_form(&phi) {
            return Err(Error::Domain("φ does not annihilate the derived algebra".into()));
        }
        self.phi = Some(phi);
        Ok(self)
    }

    pub fn christoffel(&self) -> Vec<f64> {
        levi_civita_invariant(&self.algebra, &self.metric).expect("dimensions checked")
    }

    pub fn curvature(&self) -> (CurvatureTensor, SymBilinear, f64) {
        invariant_curvature(&self.algebra, &self.metric).expect("dimensions checked")
    }
}

/// Constant-jet sample carrying the invariant data.
pub fn build_sample_invariant(geom: &InvariantGeometry) -> Result<GeometrySample> {
    let n = geom.algebra.dim;
    let depth = crate::chart::DEFAULT_DEPTH;
    let space = JetSpace::get(n, depth + 2);
    let g = constant_field(space, geom.metric.comps());
    let h = geom.f.map(|f| {
        let nu = geom.metric.volume_form();
        constant_field(space, &nu.comps().iter().map(|x| x * f).collect::<Vec<_>>())
    });
    let phi = geom.phi.as_ref().map(|p| constant_field(space, p));
    let f = geom.f.map(|f| crate::jet::Jet::constant(space, f));
    GeometrySample::from_fields(Backend::Invariant, depth, geom.algebra.c.clone(), g, h, phi, f)
}

/// Constant-jet sample for an arbitrary invariant three-form `h` and
/// optional closed one-form `phi`.
pub fn build_sample_invariant_form(alg: &LieAlgebraData, g: &Metric, h: &[f64], phi: Option<&[f64]>) -> Result<GeometrySample> {
    let n = alg.dim;
    if g.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: g.dim() });
    }
    if h.len() != n * n * n {
        return Err(Error::DimensionMismatch { expected: n * n * n, got: h.len() });
    }
    let space = JetSpace::get(n, crate::chart::DEFAULT_DEPTH + 2);
    let gf = constant_field(space, g.comps());
    let hf = constant_field(space, h);
    let pf = phi.map(|p| constant_field(space, p));
    GeometrySample::from_fields(Backend::Invariant, crate::chart::DEFAULT_DEPTH, alg.c.clone(), gf, Some(hf), pf, None)
}

/// Identity plus symmetric noise, uniform in `[−amp, amp]`; SPD for `amp < 1/n`.
pub fn random_metric<R: Rng>(rng: &mut R, n: usize, amp: f64) -> Metric {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let x = rng.gen_range(-amp..=amp);
            c[i * n + j] += x;
            if i != j {
                c[j * n + i] += x;
            }
        }
        c[i * n + i] += 1.0;
    }
    Metric::new(n, c).expect("diagonally dominant")
}

/// Principal Ricci curvatures of a Milnor frame `[e2,e3]=λ1 e1` (cyclic), orthonormal.
pub fn milnor_ricci(lambda: [f64; 3]) -> [f64; 3] {
    let h = 0.5 * (lambda[0] + lambda[1] + lambda[2]);
    let mu = [h - lambda[0], h - lambda[1], h - lambda[2]];
    [2.0 * mu[1] * mu[2], 2.0 * mu[0] * mu[2], 2.0 * mu[0] * mu[1]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_metadata() {
        for name in CATALOG {
            let a = catalog(name, 0.7).unwrap();
            assert!(a.jacobi_residual() <= JACOBI_TOL, "{name}");
            assert_eq!(a.is_unimodular(), name != "hyperbolic", "{name}");
        }
        assert!(matches!(catalog("so5", 1.0), Err(Error::UnknownAlgebra(_))));
    }

    #[test]
    fn su2_remark_ricci() {
        let kappa = 0.8;
        let a = catalog("su2", kappa).unwrap();
        let g = Metric::identity(3);
        let (_, ric, s) = invariant_curvature(&a, &g).unwrap();
        assert!(s.abs() < 1e-12);
        let want = [-1.0 / kappa, -1.0 / kappa, 2.0 / kappa];
        for i in 0..3 {
            for j in 0..3 {
                let w = if i == j { want[i] } else { 0.0 };
                assert!((ric.at(i, j) - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn heisenberg_ricci() {
        let f = 1.7;
        let a = catalog("heisenberg", 0.0).unwrap();
        let g = Metric::diagonal(&[f * f, 1.0, 1.0]).unwrap();
        let (_, ric, _) = invariant_curvature(&a, &g).unwrap();
        // ½ f² (−g + 2 ξ⊗ξ), ξ = e¹ f (as a covector of g(e1/f, ·))
        let xi = [f, 0.0, 0.0];
        for i in 0..3 {
            for j in 0..3 {
                let w = 0.5 * f * f * (-g.at(i, j) + 2.0 * xi[i] * xi[j]);
                assert!((ric.at(i, j) - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn milnor_closed_form_matches() {
        for (name, lam) in [("heisenberg", [1.0, 0.0, 0.0]), ("sl2r", [-1.0, 1.0, 1.0]), ("e11", [1.0, -1.0, 0.0]), ("e2", [1.0, 1.0, 0.0])]
        {
            let a = catalog(name, 1.0).unwrap();
            let (_, ric, _) = invariant_curvature(&a, &Metric::identity(3)).unwrap();
            let want = milnor_ricci(lam);
            for i in 0..3 {
                assert!((ric.at(i, i) - want[i]).abs() < 1e-12, "{name}");
            }
        }
    }

    #[test]
    fn bi_invariant_connection_is_half_bracket() {
        let a = LieAlgebraData::from_brackets("so3", 3, &[(1, 2, 0, 1.0), (2, 0, 1, 1.0), (0, 1, 2, 1.0)]).unwrap();
        let gam = levi_civita_invariant(&a, &Metric::identity(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let br = a.bracket(i, j);
                for kk in 0..3 {
                    assert!((gam[(i * 3 + j) * 3 + kk] - 0.5 * br[kk]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn jet_backend_agrees_with_direct_curvature() {
        let a = catalog("e11", 1.0).unwrap();
        let g = Metric::new(3, vec![1.3, 0.2, -0.1, 0.2, 0.9, 0.3, -0.1, 0.3, 1.1]).unwrap();
        let geom = InvariantGeometry::new(a, g).unwrap();
        let (r, _, _) = geom.curvature();
        let s = build_sample_invariant(&geom).unwrap();
        assert!(s.riemann().max_abs_diff(&r) < 1e-13);
    }
}
