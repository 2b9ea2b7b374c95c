//! Pointwise multilinear algebra on frame components.
//!
//! Index conventions: `R[a][b][c][d] = g(R_{e_a,e_b} e_c, e_d)`, a 2-form `ω` and
//! the skew endomorphism `A` are identified by `ω(x, y) = g(Ax, y)`, and forms
//! use the determinant inner product.

use crate::error::{Error, Result};
use crate::kernels as k;
use nalgebra::DMatrix;

pub const VALIDATION_TOL: f64 = 1e-12;

fn check_len(len: usize, n: usize, rank: usize) -> Result<()> {
    let want = k::pow(n, rank);
    if len != want {
        return Err(Error::DimensionMismatch { expected: want, got: len });
    }
    Ok(())
}

fn scale_of(c: &[f64]) -> f64 {
    c.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    n: usize,
    g: Vec<f64>,
    ginv: Vec<f64>,
    det: f64,
}

impl Metric {
    pub fn new(n: usize, comps: Vec<f64>) -> Result<Metric> {
        check_len(comps.len(), n, 2)?;
        if comps.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotSpd);
        }
        let asym = (0..n * n).map(|i| (comps[i] - comps[(i % n) * n + i / n]).abs()).fold(0.0, f64::max);
        if asym > VALIDATION_TOL * scale_of(&comps) {
            return Err(Error::NotSymmetric(asym));
        }
        let m = DMatrix::from_row_slice(n, n, &comps);
        let chol = nalgebra::Cholesky::new(m.clone()).ok_or(Error::NotSpd)?;
        let inv = chol.inverse();
        let det = m.determinant();
        let mut ginv = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                ginv[a * n + b] = 0.5 * (inv[(a, b)] + inv[(b, a)]);
            }
        }
        Ok(Metric { n, g: comps, ginv, det })
    }

    pub fn identity(n: usize) -> Metric {
        let g: Vec<f64> = (0..n * n).map(|i| if i / n == i % n { 1.0 } else { 0.0 }).collect();
        Metric { n, ginv: g.clone(), g, det: 1.0 }
    }

    pub fn diagonal(d: &[f64]) -> Result<Metric> {
        let n = d.len();
        let mut g = vec![0.0; n * n];
        for (i, x) in d.iter().enumerate() {
            g[i * n + i] = *x;
        }
        Metric::new(n, g)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn comps(&self) -> &[f64] {
        &self.g
    }

    pub fn inv(&self) -> &[f64] {
        &self.ginv
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.g[a * self.n + b]
    }

    /// `ν_g = √det g · e¹∧…∧eⁿ` for the fixed positive orientation.
    pub fn volume_form(&self) -> AltTensor {
        let s = self.det.sqrt();
        AltTensor { n: self.n, p: self.n, c: k::epsilon(self.n).into_iter().map(|e| e * s).collect() }
    }

    pub fn lower(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|a| (0..self.n).map(|b| self.g[a * self.n + b] * v[b]).sum()).collect()
    }

    pub fn raise(&self, w: &[f64]) -> Vec<f64> {
        k::sharp(w, &self.ginv, self.n)
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let lu = self.lower(u);
        lu.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// A g-orthonormal frame as rows of frame components (Gram-Schmidt on the basis).
    pub fn orthonormal_frame(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for i in 0..self.n {
            let mut v = vec![0.0; self.n];
            v[i] = 1.0;
            for e in &out {
                let c = self.inner(&v, e);
                for (x, y) in v.iter_mut().zip(e) {
                    *x -= c * y;
                }
            }
            let nrm = self.inner(&v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= nrm);
            out.push(v);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AltTensor {
    n: usize,
    p: usize,
    c: Vec<f64>,
}

impl AltTensor {
    /// Validates antisymmetry up to [`VALIDATION_TOL`] and stores the exact antisymmetrization.
    pub fn new(n: usize, p: usize, comps: Vec<f64>) -> Result<AltTensor> {
        check_len(comps.len(), n, p)?;
        let alt = k::antisymmetrize(&comps, p, n);
        let defect = alt.iter().zip(&comps).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if defect > VALIDATION_TOL * scale_of(&comps) {
            return Err(Error::NotAntisymmetric(defect));
        }
        Ok(AltTensor { n, p, c: alt })
    }

    /// Projects arbitrary components onto the alternating part.
    pub fn antisymmetrized(n: usize, p: usize, comps: &[f64]) -> Result<AltTensor> {
        check_len(comps.len(), n, p)?;
        Ok(AltTensor { n, p, c: k::antisymmetrize(comps, p, n) })
    }

    pub fn zero(n: usize, p: usize) -> AltTensor {
        AltTensor { n, p, c: vec![0.0; k::pow(n, p)] }
    }

    pub fn scalar(n: usize, v: f64) -> AltTensor {
        AltTensor { n, p: 0, c: vec![v] }
    }

    pub fn one_form(w: &[f64]) -> AltTensor {
        AltTensor { n: w.len(), p: 1, c: w.to_vec() }
    }

    /// `e^{i1}∧…∧e^{ip}`.
    pub fn basis(n: usize, idx: &[usize]) -> AltTensor {
        let p = idx.len();
        let mut c = vec![0.0; k::pow(n, p)];
        for perm in k::permutations(p) {
            let j: Vec<usize> = perm.iter().map(|&q| idx[q]).collect();
            c[k::flatten(&j, n)] += k::perm_sign(&perm);
        }
        AltTensor { n, p, c }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn comps(&self) -> &[f64] {
        &self.c
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.c[k::flatten(idx, self.n)]
    }

    pub fn scale(&self, s: f64) -> AltTensor {
        AltTensor { n: self.n, p: self.p, c: self.c.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, o: &AltTensor) -> AltTensor {
        AltTensor { n: self.n, p: self.p, c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &AltTensor) -> AltTensor {
        self.add(&o.scale(-1.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Exterior product with determinant normalization.
    pub fn wedge(&self, o: &AltTensor) -> AltTensor {
        let (p, q, n) = (self.p, o.p, self.n);
        let r = p + q;
        if r > n {
            return AltTensor::zero(n, r);
        }
        let mut raw = vec![0.0; k::pow(n, r)];
        for (i, x) in raw.iter_mut().enumerate() {
            let idx = k::unflatten(i, n, r);
            *x = self.c[k::flatten(&idx[..p], n)] * o.c[k::flatten(&idx[p..], n)];
        }
        let f = |m: usize| (1..=m).map(|x| x as f64).product::<f64>();
        let alt = k::antisymmetrize(&raw, r, n);
        let coef = f(r) / (f(p) * f(q));
        AltTensor { n, p: r, c: alt.into_iter().map(|x| x * coef).collect() }
    }

    pub fn interior(&self, v: &[f64]) -> AltTensor {
        assert!(self.p >= 1);
        AltTensor { n: self.n, p: self.p - 1, c: k::interior(v, &self.c, self.p, self.n) }
    }

    pub fn inner(&self, o: &AltTensor, g: &Metric) -> f64 {
        k::form_inner(&self.c, &o.c, self.p, g.inv(), self.n)
    }

    pub fn norm(&self, g: &Metric) -> f64 {
        self.inner(self, g).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    n: usize,
    c: Vec<f64>,
}

impl CurvatureTensor {
    /// Validates antisymmetry in both pairs.
    pub fn new(n: usize, comps: Vec<f64>) -> Result<CurvatureTensor> {
        check_len(comps.len(), n, 4)?;
        let scale = scale_of(&comps);
        let mut defect = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let x = comps[((a * n + b) * n + c) * n + d];
                        defect = defect
                            .max((x + comps[((b * n + a) * n + c) * n + d]).abs())
                            .max((x + comps[((a * n + b) * n + d) * n + c]).abs());
                    }
                }
            }
        }
        if defect > VALIDATION_TOL * scale {
            return Err(Error::NotAntisymmetric(defect));
        }
        Ok(CurvatureTensor { n, c: comps })
    }

    pub fn zero(n: usize) -> CurvatureTensor {
        CurvatureTensor { n, c: vec![0.0; k::pow(n, 4)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn comps(&self) -> &[f64] {
        &self.c
    }

    pub fn at(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        self.c[((a * n + b) * n + c) * n + d]
    }

    pub fn max_abs_diff(&self, o: &CurvatureTensor) -> f64 {
        self.c.iter().zip(&o.c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Pair-symmetry defect `max |R_{abcd} − R_{cdab}|`.
    pub fn pair_symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut m = 0.0_f64;
        for (i, x) in self.c.iter().enumerate() {
            let [a, b, c, d] = idx4(i, n);
            m = m.max((x - self.at(c, d, a, b)).abs());
        }
        m
    }

    /// First Bianchi defect `max |R_{abcd} + R_{bcad} + R_{cabd}|`.
    pub fn first_bianchi_defect(&self) -> f64 {
        let n = self.n;
        let mut m = 0.0_f64;
        for i in 0..self.c.len() {
            let [a, b, c, d] = idx4(i, n);
            m = m.max((self.at(a, b, c, d) + self.at(b, c, a, d) + self.at(c, a, b, d)).abs());
        }
        m
    }
}

fn idx4(i: usize, n: usize) -> [usize; 4] {
    [i / (n * n * n), (i / (n * n)) % n, (i / n) % n, i % n]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymBilinear {
    n: usize,
    c: Vec<f64>,
}

impl SymBilinear {
    pub fn new(n: usize, comps: Vec<f64>) -> Result<SymBilinear> {
        check_len(comps.len(), n, 2)?;
        let asym = (0..n * n).map(|i| (comps[i] - comps[(i % n) * n + i / n]).abs()).fold(0.0, f64::max);
        if asym > VALIDATION_TOL * scale_of(&comps) {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(SymBilinear { n, c: k::sym2(&comps, n) })
    }

    /// Symmetric part of arbitrary components.
    pub fn symmetrized(n: usize, comps: &[f64]) -> SymBilinear {
        SymBilinear { n, c: k::sym2(comps, n) }
    }

    pub fn zero(n: usize) -> SymBilinear {
        SymBilinear { n, c: vec![0.0; n * n] }
    }

    pub fn from_metric(g: &Metric) -> SymBilinear {
        SymBilinear { n: g.dim(), c: g.comps().to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn comps(&self) -> &[f64] {
        &self.c
    }

    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.c[a * self.n + b]
    }

    pub fn scale(&self, s: f64) -> SymBilinear {
        SymBilinear { n: self.n, c: self.c.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, o: &SymBilinear) -> SymBilinear {
        SymBilinear { n: self.n, c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &SymBilinear) -> SymBilinear {
        self.add(&o.scale(-1.0))
    }

    pub fn trace(&self, g: &Metric) -> f64 {
        k::trace(&self.c, g.inv(), self.n)
    }

    pub fn norm_sq(&self, g: &Metric) -> f64 {
        let r = k::raise_slots(&self.c, 2, &[0, 1], g.inv(), self.n);
        r.iter().zip(&self.c).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Eigenvalues of the g-self-adjoint endomorphism, ascending.
    pub fn eigenvalues(&self, g: &Metric) -> Vec<f64> {
        let n = self.n;
        // L^{-1} h L^{-T} with g = L L^T has the same spectrum
        let chol = nalgebra::Cholesky::new(DMatrix::from_row_slice(n, n, g.comps())).expect("metric validated at construction");
        let l = chol.l();
        let linv = l.clone().try_inverse().expect("Cholesky factor is invertible");
        let h = DMatrix::from_row_slice(n, n, &self.c);
        let m = &linv * h * linv.transpose();
        let m = (&m + m.transpose()) * 0.5;
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Hodge star in dimension 3 with the given orientation sign.
pub fn hodge_star(alpha: &AltTensor, g: &Metric, orientation: f64) -> Result<AltTensor> {
    let n = g.dim();
    if n != 3 {
        return Err(Error::Unsupported(format!("Hodge star implemented for dim 3, got {n}")));
    }
    if alpha.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: alpha.dim() });
    }
    let p = alpha.degree();
    let q = n - p;
    let nu: Vec<f64> = g.volume_form().comps().iter().map(|x| x * orientation.signum()).collect();
    let slots: Vec<usize> = (0..p).collect();
    let raised = if p == 0 { alpha.comps().to_vec() } else { k::raise_slots(alpha.comps(), p, &slots, g.inv(), n) };
    let fact: f64 = (1..=p).map(|x| x as f64).product();
    let mut out = vec![0.0; k::pow(n, q)];
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (i, a) in raised.iter().enumerate() {
            acc += a * nu[i * k::pow(n, q) + j];
        }
        *o = acc / fact;
    }
    Ok(AltTensor { n, p: q, c: out })
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, got: b });
    }
    Ok(())
}

pub fn h_circ_h(h: &AltTensor, g: &Metric) -> Result<SymBilinear> {
    check_dims(g.dim(), h.dim())?;
    if h.degree() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: h.degree() });
    }
    Ok(SymBilinear::symmetrized(g.dim(), &k::h_circ_h(h.comps(), g.inv(), g.dim())))
}

pub fn r_circ_r(r: &CurvatureTensor, g: &Metric) -> Result<SymBilinear> {
    check_dims(g.dim(), r.dim())?;
    Ok(SymBilinear::symmetrized(g.dim(), &k::r_circ_r(r.comps(), g.inv(), g.dim())))
}

pub fn r_wedge_r(r: &CurvatureTensor, g: &Metric) -> Result<AltTensor> {
    check_dims(g.dim(), r.dim())?;
    let n = g.dim();
    if n < 4 {
        return Ok(AltTensor::zero(n, 4));
    }
    Ok(AltTensor { n, p: 4, c: k::r_wedge_r(r.comps(), g.inv(), n) })
}

pub fn curvature_norm_sq(r: &CurvatureTensor, g: &Metric) -> Result<f64> {
    check_dims(g.dim(), r.dim())?;
    Ok(k::curvature_norm_sq(r.comps(), g.inv(), g.dim()))
}

/// Row-major matrix `A[k][j]` of the endomorphism `v ↦ H(u, v)^♯`.
pub fn h_endo(h: &AltTensor, u: &[f64], g: &Metric) -> Result<Vec<f64>> {
    check_dims(g.dim(), h.dim())?;
    let form = k::interior(u, h.comps(), 3, g.dim());
    Ok(endo_of_two_form(&form, g))
}

/// Endomorphism `A` with `g(Ax, y) = ω(x, y)`; works for any bilinear `ω`.
pub fn endo_of_two_form(w: &[f64], g: &Metric) -> Vec<f64> {
    let n = g.dim();
    let gi = g.inv();
    let mut a = vec![0.0; n * n];
    for row in 0..n {
        for x in 0..n {
            a[row * n + x] = (0..n).map(|y| gi[row * n + y] * w[x * n + y]).sum();
        }
    }
    a
}

/// Bilinear form `ω(x, y) = g(Ax, y)`.
pub fn two_form_of_endo(a: &[f64], g: &Metric) -> Vec<f64> {
    let n = g.dim();
    let mut w = vec![0.0; n * n];
    for x in 0..n {
        for y in 0..n {
            w[x * n + y] = (0..n).map(|kk| a[kk * n + x] * g.at(kk, y)).sum();
        }
    }
    w
}

pub fn endo_commutator(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for m in 0..n {
                s += a[i * n + m] * b[m * n + j] - b[i * n + m] * a[m * n + j];
            }
            out[i * n + j] = s;
        }
    }
    out
}

pub fn ricci(r: &CurvatureTensor, g: &Metric) -> SymBilinear {
    SymBilinear::symmetrized(g.dim(), &k::ricci(r.comps(), g.inv(), g.dim()))
}

/// `(Ric∘Ric)(v, w) = g(Ric v, Ric w)`.
pub fn ric_circ_ric(ric: &SymBilinear, g: &Metric) -> SymBilinear {
    let n = g.dim();
    let r = k::raise(ric.comps(), 2, 0, g.inv(), n);
    let mut out = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            out[a * n + b] = (0..n).map(|c| ric.at(a, c) * r[c * n + b]).sum();
        }
    }
    SymBilinear::symmetrized(n, &out)
}

/// `R_{v1,v2} = (s/2) v1∧v2 + v2∧Ric(v1) + Ric(v2)∧v1` in dimension 3.
pub fn reconstruct_riemann_3d(ric: &SymBilinear, s: f64, g: &Metric) -> Result<CurvatureTensor> {
    let n = g.dim();
    if n != 3 {
        return Err(Error::Unsupported(format!("Riemann reconstruction needs dim 3, got {n}")));
    }
    check_dims(n, ric.dim())?;
    let gg = |a: usize, b: usize| g.at(a, b);
    let rc = |a: usize, b: usize| ric.at(a, b);
    let mut c = vec![0.0; 81];
    for (i, x) in c.iter_mut().enumerate() {
        let [a, b, cc, d] = idx4(i, n);
        *x = 0.5 * s * (gg(a, cc) * gg(b, d) - gg(a, d) * gg(b, cc))
            + (gg(b, cc) * rc(a, d) - gg(b, d) * rc(a, cc))
            + (rc(b, cc) * gg(a, d) - rc(b, d) * gg(a, cc));
    }
    Ok(CurvatureTensor { n, c })
}

/// Curvature of constant sectional curvature `k`: `R_{uv}w = k(g(v,w)u − g(u,w)v)`.
pub fn constant_curvature(g: &Metric, kk: f64) -> CurvatureTensor {
    let n = g.dim();
    let mut c = vec![0.0; k::pow(n, 4)];
    for (i, x) in c.iter_mut().enumerate() {
        let [a, b, cc, d] = idx4(i, n);
        *x = kk * (g.at(b, cc) * g.at(a, d) - g.at(a, cc) * g.at(b, d));
    }
    CurvatureTensor { n, c }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_of_basis_covector() {
        let g = Metric::identity(3);
        let s = hodge_star(&AltTensor::one_form(&[1.0, 0.0, 0.0]), &g, 1.0).unwrap();
        assert_eq!(s, AltTensor::basis(3, &[1, 2]));
        let one = AltTensor::scalar(3, 1.0);
        assert_eq!(hodge_star(&one, &g, 1.0).unwrap(), g.volume_form());
        let back = hodge_star(&g.volume_form(), &g, 1.0).unwrap();
        assert!((back.comps()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn star_rejects_other_dimensions() {
        let g = Metric::identity(4);
        assert!(hodge_star(&AltTensor::one_form(&[1.0, 0.0, 0.0, 0.0]), &g, 1.0).is_err());
    }

    #[test]
    fn metric_rejects_indefinite() {
        assert_eq!(Metric::diagonal(&[1.0, -1.0, 1.0]), Err(Error::NotSpd));
    }

    #[test]
    fn alt_rejects_symmetric_input() {
        assert!(matches!(AltTensor::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]), Err(Error::NotAntisymmetric(_))));
    }

    #[test]
    fn wedge_of_basis_forms() {
        let e1 = AltTensor::basis(3, &[0]);
        let e2 = AltTensor::basis(3, &[1]);
        assert_eq!(e1.wedge(&e2), AltTensor::basis(3, &[0, 1]));
        let e12 = AltTensor::basis(4, &[0, 1]);
        let e34 = AltTensor::basis(4, &[2, 3]);
        assert_eq!(e12.wedge(&e34), AltTensor::basis(4, &[0, 1, 2, 3]));
    }

    #[test]
    fn round_sphere_sign() {
        let g = Metric::identity(3);
        let r = constant_curvature(&g, 1.0);
        let ric = ricci(&r, &g);
        assert!((ric.at(0, 0) - 2.0).abs() < 1e-15);
        let rebuilt = reconstruct_riemann_3d(&ric, 6.0, &g).unwrap();
        assert!(rebuilt.max_abs_diff(&r) < 1e-14);
    }
}
