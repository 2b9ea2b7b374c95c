//! Polynomial data on a coordinate patch, expanded into exact jets at a point.

use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace};
use crate::kernels as k;
use crate::sample::{Backend, Field, GeometrySample};
use crate::tensor::{CurvatureTensor, Metric, SymBilinear};
use rand::Rng;

/// Default number of available derivatives of the connection coefficients.
pub const DEFAULT_DEPTH: usize = 2;
pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    pub nvars: usize,
    pub terms: Vec<(Vec<u8>, f64)>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Poly {
        Poly { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Poly {
        Poly { nvars, terms: vec![(vec![0; nvars], c)] }
    }

    pub fn monomial(exps: &[u8], c: f64) -> Poly {
        Poly { nvars: exps.len(), terms: vec![(exps.to_vec(), c)] }
    }

    pub fn plus(mut self, o: Poly) -> Poly {
        self.terms.extend(o.terms);
        self
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(e, _)| e.iter().map(|&x| x as usize).sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(e, c)| c * e.iter().zip(x).map(|(&p, v)| v.powi(p as i32)).product::<f64>()).sum()
    }

    /// Taylor expansion around `p`, valid to `order`.
    pub fn jet(&self, space: &'static JetSpace, p: &[f64], order: usize) -> Jet {
        let n = space.nvars();
        let maxp = self.terms.iter().flat_map(|(e, _)| e.iter().copied()).max().unwrap_or(0) as usize;
        let vars: Vec<Vec<Jet>> = (0..n)
            .map(|i| {
                let x = Jet::variable(space, i, p[i]);
                let mut pw = vec![Jet::constant(space, 1.0)];
                for _ in 0..maxp {
                    let next = pw.last().expect("non-empty") * &x;
                    pw.push(next);
                }
                pw
            })
            .collect();
        let mut out = Jet::zero(space);
        for (e, c) in &self.terms {
            let mut m = Jet::constant(space, *c);
            for (i, &pw) in e.iter().enumerate() {
                if pw > 0 {
                    m = &m * &vars[i][pw as usize];
                }
            }
            out.add_scaled(&m, 1.0);
        }
        out.truncated(order)
    }

    pub fn random<R: Rng>(rng: &mut R, nvars: usize, max_degree: usize, amp: f64) -> Poly {
        let space = JetSpace::get(nvars, max_degree);
        let terms = (0..space.len()).map(|i| (space.exponent(i).to_vec(), rng.gen_range(-amp..=amp))).collect();
        Poly { nvars, terms }
    }
}

/// Dilaton-type scalar: a polynomial or a constant multiple of `exp` of one.
#[derive(Debug, Clone, PartialEq)]
pub enum PolyScalar {
    Poly(Poly),
    Exp { scale: f64, exponent: Poly },
}

impl PolyScalar {
    pub fn jet(&self, space: &'static JetSpace, p: &[f64], order: usize) -> Jet {
        match self {
            PolyScalar::Poly(q) => q.jet(space, p, order),
            PolyScalar::Exp { scale, exponent } => exponent.jet(space, p, order).exp().scale(*scale),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            PolyScalar::Poly(q) => q.eval(x),
            PolyScalar::Exp { scale, exponent } => scale * exponent.eval(x).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyMetric {
    pub n: usize,
    /// Row-major n×n, symmetric.
    pub comps: Vec<Poly>,
    pub point: Vec<f64>,
}

impl PolyMetric {
    /// Only the upper triangle of `comps` is read; the lower one is overwritten.
    pub fn new(n: usize, mut comps: Vec<Poly>, point: Vec<f64>) -> Result<PolyMetric> {
        if comps.len() != n * n || point.len() != n {
            return Err(Error::DimensionMismatch { expected: n * n, got: comps.len() });
        }
        if comps.iter().any(|p| p.degree() > MAX_DEGREE) {
            return Err(Error::Domain(format!("metric polynomial degree above {MAX_DEGREE}")));
        }
        for a in 0..n {
            for b in 0..a {
                comps[a * n + b] = comps[b * n + a].clone();
            }
        }
        let m = PolyMetric { n, comps, point };
        Metric::new(n, m.eval_at(&m.point))?;
        Ok(m)
    }

    pub fn flat(n: usize) -> PolyMetric {
        let comps = (0..n * n).map(|i| if i / n == i % n { Poly::constant(n, 1.0) } else { Poly::zero(n) }).collect();
        PolyMetric { n, comps, point: vec![0.0; n] }
    }

    pub fn eval_at(&self, x: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|p| p.eval(x)).collect()
    }

    fn jets(&self, depth: usize) -> Field {
        let space = JetSpace::get(self.n, depth + 2);
        self.comps.iter().map(|p| p.jet(space, &self.point, depth + 1)).collect()
    }

    /// Seeded random metric: identity plus coefficients uniform in `[−amp, amp]`.
    pub fn random<R: Rng>(rng: &mut R, n: usize, amp: f64) -> PolyMetric {
        let mut comps = vec![Poly::zero(n); n * n];
        for a in 0..n {
            for b in a..n {
                let mut p = Poly::random(rng, n, MAX_DEGREE, amp);
                if a == b {
                    p = p.plus(Poly::constant(n, 1.0));
                }
                comps[a * n + b] = p.clone();
                comps[b * n + a] = p;
            }
        }
        PolyMetric { n, comps, point: vec![0.0; n] }
    }
}

/// `Γ^k_{ij}`, `∂_a Γ^k_{ij}` and `∂_b ∂_a Γ^k_{ij}` at the base point.
#[derive(Debug, Clone)]
pub struct ChristoffelJet {
    pub gamma: Vec<f64>,
    pub d_gamma: Vec<f64>,
    pub dd_gamma: Vec<f64>,
}

fn sample_of(m: &PolyMetric, depth: usize) -> Result<GeometrySample> {
    GeometrySample::from_fields(Backend::Chart, depth, vec![0.0; k::pow(m.n, 3)], m.jets(depth), None, None, None)
}

pub fn christoffel_at(m: &PolyMetric) -> Result<ChristoffelJet> {
    let s = sample_of(m, DEFAULT_DEPTH)?;
    let n = m.n;
    let g = s.gamma_jet();
    let d: Field = (0..n).flat_map(|a| g.iter().map(move |x| x.partial(a))).collect();
    let dd: Field = (0..n).flat_map(|b| d.iter().map(move |x| x.partial(b))).collect();
    let v = |f: &Field| f.iter().map(|x| x.value()).collect();
    Ok(ChristoffelJet { gamma: v(g), d_gamma: v(&d), dd_gamma: v(&dd) })
}

#[derive(Debug, Clone)]
pub struct RiemannData {
    pub riemann: CurvatureTensor,
    pub ricci: SymBilinear,
    pub scalar: f64,
    pub nabla_riemann: Vec<f64>,
}

pub fn riemann_at(m: &PolyMetric) -> Result<RiemannData> {
    let s = sample_of(m, DEFAULT_DEPTH)?;
    let riemann = s.riemann();
    let ricci = s.ricci();
    Ok(RiemannData { scalar: ricci.trace(&s.metric()), riemann, ricci, nabla_riemann: s.nabla_riemann() })
}

pub fn torsion_curvature_at(m: &PolyMetric, f: &PolyScalar) -> Result<CurvatureTensor> {
    Ok(build_sample(m, Some(f), None, DEFAULT_DEPTH)?.torsion_curvature())
}

/// Chart sample with `H = f ν_g` (dim 3) and `φ = dφ̃` for a polynomial potential `φ̃`.
pub fn build_sample(m: &PolyMetric, f: Option<&PolyScalar>, phi_potential: Option<&Poly>, depth: usize) -> Result<GeometrySample> {
    if depth < 1 {
        return Err(Error::InsufficientJetDepth { need: 1, have: depth });
    }
    let n = m.n;
    let space = JetSpace::get(n, depth + 2);
    let base = sample_of(m, depth)?;
    let fj = f.map(|f| f.jet(space, &m.point, depth + 1));
    let h = match &fj {
        Some(fj) => {
            if n != 3 {
                return Err(Error::Unsupported("H = f ν_g needs dimension 3".into()));
            }
            Some(base.volume_jet().iter().map(|v| v * fj).collect())
        }
        None => None,
    };
    let phi = phi_potential.map(|p| {
        let pj = p.jet(space, &m.point, depth + 2);
        (0..n).map(|a| pj.partial(a)).collect()
    });
    GeometrySample::from_fields(Backend::Chart, depth, vec![0.0; k::pow(n, 3)], m.jets(depth), h, phi, fj)
}

/// Chart sample with an arbitrary polynomial three-form, any dimension.
pub fn build_sample_with_form(m: &PolyMetric, h: &[Poly], phi_potential: Option<&Poly>, depth: usize) -> Result<GeometrySample> {
    let n = m.n;
    if h.len() != k::pow(n, 3) {
        return Err(Error::DimensionMismatch { expected: k::pow(n, 3), got: h.len() });
    }
    let space = JetSpace::get(n, depth + 2);
    let raw: Field = h.iter().map(|p| p.jet(space, &m.point, depth + 1)).collect();
    let hj = k::antisymmetrize(&raw, 3, n);
    let phi = phi_potential.map(|p| {
        let pj = p.jet(space, &m.point, depth + 2);
        (0..n).map(|a| pj.partial(a)).collect()
    });
    GeometrySample::from_fields(Backend::Chart, depth, vec![0.0; k::pow(n, 3)], m.jets(depth), Some(hj), phi, None)
}

/// Inputs of one random chart sample.
#[derive(Debug, Clone)]
pub struct RandomChart {
    pub metric: PolyMetric,
    pub dilaton: PolyScalar,
    pub phi_potential: Poly,
}

/// Coefficients uniform in `[−0.3, 0.3]`; dilaton `1.5 + small polynomial`.
pub fn random_chart<R: Rng>(rng: &mut R) -> RandomChart {
    let metric = PolyMetric::random(rng, 3, 0.3);
    let dilaton = PolyScalar::Poly(Poly::random(rng, 3, 3, 0.3).plus(Poly::constant(3, 1.5)));
    let phi_potential = Poly::random(rng, 3, 4, 0.3);
    RandomChart { metric, dilaton, phi_potential }
}

pub fn random_sample<R: Rng>(rng: &mut R) -> GeometrySample {
    let c = random_chart(rng);
    build_sample(&c.metric, Some(&c.dilaton), Some(&c.phi_potential), DEFAULT_DEPTH).expect("random chart data is SPD")
}

/// Random antisymmetric polynomial three-form in `n` variables.
pub fn random_three_form<R: Rng>(rng: &mut R, n: usize, max_degree: usize, amp: f64) -> Vec<Poly> {
    let mut out = vec![Poly::zero(n); k::pow(n, 3)];
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let p = Poly::random(rng, n, max_degree, amp);
                for perm in k::permutations(3) {
                    let idx = [a, b, c];
                    let j: Vec<usize> = perm.iter().map(|&q| idx[q]).collect();
                    let s = k::perm_sign(&perm);
                    let mut q = p.clone();
                    q.terms.iter_mut().for_each(|t| t.1 *= s);
                    out[k::flatten(&j, n)] = q;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_metric_has_zero_christoffel() {
        let c = christoffel_at(&PolyMetric::flat(3)).unwrap();
        assert!(c.gamma.iter().chain(&c.d_gamma).all(|x| *x == 0.0));
    }

    #[test]
    fn christoffel_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = PolyMetric::random(&mut rng, 3, 0.3);
        let c = christoffel_at(&m).unwrap();
        let h = 1e-5;
        let n = 3;
        let gam = |x: &[f64]| -> Vec<f64> {
            let g = m.eval_at(x);
            let gi = Metric::new(3, g).unwrap().inv().to_vec();
            let dg = |a: usize, i: usize, j: usize| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[a] += h;
                xm[a] -= h;
                (m.comps[i * n + j].eval(&xp) - m.comps[i * n + j].eval(&xm)) / (2.0 * h)
            };
            let mut out = vec![0.0; 27];
            for i in 0..n {
                for j in 0..n {
                    for kk in 0..n {
                        out[(i * n + j) * n + kk] = (0..n).map(|l| 0.5 * gi[kk * n + l] * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j))).sum();
                    }
                }
            }
            out
        };
        let fd = gam(&[0.0; 3]);
        for (a, b) in c.gamma.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        // first derivative of Γ against differences of Γ
        let hh = 1e-4;
        for a in 0..3 {
            let mut xp = [0.0; 3];
            let mut xm = [0.0; 3];
            xp[a] = hh;
            xm[a] = -hh;
            let (gp, gm) = (gam(&xp), gam(&xm));
            for ijk in 0..27 {
                let fd = (gp[ijk] - gm[ijk]) / (2.0 * hh);
                assert!((c.d_gamma[a * 27 + ijk] - fd).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn pulled_back_flat_metric_is_flat() {
        // g = J^T J for the diffeomorphism x -> (x1 + x2^2, x2, x3 + x1 x2)
        let n = 3;
        let jac = |i: usize, j: usize| -> Poly {
            match (i, j) {
                (0, 0) | (1, 1) | (2, 2) => Poly::constant(3, 1.0),
                (0, 1) => Poly::monomial(&[0, 1, 0], 2.0),
                (2, 0) => Poly::monomial(&[0, 1, 0], 1.0),
                (2, 1) => Poly::monomial(&[1, 0, 0], 1.0),
                _ => Poly::zero(3),
            }
        };
        let mul = |a: &Poly, b: &Poly| -> Poly {
            let mut out = Poly::zero(3);
            for (ea, ca) in &a.terms {
                for (eb, cb) in &b.terms {
                    let e: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                    out.terms.push((e, ca * cb));
                }
            }
            out
        };
        let mut comps = vec![Poly::zero(3); 9];
        for i in 0..n {
            for j in 0..n {
                let mut p = Poly::zero(3);
                for kk in 0..n {
                    p = p.plus(mul(&jac(kk, i), &jac(kk, j)));
                }
                comps[i * n + j] = p;
            }
        }
        let m = PolyMetric::new(3, comps, vec![0.2, -0.1, 0.3]).unwrap();
        let r = riemann_at(&m).unwrap();
        assert!(r.riemann.comps().iter().all(|x| x.abs() < 1e-12));
    }
}
