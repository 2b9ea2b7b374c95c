//! Truncated multivariate Taylor algebra.
//!
//! A [`Jet`] stores the Taylor coefficients of a smooth function around a base
//! point, up to a total degree. Every jet carries its own *valid order*:
//! differentiation lowers it by one and binary operations take the minimum, so
//! a value read from a jet is never polluted by truncated terms.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

pub const MAX_VARS: usize = 6;

type Exponent = [u8; MAX_VARS];

/// Monomial basis for jets in `nvars` variables up to total degree `order`.
pub struct JetSpace {
    nvars: usize,
    order: usize,
    exps: Vec<Exponent>,
    // number of monomials of degree <= d, indexed by d
    prefix: Vec<usize>,
    // (i, j, k): monomial i times monomial j is monomial k; sorted by deg k
    mul: Vec<(u32, u32, u32)>,
    // mul[..mul_prefix[d]] covers products of degree <= d
    mul_prefix: Vec<usize>,
    // partial derivative tables: (source, target, factor)
    deriv: Vec<Vec<(u32, u32, f64)>>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetSpace(n={}, order={})", self.nvars, self.order)
    }
}

impl JetSpace {
    /// Shared space for `(nvars, order)`; built once and cached for the process.
    pub fn get(nvars: usize, order: usize) -> &'static JetSpace {
        assert!((1..=MAX_VARS).contains(&nvars), "jet variables out of range");
        assert!(order <= 8, "jet order out of range");
        static CACHE: OnceLock<Mutex<Vec<&'static JetSpace>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
        let mut guard = cache.lock().expect("jet space cache poisoned");
        if let Some(s) = guard.iter().find(|s| s.nvars == nvars && s.order == order) {
            return s;
        }
        let space: &'static JetSpace = Box::leak(Box::new(JetSpace::build(nvars, order)));
        guard.push(space);
        space
    }

    fn build(nvars: usize, order: usize) -> JetSpace {
        let mut exps: Vec<Exponent> = Vec::new();
        let mut prefix = Vec::with_capacity(order + 1);
        for d in 0..=order {
            let mut cur = [0u8; MAX_VARS];
            push_degree(nvars, d, 0, &mut cur, &mut exps);
            prefix.push(exps.len());
        }
        let index: HashMap<Exponent, usize> = exps.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let degree = |e: &Exponent| e.iter().map(|&x| x as usize).sum::<usize>();

        let mut mul = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                if degree(a) + degree(b) > order {
                    continue;
                }
                let mut c = [0u8; MAX_VARS];
                for v in 0..MAX_VARS {
                    c[v] = a[v] + b[v];
                }
                mul.push((i as u32, j as u32, index[&c] as u32));
            }
        }
        mul.sort_by_key(|&(_, _, k)| degree(&exps[k as usize]));
        let mut mul_prefix = vec![0; order + 1];
        for (d, slot) in mul_prefix.iter_mut().enumerate() {
            *slot = mul.iter().take_while(|&&(_, _, k)| degree(&exps[k as usize]) <= d).count();
        }

        let mut deriv = vec![Vec::new(); nvars];
        for (v, table) in deriv.iter_mut().enumerate() {
            for (src, e) in exps.iter().enumerate() {
                if e[v] == 0 {
                    continue;
                }
                let mut t = *e;
                t[v] -= 1;
                table.push((src as u32, index[&t] as u32, e[v] as f64));
            }
        }

        JetSpace { nvars, order, exps, prefix, mul, mul_prefix, deriv }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    /// Exponent vector of monomial `i`.
    pub fn exponent(&self, i: usize) -> &[u8] {
        &self.exps[i][..self.nvars]
    }

    /// Index of the monomial with the given exponents.
    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.exps.iter().position(|e| &e[..self.nvars] == exps && e[self.nvars..].iter().all(|&x| x == 0))
    }
}

fn push_degree(nvars: usize, left: usize, var: usize, cur: &mut Exponent, out: &mut Vec<Exponent>) {
    if var + 1 == nvars {
        cur[var] = left as u8;
        out.push(*cur);
        cur[var] = 0;
        return;
    }
    for k in (0..=left).rev() {
        cur[var] = k as u8;
        push_degree(nvars, left - k, var + 1, cur, out);
    }
    cur[var] = 0;
}

/// Taylor coefficients `c[α]` of `Σ c_α (x - p)^α`, valid up to `order`.
#[derive(Clone)]
pub struct Jet {
    space: &'static JetSpace,
    order: usize,
    c: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet").field("order", &self.order).field("value", &self.value()).finish()
    }
}

impl Jet {
    pub fn constant(space: &'static JetSpace, v: f64) -> Jet {
        let mut c = vec![0.0; space.len()];
        c[0] = v;
        Jet { space, order: space.order, c }
    }

    pub fn zero(space: &'static JetSpace) -> Jet {
        Jet::constant(space, 0.0)
    }

    /// The coordinate function `x_i` expanded around a base point with `x_i(p) = at`.
    pub fn variable(space: &'static JetSpace, i: usize, at: f64) -> Jet {
        let mut j = Jet::constant(space, at);
        if space.order >= 1 {
            j.c[1 + i] = 1.0;
        }
        j
    }

    pub fn from_coeffs(space: &'static JetSpace, order: usize, c: Vec<f64>) -> Jet {
        assert_eq!(c.len(), space.len());
        Jet { space, order: order.min(space.order), c }
    }

    /// Same jet with its valid order capped at `order`.
    pub fn truncated(mut self, order: usize) -> Jet {
        self.order = self.order.min(order);
        self
    }

    pub fn space(&self) -> &'static JetSpace {
        self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..self.space.prefix[self.order]]
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// First partial derivative at the base point.
    pub fn gradient(&self) -> Vec<f64> {
        assert!(self.order >= 1, "jet has no first-order data");
        (0..self.space.nvars).map(|i| self.c[1 + i]).collect()
    }

    /// Partial derivative in variable `v`; the valid order drops by one.
    pub fn partial(&self, v: usize) -> Jet {
        assert!(self.order >= 1, "differentiating an order-0 jet");
        let order = self.order - 1;
        let mut c = vec![0.0; self.c.len()];
        let limit = self.space.prefix[order];
        for &(src, dst, k) in &self.space.deriv[v] {
            if (dst as usize) < limit {
                c[dst as usize] = k * self.c[src as usize];
            }
        }
        Jet { space: self.space, order, c }
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.c.iter_mut().for_each(|x| *x *= s);
        out
    }

    fn check(&self, o: &Jet) {
        debug_assert!(std::ptr::eq(self.space, o.space), "jets from different spaces");
    }

    /// `self += a * b`, truncated to the common valid order.
    pub fn add_product(&mut self, a: &Jet, b: &Jet) {
        self.check(a);
        self.check(b);
        let order = self.order.min(a.order).min(b.order);
        self.order = order;
        let sp = self.space;
        for &(i, j, k) in &sp.mul[..sp.mul_prefix[order]] {
            self.c[k as usize] += a.c[i as usize] * b.c[j as usize];
        }
    }

    pub fn add_scaled(&mut self, a: &Jet, s: f64) {
        self.check(a);
        self.order = self.order.min(a.order);
        for (x, y) in self.c.iter_mut().zip(&a.c) {
            *x += s * y;
        }
    }

    fn compose(&self, series: &[f64]) -> Jet {
        // series[k] multiplies u^k with u = self - self(p)
        let mut u = self.clone();
        u.c[0] = 0.0;
        let mut out = Jet::constant(self.space, series[0]);
        out.order = self.order;
        let mut power = Jet::constant(self.space, 1.0);
        for &coef in series.iter().skip(1).take(self.order) {
            let mut next = Jet::zero(self.space);
            next.add_product(&power, &u);
            power = next;
            out.add_scaled(&power, coef);
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        assert!(a != 0.0, "reciprocal of a jet vanishing at the base point");
        let series: Vec<f64> = (0..=self.order).map(|k| (if k % 2 == 0 { 1.0 } else { -1.0 }) / a.powi(k as i32 + 1)).collect();
        self.compose(&series)
    }

    pub fn sqrt(&self) -> Jet {
        let a = self.value();
        assert!(a > 0.0, "square root of a non-positive jet");
        let mut series = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        for k in 0..=self.order {
            series.push(binom * a.sqrt() / a.powi(k as i32));
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&series)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut series = Vec::with_capacity(self.order + 1);
        let mut fact = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                fact *= k as f64;
            }
            series.push(e / fact);
        }
        self.compose(&series)
    }

    pub fn ln(&self) -> Jet {
        let a = self.value();
        assert!(a > 0.0, "logarithm of a non-positive jet");
        let mut series = vec![a.ln()];
        for k in 1..=self.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(sign / (k as f64 * a.powi(k as i32)));
        }
        self.compose(&series)
    }

    /// Evaluate the truncated Taylor polynomial at displacement `dx` from the base point.
    pub fn eval_at(&self, dx: &[f64]) -> f64 {
        let n = self.space.nvars;
        self.coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let e = self.space.exponent(i);
                c * (0..n).map(|v| dx[v].powi(e[v] as i32)).product::<f64>()
            })
            .sum()
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        let mut out = self.clone();
        out.add_scaled(o, 1.0);
        out
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        let mut out = self.clone();
        out.add_scaled(o, -1.0);
        out
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let mut out = Jet::zero(self.space);
        out.add_product(self, o);
        out
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> &'static JetSpace {
        JetSpace::get(3, 4)
    }

    #[test]
    fn monomial_count() {
        // C(3 + 4, 4)
        assert_eq!(space().len(), 35);
        assert_eq!(JetSpace::get(2, 3).len(), 10);
    }

    #[test]
    fn product_rule_on_polynomials() {
        let s = space();
        let x = Jet::variable(s, 0, 0.5);
        let y = Jet::variable(s, 1, -0.2);
        // f = x^2 y, df/dx = 2xy
        let f = &(&x * &x) * &y;
        let fx = f.partial(0);
        assert!((fx.value() - 2.0 * 0.5 * -0.2).abs() < 1e-15);
        let fxy = fx.partial(1);
        assert!((fxy.value() - 1.0).abs() < 1e-15);
        assert_eq!(fxy.order(), 2);
    }

    #[test]
    fn recip_sqrt_exp_ln_match_closed_forms() {
        let s = space();
        let x = Jet::variable(s, 0, 0.3);
        let y = Jet::variable(s, 2, 0.7);
        let u = &(&x * &y) + &Jet::constant(s, 1.5);
        let h = 1e-4;
        let f = |a: f64, b: f64| 1.0 / (a * b + 1.5);
        let r = u.recip();
        let fd = (f(0.3 + h, 0.7) - f(0.3 - h, 0.7)) / (2.0 * h);
        assert!((r.partial(0).value() - fd).abs() < 1e-7);
        let sq = u.sqrt();
        assert!((&(&sq * &sq) - &u).coeffs().iter().all(|c| c.abs() < 1e-13));
        let e = u.ln().exp();
        assert!((&e - &u).coeffs().iter().all(|c| c.abs() < 1e-13));
        assert!(((&r * &u).value() - 1.0).abs() < 1e-15);
        assert!((&r * &u).coeffs()[1..].iter().all(|c| c.abs() < 1e-13));
    }

    #[test]
    fn eval_reproduces_polynomial() {
        let s = space();
        let x = Jet::variable(s, 0, 1.0);
        let y = Jet::variable(s, 1, 2.0);
        let f = &(&x * &y) + &(&x * &x);
        let got = f.eval_at(&[0.1, -0.3, 0.0]);
        let want = 1.1 * 1.7 + 1.1 * 1.1;
        assert!((got - want).abs() < 1e-14);
    }
}
