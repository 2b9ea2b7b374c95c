//! Minimal ring interface shared by plain reals and jets, so the contraction
//! kernels run unchanged on pointwise values and on Taylor expansions.

use crate::jet::Jet;

pub trait Scalar: Clone + Send + Sync + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn constant_like(&self, c: f64) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn scaled(&self, c: f64) -> Self;
    /// `self += a * b`
    fn acc(&mut self, a: &Self, b: &Self);
    /// `self += c * a`
    fn acc_scaled(&mut self, a: &Self, c: f64);
    fn recip(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn value(&self) -> f64;
}

impl Scalar for f64 {
    fn zero_like(&self) -> f64 {
        0.0
    }
    fn constant_like(&self, c: f64) -> f64 {
        c
    }
    fn plus(&self, o: &f64) -> f64 {
        self + o
    }
    fn minus(&self, o: &f64) -> f64 {
        self - o
    }
    fn times(&self, o: &f64) -> f64 {
        self * o
    }
    fn scaled(&self, c: f64) -> f64 {
        self * c
    }
    fn acc(&mut self, a: &f64, b: &f64) {
        *self += a * b;
    }
    fn acc_scaled(&mut self, a: &f64, c: f64) {
        *self += c * a;
    }
    fn recip(&self) -> f64 {
        1.0 / self
    }
    fn sqrt(&self) -> f64 {
        f64::sqrt(*self)
    }
    fn value(&self) -> f64 {
        *self
    }
}

impl Scalar for Jet {
    fn zero_like(&self) -> Jet {
        Jet::zero(self.space())
    }
    fn constant_like(&self, c: f64) -> Jet {
        Jet::constant(self.space(), c)
    }
    fn plus(&self, o: &Jet) -> Jet {
        self + o
    }
    fn minus(&self, o: &Jet) -> Jet {
        self - o
    }
    fn times(&self, o: &Jet) -> Jet {
        self * o
    }
    fn scaled(&self, c: f64) -> Jet {
        self.scale(c)
    }
    fn acc(&mut self, a: &Jet, b: &Jet) {
        self.add_product(a, b);
    }
    fn acc_scaled(&mut self, a: &Jet, c: f64) {
        self.add_scaled(a, c);
    }
    fn recip(&self) -> Jet {
        Jet::recip(self)
    }
    fn sqrt(&self) -> Jet {
        Jet::sqrt(self)
    }
    fn value(&self) -> f64 {
        Jet::value(self)
    }
}
