//! Dormand-Prince 5(4) with dense output and event location.
//!
//! Used by both the scalar homothety reduction and the left-invariant flow.
//! Events are scalar functions of the state; a sign change across an accepted
//! step is localized by bisection on the dense interpolant.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth minus fourth order weights
const E: [f64; 7] = [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    /// Event localization tolerance in the independent variable.
    pub event_tol: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, h0: None, h_max: f64::INFINITY, max_steps: 200_000, event_tol: 1e-12 }
    }
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub t0: f64,
    pub t1: f64,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
    // length of the step the interpolant was built on; differs from
    // `t1 - t0` after truncation at a terminal event
    h_poly: f64,
    rcont: [Vec<f64>; 4],
}

impl DenseStep {
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let h = self.h_poly;
        let th = if h == 0.0 { 0.0 } else { (t - self.t0) / h };
        let th1 = 1.0 - th;
        let [r2, r3, r4, r5] = &self.rcont;
        (0..self.y0.len()).map(|i| self.y0[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])))).collect()
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.t0 <= self.t1 { (self.t0, self.t1) } else { (self.t1, self.t0) };
        t >= lo && t <= hi
    }
}

/// A terminal or non-terminal zero crossing of `g(t, y)`.
pub struct Event<'a> {
    pub name: &'static str,
    pub g: Box<dyn Fn(f64, &[f64]) -> f64 + 'a>,
    pub terminal: bool,
}

impl<'a> Event<'a> {
    pub fn terminal(name: &'static str, g: impl Fn(f64, &[f64]) -> f64 + 'a) -> Event<'a> {
        Event { name, g: Box::new(g), terminal: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventHit {
    pub name: &'static str,
    pub t: f64,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub steps: Vec<DenseStep>,
    pub events: Vec<EventHit>,
    pub t: f64,
    pub y: Vec<f64>,
    /// Largest accepted local error estimate, in units of the tolerance.
    pub max_err: f64,
    /// Componentwise sum of accepted local error estimates; a crude global
    /// error bound when the flow is not expanding.
    pub err_sum: Vec<f64>,
    pub n_rejected: usize,
}

impl Solution {
    pub fn terminated_by(&self) -> Option<&'static str> {
        self.events.last().map(|e| e.name)
    }

    /// Dense evaluation anywhere inside the integrated range.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        self.steps.iter().find(|s| s.contains(t)).map(|s| s.eval(t))
    }
}

fn norm(err: &[f64], y0: &[f64], y1: &[f64], o: &OdeOptions) -> f64 {
    let n = err.len() as f64;
    let s: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = o.atol + o.rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

fn initial_step<F: Fn(f64, &[f64]) -> Vec<f64>>(f: &F, t0: f64, y0: &[f64], f0: &[f64], dir: f64, o: &OdeOptions) -> f64 {
    let sc: Vec<f64> = y0.iter().map(|y| o.atol + o.rtol * y.abs()).collect();
    let d0 = (y0.iter().zip(&sc).map(|(y, s)| (y / s).powi(2)).sum::<f64>() / y0.len() as f64).sqrt();
    let d1 = (f0.iter().zip(&sc).map(|(y, s)| (y / s).powi(2)).sum::<f64>() / y0.len() as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, d)| y + dir * h0 * d).collect();
    let f1 = f(t0 + dir * h0, &y1);
    let d2 = (f1.iter().zip(f0).zip(&sc).map(|((a, b), s)| ((a - b) / s).powi(2)).sum::<f64>() / y0.len() as f64).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(o.h_max)
}

/// Integrate `y' = f(t, y)` from `t0` toward `t_end` (either direction).
pub fn integrate<F>(f: F, t0: f64, y0: &[f64], t_end: f64, opts: &OdeOptions, events: &[Event]) -> Result<Solution>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let n = y0.len();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = f(t, &y);
    if k1.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { t });
    }
    let mut h = opts.h0.unwrap_or_else(|| initial_step(&f, t0, y0, &k1, dir, opts)).abs();
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.g)(t, &y)).collect();
    let mut sol = Solution { steps: Vec::new(), events: Vec::new(), t, y: y.clone(), max_err: 0.0, err_sum: vec![0.0; n], n_rejected: 0 };
    let mut steps = 0usize;

    while (t_end - t) * dir > 0.0 {
        if steps >= opts.max_steps {
            return Err(Error::TooManySteps(opts.max_steps));
        }
        steps += 1;
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < h_min {
            return Err(Error::StepSizeUnderflow { t });
        }
        let mut last = false;
        if h >= (t_end - t).abs() {
            h = (t_end - t).abs();
            last = true;
        }
        let hs = dir * h;
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        k.push(k1.clone());
        let mut stage = vec![0.0; n];
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    acc += A[s][j] * kj[i];
                }
                stage[i] = y[i] + hs * acc;
            }
            k.push(f(t + C[s] * hs, &stage));
        }
        // stage 7 is evaluated at the fifth order solution (FSAL)
        let y_new = stage.clone();
        let err: Vec<f64> = (0..n).map(|i| hs * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>()).collect();
        let en = norm(&err, &y, &y_new, opts);
        if !en.is_finite() || y_new.iter().any(|x| !x.is_finite()) {
            h *= 0.2;
            sol.n_rejected += 1;
            continue;
        }
        if en > 1.0 {
            h *= (0.9 * en.powf(-0.2)).max(0.2);
            sol.n_rejected += 1;
            continue;
        }
        sol.max_err = sol.max_err.max(en);
        for (acc, e) in sol.err_sum.iter_mut().zip(&err) {
            *acc += e.abs();
        }
        let ydiff: Vec<f64> = (0..n).map(|i| y_new[i] - y[i]).collect();
        let bspl: Vec<f64> = (0..n).map(|i| hs * k[0][i] - ydiff[i]).collect();
        let r4: Vec<f64> = (0..n).map(|i| ydiff[i] - hs * k[6][i] - bspl[i]).collect();
        let r5: Vec<f64> = (0..n).map(|i| hs * (0..7).map(|s| D[s] * k[s][i]).sum::<f64>()).collect();
        let step = DenseStep { t0: t, t1: t + hs, y0: y.clone(), y1: y_new.clone(), h_poly: hs, rcont: [ydiff, bspl, r4, r5] };

        let t_new = if last { t_end } else { t + hs };
        let mut hit: Option<(f64, usize)> = None;
        for (idx, ev) in events.iter().enumerate() {
            let g1 = (ev.g)(t_new, &y_new);
            let g0 = g_prev[idx];
            if g0 != 0.0 && g0.signum() != g1.signum() {
                let te = locate(&step, ev, g0, opts.event_tol);
                let ye = step.eval(te);
                if ev.terminal {
                    if hit.is_none_or(|(th, _)| (te - th) * dir < 0.0) {
                        hit = Some((te, idx));
                    }
                } else {
                    sol.events.push(EventHit { name: ev.name, t: te, y: ye });
                }
            }
            g_prev[idx] = g1;
        }
        sol.steps.push(step);
        if let Some((te, idx)) = hit {
            let ye = sol.steps.last().expect("pushed").eval(te);
            sol.events.push(EventHit { name: events[idx].name, t: te, y: ye.clone() });
            let last_step = sol.steps.last_mut().expect("pushed");
            last_step.t1 = te;
            last_step.y1 = ye.clone();
            sol.t = te;
            sol.y = ye;
            return Ok(sol);
        }
        t = t_new;
        y = y_new;
        k1 = k.swap_remove(6);
        let fac = if en == 0.0 { 10.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 10.0) };
        h = (h * fac).min(opts.h_max);
    }
    sol.t = t;
    sol.y = y;
    Ok(sol)
}

fn locate(step: &DenseStep, ev: &Event, g0: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (step.t0, step.t1);
    let mut ga = g0;
    for _ in 0..200 {
        if (b - a).abs() <= tol * a.abs().max(1.0) {
            break;
        }
        let m = 0.5 * (a + b);
        let gm = (ev.g)(m, &step.eval(m));
        if gm == 0.0 {
            return m;
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_event() {
        let opts = OdeOptions::default();
        let ev = [Event::terminal("two", |_, y: &[f64]| y[0] - 2.0)];
        let sol = integrate(|_, y| vec![y[0]], 0.0, &[1.0], 5.0, &opts, &ev).unwrap();
        assert_eq!(sol.terminated_by(), Some("two"));
        assert!((sol.t - 2f64.ln()).abs() < 1e-10);
        let mid = sol.eval(0.3).unwrap()[0];
        assert!((mid - 0.3f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn backward_harmonic() {
        let opts = OdeOptions::default();
        let sol = integrate(|_, y| vec![y[1], -y[0]], 0.0, &[0.0, 1.0], -3.0, &opts, &[]).unwrap();
        assert!((sol.y[0] - (-3f64).sin()).abs() < 1e-9);
    }
}
