//! Dense index kernels, generic over [`Scalar`].
//!
//! Tensors are flat row-major slices of frame components; a rank-p tensor in
//! dimension n has n^p entries. Contractions always raise with the supplied
//! inverse metric.

use crate::scalar::Scalar;

pub fn pow(n: usize, p: usize) -> usize {
    n.pow(p as u32)
}

/// Multi-index of a flat position.
pub fn unflatten(mut k: usize, n: usize, rank: usize) -> Vec<usize> {
    let mut out = vec![0; rank];
    for slot in (0..rank).rev() {
        out[slot] = k % n;
        k /= n;
    }
    out
}

pub fn flatten(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

pub fn zeros<S: Scalar>(like: &S, len: usize) -> Vec<S> {
    vec![like.zero_like(); len]
}

/// Gauss-Jordan inverse with partial pivoting on the base-point values.
pub fn inverse<S: Scalar>(a: &[S], n: usize) -> Option<Vec<S>> {
    let mut m: Vec<S> = a.to_vec();
    let mut inv: Vec<S> = (0..n * n).map(|k| a[0].constant_like(if k / n == k % n { 1.0 } else { 0.0 })).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x * n + col].value().abs().total_cmp(&m[y * n + col].value().abs()))?;
        if m[piv * n + col].value().abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(piv * n + j, col * n + j);
                inv.swap(piv * n + j, col * n + j);
            }
        }
        let r = m[col * n + col].recip();
        for j in 0..n {
            m[col * n + j] = m[col * n + j].times(&r);
            inv[col * n + j] = inv[col * n + j].times(&r);
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            // jets can vanish at the base point without vanishing identically,
            // so the elimination always runs
            let factor = m[row * n + col].clone();
            for j in 0..n {
                let mj = m[col * n + j].times(&factor);
                let ij = inv[col * n + j].times(&factor);
                m[row * n + j] = m[row * n + j].minus(&mj);
                inv[row * n + j] = inv[row * n + j].minus(&ij);
            }
        }
    }
    Some(inv)
}

/// Determinant by elimination on the base-point values.
pub fn determinant<S: Scalar>(a: &[S], n: usize) -> S {
    let mut m: Vec<S> = a.to_vec();
    let mut det = a[0].constant_like(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x * n + col].value().abs().total_cmp(&m[y * n + col].value().abs())).unwrap_or(col);
        if piv != col {
            for j in 0..n {
                m.swap(piv * n + j, col * n + j);
            }
            det = det.scaled(-1.0);
        }
        let p = m[col * n + col].clone();
        det = det.times(&p);
        if p.value() == 0.0 {
            return det;
        }
        let r = p.recip();
        for row in col + 1..n {
            let factor = m[row * n + col].times(&r);
            for j in col..n {
                let v = m[col * n + j].times(&factor);
                m[row * n + j] = m[row * n + j].minus(&v);
            }
        }
    }
    det
}

/// Raise index `slot` of a rank-`rank` tensor with `ginv`.
pub fn raise<S: Scalar>(t: &[S], rank: usize, slot: usize, ginv: &[S], n: usize) -> Vec<S> {
    let len = pow(n, rank);
    let stride = pow(n, rank - 1 - slot);
    let mut out = zeros(&t[0], len);
    for (k, o) in out.iter_mut().enumerate() {
        let a = (k / stride) % n;
        let base = k - a * stride;
        for b in 0..n {
            o.acc(&ginv[a * n + b], &t[base + b * stride]);
        }
    }
    out
}

/// Raise every index listed in `slots`.
pub fn raise_slots<S: Scalar>(t: &[S], rank: usize, slots: &[usize], ginv: &[S], n: usize) -> Vec<S> {
    let mut cur = t.to_vec();
    for &s in slots {
        cur = raise(&cur, rank, s, ginv, n);
    }
    cur
}

/// `(H∘H)_{ab} = ½ H_{aij} H_b^{ij}`.
pub fn h_circ_h<S: Scalar>(h: &[S], ginv: &[S], n: usize) -> Vec<S> {
    let hr = raise_slots(h, 3, &[1, 2], ginv, n);
    let mut out = zeros(&h[0], n * n);
    let nn = n * n;
    for a in 0..n {
        for b in 0..n {
            let o = &mut out[a * n + b];
            for k in 0..nn {
                o.acc(&h[a * nn + k], &hr[b * nn + k]);
            }
            *o = o.scaled(0.5);
        }
    }
    out
}

/// `(R∘R)_{ab} = ½ R_{aijk} R_b^{ijk}`.
pub fn r_circ_r<S: Scalar>(r: &[S], ginv: &[S], n: usize) -> Vec<S> {
    let rr = raise_slots(r, 4, &[1, 2, 3], ginv, n);
    let mut out = zeros(&r[0], n * n);
    let n3 = n * n * n;
    for a in 0..n {
        for b in 0..n {
            let o = &mut out[a * n + b];
            for k in 0..n3 {
                o.acc(&r[a * n3 + k], &rr[b * n3 + k]);
            }
            *o = o.scaled(0.5);
        }
    }
    out
}

/// `|R|² = ¼ R_{abcd} R^{abcd}`.
pub fn curvature_norm_sq<S: Scalar>(r: &[S], ginv: &[S], n: usize) -> S {
    let rr = raise_slots(r, 4, &[0, 1, 2, 3], ginv, n);
    let mut out = r[0].zero_like();
    for (x, y) in r.iter().zip(&rr) {
        out.acc(x, y);
    }
    out.scaled(0.25)
}

/// Determinant inner product of two p-forms: `(1/p!) α_{i..} β^{i..}`.
pub fn form_inner<S: Scalar>(a: &[S], b: &[S], p: usize, ginv: &[S], n: usize) -> S {
    if p == 0 {
        return a[0].times(&b[0]);
    }
    let slots: Vec<usize> = (0..p).collect();
    let br = raise_slots(b, p, &slots, ginv, n);
    let mut out = a[0].zero_like();
    for (x, y) in a.iter().zip(&br) {
        out.acc(x, y);
    }
    let fact: f64 = (1..=p).map(|k| k as f64).product();
    out.scaled(1.0 / fact)
}

/// Wedge of two 2-forms as a 4-form.
pub fn wedge22<S: Scalar>(a: &[S], b: &[S], n: usize) -> Vec<S> {
    let mut out = zeros(&a[0], pow(n, 4));
    let at = |i: usize, j: usize| &a[i * n + j];
    let bt = |i: usize, j: usize| &b[i * n + j];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let o = &mut out[((i * n + j) * n + k) * n + l];
                    o.acc(at(i, j), bt(k, l));
                    o.acc(at(k, l), bt(i, j));
                    let mut neg = o.zero_like();
                    neg.acc(at(i, k), bt(j, l));
                    neg.acc(at(j, l), bt(i, k));
                    o.acc_scaled(&neg, -1.0);
                    o.acc(at(i, l), bt(j, k));
                    o.acc(at(j, k), bt(i, l));
                }
            }
        }
    }
    out
}

/// `⟨R∧R⟩ = ½ Σ_{ij} R(e_i,e_j) ∧ R(e_i,e_j)`: wedge on the first pair,
/// contraction on the second.
pub fn r_wedge_r<S: Scalar>(r: &[S], ginv: &[S], n: usize) -> Vec<S> {
    let rr = raise_slots(r, 4, &[2, 3], ginv, n);
    let mut out = zeros(&r[0], pow(n, 4));
    let nn = n * n;
    for ij in 0..nn {
        let a: Vec<S> = (0..nn).map(|ab| r[ab * nn + ij].clone()).collect();
        let b: Vec<S> = (0..nn).map(|ab| rr[ab * nn + ij].clone()).collect();
        let w = wedge22(&a, &b, n);
        for (o, x) in out.iter_mut().zip(&w) {
            o.acc_scaled(x, 0.5);
        }
    }
    out
}

/// Ricci contraction `Ric_{bc} = g^{ad} R_{abcd}`.
pub fn ricci<S: Scalar>(r: &[S], ginv: &[S], n: usize) -> Vec<S> {
    let mut out = zeros(&r[0], n * n);
    for b in 0..n {
        for c in 0..n {
            let o = &mut out[b * n + c];
            for a in 0..n {
                for d in 0..n {
                    o.acc(&ginv[a * n + d], &r[((a * n + b) * n + c) * n + d]);
                }
            }
        }
    }
    out
}

pub fn trace<S: Scalar>(h: &[S], ginv: &[S], n: usize) -> S {
    let mut out = h[0].zero_like();
    for a in 0..n {
        for b in 0..n {
            out.acc(&ginv[a * n + b], &h[a * n + b]);
        }
    }
    out
}

/// Contract a vector into the first slot.
pub fn interior<S: Scalar>(v: &[S], t: &[S], rank: usize, n: usize) -> Vec<S> {
    let rest = pow(n, rank - 1);
    let mut out = zeros(&t[0], rest);
    for a in 0..n {
        for k in 0..rest {
            out[k].acc(&v[a], &t[a * rest + k]);
        }
    }
    out
}

/// Components of the vector dual to a one-form.
pub fn sharp<S: Scalar>(w: &[S], ginv: &[S], n: usize) -> Vec<S> {
    raise(w, 1, 0, ginv, n)
}

pub fn sym2<S: Scalar>(h: &[S], n: usize) -> Vec<S> {
    let mut out = h.to_vec();
    for a in 0..n {
        for b in 0..n {
            out[a * n + b] = h[a * n + b].plus(&h[b * n + a]).scaled(0.5);
        }
    }
    out
}

pub fn skew2<S: Scalar>(h: &[S], n: usize) -> Vec<S> {
    let mut out = h.to_vec();
    for a in 0..n {
        for b in 0..n {
            out[a * n + b] = h[a * n + b].minus(&h[b * n + a]).scaled(0.5);
        }
    }
    out
}

/// Sign of a permutation given as a slice, 0 if entries repeat.
pub fn perm_sign(p: &[usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] == p[j] {
                return 0.0;
            }
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Levi-Civita symbol of rank n as a flat array.
pub fn epsilon(n: usize) -> Vec<f64> {
    (0..pow(n, n)).map(|k| perm_sign(&unflatten(k, n, n))).collect()
}

/// Antisymmetrize a rank-p array with the determinant normalization
/// `(Alt t)_{i..} = (1/p!) Σ_σ sgn σ t_{σ(i..)}`.
pub fn antisymmetrize<S: Scalar>(t: &[S], p: usize, n: usize) -> Vec<S> {
    let perms = permutations(p);
    let fact = perms.len() as f64;
    let mut out = zeros(&t[0], pow(n, p));
    for (k, o) in out.iter_mut().enumerate() {
        let idx = unflatten(k, n, p);
        for perm in &perms {
            let s = perm_sign(perm);
            let j: Vec<usize> = perm.iter().map(|&q| idx[q]).collect();
            o.acc_scaled(&t[flatten(&j, n)], s / fact);
        }
    }
    out
}

pub fn permutations(p: usize) -> Vec<Vec<usize>> {
    if p == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for prev in permutations(p - 1) {
        for pos in 0..=prev.len() {
            let mut v = prev.clone();
            v.insert(pos, p - 1);
            out.push(v);
        }
    }
    out
}
