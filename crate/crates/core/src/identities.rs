//! Three-dimensional curvature identities checked pointwise on a sample.

use crate::error::{Error, Result};
use crate::kernels as k;
use crate::sample::GeometrySample;
use crate::tensor::{
    curvature_norm_sq, endo_commutator, endo_of_two_form, h_circ_h, hodge_star, r_circ_r, reconstruct_riemann_3d, ric_circ_ric,
    two_form_of_endo, AltTensor, Metric, SymBilinear,
};
use serde::Serialize;

/// `‖a − b‖∞ / max(‖a‖∞, ‖b‖∞)`, zero when both vanish.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = a.iter().chain(b).map(|x| x.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

pub fn rel_err_scalar(a: f64, b: f64) -> f64 {
    rel_err(&[a], &[b])
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub rel_err: f64,
}

/// `Ric∘Ric`, `s`, `|Ric|²` and friends at the sample point.
struct Ricci3 {
    g: Metric,
    ric: SymBilinear,
    s: f64,
    ric_sq: f64,
}

fn ricci3(s: &GeometrySample) -> Result<Ricci3> {
    if s.dim() != 3 {
        return Err(Error::Unsupported("three-dimensional identities".into()));
    }
    let g = s.metric();
    let ric = s.ricci();
    let sc = ric.trace(&g);
    let ric_sq = ric.norm_sq(&g);
    Ok(Ricci3 { g, ric, s: sc, ric_sq })
}

/// Right-hand side of the `R^{g,H}∘R^{g,H}` formula in terms of `Ric`, `f`, `df`.
pub fn rgh_circ_closed_form(g: &Metric, ric: &SymBilinear, f: f64, df: &[f64]) -> Result<SymBilinear> {
    let n = 3;
    let s = ric.trace(g);
    let ric_sq = ric.norm_sq(g);
    let df_sq = g.inner(&g.raise(df), &g.raise(df));
    let star_df = hodge_star(&AltTensor::one_form(df), g, 1.0)?;
    let comm = endo_commutator(&endo_of_two_form(star_df.comps(), g), &endo_of_two_form(ric.comps(), g), n);
    let comm = two_form_of_endo(&comm, g);
    let rr = ric_circ_ric(ric, g);
    let mut out = vec![0.0; 9];
    for a in 0..n {
        for b in 0..n {
            out[a * n + b] = -rr.at(a, b)
                + (s - 0.5 * f * f) * ric.at(a, b)
                + (ric_sq - 0.5 * s * s + 0.25 * df_sq + f.powi(4) / 8.0) * g.at(a, b)
                + 0.5 * comm[a * n + b]
                + 0.25 * df[a] * df[b];
        }
    }
    Ok(SymBilinear::symmetrized(n, &out))
}

/// `|R^{g,H}|² = |Ric|² − s²/4 − f²s/4 + ½|df|² + (3/16)f⁴`.
pub fn rgh_norm_closed_form(g: &Metric, ric: &SymBilinear, f: f64, df: &[f64]) -> f64 {
    let s = ric.trace(g);
    let df_sq = g.inner(&g.raise(df), &g.raise(df));
    ric.norm_sq(g) - 0.25 * s * s - 0.25 * f * f * s + 0.5 * df_sq + 3.0 / 16.0 * f.powi(4)
}

/// The three-dimensional Riemannian identities (reconstruction, contraction, norm).
pub fn riemannian_3d(s: &GeometrySample) -> Result<Vec<IdentityCheck>> {
    let r3 = ricci3(s)?;
    let r = s.riemann();
    let rebuilt = reconstruct_riemann_3d(&r3.ric, r3.s, &r3.g)?;
    let rr = r_circ_r(&r, &r3.g)?;
    let ricric = ric_circ_ric(&r3.ric, &r3.g);
    let a2: Vec<f64> =
        (0..9).map(|i| -ricric.comps()[i] + r3.s * r3.ric.comps()[i] + (r3.ric_sq - 0.5 * r3.s * r3.s) * r3.g.comps()[i]).collect();
    let norm = curvature_norm_sq(&r, &r3.g)?;
    Ok(vec![
        IdentityCheck { name: "riemann_from_ricci", rel_err: rel_err(r.comps(), rebuilt.comps()) },
        IdentityCheck { name: "r_circ_r_from_ricci", rel_err: rel_err(rr.comps(), &a2) },
        IdentityCheck { name: "riemann_norm", rel_err: rel_err_scalar(norm, r3.ric_sq - 0.25 * r3.s * r3.s) },
    ])
}

/// Identities involving the connection with torsion `H = f ν_g`.
pub fn torsion_3d(s: &GeometrySample) -> Result<Vec<IdentityCheck>> {
    let r3 = ricci3(s)?;
    let f = s.f().ok_or_else(|| Error::Domain("sample has no dilaton".into()))?;
    let df = s.df().expect("dilaton present");
    let rgh = s.torsion_curvature();
    let assembled = s.torsion_curvature_assembled();
    let rr = r_circ_r(&rgh, &r3.g)?;
    let closed = rgh_circ_closed_form(&r3.g, &r3.ric, f, &df)?;
    let norm = curvature_norm_sq(&rgh, &r3.g)?;
    let norm_closed = rgh_norm_closed_form(&r3.g, &r3.ric, f, &df);

    // Ric^{g,H} against Ric − ½ H∘H + ½ δH
    let ric_gh = k::ricci(rgh.comps(), r3.g.inv(), 3);
    let hh = h_circ_h(&s.h(), &r3.g)?;
    let dh = s.delta_h();
    let pred: Vec<f64> = (0..9).map(|i| r3.ric.comps()[i] - 0.5 * hh.comps()[i] + 0.5 * dh.comps()[i]).collect();

    Ok(vec![
        IdentityCheck { name: "torsion_curvature_assembly", rel_err: rel_err(rgh.comps(), assembled.comps()) },
        IdentityCheck { name: "torsion_r_circ_r", rel_err: rel_err(rr.comps(), closed.comps()) },
        IdentityCheck { name: "torsion_curvature_norm", rel_err: rel_err_scalar(norm, norm_closed) },
        IdentityCheck { name: "torsion_ricci", rel_err: rel_err(&ric_gh, &pred) },
        IdentityCheck {
            name: "h_circ_h_is_f2_g",
            rel_err: rel_err(hh.comps(), &r3.g.comps().iter().map(|x| x * f * f).collect::<Vec<_>>()),
        },
    ])
}
