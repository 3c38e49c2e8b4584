//! Besov, mixed Besov, Chemin-Lerner, and Orlicz L log L norms, plus the
//! regularity-index fit extracted from a dyadic block profile.
//!
//! The dyadic index set on a grid is {low} ∪ {2^k : the ring intersects the
//! resolved frequency ball}. The low block enters every l^q sum at weight 1;
//! ring k at weight 2^{ks}.

use crate::cutoffs::{Block, Coverage, Cutoffs};
use crate::spectral::{
    in_domain, lebesgue_norm, mixed_norm, multiply_group_table, transform, Domain, Field, Group,
    MixedOrder,
};
use crate::{Error, Result};
use rustfft::num_complex::Complex64;

/// One entry of a dyadic block profile: scale k (-1 for the low block), the
/// block norm, and grid coverage.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ProfileEntry {
    pub k: i32,
    pub norm: f64,
    pub coverage: Coverage,
}

/// Block norms per dyadic scale, in ascending k with the low block first.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct BlockProfile {
    pub entries: Vec<ProfileEntry>,
}

impl BlockProfile {
    /// CSV rows "k,block_norm,truncated_flag" (k = -1 is the low block;
    /// truncated_flag = 1 when the ring is clipped by the grid).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,block_norm,truncated_flag\n");
        for e in &self.entries {
            s.push_str(&format!(
                "{},{:.17e},{}\n",
                e.k,
                e.norm,
                if e.coverage == Coverage::Clipped { 1 } else { 0 }
            ));
        }
        s
    }

    /// (k, norm) pairs of the fully resolved dyadic rings (k >= 0, not
    /// clipped by the grid) with nonzero norm — the fit window.
    pub fn ring_points(&self) -> Vec<(f64, f64)> {
        self.entries
            .iter()
            .filter(|e| e.k >= 0 && e.norm > 0.0 && e.coverage == Coverage::Full)
            .map(|e| (e.k as f64, e.norm))
            .collect()
    }
}

/// Dyadic ring scales resolved by a group: all k >= 0 whose ring meets the grid.
pub fn ring_scales(cuts: &Cutoffs, field: &Field, group: Group) -> Vec<i32> {
    let axes = field.grid.axes(group);
    let mut ks = Vec::new();
    for k in 0..64 {
        let d = (2.0f64).powi(k);
        match cuts.coverage(axes, Block::Dyadic(d)) {
            Coverage::Vanishing => break,
            _ => ks.push(k),
        }
    }
    ks
}

fn lq_combine(vals: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        vals.fold(0.0, f64::max)
    } else {
        vals.map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

fn check_exponent(name: &str, e: f64) -> Result<()> {
    if !(e >= 1.0) {
        return Err(Error::Parameter(format!("{name} must be >= 1 (or infinite), got {e}")));
    }
    Ok(())
}

/// Inhomogeneous Besov norm B^s_{p,q} with blocks on one group and L^p over the
/// full domain: (||low f||_p^q + sum_k 2^{ksq} ||ring_k f||_p^q)^{1/q}.
pub fn besov_norm(
    cuts: &Cutoffs,
    field: &Field,
    group: Group,
    s: f64,
    p: f64,
    q: f64,
) -> Result<(f64, BlockProfile)> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let mut profile = BlockProfile::default();
    let (low, cov) = cuts.block_project(field, group, Block::Low)?;
    profile.entries.push(ProfileEntry { k: -1, norm: lebesgue_norm(&low, p, None)?, coverage: cov });
    for k in ring_scales(cuts, field, group) {
        let d = (2.0f64).powi(k);
        let (blk, cov) = cuts.block_project(field, group, Block::Dyadic(d))?;
        profile.entries.push(ProfileEntry { k, norm: lebesgue_norm(&blk, p, None)?, coverage: cov });
    }
    let norm = lq_combine(
        profile.entries.iter().map(|e| {
            let w = if e.k < 0 { 1.0 } else { (2.0f64).powf(e.k as f64 * s) };
            w * e.norm
        }),
        q,
    );
    Ok((norm, profile))
}

/// One entry of a double (x-scale, v-scale) block profile.
#[derive(Clone, Debug, serde::Serialize)]
pub struct MixedEntry {
    pub i: i32,
    pub j: i32,
    pub norm: f64,
    pub coverage_x: Coverage,
    pub coverage_v: Coverage,
}

/// Double block profile of a mixed Besov norm.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct MixedProfile {
    pub entries: Vec<MixedEntry>,
}

impl MixedProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j,block_norm,truncated_flag\n");
        for e in &self.entries {
            let trunc = e.coverage_x == Coverage::Clipped || e.coverage_v == Coverage::Clipped;
            s.push_str(&format!("{},{},{:.17e},{}\n", e.i, e.j, e.norm, if trunc { 1 } else { 0 }));
        }
        s
    }
}

/// Mixed Besov norm B^{a,s}_{r,p,q}: double blocks (x-scale i, v-scale j),
/// mixed norm L^r_x L^p_v per block, l^q over all pairs with weight 2^{ia+js}.
pub fn besov_norm_mixed(
    cuts: &Cutoffs,
    field: &Field,
    a: f64,
    s: f64,
    r: f64,
    p: f64,
    q: f64,
) -> Result<(f64, MixedProfile)> {
    check_exponent("r", r)?;
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let hat = in_domain(&in_domain(field, Group::X, Domain::Frequency)?, Group::V, Domain::Frequency)?;
    let x_axes = field.grid.axes(Group::X);
    let v_axes = field.grid.axes(Group::V);
    let mut x_blocks: Vec<(i32, Block)> = vec![(-1, Block::Low)];
    for k in ring_scales(cuts, field, Group::X) {
        x_blocks.push((k, Block::Dyadic((2.0f64).powi(k))));
    }
    let mut v_blocks: Vec<(i32, Block)> = vec![(-1, Block::Low)];
    for k in ring_scales(cuts, field, Group::V) {
        v_blocks.push((k, Block::Dyadic((2.0f64).powi(k))));
    }
    let mut profile = MixedProfile::default();
    for &(i, bx) in &x_blocks {
        let cov_x = cuts.coverage(x_axes, bx);
        let tab_x = cuts.symbol_table(x_axes, bx);
        let ctab_x: Vec<Complex64> = tab_x.iter().map(|&m| Complex64::new(m, 0.0)).collect();
        let mut xf = hat.clone();
        multiply_group_table(&mut xf, Group::X, &ctab_x);
        let xf = transform(&xf, Group::X, false)?;
        for &(j, bv) in &v_blocks {
            let cov_v = cuts.coverage(v_axes, bv);
            let tab_v = cuts.symbol_table(v_axes, bv);
            let ctab_v: Vec<Complex64> = tab_v.iter().map(|&m| Complex64::new(m, 0.0)).collect();
            let mut bf = xf.clone();
            multiply_group_table(&mut bf, Group::V, &ctab_v);
            let bf = transform(&bf, Group::V, false)?;
            let n = mixed_norm(&bf, r, p, MixedOrder::XOuter)?;
            profile.entries.push(MixedEntry { i, j, norm: n, coverage_x: cov_x, coverage_v: cov_v });
        }
    }
    let norm = lq_combine(
        profile.entries.iter().map(|e| {
            let wi = if e.i < 0 { 1.0 } else { (2.0f64).powf(e.i as f64 * a) };
            let wj = if e.j < 0 { 1.0 } else { (2.0f64).powf(e.j as f64 * s) };
            wi * wj * e.norm
        }),
        q,
    );
    Ok((norm, profile))
}

/// Chemin-Lerner norm: v-group blocks measured in L^r_x L^p_v, combined in l^q
/// with weight 2^{js}.
pub fn chemin_lerner_norm(
    cuts: &Cutoffs,
    field: &Field,
    r: f64,
    s: f64,
    p: f64,
    q: f64,
) -> Result<(f64, BlockProfile)> {
    check_exponent("r", r)?;
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let mut profile = BlockProfile::default();
    let (low, cov) = cuts.block_project(field, Group::V, Block::Low)?;
    profile.entries.push(ProfileEntry {
        k: -1,
        norm: mixed_norm(&low, r, p, MixedOrder::XOuter)?,
        coverage: cov,
    });
    for k in ring_scales(cuts, field, Group::V) {
        let d = (2.0f64).powi(k);
        let (blk, cov) = cuts.block_project(field, Group::V, Block::Dyadic(d))?;
        profile.entries.push(ProfileEntry {
            k,
            norm: mixed_norm(&blk, r, p, MixedOrder::XOuter)?,
            coverage: cov,
        });
    }
    let norm = lq_combine(
        profile.entries.iter().map(|e| {
            let w = if e.k < 0 { 1.0 } else { (2.0f64).powf(e.k as f64 * s) };
            w * e.norm
        }),
        q,
    );
    Ok((norm, profile))
}

/// Iterated norm L^r_x of the per-x Besov norm B^s_{p,q} in v.
pub fn lr_besov_norm(cuts: &Cutoffs, field: &Field, r: f64, s: f64, p: f64, q: f64) -> Result<f64> {
    check_exponent("r", r)?;
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let rows = field.rows();
    let cols = field.cols();
    let vcell = field.grid.v_cell();
    let xcell = field.grid.x_cell();
    // Per-row block Lp_v norms: project by each v-block once, then reduce rows.
    let mut per_row_terms: Vec<Vec<f64>> = vec![Vec::new(); rows];
    let mut blocks: Vec<(i32, Block)> = vec![(-1, Block::Low)];
    for k in ring_scales(cuts, field, Group::V) {
        blocks.push((k, Block::Dyadic((2.0f64).powi(k))));
    }
    for &(k, b) in &blocks {
        let (blk, _) = cuts.block_project(field, Group::V, b)?;
        let blk = in_domain(&blk, Group::X, Domain::Physical)?;
        let w = if k < 0 { 1.0 } else { (2.0f64).powf(k as f64 * s) };
        for (row, terms) in per_row_terms.iter_mut().enumerate() {
            let vals = (0..cols).map(|c| blk.data[row * cols + c].norm());
            let n = if p.is_infinite() {
                vals.fold(0.0, f64::max)
            } else {
                (vals.map(|a| a.powf(p)).sum::<f64>() * vcell).powf(1.0 / p)
            };
            terms.push(w * n);
        }
    }
    let row_besov = per_row_terms.into_iter().map(|terms| lq_combine(terms.into_iter(), q));
    let out = if r.is_infinite() {
        row_besov.fold(0.0, f64::max)
    } else {
        (row_besov.map(|a| a.powf(r)).sum::<f64>() * xcell).powf(1.0 / r)
    };
    Ok(out)
}

/// Least-squares line fit: returns (slope, intercept, r^2).
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| {
        let e = y - (intercept + slope * x);
        e * e
    }).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, intercept, r2)
}

/// Result of a regularity-index fit over a dyadic profile.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct FitResult {
    /// Slope of log2(block norm) against k.
    pub slope: f64,
    /// Regularity index: the negated slope.
    pub index: f64,
    /// Coefficient of determination of the fit.
    pub r2: f64,
    pub points: usize,
}

/// Fit the decay exponent of ring norms: log2(norm_k) ~ intercept - index * k.
/// Needs at least 4 strictly positive entries.
pub fn regularity_index_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, n)| *n > 0.0 && n.is_finite())
        .map(|&(k, n)| (k, n.log2()))
        .collect();
    if usable.len() < 4 {
        return Err(Error::Parameter(format!(
            "regularity fit needs at least 4 nonzero block norms, got {}",
            usable.len()
        )));
    }
    let xs: Vec<f64> = usable.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.1).collect();
    let (slope, _, r2) = least_squares(&xs, &ys);
    Ok(FitResult { slope, index: -slope, r2, points: usable.len() })
}

/// Young function of the L log L class: h(z) = (1+z) ln(1+z) - z.
pub fn llogl_young(z: f64) -> f64 {
    (1.0 + z) * z.ln_1p() - z
}

/// Orlicz L log L norm (Luxemburg gauge): inf { lam > 0 :
/// int h(|f|/lam) <= 1 }, over the whole domain or a region box.
pub fn orlicz_llogl_norm(field: &Field, region: Option<&[(f64, f64)]>) -> Result<f64> {
    let f = in_domain(&in_domain(field, Group::V, Domain::Physical)?, Group::X, Domain::Physical)?;
    let dim = field.grid.dim();
    let cell = field.grid.x_cell() * field.grid.v_cell();
    // Collect |f| on the region.
    let mut vals: Vec<f64> = Vec::new();
    if let Some(ivals) = region {
        if ivals.len() != 2 * dim {
            return Err(Error::Parameter(format!(
                "region needs one interval per axis ({} total), got {}",
                2 * dim,
                ivals.len()
            )));
        }
        let xc = field.grid.coords(Group::X);
        let vc = field.grid.coords(Group::V);
        let cols = f.cols();
        for (idx, z) in f.data.iter().enumerate() {
            let (r, c) = (idx / cols, idx % cols);
            let rx = field.grid.unravel(Group::X, r);
            let rv = field.grid.unravel(Group::V, c);
            let ok = rx.iter().enumerate().all(|(a, &i)| xc[a][i] >= ivals[a].0 && xc[a][i] <= ivals[a].1)
                && rv
                    .iter()
                    .enumerate()
                    .all(|(a, &i)| vc[a][i] >= ivals[dim + a].0 && vc[a][i] <= ivals[dim + a].1);
            if ok {
                vals.push(z.norm());
            }
        }
    } else {
        vals.extend(f.data.iter().map(|z| z.norm()));
    }
    let peak = vals.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    let gauge = |lam: f64| -> f64 { vals.iter().map(|&a| llogl_young(a / lam)).sum::<f64>() * cell };
    // Bracket the root of gauge(lam) = 1 (gauge decreases in lam).
    let mut lo = peak * 1e-9;
    let mut hi = peak * 1e9;
    if gauge(hi) > 1.0 || gauge(lo) < 1.0 {
        return Err(Error::Numeric("Luxemburg gauge could not be bracketed".into()));
    }
    // Geometric bisection to relative width 1e-9.
    while hi / lo - 1.0 > 1e-9 {
        let mid = (lo * hi).sqrt();
        if gauge(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}
