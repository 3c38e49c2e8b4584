//! Free transport along straight lines and the operators that split a
//! frequency-localized velocity average into a density part and a source part.
//!
//! For g = v . grad_x f, each x-frequency block of the velocity average of f
//! decomposes exactly as  block<f> = A f + t B g,  where A multiplies by an
//! averaging profile rho(t xi . v) and B by the complementary profile
//! tau(t xi . v) with rho(z) + i z tau(z) = 1.

use crate::besov::least_squares;
use crate::cutoffs::{Block, Coverage, Cutoffs};
use crate::quad::{gl_on, simpson_on};
use crate::rho::{Profile, ProfileKind};
use crate::spectral::{
    average_velocity, in_domain, mixed_norm, multiply_group_table, shift, transform, Domain, Field,
    Group, MixedOrder,
};
use crate::{Error, Result};
use rustfft::num_complex::Complex64;

/// Per-row x-frequency vectors of a grid.
fn freq_rows(field: &Field) -> Vec<Vec<f64>> {
    let fr = field.grid.freqs(Group::X);
    (0..field.rows())
        .map(|r| {
            field
                .grid
                .unravel(Group::X, r)
                .iter()
                .enumerate()
                .map(|(a, &i)| fr[a][i])
                .collect()
        })
        .collect()
}

/// Per-column velocity coordinate vectors (chart-aware).
fn coord_cols(field: &Field) -> Vec<Vec<f64>> {
    let vc = field.grid.coords(Group::V);
    (0..field.cols())
        .map(|c| {
            field
                .grid
                .unravel(Group::V, c)
                .iter()
                .enumerate()
                .map(|(a, &i)| vc[a][i])
                .collect()
        })
        .collect()
}

/// Apply the transport generator: returns v . grad_x f (spectral derivative).
pub fn apply_transport(field: &Field) -> Result<Field> {
    let f = in_domain(&in_domain(field, Group::V, Domain::Physical)?, Group::X, Domain::Frequency)?;
    let xi = freq_rows(&f);
    let vs = coord_cols(&f);
    let cols = f.cols();
    let mut out = f.clone();
    for (idx, z) in out.data.iter_mut().enumerate() {
        let (r, c) = (idx / cols, idx % cols);
        let dot: f64 = xi[r].iter().zip(&vs[c]).map(|(a, b)| a * b).sum();
        *z *= Complex64::new(0.0, dot);
    }
    let out = transform(&out, Group::X, false)?;
    in_domain(&out, Group::X, field.domain(Group::X))
}

/// Quadrature rule for the time integral in the transport identity.
#[derive(Clone, Copy, Debug)]
pub enum QuadRule {
    GaussLegendre(usize),
    Simpson(usize),
}

impl QuadRule {
    fn on(self, t: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            QuadRule::GaussLegendre(n) => gl_on(n, 0.0, t),
            QuadRule::Simpson(n) => simpson_on(n, t),
        }
    }
}

/// Relative L2 residual of  f(x-tv) - f + int_0^t (v . grad_x f)(x-sv) ds = 0.
pub fn transport_integral_residual(field: &Field, t: f64, rule: QuadRule) -> Result<f64> {
    let f = in_domain(&in_domain(field, Group::V, Domain::Physical)?, Group::X, Domain::Physical)?;
    let g = apply_transport(&f)?;
    let (nodes, weights) = rule.on(t);
    let mut acc = shift(&f, t)?.sub(&f);
    for (&s, &w) in nodes.iter().zip(&weights) {
        acc = acc.add(&shift(&g, s)?.scale(Complex64::new(w, 0.0)));
    }
    let num = mixed_norm(&acc, 2.0, 2.0, MixedOrder::XOuter)?;
    let den = mixed_norm(&f, 2.0, 2.0, MixedOrder::XOuter)?;
    if den == 0.0 {
        return Err(Error::Parameter("transport residual of the zero field".into()));
    }
    Ok(num / den)
}

/// Multiply a field by prof(t xi . v) in (x-frequency, v-physical) variables.
fn multiply_profile(
    field: &Field,
    t: f64,
    eval: &dyn Fn(f64) -> Complex64,
) -> Result<Field> {
    let mut f =
        in_domain(&in_domain(field, Group::V, Domain::Physical)?, Group::X, Domain::Frequency)?;
    let xi = freq_rows(&f);
    let vs = coord_cols(&f);
    let cols = f.cols();
    for (idx, z) in f.data.iter_mut().enumerate() {
        let (r, c) = (idx / cols, idx % cols);
        let dot: f64 = xi[r].iter().zip(&vs[c]).map(|(a, b)| a * b).sum();
        *z *= eval(t * dot);
    }
    Ok(f)
}

fn block_multiply_x(cuts: &Cutoffs, field: &Field, block: Block) -> Result<Field> {
    let axes = field.grid.axes(Group::X);
    let tab = cuts.symbol_table(axes, block);
    let ctab: Vec<Complex64> = tab.iter().map(|&m| Complex64::new(m, 0.0)).collect();
    let mut f = in_domain(field, Group::X, Domain::Frequency)?;
    multiply_group_table(&mut f, Group::X, &ctab);
    in_domain(&f, Group::X, Domain::Physical)
}

/// x-frequency block of the velocity average: block<f>.
pub fn block_average(cuts: &Cutoffs, field: &Field, block: Block) -> Result<Field> {
    let f = in_domain(&in_domain(field, Group::V, Domain::Physical)?, Group::X, Domain::Physical)?;
    block_multiply_x(cuts, &average_velocity(&f)?, block)
}

/// Density operator: block-filtered velocity average of rho(t xi . v) f.
pub fn density_operator(
    cuts: &Cutoffs,
    field: &Field,
    t: f64,
    block: Block,
    profile: &Profile,
) -> Result<Field> {
    let w = multiply_profile(field, t, &|z| profile.rho(z))?;
    let w = in_domain(&w, Group::X, Domain::Physical)?;
    block_multiply_x(cuts, &average_velocity(&w)?, block)
}

/// Source operator: block-filtered velocity average of tau(t xi . v) g.
pub fn source_operator(
    cuts: &Cutoffs,
    field: &Field,
    t: f64,
    block: Block,
    profile: &Profile,
) -> Result<Field> {
    let w = multiply_profile(field, t, &|z| profile.tau(z))?;
    let w = in_domain(&w, Group::X, Domain::Physical)?;
    block_multiply_x(cuts, &average_velocity(&w)?, block)
}

/// Density operator through physical shifts: sum_i w_i block<f(x - t s_i v, v)>.
pub fn density_operator_physical(
    cuts: &Cutoffs,
    field: &Field,
    t: f64,
    block: Block,
    profile: &Profile,
) -> Result<Field> {
    let f = in_domain(&in_domain(field, Group::V, Domain::Physical)?, Group::X, Domain::Physical)?;
    let mut acc: Option<Field> = None;
    for (&s, &w) in profile.nodes.iter().zip(&profile.weights) {
        let term = average_velocity(&shift(&f, t * s)?)?.scale(Complex64::new(w, 0.0));
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    block_multiply_x(cuts, &acc.unwrap(), block)
}

/// Source operator through physical shifts: the profile-weighted running
/// integral sum_i w_i int_0^{s_i} g(x - t sigma v, v) d sigma, block-averaged.
/// The inner integral uses Gauss-Legendre with `inner` nodes per profile node.
pub fn source_operator_physical(
    cuts: &Cutoffs,
    field: &Field,
    t: f64,
    block: Block,
    profile: &Profile,
    inner: usize,
) -> Result<Field> {
    let g = in_domain(&in_domain(field, Group::V, Domain::Physical)?, Group::X, Domain::Physical)?;
    let mut acc: Option<Field> = None;
    for (&s, &w) in profile.nodes.iter().zip(&profile.weights) {
        let (sig, sw) = gl_on(inner, 0.0, s);
        for (&q, &qw) in sig.iter().zip(&sw) {
            let term = average_velocity(&shift(&g, t * q)?)?.scale(Complex64::new(w * qw, 0.0));
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term),
            });
        }
    }
    block_multiply_x(cuts, &acc.unwrap(), block)
}

fn rel_max_diff(a: &Field, b: &Field, scale: f64) -> Result<f64> {
    Ok(a.sub(b).max_abs() / scale)
}

/// Residual of the exact splitting  block<f> = A f + t B g  with the slaved
/// source g = v . grad_x f, relative to the sup of the left side.
pub fn reconstruction_residual(
    cuts: &Cutoffs,
    field: &Field,
    t: f64,
    block: Block,
    profile: &Profile,
) -> Result<f64> {
    let g = apply_transport(field)?;
    let lhs = block_average(cuts, field, block)?;
    let a = density_operator(cuts, field, t, block, profile)?;
    let b = source_operator(cuts, &g, t, block, profile)?;
    let rhs = a.add(&b.scale(Complex64::new(t, 0.0)));
    let scale = lhs.max_abs().max(1e-300);
    rel_max_diff(&lhs, &rhs, scale)
}

/// One scale of the dyadic average decomposition.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DecompositionRow {
    pub k: i32,
    pub residual: f64,
    pub coverage: Coverage,
}

/// Per-scale residuals of block<f> = A f + t B g, plus the residual of summing
/// every scale back to the full velocity average.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DecompositionReport {
    pub rows: Vec<DecompositionRow>,
    pub total_residual: f64,
}

/// Decompose the velocity average over every resolved dyadic scale and verify
/// each block splits through the density/source pair.
pub fn dyadic_average_decomposition(
    cuts: &Cutoffs,
    field: &Field,
    t: f64,
    profile: &Profile,
) -> Result<DecompositionReport> {
    let g = apply_transport(field)?;
    let avg = average_velocity(&in_domain(
        &in_domain(field, Group::V, Domain::Physical)?,
        Group::X,
        Domain::Physical,
    )?)?;
    let scale = avg.max_abs().max(1e-300);
    let mut blocks: Vec<(i32, Block)> = vec![(-1, Block::Low)];
    for k in crate::besov::ring_scales(cuts, field, Group::X) {
        blocks.push((k, Block::Dyadic((2.0f64).powi(k))));
    }
    let mut rows = Vec::new();
    let mut total: Option<Field> = None;
    for &(k, b) in &blocks {
        let cov = cuts.coverage(field.grid.axes(Group::X), b);
        let lhs = block_average(cuts, field, b)?;
        let a = density_operator(cuts, field, t, b, profile)?;
        let bb = source_operator(cuts, &g, t, b, profile)?;
        let rhs = a.add(&bb.scale(Complex64::new(t, 0.0)));
        let res = lhs.sub(&rhs).max_abs() / scale;
        rows.push(DecompositionRow { k, residual: res, coverage: cov });
        total = Some(match total {
            None => rhs,
            Some(acc) => acc.add(&rhs),
        });
    }
    let total_residual = total.unwrap().sub(&avg).max_abs() / scale;
    Ok(DecompositionReport { rows, total_residual })
}

/// Residuals of the four frequency-localization identities and the two moved-
/// band controls, all relative to one normalizer.
#[derive(Clone, Debug, serde::Serialize)]
pub struct LocalizationReport {
    pub a_band: f64,
    pub b_band: f64,
    pub a_low: f64,
    pub b_low: f64,
    pub neg_a: f64,
    pub neg_b: f64,
    pub normalizer: f64,
}

impl LocalizationReport {
    /// Largest of the four identity residuals.
    pub fn identity_max(&self) -> f64 {
        self.a_band.max(self.b_band).max(self.a_low).max(self.b_low)
    }

    /// Strength of the moved-band control: how much the answer changes when
    /// the localizer sits on the wrong band. The density side is structurally
    /// blind to far velocity content (its profile window decays there), so the
    /// witness is the larger of the two.
    pub fn control(&self) -> f64 {
        self.neg_a.max(self.neg_b)
    }
}

fn localize(cuts: &Cutoffs, f: &Field, bx: Block, bv: Block) -> Result<Field> {
    let (fx, _) = cuts.block_project(f, Group::X, bx)?;
    let (fxv, _) = cuts.block_project(&fx, Group::V, bv)?;
    Ok(fxv)
}

/// Verify that the density/source operators only see a fixed frequency
/// neighborhood of their input: inserting the matching localizer is a no-op,
/// and a control localizer moved off the active band is not.
pub fn localization_check(
    cuts: &Cutoffs,
    f: &Field,
    g: &Field,
    delta: f64,
    t: f64,
    profile: &Profile,
) -> Result<LocalizationReport> {
    if profile.kind == ProfileKind::Dirac {
        return Err(Error::Parameter(
            "localization analysis needs a smooth averaging profile; the point profile has unbounded frequency spread".into(),
        ));
    }
    if delta <= 0.0 || t <= 0.0 {
        return Err(Error::Parameter(format!("localization needs delta, t > 0, got {delta}, {t}")));
    }
    let dy = Block::Dyadic(delta);
    let low = Block::Low;
    let band_x = Block::Band(delta / 2.0, 2.0 * delta);
    let band_v = Block::Band(t * delta / 2.0, 4.0 * t * delta);
    let sv_b = Block::Smooth(8.0 * t * delta);
    let s2x = Block::Smooth(2.0);
    let s4tv = Block::Smooth(4.0 * t);
    let bad_v = Block::Band(4.0 * t * delta, 8.0 * t * delta);

    let af = density_operator(cuts, f, t, dy, profile)?;
    let bg = source_operator(cuts, g, t, dy, profile)?;
    let lhs = block_average(cuts, f, dy)?;
    let normalizer = af.max_abs().max(t * bg.max_abs()).max(lhs.max_abs()).max(1e-300);

    let a_loc = density_operator(cuts, &localize(cuts, f, band_x, band_v)?, t, dy, profile)?;
    let b_loc = source_operator(cuts, &localize(cuts, g, band_x, sv_b)?, t, dy, profile)?;
    let a0 = density_operator(cuts, f, t, low, profile)?;
    let b0 = source_operator(cuts, g, t, low, profile)?;
    let a0_loc = density_operator(cuts, &localize(cuts, f, s2x, s4tv)?, t, low, profile)?;
    let b0_loc = source_operator(cuts, &localize(cuts, g, s2x, s4tv)?, t, low, profile)?;
    let a_bad = density_operator(cuts, &localize(cuts, f, band_x, bad_v)?, t, dy, profile)?;
    let b_bad = source_operator(cuts, &localize(cuts, g, band_x, bad_v)?, t, dy, profile)?;

    Ok(LocalizationReport {
        a_band: rel_max_diff(&af, &a_loc, normalizer)?,
        b_band: rel_max_diff(&bg, &b_loc, normalizer)?,
        a_low: rel_max_diff(&a0, &a0_loc, normalizer)?,
        b_low: rel_max_diff(&b0, &b0_loc, normalizer)?,
        neg_a: rel_max_diff(&af, &a_bad, normalizer)?,
        neg_b: rel_max_diff(&bg, &b_bad, normalizer)?,
        normalizer,
    })
}

/// Residuals of the x-to-v block transfer along the shift, or flags explaining
/// why the configuration cannot resolve it.
#[derive(Clone, Debug, serde::Serialize)]
pub struct TransferReport {
    pub dyadic: Option<f64>,
    pub low: Option<f64>,
    pub flags: Vec<String>,
}

/// Check that an x-block of the averaged shifted field equals the average of
/// the shifted v-block filtered field: the shift converts v-localization at
/// scale t*delta into x-localization at scale delta.
pub fn x_to_v_transfer_check(
    cuts: &Cutoffs,
    field: &Field,
    t: f64,
    delta: f64,
) -> Result<TransferReport> {
    let f = in_domain(&in_domain(field, Group::V, Domain::Physical)?, Group::X, Domain::Physical)?;
    let mut flags = Vec::new();
    // The shifted average maps x-lattice modes onto v-frequencies t*xi; these
    // land on the v-lattice exactly when t Lv / Lx is an integer.
    let lx = f.grid.x[0].len;
    let lv = f.grid.v[0].len;
    let ratio = t * lv / lx;
    if (ratio - ratio.round()).abs() > 1e-12 || ratio.round() == 0.0 {
        flags.push(format!("transfer unresolvable: t Lv/Lx = {ratio} is not a positive integer"));
        return Ok(TransferReport { dyadic: None, low: None, flags });
    }
    let shifted_avg = average_velocity(&shift(&f, t)?)?;
    let dyadic = {
        let first_mode = 2.0 * std::f64::consts::PI / lv;
        if 0.51 * t * delta < first_mode {
            flags.push(format!(
                "transfer v-ring unresolvable: scale {} below first v-mode {}",
                t * delta,
                first_mode
            ));
            None
        } else {
            let lhs = block_multiply_x(cuts, &shifted_avg, Block::Dyadic(delta))?;
            let (fv, _) = cuts.block_project(&f, Group::V, Block::Dyadic(t * delta))?;
            let rhs = average_velocity(&shift(&fv, t)?)?;
            Some(rel_max_diff(&lhs, &rhs, lhs.max_abs().max(1e-300))?)
        }
    };
    let low = {
        let lhs = block_multiply_x(cuts, &shifted_avg, Block::Low)?;
        let (fv, _) = cuts.block_project(&f, Group::V, Block::Smooth(t))?;
        let rhs = average_velocity(&shift(&fv, t)?)?;
        Some(rel_max_diff(&lhs, &rhs, lhs.max_abs().max(1e-300))?)
    };
    Ok(TransferReport { dyadic, low, flags })
}

/// One integrability exponent of the dispersive decay check.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DispersiveRow {
    pub p: f64,
    pub slope: f64,
    pub predicted: f64,
    pub deviation: f64,
    /// Max over times of the decay-compensated ratio to the first time.
    pub constant: f64,
}

/// Fitted decay rates of || h(x - t v, v) ||_{Lp_x L1_v} in time.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DispersiveReport {
    pub rows: Vec<DispersiveRow>,
    /// Max relative deviation of the p = 1 norm from its initial value.
    pub conservation: Option<f64>,
}

/// Measure free-streaming decay: for p > 1 fit the slope of the mixed norm
/// against time (predicted -(dim)(1 - 1/p)); for p = 1 check exact
/// conservation. Rejects times large enough for the support to wrap around.
pub fn dispersive_decay_check(field: &Field, ps: &[f64], ts: &[f64]) -> Result<DispersiveReport> {
    let f = in_domain(&in_domain(field, Group::V, Domain::Physical)?, Group::X, Domain::Physical)?;
    if ts.len() < 3 || ts.iter().any(|&t| t <= 0.0) {
        return Err(Error::Parameter("dispersive check needs at least 3 positive times".into()));
    }
    let d = f.grid.dim() as f64;
    // Effective velocity support: columns holding more than 1e-13 of the mass.
    let cols = f.cols();
    let mut col_mass = vec![0.0f64; cols];
    for (idx, z) in f.data.iter().enumerate() {
        col_mass[idx % cols] += z.norm();
    }
    let total: f64 = col_mass.iter().sum();
    let vc = f.grid.coords(Group::V);
    let vmax = (0..cols)
        .filter(|&c| col_mass[c] > 1e-13 * total)
        .map(|c| {
            let iv = f.grid.unravel(Group::V, c);
            iv.iter()
                .enumerate()
                .map(|(a, &i)| vc[a][i] * vc[a][i])
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    let lx_min = f.grid.x.iter().filter(|a| a.n > 1).map(|a| a.len).fold(f64::INFINITY, f64::min);
    let tmax = ts.iter().cloned().fold(0.0, f64::max);
    if tmax * vmax > 0.5 * lx_min {
        return Err(Error::Parameter(format!(
            "dispersive check wraps around: t_max * v_support = {:.3} exceeds half the x-period {:.3}",
            tmax * vmax,
            0.5 * lx_min
        )));
    }
    let mut norms: Vec<Vec<f64>> = vec![Vec::new(); ps.len()];
    for &t in ts {
        let hs = shift(&f, t)?;
        for (ip, &p) in ps.iter().enumerate() {
            norms[ip].push(mixed_norm(&hs, p, 1.0, MixedOrder::XOuter)?);
        }
    }
    let mut rows = Vec::new();
    let mut conservation = None;
    for (ip, &p) in ps.iter().enumerate() {
        if (p - 1.0).abs() < 1e-14 {
            let n0 = norms[ip][0];
            let dev = norms[ip].iter().map(|&n| (n / n0 - 1.0).abs()).fold(0.0, f64::max);
            conservation = Some(dev);
            continue;
        }
        let lt: Vec<f64> = ts.iter().map(|&t| t.ln()).collect();
        let ln: Vec<f64> = norms[ip].iter().map(|&n| n.ln()).collect();
        let (slope, _, _) = least_squares(&lt, &ln);
        let rate = d * (1.0 - if p.is_infinite() { 0.0 } else { 1.0 / p });
        let n0 = norms[ip][0];
        let t0 = ts[0];
        let constant = ts
            .iter()
            .zip(&norms[ip])
            .map(|(&t, &n)| (n / n0) * (t / t0).powf(rate))
            .fold(0.0, f64::max);
        rows.push(DispersiveRow {
            p,
            slope,
            predicted: -rate,
            deviation: (slope + rate).abs(),
            constant,
        });
    }
    Ok(DispersiveReport { rows, conservation })
}
