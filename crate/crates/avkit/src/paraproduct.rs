//! Bony splitting of a velocity-variable product: two ordered paraproducts
//! pair each dyadic ring of one factor with the smoothing of the other three
//! octaves down, and the remainder keeps the near-diagonal interactions.
//!
//! The remainder is assembled as the algebraic complement of the ordered sums
//! inside the product of the two dyadic partitions — not as a catch-all
//! difference — so the reassembly check `tf_phi + tphi_f + remainder = f*phi`
//! genuinely exercises the telescoping of the cutoff family.

use crate::besov::{chemin_lerner_norm, ring_scales};
use crate::cutoffs::{Block, Coverage, Cutoffs};
use crate::spectral::{apply_multiplier, in_domain, sample_function, AxisSpec, Domain, Field, Grid, Group};
use crate::{Error, Result};
use rustfft::num_complex::Complex64;

/// The three parts of a velocity-variable product `f * phi`.
pub struct BonyParts {
    /// Rings of f against the smoothing of phi three octaves down.
    pub tf_phi: Field,
    /// Rings of phi against the smoothing of f three octaves down.
    pub tphi_f: Field,
    /// Near-diagonal interactions: everything the ordered parts leave out.
    pub remainder: Field,
    /// True when a clipped ring (support cut by the grid) entered the sums.
    pub truncated: bool,
}

/// Sample a velocity-only field on the velocity axes of a template grid.
pub fn velocity_field(template: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Result<Field> {
    let x: Vec<AxisSpec> = template.v.iter().map(|_| AxisSpec::trivial()).collect();
    let grid = Grid::new(x, template.v.clone(), template.chart)?;
    Ok(sample_function(&grid, |_, v| f(v)))
}

/// Smoothing scale paired with ring k: three octaves down.
fn lower_scale(k: i32) -> f64 {
    (2.0f64).powi(k - 3)
}

fn check_multiplier(f: &Field, phi: &Field) -> Result<()> {
    if phi.grid.nx_total() != 1 || phi.grid.v != f.grid.v || phi.grid.chart != f.grid.chart {
        return Err(Error::Parameter(
            "multiplier must be a velocity-only field on the target's velocity axes".into(),
        ));
    }
    Ok(())
}

fn physical(f: &Field) -> Result<Field> {
    in_domain(&in_domain(f, Group::X, Domain::Physical)?, Group::V, Domain::Physical)
}

/// One ordered term: ring k of f times the smoothing of phi three octaves
/// down. Defined for k >= 2, where the smoothing scale stays below the ring.
pub fn paraproduct_term(cuts: &Cutoffs, f: &Field, phi: &Field, k: i32) -> Result<Field> {
    check_multiplier(f, phi)?;
    if k < 2 {
        return Err(Error::Parameter(format!(
            "ordered terms start at ring 2, got {k}"
        )));
    }
    let fp = physical(f)?;
    let php = physical(phi)?;
    let (ring, _) = cuts.block_project(&fp, Group::V, Block::Dyadic((2.0f64).powi(k)))?;
    let (sm, _) = cuts.block_project(&php, Group::V, Block::Smooth(lower_scale(k)))?;
    Ok(ring.mul_v_profile(&sm.data))
}

/// Window of phi paired with block a of f in the remainder: everything not
/// already absorbed by either ordered sum. `full_lo` is the first ring of phi
/// the opposite paraproduct swallows whole; rings up to `kmax` exist on the
/// grid.
fn window_profile(
    cuts: &Cutoffs,
    php: &Field,
    a: i32,
    full_lo: i32,
    kmax: i32,
) -> Result<Vec<Complex64>> {
    let out = apply_multiplier(php, Group::V, |zeta: &[f64]| {
        let r = zeta.iter().map(|z| z * z).sum::<f64>().sqrt();
        let mut w = 1.0;
        if a >= 2 {
            w -= cuts.psi(r / lower_scale(a));
        }
        for j in full_lo..=kmax {
            w -= cuts.phi(r / (2.0f64).powi(j));
        }
        Complex64::new(w, 0.0)
    })?;
    Ok(out.data)
}

/// Split `f * phi` into the two ordered paraproducts and the near-diagonal
/// remainder. The sum of the three parts reassembles the pointwise product to
/// rounding accuracy regardless of where the grid truncates the ring family.
pub fn bony_decompose(cuts: &Cutoffs, f: &Field, phi: &Field) -> Result<BonyParts> {
    check_multiplier(f, phi)?;
    let ks = ring_scales(cuts, f, Group::V);
    let kmax = *ks.last().ok_or_else(|| {
        Error::Parameter("grid resolves no velocity rings; nothing to decompose".into())
    })?;
    let fp = physical(f)?;
    let php = physical(phi)?;

    let mut truncated = false;
    let mut project = |field: &Field, block: Block| -> Result<Field> {
        let (out, cov) = cuts.block_project(field, Group::V, block)?;
        if cov == Coverage::Clipped {
            truncated = true;
        }
        Ok(out)
    };

    // Ordered parts: rings 2..=kmax against the smoothing three octaves down.
    let mut tf = Field::zeros(&f.grid);
    let mut tp = Field::zeros(&f.grid);
    for k in 2..=kmax {
        let ring = Block::Dyadic((2.0f64).powi(k));
        let low = Block::Smooth(lower_scale(k));
        let fk = project(&fp, ring)?;
        let sphi = project(&php, low)?;
        tf = tf.add(&fk.mul_v_profile(&sphi.data));
        let phik = project(&php, ring)?;
        let sf = project(&fp, low)?;
        tp = tp.add(&sf.mul_v_profile(&phik.data));
    }

    // Remainder: each block of f times the complementary window of phi, minus
    // the near-edge terms the opposite paraproduct smooths only partially.
    // Block a of f meets the smoothing at scale 2^(j-3) in full once
    // j >= a + 5 (j >= 4 for the low block), not at all once j <= a + 2, and
    // partially at the two scales in between.
    let mut rem = Field::zeros(&f.grid);
    for a in -1..=kmax {
        let (fa, full_lo, partial) = if a < 0 {
            (project(&fp, Block::Low)?, 4, [2, 3])
        } else {
            let d = (2.0f64).powi(a);
            (project(&fp, Block::Dyadic(d))?, a + 5, [a + 3, a + 4])
        };
        let window = window_profile(cuts, &php, a, full_lo, kmax)?;
        rem = rem.add(&fa.mul_v_profile(&window));
        for j in partial {
            if j < 2 || j > kmax {
                continue;
            }
            let sfa = project(&fa, Block::Smooth(lower_scale(j)))?;
            let phij = project(&php, Block::Dyadic((2.0f64).powi(j)))?;
            rem = rem.sub(&sfa.mul_v_profile(&phij.data));
        }
    }

    Ok(BonyParts { tf_phi: tf, tphi_f: tp, remainder: rem, truncated })
}

/// Residuals of projecting ordered terms onto blocks they should not meet.
pub struct SupportReport {
    /// (j, residual) for the low-block projection of term j; should vanish.
    pub low: Vec<(i32, f64)>,
    /// (j, k, residual) for rings at least three octaves from j; should vanish.
    pub far: Vec<(i32, i32, f64)>,
    /// (j, k, residual) for rings within two octaves; generically order one.
    pub near: Vec<(i32, i32, f64)>,
}

impl SupportReport {
    pub fn low_max(&self) -> f64 {
        self.low.iter().map(|e| e.1).fold(0.0, f64::max)
    }

    pub fn far_max(&self) -> f64 {
        self.far.iter().map(|e| e.2).fold(0.0, f64::max)
    }

    pub fn near_max(&self) -> f64 {
        self.near.iter().map(|e| e.2).fold(0.0, f64::max)
    }
}

/// Where each ordered term lives in frequency: term j carries ring j of f
/// times a smoothing supported three octaves lower, so its spectrum stays in
/// an annulus around 2^j — it must vanish on the low block and on every ring
/// more than two octaves away. Terms whose spectral top would wrap past the
/// grid's Nyquist radius are excluded (the product would alias), as are terms
/// that are identically zero. Residuals are relative to the term's peak.
pub fn support_localization_check(
    cuts: &Cutoffs,
    f: &Field,
    phi: &Field,
) -> Result<SupportReport> {
    check_multiplier(f, phi)?;
    let ks = ring_scales(cuts, f, Group::V);
    let maxf = f.grid.v.iter().map(|a| a.max_freq()).fold(f64::INFINITY, f64::min);
    let mut report = SupportReport { low: Vec::new(), far: Vec::new(), near: Vec::new() };
    let mut any = false;
    for &j in &ks {
        if j < 2 {
            continue;
        }
        let (_, ring_hi) = cuts.support(Block::Dyadic((2.0f64).powi(j)));
        let (_, sm_hi) = cuts.support(Block::Smooth(lower_scale(j)));
        if ring_hi + sm_hi > maxf {
            continue;
        }
        let term = paraproduct_term(cuts, f, phi, j)?;
        let scale = term.max_abs();
        if scale == 0.0 {
            continue;
        }
        any = true;
        let (low, _) = cuts.block_project(&term, Group::V, Block::Low)?;
        report.low.push((j, low.max_abs() / scale));
        for &k in &ks {
            let (proj, _) = cuts.block_project(&term, Group::V, Block::Dyadic((2.0f64).powi(k)))?;
            let res = proj.max_abs() / scale;
            if (j - k).abs() >= 3 {
                report.far.push((j, k, res));
            } else {
                report.near.push((j, k, res));
            }
        }
    }
    if !any {
        return Err(Error::Numeric(
            "every alias-free ordered term vanished; nothing to check".into(),
        ));
    }
    Ok(report)
}

/// Ratio of product norm to factor norm in the mixed velocity space: for each
/// field with a nonzero norm, ||f * phi|| / ||f|| with both sides measured in
/// the integrated-in-x Besov norm with indices (r, s, p, q). Zero-norm fields
/// are skipped.
pub fn product_estimate_check(
    cuts: &Cutoffs,
    fields: &[Field],
    phi: &Field,
    r: f64,
    s: f64,
    p: f64,
    q: f64,
) -> Result<Vec<f64>> {
    let mut ratios = Vec::new();
    for f in fields {
        check_multiplier(f, phi)?;
        let (nf, _) = chemin_lerner_norm(cuts, f, r, s, p, q)?;
        if nf == 0.0 {
            continue;
        }
        let fp = physical(f)?;
        let php = physical(phi)?;
        let prod = fp.mul_v_profile(&php.data);
        let (np, _) = chemin_lerner_norm(cuts, &prod, r, s, p, q)?;
        ratios.push(np / nf);
    }
    Ok(ratios)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{synthesize_besov_field, SynthSpec};
    use crate::spectral::Chart;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cuts() -> Cutoffs {
        Cutoffs::default_width()
    }

    fn test_field(nx: usize, nv: usize, seed: u64) -> Field {
        let g = Grid::rect_1d(nx, 2.0 * PI, nv, 2.0 * PI, Chart::Literal).unwrap();
        let spec = SynthSpec { a_x: 0.3, alpha_v: 0.5, amplitude: 1.0, seed };
        synthesize_besov_field(&g, &cuts(), &spec).unwrap()
    }

    fn gaussian_multiplier(f: &Field) -> Field {
        velocity_field(&f.grid, |v| {
            let d = v[0] - PI;
            Complex64::new((-d * d / 0.8).exp(), 0.0)
        })
        .unwrap()
    }

    fn reassembly_residual(c: &Cutoffs, f: &Field, phi: &Field) -> f64 {
        let parts = bony_decompose(c, f, phi).unwrap();
        let fp = physical(f).unwrap();
        let php = physical(phi).unwrap();
        let direct = fp.mul_v_profile(&php.data);
        let sum = parts.tf_phi.add(&parts.tphi_f).add(&parts.remainder);
        sum.sub(&direct).max_abs() / direct.max_abs()
    }

    #[test]
    fn three_parts_reassemble_the_product() {
        let c = cuts();
        let f = test_field(32, 256, 31);
        let phi = gaussian_multiplier(&f);
        assert!(physical(&f).unwrap().mul_v_profile(&physical(&phi).unwrap().data).max_abs() > 0.0);
        let res = reassembly_residual(&c, &f, &phi);
        assert!(res <= 1e-10, "reassembly residual {res:.3e}");
    }

    #[test]
    fn constant_multiplier_collapses_to_the_smoothed_part() {
        let c = cuts();
        let f = test_field(32, 256, 7);
        let one = velocity_field(&f.grid, |_| Complex64::new(1.0, 0.0)).unwrap();
        let parts = bony_decompose(&c, &f, &one).unwrap();
        let fmax = f.max_abs();
        // A constant has no ring content, so the phi-ring paraproduct dies and
        // the other two parts rebuild f.
        assert!(parts.tphi_f.max_abs() <= 1e-10 * fmax);
        let rebuilt = parts.tf_phi.add(&parts.remainder);
        let res = rebuilt.sub(&physical(&f).unwrap()).max_abs() / fmax;
        assert!(res <= 1e-10, "f residual {res:.3e}");
    }

    #[test]
    fn zero_field_decomposes_to_zero() {
        let c = cuts();
        let g = Grid::rect_1d(4, 2.0 * PI, 128, 2.0 * PI, Chart::Literal).unwrap();
        let f = Field::zeros(&g);
        let phi = gaussian_multiplier(&f);
        let parts = bony_decompose(&c, &f, &phi).unwrap();
        assert_eq!(parts.tf_phi.max_abs(), 0.0);
        assert_eq!(parts.tphi_f.max_abs(), 0.0);
        assert_eq!(parts.remainder.max_abs(), 0.0);
    }

    #[test]
    fn ordered_terms_live_two_octaves_from_their_ring() {
        let c = cuts();
        let f = test_field(32, 512, 5);
        let phi = gaussian_multiplier(&f);
        let rep = support_localization_check(&c, &f, &phi).unwrap();
        assert!(rep.low_max() <= 1e-10, "low residual {:.3e}", rep.low_max());
        assert!(rep.far_max() <= 1e-10, "far residual {:.3e}", rep.far_max());
        let find = |list: &[(i32, i32, f64)], j: i32, k: i32| {
            list.iter().find(|e| e.0 == j && e.1 == k).map(|e| e.2)
        };
        // Term 4 misses the bottom and top rings but loads its own ring.
        assert!(find(&rep.far, 4, 0).unwrap() <= 1e-10);
        assert!(find(&rep.far, 4, 8).unwrap() <= 1e-10);
        assert!(find(&rep.near, 4, 4).unwrap() > 1e-2);
    }

    #[test]
    fn product_ratio_is_one_for_the_unit_multiplier() {
        let c = cuts();
        let fields: Vec<Field> = (0..3).map(|s| test_field(32, 256, 40 + s)).collect();
        let one = velocity_field(&fields[0].grid, |_| Complex64::new(1.0, 0.0)).unwrap();
        let ratios = product_estimate_check(&c, &fields, &one, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(ratios.len(), 3);
        for r in ratios {
            assert!((0.25..=4.0).contains(&r), "unit ratio {r}");
        }
    }

    #[test]
    fn gaussian_multiplier_ratios_stay_bounded() {
        let c = cuts();
        let fields: Vec<Field> = (0..5).map(|s| test_field(32, 256, 60 + s)).collect();
        let phi = gaussian_multiplier(&fields[0]);
        for s in [-1.0, 0.0, 1.0] {
            let ratios = product_estimate_check(&c, &fields, &phi, 1.0, s, 1.0, 1.0).unwrap();
            assert_eq!(ratios.len(), 5);
            for r in &ratios {
                assert!(*r > 0.0 && *r <= 1e2, "ratio {r} at smoothness {s}");
            }
        }
    }

    #[test]
    fn doubling_the_field_leaves_the_ratio_fixed() {
        let c = cuts();
        let f = test_field(32, 256, 77);
        let phi = gaussian_multiplier(&f);
        let r1 = product_estimate_check(&c, std::slice::from_ref(&f), &phi, 1.0, 0.5, 1.0, 1.0)
            .unwrap()[0];
        let doubled = f.scale(Complex64::new(2.0, 0.0));
        let r2 = product_estimate_check(&c, &[doubled], &phi, 1.0, 0.5, 1.0, 1.0).unwrap()[0];
        assert!((r1 - r2).abs() <= 1e-12 * r1, "{r1} vs {r2}");
    }

    #[test]
    fn rejects_misshapen_multipliers_and_low_rings() {
        let c = cuts();
        let f = test_field(32, 128, 1);
        let phi = gaussian_multiplier(&f);
        assert!(paraproduct_term(&c, &f, &phi, 1).is_err());
        // phi must live on f's velocity axes, not on f's own grid.
        assert!(bony_decompose(&c, &f, &f).is_err());
        let short = Grid::rect_1d(4, 2.0 * PI, 64, 2.0 * PI, Chart::Literal).unwrap();
        let wrong = velocity_field(&short, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(bony_decompose(&c, &f, &wrong).is_err());
        // A trivial velocity axis resolves no rings at all.
        let flat = Grid::rect_1d(64, 2.0 * PI, 1, 1.0, Chart::Literal).unwrap();
        let g = sample_function(&flat, |x, _| Complex64::new(x[0].cos(), 0.0));
        let pflat = velocity_field(&flat, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(bony_decompose(&c, &g, &pflat).is_err());
    }

    #[test]
    fn multiplier_side_is_additive() {
        let c = cuts();
        let f = test_field(32, 256, 9);
        let phi1 = gaussian_multiplier(&f);
        let phi2 = velocity_field(&f.grid, |v| Complex64::new((0.5 * v[0]).cos(), 0.0)).unwrap();
        let both = phi1.add(&phi2);
        let pa = bony_decompose(&c, &f, &phi1).unwrap();
        let pb = bony_decompose(&c, &f, &phi2).unwrap();
        let pc = bony_decompose(&c, &f, &both).unwrap();
        let scale = f.max_abs();
        for (lhs, a, b) in [
            (&pc.tf_phi, &pa.tf_phi, &pb.tf_phi),
            (&pc.tphi_f, &pa.tphi_f, &pb.tphi_f),
            (&pc.remainder, &pa.remainder, &pb.remainder),
        ] {
            let diff = lhs.sub(&a.add(b)).max_abs();
            assert!(diff <= 1e-11 * scale, "additivity defect {diff:.3e}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        /// Each part is linear in f: parts(f1 + c f2) = parts(f1) + c parts(f2).
        #[test]
        fn decomposition_is_linear_in_the_field(seed in 0u64..100, c_num in 1u32..8) {
            let c = cuts();
            let f1 = test_field(32, 128, seed);
            let f2 = test_field(32, 128, seed + 1000);
            let phi = gaussian_multiplier(&f1);
            let w = Complex64::new(c_num as f64 / 4.0, 0.0);
            let combo = f1.add(&f2.scale(w));
            let pa = bony_decompose(&c, &f1, &phi).unwrap();
            let pb = bony_decompose(&c, &f2, &phi).unwrap();
            let pc = bony_decompose(&c, &combo, &phi).unwrap();
            let scale = f1.max_abs() + f2.max_abs();
            for (lhs, a, b) in [
                (&pc.tf_phi, &pa.tf_phi, &pb.tf_phi),
                (&pc.tphi_f, &pa.tphi_f, &pb.tphi_f),
                (&pc.remainder, &pa.remainder, &pb.remainder),
            ] {
                let diff = lhs.sub(&a.add(&b.scale(w))).max_abs();
                prop_assert!(diff <= 1e-11 * scale, "linearity defect {:.3e}", diff);
            }
        }

        /// Summing the ordered terms in any order gives the same paraproduct.
        #[test]
        fn term_sum_is_order_independent(seed in 0u64..100) {
            let c = cuts();
            let f = test_field(32, 128, seed);
            let phi = gaussian_multiplier(&f);
            let kmax = *ring_scales(&c, &f, Group::V).last().unwrap();
            let terms: Vec<Field> =
                (2..=kmax).map(|k| paraproduct_term(&c, &f, &phi, k).unwrap()).collect();
            let mut fwd = Field::zeros(&f.grid);
            for t in &terms {
                fwd = fwd.add(t);
            }
            let mut rev = Field::zeros(&f.grid);
            for t in terms.iter().rev() {
                rev = rev.add(t);
            }
            let parts = bony_decompose(&c, &f, &phi).unwrap();
            let scale = fwd.max_abs().max(1e-300);
            prop_assert!(fwd.sub(&rev).max_abs() <= 1e-12 * scale);
            prop_assert!(fwd.sub(&parts.tf_phi).max_abs() <= 1e-11 * scale);
        }
    }
}
