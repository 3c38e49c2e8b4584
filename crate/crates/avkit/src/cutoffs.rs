//! Smooth radial cutoffs, the dyadic partition of unity, and block projections.
//!
//! The low-pass profile `psi` is a mollified indicator of {r <= 3/4}: the bump
//! kernel exp(-1/(1-y^2)) integrated from (r - 3/4)/w to 1 and normalized, so
//! psi == 1 for r <= 3/4 - w and == 0 for r >= 3/4 + w. The ring profile is
//! phi(r) = psi(r/2) - psi(r), giving the exact telescoping
//! psi(r) + sum_{k<K} phi(r/2^k) = psi(r/2^K).

use crate::quad::composite_gl;
use crate::spectral::{AxisSpec, Field, Group};
use crate::{Error, Result};
use rustfft::num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Smooth compactly supported bump on (-1, 1).
pub fn bump(y: f64) -> f64 {
    if y.abs() < 1.0 {
        (-1.0 / (1.0 - y * y)).exp()
    } else {
        0.0
    }
}

/// Smooth descending ramp: 1 for t <= 0, 0 for t >= 1.
pub fn ramp(t: f64) -> f64 {
    fn b(s: f64) -> f64 {
        if s > 0.0 {
            (-1.0 / s).exp()
        } else {
            0.0
        }
    }
    let (hi, lo) = (b(1.0 - t), b(t));
    if hi == 0.0 {
        0.0
    } else {
        hi / (hi + lo)
    }
}

/// One frequency block on a radial scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Block {
    /// Low block: psi(r).
    Low,
    /// Smooth low-pass at scale delta: psi(r/delta).
    Smooth(f64),
    /// Dyadic ring at scale delta: phi(r/delta).
    Dyadic(f64),
    /// Band between scales: psi(r/(2*d2)) - psi(r/d1).
    Band(f64, f64),
}

/// How much of a block's support the grid resolves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Coverage {
    /// Support fully below the grid's top frequency.
    Full,
    /// Support partially above the top frequency: the block is truncated.
    Clipped,
    /// Support entirely above the top frequency: the block is zero on this grid.
    Vanishing,
}

type CacheKey = (Vec<(usize, u64)>, u8, u64, u64);

/// The global cutoff family at a fixed mollification width.
pub struct Cutoffs {
    pub w: f64,
    z: f64,
    cache: Mutex<HashMap<CacheKey, Arc<Vec<f64>>>>,
}

impl Cutoffs {
    /// Build the family; requires 0 < w < 1/4 (adjacent-only ring overlap).
    pub fn new(w: f64) -> Result<Self> {
        if !(w > 0.0 && w < 0.25) {
            return Err(Error::Parameter(format!(
                "cutoff width must satisfy 0 < w < 1/4, got {w}"
            )));
        }
        let z = composite_gl(bump, -1.0, 1.0, 16, 24);
        Ok(Cutoffs { w, z, cache: Mutex::new(HashMap::new()) })
    }

    /// Default width used by every shipped suite.
    pub fn default_width() -> Self {
        Cutoffs::new(0.24).expect("0.24 < 1/4")
    }

    /// Low-pass profile value at radius r (r < 0 treated by |r|).
    pub fn psi(&self, r: f64) -> f64 {
        let r = r.abs();
        let u = (r - 0.75) / self.w;
        if u <= -1.0 {
            1.0
        } else if u >= 1.0 {
            0.0
        } else {
            composite_gl(bump, u, 1.0, 16, 24) / self.z
        }
    }

    /// Ring profile phi(r) = psi(r/2) - psi(r).
    pub fn phi(&self, r: f64) -> f64 {
        self.psi(r / 2.0) - self.psi(r)
    }

    /// Symbol of a block at radius r.
    pub fn sym(&self, block: Block, r: f64) -> f64 {
        match block {
            Block::Low => self.psi(r),
            Block::Smooth(d) => self.psi(r / d),
            Block::Dyadic(d) => self.phi(r / d),
            Block::Band(d1, d2) => self.psi(r / (2.0 * d2)) - self.psi(r / d1),
        }
    }

    /// Radial support [lo, hi] of a block's symbol.
    pub fn support(&self, block: Block) -> (f64, f64) {
        let (plat, edge) = (0.75 - self.w, 0.75 + self.w);
        match block {
            Block::Low => (0.0, edge),
            Block::Smooth(d) => (0.0, edge * d),
            Block::Dyadic(d) => (plat * d, edge * 2.0 * d),
            Block::Band(d1, d2) => (plat * d1, edge * 2.0 * d2),
        }
    }

    /// Coverage of a block on a group of axes (corner radius of the lattice).
    pub fn coverage(&self, axes: &[AxisSpec], block: Block) -> Coverage {
        let rmax = axes.iter().map(|a| a.max_freq().powi(2)).sum::<f64>().sqrt();
        let (lo, hi) = self.support(block);
        if lo > rmax {
            Coverage::Vanishing
        } else if hi > rmax {
            Coverage::Clipped
        } else {
            Coverage::Full
        }
    }

    /// Cached radial symbol table over a group's frequency lattice, indexed by
    /// the flat group index.
    pub fn symbol_table(&self, axes: &[AxisSpec], block: Block) -> Arc<Vec<f64>> {
        let (tag, b1, b2): (u8, f64, f64) = match block {
            Block::Low => (0, 0.0, 0.0),
            Block::Smooth(d) => (1, d, 0.0),
            Block::Dyadic(d) => (2, d, 0.0),
            Block::Band(d1, d2) => (3, d1, d2),
        };
        let key: CacheKey = (
            axes.iter().map(|a| (a.n, a.len.to_bits())).collect(),
            tag,
            b1.to_bits(),
            b2.to_bits(),
        );
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let freqs: Vec<Vec<f64>> = axes.iter().map(|a| a.freqs()).collect();
        let total: usize = axes.iter().map(|a| a.n).product();
        let mut table = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut r2 = 0.0;
            for a in (0..axes.len()).rev() {
                let i = rem % axes[a].n;
                rem /= axes[a].n;
                r2 += freqs[a][i] * freqs[a][i];
            }
            table.push(self.sym(block, r2.sqrt()));
        }
        let arc = Arc::new(table);
        self.cache.lock().unwrap().insert(key, arc.clone());
        arc
    }

    /// Project a field onto a block of one group, restoring the group's domain.
    /// A vanishing block returns the zero field with its flag.
    pub fn block_project(&self, field: &Field, group: Group, block: Block) -> Result<(Field, Coverage)> {
        let axes = field.grid.axes(group);
        let cov = self.coverage(axes, block);
        if cov == Coverage::Vanishing {
            let mut zero = field.clone();
            for z in &mut zero.data {
                *z = Complex64::new(0.0, 0.0);
            }
            return Ok((zero, cov));
        }
        let table = self.symbol_table(axes, block);
        let orig = field.domain(group);
        let mut hat = crate::spectral::in_domain(field, group, crate::spectral::Domain::Frequency)?;
        let ctab: Vec<Complex64> = table.iter().map(|&m| Complex64::new(m, 0.0)).collect();
        crate::spectral::multiply_group_table(&mut hat, group, &ctab);
        let out = if orig == crate::spectral::Domain::Physical {
            crate::spectral::transform(&hat, group, false)?
        } else {
            hat
        };
        Ok((out, cov))
    }

    /// Bernstein ratio ||Delta_{2^k} f||_p / (2^{k D (1/r - 1/p)} ||Delta_{2^k} f||_r).
    /// Requires p >= r; bounded uniformly in k for resolved blocks.
    pub fn bernstein_check(&self, field: &Field, k: u32, r: f64, p: f64) -> Result<f64> {
        if p < r {
            return Err(Error::Parameter(format!(
                "Bernstein check needs p >= r, got r={r} p={p}"
            )));
        }
        let d = (2.0f64).powi(k as i32);
        let (blk, _) = self.block_project(field, Group::X, Block::Dyadic(d))?;
        let dim = field.grid.dim() as f64;
        let ir = if r.is_infinite() { 0.0 } else { 1.0 / r };
        let ip = if p.is_infinite() { 0.0 } else { 1.0 / p };
        let num = crate::spectral::lebesgue_norm(&blk, p, None)?;
        let den = crate::spectral::lebesgue_norm(&blk, r, None)?;
        if den == 0.0 {
            return Err(Error::Numeric("Bernstein ratio undefined: block content is zero".into()));
        }
        Ok(num / (d.powf(dim * (ir - ip)) * den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{sample_xv, Chart, Grid};
    use approx::assert_relative_eq;

    fn cuts() -> Cutoffs {
        Cutoffs::default_width()
    }

    #[test]
    fn width_precondition() {
        assert!(Cutoffs::new(0.25).is_err());
        assert!(Cutoffs::new(0.0).is_err());
        assert!(Cutoffs::new(-0.1).is_err());
        assert!(Cutoffs::new(0.1).is_ok());
    }

    #[test]
    fn bump_normalizer_golden() {
        let c = cuts();
        assert_relative_eq!(c.z, 0.443993816168079, epsilon = 1e-12);
    }

    #[test]
    fn psi_golden_values() {
        let c = cuts();
        assert_eq!(c.psi(0.51), 1.0);
        assert_relative_eq!(c.psi(0.6), 0.941957694819860, epsilon = 1e-12);
        assert_relative_eq!(c.psi(0.75), 0.5, epsilon = 1e-13);
        assert_relative_eq!(c.psi(0.9), 0.058042305180140, epsilon = 1e-12);
        assert_eq!(c.psi(0.99), 0.0);
        assert_eq!(c.psi(1.5), 0.0);
        // Mollified-indicator symmetry around 3/4.
        assert_relative_eq!(c.psi(0.6) + c.psi(0.9), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn rings_partition_unity() {
        let c = cuts();
        for i in 0..2000 {
            let r = 40.0 * i as f64 / 2000.0;
            let mut total = c.psi(r);
            let mut sq = c.psi(r).powi(2);
            for k in 0..12 {
                let ph = c.phi(r / (2.0f64).powi(k));
                total += ph;
                sq += ph * ph;
            }
            assert!((total - 1.0).abs() < 1e-12, "partition defect at r={r}");
            assert!((0.5 - 1e-9..=1.0 + 1e-9).contains(&sq), "sum of squares {sq} at r={r}");
        }
        // One dyadic scale covering 1.5 contributes everything psi misses.
        let s: f64 = (0..12).map(|k| c.phi(1.5 / (2.0f64).powi(k))).sum();
        assert_relative_eq!(s, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn telescoping_to_smooth_cutoff() {
        let c = cuts();
        for i in 0..500 {
            let r = 100.0 * i as f64 / 500.0;
            let mut acc = c.psi(r);
            for k in 0..6 {
                acc += c.phi(r / (2.0f64).powi(k));
            }
            let want = c.psi(r / 64.0);
            assert!((acc - want).abs() < 1e-13, "telescoping defect at r={r}");
        }
    }

    #[test]
    fn ring_is_difference_of_lowpass() {
        let c = cuts();
        for i in 0..10_000 {
            let r = 25.0 * i as f64 / 10_000.0;
            assert!((c.phi(r) - (c.psi(r / 2.0) - c.psi(r))).abs() < 1e-14);
        }
    }

    #[test]
    fn disjoint_rings_annihilate() {
        let c = cuts();
        for i in 0..2000 {
            let r = 60.0 * i as f64 / 2000.0;
            let prod = c.sym(Block::Dyadic(2.0), r) * c.sym(Block::Dyadic(8.0), r);
            assert_eq!(prod, 0.0, "rings at scale gap 4 overlap at r={r}");
        }
    }

    #[test]
    fn band_absorbs_its_ring() {
        let c = cuts();
        let d = 4.0;
        for i in 0..4000 {
            let r = 40.0 * i as f64 / 4000.0;
            let ring = c.sym(Block::Dyadic(d), r);
            let band = c.sym(Block::Band(d / 2.0, 2.0 * d), r);
            assert!((band * ring - ring).abs() < 1e-14, "band not flat on ring at r={r}");
        }
    }

    #[test]
    fn smooth2_absorbs_low() {
        let c = cuts();
        for i in 0..2000 {
            let r = 4.0 * i as f64 / 2000.0;
            let low = c.sym(Block::Low, r);
            let s2 = c.sym(Block::Smooth(2.0), r);
            assert!((s2 * low - low).abs() < 1e-14);
        }
    }

    #[test]
    fn ring_projection_is_not_idempotent() {
        // phi^2 != phi on the taper: projections onto overlapping smooth rings
        // deliberately fail idempotence.
        let c = cuts();
        let worst = (0..2000)
            .map(|i| {
                let r = 4.0 * i as f64 / 2000.0;
                let m = c.phi(r);
                (m * m - m).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst > 0.1, "expected a visible idempotence defect, got {worst}");
    }

    #[test]
    fn block_projection_field_identities() {
        let c = cuts();
        let g = Grid::square_1d(64, 2.0 * std::f64::consts::PI, Chart::Literal).unwrap();
        let mut rng = crate::rng::stream(3, 50, 0, 0);
        let data = crate::rng::complex_normals(&mut rng, 64 * 64);
        let f = crate::spectral::Field::new(
            g,
            crate::spectral::Domain::Physical,
            crate::spectral::Domain::Physical,
            data,
        )
        .unwrap();
        let d = 4.0;
        let (ring, cov) = c.block_project(&f, Group::X, Block::Dyadic(d)).unwrap();
        assert_eq!(cov, Coverage::Full);
        let (band_of_ring, _) = c.block_project(&ring, Group::X, Block::Band(d / 2.0, 2.0 * d)).unwrap();
        assert!(band_of_ring.sub(&ring).max_abs() < 1e-12 * f.max_abs());
        let (low, _) = c.block_project(&f, Group::X, Block::Low).unwrap();
        let (s2_of_low, _) = c.block_project(&low, Group::X, Block::Smooth(2.0)).unwrap();
        assert!(s2_of_low.sub(&low).max_abs() < 1e-12 * f.max_abs());
        let (far, _) = c.block_project(&ring, Group::X, Block::Dyadic(4.0 * d)).unwrap();
        assert!(far.max_abs() < 1e-13 * f.max_abs());
    }

    #[test]
    fn above_nyquist_block_vanishes_with_flag() {
        let c = cuts();
        let g = Grid::square_1d(16, 2.0 * std::f64::consts::PI, Chart::Literal).unwrap();
        let f = sample_xv(&g, |x, _| Complex64::new(x.cos(), 0.0));
        // Top frequency is 8; a ring at scale 64 starts at 32.6.
        let (z, cov) = c.block_project(&f, Group::X, Block::Dyadic(64.0)).unwrap();
        assert_eq!(cov, Coverage::Vanishing);
        assert_eq!(z.max_abs(), 0.0);
        let (_, cov2) = c.block_project(&f, Group::X, Block::Dyadic(8.0)).unwrap();
        assert_eq!(cov2, Coverage::Clipped);
    }

    #[test]
    fn bernstein_rejects_p_below_r() {
        let c = cuts();
        let g = Grid::rect_1d(64, 2.0 * std::f64::consts::PI, 1, 1.0, Chart::Literal).unwrap();
        let f = sample_xv(&g, |x, _| Complex64::new((8.0 * x).cos(), 0.0));
        assert!(matches!(c.bernstein_check(&f, 3, 2.0, 1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn bernstein_equal_exponents_is_unity() {
        let c = cuts();
        let g = Grid::rect_1d(256, 2.0 * std::f64::consts::PI, 1, 1.0, Chart::Literal).unwrap();
        let mut rng = crate::rng::stream(9, 51, 0, 0);
        let coefs = crate::rng::complex_normals(&mut rng, 256);
        let f = crate::spectral::Field::new(
            g.clone(),
            crate::spectral::Domain::Frequency,
            crate::spectral::Domain::Physical,
            coefs,
        )
        .unwrap();
        let f = crate::spectral::transform(&f, Group::X, false).unwrap();
        for k in [3u32, 4, 5] {
            let ratio = c.bernstein_check(&f, k, 2.0, 2.0).unwrap();
            assert_relative_eq!(ratio, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bernstein_plane_wave_closed_form() {
        // Single mode at |xi| = 2^k: ratio for (r, p) = (1, inf) is 2^{-k}/L
        // on the periodic lattice; bounded uniformly in k (and decaying).
        let c = cuts();
        let l = 2.0 * std::f64::consts::PI;
        let g = Grid::rect_1d(256, l, 1, 1.0, Chart::Literal).unwrap();
        for k in [3u32, 4, 5] {
            let om = (2.0f64).powi(k as i32);
            let f = sample_xv(&g, |x, _| Complex64::from_polar(1.0, om * x));
            let ratio = c.bernstein_check(&f, k, 1.0, f64::INFINITY).unwrap();
            let want = (2.0f64).powi(-(k as i32)) / l;
            assert_relative_eq!(ratio, want, max_relative = 1e-10);
            assert!(ratio <= 1.0);
        }
    }
}
