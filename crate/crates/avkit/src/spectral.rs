//! Periodic grids, sampled fields, FFT-backed transforms, multipliers, and
//! Lebesgue/mixed norms.
//!
//! A field lives on the product of an x-group and a v-group of axes (one or two
//! axes each). Data is stored flat and row-major: rows enumerate the x-group,
//! columns the v-group. Transform weights follow the continuum convention
//! `fhat(xi) = sum f(x) e^{-i xi x} dx` per axis (forward weight L/N), inverse
//! weight 1/L per axis, so transforms approximate the integral operators and
//! round-trip exactly.

use crate::{Error, Result};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Velocity coordinate layout: sample points of the periodic v-axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Chart {
    /// v_j = j dv in [0, L).
    Literal,
    /// v_j = j dv - L (j >= n/2), in [-L/2, L/2); two-sided around 0.
    Signed,
}

/// One periodic axis: n equispaced samples over a period of length `len`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisSpec {
    pub n: usize,
    pub len: f64,
}

impl AxisSpec {
    pub fn new(n: usize, len: f64) -> Result<Self> {
        if n == 0 || (n > 1 && n % 2 != 0) {
            return Err(Error::Parameter(format!("axis sample count must be even, got {n}")));
        }
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::Parameter(format!("axis length must be positive, got {len}")));
        }
        Ok(AxisSpec { n, len })
    }

    /// A trivial single-sample axis of unit length (measure weight 1).
    pub fn trivial() -> Self {
        AxisSpec { n: 1, len: 1.0 }
    }

    pub fn step(&self) -> f64 {
        self.len / self.n as f64
    }

    /// Angular frequencies in FFT storage order: (2 pi / len) * [0, 1, .., -n/2, .., -1].
    pub fn freqs(&self) -> Vec<f64> {
        let base = 2.0 * std::f64::consts::PI / self.len;
        (0..self.n)
            .map(|m| {
                let m = if m < self.n.div_ceil(2) { m as isize } else { m as isize - self.n as isize };
                base * m as f64
            })
            .collect()
    }

    /// Sample coordinates under the given chart.
    pub fn coords(&self, chart: Chart) -> Vec<f64> {
        let d = self.step();
        (0..self.n)
            .map(|j| match chart {
                Chart::Literal => j as f64 * d,
                Chart::Signed => {
                    if j >= self.n / 2 && self.n > 1 {
                        j as f64 * d - self.len
                    } else {
                        j as f64 * d
                    }
                }
            })
            .collect()
    }

    /// Largest frequency magnitude representable on the axis.
    pub fn max_freq(&self) -> f64 {
        if self.n == 1 {
            0.0
        } else {
            (self.n as f64 / 2.0) * 2.0 * std::f64::consts::PI / self.len
        }
    }
}

/// Which axis group an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    X,
    V,
}

/// Whether a group currently holds physical samples or Fourier coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Physical,
    Frequency,
}

/// Product grid: x-axes times v-axes, with x always on the literal chart and
/// v on the grid's chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub x: Vec<AxisSpec>,
    pub v: Vec<AxisSpec>,
    pub chart: Chart,
}

impl Grid {
    pub fn new(x: Vec<AxisSpec>, v: Vec<AxisSpec>, chart: Chart) -> Result<Self> {
        if x.is_empty() || x.len() > 2 {
            return Err(Error::Parameter(format!(
                "x-group must have 1 or 2 axes, got {}",
                x.len()
            )));
        }
        if v.len() != x.len() {
            return Err(Error::Parameter(format!(
                "x-group and v-group must have the same dimension, got {} and {}",
                x.len(),
                v.len()
            )));
        }
        Ok(Grid { x, v, chart })
    }

    /// 1-D phase space, same n and length on both axes.
    pub fn square_1d(n: usize, len: f64, chart: Chart) -> Result<Self> {
        let a = AxisSpec::new(n, len)?;
        Grid::new(vec![a], vec![a], chart)
    }

    /// 1-D phase space with independent axis resolutions.
    pub fn rect_1d(nx: usize, lx: f64, nv: usize, lv: f64, chart: Chart) -> Result<Self> {
        Grid::new(vec![AxisSpec::new(nx, lx)?], vec![AxisSpec::new(nv, lv)?], chart)
    }

    /// Pure 2-D velocity space (trivial x-axes), for radial-block norms.
    pub fn vspace_2d(n: usize, len: f64, chart: Chart) -> Result<Self> {
        let a = AxisSpec::new(n, len)?;
        Grid::new(vec![AxisSpec::trivial(), AxisSpec::trivial()], vec![a, a], chart)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn nx_total(&self) -> usize {
        self.x.iter().map(|a| a.n).product()
    }

    pub fn nv_total(&self) -> usize {
        self.v.iter().map(|a| a.n).product()
    }

    /// Cell measure of the x-group (product of steps).
    pub fn x_cell(&self) -> f64 {
        self.x.iter().map(|a| a.step()).product()
    }

    pub fn v_cell(&self) -> f64 {
        self.v.iter().map(|a| a.step()).product()
    }

    pub fn axes(&self, group: Group) -> &[AxisSpec] {
        match group {
            Group::X => &self.x,
            Group::V => &self.v,
        }
    }

    /// Physical coordinates per axis of a group (x: literal; v: grid chart).
    pub fn coords(&self, group: Group) -> Vec<Vec<f64>> {
        match group {
            Group::X => self.x.iter().map(|a| a.coords(Chart::Literal)).collect(),
            Group::V => self.v.iter().map(|a| a.coords(self.chart)).collect(),
        }
    }

    /// Frequency tables per axis of a group.
    pub fn freqs(&self, group: Group) -> Vec<Vec<f64>> {
        self.axes(group).iter().map(|a| a.freqs()).collect()
    }

    /// Decompose a flat group index into per-axis indices (row-major).
    pub fn unravel(&self, group: Group, mut flat: usize) -> Vec<usize> {
        let axes = self.axes(group);
        let mut idx = vec![0usize; axes.len()];
        for a in (0..axes.len()).rev() {
            idx[a] = flat % axes[a].n;
            flat /= axes[a].n;
        }
        idx
    }
}

/// A complex-valued field on a grid, tracking the domain of each group.
#[derive(Clone, Debug)]
pub struct Field {
    pub grid: Grid,
    pub x_dom: Domain,
    pub v_dom: Domain,
    pub data: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Grid, x_dom: Domain, v_dom: Domain, data: Vec<Complex64>) -> Result<Self> {
        let want = grid.nx_total() * grid.nv_total();
        if data.len() != want {
            return Err(Error::Parameter(format!(
                "field data length {} does not match grid size {}",
                data.len(),
                want
            )));
        }
        Ok(Field { grid, x_dom, v_dom, data })
    }

    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.nx_total() * grid.nv_total();
        Field {
            grid: grid.clone(),
            x_dom: Domain::Physical,
            v_dom: Domain::Physical,
            data: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn rows(&self) -> usize {
        self.grid.nx_total()
    }

    pub fn cols(&self) -> usize {
        self.grid.nv_total()
    }

    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols() + col]
    }

    pub fn domain(&self, group: Group) -> Domain {
        match group {
            Group::X => self.x_dom,
            Group::V => self.v_dom,
        }
    }

    fn set_domain(&mut self, group: Group, d: Domain) {
        match group {
            Group::X => self.x_dom = d,
            Group::V => self.v_dom = d,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Field {
        let mut out = self.clone();
        for z in &mut out.data {
            *z *= c;
        }
        out
    }

    pub fn add(&self, other: &Field) -> Field {
        assert_eq!(self.data.len(), other.data.len());
        let mut out = self.clone();
        for (z, w) in out.data.iter_mut().zip(&other.data) {
            *z += w;
        }
        out
    }

    pub fn sub(&self, other: &Field) -> Field {
        assert_eq!(self.data.len(), other.data.len());
        let mut out = self.clone();
        for (z, w) in out.data.iter_mut().zip(&other.data) {
            *z -= w;
        }
        out
    }

    /// Pointwise product (both fields fully physical).
    pub fn mul(&self, other: &Field) -> Field {
        assert_eq!(self.data.len(), other.data.len());
        let mut out = self.clone();
        for (z, w) in out.data.iter_mut().zip(&other.data) {
            *z *= w;
        }
        out
    }

    /// Multiply each column slice by a per-column (v-group) profile.
    pub fn mul_v_profile(&self, prof: &[Complex64]) -> Field {
        assert_eq!(prof.len(), self.cols());
        let mut out = self.clone();
        let cols = self.cols();
        for (i, z) in out.data.iter_mut().enumerate() {
            *z *= prof[i % cols];
        }
        out
    }

    /// Multiply each row slice by a per-row (x-group) profile.
    pub fn mul_x_profile(&self, prof: &[Complex64]) -> Field {
        assert_eq!(prof.len(), self.rows());
        let mut out = self.clone();
        let cols = self.cols();
        for (i, z) in out.data.iter_mut().enumerate() {
            *z *= prof[i / cols];
        }
        out
    }
}

/// Sample a function of (x-coords, v-coords) on the grid.
pub fn sample_function(grid: &Grid, f: impl Fn(&[f64], &[f64]) -> Complex64) -> Field {
    let xc = grid.coords(Group::X);
    let vc = grid.coords(Group::V);
    let rows = grid.nx_total();
    let cols = grid.nv_total();
    let mut data = Vec::with_capacity(rows * cols);
    let mut xi = vec![0.0; xc.len()];
    let mut vi = vec![0.0; vc.len()];
    for r in 0..rows {
        let rx = grid.unravel(Group::X, r);
        for (a, &i) in rx.iter().enumerate() {
            xi[a] = xc[a][i];
        }
        for c in 0..cols {
            let rv = grid.unravel(Group::V, c);
            for (a, &i) in rv.iter().enumerate() {
                vi[a] = vc[a][i];
            }
            data.push(f(&xi, &vi));
        }
    }
    Field { grid: grid.clone(), x_dom: Domain::Physical, v_dom: Domain::Physical, data }
}

/// 1-D convenience sampler f(x, v).
pub fn sample_xv(grid: &Grid, f: impl Fn(f64, f64) -> Complex64) -> Field {
    assert_eq!(grid.dim(), 1, "sample_xv is for 1-D grids");
    sample_function(grid, |x, v| f(x[0], v[0]))
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry((n, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

/// Run an unnormalized FFT pass along one axis of the flattened layout.
///
/// The target axis has extent `n`; lanes are indexed by everything else. For the
/// x-group, `lane_stride` is `post * cols`; for the v-group, `post`.
fn fft_axis(
    data: &mut [Complex64],
    n: usize,
    pre: usize,
    post: usize,
    other: usize,
    group: Group,
    forward: bool,
) {
    if n == 1 {
        return;
    }
    let fft = plan(n, forward);
    let mut lane = vec![Complex64::new(0.0, 0.0); n];
    // index(k) for fixed (ip, ipost, o):
    //   X: ((ip*n + k)*post + ipost)*other + o   stride = post*other
    //   V: o*(pre*n*post) + (ip*n + k)*post + ipost stride = post
    for ip in 0..pre {
        for ipost in 0..post {
            for o in 0..other {
                let (base, stride) = match group {
                    Group::X => (((ip * n) * post + ipost) * other + o, post * other),
                    Group::V => (o * (pre * n * post) + (ip * n) * post + ipost, post),
                };
                for k in 0..n {
                    lane[k] = data[base + k * stride];
                }
                fft.process(&mut lane);
                for k in 0..n {
                    data[base + k * stride] = lane[k];
                }
            }
        }
    }
}

/// Fourier transform of one group. Forward maps Physical -> Frequency with
/// integral weight (step per axis); inverse maps back with weight 1/len per axis.
/// Transforming a group already in the target domain is a usage error.
pub fn transform(field: &Field, group: Group, forward: bool) -> Result<Field> {
    let have = field.domain(group);
    let need = if forward { Domain::Physical } else { Domain::Frequency };
    if have != need {
        return Err(Error::Usage(format!(
            "{:?}-group transform expects the group in the {:?} domain, found {:?}",
            group, need, have
        )));
    }
    let mut out = field.clone();
    let axes = field.grid.axes(group).to_vec();
    let other = match group {
        Group::X => field.cols(),
        Group::V => field.rows(),
    };
    for a in 0..axes.len() {
        let pre: usize = axes[..a].iter().map(|t| t.n).product();
        let post: usize = axes[a + 1..].iter().map(|t| t.n).product();
        fft_axis(&mut out.data, axes[a].n, pre, post, other, group, forward);
    }
    let w: f64 = if forward {
        axes.iter().map(|t| t.step()).product()
    } else {
        axes.iter().map(|t| 1.0 / t.len).product()
    };
    for z in &mut out.data {
        *z *= w;
    }
    out.set_domain(group, if forward { Domain::Frequency } else { Domain::Physical });
    Ok(out)
}

/// Ensure a group is in the requested domain, transforming a copy if needed.
pub fn in_domain(field: &Field, group: Group, dom: Domain) -> Result<Field> {
    if field.domain(group) == dom {
        Ok(field.clone())
    } else {
        transform(field, group, dom == Domain::Frequency)
    }
}

/// Apply a frequency multiplier `sym(xi-vector)` to one group, restoring the
/// group's original domain afterwards. Non-finite output is a numeric error.
pub fn apply_multiplier(
    field: &Field,
    group: Group,
    sym: impl Fn(&[f64]) -> Complex64,
) -> Result<Field> {
    let orig = field.domain(group);
    let mut hat = in_domain(field, group, Domain::Frequency)?;
    let freqs = field.grid.freqs(group);
    let total: usize = freqs.iter().map(|f| f.len()).product();
    let mut table = Vec::with_capacity(total);
    let mut xi = vec![0.0; freqs.len()];
    for flat in 0..total {
        let idx = field.grid.unravel(group, flat);
        for (a, &i) in idx.iter().enumerate() {
            xi[a] = freqs[a][i];
        }
        table.push(sym(&xi));
    }
    multiply_group_table(&mut hat, group, &table);
    let out = if orig == Domain::Physical {
        transform(&hat, group, false)?
    } else {
        hat
    };
    if out.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("multiplier produced non-finite values".into()));
    }
    Ok(out)
}

/// Multiply by a precomputed per-group-index table (frequency domain assumed).
pub fn multiply_group_table(field: &mut Field, group: Group, table: &[Complex64]) {
    let cols = field.cols();
    match group {
        Group::X => {
            assert_eq!(table.len(), field.rows());
            for (i, z) in field.data.iter_mut().enumerate() {
                *z *= table[i / cols];
            }
        }
        Group::V => {
            assert_eq!(table.len(), cols);
            for (i, z) in field.data.iter_mut().enumerate() {
                *z *= table[i % cols];
            }
        }
    }
}

/// Free-streaming shift f(x, v) -> f(x - t v, v), exact in x-frequency space.
pub fn shift(field: &Field, t: f64) -> Result<Field> {
    let orig = field.x_dom;
    if field.v_dom != Domain::Physical {
        return Err(Error::Usage("shift needs the v-group in the physical domain".into()));
    }
    let mut hat = in_domain(field, Group::X, Domain::Frequency)?;
    let xf = field.grid.freqs(Group::X);
    let vc = field.grid.coords(Group::V);
    let rows = field.rows();
    let cols = field.cols();
    // Phase exp(-i t <xi, v>) with xi the row multi-frequency, v the column coords.
    let mut row_freq = vec![vec![0.0; field.grid.dim()]; rows];
    for (r, rf) in row_freq.iter_mut().enumerate() {
        let idx = field.grid.unravel(Group::X, r);
        for (a, &i) in idx.iter().enumerate() {
            rf[a] = xf[a][i];
        }
    }
    let mut col_v = vec![vec![0.0; field.grid.dim()]; cols];
    for (c, cv) in col_v.iter_mut().enumerate() {
        let idx = field.grid.unravel(Group::V, c);
        for (a, &i) in idx.iter().enumerate() {
            cv[a] = vc[a][i];
        }
    }
    for r in 0..rows {
        for c in 0..cols {
            let dot: f64 = row_freq[r].iter().zip(&col_v[c]).map(|(a, b)| a * b).sum();
            let ph = Complex64::from_polar(1.0, -t * dot);
            hat.data[r * cols + c] *= ph;
        }
    }
    if orig == Domain::Physical {
        transform(&hat, Group::X, false)
    } else {
        Ok(hat)
    }
}

/// Velocity average: integrate over the v-group (Riemann sum). The result keeps
/// the x-group and carries trivial v-axes.
pub fn average_velocity(field: &Field) -> Result<Field> {
    let f = in_domain(field, Group::V, Domain::Physical)?;
    let f = in_domain(&f, Group::X, Domain::Physical)?;
    let cell = field.grid.v_cell();
    let rows = f.rows();
    let cols = f.cols();
    let mut data = Vec::with_capacity(rows);
    for r in 0..rows {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in 0..cols {
            acc += f.data[r * cols + c];
        }
        data.push(acc * cell);
    }
    let trivial_v = vec![AxisSpec::trivial(); field.grid.dim()];
    let grid = Grid::new(field.grid.x.clone(), trivial_v, field.grid.chart)?;
    Field::new(grid, Domain::Physical, Domain::Physical, data)
}

/// Mixed-norm nesting order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixedOrder {
    /// Outer norm over x of the inner v-norm: L^outer_x L^inner_v.
    XOuter,
    /// Outer norm over v of the inner x-norm: L^outer_v L^inner_x.
    VOuter,
}

fn lp_of(vals: impl Iterator<Item = f64>, p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        vals.fold(0.0, f64::max)
    } else {
        let s: f64 = vals.map(|a| a.powf(p)).sum();
        (s * cell).powf(1.0 / p)
    }
}

/// Full phase-space Lebesgue norm, optionally restricted to an axis-aligned box
/// (one closed interval per axis, x-axes first). Requires p >= 1.
pub fn lebesgue_norm(field: &Field, p: f64, region: Option<&[(f64, f64)]>) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("Lebesgue exponent must satisfy p >= 1, got {p}")));
    }
    let f = in_domain(field, Group::V, Domain::Physical)?;
    let f = in_domain(&f, Group::X, Domain::Physical)?;
    let cell = field.grid.x_cell() * field.grid.v_cell();
    let dim = field.grid.dim();
    let mask: Option<Vec<bool>> = match region {
        None => None,
        Some(ivals) => {
            if ivals.len() != 2 * dim {
                return Err(Error::Parameter(format!(
                    "region needs one interval per axis ({} total), got {}",
                    2 * dim,
                    ivals.len()
                )));
            }
            let xc = field.grid.coords(Group::X);
            let vc = field.grid.coords(Group::V);
            let rows = f.rows();
            let cols = f.cols();
            let mut m = vec![false; rows * cols];
            for r in 0..rows {
                let rx = field.grid.unravel(Group::X, r);
                let ok_x = rx
                    .iter()
                    .enumerate()
                    .all(|(a, &i)| xc[a][i] >= ivals[a].0 && xc[a][i] <= ivals[a].1);
                for c in 0..cols {
                    if !ok_x {
                        continue;
                    }
                    let rv = field.grid.unravel(Group::V, c);
                    let ok_v = rv.iter().enumerate().all(|(a, &i)| {
                        vc[a][i] >= ivals[dim + a].0 && vc[a][i] <= ivals[dim + a].1
                    });
                    m[r * cols + c] = ok_v;
                }
            }
            Some(m)
        }
    };
    let vals = f.data.iter().enumerate().filter_map(|(i, z)| match &mask {
        Some(m) if !m[i] => None,
        _ => Some(z.norm()),
    });
    Ok(lp_of(vals, p, cell))
}

/// Mixed Lebesgue norm with the given nesting order. Exponents >= 1 or infinite.
pub fn mixed_norm(field: &Field, outer: f64, inner: f64, order: MixedOrder) -> Result<f64> {
    for e in [outer, inner] {
        if !(e >= 1.0) {
            return Err(Error::Parameter(format!("mixed-norm exponent must be >= 1, got {e}")));
        }
    }
    let f = in_domain(field, Group::V, Domain::Physical)?;
    let f = in_domain(&f, Group::X, Domain::Physical)?;
    let rows = f.rows();
    let cols = f.cols();
    let (xc, vcell) = (field.grid.x_cell(), field.grid.v_cell());
    match order {
        MixedOrder::XOuter => {
            let inner_vals =
                (0..rows).map(|r| lp_of((0..cols).map(|c| f.data[r * cols + c].norm()), inner, vcell));
            Ok(lp_of(inner_vals, outer, xc))
        }
        MixedOrder::VOuter => {
            let inner_vals =
                (0..cols).map(|c| lp_of((0..rows).map(|r| f.data[r * cols + c].norm()), inner, xc));
            Ok(lp_of(inner_vals, outer, vcell))
        }
    }
}

/// L2 norm over the full phase space.
pub fn l2_norm(field: &Field) -> f64 {
    lebesgue_norm(field, 2.0, None).expect("p=2 is always valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn demo_grid() -> Grid {
        Grid::square_1d(32, 4.0 * std::f64::consts::PI, Chart::Literal).unwrap()
    }

    #[test]
    fn freq_layout_matches_fft_order() {
        let a = AxisSpec::new(8, 8.0).unwrap();
        let f = a.freqs();
        let base = 2.0 * std::f64::consts::PI / 8.0;
        let want = [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0];
        for (got, w) in f.iter().zip(want) {
            assert_relative_eq!(*got, base * w, epsilon = 1e-15);
        }
    }

    #[test]
    fn signed_chart_covers_symmetric_window() {
        let a = AxisSpec::new(8, 8.0).unwrap();
        let c = a.coords(Chart::Signed);
        assert_relative_eq!(c[0], 0.0);
        assert_relative_eq!(c[3], 3.0);
        assert_relative_eq!(c[4], -4.0);
        assert_relative_eq!(c[7], -1.0);
        let lit = a.coords(Chart::Literal);
        assert_relative_eq!(lit[7], 7.0);
    }

    #[test]
    fn transform_roundtrip_1d() {
        let g = demo_grid();
        let f = sample_xv(&g, |x, v| Complex64::new((x * 0.5).sin() + 0.3 * v.cos(), 0.1 * x));
        let hat = transform(&f, Group::X, true).unwrap();
        let back = transform(&hat, Group::X, false).unwrap();
        let err = f.sub(&back).max_abs();
        assert!(err < 1e-12, "roundtrip error {err}");
    }

    #[test]
    fn transform_roundtrip_2d_groups() {
        let a = AxisSpec::new(8, 2.0 * std::f64::consts::PI).unwrap();
        let g = Grid::new(vec![a, a], vec![a, a], Chart::Literal).unwrap();
        let f = sample_function(&g, |x, v| {
            Complex64::new((x[0] + 2.0 * x[1]).sin(), (v[0] - v[1]).cos())
        });
        let hf = transform(&f, Group::X, true).unwrap();
        let hfv = transform(&hf, Group::V, true).unwrap();
        let back = transform(&transform(&hfv, Group::V, false).unwrap(), Group::X, false).unwrap();
        assert!(f.sub(&back).max_abs() < 1e-12);
    }

    #[test]
    fn double_forward_is_usage_error() {
        let g = demo_grid();
        let f = sample_xv(&g, |x, _| Complex64::new(x.cos(), 0.0));
        let hat = transform(&f, Group::X, true).unwrap();
        match transform(&hat, Group::X, true) {
            Err(Error::Usage(_)) => {}
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn parseval_under_forward_weighting() {
        // ||f||_{L2_x}^2 = (1/L) sum |fhat|^2 for a v-independent field.
        let g = demo_grid();
        let f = sample_xv(&g, |x, _| Complex64::new((1.3 * x).sin() + 0.2, -0.4 * (0.5 * x).cos()));
        let hat = transform(&f, Group::X, true).unwrap();
        let l = g.x[0].len;
        let lhs: f64 = (0..f.rows()).map(|r| f.at(r, 0).norm_sqr()).sum::<f64>() * g.x[0].step();
        let rhs: f64 = (0..f.rows()).map(|r| hat.at(r, 0).norm_sqr()).sum::<f64>() / l;
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    #[test]
    fn plane_wave_is_multiplier_eigenvector() {
        let g = demo_grid();
        let k = 2.0 * std::f64::consts::PI / g.x[0].len * 5.0;
        let f = sample_xv(&g, |x, _| Complex64::from_polar(1.0, k * x));
        let out = apply_multiplier(&f, Group::X, |xi| {
            Complex64::new(if (xi[0] - k).abs() < 1e-9 { 2.5 } else { 0.0 }, 0.0)
        })
        .unwrap();
        assert!(out.sub(&f.scale(Complex64::new(2.5, 0.0))).max_abs() < 1e-12);
        assert_eq!(out.x_dom, Domain::Physical);
    }

    #[test]
    fn multiplier_rejects_non_finite_symbols() {
        let g = demo_grid();
        let f = sample_xv(&g, |x, _| Complex64::new(x.cos(), 0.0));
        match apply_multiplier(&f, Group::X, |xi| Complex64::new(1.0 / (xi[0] - xi[0]), 0.0)) {
            Err(Error::Numeric(_)) => {}
            other => panic!("expected numeric error, got {other:?}"),
        }
    }

    #[test]
    fn shift_translates_by_velocity() {
        // v-independent profiles translate rigidly only if v is constant per column;
        // check one column against a sampled translate.
        let g = Grid::square_1d(64, 2.0 * std::f64::consts::PI * 4.0, Chart::Literal).unwrap();
        let f = sample_xv(&g, |x, _| Complex64::new((2.0 * x).sin(), (x).cos()));
        let t = 0.7;
        let sh = shift(&f, t).unwrap();
        let vc = g.coords(Group::V);
        for c in [0usize, 5, 17] {
            let v = vc[0][c];
            for r in [0usize, 13, 40] {
                let x = g.coords(Group::X)[0][r];
                let expect = Complex64::new((2.0 * (x - t * v)).sin(), (x - t * v).cos());
                let got = sh.at(r, c);
                assert!((got - expect).norm() < 1e-10, "r={r} c={c}");
            }
        }
    }

    #[test]
    fn lebesgue_norm_rejects_small_p() {
        let g = demo_grid();
        let f = sample_xv(&g, |_, _| Complex64::new(1.0, 0.0));
        assert!(matches!(lebesgue_norm(&f, 0.5, None), Err(Error::Parameter(_))));
    }

    #[test]
    fn constant_field_norms_are_exact() {
        let g = demo_grid();
        let f = sample_xv(&g, |_, _| Complex64::new(2.0, 0.0));
        let vol = g.x[0].len * g.v[0].len;
        assert_relative_eq!(lebesgue_norm(&f, 1.0, None).unwrap(), 2.0 * vol, max_relative = 1e-13);
        assert_relative_eq!(
            lebesgue_norm(&f, 2.0, None).unwrap(),
            2.0 * vol.sqrt(),
            max_relative = 1e-13
        );
        assert_relative_eq!(lebesgue_norm(&f, f64::INFINITY, None).unwrap(), 2.0);
    }

    #[test]
    fn region_restriction_counts_half_the_box() {
        let g = demo_grid();
        let l = g.x[0].len;
        let f = sample_xv(&g, |_, _| Complex64::new(1.0, 0.0));
        let full = lebesgue_norm(&f, 1.0, None).unwrap();
        // Half-open sampling: [0, L/2) holds exactly n/2 points.
        let half = lebesgue_norm(&f, 1.0, Some(&[(0.0, l / 2.0 - 1e-9), (0.0, l)])).unwrap();
        assert_relative_eq!(half, full / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn average_velocity_of_separable_field() {
        let g = demo_grid();
        let f = sample_xv(&g, |x, v| Complex64::new(x.cos() * (v * 0.5).sin().powi(2), 0.0));
        let avg = average_velocity(&f).unwrap();
        // mean of sin^2(v/2) over the period is 1/2 exactly on the lattice.
        let l = g.v[0].len;
        for r in [0usize, 3, 20] {
            let x = g.coords(Group::X)[0][r];
            assert_relative_eq!(avg.at(r, 0).re, 0.5 * l * x.cos(), epsilon = 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Nesting inequality: ||f||_{L^p_v L^r_x} <= ||f||_{L^r_x L^p_v} for r <= p.
        #[test]
        fn minkowski_nesting(seed in 0u64..500, ri in 0usize..3, pi in 0usize..3) {
            let exps = [1.0, 2.0, f64::INFINITY];
            let (r, p) = (exps[ri.min(pi)], exps[ri.max(pi)]);
            let g = Grid::square_1d(16, 3.0, Chart::Literal).unwrap();
            let mut rng = crate::rng::stream(seed, 99, 0, 0);
            let data = crate::rng::complex_normals(&mut rng, 16 * 16);
            let f = Field::new(g, Domain::Physical, Domain::Physical, data).unwrap();
            let lhs = mixed_norm(&f, p, r, MixedOrder::VOuter).unwrap();
            let rhs = mixed_norm(&f, r, p, MixedOrder::XOuter).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12), "lhs {lhs} rhs {rhs}");
        }

        /// Round-trip through both groups is the identity.
        #[test]
        fn roundtrip_identity(seed in 0u64..500) {
            let g = Grid::square_1d(16, 5.0, Chart::Signed).unwrap();
            let mut rng = crate::rng::stream(seed, 98, 0, 0);
            let data = crate::rng::complex_normals(&mut rng, 16 * 16);
            let f = Field::new(g, Domain::Physical, Domain::Physical, data).unwrap();
            let h = transform(&transform(&f, Group::X, true).unwrap(), Group::V, true).unwrap();
            let b = transform(&transform(&h, Group::V, false).unwrap(), Group::X, false).unwrap();
            prop_assert!(f.sub(&b).max_abs() < 1e-11);
        }
    }
}
