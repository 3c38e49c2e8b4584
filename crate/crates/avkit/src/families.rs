//! Seeded test-field families behind the verification sweeps: smooth weights,
//! identity-suite pairs, slaved transport pairs of prescribed regularity, the
//! oscillatory concentration family, the box-scaling family, cusp kernels for
//! operator-decay sweeps, and the two-dimensional strip kernels.
//!
//! Same seed and parameters always reproduce the same bytes.

use crate::cutoffs::Cutoffs;
use crate::rho::Profile;
use crate::rng::{self, domain};
use crate::spectral::{in_domain, transform, AxisSpec, Chart, Domain, Field, Grid, Group};
use crate::{Error, Result};
use rustfft::num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Smooth weights
// ---------------------------------------------------------------------------

fn cinf_step(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        (-1.0 / y).exp()
    }
}

/// Smooth descent from 1 (y <= 0) to 0 (y >= 1).
pub fn ramp(y: f64) -> f64 {
    if y <= 0.0 {
        1.0
    } else if y >= 1.0 {
        0.0
    } else {
        let a = cinf_step(1.0 - y);
        let b = cinf_step(y);
        a / (a + b)
    }
}

/// Derivative of `ramp`.
pub fn ramp_deriv(y: f64) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        0.0
    } else {
        let a = cinf_step(1.0 - y);
        let b = cinf_step(y);
        // a' = a / (1-y)^2, b' = b / y^2; d/dy [a/(a+b)] = (a'b - ab') / (a+b)^2
        // with a' carrying a minus sign from the 1-y argument.
        let ap = -a / ((1.0 - y) * (1.0 - y));
        let bp = b / (y * y);
        (ap * b - a * bp) / ((a + b) * (a + b))
    }
}

/// Plateau weight: 1 for |r| <= half, 0 beyond half + taper.
pub fn plateau(r: f64, half: f64, taper: f64) -> f64 {
    ramp((r.abs() - half) / taper)
}

/// Derivative of `plateau` in r (odd around 0).
pub fn plateau_deriv(r: f64, half: f64, taper: f64) -> f64 {
    ramp_deriv((r.abs() - half) / taper) * r.signum() / taper
}

/// Unnormalized smooth bump exp(-1/(1-y^2)) on |y| < 1.
pub fn bump(y: f64) -> f64 {
    if y.abs() < 1.0 {
        (-1.0 / (1.0 - y * y)).exp()
    } else {
        0.0
    }
}

/// Derivative of `bump`.
pub fn bump_deriv(y: f64) -> f64 {
    if y.abs() < 1.0 {
        let d = 1.0 - y * y;
        bump(y) * (-2.0 * y / (d * d))
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------------
// Identity-suite pair
// ---------------------------------------------------------------------------

/// Grid the exact-identity suite runs on.
pub fn identity_grid() -> Grid {
    Grid::square_1d(256, 2.0 * PI * 16.0, Chart::Literal).expect("static grid")
}

/// Block scale and time used by the identity suite.
pub const IDENTITY_DELTA: f64 = 8.0;
pub const IDENTITY_TIME: f64 = 0.5;

fn identity_component(grid: &Grid, rng: &mut ChaCha12Rng, low_v_amp: f64) -> Field {
    let l = grid.axes(Group::X)[0].len;
    let vs = grid.coords(Group::V).swap_remove(0);
    let xi = grid.freqs(Group::X).swap_remove(0);
    let n = xi.len();
    let cols = vs.len();
    let sig = 3.2;
    let env: Vec<f64> = vs.iter().map(|&v| (-(v - l / 2.0).powi(2) / (2.0 * sig * sig)).exp()).collect();
    let xrows: Vec<usize> = (0..n).filter(|&i| xi[i].abs() <= 15.0).collect();
    let vmodes: Vec<usize> =
        (0..n).filter(|&i| xi[i].abs() >= 2.75 && xi[i].abs() <= 13.0).collect();
    let nb = xrows.len();
    let picks: Vec<usize> =
        rng::distinct_indices(rng, vmodes.len(), 10).into_iter().map(|i| vmodes[i]).collect();

    let mut data = vec![Complex64::new(0.0, 0.0); n * cols];
    let a = rng::complex_normals(rng, nb);
    for (ri, &row) in xrows.iter().enumerate() {
        for c in 0..cols {
            data[row * cols + c] += 0.5 * a[ri] * env[c];
        }
    }
    for &idx in &picks {
        let om = xi[idx];
        let b = rng::complex_normals(rng, nb);
        let scale = 0.8 / (10.0f64).sqrt();
        for (ri, &row) in xrows.iter().enumerate() {
            for c in 0..cols {
                let wave = Complex64::from_polar(1.0, om * vs[c]);
                data[row * cols + c] += scale * b[ri] * env[c] * wave;
            }
        }
    }
    if low_v_amp > 0.0 {
        let lowjs: Vec<usize> = (0..n).filter(|&i| xi[i].abs() <= 1.0).collect();
        let scale = low_v_amp / (lowjs.len() as f64).sqrt();
        for &idx in &lowjs {
            let om = xi[idx];
            let cw = rng::complex_normals(rng, nb);
            for (ri, &row) in xrows.iter().enumerate() {
                for c in 0..cols {
                    let wave = Complex64::from_polar(1.0, om * vs[c]);
                    data[row * cols + c] += scale * cw[ri] * wave;
                }
            }
        }
    }
    let hat = Field::new(grid.clone(), Domain::Frequency, Domain::Physical, data).expect("sized");
    transform(&hat, Group::X, false).expect("inverse")
}

/// Density-style random field of the identity suite (broadband in x, enveloped
/// oscillatory modes in v).
pub fn identity_field(seed: u64) -> Field {
    let grid = identity_grid();
    let mut rng = rng::stream(seed, domain::IDENTITY, 0, 0);
    identity_component(&grid, &mut rng, 0.0)
}

/// Density/source pair for the localization identities. The source carries an
/// extra low-velocity-frequency component so the wrong-band negative control
/// is visible at order one.
pub fn identity_pair(seed: u64) -> (Field, Field) {
    let grid = identity_grid();
    let mut rng = rng::stream(seed, domain::IDENTITY, 0, 0);
    let f = identity_component(&grid, &mut rng, 0.0);
    let g = identity_component(&grid, &mut rng, 0.3);
    (f, g)
}

// ---------------------------------------------------------------------------
// Dispersive family
// ---------------------------------------------------------------------------

/// Grid for the free-streaming decay check.
pub fn dispersive_grid() -> Grid {
    Grid::square_1d(512, 2.0 * PI * 16.0, Chart::Literal).expect("static grid")
}

/// Product bump with x-width 1 at x = 20 and velocity support [0.5, 5.5].
pub fn dispersive_bump() -> Field {
    let grid = dispersive_grid();
    crate::spectral::sample_xv(&grid, |x, v| {
        Complex64::new(bump((x - 20.0) / 1.0) * bump((v - 3.0) / 2.5), 0.0)
    })
}

// ---------------------------------------------------------------------------
// Theorem-sweep pair: slaved source, prescribed decay
// ---------------------------------------------------------------------------

/// Grid for the gain-verification sweeps.
pub fn sweep_grid() -> Grid {
    Grid::square_1d(512, 2.0 * PI * 8.0, Chart::Literal).expect("static grid")
}

/// Velocity weight for the sweeps: 1 on |v - L/2| <= 5, 0 beyond 8.
pub fn sweep_weight(grid: &Grid) -> Vec<Complex64> {
    let l = grid.axes(Group::V)[0].len;
    grid.coords(Group::V)[0]
        .iter()
        .map(|&v| Complex64::new(plateau(v - l / 2.0, 5.0, 3.0), 0.0))
        .collect()
}

/// Source-first synthetic pair: per positive x-mode eta the source gets
/// |eta|^{-1/2} times enveloped velocity oscillations with mode weights
/// omega^{-(alpha+1/2)}, and the density is slaved through f = g / (i eta v).
/// The pair satisfies g = v d_x f to machine accuracy.
pub fn sweep_pair(seed: u64, alpha: f64) -> Result<(Field, Field)> {
    let grid = sweep_grid();
    let n = grid.axes(Group::X)[0].n;
    let l = grid.axes(Group::V)[0].len;
    let vs = grid.coords(Group::V)[0].clone();
    let xi = grid.freqs(Group::X)[0].clone();
    let cols = vs.len();
    let sig = 3.2;
    let env: Vec<f64> = vs.iter().map(|&v| (-(v - l / 2.0).powi(2) / (2.0 * sig * sig)).exp()).collect();
    let mut rng = rng::stream(seed, domain::SWEEP, 0, 0);

    let mut fh = vec![Complex64::new(0.0, 0.0); n * cols];
    let mut gh = vec![Complex64::new(0.0, 0.0); n * cols];
    let mut row_g = vec![Complex64::new(0.0, 0.0); cols];
    for i in 1..n / 2 {
        let eta = xi[i];
        let c0 = rng::complex_normal(&mut rng);
        let omegas: Vec<f64> = (0..10).map(|_| rng.gen_range(8u32..129) as f64 / 8.0).collect();
        let cs = rng::complex_normals(&mut rng, 10);
        let pref = eta.abs().powf(-0.5);
        for c in 0..cols {
            row_g[c] = pref * c0 * env[c];
        }
        for (m, &om) in omegas.iter().enumerate() {
            let w = om.powf(-(alpha + 0.5));
            for c in 0..cols {
                let wave = Complex64::from_polar(1.0, om * vs[c]);
                row_g[c] += pref * cs[m] * w * env[c] * wave;
            }
        }
        for c in 0..cols {
            gh[i * cols + c] = row_g[c];
            gh[(n - i) * cols + c] = row_g[c].conj();
            if c > 0 {
                let slave = row_g[c] / Complex64::new(0.0, eta * vs[c]);
                fh[i * cols + c] = slave;
                fh[(n - i) * cols + c] = slave.conj();
            }
        }
    }
    let f = transform(
        &Field::new(grid.clone(), Domain::Frequency, Domain::Physical, fh)?,
        Group::X,
        false,
    )?;
    let g = transform(
        &Field::new(grid.clone(), Domain::Frequency, Domain::Physical, gh)?,
        Group::X,
        false,
    )?;
    Ok((f, g))
}

// ---------------------------------------------------------------------------
// Prescribed-regularity synthesis
// ---------------------------------------------------------------------------

/// Target indices for `synthesize_besov_field`.
#[derive(Clone, Copy, Debug)]
pub struct SynthSpec {
    /// Decay exponent of the x dyadic blocks.
    pub a_x: f64,
    /// Decay exponent of the v dyadic blocks.
    pub alpha_v: f64,
    pub amplitude: f64,
    pub seed: u64,
}

/// Per-mode standard deviations for one group, calibrated against the actual
/// ring filters: the expected squared filtered mass sum phi(|freq|/2^j)^2 s^2
/// equals 4^{-j index} for every fully resolved ring j. Solved as a small
/// linear system over per-annulus variances.
fn calibrated_weights(grid: &Grid, cuts: &Cutoffs, group: Group, index: f64) -> Result<Vec<f64>> {
    let freqs = grid.freqs(group);
    let total: usize = freqs.iter().map(|f| f.len()).product();
    if total == 1 {
        return Ok(vec![1.0]);
    }
    let maxf = grid
        .axes(group)
        .iter()
        .filter(|a| a.n > 1)
        .map(|a| a.max_freq())
        .fold(f64::INFINITY, f64::min);
    let d = grid.axes(group).iter().filter(|a| a.n > 1).count() as f64;
    let full_rings = (maxf / 1.98).log2().floor();
    if !(full_rings >= 3.0) {
        return Err(Error::Parameter(format!(
            "target window unresolvable: the group carries {} full dyadic rings, need 4",
            (full_rings.max(-1.0) + 1.0) as i64
        )));
    }
    let jmax = full_rings as usize;
    let nj = jmax + 1;
    let rad: Vec<f64> = (0..total)
        .map(|flat| {
            let multi = grid.unravel(group, flat);
            multi
                .iter()
                .enumerate()
                .map(|(a, &i)| freqs[a][i] * freqs[a][i])
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    // Home annulus: the ring whose filter weights the mode most. Modes no
    // ring sees are either below the first ring (flat extension) or above the
    // last (power-law extension folded into the last unknown).
    const LOW: usize = usize::MAX;
    const HIGH: usize = usize::MAX - 1;
    let mut home = vec![LOW; total];
    let mut w = vec![vec![0.0f64; nj]; nj];
    let mut rhs: Vec<f64> = (0..nj).map(|j| (4.0f64).powf(-(j as f64) * index)).collect();
    let ext_exp = -2.0 * index - d;
    for (flat, &r) in rad.iter().enumerate() {
        if r == 0.0 {
            continue;
        }
        let mut best = 0.0;
        let mut arg = LOW;
        for j in 0..nj {
            let p = cuts.phi(r / (2.0f64).powi(j as i32));
            if p > best {
                best = p;
                arg = j;
            }
        }
        if arg == LOW && r > 1.98 * (2.0f64).powi(jmax as i32) * 0.5 {
            arg = HIGH;
        }
        home[flat] = arg;
        for j in 0..nj {
            let p = cuts.phi(r / (2.0f64).powi(j as i32));
            if p == 0.0 {
                continue;
            }
            let col = match arg {
                LOW => continue,
                HIGH => jmax,
                k => k,
            };
            let factor = if arg == HIGH {
                (r / (2.0f64).powi(jmax as i32)).powf(ext_exp)
            } else {
                1.0
            };
            w[j][col] += p * p * factor;
        }
    }
    // Gaussian elimination with partial pivoting.
    let mut u = {
        let mut a = w;
        let mut b = rhs.clone();
        for col in 0..nj {
            let piv = (col..nj)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            if a[col][col].abs() < 1e-300 {
                return Err(Error::Numeric("singular ring calibration system".into()));
            }
            for row in col + 1..nj {
                let f = a[row][col] / a[col][col];
                for c in col..nj {
                    a[row][c] -= f * a[col][c];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = vec![0.0f64; nj];
        for row in (0..nj).rev() {
            let mut acc = b[row];
            for c in row + 1..nj {
                acc -= a[row][c] * x[c];
            }
            x[row] = acc / a[row][row];
        }
        x
    };
    rhs.clear();
    for (k, v) in u.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v > -1e-12 {
                *v = 0.0;
            } else {
                return Err(Error::Parameter(format!(
                    "target window unresolvable: ring {k} needs negative variance {v:.3e}"
                )));
            }
        }
    }
    Ok(rad
        .iter()
        .zip(&home)
        .map(|(&r, &h)| {
            match h {
                LOW => u[0],
                HIGH => u[jmax] * (r / (2.0f64).powi(jmax as i32)).powf(ext_exp),
                k => u[k],
            }
            .sqrt()
        })
        .collect())
}

/// Spectral synthesis: independent seeded Gaussian coefficients with
/// per-annulus variances calibrated against the ring filters, so the dyadic
/// block (i, j) has expected L2 norm amplitude * 2^{-i a_x} * 2^{-j alpha_v};
/// Hermitian-symmetrized for a real-valued field.
pub fn synthesize_besov_field(grid: &Grid, cuts: &Cutoffs, spec: &SynthSpec) -> Result<Field> {
    let rows = grid.nx_total();
    let cols = grid.nv_total();
    if spec.amplitude == 0.0 {
        return Ok(Field::zeros(grid));
    }
    let wx = calibrated_weights(grid, cuts, Group::X, spec.a_x)?;
    let wv = calibrated_weights(grid, cuts, Group::V, spec.alpha_v)?;
    let lx: f64 = grid.axes(Group::X).iter().map(|a| a.len).product();
    let lv: f64 = grid.axes(Group::V).iter().map(|a| a.len).product();
    let scale = spec.amplitude * (lx * lv / 2.0).sqrt();

    let mut rng = rng::stream(spec.seed, domain::FAMILY, 2, 0);
    let coefs = rng::complex_normals(&mut rng, rows * cols);
    let mut data = vec![Complex64::new(0.0, 0.0); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            data[r * cols + c] = scale * wx[r] * wv[c] * coefs[r * cols + c];
        }
    }
    // Hermitian pairing F(-k) = conj F(k) across both groups jointly.
    let mirror = |len: usize, i: usize| if i == 0 { 0 } else { len - i };
    let mirror_flat = |grid: &Grid, group: Group, flat: usize| -> usize {
        let axes = grid.axes(group);
        let multi = grid.unravel(group, flat);
        let mut out = 0usize;
        for (a, &i) in multi.iter().enumerate() {
            out = out * axes[a].n + mirror(axes[a].n, i);
        }
        out
    };
    let half_inv = 1.0 / (2.0f64).sqrt();
    let snapshot = data.clone();
    for r in 0..rows {
        let rm = mirror_flat(grid, Group::X, r);
        for c in 0..cols {
            let cm = mirror_flat(grid, Group::V, c);
            data[r * cols + c] =
                (snapshot[r * cols + c] + snapshot[rm * cols + cm].conj()) * half_inv;
        }
    }
    let hat = Field::new(grid.clone(), Domain::Frequency, Domain::Frequency, data)?;
    let half = transform(&hat, Group::X, false)?;
    transform(&half, Group::V, false)
}

// ---------------------------------------------------------------------------
// Oscillatory concentration family
// ---------------------------------------------------------------------------

/// Grid for the oscillatory family: the x-axis needs headroom for the sharp
/// bump derivative, the v-axis only resolves the window.
pub fn oscillatory_grid() -> Grid {
    Grid::rect_1d(8192, 2.0 * PI, 512, 2.0 * PI, Chart::Literal).expect("static grid")
}

/// Decay-law weight: sharp-edged plateau around v = pi picking a fixed
/// |cos| phase for every tested n.
pub fn oscillatory_decay_weight(v: f64) -> f64 {
    plateau(v - PI, PI / 3.0 - 0.075, 0.15)
}

/// Oscillatory triple (f, g, h) with v d_x f = d_v g - h pointwise: the
/// density concentrates at the x-origin at rate n while its velocity average
/// vanishes like 1/n.
pub fn oscillatory_counterexample(grid: &Grid, n: u32) -> Result<(Field, Field, Field)> {
    if n == 0 {
        return Err(Error::Parameter("oscillation index n must be positive".into()));
    }
    let nf = n as f64;
    let nyq_x = grid.axes(Group::X)[0].max_freq();
    let nyq_v = grid.axes(Group::V)[0].max_freq();
    if nf >= nyq_v || nf >= nyq_x {
        return Err(Error::Parameter(format!(
            "oscillation frequency n = {n} is beyond the Nyquist range ({:.1}, {:.1})",
            nyq_x, nyq_v
        )));
    }
    let lx = grid.axes(Group::X)[0].len;
    let xs = grid.coords(Group::X).swap_remove(0);
    let vs = grid.coords(Group::V).swap_remove(0);
    // x-profiles: bump of half-width 2.4/n centered at the coordinate seam.
    let mut xf = vec![0.0; xs.len()];
    let mut dph = vec![0.0; xs.len()];
    for (i, &x) in xs.iter().enumerate() {
        let x_signed = if x >= lx / 2.0 { x - lx } else { x };
        let y = nf * x_signed / 2.4;
        xf[i] = nf * bump(y);
        dph[i] = nf * nf / 2.4 * bump_deriv(y);
    }
    // v-profiles.
    let mut cosn = vec![0.0; vs.len()];
    let mut gv = vec![0.0; vs.len()];
    let mut hv = vec![0.0; vs.len()];
    for (j, &v) in vs.iter().enumerate() {
        let th = plateau(v - PI, 1.4, 1.5);
        let thp = plateau_deriv(v - PI, 1.4, 1.5);
        let s = (nf * v).sin();
        cosn[j] = (nf * v).cos() * th;
        gv[j] = v * s * th / nf;
        hv[j] = s * (th + v * thp) / nf;
    }
    let assemble = |xp: &[f64], vp: &[f64]| -> Field {
        let mut data = Vec::with_capacity(xs.len() * vs.len());
        for &a in xp {
            for &b in vp {
                data.push(Complex64::new(a * b, 0.0));
            }
        }
        Field::new(grid.clone(), Domain::Physical, Domain::Physical, data).expect("sized")
    };
    Ok((assemble(&xf, &cosn), assemble(&dph, &gv), assemble(&dph, &hv)))
}

// ---------------------------------------------------------------------------
// Scaling family
// ---------------------------------------------------------------------------

/// Base grid of the scaling family.
pub fn scaling_grid() -> Grid {
    Grid::rect_1d(256, 2.0 * PI, 64, 2.0 * PI, Chart::Literal).expect("static grid")
}

/// Velocity weight paired with the scaling family.
pub fn scaling_weight(grid: &Grid) -> Vec<Complex64> {
    grid.coords(Group::V)[0]
        .iter()
        .map(|&v| Complex64::new(plateau(v - PI, 1.0, 1.0), 0.0))
        .collect()
}

/// Positive density: a DC-dominant random x-profile times a fixed positive
/// velocity bump, so L1 norms are exact under refinement.
pub fn scaling_base(seed: u64) -> Field {
    let grid = scaling_grid();
    let mut rng = rng::stream(seed, domain::FAMILY, 1, 0);
    let cs = rng::complex_normals(&mut rng, 8);
    let weights: Vec<f64> = (1..=8).map(|i| (-((i as f64) - 3.0).powi(2) / 4.0).exp()).collect();
    let total: f64 = cs.iter().zip(&weights).map(|(c, w)| (c * w).norm()).sum();
    let c0 = 1.1 * 2.0 * total;
    let xs = grid.coords(Group::X).swap_remove(0);
    let xprof: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let mut acc = c0;
            for (m, (c, w)) in cs.iter().zip(&weights).enumerate() {
                let wave = Complex64::from_polar(1.0, (m as f64 + 1.0) * x);
                acc += 2.0 * (c * w * wave).re;
            }
            acc
        })
        .collect();
    let vprof: Vec<f64> = grid.coords(Group::V)[0].iter().map(|&v| bump((v - PI) / 2.8)).collect();
    let mut data = Vec::with_capacity(xprof.len() * vprof.len());
    for &a in &xprof {
        for &b in &vprof {
            data.push(Complex64::new(a * b, 0.0));
        }
    }
    Field::new(grid, Domain::Physical, Domain::Physical, data).expect("sized")
}

/// Exact grid realization of f(x/R): the field moves to the enlarged box
/// [0, R Lx) at the same lattice spacing, x-spectrum copied index-for-index
/// with amplitude R. Requires dyadic R.
pub fn scaling_refine(base: &Field, r_factor: usize) -> Result<Field> {
    if r_factor == 0 || !r_factor.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "refinement ratio must be a power of two, got {r_factor}"
        )));
    }
    if base.grid.axes(Group::X).len() != 1 {
        return Err(Error::Parameter("scaling refinement is one-dimensional in x".into()));
    }
    if r_factor == 1 {
        return Ok(base.clone());
    }
    let hat = in_domain(base, Group::X, Domain::Frequency)?;
    let old = base.grid.axes(Group::X)[0];
    let nx = old.n;
    let big = AxisSpec::new(nx * r_factor, old.len * r_factor as f64)?;
    let grid = Grid::new(vec![big], base.grid.axes(Group::V).to_vec(), base.grid.chart)?;
    let cols = base.grid.nv_total();
    let mut data = vec![Complex64::new(0.0, 0.0); big.n * cols];
    let amp = r_factor as f64;
    for m in 0..nx {
        let lattice = if m <= nx / 2 { m as isize } else { m as isize - nx as isize };
        let new_row = if lattice >= 0 { lattice as usize } else { (big.n as isize + lattice) as usize };
        for c in 0..cols {
            data[new_row * cols + c] = amp * hat.at(m, c);
        }
    }
    let scaled = Field::new(grid, Domain::Frequency, hat.domain(Group::V), data)?;
    in_domain(&scaled, Group::X, Domain::Physical)
}

// ---------------------------------------------------------------------------
// Cusp kernels for the operator-decay sweeps
// ---------------------------------------------------------------------------

/// Grid for the block-operator decay sweeps.
pub fn dyadic_bound_grid() -> Grid {
    Grid::square_1d(256, 4.0 * PI, Chart::Signed).expect("static grid")
}

fn cusp_profile(grid: &Grid, alpha: f64, coefs: Option<&[Complex64]>) -> Vec<f64> {
    let zeta = grid.freqs(Group::V).swap_remove(0);
    let n = zeta.len();
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for m in 1..n {
        let amp = zeta[m].abs().powf(-alpha - 0.5);
        spec[m] = match coefs {
            Some(cs) => cs[m] * amp,
            None => Complex64::new(amp, 0.0),
        };
    }
    // One-axis inverse on a temporary x-only layout of the same axis.
    let axis = grid.axes(Group::V)[0];
    let line = Grid::new(vec![axis], vec![AxisSpec::trivial()], grid.chart).expect("axis");
    let hat = Field::new(line.clone(), Domain::Frequency, Domain::Physical, spec).expect("sized");
    let phys = transform(&hat, Group::X, false).expect("inverse");
    (0..n).map(|i| phys.at(i, 0).re).collect()
}

/// Deterministic coherent field for the L2 decay slope: an x-block plane wave
/// times an even velocity cusp of strength alpha, under a plateau weight.
pub fn cusp_block_field(k: u32, alpha: f64) -> Result<Field> {
    let grid = dyadic_bound_grid();
    let delta = (2.0f64).powi(k as i32);
    if 1.98 * delta >= grid.axes(Group::X)[0].max_freq() {
        return Err(Error::Parameter(format!("block scale 2^{k} is not resolvable on this grid")));
    }
    let u = cusp_profile(&grid, alpha, None);
    let vs = grid.coords(Group::V).swap_remove(0);
    let xs = grid.coords(Group::X).swap_remove(0);
    let mut data = Vec::with_capacity(xs.len() * vs.len());
    for &x in &xs {
        let cx = (delta * x).cos();
        for (j, &v) in vs.iter().enumerate() {
            data.push(Complex64::new(cx * u[j] * plateau(v, 0.4, 1.6), 0.0));
        }
    }
    Field::new(grid, Domain::Physical, Domain::Physical, data)
}

/// Random band field for the sup-norm decay slope: a random x-band profile
/// times a random velocity cusp, both seeded.
pub fn cusp_band_field(seed: u64, alpha: f64) -> Result<Field> {
    let grid = dyadic_bound_grid();
    let n = grid.axes(Group::X)[0].n;
    let mut rng = rng::stream(seed, domain::DYADIC_BOUND, 0, 0);
    let cv = rng::complex_normals(&mut rng, n);
    let u = cusp_profile(&grid, alpha, Some(&cv));
    let xi = grid.freqs(Group::X).swap_remove(0);
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for m in 0..n {
        if xi[m].abs() >= 6.0 && xi[m].abs() <= 10.0 {
            spec[m] = rng::complex_normal(&mut rng);
        }
    }
    let line = Grid::new(vec![grid.axes(Group::X)[0]], vec![AxisSpec::trivial()], grid.chart)?;
    let hat = Field::new(line, Domain::Frequency, Domain::Physical, spec)?;
    let xprof = transform(&hat, Group::X, false)?;
    let vs = grid.coords(Group::V).swap_remove(0);
    let mut data = Vec::with_capacity(n * vs.len());
    for i in 0..n {
        let a = xprof.at(i, 0).re;
        for (j, &v) in vs.iter().enumerate() {
            data.push(Complex64::new(a * u[j] * plateau(v, 0.4, 1.6), 0.0));
        }
    }
    Field::new(grid, Domain::Physical, Domain::Physical, data)
}

// ---------------------------------------------------------------------------
// Dirichlet band family for the Bernstein sweep
// ---------------------------------------------------------------------------

/// x-only grid of the Bernstein constant sweep.
pub fn bernstein_grid() -> Grid {
    Grid::rect_1d(256, 2.0 * PI, 1, 1.0, Chart::Literal).expect("static grid")
}

/// Randomly translated Dirichlet kernel over the dyadic band at scale 2^k:
/// a saturating field whose Bernstein ratios stay within log-order spread.
pub fn bernstein_band_field(cuts: &Cutoffs, seed: u64, k: u32) -> Result<Field> {
    let grid = bernstein_grid();
    let axis = grid.axes(Group::X)[0];
    let delta = (2.0f64).powi(k as i32);
    if 1.98 * delta >= axis.max_freq() {
        return Err(Error::Parameter(format!("band scale 2^{k} is not resolvable on this grid")));
    }
    let mut rng = rng::stream(seed, domain::BERNSTEIN, k as u64, 0);
    let x0 = rng.gen::<f64>() * axis.len;
    let xi = grid.freqs(Group::X).swap_remove(0);
    let modes: Vec<f64> = xi
        .iter()
        .copied()
        .filter(|&z| z > 0.0 && cuts.phi(z / delta) > 1e-9)
        .collect();
    let xs = grid.coords(Group::X).swap_remove(0);
    let data: Vec<Complex64> = xs
        .iter()
        .map(|&x| {
            let mut acc = 0.0;
            for &om in &modes {
                acc += 2.0 * (om * (x - x0)).cos();
            }
            Complex64::new(acc, 0.0)
        })
        .collect();
    Field::new(grid, Domain::Physical, Domain::Physical, data)
}

// ---------------------------------------------------------------------------
// Two-dimensional strip kernels
// ---------------------------------------------------------------------------

/// Kernel selector for the strip family: the saturating kernel's transform
/// jumps at the origin; the control kernel's transform lives in [1, 2].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StripKernel {
    Saturating,
    Control,
}

/// Pure velocity grid for the strip family.
pub fn strip_grid(n: usize) -> Result<Grid> {
    Grid::vspace_2d(n, 2.0 * PI, Chart::Signed)
}

/// Strip field h(v1, v2) = chi(|v2|) K(lambda v1), built exactly in spectrum:
/// the v1-lattice coefficient at zeta is kernel_hat(zeta/lambda)/lambda.
pub fn strip_field(grid: &Grid, lambda: f64, kernel: StripKernel, profile: &Profile) -> Result<Field> {
    if grid.axes(Group::V).len() != 2 {
        return Err(Error::Parameter("strip family needs a two-dimensional velocity grid".into()));
    }
    if !(lambda >= 1.0) {
        return Err(Error::Parameter(format!("lambda = {lambda} must be at least 1")));
    }
    let axis = grid.axes(Group::V)[0];
    if 2.0 * lambda >= axis.max_freq() {
        return Err(Error::Parameter(format!(
            "kernel support 2 lambda = {} reaches the Nyquist frequency {}",
            2.0 * lambda,
            axis.max_freq()
        )));
    }
    let zeta = axis.freqs();
    let spec: Vec<Complex64> = zeta
        .iter()
        .map(|&z| {
            let r = z / lambda;
            let val = match kernel {
                StripKernel::Saturating => profile.tau_hat(r),
                StripKernel::Control => profile.rho_hat(r),
            };
            Complex64::new(val / lambda, 0.0)
        })
        .collect();
    let line = Grid::new(vec![axis], vec![AxisSpec::trivial()], grid.chart)?;
    let hat = Field::new(line, Domain::Frequency, Domain::Physical, spec)?;
    let kper = transform(&hat, Group::X, false)?;
    let n = axis.n;
    let coords = axis.coords(grid.chart);
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        let kv = kper.at(i, 0);
        for j in 0..n {
            data.push(kv * plateau(coords[j], 0.4, 0.8));
        }
    }
    Field::new(grid.clone(), Domain::Physical, Domain::Physical, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoffs::Block;
    use crate::transport;
    use approx::assert_relative_eq;

    fn cuts() -> Cutoffs {
        Cutoffs::new(0.24).unwrap()
    }

    #[test]
    fn ramp_is_a_smooth_partition_step() {
        assert_eq!(ramp(-0.5), 1.0);
        assert_eq!(ramp(1.5), 0.0);
        assert_relative_eq!(ramp(0.3) + ramp(0.7), 1.0, epsilon = 1e-15);
        assert_relative_eq!(ramp(0.5), 0.5, epsilon = 1e-15);
        // numeric derivative matches the analytic one
        let h = 1e-6;
        for y in [0.2, 0.5, 0.8] {
            let num = (ramp(y + h) - ramp(y - h)) / (2.0 * h);
            assert_relative_eq!(ramp_deriv(y), num, max_relative = 1e-6, epsilon = 1e-9);
        }
        assert_eq!(ramp_deriv(0.0), 0.0);
        assert_eq!(ramp_deriv(1.0), 0.0);
    }

    #[test]
    fn bump_derivative_matches_finite_differences() {
        let h = 1e-6;
        for y in [-0.7, -0.2, 0.0, 0.4, 0.9] {
            let num = (bump(y + h) - bump(y - h)) / (2.0 * h);
            assert_relative_eq!(bump_deriv(y), num, max_relative = 1e-5, epsilon = 1e-10);
        }
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump_deriv(1.2), 0.0);
    }

    #[test]
    fn identity_pair_is_deterministic_and_low_mode_enriched() {
        let (f1, g1) = identity_pair(42);
        let (f2, g2) = identity_pair(42);
        assert_eq!(f1.data, f2.data);
        assert_eq!(g1.data, g2.data);
        let (f3, _) = identity_pair(43);
        assert_ne!(f1.data, f3.data);
        assert_eq!(identity_field(42).data, f1.data);
        // the source's extra component carries no velocity envelope, so it
        // dominates where the envelope has died off
        let near_zero = |f: &Field| -> f64 {
            let vs = f.grid.coords(Group::V).swap_remove(0);
            let mut m = 0.0f64;
            for r in 0..f.rows() {
                for (c, &v) in vs.iter().enumerate() {
                    if v < 5.0 {
                        m = m.max(f.at(r, c).norm());
                    }
                }
            }
            m
        };
        assert!(near_zero(&g1) > 100.0 * near_zero(&f1));
    }

    #[test]
    fn identity_pair_localizes_and_flags_the_wrong_band() {
        let c = cuts();
        let (f, g) = identity_pair(42);
        let rep = transport::localization_check(
            &c,
            &f,
            &g,
            IDENTITY_DELTA,
            IDENTITY_TIME,
            &Profile::smooth(),
        )
        .unwrap();
        assert!(rep.identity_max() <= 1e-8, "identity residual {}", rep.identity_max());
        assert!(rep.control() > 1e-2, "control {}", rep.control());
    }

    #[test]
    fn sweep_pair_is_slaved_to_machine_accuracy() {
        let (f, g) = sweep_pair(100, 1.0).unwrap();
        let slaved = transport::apply_transport(&f).unwrap();
        let diff = slaved.sub(&g);
        let rel = diff.max_abs() / g.max_abs();
        assert!(rel < 1e-10, "slaving residual {rel}");
        let (f2, _) = sweep_pair(100, 1.0).unwrap();
        assert_eq!(f.data, f2.data);
    }

    #[test]
    fn sweep_average_carries_a_full_derivative_of_extra_decay() {
        let c = cuts();
        let (f, _) = sweep_pair(100, 1.0).unwrap();
        let weighted = f.mul_v_profile(&sweep_weight(&f.grid));
        let avg = crate::spectral::average_velocity(&weighted).unwrap();
        let mut pts = Vec::new();
        for k in 0..5 {
            let d = (2.0f64).powi(k);
            let (blk, _) = c.block_project(&avg, Group::X, Block::Dyadic(d)).unwrap();
            pts.push((k as f64, crate::spectral::lebesgue_norm(&blk, 2.0, None).unwrap()));
        }
        let fit = crate::besov::regularity_index_fit(&pts).unwrap();
        assert!(fit.index > 0.55, "index {}", fit.index);
        assert!(fit.r2 > 0.9, "r2 {}", fit.r2);
    }

    #[test]
    fn synthesized_field_hits_the_velocity_target() {
        let grid = Grid::square_1d(256, 2.0 * PI, Chart::Literal).unwrap();
        let c = cuts();
        // ring masses averaged over seeds approach their calibrated targets
        let mut acc: std::collections::BTreeMap<i64, (f64, u32)> = Default::default();
        for seed in 0..24 {
            let spec = SynthSpec { a_x: 0.0, alpha_v: 0.75, amplitude: 1.0, seed };
            let f = synthesize_besov_field(&grid, &c, &spec).unwrap();
            let (_, profile) =
                crate::besov::besov_norm(&c, &f, Group::V, 0.0, 2.0, f64::INFINITY).unwrap();
            for (k, n) in profile.ring_points() {
                let e = acc.entry(k as i64).or_insert((0.0, 0));
                e.0 += n * n;
                e.1 += 1;
            }
        }
        let pts: Vec<(f64, f64)> =
            acc.iter().map(|(&k, &(s, m))| (k as f64, (s / m as f64).sqrt())).collect();
        let fit = crate::besov::regularity_index_fit(&pts).unwrap();
        assert!((fit.index - 0.75).abs() <= 0.05, "fitted index {}", fit.index);
        assert!(fit.r2 > 0.98, "r2 {}", fit.r2);
    }

    #[test]
    fn synthesis_is_deterministic_and_real() {
        let grid = Grid::square_1d(256, 2.0 * PI, Chart::Literal).unwrap();
        let c = cuts();
        let spec = SynthSpec { a_x: 0.0, alpha_v: 0.75, amplitude: 1.0, seed: 5 };
        let f = synthesize_besov_field(&grid, &c, &spec).unwrap();
        let imag = f.data.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);
        assert!(imag < 1e-12 * f.max_abs(), "imaginary residue {imag}");
        let f2 = synthesize_besov_field(&grid, &c, &spec).unwrap();
        assert_eq!(f.data, f2.data);
        let z = synthesize_besov_field(&grid, &c, &SynthSpec { amplitude: 0.0, ..spec }).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn synthesis_needs_enough_rings() {
        let grid = Grid::square_1d(8, 2.0 * PI, Chart::Literal).unwrap();
        let c = cuts();
        let spec = SynthSpec { a_x: 0.0, alpha_v: 0.5, amplitude: 1.0, seed: 1 };
        assert!(matches!(synthesize_besov_field(&grid, &c, &spec), Err(Error::Parameter(_))));
    }

    #[test]
    fn oscillatory_triple_satisfies_the_transport_identity() {
        // reduced x-resolution keeps the same Gevrey floor as the full grid at n = 4
        let grid = Grid::rect_1d(2048, 2.0 * PI, 512, 2.0 * PI, Chart::Literal).unwrap();
        let (f, g, h) = oscillatory_counterexample(&grid, 4).unwrap();
        let lhs = transport::apply_transport(&f).unwrap();
        let dvg = crate::spectral::apply_multiplier(&g, Group::V, |zeta| {
            Complex64::new(0.0, zeta[0])
        })
        .unwrap();
        let res = lhs.sub(&dvg.sub(&h));
        let rel = res.max_abs() / lhs.max_abs();
        assert!(rel <= 1e-8, "identity residual {rel}");
    }

    #[test]
    fn oscillatory_rejects_unresolvable_frequencies() {
        let grid = Grid::rect_1d(256, 2.0 * PI, 64, 2.0 * PI, Chart::Literal).unwrap();
        assert!(matches!(oscillatory_counterexample(&grid, 40), Err(Error::Parameter(_))));
        assert!(matches!(oscillatory_counterexample(&grid, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn oscillatory_l1_mass_is_uniform_in_n() {
        let grid = Grid::rect_1d(2048, 2.0 * PI, 512, 2.0 * PI, Chart::Literal).unwrap();
        let (f4, _, _) = oscillatory_counterexample(&grid, 4).unwrap();
        let (f8, _, _) = oscillatory_counterexample(&grid, 8).unwrap();
        let m4 = crate::spectral::lebesgue_norm(&f4, 1.0, None).unwrap();
        let m8 = crate::spectral::lebesgue_norm(&f8, 1.0, None).unwrap();
        let ratio = (m4 / m8).max(m8 / m4);
        assert!(ratio < 2.0, "mass ratio {ratio}");
    }

    #[test]
    fn scaling_refinement_is_exact_on_l1() {
        let base = scaling_base(3);
        assert_eq!(scaling_refine(&base, 1).unwrap().data, base.data);
        assert!(matches!(scaling_refine(&base, 3), Err(Error::Parameter(_))));
        let scaled = scaling_refine(&base, 4).unwrap();
        let m1 = crate::spectral::lebesgue_norm(&base, 1.0, None).unwrap();
        let m4 = crate::spectral::lebesgue_norm(&scaled, 1.0, None).unwrap();
        assert_relative_eq!(m4 / m1, 4.0, max_relative = 1e-6);
        // positivity of the base (DC dominance)
        let min = base.data.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        assert!(min >= 0.0);
    }

    #[test]
    fn scaling_transport_slaves_through_refinement() {
        // d_x shrinks by 1/R: transporting the refined field matches refining
        // the transported field only after that factor.
        let base = scaling_base(3);
        let g_base = transport::apply_transport(&base).unwrap();
        let lhs = transport::apply_transport(&scaling_refine(&base, 2).unwrap()).unwrap();
        let rhs = scaling_refine(&g_base, 2).unwrap().scale(Complex64::new(0.5, 0.0));
        let rel = lhs.sub(&rhs).max_abs() / rhs.max_abs();
        assert!(rel < 1e-10, "commutation residual {rel}");
    }

    #[test]
    fn cusp_fields_are_real_and_deterministic() {
        let f = cusp_block_field(3, 1.0).unwrap();
        assert!(f.max_abs() > 0.0);
        let g1 = cusp_band_field(11, 1.0).unwrap();
        let g2 = cusp_band_field(11, 1.0).unwrap();
        assert_eq!(g1.data, g2.data);
        assert!(matches!(cusp_block_field(7, 0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn bernstein_band_field_saturates_its_block() {
        let c = cuts();
        let f = bernstein_band_field(&c, 1, 4).unwrap();
        let ratio = c.bernstein_check(&f, 4, 1.0, 2.0).unwrap();
        assert!(ratio.is_finite() && ratio > 0.0);
        assert!(matches!(bernstein_band_field(&c, 1, 7), Err(Error::Parameter(_))));
    }

    #[test]
    fn strip_field_spectrum_matches_the_kernel_transform() {
        let p = Profile::smooth();
        let grid = strip_grid(48).unwrap();
        let h = strip_field(&grid, 4.0, StripKernel::Control, &p).unwrap();
        // v1-spectrum at fixed v2 must be rho_hat(zeta/4)/4 times chi(v2)
        let hat = in_domain(&h, Group::V, Domain::Frequency).unwrap();
        // chi integrates over v2 when transforming; check the support instead:
        // control kernel content vanishes for |zeta1| < 4 and beyond 8.
        let freqs = grid.freqs(Group::V);
        let mut low = 0.0f64;
        let mut band = 0.0f64;
        for flat in 0..h.data.len() {
            let idx = grid.unravel(Group::V, flat);
            let z1 = freqs[0][idx[0]].abs();
            let mag = hat.data[flat].norm();
            if z1 < 3.9 {
                low = low.max(mag);
            } else if z1 > 4.1 && z1 < 7.9 {
                band = band.max(mag);
            }
        }
        assert!(band > 1e3 * low, "band {band} low {low}");
        assert!(matches!(
            strip_field(&grid, 16.0, StripKernel::Control, &p),
            Err(Error::Parameter(_))
        ));
        let flat = Grid::square_1d(16, 2.0 * PI, Chart::Literal).unwrap();
        assert!(matches!(strip_field(&flat, 2.0, StripKernel::Control, &p), Err(Error::Parameter(_))));
    }

    #[test]
    fn strip_norm_decays_with_lambda() {
        let p = Profile::smooth();
        let c = cuts();
        let grid = strip_grid(48).unwrap();
        let mut norms = Vec::new();
        for lam in [2.0, 4.0, 8.0] {
            let h = strip_field(&grid, lam, StripKernel::Saturating, &p).unwrap();
            let (n, _) = crate::besov::besov_norm(&c, &h, Group::V, -0.5, 2.0, 2.0).unwrap();
            norms.push(n);
        }
        assert!(norms[0] > norms[1] && norms[1] > norms[2], "norms {norms:?}");
    }
}
