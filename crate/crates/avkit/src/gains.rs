//! Predicted regularity gains for velocity averages: branch logic, norm-flavor
//! descriptors for both sides of each estimate, and the dyadic interpolation
//! schedules used by the verification sweeps.
//!
//! Every case encodes one estimate family. The critical source index is
//! B_crit = 1/r - D(1/r - 1/p); below it the gain interpolates between the
//! density and source regularities, above it the gain saturates at one full
//! derivative (shifted by the x-indices), and exactly at it the endpoint is
//! attained for summable scale families (q = 1) or with an epsilon loss.

use crate::{Error, Result};

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// Holder conjugate exponent.
fn conjugate(r: f64) -> f64 {
    if r <= 1.0 {
        f64::INFINITY
    } else if r.is_infinite() {
        1.0
    } else {
        r / (r - 1.0)
    }
}

fn check_lebesgue(name: &str, e: f64) -> Result<()> {
    if !(e >= 1.0) {
        return Err(Error::Parameter(format!("{name} = {e} must be at least 1")));
    }
    Ok(())
}

fn check_finite_lebesgue(name: &str, e: f64) -> Result<()> {
    check_lebesgue(name, e)?;
    if e.is_infinite() {
        return Err(Error::Parameter(format!("{name} must be finite")));
    }
    Ok(())
}

/// Which branch of an estimate applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Saturated,
    EpsilonLoss,
}

/// Norm flavor for one side of an estimate.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceSpec {
    /// Besov norm of the velocity average in x.
    Besov { s: f64, p: f64, q: f64 },
    /// Mixed phase-space Besov norm with separate x and v indices.
    BesovMixed { a: f64, alpha: f64, r: f64, p: f64, q: f64 },
    /// Iterated norm: L^r_x outside a velocity Besov scale family.
    CheminLerner { r: f64, s: f64, p: f64, q: f64 },
    /// Low-frequency block in both groups, measured in L^r_x L^p_v.
    LowBlockMixed { r: f64, p: f64 },
}

/// One estimate family with its parameters. D is the spatial dimension.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GainCase {
    /// Hilbertian case: r = p = 2 with phase-space Besov data.
    Classical { d: u32, alpha: f64, beta: f64, a: f64, b: f64, q: f64 },
    /// L^1_x with velocity Besov data.
    L1 { d: u32, p: f64, q: f64, alpha: f64, beta: f64 },
    /// L^1_x with phase-space Besov data (extra x-regularity indices).
    L1Reg { d: u32, p: f64, q: f64, alpha: f64, beta: f64, a: f64, b: f64 },
    /// Homogeneous-scale variant of L1 (no critical threshold; multiplicative bound).
    Homog { d: u32, p: f64, q: f64, alpha: f64, beta: f64 },
    /// Homogeneous-scale variant of L1Reg.
    HomogReg { d: u32, p: f64, q: f64, alpha: f64, beta: f64, a: f64, b: f64 },
    /// General integrability 1 <= r <= p with phase-space Besov data.
    General { d: u32, r: f64, p: f64, q: f64, alpha: f64, beta: f64, a: f64, b: f64 },
    /// Two independent exponent triples joined by interpolation of order theta.
    TwoExponent {
        d: u32,
        r0: f64,
        p0: f64,
        q0: f64,
        r1: f64,
        p1: f64,
        q1: f64,
        alpha: f64,
        beta: f64,
        a: f64,
        b: f64,
    },
    /// Endpoint: L^1_x B^0_{1,1} data on both sides, zero gain, no hypotheses.
    L1Endpoint { d: u32, beta: f64 },
}

impl GainCase {
    /// Stable identifier used by the CLI and reports.
    pub fn id(&self) -> &'static str {
        match self {
            GainCase::Classical { .. } => "classical",
            GainCase::L1 { .. } => "l1",
            GainCase::L1Reg { .. } => "l1reg",
            GainCase::Homog { .. } => "homog",
            GainCase::HomogReg { .. } => "homog_reg",
            GainCase::General { .. } => "general",
            GainCase::TwoExponent { .. } => "two_exponent",
            GainCase::L1Endpoint { .. } => "l1_endpoint",
        }
    }
}

/// Epsilon used when a critical branch only holds with an epsilon loss.
pub const EPSILON_LOSS: f64 = 0.1;

/// Output of the gain computation: the predicted index, the branch taken, and
/// the exact norm flavors the verifier must evaluate on each side.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Prediction {
    pub case_id: String,
    pub s: f64,
    pub regime: Regime,
    /// Set on epsilon-loss branches; `s` is already reduced by it.
    pub epsilon: Option<f64>,
    /// Interpolation order of the two-exponent case.
    pub theta: Option<f64>,
    /// Exponent pair of a multiplicative (product-form) bound; sums to 1.
    pub multiplicative: Option<(f64, f64)>,
    pub lhs: SpaceSpec,
    pub rhs_f: SpaceSpec,
    pub rhs_g: SpaceSpec,
    pub phi_required: bool,
    pub chi_required: bool,
    pub flags: Vec<String>,
}

/// Branch on the source index: below, above, or at the critical value.
fn three_way(beta: f64, crit: f64, q: f64) -> Regime {
    if beta < crit {
        Regime::Subcritical
    } else if beta > crit || q == 1.0 {
        Regime::Saturated
    } else {
        Regime::EpsilonLoss
    }
}

/// Compute the predicted regularity gain and the norm plan for a case.
pub fn predicted_gain(case: &GainCase) -> Result<Prediction> {
    let id = case.id().to_string();
    match *case {
        GainCase::Classical { d: _, alpha, beta, a, b, q } => {
            check_lebesgue("q", q)?;
            if !(alpha > -0.5) {
                return Err(Error::Parameter(format!("alpha = {alpha} must exceed -1/2")));
            }
            if !(b >= a - 1.0) {
                return Err(Error::Parameter(format!("b = {b} must be at least a - 1 = {}", a - 1.0)));
            }
            let regime = three_way(beta, 0.5, q);
            let (s, epsilon, rhs_f) = match regime {
                Regime::Subcritical => (
                    (1.0 + b - a) * (alpha + 0.5) / (1.0 + alpha - beta) + a,
                    None,
                    SpaceSpec::BesovMixed { a, alpha, r: 2.0, p: 2.0, q },
                ),
                Regime::Saturated => (1.0 + b, None, SpaceSpec::LowBlockMixed { r: 2.0, p: 2.0 }),
                Regime::EpsilonLoss => (
                    1.0 + b - EPSILON_LOSS,
                    Some(EPSILON_LOSS),
                    SpaceSpec::BesovMixed { a, alpha, r: 2.0, p: 2.0, q },
                ),
            };
            Ok(Prediction {
                case_id: id,
                s,
                regime,
                epsilon,
                theta: None,
                multiplicative: None,
                lhs: SpaceSpec::Besov { s, p: 2.0, q },
                rhs_f,
                rhs_g: SpaceSpec::BesovMixed { a: b, alpha: beta, r: 2.0, p: 2.0, q },
                phi_required: true,
                chi_required: false,
                flags: Vec::new(),
            })
        }
        GainCase::L1 { d, p, q, alpha, beta } => {
            check_lebesgue("p", p)?;
            check_lebesgue("q", q)?;
            let dp = d as f64 * (1.0 - inv(p));
            if !(dp < 1.0) {
                return Err(Error::Parameter(format!(
                    "D(1 - 1/p) = {dp} must be below 1 for the inhomogeneous L1 case"
                )));
            }
            // The lower boundary alpha = -D(1 - 1/p) is admitted: the gain
            // degenerates to the embedding baseline but the bound still holds.
            if !(alpha >= -dp) {
                return Err(Error::Parameter(format!(
                    "alpha = {alpha} must be at least -D(1 - 1/p) = {}",
                    -dp
                )));
            }
            let crit = 1.0 - dp;
            let mut flags = Vec::new();
            let (s, regime, lhs_q, rhs_f) = if beta < crit {
                (
                    (alpha + dp) / (1.0 + alpha - beta) - dp,
                    Regime::Subcritical,
                    q,
                    SpaceSpec::CheminLerner { r: 1.0, s: alpha, p, q },
                )
            } else {
                if beta == crit && q != 1.0 {
                    flags.push(
                        "critical source index with q != 1: the stated bound carries the q = 1 refinement"
                            .to_string(),
                    );
                }
                (1.0 - dp, Regime::Saturated, f64::INFINITY, SpaceSpec::LowBlockMixed { r: 1.0, p })
            };
            Ok(Prediction {
                case_id: id,
                s,
                regime,
                epsilon: None,
                theta: None,
                multiplicative: None,
                lhs: SpaceSpec::Besov { s, p, q: lhs_q },
                rhs_f,
                rhs_g: SpaceSpec::CheminLerner { r: 1.0, s: beta, p, q },
                phi_required: false,
                chi_required: false,
                flags,
            })
        }
        GainCase::L1Reg { d, p, q, alpha, beta, a, b } => {
            check_lebesgue("p", p)?;
            check_lebesgue("q", q)?;
            let dp = d as f64 * (1.0 - inv(p));
            if !(dp < 1.0) {
                return Err(Error::Parameter(format!(
                    "D(1 - 1/p) = {dp} must be below 1 for the inhomogeneous L1 case"
                )));
            }
            if !(alpha > -dp) {
                return Err(Error::Parameter(format!(
                    "alpha = {alpha} must exceed -D(1 - 1/p) = {}",
                    -dp
                )));
            }
            if !(b >= a - 1.0) {
                return Err(Error::Parameter(format!("b = {b} must be at least a - 1 = {}", a - 1.0)));
            }
            let crit = 1.0 - dp;
            let regime = three_way(beta, crit, q);
            let (s, epsilon, rhs_f) = match regime {
                Regime::Subcritical => (
                    (1.0 + b - a) * (alpha + dp) / (1.0 + alpha - beta) + a - dp,
                    None,
                    SpaceSpec::BesovMixed { a, alpha, r: 1.0, p, q },
                ),
                Regime::Saturated => {
                    (1.0 + b - dp, None, SpaceSpec::LowBlockMixed { r: 1.0, p })
                }
                Regime::EpsilonLoss => (
                    1.0 + b - dp - EPSILON_LOSS,
                    Some(EPSILON_LOSS),
                    SpaceSpec::BesovMixed { a, alpha, r: 1.0, p, q },
                ),
            };
            Ok(Prediction {
                case_id: id,
                s,
                regime,
                epsilon,
                theta: None,
                multiplicative: None,
                lhs: SpaceSpec::Besov { s, p, q },
                rhs_f,
                rhs_g: SpaceSpec::BesovMixed { a: b, alpha: beta, r: 1.0, p, q },
                phi_required: false,
                chi_required: false,
                flags: Vec::new(),
            })
        }
        GainCase::Homog { d, p, q, alpha, beta } => {
            check_lebesgue("p", p)?;
            check_lebesgue("q", q)?;
            let dp = d as f64 * (1.0 - inv(p));
            if !(alpha > -dp) {
                return Err(Error::Parameter(format!(
                    "alpha = {alpha} must exceed -D(1 - 1/p) = {}",
                    -dp
                )));
            }
            if !(beta < 1.0 - dp) {
                return Err(Error::Parameter(format!(
                    "beta = {beta} must stay below 1 - D(1 - 1/p) = {}; the homogeneous case has no saturated branch",
                    1.0 - dp
                )));
            }
            let s = (alpha + dp) / (1.0 + alpha - beta) - dp;
            let ef = (1.0 - beta - dp) / (1.0 + alpha - beta);
            let eg = 1.0 - ef; // equals (alpha + dp) / (1 + alpha - beta)
            Ok(Prediction {
                case_id: id,
                s,
                regime: Regime::Subcritical,
                epsilon: None,
                theta: None,
                multiplicative: Some((ef, eg)),
                lhs: SpaceSpec::Besov { s, p, q },
                rhs_f: SpaceSpec::CheminLerner { r: 1.0, s: alpha, p, q },
                rhs_g: SpaceSpec::CheminLerner { r: 1.0, s: beta, p, q },
                phi_required: false,
                chi_required: false,
                flags: vec!["homogeneous scale family: the grid truncates it at the low block".into()],
            })
        }
        GainCase::HomogReg { d, p, q, alpha, beta, a, b } => {
            check_lebesgue("p", p)?;
            check_lebesgue("q", q)?;
            let dp = d as f64 * (1.0 - inv(p));
            if !(alpha > -dp) {
                return Err(Error::Parameter(format!(
                    "alpha = {alpha} must exceed -D(1 - 1/p) = {}",
                    -dp
                )));
            }
            if !(b >= a - 1.0) {
                return Err(Error::Parameter(format!("b = {b} must be at least a - 1 = {}", a - 1.0)));
            }
            let crit = 1.0 - dp;
            let mut flags =
                vec!["homogeneous scale family: the grid truncates it at the low block".into()];
            if beta > crit || (beta == crit && q != 1.0) {
                return Err(Error::Parameter(format!(
                    "beta = {beta} must stay below 1 - D(1 - 1/p) = {crit} (the endpoint itself needs q = 1)"
                )));
            }
            if beta == crit {
                flags.push("endpoint source index attained through the summable scale family".into());
            }
            let s = (1.0 + b - a) * (alpha + dp) / (1.0 + alpha - beta) + a - dp;
            let ef = (1.0 - beta - dp) / (1.0 + alpha - beta);
            let eg = 1.0 - ef; // equals (alpha + dp) / (1 + alpha - beta)
            Ok(Prediction {
                case_id: id,
                s,
                regime: Regime::Subcritical,
                epsilon: None,
                theta: None,
                multiplicative: Some((ef, eg)),
                lhs: SpaceSpec::Besov { s, p, q },
                rhs_f: SpaceSpec::BesovMixed { a, alpha, r: 1.0, p, q },
                rhs_g: SpaceSpec::BesovMixed { a: b, alpha: beta, r: 1.0, p, q },
                phi_required: false,
                chi_required: false,
                flags,
            })
        }
        GainCase::General { d, r, p, q, alpha, beta, a, b } => {
            check_lebesgue("r", r)?;
            check_lebesgue("p", p)?;
            check_finite_lebesgue("q", q)?;
            if !(r <= p) {
                return Err(Error::Parameter(format!("r = {r} must not exceed p = {p}")));
            }
            let dxr = d as f64 * (inv(r) - inv(p));
            let floor = inv(r) - 1.0 - dxr;
            if !(alpha > floor) {
                return Err(Error::Parameter(format!(
                    "alpha = {alpha} must exceed 1/r - 1 - D(1/r - 1/p) = {floor}"
                )));
            }
            if !(b >= a - 1.0) {
                return Err(Error::Parameter(format!("b = {b} must be at least a - 1 = {}", a - 1.0)));
            }
            let crit = inv(r) - dxr;
            let regime = three_way(beta, crit, q);
            let (s, epsilon, rhs_f) = match regime {
                Regime::Subcritical => (
                    (1.0 + b - a) * ((1.0 - inv(r)) + alpha + dxr) / (1.0 + alpha - beta) + a
                        - dxr,
                    None,
                    SpaceSpec::BesovMixed { a, alpha, r, p, q },
                ),
                Regime::Saturated => (1.0 + b - dxr, None, SpaceSpec::LowBlockMixed { r, p }),
                Regime::EpsilonLoss => (
                    1.0 + b - dxr - EPSILON_LOSS,
                    Some(EPSILON_LOSS),
                    SpaceSpec::BesovMixed { a, alpha, r, p, q },
                ),
            };
            Ok(Prediction {
                case_id: id,
                s,
                regime,
                epsilon,
                theta: None,
                multiplicative: None,
                lhs: SpaceSpec::Besov { s, p, q },
                rhs_f,
                rhs_g: SpaceSpec::BesovMixed { a: b, alpha: beta, r, p, q },
                phi_required: true,
                chi_required: false,
                flags: Vec::new(),
            })
        }
        GainCase::TwoExponent { d, r0, p0, q0, r1, p1, q1, alpha, beta, a, b } => {
            check_lebesgue("r0", r0)?;
            check_lebesgue("p0", p0)?;
            check_finite_lebesgue("q0", q0)?;
            check_lebesgue("r1", r1)?;
            check_lebesgue("p1", p1)?;
            check_finite_lebesgue("q1", q1)?;
            if !(r0 <= p0 && p0 <= conjugate(r0)) {
                return Err(Error::Parameter(format!(
                    "need r0 <= p0 <= r0' (conjugate), got r0 = {r0}, p0 = {p0}, r0' = {}",
                    conjugate(r0)
                )));
            }
            if !(r1 <= p1 && p1 <= conjugate(r1)) {
                return Err(Error::Parameter(format!(
                    "need r1 <= p1 <= r1' (conjugate), got r1 = {r1}, p1 = {p1}, r1' = {}",
                    conjugate(r1)
                )));
            }
            let dd = d as f64;
            let gap0 = dd * (inv(r0) - inv(p0));
            let gap1 = dd * (inv(r1) - inv(p1));
            let floor = inv(r0) - 1.0 - gap0;
            if !(alpha > floor) {
                return Err(Error::Parameter(format!(
                    "alpha = {alpha} must exceed 1/r0 - 1 - D(1/r0 - 1/p0) = {floor}"
                )));
            }
            let ceil = inv(r1) - gap1;
            if !(beta < ceil) {
                return Err(Error::Parameter(format!(
                    "beta = {beta} must stay below 1/r1 - D(1/r1 - 1/p1) = {ceil}"
                )));
            }
            let side = 2.0 * inv(r1) - 1.0 - gap1;
            if !(side > 0.0 || (p1 == 2.0 && r1 == 2.0)) {
                return Err(Error::Parameter(format!(
                    "side condition fails: 2/r1 - 1 - D(1/r1 - 1/p1) = {side} is not positive and (r1, p1) != (2, 2)"
                )));
            }
            let num = alpha + 1.0 - inv(r0) + gap0;
            let den = -beta + inv(r1) - gap1;
            let theta = num / (num + den);
            if !(theta > 0.0 && theta < 1.0) {
                return Err(Error::Parameter(format!("theta = {theta} must lie strictly in (0, 1)")));
            }
            let lhs_p_inv = (1.0 - theta) * inv(p0) + theta * inv(p1);
            let lhs_q_inv = (1.0 - theta) * inv(q0) + theta * inv(q1);
            if (lhs_p_inv - lhs_q_inv).abs() > 1e-12 {
                return Err(Error::Parameter(format!(
                    "interpolation balance fails: (1-theta)/p0 + theta/p1 = {lhs_p_inv} but (1-theta)/q0 + theta/q1 = {lhs_q_inv}"
                )));
            }
            let p = if lhs_p_inv == 0.0 { f64::INFINITY } else { 1.0 / lhs_p_inv };
            let s = (1.0 - theta) * (a - gap0) + theta * (b - gap1) + theta;
            let chi_required = p < r0;
            let mut flags = Vec::new();
            if !chi_required {
                flags.push("p >= r0: the spatial cutoff may be dropped".into());
            }
            Ok(Prediction {
                case_id: id,
                s,
                regime: Regime::Subcritical,
                epsilon: None,
                theta: Some(theta),
                multiplicative: None,
                lhs: SpaceSpec::Besov { s, p, q: p },
                rhs_f: SpaceSpec::BesovMixed { a, alpha, r: r0, p: p0, q: q0 },
                rhs_g: SpaceSpec::BesovMixed { a: b, alpha: beta, r: r1, p: p1, q: q1 },
                phi_required: true,
                chi_required,
                flags,
            })
        }
        GainCase::L1Endpoint { d: _, beta } => Ok(Prediction {
            case_id: id,
            s: 0.0,
            regime: Regime::Subcritical,
            epsilon: None,
            theta: None,
            multiplicative: None,
            lhs: SpaceSpec::Besov { s: 0.0, p: 1.0, q: 1.0 },
            rhs_f: SpaceSpec::CheminLerner { r: 1.0, s: 0.0, p: 1.0, q: 1.0 },
            rhs_g: SpaceSpec::CheminLerner { r: 1.0, s: beta, p: 1.0, q: 1.0 },
            phi_required: false,
            chi_required: false,
            flags: vec!["iterated and scale-family norms coincide at r = p = q = 1".into()],
        }),
    }
}

/// Interpolation parameter t_k used at x-scale 2^k in the proofs' dyadic
/// splitting. Saturated regimes return infinity (the source term alone closes
/// the bound). Homogeneous cases need lambda = ||f|| / ||g||.
pub fn interpolation_schedule(case: &GainCase, k: u32, lambda: Option<f64>) -> Result<f64> {
    let kf = k as f64;
    match *case {
        GainCase::L1Endpoint { d: _, beta } => {
            if beta >= 1.0 {
                return Err(Error::Parameter(format!(
                    "schedule undefined at beta = {beta}: reduce to beta < 1 by inclusion first"
                )));
            }
            Ok((2.0f64).powf(kf * beta / (1.0 - beta)))
        }
        GainCase::L1 { d, p, alpha, beta, .. } => {
            let dp = d as f64 * (1.0 - inv(p));
            let crit = 1.0 - dp;
            if beta >= crit {
                return Ok(f64::INFINITY);
            }
            Ok((2.0f64).powf(-kf * (alpha - beta) / (1.0 + alpha - beta)))
        }
        GainCase::L1Reg { d, p, q, alpha, beta, a, b } => {
            let dp = d as f64 * (1.0 - inv(p));
            let crit = 1.0 - dp;
            if three_way(beta, crit, q) == Regime::Saturated {
                return Ok(f64::INFINITY);
            }
            let g = beta.min(crit);
            Ok((2.0f64).powf(-kf * (alpha - g + a - b) / (1.0 + alpha - g)))
        }
        GainCase::Classical { alpha, beta, a, b, q, .. } => {
            if three_way(beta, 0.5, q) == Regime::Saturated {
                return Ok(f64::INFINITY);
            }
            let g = beta.min(0.5);
            Ok((2.0f64).powf(-kf * (alpha - g + a - b) / (1.0 + alpha - g)))
        }
        GainCase::General { d, r, p, q, alpha, beta, a, b } => {
            let dxr = d as f64 * (inv(r) - inv(p));
            let crit = inv(r) - dxr;
            if three_way(beta, crit, q) == Regime::Saturated {
                return Ok(f64::INFINITY);
            }
            let g = beta.min(crit);
            Ok((2.0f64).powf(-kf * (alpha - g + a - b) / (1.0 + alpha - g)))
        }
        GainCase::Homog { alpha, beta, .. } => {
            let lam = lambda.ok_or_else(|| {
                Error::Parameter("homogeneous schedule needs lambda = ||f|| / ||g||".into())
            })?;
            if !(lam > 0.0) {
                return Err(Error::Parameter(format!("lambda = {lam} must be positive")));
            }
            Ok(lam.powf(1.0 / (1.0 + alpha - beta))
                * (2.0f64).powf(-kf * (alpha - beta) / (1.0 + alpha - beta)))
        }
        GainCase::HomogReg { alpha, beta, a, b, .. } => {
            let lam = lambda.ok_or_else(|| {
                Error::Parameter("homogeneous schedule needs lambda = ||f|| / ||g||".into())
            })?;
            if !(lam > 0.0) {
                return Err(Error::Parameter(format!("lambda = {lam} must be positive")));
            }
            Ok(lam.powf(1.0 / (1.0 + alpha - beta))
                * (2.0f64).powf(-kf * (alpha - beta + a - b) / (1.0 + alpha - beta)))
        }
        GainCase::TwoExponent { .. } => Err(Error::Parameter(
            "no dyadic schedule for the two-exponent case: its proof interpolates whole estimates".into(),
        )),
    }
}
