//! Parameter maps, loop colouring, the two-sheet construction and exact domination checks.

mod coloring;
mod holley;
mod strassen;

use rand::Rng;
use serde::Serialize;

use crate::config::{self, EdgeConfig, Spin, SpinConfig};
use crate::error::{Error, Result};
use crate::hexlattice::Domain;
use crate::measures::{ExactDistribution, Ground};

pub use coloring::{blue_spin_law, blue_spin_law_joint, verify_decoupling, verify_prop31, Prop31Report};
pub use holley::{holley_check_blue_spins, holley_check_lemma42, holley_check_lemma42_with};
pub use strassen::{strassen_dominates, MAX_STRASSEN_BITS};

/// Bisection tolerance for [`epsilon_of`].
pub const EPSILON_TOLERANCE: f64 = 1e-12;

/// Derived quantities for a pair `(n, x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Params {
    pub n: f64,
    pub x: f64,
    pub p: f64,
    /// max{(n−1)², (n−1)^{−2}}.
    pub m: f64,
    pub beta: f64,
    pub alpha: f64,
    /// 1 − α, kept separately since α is within 1e−4 of 1 in the interesting regime.
    pub one_minus_alpha: f64,
    pub x_tilde: f64,
    /// Conjectured critical point, defined for n ≤ 2.
    pub x_c: Option<f64>,
    pub epsilon: f64,
}

fn check_n(n: f64) -> Result<()> {
    if !(n > 1.0) || !n.is_finite() {
        return Err(Error::OutOfRange { name: "n", value: n, expected: "n > 1" });
    }
    Ok(())
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::OutOfRange { name: "x", value: x, expected: "0 < x < 1" });
    }
    Ok(())
}

fn m_of(n: f64) -> f64 {
    let d2 = (n - 1.0) * (n - 1.0);
    d2.max(1.0 / d2)
}

/// (α, 1 − α, β) with t = (x/2)⁶ / M, β = 1/(1+t), α = β^{1/6}.
fn alpha_beta(n: f64, x: f64) -> (f64, f64, f64) {
    let m = m_of(n);
    let t = (x / 2.0).powi(6) / m;
    let log_alpha = -t.ln_1p() / 6.0;
    let alpha = log_alpha.exp();
    let one_minus_alpha = -log_alpha.exp_m1();
    let c = (2.0 / x).powi(6) * m;
    (alpha, one_minus_alpha, c / (1.0 + c))
}

/// x̃ = 2x / (2 + (1+x)(1−α)/α), the closed form of x̃/(1−x̃) = x/(1−x)·(1 + (1+x)(1−α)/(2(1−x)α))^{−1}.
fn x_tilde_from(x: f64, alpha: f64, one_minus_alpha: f64) -> f64 {
    2.0 * x / (2.0 + (1.0 + x) * one_minus_alpha / alpha)
}

pub fn x_tilde(n: f64, x: f64) -> Result<f64> {
    check_n(n)?;
    check_x(x)?;
    let (alpha, oma, _) = alpha_beta(n, x);
    Ok(x_tilde_from(x, alpha, oma))
}

/// x̃ for an arbitrary α ∈ (0, 1].
pub fn x_tilde_for_alpha(x: f64, alpha: f64) -> Result<f64> {
    check_x(x)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfRange { name: "alpha", value: alpha, expected: "0 < alpha <= 1" });
    }
    Ok(x_tilde_from(x, alpha, 1.0 - alpha))
}

pub fn derive_params(n: f64, x: f64) -> Result<Params> {
    check_n(n)?;
    check_x(x)?;
    let (alpha, one_minus_alpha, beta) = alpha_beta(n, x);
    Ok(Params {
        n,
        x,
        p: 2.0 * x / (1.0 + x),
        m: m_of(n),
        beta,
        alpha,
        one_minus_alpha,
        x_tilde: x_tilde_from(x, alpha, one_minus_alpha),
        x_c: critical_x_conjectured(n).ok(),
        epsilon: epsilon_of(n)?,
    })
}

/// Largest ε with x̃(n, x) < 1/√3 for every x < 1/√3 + ε.
///
/// Bisects g(x) = x̃(n, x) − 1/√3 on [1/√3, 1). A sampled grid confirms g is increasing
/// first; otherwise the bracket shrinks to the first sign change on the grid.
pub fn epsilon_of(n: f64) -> Result<f64> {
    check_n(n)?;
    let x0 = 1.0 / 3f64.sqrt();
    let g = |x: f64| {
        let (alpha, oma, _) = alpha_beta(n, x);
        x_tilde_from(x, alpha, oma) - x0
    };
    const GRID: usize = 256;
    let hi_end = 1.0 - 1e-12;
    let grid: Vec<(f64, f64)> = (0..=GRID)
        .map(|i| {
            let x = x0 + (hi_end - x0) * i as f64 / GRID as f64;
            (x, g(x))
        })
        .collect();
    let (mut lo, mut hi) = if grid.windows(2).all(|w| w[1].1 > w[0].1) {
        (x0, hi_end)
    } else {
        match grid.windows(2).find(|w| w[0].1 < 0.0 && w[1].1 >= 0.0) {
            Some(w) => (w[0].0, w[1].0),
            None => (x0, hi_end),
        }
    };
    if g(hi) < 0.0 {
        return Ok(hi_end - x0);
    }
    while hi - lo > EPSILON_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) - x0)
}

/// x_c(n) = 1/√(2 + √(2 − n)).
pub fn critical_x_conjectured(n: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&n) {
        return Err(Error::OutOfRange { name: "n", value: n, expected: "0 <= n <= 2" });
    }
    Ok(1.0 / (2.0 + (2.0 - n).sqrt()).sqrt())
}

/// ω ∨ π.
pub fn superpose(domain: &Domain, omega: &EdgeConfig, pi: &EdgeConfig) -> Result<EdgeConfig> {
    if omega.domain_id() != domain.id() || pi.domain_id() != domain.id() {
        return Err(Error::DomainMismatch);
    }
    config::decompose_loops(domain, omega)?;
    omega.union(pi)
}

/// A loop configuration split into blue and red loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredConfig {
    pub blue: EdgeConfig,
    pub red: EdgeConfig,
    /// `true` = blue, in the order of [`config::decompose_loops`].
    pub colors: Vec<bool>,
}

/// Colours each loop blue with probability 1 − 1/n, one draw per loop.
pub fn color_loops<R: Rng + ?Sized>(
    domain: &Domain,
    omega: &EdgeConfig,
    n: f64,
    rng: &mut R,
) -> Result<ColoredConfig> {
    check_n(n)?;
    let dec = config::decompose_loops(domain, omega)?;
    let mut blue = EdgeConfig::empty(domain);
    let mut red = EdgeConfig::empty(domain);
    let mut colors = Vec::with_capacity(dec.loops.len());
    for l in &dec.loops {
        let is_blue = rng.random::<f64>() >= 1.0 / n;
        let target = if is_blue { &mut blue } else { &mut red };
        for &e in &l.edges {
            target.set(e, true);
        }
        colors.push(is_blue);
    }
    Ok(ColoredConfig { blue, red, colors })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoSheetSample {
    pub eta_left: EdgeConfig,
    pub eta_right: EdgeConfig,
    pub sigma: SpinConfig,
}

impl TwoSheetSample {
    /// η_L ≥ D₊(σ̃).
    pub fn invariant_holds(&self, domain: &Domain) -> bool {
        let (plus, _) = config::spin_edge_domains(domain, &self.sigma);
        plus.is_subset(&self.eta_left).unwrap_or(false)
    }
}

fn bernoulli_config<R: Rng + ?Sized>(domain: &Domain, q: f64, rng: &mut R) -> EdgeConfig {
    EdgeConfig::from_edges(domain, (0..domain.num_edges()).filter(|_| rng.random::<f64>() < q))
}

/// Two independent Perco_α sheets and the face spins they induce.
pub fn two_sheet<R: Rng + ?Sized>(domain: &Domain, alpha: f64, rng: &mut R) -> Result<TwoSheetSample> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange { name: "alpha", value: alpha, expected: "[0, 1]" });
    }
    let eta_left = bernoulli_config(domain, alpha, rng);
    let eta_right = bernoulli_config(domain, alpha, rng);
    let spins = domain
        .faces()
        .iter()
        .enumerate()
        .map(|(u, f)| {
            let all_open = f.edges.iter().all(|&e| {
                if domain.edge(e).left_face == Some(u) {
                    eta_left.get(e)
                } else {
                    eta_right.get(e)
                }
            });
            if all_open {
                Spin::Plus
            } else {
                Spin::Minus
            }
        })
        .collect();
    let sigma = SpinConfig::from_spins(domain, spins)?;
    Ok(TwoSheetSample { eta_left, eta_right, sigma })
}

/// I.i.d. face spins with P(+1) = β.
pub fn face_bernoulli_sample<R: Rng + ?Sized>(domain: &Domain, beta: f64, rng: &mut R) -> Result<SpinConfig> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::OutOfRange { name: "beta", value: beta, expected: "[0, 1]" });
    }
    let spins = (0..domain.num_faces())
        .map(|_| if rng.random::<f64>() < beta { Spin::Plus } else { Spin::Minus })
        .collect();
    SpinConfig::from_spins(domain, spins)
}

/// Exact law of the face-Bernoulli field P_β (bit set = spin +1).
pub fn face_bernoulli_law(domain: &Domain, beta: f64) -> Result<ExactDistribution> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::OutOfRange { name: "beta", value: beta, expected: "[0, 1]" });
    }
    let f = domain.num_faces();
    if f > MAX_STRASSEN_BITS {
        return Err(Error::TooLarge { what: "|F_D|", size: f, limit: MAX_STRASSEN_BITS });
    }
    let weights = (0u64..1 << f)
        .map(|s| {
            let plus = s.count_ones() as i32;
            beta.powi(plus) * (1.0 - beta).powi(f as i32 - plus)
        })
        .collect();
    ExactDistribution::from_weights(domain, Ground::Faces, weights)
}

/// Which checker produced a [`DominationReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    StrassenFlow,
    HolleyExhaustive,
}

/// A concrete counterexample, checkable by re-evaluating the quantities it names.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// An increasing event A (listed states) with lower(A) > upper(A).
    IncreasingEvent { states: Vec<u64>, lower_mass: f64, upper_mass: f64 },
    /// Flipping `face` to +1 from `spins` raises the probability by more than the bound.
    FaceFlip { spins: u64, face: usize, ratio: f64, bound: f64 },
    /// Holley triple (η, η̃, e) with lhs > rhs.
    EdgeTriple { eta: u64, eta_tilde: u64, edge: usize, lhs: f64, rhs: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominationReport {
    pub dominates: bool,
    pub method: Method,
    /// Flow value for Strassen; largest lhs/rhs ratio for Holley checks.
    pub worst: f64,
    pub witness: Option<Witness>,
}
