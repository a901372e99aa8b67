use super::{blue_spin_law, check_n, check_x, m_of, x_tilde_for_alpha, DominationReport, Method, Witness};
use crate::error::{Error, Result};
use crate::hexlattice::Domain;
use crate::measures::Compact;

/// Edge limit for the exhaustive (η, η̃, e) loop.
const MAX_HOLLEY_EDGES: usize = 12;

/// Relative slack for ratios that hold with equality.
const RATIO_SLACK: f64 = 1e-12;

/// Checks the single-face-flip bound P(σ_b = ς + u) / P(σ_b = ς) ≤ (2/x)⁶ M for every
/// spin configuration ς and face u with ς(u) = −1.
pub fn holley_check_blue_spins(domain: &Domain, n: f64, x: f64) -> Result<DominationReport> {
    check_n(n)?;
    check_x(x)?;
    let law = blue_spin_law(domain, n, x)?;
    let bound = (2.0 / x).powi(6) * m_of(n);
    let mut worst: f64 = 0.0;
    let mut witness = None;
    for s in 0u64..1 << domain.num_faces() {
        for u in (0..domain.num_faces()).filter(|u| s >> u & 1 == 0) {
            let ratio = law.prob(s | 1 << u) / law.prob(s);
            if ratio > worst {
                worst = ratio;
                if ratio > bound * (1.0 + RATIO_SLACK) {
                    witness = Some(Witness::FaceFlip { spins: s, face: u, ratio, bound });
                }
            }
        }
    }
    Ok(DominationReport { dominates: witness.is_none(), method: Method::HolleyExhaustive, worst, witness })
}

/// Exhaustive check of Perco_α[Φ_{D,x}(η∪e)] / Perco_α[Φ_{D,x}(η)] ≤ φ_x̃(e | η̃)
/// for all η ⊆ η̃ and e ∉ η̃, with x̃ derived from (x, α).
pub fn holley_check_lemma42(domain: &Domain, x: f64, alpha: f64) -> Result<DominationReport> {
    let x_tilde = x_tilde_for_alpha(x, alpha)?;
    holley_check_lemma42_with(domain, x, alpha, x_tilde)
}

/// As [`holley_check_lemma42`] with an explicit x̃.
pub fn holley_check_lemma42_with(domain: &Domain, x: f64, alpha: f64, x_tilde: f64) -> Result<DominationReport> {
    check_x(x)?;
    check_x(x_tilde)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfRange { name: "alpha", value: alpha, expected: "0 < alpha <= 1" });
    }
    let edges = domain.num_edges();
    if edges > MAX_HOLLEY_EDGES {
        return Err(Error::TooLarge { what: "|E|", size: edges, limit: MAX_HOLLEY_EDGES });
    }
    let compact = Compact::new(domain)?;
    let mu = averaged_fk(&compact, edges, x, alpha);
    let full = (1u64 << edges) - 1;
    let phi_tilde = |connected: bool| if connected { 2.0 * x_tilde / (1.0 - x_tilde) } else { x_tilde / (1.0 - x_tilde) };

    let mut worst: f64 = 0.0;
    let mut witness = None;
    for eta_tilde in 0..=full {
        for e in (0..edges).filter(|e| eta_tilde >> e & 1 == 0) {
            let rhs = phi_tilde(compact.connects(eta_tilde, e));
            let mut eta = eta_tilde;
            loop {
                let lhs = mu[(eta | 1 << e) as usize] / mu[eta as usize];
                let ratio = lhs / rhs;
                if ratio > worst {
                    worst = ratio;
                    if ratio > 1.0 + RATIO_SLACK {
                        witness = Some(Witness::EdgeTriple { eta, eta_tilde, edge: e, lhs, rhs });
                    }
                }
                if eta == 0 {
                    break;
                }
                eta = (eta - 1) & eta_tilde;
            }
        }
    }
    Ok(DominationReport { dominates: witness.is_none(), method: Method::HolleyExhaustive, worst, witness })
}

/// μ(η) = Σ_{D ⊇ η} α^{|D|}(1−α)^{|E∖D|} Φ_{D,x}(η), with FK measures on sub-edge-sets D.
///
/// Both Z_FK(D) and the sum over D ⊇ η are subset/superset transforms over the 2^|E|
/// edge sets.
fn averaged_fk(compact: &Compact, edges: usize, x: f64, alpha: f64) -> Vec<f64> {
    let size = 1usize << edges;
    let p = 2.0 * x / (1.0 + x);
    let odds = p / (1.0 - p);
    let k = |m: usize| compact.components(m as u64) as i32;

    // Z(D) = (1−p)^{|D|} Σ_{η ⊆ D} odds^{|η|} 2^{k(η)}.
    let mut z: Vec<f64> = (0..size).map(|m| odds.powi(m.count_ones() as i32) * 2f64.powi(k(m))).collect();
    for i in 0..edges {
        for m in 0..size {
            if m >> i & 1 == 1 {
                z[m] += z[m ^ 1 << i];
            }
        }
    }
    let mut h: Vec<f64> = (0..size)
        .map(|d| {
            let open = d.count_ones() as i32;
            let zd = z[d] * (1.0 - p).powi(open);
            alpha.powi(open) * (1.0 - alpha).powi(edges as i32 - open) * (1.0 - p).powi(open) / zd
        })
        .collect();
    for i in 0..edges {
        for m in 0..size {
            if m >> i & 1 == 0 {
                h[m] += h[m | 1 << i];
            }
        }
    }
    (0..size).map(|m| 2f64.powi(k(m)) * odds.powi(m.count_ones() as i32) * h[m]).collect()
}
