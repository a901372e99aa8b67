//! Exact laws of the blue/red colouring on small domains.

use std::collections::BTreeMap;

use serde::Serialize;

use super::check_n;
use crate::config::{self, EdgeConfig, SpinConfig};
use crate::error::{Error, Result};
use crate::hexlattice::Domain;
use crate::measures::{
    conditional_loop_measure, exact_distribution, z_loop, ExactDistribution, Ground, MeasureKind,
    WeightVector, MAX_TABLE_BITS,
};
use crate::sum::CompensatedSum;

/// Face limit for spin-level laws: one loop partition function per spin configuration.
const MAX_SPIN_FACES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prop31Report {
    /// Largest TV distance between the conditional law of ω_r and Loop(D∖ω_b, 1, x).
    pub max_conditional_tv: f64,
    /// Largest relative error of the closed-form marginal of ω_b.
    pub max_marginal_error: f64,
    pub blue_configs: usize,
}

fn check_spin_faces(domain: &Domain) -> Result<()> {
    if domain.num_faces() > MAX_SPIN_FACES {
        return Err(Error::TooLarge { what: "|F_D|", size: domain.num_faces(), limit: MAX_SPIN_FACES });
    }
    Ok(())
}

/// P(ω_b) = Z_loop(D∖ω_b, 1, x) / Z_loop(D, n, x) · (n−1)^{ℓ(ω_b)} x^{|ω_b|}.
fn blue_marginal(domain: &Domain, n: f64, x: f64, z: f64, blue: &EdgeConfig) -> Result<f64> {
    let loops = config::decompose_loops(domain, blue)?.loop_count();
    let rest = WeightVector::masked(domain, x, &blue.complement())?;
    Ok(z_loop(domain, 1.0, &rest)? / z * (n - 1.0).powi(loops as i32) * x.powi(blue.count_open() as i32))
}

/// Law of σ_b from the closed-form marginal of ω_b (bit set = spin +1).
pub fn blue_spin_law(domain: &Domain, n: f64, x: f64) -> Result<ExactDistribution> {
    check_n(n)?;
    check_spin_faces(domain)?;
    let z = z_loop(domain, n, &WeightVector::constant(domain, x)?)?;
    let weights = (0u64..1 << domain.num_faces())
        .map(|s| {
            let blue = config::loops_from_spins(domain, &SpinConfig::from_plus_mask(domain, s));
            blue_marginal(domain, n, x, z, &blue)
        })
        .collect::<Result<Vec<_>>>()?;
    ExactDistribution::from_weights(domain, Ground::Faces, weights)
}

/// Unnormalised joint weights of (ω_b, ω_r): x^{|ω|} (n−1)^{#blue}, grouped by ω_b.
fn joint_table(domain: &Domain, n: f64, x: f64) -> Result<BTreeMap<u64, Vec<(u64, f64)>>> {
    let loops = exact_distribution(MeasureKind::Loop { n: 1.0 }, domain, &WeightVector::constant(domain, x)?)?;
    let mut joint: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
    for (idx, &p) in loops.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let omega = EdgeConfig::from_index(domain, idx as u64);
        let dec = config::decompose_loops(domain, &omega)?;
        let masks: Vec<u64> = dec.loops.iter().map(|l| l.edges.iter().fold(0, |m, &e| m | 1 << e)).collect();
        let weight = x.powi(dec.open_edges as i32);
        for colouring in 0u64..1 << masks.len() {
            let blue = masks
                .iter()
                .enumerate()
                .filter(|(i, _)| colouring >> i & 1 == 1)
                .fold(0, |m, (_, &l)| m | l);
            let w = weight * (n - 1.0).powi(colouring.count_ones() as i32);
            joint.entry(blue).or_default().push((idx as u64 & !blue, w));
        }
    }
    Ok(joint)
}

/// Law of σ_b by summing the joint colouring table.
pub fn blue_spin_law_joint(domain: &Domain, n: f64, x: f64) -> Result<ExactDistribution> {
    check_n(n)?;
    check_spin_faces(domain)?;
    let joint = joint_table(domain, n, x)?;
    let mut weights = vec![0.0; 1 << domain.num_faces()];
    for (&blue, reds) in &joint {
        let spins = config::spins_from_loops(domain, &EdgeConfig::from_index(domain, blue))?;
        weights[spins.plus_mask() as usize] += reds.iter().map(|r| r.1).collect::<CompensatedSum>().value();
    }
    ExactDistribution::from_weights(domain, Ground::Faces, weights)
}

/// Exact check that, given ω_b, the red loops follow Loop(D∖ω_b, 1, x), and that the
/// blue marginal matches its closed form.
pub fn verify_prop31(domain: &Domain, n: f64, x: f64) -> Result<Prop31Report> {
    check_n(n)?;
    if domain.num_edges() > MAX_TABLE_BITS {
        return Err(Error::TooLarge { what: "|E|", size: domain.num_edges(), limit: MAX_TABLE_BITS });
    }
    let joint = joint_table(domain, n, x)?;
    let z = z_loop(domain, n, &WeightVector::constant(domain, x)?)?;
    let mut max_tv: f64 = 0.0;
    let mut max_err: f64 = 0.0;
    for (&blue, reds) in &joint {
        let total = reds.iter().map(|r| r.1).collect::<CompensatedSum>().value();
        let blue_cfg = EdgeConfig::from_index(domain, blue);
        let expected = conditional_loop_measure(domain, 1.0, x, &blue_cfg)?;
        let mut observed = vec![0.0; 1 << domain.num_edges()];
        for &(red, w) in reds {
            observed[red as usize] += w / total;
        }
        let tv = 0.5
            * observed
                .iter()
                .zip(expected.probs())
                .map(|(a, b)| (a - b).abs())
                .collect::<CompensatedSum>()
                .value();
        max_tv = max_tv.max(tv);
        let marginal = blue_marginal(domain, n, x, z, &blue_cfg)?;
        max_err = max_err.max((total / z - marginal).abs() / marginal);
    }
    Ok(Prop31Report { max_conditional_tv: max_tv, max_marginal_error: max_err, blue_configs: joint.len() })
}

/// Largest TV distance, over spin configurations ς, between Loop(D∖ω_b, 1, x) and the
/// product of independent loop measures on D₊(ς) and D₋(ς).
pub fn verify_decoupling(domain: &Domain, x: f64) -> Result<f64> {
    check_spin_faces(domain)?;
    if domain.num_edges() > MAX_TABLE_BITS {
        return Err(Error::TooLarge { what: "|E|", size: domain.num_edges(), limit: MAX_TABLE_BITS });
    }
    let mut worst: f64 = 0.0;
    for s in 0u64..1 << domain.num_faces() {
        let spins = SpinConfig::from_plus_mask(domain, s);
        let blue = config::loops_from_spins(domain, &spins);
        let (plus, minus) = config::spin_edge_domains(domain, &spins);
        let joint = conditional_loop_measure(domain, 1.0, x, &blue)?;
        let on_plus = conditional_loop_measure(domain, 1.0, x, &plus.complement())?;
        let on_minus = conditional_loop_measure(domain, 1.0, x, &minus.complement())?;
        let (pm, mm) = (plus.to_index(), minus.to_index());
        let tv = 0.5
            * (0u64..1 << domain.num_edges())
                .map(|i| {
                    let product = if i & !(pm | mm) == 0 { on_plus.prob(i & pm) * on_minus.prob(i & mm) } else { 0.0 };
                    (joint.prob(i) - product).abs()
                })
                .collect::<CompensatedSum>()
                .value();
        worst = worst.max(tv);
    }
    Ok(worst)
}
