use super::{DominationReport, Method, Witness};
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::measures::ExactDistribution;

/// Largest ground set for the flow test.
pub const MAX_STRASSEN_BITS: usize = 12;

const FLOW_TOLERANCE: f64 = 1e-10;

/// Decides whether `lower` is stochastically dominated by `upper`, i.e. whether a coupling
/// with X ≤ Y pointwise exists.
///
/// Max-flow from the source to a copy of every state ξ (capacity lower(ξ)), on to the
/// matching state on the upper side, up the poset one bit at a time, and into the sink
/// (capacity upper(ξ)). On failure the states reachable in the residual graph form an
/// increasing event with lower(A) > upper(A).
pub fn strassen_dominates(lower: &ExactDistribution, upper: &ExactDistribution) -> Result<DominationReport> {
    lower.same_space(upper)?;
    let bits = lower.bits();
    if bits > MAX_STRASSEN_BITS {
        return Err(Error::TooLarge { what: "configuration bits", size: bits, limit: MAX_STRASSEN_BITS });
    }
    let states = 1usize << bits;
    let (source, sink) = (2 * states, 2 * states + 1);
    let left = |s: usize| s;
    let right = |s: usize| states + s;
    let mut g = FlowNetwork::new(2 * states + 2);
    for s in 0..states {
        g.add_edge(source, left(s), lower.probs()[s]);
        g.add_edge(left(s), right(s), f64::INFINITY);
        for i in 0..bits {
            if s >> i & 1 == 0 {
                g.add_edge(right(s), right(s | 1 << i), f64::INFINITY);
            }
        }
        g.add_edge(right(s), sink, upper.probs()[s]);
    }
    let flow = g.max_flow(source, sink);
    let total = lower.total();
    if flow >= total - FLOW_TOLERANCE {
        return Ok(DominationReport { dominates: true, method: Method::StrassenFlow, worst: flow, witness: None });
    }
    let reach = g.reachable(source);
    let event: Vec<u64> = (0..states).filter(|&s| reach[right(s)]).map(|s| s as u64).collect();
    let mass = |d: &ExactDistribution| event.iter().map(|&s| d.prob(s)).sum::<f64>();
    let witness = Witness::IncreasingEvent { lower_mass: mass(lower), upper_mass: mass(upper), states: event };
    Ok(DominationReport { dominates: false, method: Method::StrassenFlow, worst: flow, witness: Some(witness) })
}
