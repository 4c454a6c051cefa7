//! The IIT4-style irreducibility baseline: intrinsic informations, causal
//! marginalization across directional cuts, phi_c / phi_e / phi_s, and the
//! normalized minimum-information-partition search.
//!
//! Severed inputs are replaced by independent uniform coin flips per
//! receiving node; the cut kernel factorizes over nodes. The MIP ranks
//! every directional cut-set by phi_s normalized by the number of severed
//! ordered pairs, with normalized phi_c, then cut size, then the cut
//! encoding as tie-breaks.

use crate::netspec::{State, TransitionModel};
use crate::partition::{directional_cut_sets, CutSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum Iit4Error {
    #[error("state {0} is unreachable (zero probability)")]
    Unreachable(State),
}

/// The maximal cause-effect pair for one present state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauseEffectState {
    pub a_prime: State,
    pub ii_c: f64,
    pub z_prime: State,
    pub ii_e: f64,
}

/// p(s) for every state under the uniform prior.
fn state_probability(tpm: &TransitionModel, s: State) -> f64 {
    let total = tpm.num_states() as f64;
    tpm.states().filter(|&a| tpm.step(a) == s).count() as f64 / total
}

/// Cause side: a' maximizing ii_c(s, a) = p_c(a|s) log2(p_c(s|a)/p_c(s)),
/// ties broken by lowest state index.
pub fn intrinsic_info_cause(tpm: &TransitionModel, s: State) -> Result<CauseEffectState, Iit4Error> {
    let pre: Vec<State> = tpm.states().filter(|&a| tpm.step(a) == s).collect();
    if pre.is_empty() {
        return Err(Iit4Error::Unreachable(s));
    }
    // Deterministic model: p_c(a|s) uniform over the preimage and
    // p_c(s|a) = 1 there, so every preimage state attains the maximum.
    let p_s = pre.len() as f64 / tpm.num_states() as f64;
    let ii_c = (1.0 / pre.len() as f64) * (1.0 / p_s).log2();
    Ok(CauseEffectState { a_prime: pre[0], ii_c, z_prime: 0, ii_e: 0.0 })
}

/// Effect side: z' maximizing p_e(z|s) log2(p_e(z|s)/p_e(z)); deterministic
/// models give p_e(z|s) in {0,1}, so z' = T(s). The unconstrained
/// repertoire p_e(z) averages the kernel over a uniform present state, so
/// any state may serve as the present one, reachable or not.
pub fn intrinsic_info_effect(tpm: &TransitionModel, s: State) -> Result<CauseEffectState, Iit4Error> {
    let z = tpm.step(s);
    let pe_z =
        tpm.states().filter(|&t| tpm.step(t) == z).count() as f64 / tpm.num_states() as f64;
    let ii_e = (1.0 / pe_z).log2();
    Ok(CauseEffectState { a_prime: 0, ii_c: 0.0, z_prime: z, ii_e })
}

/// Both halves of the maximal cause-effect state.
pub fn cause_effect_state(tpm: &TransitionModel, s: State) -> Result<CauseEffectState, Iit4Error> {
    let c = intrinsic_info_cause(tpm, s)?;
    let e = intrinsic_info_effect(tpm, s)?;
    Ok(CauseEffectState { a_prime: c.a_prime, ii_c: c.ii_c, z_prime: e.z_prime, ii_e: e.ii_e })
}

/// The cut conditional kernel p^theta(y | x): for each node, inputs whose
/// wire is severed are averaged over the uniform distribution of the
/// severed sources, independently per node; the kernel is the product of
/// the per-node probabilities. Rows sum to 1 by construction.
pub fn cut_kernel_probability(tpm: &TransitionModel, cut: &CutSet, x: State, y: State) -> f64 {
    let n = tpm.n();
    let mut p = 1.0;
    for node in 0..n {
        let severed = cut.severed_sources(node);
        let on = tpm.node_on_probability(node, x, &severed);
        let want = crate::netspec::bit(y, node, n);
        p *= if want == 1 { on } else { 1.0 - on };
        if p == 0.0 {
            return 0.0;
        }
    }
    p
}

/// phi values of one state over one cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiSplit {
    pub phi_c: f64,
    pub phi_e: f64,
    pub phi_s: f64,
}

/// phi_c(T, s, theta) = | p_c(a'|s) log2( p_c(s|a') / p^theta(s|a') ) |_+ .
/// A zero cut probability against a positive intact one yields +infinity,
/// reported as such.
pub fn phi_c(tpm: &TransitionModel, s: State, cut: &CutSet) -> Result<f64, Iit4Error> {
    let ce = intrinsic_info_cause(tpm, s)?;
    let pre_count = tpm.states().filter(|&a| tpm.step(a) == s).count();
    let pc_a = 1.0 / pre_count as f64;
    let cutp = cut_kernel_probability(tpm, cut, ce.a_prime, s);
    if cutp <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((pc_a * (1.0 / cutp).log2()).max(0.0))
}

/// phi_e(T, s, theta) with z' = T(s); same clamp and infinity handling.
pub fn phi_e(tpm: &TransitionModel, s: State, cut: &CutSet) -> Result<f64, Iit4Error> {
    let ce = intrinsic_info_effect(tpm, s)?;
    let cutp = cut_kernel_probability(tpm, cut, s, ce.z_prime);
    if cutp <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((1.0 / cutp).log2().max(0.0))
}

/// phi_s = min(phi_c, phi_e).
pub fn phi_s(tpm: &TransitionModel, s: State, cut: &CutSet) -> Result<PhiSplit, Iit4Error> {
    let c = phi_c(tpm, s, cut)?;
    let e = phi_e(tpm, s, cut)?;
    Ok(PhiSplit { phi_c: c, phi_e: e, phi_s: c.min(e) })
}

/// Result of the MIP search for one state.
#[derive(Debug, Clone, PartialEq)]
pub struct MipResult {
    pub cut: CutSet,
    pub phi: PhiSplit,
    /// phi_s divided by the severed-pair count of the winning cut.
    pub normalized: f64,
}

/// Finds the minimum-information partition of state `s` over every
/// directional cut-set. `normalized` divides phi_s by the severed-pair
/// count before minimizing; the reported values are unnormalized.
pub fn find_mip_2023(
    tpm: &TransitionModel,
    s: State,
    normalized: bool,
) -> Result<MipResult, Iit4Error> {
    let mut best: Option<(f64, f64, usize, MipResult)> = None;
    for cut in directional_cut_sets(tpm.n()) {
        let phi = phi_s(tpm, s, &cut)?;
        let len = cut.len() as f64;
        let (key_s, key_c) = if normalized {
            (phi.phi_s / len, phi.phi_c / len)
        } else {
            (phi.phi_s, phi.phi_c)
        };
        let candidate = (key_s, key_c, cut.len(), MipResult { cut, phi, normalized: key_s });
        let replace = match &best {
            None => true,
            Some((bs, bc, blen, bres)) => {
                let a = (key_s, key_c, std::cmp::Reverse(candidate.2));
                let b = (*bs, *bc, std::cmp::Reverse(*blen));
                match a.partial_cmp(&b) {
                    Some(std::cmp::Ordering::Less) => true,
                    Some(std::cmp::Ordering::Equal) => candidate.3.cut < bres.cut,
                    _ => false,
                }
            }
        };
        if replace {
            best = Some(candidate);
        }
    }
    Ok(best.expect("n >= 2 networks always have cuts").3)
}

/// The per-state phi values at the normalized MIP, averaged over p(s).
#[derive(Debug, Clone, Default)]
pub struct MipSummary {
    pub mean_phi_c: f64,
    pub mean_phi_e: f64,
    pub mean_phi_s: f64,
    pub min_phi_c: f64,
    pub max_phi_c: f64,
    /// Set when any state produced an infinite phi; such states are
    /// excluded from the means and flagged.
    pub infinite: bool,
}

/// Runs the normalized MIP for every reachable state and aggregates.
pub fn mip_summary(tpm: &TransitionModel) -> Result<MipSummary, Iit4Error> {
    let mut out = MipSummary { min_phi_c: f64::INFINITY, max_phi_c: f64::NEG_INFINITY, ..Default::default() };
    let mut mass = 0.0;
    for s in tpm.states() {
        let p = state_probability(tpm, s);
        if p <= 0.0 {
            continue;
        }
        let mip = find_mip_2023(tpm, s, true)?;
        if !mip.phi.phi_c.is_finite() || !mip.phi.phi_e.is_finite() {
            out.infinite = true;
            continue;
        }
        mass += p;
        out.mean_phi_c += p * mip.phi.phi_c;
        out.mean_phi_e += p * mip.phi.phi_e;
        out.mean_phi_s += p * mip.phi.phi_s;
        out.min_phi_c = out.min_phi_c.min(mip.phi.phi_c);
        out.max_phi_c = out.max_phi_c.max(mip.phi.phi_c);
    }
    if out.infinite && mass > 0.0 {
        // means over the finite states only, renormalized
        out.mean_phi_c /= mass;
        out.mean_phi_e /= mass;
        out.mean_phi_s /= mass;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netspec::{build_tpm, builtin, parse_state};
    use crate::partition::{CutSet, Partition, PartitionMode};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    fn tpm(name: &str) -> TransitionModel {
        build_tpm(&builtin(name).unwrap())
    }

    #[test]
    fn cause_side_examples() {
        let t = tpm("GET-GET");
        let s = parse_state("01", 2).unwrap();
        let ce = intrinsic_info_cause(&t, s).unwrap();
        assert_eq!(ce.a_prime, parse_state("10", 2).unwrap());
        close(ce.ii_c, 2.0, 1e-12);

        let t = tpm("ZERO-ZERO");
        close(intrinsic_info_cause(&t, 0).unwrap().ii_c, 0.0, 1e-12);

        let t = tpm("AND-ZERO");
        let s = parse_state("10", 2).unwrap();
        let ce = intrinsic_info_cause(&t, s).unwrap();
        assert_eq!(ce.a_prime, parse_state("11", 2).unwrap());
        close(ce.ii_c, 2.0, 1e-12);
    }

    #[test]
    fn effect_side_examples() {
        let t = tpm("GET-GET");
        let s = parse_state("01", 2).unwrap();
        let ce = intrinsic_info_effect(&t, s).unwrap();
        assert_eq!(ce.z_prime, parse_state("10", 2).unwrap());
        close(ce.ii_e, 2.0, 1e-12);

        let t = tpm("ZERO-ZERO");
        close(intrinsic_info_effect(&t, 0).unwrap().ii_e, 0.0, 1e-12);

        let t = tpm("AND-XOR");
        let s = parse_state("11", 2).unwrap();
        let ce = intrinsic_info_effect(&t, s).unwrap();
        assert_eq!(ce.z_prime, parse_state("10", 2).unwrap());
        close(ce.ii_e, 2.0, 1e-12);
    }

    #[test]
    fn unreachable_state_is_an_error() {
        let t = tpm("AND-ZERO");
        let s = parse_state("01", 2).unwrap();
        assert_eq!(intrinsic_info_cause(&t, s), Err(Iit4Error::Unreachable(s)));
    }

    #[test]
    fn cut_kernel_examples() {
        // empty cut: kernel equals the deterministic transition
        let t = tpm("AND-ZERO");
        let none = CutSet::from_pairs(vec![]);
        let a = parse_state("11", 2).unwrap();
        close(cut_kernel_probability(&t, &none, a, parse_state("10", 2).unwrap()), 1.0, 1e-15);

        // AND-ZERO, node 0's wire from node 1 severed: p = 1/2
        let cut = CutSet::from_pairs(vec![(1, 0)]);
        close(cut_kernel_probability(&t, &cut, a, parse_state("10", 2).unwrap()), 0.5, 1e-15);

        // GET-GET with both wires severed: every row is uniform
        let t = tpm("GET-GET");
        let full = CutSet::full_cut(&Partition::parse("1|2", 2, PartitionMode::Plain).unwrap());
        for x in t.states() {
            for y in t.states() {
                close(cut_kernel_probability(&t, &full, x, y), 0.25, 1e-15);
            }
        }
    }

    #[test]
    fn cut_kernel_rows_sum_to_one() {
        let t = tpm("123");
        for cut in crate::partition::directional_cut_sets(3) {
            for x in t.states() {
                let total: f64 = t.states().map(|y| cut_kernel_probability(&t, &cut, x, y)).sum();
                close(total, 1.0, 1e-12);
            }
        }
    }

    #[test]
    fn mip_reproduces_published_doublet_means() {
        for (name, want_c, want_s) in [
            ("GET-GET", 2.0, 2.0),
            ("KEEP-KEEP", 0.0, 0.0),
            ("XOR-XOR", 1.0, 1.0),
            ("AND-GET", 0.75, 0.5),
            ("AND-ZERO", 0.0, 0.0),
        ] {
            let summary = mip_summary(&tpm(name)).unwrap();
            close(summary.mean_phi_c, want_c, 1e-9);
            close(summary.mean_phi_s, want_s, 1e-9);
            assert!(!summary.infinite, "{name}");
        }
    }

    #[test]
    fn phi_s_is_min_of_halves_everywhere() {
        let t = tpm("AND-XOR");
        for cut in crate::partition::directional_cut_sets(2) {
            for s in t.states() {
                if state_probability(&t, s) <= 0.0 {
                    continue;
                }
                let split = phi_s(&t, s, &cut).unwrap();
                assert_eq!(split.phi_s, split.phi_c.min(split.phi_e));
            }
        }
    }
}
