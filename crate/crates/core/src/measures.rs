//! The four synergy-based spacetime integration measures and MIP search.
//!
//! Every measure evaluates a synergistic intrinsic difference into the
//! whole present state s; the partition is applied to the past and future
//! only. Exact union solves are limited to `EXACT_PREDICTOR_LIMIT`
//! predictors; beyond that the max-substitution upper bound stands in and
//! the result is flagged `bounded`.

use crate::iit4::{self, Iit4Error};
use crate::netspec::{State, TransitionModel};
use crate::partition::{bipartitions, set_partitions, CutSet, Partition, PartitionError, PartitionMode};
use crate::pid::{
    synergistic_id, PidError, PredictorSystem, SolverConfig, EXACT_PREDICTOR_LIMIT,
};
use crate::probcore::{CausalTriple, VariableView};
use thiserror::Error;

/// Enumeration budget for MIP search.
pub const MIP_MAX_NODES: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Pid(#[from] PidError),
    #[error(transparent)]
    Iit4(#[from] Iit4Error),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("MIP enumeration budget exceeded: n = {0} > {MIP_MAX_NODES}")]
    Budget(usize),
    #[error("measure {0:?} needs a transition model")]
    NeedsTpm(MeasureKind),
    #[error("state {0} is unreachable")]
    Unreachable(State),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum MeasureKind {
    S1,
    S2,
    S3,
    S4,
    Iit4,
}

/// Which temporal side of a measure to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Side {
    Cause,
    Effect,
    Both,
}

/// Solver diagnostics carried by a measure value.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct SolverDiag {
    pub feasibility_residual: f64,
    pub optimality_gap: f64,
    pub iterations: usize,
}

/// A measure value tagged with everything needed to interpret it.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MeasureResult {
    pub kind: MeasureKind,
    pub side: Side,
    pub value: f64,
    pub state: State,
    /// 1-based block rendering of the partition (or severed pairs for the
    /// IIT4 baseline).
    pub partition: String,
    /// The intrinsic-difference bound used for normalization.
    pub normalizer: f64,
    /// True when any contributing term is the proxy upper bound.
    pub bounded: bool,
    /// True when a negative raw value was clamped to zero.
    pub clamped: bool,
    /// True when the value is infinite (IIT4 baseline only).
    pub infinite: bool,
    pub diagnostics: Option<SolverDiag>,
}

/// One side's synergistic-ID evaluation: exact when the predictor count
/// permits, otherwise the proxy bound.
struct SideValue {
    value: f64,
    bounded: bool,
    clamped: bool,
    diag: Option<SolverDiag>,
}

fn eval_sid(
    triple: &CausalTriple,
    predictors: &[Vec<VariableView>],
    s: State,
    cfg: SolverConfig,
) -> Result<SideValue, MeasureError> {
    let sys = PredictorSystem::from_triple(triple, predictors)?;
    let y = sys.target_index(u64::from(s)).map_err(|_| MeasureError::Unreachable(s))?;
    if predictors.len() > EXACT_PREDICTOR_LIMIT {
        return Ok(SideValue {
            value: sys.union_max_upper_proxy(y),
            bounded: true,
            clamped: false,
            diag: None,
        });
    }
    let union = sys.solve_union(cfg)?;
    let sid = synergistic_id(&sys, &union, y)?;
    Ok(SideValue {
        value: sid.value,
        bounded: false,
        clamped: sid.clamped,
        diag: Some(SolverDiag {
            feasibility_residual: union.feasibility_residual,
            optimality_gap: union.optimality_gap,
            iterations: union.iterations,
        }),
    })
}

fn past_blocks(partition: &Partition) -> Vec<Vec<VariableView>> {
    partition.blocks().iter().map(|b| vec![VariableView::past(b.clone())]).collect()
}

fn future_blocks(partition: &Partition) -> Vec<Vec<VariableView>> {
    partition.blocks().iter().map(|b| vec![VariableView::future(b.clone())]).collect()
}

/// The 2k sources of a partition: past blocks then future blocks.
fn sources(partition: &Partition) -> Vec<Vec<VariableView>> {
    let mut out = past_blocks(partition);
    out.extend(future_blocks(partition));
    out
}

/// ID[p(A,Z) -> s]: the bound used for normalization.
pub fn id_past_future(triple: &CausalTriple, s: State) -> Result<f64, MeasureError> {
    let all: Vec<usize> = (0..triple.n()).collect();
    let sys = PredictorSystem::from_triple(
        triple,
        &[vec![VariableView::past(all.clone()), VariableView::future(all)]],
    )?;
    let y = sys.target_index(u64::from(s)).map_err(|_| MeasureError::Unreachable(s))?;
    Ok(sys.id_full(y))
}

/// ID[p(A) -> s] (cause side) or ID[p(Z) -> s] (effect side).
fn id_side(triple: &CausalTriple, s: State, side: Side) -> Result<f64, MeasureError> {
    let all: Vec<usize> = (0..triple.n()).collect();
    let views = match side {
        Side::Cause => vec![VariableView::past(all)],
        Side::Effect => vec![VariableView::future(all)],
        Side::Both => {
            return id_past_future(triple, s);
        }
    };
    let sys = PredictorSystem::from_triple(triple, &[views])?;
    let y = sys.target_index(u64::from(s)).map_err(|_| MeasureError::Unreachable(s))?;
    Ok(sys.id_full(y))
}

fn assemble(
    kind: MeasureKind,
    side: Side,
    value: SideValue,
    state: State,
    partition: &Partition,
    normalizer: f64,
) -> MeasureResult {
    MeasureResult {
        kind,
        side,
        value: value.value,
        state,
        partition: partition.render(),
        normalizer,
        bounded: value.bounded,
        clamped: value.clamped,
        infinite: false,
        diagnostics: value.diag,
    }
}

/// Measure 1, matching the baseline shape: the synergistic intrinsic
/// difference of the partitioned past (cause side), of the partitioned
/// future (effect side), or the minimum of the two.
pub fn phi_s1(
    triple: &CausalTriple,
    s: State,
    partition: &Partition,
    side: Side,
    cfg: SolverConfig,
) -> Result<MeasureResult, MeasureError> {
    let normalizer = id_side(triple, s, side)?;
    match side {
        Side::Cause => {
            let v = eval_sid(triple, &past_blocks(partition), s, cfg)?;
            Ok(assemble(MeasureKind::S1, side, v, s, partition, normalizer))
        }
        Side::Effect => {
            let v = eval_sid(triple, &future_blocks(partition), s, cfg)?;
            Ok(assemble(MeasureKind::S1, side, v, s, partition, normalizer))
        }
        Side::Both => {
            let c = eval_sid(triple, &past_blocks(partition), s, cfg)?;
            let e = eval_sid(triple, &future_blocks(partition), s, cfg)?;
            let (value, diag) = if c.value <= e.value { (c.value, c.diag) } else { (e.value, e.diag) };
            Ok(MeasureResult {
                kind: MeasureKind::S1,
                side,
                value,
                state: s,
                partition: partition.render(),
                normalizer,
                bounded: c.bounded || e.bounded,
                clamped: c.clamped || e.clamped,
                infinite: false,
                diagnostics: diag,
            })
        }
    }
}

/// Measure 2: synergy across all 2k spacetime sources.
pub fn phi_s2(
    triple: &CausalTriple,
    s: State,
    partition: &Partition,
    cfg: SolverConfig,
) -> Result<MeasureResult, MeasureError> {
    let normalizer = id_past_future(triple, s)?;
    let v = eval_sid(triple, &sources(partition), s, cfg)?;
    Ok(assemble(MeasureKind::S2, Side::Both, v, s, partition, normalizer))
}

/// Measure 3: synergy across k spatially disjoint parts through time;
/// each predictor is the joint of one block's past and future.
pub fn phi_s3(
    triple: &CausalTriple,
    s: State,
    partition: &Partition,
    cfg: SolverConfig,
) -> Result<MeasureResult, MeasureError> {
    let normalizer = id_past_future(triple, s)?;
    let predictors: Vec<Vec<VariableView>> = partition
        .blocks()
        .iter()
        .map(|b| vec![VariableView::past(b.clone()), VariableView::future(b.clone())])
        .collect();
    let v = eval_sid(triple, &predictors, s, cfg)?;
    Ok(assemble(MeasureKind::S3, Side::Both, v, s, partition, normalizer))
}

/// Measure 4: synergy across the 2k leave-one-out source subsets, each
/// treated as one composite predictor.
pub fn phi_s4(
    triple: &CausalTriple,
    s: State,
    partition: &Partition,
    cfg: SolverConfig,
) -> Result<MeasureResult, MeasureError> {
    let normalizer = id_past_future(triple, s)?;
    let srcs = sources(partition);
    let predictors: Vec<Vec<VariableView>> = (0..srcs.len())
        .map(|skip| {
            srcs.iter()
                .enumerate()
                .filter(|&(j, _)| j != skip)
                .flat_map(|(_, views)| views.clone())
                .collect()
        })
        .collect();
    let v = eval_sid(triple, &predictors, s, cfg)?;
    Ok(assemble(MeasureKind::S4, Side::Both, v, s, partition, normalizer))
}

/// One comparison in the ordering chain.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ChainLink {
    pub label: String,
    pub holds: bool,
    /// A failed comparison is only a violation when both sides are exact
    /// solves; a proxy on either side makes the failure inconclusive.
    pub violation: bool,
}

/// Report of the chain 0 <= S4 <= S3 <= S2 <= ID[p(A,Z) -> s].
#[derive(Debug, Clone, serde::Serialize)]
pub struct OrderingReport {
    pub s4: MeasureResult,
    pub s3: MeasureResult,
    pub s2: MeasureResult,
    pub id_bound: f64,
    pub links: Vec<ChainLink>,
    pub ok: bool,
}

/// Evaluates the chain with proxy-aware slack; report-only, never panics
/// on a violation.
pub fn ordering_check(
    triple: &CausalTriple,
    s: State,
    partition: &Partition,
    cfg: SolverConfig,
) -> Result<OrderingReport, MeasureError> {
    let s2 = phi_s2(triple, s, partition, cfg)?;
    let s3 = phi_s3(triple, s, partition, cfg)?;
    let s4 = phi_s4(triple, s, partition, cfg)?;
    let id_bound = id_past_future(triple, s)?;
    let tol = 1e-6;
    let mut links = Vec::new();
    let link = |label: &str, lo: f64, hi: f64, any_proxy: bool| ChainLink {
        label: label.to_string(),
        holds: lo <= hi + tol,
        violation: lo > hi + tol && !any_proxy,
    };
    links.push(link("0 <= S4", 0.0, s4.value, false));
    links.push(link("S4 <= S3", s4.value, s3.value, s4.bounded || s3.bounded));
    links.push(link("S3 <= S2", s3.value, s2.value, s3.bounded || s2.bounded));
    links.push(link("S2 <= ID[A,Z]", s2.value, id_bound, s2.bounded));
    let ok = links.iter().all(|l| !l.violation);
    Ok(OrderingReport { s4, s3, s2, id_bound, links, ok })
}

/// How the MIP search scores candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Normalization {
    Normalized,
    Unnormalized,
}

/// Winning partition of a MIP search: a plain partition for the synergy
/// measures, a directional cut for the baseline.
#[derive(Debug, Clone)]
pub enum MipChoice {
    Partition(Partition),
    Cut(CutSet),
}

impl MipChoice {
    pub fn render(&self) -> String {
        match self {
            MipChoice::Partition(p) => p.render(),
            MipChoice::Cut(c) => c.render(),
        }
    }
}

fn synergy_measure_at(
    kind: MeasureKind,
    side: Side,
    triple: &CausalTriple,
    s: State,
    partition: &Partition,
    cfg: SolverConfig,
) -> Result<MeasureResult, MeasureError> {
    match kind {
        MeasureKind::S1 => phi_s1(triple, s, partition, side, cfg),
        MeasureKind::S2 => phi_s2(triple, s, partition, cfg),
        MeasureKind::S3 => phi_s3(triple, s, partition, cfg),
        MeasureKind::S4 => phi_s4(triple, s, partition, cfg),
        MeasureKind::Iit4 => unreachable!("baseline handled separately"),
    }
}

/// Finds the minimum-information partition for one state and measure.
///
/// Synergy kinds: unnormalized mode enumerates bipartitions only (the
/// unnormalized minimizer is always a bipartition); normalized mode
/// enumerates every plain partition, dividing by the intrinsic-difference
/// bound and excluding partitions whose bound is zero (their value is
/// exactly zero). The reported value is always the unnormalized one at the
/// winning partition. Ties break lexicographically on the block encoding.
///
/// The IIT4 kind delegates to the directional-cut search and needs `tpm`.
pub fn find_mip(
    triple: &CausalTriple,
    tpm: Option<&TransitionModel>,
    s: State,
    kind: MeasureKind,
    side: Side,
    normalization: Normalization,
    cfg: SolverConfig,
) -> Result<(MipChoice, MeasureResult), MeasureError> {
    let n = triple.n();
    if n > MIP_MAX_NODES {
        return Err(MeasureError::Budget(n));
    }
    if kind == MeasureKind::Iit4 {
        let tpm = tpm.ok_or(MeasureError::NeedsTpm(kind))?;
        let mip = iit4::find_mip_2023(tpm, s, normalization == Normalization::Normalized)?;
        let value = match side {
            Side::Cause => mip.phi.phi_c,
            Side::Effect => mip.phi.phi_e,
            Side::Both => mip.phi.phi_s,
        };
        let result = MeasureResult {
            kind,
            side,
            value,
            state: s,
            partition: mip.cut.render(),
            normalizer: mip.cut.len() as f64,
            bounded: false,
            clamped: false,
            infinite: !value.is_finite(),
            diagnostics: None,
        };
        return Ok((MipChoice::Cut(mip.cut), result));
    }

    let candidates: Vec<Partition> = match normalization {
        Normalization::Unnormalized => bipartitions(n, PartitionMode::Plain),
        Normalization::Normalized => set_partitions(n)
            .into_iter()
            .map(|blocks| Partition::new(blocks, n, PartitionMode::Plain).unwrap())
            .collect(),
    };
    let mut best: Option<(f64, MeasureResult, Partition)> = None;
    let mut all_excluded = true;
    for partition in candidates {
        let result = synergy_measure_at(kind, side, triple, s, &partition, cfg)?;
        let score = match normalization {
            Normalization::Unnormalized => result.value,
            Normalization::Normalized => {
                if result.normalizer <= 1e-12 {
                    // zero-bound partition: the measure is exactly zero
                    // there; excluded from the normalized minimization.
                    continue;
                }
                result.value / result.normalizer
            }
        };
        all_excluded = false;
        let replace = match &best {
            None => true,
            Some((bs, _, bp)) => {
                score < *bs - 0.0 || (score == *bs && partition.blocks() < bp.blocks())
            }
        };
        if replace {
            best = Some((score, result, partition));
        }
    }
    match best {
        Some((_, result, partition)) => Ok((MipChoice::Partition(partition), result)),
        None if all_excluded => {
            // every candidate had a zero bound: the measure is zero
            let partition = bipartitions(n, PartitionMode::Plain).into_iter().next().unwrap();
            let mut result = synergy_measure_at(kind, side, triple, s, &partition, cfg)?;
            result.value = 0.0;
            Ok((MipChoice::Partition(partition), result))
        }
        None => unreachable!("candidate list is never empty"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netspec::{build_tpm, builtin, parse_state};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    fn setup(name: &str) -> (CausalTriple, TransitionModel) {
        let tpm = build_tpm(&builtin(name).unwrap());
        (CausalTriple::from_tpm(&tpm), tpm)
    }

    fn doublet_partition() -> Partition {
        Partition::parse("1|2", 2, PartitionMode::Plain).unwrap()
    }

    #[test]
    fn zero_zero_measures_vanish() {
        let (triple, _) = setup("ZERO-ZERO");
        let p = doublet_partition();
        let cfg = SolverConfig::default();
        assert_eq!(phi_s1(&triple, 0, &p, Side::Both, cfg).unwrap().value, 0.0);
        assert_eq!(phi_s2(&triple, 0, &p, cfg).unwrap().value, 0.0);
        assert_eq!(phi_s3(&triple, 0, &p, cfg).unwrap().value, 0.0);
        assert_eq!(phi_s4(&triple, 0, &p, cfg).unwrap().value, 0.0);
    }

    #[test]
    fn get_get_s3_is_zero_everywhere() {
        // Each joint predictor A_i Z_i pins the full past, leaving no
        // strictly synergistic residual.
        let (triple, _) = setup("GET-GET");
        let p = doublet_partition();
        for (&s, _) in &triple.state_marginal() {
            let r = phi_s3(&triple, s, &p, SolverConfig::with_tol(1e-8)).unwrap();
            close(r.value, 0.0, 1e-5);
            assert!(!r.bounded);
        }
    }

    #[test]
    fn s2_and_s4_report_proxy_bounds() {
        let (triple, _) = setup("AND-ZERO");
        let p = doublet_partition();
        let cfg = SolverConfig::default();
        let s2 = phi_s2(&triple, 0, &p, cfg).unwrap();
        assert!(s2.bounded, "2k = 4 predictors exceed the exact limit");
        let s4 = phi_s4(&triple, 0, &p, cfg).unwrap();
        assert!(s4.bounded);
        close(s4.value, 0.0, 1e-12);
    }

    #[test]
    fn deterministic_networks_have_zero_s4() {
        let cfg = SolverConfig::default();
        for spec in crate::netspec::builtin_battery() {
            let tpm = build_tpm(&spec);
            let triple = CausalTriple::from_tpm(&tpm);
            for part in bipartitions(triple.n(), PartitionMode::Plain) {
                for (&s, _) in &triple.state_marginal() {
                    let r = phi_s4(&triple, s, &part, cfg).unwrap();
                    close(r.value, 0.0, 1e-9);
                }
            }
        }
    }

    #[test]
    fn ordering_chain_on_deterministic_battery_state() {
        let (triple, _) = setup("XOR-XOR");
        let p = doublet_partition();
        let report = ordering_check(&triple, 0, &p, SolverConfig::with_tol(1e-8)).unwrap();
        assert!(report.ok, "{:?}", report.links);
    }

    #[test]
    fn ordering_chain_on_stochastic_kernel() {
        // Noisy XOR-like channel: node 0 becomes the parity with error 0.25,
        // node 1 stays off. Exercises the non-deterministic path.
        let mut kernel = Vec::new();
        for a in 0..4u16 {
            let parity = ((a >> 1) ^ a) & 1;
            let on = parity << 1;
            let off = (1 - parity) << 1;
            kernel.push(vec![(on, 0.75), (off, 0.25)]);
        }
        let triple = CausalTriple::from_stochastic_kernel(2, &kernel).unwrap();
        let p = doublet_partition();
        for (&s, _) in &triple.state_marginal().clone() {
            let report = ordering_check(&triple, s, &p, SolverConfig::with_tol(1e-7)).unwrap();
            assert!(report.ok, "state {s}: {:?}", report.links);
            assert!(report.s4.value >= 0.0);
            assert!(report.s4.bounded && report.s2.bounded, "2k = 4 predictors use the proxy");
            assert!(report.s3.value >= -1e-9 && report.s3.value <= report.id_bound + 1e-6);
        }
    }

    #[test]
    fn doublet_mip_is_the_only_bipartition() {
        let (triple, tpm) = setup("XOR-XOR");
        let (choice, _) = find_mip(
            &triple,
            Some(&tpm),
            0,
            MeasureKind::S1,
            Side::Cause,
            Normalization::Unnormalized,
            SolverConfig::default(),
        )
        .unwrap();
        match choice {
            MipChoice::Partition(p) => assert_eq!(p.render(), "1|2"),
            MipChoice::Cut(_) => panic!("expected plain partition"),
        }
    }

    #[test]
    fn mip_budget_is_enforced() {
        let spec = crate::netspec::digit_network(&[1, 1, 1, 1, 1, 1, 1]).unwrap();
        let tpm = build_tpm(&spec);
        let triple = CausalTriple::from_tpm(&tpm);
        let err = find_mip(
            &triple,
            Some(&tpm),
            tpm.step(0),
            MeasureKind::S1,
            Side::Cause,
            Normalization::Unnormalized,
            SolverConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err, MeasureError::Budget(7));
    }

    #[test]
    fn block_relabeling_leaves_values_unchanged() {
        let (triple, _) = setup("AND-XOR");
        let cfg = SolverConfig::with_tol(1e-9);
        let p1 = Partition::new(vec![vec![0], vec![1]], 2, PartitionMode::Plain).unwrap();
        let p2 = Partition::new(vec![vec![1], vec![0]], 2, PartitionMode::Plain).unwrap();
        for (&s, _) in &triple.state_marginal() {
            let a = phi_s1(&triple, s, &p1, Side::Cause, cfg).unwrap().value;
            let b = phi_s1(&triple, s, &p2, Side::Cause, cfg).unwrap().value;
            close(a, b, 1e-9);
        }
    }
}
