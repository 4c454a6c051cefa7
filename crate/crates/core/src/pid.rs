//! Union-distribution minimization and synergy quantities.
//!
//! Given predictors X_1..X_k and a target Y, the union distribution is the
//! joint q minimizing I(X_1..X_k; Y) subject to preserving every pairwise
//! marginal q(X_i, Y) = p(X_i, Y). The constraint set decomposes per target
//! state y into a transportation polytope over the product of the
//! predictors' slice supports; the objective couples the slices through the
//! predictor marginal q(x).
//!
//! The solver is Frank-Wolfe (conditional gradient) with exact line search,
//! initialized at the original joint, with the linear subproblem solved
//! exactly per slice by the simplex in `lp`. The FW gap certifies
//! optimality; non-convergence within the iteration budget is an error,
//! never silently truncated.

use crate::lp;
use crate::netspec::State;
use crate::probcore::{CausalTriple, Epoch, VariableView};
use std::collections::BTreeMap;
use thiserror::Error;

const LN2: f64 = std::f64::consts::LN_2;
/// log of the smallest positive double; gradient floor for zero cells.
const LOG_FLOOR: f64 = -760.0;
/// Largest predictor count solved exactly; beyond this the max-substitution
/// proxy bound stands in.
pub const EXACT_PREDICTOR_LIMIT: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum PidError {
    #[error("system needs at least one predictor and one target state")]
    Empty,
    #[error("masses sum to {0}, expected 1")]
    BadNormalization(f64),
    #[error("predictor tuple arity mismatch")]
    Arity,
    #[error("target state has zero probability")]
    UnreachableTarget,
    #[error("union distribution does not belong to this system")]
    MismatchedUnion,
    #[error("linear subproblem failed: {0}")]
    Lp(#[from] lp::LpError),
    #[error(
        "union solve did not converge: gap {gap:.3e} bits > tol {tol:.3e} after {iterations} iterations (feasibility residual {residual:.3e})"
    )]
    NonConvergence { gap: f64, tol: f64, iterations: usize, residual: f64 },
}

/// Solver settings. `SYNPHI_SOLVER_MAX_ITERS` overrides the iteration cap.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub tol_bits: f64,
    pub max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let max_iters = std::env::var("SYNPHI_SOLVER_MAX_ITERS")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(100_000);
        SolverConfig { tol_bits: 1e-6, max_iters }
    }
}

impl SolverConfig {
    pub fn with_tol(tol_bits: f64) -> Self {
        SolverConfig { tol_bits, ..Default::default() }
    }
}

/// One target-state slice: a dense grid over the product of the predictors'
/// slice supports, holding absolute joint masses p(x, y).
#[derive(Debug, Clone)]
struct Slice {
    /// Per predictor: global value-indices with positive mass in this slice.
    support: Vec<Vec<usize>>,
    /// Grid dimensions (support sizes per predictor).
    card: Vec<usize>,
    /// Joint masses over the grid, row-major mixed radix.
    p: Vec<f64>,
    /// Slice marginal mass per predictor per support position.
    marg: Vec<Vec<f64>>,
    py: f64,
}

impl Slice {
    fn cells(&self) -> usize {
        self.p.len()
    }

    /// Decodes a grid cell into per-predictor support positions.
    fn coords(&self, mut cell: usize) -> Vec<usize> {
        let mut out = vec![0; self.card.len()];
        for i in (0..self.card.len()).rev() {
            out[i] = cell % self.card[i];
            cell /= self.card[i];
        }
        out
    }

    /// Global tuple index of a grid cell, given global predictor strides.
    fn global_tuple(&self, cell: usize, strides: &[usize]) -> usize {
        self.coords(cell)
            .iter()
            .enumerate()
            .map(|(i, &pos)| self.support[i][pos] * strides[i])
            .sum()
    }
}

/// Predictors-plus-target system with all tables needed by the solver.
#[derive(Debug, Clone)]
pub struct PredictorSystem {
    k: usize,
    /// Global alphabet per predictor (sorted raw labels).
    alphabets: Vec<Vec<u64>>,
    /// Mixed-radix strides over the global alphabets.
    strides: Vec<usize>,
    tuple_space: usize,
    /// Target states in sorted order with their probabilities.
    y_labels: Vec<u64>,
    slices: Vec<Slice>,
    /// Global predictor-tuple marginal p(x).
    px: Vec<f64>,
    /// Global single-predictor marginals p(x_i = v).
    single: Vec<Vec<f64>>,
}

impl PredictorSystem {
    /// Builds a system from raw atoms `(predictor values, target label, mass)`.
    pub fn from_parts(k: usize, atoms: &[(Vec<u64>, u64, f64)]) -> Result<Self, PidError> {
        if k == 0 || atoms.is_empty() {
            return Err(PidError::Empty);
        }
        let total: f64 = atoms.iter().map(|(_, _, m)| m).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(PidError::BadNormalization(total));
        }
        let mut alphabets = vec![BTreeMap::new(); k];
        let mut ys = BTreeMap::new();
        for (xs, y, m) in atoms {
            if xs.len() != k {
                return Err(PidError::Arity);
            }
            if *m <= 0.0 {
                continue;
            }
            for (i, &v) in xs.iter().enumerate() {
                alphabets[i].entry(v).or_insert(0.0);
            }
            *ys.entry(*y).or_insert(0.0) += *m;
        }
        let alphabets: Vec<Vec<u64>> = alphabets.iter().map(|m| m.keys().copied().collect()).collect();
        let y_labels: Vec<u64> = ys.keys().copied().collect();
        let py: Vec<f64> = y_labels.iter().map(|y| ys[y]).collect();

        // Per-slice supports from the slice marginals.
        let mut slice_marg: Vec<Vec<BTreeMap<usize, f64>>> =
            vec![vec![BTreeMap::new(); k]; y_labels.len()];
        for (xs, y, m) in atoms {
            if *m <= 0.0 {
                continue;
            }
            let yi = y_labels.binary_search(y).unwrap();
            for (i, &v) in xs.iter().enumerate() {
                let vi = alphabets[i].binary_search(&v).unwrap();
                *slice_marg[yi][i].entry(vi).or_insert(0.0) += *m;
            }
        }
        let mut slices = Vec::with_capacity(y_labels.len());
        for (yi, per_pred) in slice_marg.iter().enumerate() {
            let support: Vec<Vec<usize>> =
                per_pred.iter().map(|m| m.keys().copied().collect()).collect();
            let card: Vec<usize> = support.iter().map(Vec::len).collect();
            let cells = card.iter().product();
            let marg: Vec<Vec<f64>> = per_pred
                .iter()
                .zip(&support)
                .map(|(m, sup)| sup.iter().map(|v| m[v]).collect())
                .collect();
            slices.push(Slice { support, card, p: vec![0.0; cells], marg, py: py[yi] });
        }
        // Fill joint masses.
        for (xs, y, m) in atoms {
            if *m <= 0.0 {
                continue;
            }
            let yi = y_labels.binary_search(y).unwrap();
            let slice = &mut slices[yi];
            let mut cell = 0usize;
            for (i, &v) in xs.iter().enumerate() {
                let vi = alphabets[i].binary_search(&v).unwrap();
                let pos = slice.support[i].binary_search(&vi).unwrap();
                cell = cell * slice.card[i] + pos;
            }
            slice.p[cell] += *m;
        }

        let mut strides = vec![1usize; k];
        for i in (0..k.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * alphabets[i + 1].len();
        }
        let tuple_space = strides[0] * alphabets[0].len();
        let mut sys = PredictorSystem {
            k,
            alphabets,
            strides,
            tuple_space,
            y_labels,
            slices,
            px: Vec::new(),
            single: Vec::new(),
        };
        sys.px = sys.tuple_marginal_of(|slice, cell| slice.p[cell]);
        sys.single = (0..k)
            .map(|i| {
                let mut m = vec![0.0; sys.alphabets[i].len()];
                for slice in &sys.slices {
                    for (pos, &v) in slice.support[i].iter().enumerate() {
                        m[v] += slice.marg[i][pos];
                    }
                }
                m
            })
            .collect();
        Ok(sys)
    }

    /// Builds a system from a causal triple: each predictor is the joint of
    /// one or more past/future views, the target is the full present state.
    pub fn from_triple(
        triple: &CausalTriple,
        predictors: &[Vec<VariableView>],
    ) -> Result<Self, PidError> {
        let n = triple.n();
        let mut acc: BTreeMap<(Vec<u64>, u64), f64> = BTreeMap::new();
        for e in triple.entries() {
            let xs: Vec<u64> = predictors
                .iter()
                .map(|views| {
                    let mut v = 0u64;
                    for view in views {
                        let src = match view.epoch {
                            Epoch::Past => e.a,
                            Epoch::Present => e.s,
                            Epoch::Future => e.z,
                        };
                        for &node in &view.block {
                            v = (v << 1) | u64::from(crate::netspec::bit(src, node, n));
                        }
                    }
                    v
                })
                .collect();
            *acc.entry((xs, u64::from(e.s))).or_insert(0.0) += e.p;
        }
        let atoms: Vec<(Vec<u64>, u64, f64)> =
            acc.into_iter().map(|((xs, y), m)| (xs, y, m)).collect();
        Self::from_parts(predictors.len(), &atoms)
    }

    pub fn num_predictors(&self) -> usize {
        self.k
    }

    /// Index of a target state in the slice order, if reachable.
    pub fn target_index(&self, y: u64) -> Result<usize, PidError> {
        self.y_labels.binary_search(&y).map_err(|_| PidError::UnreachableTarget)
    }

    pub fn target_states(&self) -> impl Iterator<Item = (State, f64)> + '_ {
        self.y_labels.iter().zip(&self.slices).map(|(&y, s)| (y as State, s.py))
    }

    fn tuple_marginal_of(&self, value: impl Fn(&Slice, usize) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.tuple_space];
        for slice in &self.slices {
            for cell in 0..slice.cells() {
                let v = value(slice, cell);
                if v != 0.0 {
                    out[slice.global_tuple(cell, &self.strides)] += v;
                }
            }
        }
        out
    }

    /// I(X_1..X_k; Y) of the original joint, in bits.
    pub fn total_mutual_information(&self) -> f64 {
        let mut mi = 0.0;
        for slice in &self.slices {
            for cell in 0..slice.cells() {
                let p = slice.p[cell];
                if p > 0.0 {
                    let px = self.px[slice.global_tuple(cell, &self.strides)];
                    mi += p * (p / (px * slice.py)).log2();
                }
            }
        }
        mi.max(0.0)
    }

    /// min_i I(X_1..X_k; Y | X_i), in bits: the Shannon synergy bound.
    pub fn synergy_bound(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.k {
            let mut cond = 0.0;
            for (v, &pv) in self.single[i].iter().enumerate() {
                if pv <= 0.0 {
                    continue;
                }
                // I(X;Y | X_i = v) over the restricted, renormalized table.
                let mut cells: Vec<(usize, usize, f64)> = Vec::new();
                for (yi, slice) in self.slices.iter().enumerate() {
                    for cell in 0..slice.cells() {
                        let p = slice.p[cell];
                        if p > 0.0 && slice.support[i][slice.coords(cell)[i]] == v {
                            cells.push((slice.global_tuple(cell, &self.strides), yi, p / pv));
                        }
                    }
                }
                let mut mx: BTreeMap<usize, f64> = BTreeMap::new();
                let mut my: BTreeMap<usize, f64> = BTreeMap::new();
                for &(x, y, p) in &cells {
                    *mx.entry(x).or_insert(0.0) += p;
                    *my.entry(y).or_insert(0.0) += p;
                }
                let mut mi = 0.0;
                for &(x, y, p) in &cells {
                    mi += p * (p / (mx[&x] * my[&y])).log2();
                }
                cond += pv * mi.max(0.0);
            }
            best = best.min(cond);
        }
        best.max(0.0)
    }

    /// ID[p(X_1..X_k) -> y] in bits.
    pub fn id_full(&self, y_index: usize) -> f64 {
        let slice = &self.slices[y_index];
        let mut best = f64::NEG_INFINITY;
        for cell in 0..slice.cells() {
            let p = slice.p[cell];
            if p > 0.0 {
                let cond = p / slice.py;
                let px = self.px[slice.global_tuple(cell, &self.strides)];
                best = best.max(cond * (cond / px).log2());
            }
        }
        best
    }

    /// ID[p(X_i) -> y] for one predictor.
    pub fn id_single(&self, i: usize, y_index: usize) -> f64 {
        let slice = &self.slices[y_index];
        let mut best = f64::NEG_INFINITY;
        for (pos, &v) in slice.support[i].iter().enumerate() {
            let m = slice.marg[i][pos];
            if m > 0.0 {
                let cond = m / slice.py;
                best = best.max(cond * (cond / self.single[i][v]).log2());
            }
        }
        best.max(0.0)
    }

    /// Stand-in for the synergistic intrinsic difference when the exact
    /// union solve is out of reach: inside the defining max, the union term
    /// is replaced by the best single-predictor slice at the same tuple.
    /// Clamped at 0; zero on every deterministic leave-one-out system
    /// because some predictor's slice then equals the joint one.
    pub fn union_max_upper_proxy(&self, y_index: usize) -> f64 {
        let slice = &self.slices[y_index];
        let mut best = f64::NEG_INFINITY;
        for cell in 0..slice.cells() {
            let p = slice.p[cell];
            if p <= 0.0 {
                continue;
            }
            let cond = p / slice.py;
            let pterm = cond * (cond / self.px[slice.global_tuple(cell, &self.strides)]).log2();
            let coords = slice.coords(cell);
            let mut sub = f64::NEG_INFINITY;
            for i in 0..self.k {
                let pos = coords[i];
                let m = slice.marg[i][pos];
                let c = m / slice.py;
                sub = sub.max(c * (c / self.single[i][slice.support[i][pos]]).log2());
            }
            best = best.max(pterm - sub);
        }
        best.max(0.0)
    }

    // ---- Frank-Wolfe union solve ----

    fn objective_nats(&self, q: &[Vec<f64>], qx: &[f64]) -> f64 {
        let mut f = 0.0;
        for (slice, qs) in self.slices.iter().zip(q) {
            for cell in 0..slice.cells() {
                let v = qs[cell];
                if v > 0.0 {
                    let t = slice.global_tuple(cell, &self.strides);
                    f += v * (v / (qx[t] * slice.py)).ln();
                }
            }
        }
        f
    }

    fn tuple_marginal(&self, q: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.tuple_space];
        for (slice, qs) in self.slices.iter().zip(q) {
            for cell in 0..slice.cells() {
                if qs[cell] != 0.0 {
                    out[slice.global_tuple(cell, &self.strides)] += qs[cell];
                }
            }
        }
        out
    }

    /// L1 deviation of q's pairwise (X_i, Y) marginals from p's.
    fn feasibility_residual(&self, q: &[Vec<f64>]) -> f64 {
        let mut res = 0.0;
        for (slice, qs) in self.slices.iter().zip(q) {
            for i in 0..slice.card.len() {
                let mut got = vec![0.0; slice.card[i]];
                for cell in 0..slice.cells() {
                    got[slice.coords(cell)[i]] += qs[cell];
                }
                for (pos, &want) in slice.marg[i].iter().enumerate() {
                    res += (got[pos] - want).abs();
                }
            }
        }
        res
    }

    /// Linear minimization oracle: per-slice transportation LP.
    fn lmo(&self, grad: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, PidError> {
        let mut out = Vec::with_capacity(self.slices.len());
        for (slice, g) in self.slices.iter().zip(grad) {
            if slice.cells() == 1 {
                out.push(vec![slice.py]);
                continue;
            }
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            for i in 0..slice.card.len() {
                for pos in 0..slice.card[i] {
                    let mut row = vec![0.0; slice.cells()];
                    for cell in 0..slice.cells() {
                        if slice.coords(cell)[i] == pos {
                            row[cell] = 1.0;
                        }
                    }
                    rows.push(row);
                    rhs.push(slice.marg[i][pos]);
                }
            }
            out.push(lp::solve(g, &rows, &rhs)?);
        }
        Ok(out)
    }

    /// One block of alternating minimization: with the predictor marginal
    /// held as the mixture reference, each slice is I-projected back onto
    /// its transportation polytope by iterative proportional fitting. This
    /// is a descent step for the joint objective and keeps the iterate
    /// exactly feasible; the FW step and gap certificate around it handle
    /// support growth and optimality certification.
    fn correction_block(&self, q: &mut [Vec<f64>]) {
        for _ in 0..8 {
            let qx = self.tuple_marginal(q);
            for (slice, qs) in self.slices.iter().zip(q.iter_mut()) {
                // start from the reference measure r(x) * p(y)
                let mut w: Vec<f64> = (0..slice.cells())
                    .map(|cell| qx[slice.global_tuple(cell, &self.strides)] * slice.py)
                    .collect();
                let total: f64 = w.iter().sum();
                if total <= 0.0 {
                    continue;
                }
                for v in w.iter_mut() {
                    *v *= slice.py / total;
                }
                for _ in 0..200 {
                    let mut worst: f64 = 0.0;
                    for i in 0..slice.card.len() {
                        let mut cur = vec![0.0; slice.card[i]];
                        for cell in 0..slice.cells() {
                            cur[slice.coords(cell)[i]] += w[cell];
                        }
                        for cell in 0..slice.cells() {
                            let pos = slice.coords(cell)[i];
                            if cur[pos] > 0.0 {
                                w[cell] *= slice.marg[i][pos] / cur[pos];
                            }
                        }
                        for (pos, &want) in slice.marg[i].iter().enumerate() {
                            worst = worst.max((cur[pos] - want).abs());
                        }
                    }
                    if worst < 1e-14 {
                        break;
                    }
                }
                qs.copy_from_slice(&w);
            }
        }
    }

    /// Solves the union minimization to `cfg.tol_bits`, deterministically:
    /// fixed initialization at the original joint, fixed iteration schedule,
    /// FW duality-gap certificate.
    pub fn solve_union(&self, cfg: SolverConfig) -> Result<UnionDistribution, PidError> {
        let mut q: Vec<Vec<f64>> = self.slices.iter().map(|s| s.p.clone()).collect();
        let mut gap_bits = f64::INFINITY;
        let mut iters = 0usize;
        for it in 0..cfg.max_iters {
            iters = it + 1;
            let qx = self.tuple_marginal(&q);
            // Gradient; zero cells floored (conservative for the gap).
            let grad: Vec<Vec<f64>> = self
                .slices
                .iter()
                .zip(&q)
                .map(|(slice, qs)| {
                    (0..slice.cells())
                        .map(|cell| {
                            let v = qs[cell];
                            if v > 0.0 {
                                let t = slice.global_tuple(cell, &self.strides);
                                (v / (qx[t] * slice.py)).ln()
                            } else {
                                LOG_FLOOR
                            }
                        })
                        .collect()
                })
                .collect();
            let s = self.lmo(&grad)?;
            let mut gap_nats = 0.0;
            for (gs, (qs, ss)) in grad.iter().zip(q.iter().zip(&s)) {
                for (g, (qv, sv)) in gs.iter().zip(qs.iter().zip(ss)) {
                    gap_nats += g * (qv - sv);
                }
            }
            gap_bits = gap_nats / LN2;
            if gap_bits <= cfg.tol_bits {
                break;
            }
            // Direction and its tuple marginal.
            let d: Vec<Vec<f64>> = q
                .iter()
                .zip(&s)
                .map(|(qs, ss)| qs.iter().zip(ss).map(|(a, b)| b - a).collect())
                .collect();
            let dx = self.tuple_marginal(&d);
            let t = self.line_search(&q, &qx, &d, &dx);
            for (qs, ds) in q.iter_mut().zip(&d) {
                for (qv, dv) in qs.iter_mut().zip(ds) {
                    *qv = (*qv + t * dv).max(0.0);
                }
            }
            self.correction_block(&mut q);
        }
        let residual = self.feasibility_residual(&q);
        if gap_bits > cfg.tol_bits {
            return Err(PidError::NonConvergence {
                gap: gap_bits,
                tol: cfg.tol_bits,
                iterations: iters,
                residual,
            });
        }
        let qx = self.tuple_marginal(&q);
        let objective_bits = self.objective_nats(&q, &qx) / LN2;
        Ok(UnionDistribution {
            shape: self.slices.iter().map(Slice::cells).collect(),
            q,
            qx,
            objective_bits,
            feasibility_residual: residual,
            optimality_gap: gap_bits.max(0.0),
            iterations: iters,
        })
    }

    /// Exact line search: bisection on the directional derivative of the
    /// objective along d, which is increasing in t by convexity.
    fn line_search(&self, q: &[Vec<f64>], qx: &[f64], d: &[Vec<f64>], dx: &[f64]) -> f64 {
        let phi = |t: f64| -> f64 {
            let mut v = 0.0;
            for (slice, (qs, ds)) in self.slices.iter().zip(q.iter().zip(d)) {
                for cell in 0..slice.cells() {
                    let dv = ds[cell];
                    if dv == 0.0 {
                        continue;
                    }
                    let qt = qs[cell] + t * dv;
                    let tuple = slice.global_tuple(cell, &self.strides);
                    let qxt = qx[tuple] + t * dx[tuple];
                    if qt <= 0.0 || qxt <= 0.0 {
                        if dv < 0.0 {
                            return f64::INFINITY;
                        }
                        v += dv * LOG_FLOOR;
                        continue;
                    }
                    v += dv * (qt / (qxt * slice.py)).ln();
                }
            }
            v
        };
        if phi(1.0) <= 0.0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..70 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// The optimizer output: q plus diagnostics.
#[derive(Debug, Clone)]
pub struct UnionDistribution {
    shape: Vec<usize>,
    /// Per-slice joint masses on the slice grids.
    pub q: Vec<Vec<f64>>,
    qx: Vec<f64>,
    /// I_q(X_1..X_k; Y) in bits.
    pub objective_bits: f64,
    /// L1 deviation of q's pairwise marginals from p's.
    pub feasibility_residual: f64,
    /// Certified FW duality gap in bits.
    pub optimality_gap: f64,
    pub iterations: usize,
}

impl UnionDistribution {
    fn check(&self, sys: &PredictorSystem) -> Result<(), PidError> {
        let shape: Vec<usize> = sys.slices.iter().map(Slice::cells).collect();
        if shape == self.shape {
            Ok(())
        } else {
            Err(PidError::MismatchedUnion)
        }
    }
}

/// Shannon synergy: whole minus union. Tiny negatives within the solver
/// tolerance are clamped to zero.
pub fn synergy(
    sys: &PredictorSystem,
    union: &UnionDistribution,
    tol_bits: f64,
) -> Result<f64, PidError> {
    union.check(sys)?;
    let s = sys.total_mutual_information() - union.objective_bits;
    Ok(if s < 0.0 && s >= -tol_bits.max(1e-9) { 0.0 } else { s })
}

/// Outcome of a synergistic-intrinsic-difference evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidValue {
    /// Clamped value (>= 0).
    pub value: f64,
    /// Raw maximum before clamping.
    pub raw: f64,
    /// True when the raw value was negative and clamped to zero.
    pub clamped: bool,
}

/// Synergistic intrinsic difference into target state index `y_index`:
/// the largest slice, over predictor tuples in the support of p(.|y), of
/// the pointwise difference between the intrinsic-difference integrand
/// under p and under the union distribution, clamped at zero.
pub fn synergistic_id(
    sys: &PredictorSystem,
    union: &UnionDistribution,
    y_index: usize,
) -> Result<SidValue, PidError> {
    union.check(sys)?;
    let slice = &sys.slices[y_index];
    let qs = &union.q[y_index];
    let py = slice.py;
    let mut best = f64::NEG_INFINITY;
    for cell in 0..slice.cells() {
        let p = slice.p[cell];
        if p <= 0.0 {
            continue;
        }
        let tuple = slice.global_tuple(cell, &sys.strides);
        let cond = p / py;
        let pterm = cond * (cond / sys.px[tuple]).log2();
        let qv = qs[cell];
        let qterm = if qv > 0.0 {
            let qcond = qv / py;
            qcond * (qcond / union.qx[tuple]).log2()
        } else {
            0.0
        };
        best = best.max(pterm - qterm);
    }
    if best == f64::NEG_INFINITY {
        return Err(PidError::UnreachableTarget);
    }
    Ok(SidValue { value: best.max(0.0), raw: best, clamped: best < 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netspec::{build_tpm, builtin, parse_state};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    fn cause_system(name: &str) -> PredictorSystem {
        let triple = CausalTriple::from_tpm(&build_tpm(&builtin(name).unwrap()));
        PredictorSystem::from_triple(
            &triple,
            &[vec![VariableView::past(vec![0])], vec![VariableView::past(vec![1])]],
        )
        .unwrap()
    }

    #[test]
    fn xor_union_objective_is_zero() {
        let sys = cause_system("XOR-ZERO");
        let u = sys.solve_union(SolverConfig::with_tol(1e-8)).unwrap();
        close(u.objective_bits, 0.0, 1e-6);
        assert!(u.feasibility_residual < 1e-9);
        close(synergy(&sys, &u, 1e-8).unwrap(), 1.0, 1e-5);
    }

    #[test]
    fn and_union_objective_matches_bivariate_value() {
        let sys = cause_system("AND-ZERO");
        let u = sys.solve_union(SolverConfig::with_tol(1e-8)).unwrap();
        close(u.objective_bits, 0.311, 1e-3);
        close(synergy(&sys, &u, 1e-8).unwrap(), 0.5, 1e-4);
    }

    #[test]
    fn single_predictor_union_is_original_joint() {
        let triple = CausalTriple::from_tpm(&build_tpm(&builtin("AND-ZERO").unwrap()));
        let sys =
            PredictorSystem::from_triple(&triple, &[vec![VariableView::past(vec![0, 1])]]).unwrap();
        let u = sys.solve_union(SolverConfig::with_tol(1e-9)).unwrap();
        close(u.objective_bits, sys.total_mutual_information(), 1e-9);
        for (slice, qs) in sys.slices.iter().zip(&u.q) {
            for cell in 0..slice.cells() {
                close(qs[cell], slice.p[cell], 1e-9);
            }
        }
    }

    #[test]
    fn synergy_bound_examples() {
        close(cause_system("XOR-ZERO").synergy_bound(), 1.0, 1e-9);
        close(cause_system("AND-ZERO").synergy_bound(), 0.5, 1e-9);
        // conditioning on self: single predictor gives zero bound
        let triple = CausalTriple::from_tpm(&build_tpm(&builtin("AND-ZERO").unwrap()));
        let sys =
            PredictorSystem::from_triple(&triple, &[vec![VariableView::past(vec![0, 1])]]).unwrap();
        close(sys.synergy_bound(), 0.0, 1e-12);
    }

    #[test]
    fn sid_matches_published_doublet_column() {
        // <phi_c^S1>: XOR-XOR 0.500, GET-GET 0, AND-ZERO 0.354
        for (name, want) in [("XOR-XOR", 0.5), ("GET-GET", 0.0), ("AND-ZERO", 0.354)] {
            let sys = cause_system(name);
            let u = sys.solve_union(SolverConfig::with_tol(1e-8)).unwrap();
            let mut acc = 0.0;
            for (idx, (_, py)) in sys.target_states().enumerate() {
                acc += py * synergistic_id(&sys, &u, idx).unwrap().value;
            }
            close(acc, want, 1.5e-3);
        }
    }

    #[test]
    fn proxy_examples() {
        // XOR-ZERO: each single predictor carries nothing about parity, so
        // the proxy equals ID[p(A) -> s] at every reachable state.
        let sys = cause_system("XOR-ZERO");
        for (idx, _) in sys.target_states().enumerate() {
            close(sys.union_max_upper_proxy(idx), sys.id_full(idx), 1e-12);
        }
        // single predictor: proxy is identically zero
        let triple = CausalTriple::from_tpm(&build_tpm(&builtin("AND-ZERO").unwrap()));
        let solo =
            PredictorSystem::from_triple(&triple, &[vec![VariableView::past(vec![0, 1])]]).unwrap();
        for (idx, _) in solo.target_states().enumerate() {
            close(solo.union_max_upper_proxy(idx), 0.0, 1e-12);
        }
    }

    #[test]
    fn sid_errors_on_foreign_union() {
        let sys = cause_system("AND-ZERO");
        let other = cause_system("XOR-XOR");
        let u = other.solve_union(SolverConfig::default()).unwrap();
        assert!(matches!(synergy(&sys, &u, 1e-8), Err(PidError::MismatchedUnion)));
    }

    #[test]
    fn unreachable_target_is_reported() {
        let sys = cause_system("AND-ZERO");
        let s01 = parse_state("01", 2).unwrap();
        assert!(matches!(sys.target_index(u64::from(s01)), Err(PidError::UnreachableTarget)));
    }

    #[test]
    fn permutation_equivariance_of_synergy_and_sid() {
        let triple = CausalTriple::from_tpm(&build_tpm(&builtin("AND-XOR").unwrap()));
        let ab = PredictorSystem::from_triple(
            &triple,
            &[vec![VariableView::past(vec![0])], vec![VariableView::past(vec![1])]],
        )
        .unwrap();
        let ba = PredictorSystem::from_triple(
            &triple,
            &[vec![VariableView::past(vec![1])], vec![VariableView::past(vec![0])]],
        )
        .unwrap();
        let (ua, ub) = (
            ab.solve_union(SolverConfig::with_tol(1e-9)).unwrap(),
            ba.solve_union(SolverConfig::with_tol(1e-9)).unwrap(),
        );
        close(ua.objective_bits, ub.objective_bits, 1e-7);
        for (idx, (_, _)) in ab.target_states().enumerate() {
            close(
                synergistic_id(&ab, &ua, idx).unwrap().value,
                synergistic_id(&ba, &ub, idx).unwrap().value,
                1e-5,
            );
        }
    }
}
