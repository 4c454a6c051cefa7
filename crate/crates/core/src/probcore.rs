//! Exact finite-distribution algebra over the causal chain A -> S -> Z.
//!
//! All quantities are computed by direct enumeration in double precision,
//! log base 2, with the conventions 0*log(0) = 0 and 0*log(0/0) = 0.

use crate::netspec::{State, TransitionModel};
use std::collections::BTreeMap;
use thiserror::Error;

/// Mass tolerance for distribution invariants.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ProbError {
    #[error("masses sum to {0}, expected 1")]
    BadNormalization(f64),
    #[error("negative mass {0}")]
    NegativeMass(f64),
    #[error("support size mismatch: {0} vs {1}")]
    SupportMismatch(usize, usize),
    #[error("absolute continuity violated at index {0}: p > 0 but q = 0")]
    AbsoluteContinuity(usize),
    #[error("selections overlap on {0:?} node {1}")]
    OverlappingSelection(Epoch, usize),
    #[error("empty or invalid variable selection")]
    BadSelection,
    #[error("state {0} has zero probability")]
    UnreachableState(State),
    #[error("no value supplied for reachable state {0}")]
    MissingState(State),
    #[error("kernel row {0} sums to {1}, expected 1")]
    BadKernelRow(usize, f64),
}

/// A finite distribution: nonnegative masses summing to 1 within `MASS_TOL`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    mass: Vec<f64>,
}

impl Dist {
    pub fn new(mass: Vec<f64>) -> Result<Self, ProbError> {
        for &m in &mass {
            if m < -MASS_TOL {
                return Err(ProbError::NegativeMass(m));
            }
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(ProbError::BadNormalization(total));
        }
        Ok(Dist { mass })
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }
}

/// Which epoch of the causal chain a block of nodes is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub enum Epoch {
    Past,
    Present,
    Future,
}

/// A block of node indices read at one epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableView {
    pub epoch: Epoch,
    pub block: Vec<usize>,
}

impl VariableView {
    pub fn past(block: Vec<usize>) -> Self {
        VariableView { epoch: Epoch::Past, block }
    }
    pub fn present(block: Vec<usize>) -> Self {
        VariableView { epoch: Epoch::Present, block }
    }
    pub fn future(block: Vec<usize>) -> Self {
        VariableView { epoch: Epoch::Future, block }
    }
}

/// One atom of the joint distribution over (a, s, z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleEntry {
    pub a: State,
    pub s: State,
    pub z: State,
    pub p: f64,
}

/// Joint distribution over (past, present, future) induced by a uniform
/// prior on the past and two applications of the transition kernel.
/// Stored sparsely; deterministic models yield exactly 2^n entries.
#[derive(Debug, Clone)]
pub struct CausalTriple {
    n: usize,
    entries: Vec<TripleEntry>,
}

impl CausalTriple {
    /// Builds the triple for a deterministic model: s = T(a), z = T(s),
    /// p(a) uniform.
    pub fn from_tpm(tpm: &TransitionModel) -> Self {
        let n = tpm.n();
        let p = 1.0 / tpm.num_states() as f64;
        let entries = tpm
            .states()
            .map(|a| {
                let s = tpm.step(a);
                TripleEntry { a, s, z: tpm.step(s), p }
            })
            .collect();
        CausalTriple { n, entries }
    }

    /// Builds a (possibly stochastic) triple from a row-stochastic one-step
    /// kernel given as, for each state, its successors and probabilities.
    pub fn from_stochastic_kernel(
        n: usize,
        kernel: &[Vec<(State, f64)>],
    ) -> Result<Self, ProbError> {
        let states = 1usize << n;
        if kernel.len() != states {
            return Err(ProbError::SupportMismatch(kernel.len(), states));
        }
        for (i, row) in kernel.iter().enumerate() {
            let total: f64 = row.iter().map(|&(_, p)| p).sum();
            if (total - 1.0).abs() > MASS_TOL {
                return Err(ProbError::BadKernelRow(i, total));
            }
            for &(_, p) in row {
                if p < 0.0 {
                    return Err(ProbError::NegativeMass(p));
                }
            }
        }
        let prior = 1.0 / states as f64;
        let mut entries = Vec::new();
        for a in 0..states {
            for &(s, ps) in &kernel[a] {
                for &(z, pz) in &kernel[s as usize] {
                    let p = prior * ps * pz;
                    if p > 0.0 {
                        entries.push(TripleEntry { a: a as State, s, z, p });
                    }
                }
            }
        }
        Ok(CausalTriple { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[TripleEntry] {
        &self.entries
    }

    /// Marginal distribution of the present state, keyed by state.
    pub fn state_marginal(&self) -> BTreeMap<State, f64> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            *out.entry(e.s).or_insert(0.0) += e.p;
        }
        out
    }

    /// p(s) for one state.
    pub fn state_probability(&self, s: State) -> f64 {
        self.entries.iter().filter(|e| e.s == s).map(|e| e.p).sum()
    }

    fn project(&self, views: &[VariableView], e: &TripleEntry) -> u64 {
        let mut idx = 0u64;
        for view in views {
            let src = match view.epoch {
                Epoch::Past => e.a,
                Epoch::Present => e.s,
                Epoch::Future => e.z,
            };
            for &node in &view.block {
                idx = (idx << 1) | u64::from(crate::netspec::bit(src, node, self.n));
            }
        }
        idx
    }

    fn check_disjoint(lhs: &[VariableView], rhs: &[VariableView]) -> Result<(), ProbError> {
        if lhs.is_empty() || rhs.is_empty() {
            return Err(ProbError::BadSelection);
        }
        let mut seen = BTreeMap::new();
        for views in [lhs, rhs] {
            for view in views {
                if view.block.is_empty() {
                    return Err(ProbError::BadSelection);
                }
                for &node in &view.block {
                    if seen.insert((view.epoch, node), ()).is_some() {
                        return Err(ProbError::OverlappingSelection(view.epoch, node));
                    }
                }
            }
        }
        Ok(())
    }

    /// Tabulates the joint of two disjoint selections as a dense table.
    pub fn tabulate(
        &self,
        lhs: &[VariableView],
        rhs: &[VariableView],
    ) -> Result<JointTable, ProbError> {
        Self::check_disjoint(lhs, rhs)?;
        let xbits: usize = lhs.iter().map(|v| v.block.len()).sum();
        let ybits: usize = rhs.iter().map(|v| v.block.len()).sum();
        let (xc, yc) = (1usize << xbits, 1usize << ybits);
        let mut p = vec![0.0; xc * yc];
        for e in &self.entries {
            let x = self.project(lhs, e) as usize;
            let y = self.project(rhs, e) as usize;
            p[x * yc + y] += e.p;
        }
        Ok(JointTable { x_card: xc, y_card: yc, p })
    }

    /// Shannon mutual information in bits between two disjoint selections.
    pub fn mutual_information(
        &self,
        lhs: &[VariableView],
        rhs: &[VariableView],
    ) -> Result<f64, ProbError> {
        Ok(self.tabulate(lhs, rhs)?.mutual_information())
    }
}

/// Dense joint table over a composite predictor X and target Y.
#[derive(Debug, Clone)]
pub struct JointTable {
    pub x_card: usize,
    pub y_card: usize,
    /// Row-major: `p[x * y_card + y]`.
    pub p: Vec<f64>,
}

impl JointTable {
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.y_card + y]
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.x_card];
        for x in 0..self.x_card {
            for y in 0..self.y_card {
                m[x] += self.at(x, y);
            }
        }
        m
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.y_card];
        for x in 0..self.x_card {
            for y in 0..self.y_card {
                m[y] += self.at(x, y);
            }
        }
        m
    }

    /// I(X;Y) in bits.
    pub fn mutual_information(&self) -> f64 {
        let mx = self.marginal_x();
        let my = self.marginal_y();
        let mut mi = 0.0;
        for x in 0..self.x_card {
            for y in 0..self.y_card {
                let pxy = self.at(x, y);
                if pxy > 0.0 {
                    mi += pxy * (pxy / (mx[x] * my[y])).log2();
                }
            }
        }
        mi.max(0.0)
    }

    /// The intrinsic difference ID[p(X) -> y]: the largest pointwise slice
    /// p(x|y) log2(p(x|y)/p(x)) over the support of p(.|y). Always >= 0
    /// because some x satisfies p(x|y) >= p(x).
    pub fn intrinsic_difference(&self, y: usize) -> Result<f64, ProbError> {
        let py: f64 = (0..self.x_card).map(|x| self.at(x, y)).sum();
        if py <= 0.0 {
            return Err(ProbError::UnreachableState(y as State));
        }
        let mx = self.marginal_x();
        let mut best = f64::NEG_INFINITY;
        for x in 0..self.x_card {
            let pxy = self.at(x, y);
            if pxy > 0.0 {
                let cond = pxy / py;
                best = best.max(cond * (cond / mx[x]).log2());
            }
        }
        Ok(best)
    }
}

/// D_KL(p || q) in bits. Errors where p > 0 but q = 0.
pub fn kl_divergence(p: &Dist, q: &Dist) -> Result<f64, ProbError> {
    if p.len() != q.len() {
        return Err(ProbError::SupportMismatch(p.len(), q.len()));
    }
    let mut d = 0.0;
    for (i, (&pi, &qi)) in p.masses().iter().zip(q.masses()).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(ProbError::AbsoluteContinuity(i));
            }
            d += pi * (pi / qi).log2();
        }
    }
    Ok(d.max(0.0))
}

/// Expectation of per-state values under p(s): sum_s p(s) value(s).
/// Every state with positive probability must have a value.
pub fn state_expectation(
    values: &BTreeMap<State, f64>,
    triple: &CausalTriple,
) -> Result<f64, ProbError> {
    let marg = triple.state_marginal();
    let mut acc = 0.0;
    for (&s, &p) in &marg {
        if p > 0.0 {
            let v = values.get(&s).ok_or(ProbError::MissingState(s))?;
            acc += p * v;
        }
    }
    Ok(acc)
}

/// ID[A -> s] for the full past against one present state.
pub fn id_past_to_state(triple: &CausalTriple, s: State) -> Result<f64, ProbError> {
    let n = triple.n();
    let all: Vec<usize> = (0..n).collect();
    let jt = triple.tabulate(
        &[VariableView::past(all.clone())],
        &[VariableView::present(all)],
    )?;
    jt.intrinsic_difference(s as usize)
}

/// Expected ID[A -> s] over p(s).
pub fn mean_id_past(triple: &CausalTriple) -> Result<f64, ProbError> {
    let mut values = BTreeMap::new();
    for (&s, &p) in &triple.state_marginal() {
        if p > 0.0 {
            values.insert(s, id_past_to_state(triple, s)?);
        }
    }
    state_expectation(&values, triple)
}
