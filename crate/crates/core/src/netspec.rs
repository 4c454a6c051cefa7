//! Binary threshold networks: parsing, rendering, simulation.
//!
//! A network is an ordered list of nodes. Each node reads an ordered set of
//! input wires and updates by its gate rule. State strings are read left to
//! right with node 0 first, so node 0 occupies the most significant bit of
//! the integer encoding and integer order equals string order.

use std::fmt;
use thiserror::Error;

/// Maximum node count; keeps 2^n state enumeration tractable.
pub const MAX_NODES: usize = 16;

/// A network state encoded with node 0 as the most significant bit.
pub type State = u16;

/// Gate rule of a single node.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum Gate {
    /// Updates to 1 iff at least `t` inputs are ON. `t = None` encodes an
    /// infinite threshold: the node updates to 0 for every input pattern.
    Threshold(Option<u32>),
    /// Parity of the inputs.
    Xor,
    /// Copies its single input.
    Copy,
    /// Constant OFF, no inputs.
    Zero,
}

/// One node: a gate plus its ordered incoming wires.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct NodeSpec {
    pub gate: Gate,
    pub inputs: Vec<usize>,
}

/// A named n-node network.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct NetworkSpec {
    pub name: String,
    pub nodes: Vec<NodeSpec>,
}

/// Deterministic state-update map: every state has exactly one successor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionModel {
    n: usize,
    table: Vec<State>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("network must have between 1 and {MAX_NODES} nodes, got {0}")]
    BadNodeCount(usize),
    #[error("node {node}: input index {input} out of range (n = {n})")]
    BadInput { node: usize, input: usize, n: usize },
    #[error("node {node}: duplicate input {input}")]
    DuplicateInput { node: usize, input: usize },
    #[error("node {node}: {msg}")]
    BadNode { node: usize, msg: String },
    #[error("unknown builtin network `{0}`")]
    UnknownBuiltin(String),
}

impl NetworkSpec {
    pub fn new(name: impl Into<String>, nodes: Vec<NodeSpec>) -> Result<Self, NetError> {
        let spec = NetworkSpec { name: name.into(), nodes };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    fn validate(&self) -> Result<(), NetError> {
        let n = self.nodes.len();
        if n == 0 || n > MAX_NODES {
            return Err(NetError::BadNodeCount(n));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            let mut seen = [false; MAX_NODES];
            for &inp in &node.inputs {
                if inp >= n {
                    return Err(NetError::BadInput { node: i, input: inp, n });
                }
                if seen[inp] {
                    return Err(NetError::DuplicateInput { node: i, input: inp });
                }
                seen[inp] = true;
            }
            match node.gate {
                Gate::Copy if node.inputs.len() != 1 => {
                    return Err(NetError::BadNode { node: i, msg: "copy gate needs exactly one input".into() })
                }
                Gate::Xor if node.inputs.is_empty() => {
                    return Err(NetError::BadNode { node: i, msg: "xor gate needs at least one input".into() })
                }
                Gate::Zero if !node.inputs.is_empty() => {
                    return Err(NetError::BadNode { node: i, msg: "zero gate takes no inputs".into() })
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Value of `node` in `state` for an n-node network.
#[inline]
pub fn bit(state: State, node: usize, n: usize) -> u8 {
    ((state >> (n - 1 - node)) & 1) as u8
}

/// Renders a state as its binary string, node 0 first.
pub fn state_string(state: State, n: usize) -> String {
    (0..n).map(|i| char::from(b'0' + bit(state, i, n))).collect()
}

/// Parses a state string of exactly `n` characters drawn from {0,1}.
pub fn parse_state(text: &str, n: usize) -> Result<State, NetError> {
    if text.len() != n || !text.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(NetError::Parse {
            line: 0,
            msg: format!("state `{text}` is not a {n}-bit binary string"),
        });
    }
    Ok(text.bytes().fold(0, |acc, b| (acc << 1) | State::from(b - b'0')))
}

fn eval_gate(node: &NodeSpec, state: State, n: usize) -> u8 {
    let on = node.inputs.iter().map(|&i| u32::from(bit(state, i, n))).sum::<u32>();
    match node.gate {
        Gate::Zero | Gate::Threshold(None) => 0,
        Gate::Threshold(Some(t)) => u8::from(on >= t),
        Gate::Xor => (on % 2) as u8,
        Gate::Copy => on as u8,
    }
}

/// Builds the full 2^n transition table under threshold semantics.
pub fn build_tpm(spec: &NetworkSpec) -> TransitionModel {
    let n = spec.n();
    let table = (0..1u32 << n)
        .map(|a| {
            let a = a as State;
            spec.nodes
                .iter()
                .fold(0, |acc, node| (acc << 1) | State::from(eval_gate(node, a, n)))
        })
        .collect();
    TransitionModel { n, table }
}

impl TransitionModel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_states(&self) -> usize {
        self.table.len()
    }

    /// Successor of `state`.
    pub fn step(&self, state: State) -> State {
        self.table[state as usize]
    }

    pub fn states(&self) -> impl Iterator<Item = State> {
        0..self.table.len() as State
    }

    /// Next value of `node` when the sources listed in `resample` are
    /// replaced by uniform coin flips: the causal-marginalization primitive.
    /// Returns P(next(node) = 1 | state with resampled sources).
    pub fn node_on_probability(&self, node: usize, state: State, resample: &[usize]) -> f64 {
        let k = resample.len();
        let mut on = 0u32;
        for pat in 0..1u32 << k {
            let mut x = state;
            for (j, &src) in resample.iter().enumerate() {
                let mask = 1 << (self.n - 1 - src);
                if pat >> j & 1 == 1 {
                    x |= mask;
                } else {
                    x &= !mask;
                }
            }
            on += u32::from(bit(self.step(x), node, self.n));
        }
        f64::from(on) / f64::from(1u32 << k)
    }
}

impl fmt::Display for TransitionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.states() {
            writeln!(f, "{} -> {}", state_string(s, self.n), state_string(self.step(s), self.n))?;
        }
        Ok(())
    }
}

/// Parses the line-oriented network file format.
///
/// ```text
/// network <name> <n>
/// node <index> kind=<threshold|xor|copy|zero> [t=<int|inf>] inputs=<comma-list>
/// ```
///
/// `#` starts a comment; blank lines are ignored.
pub fn parse_network(text: &str) -> Result<NetworkSpec, NetError> {
    let err = |line: usize, msg: String| NetError::Parse { line, msg };
    let mut name = None;
    let mut n = 0usize;
    let mut nodes: Vec<Option<NodeSpec>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        match words.next() {
            Some("network") => {
                if name.is_some() {
                    return Err(err(line, "duplicate network header".into()));
                }
                let net_name = words.next().ok_or_else(|| err(line, "missing network name".into()))?;
                let count: usize = words
                    .next()
                    .ok_or_else(|| err(line, "missing node count".into()))?
                    .parse()
                    .map_err(|_| err(line, "node count is not an integer".into()))?;
                if count == 0 || count > MAX_NODES {
                    return Err(NetError::BadNodeCount(count));
                }
                if words.next().is_some() {
                    return Err(err(line, "trailing tokens after header".into()));
                }
                name = Some(net_name.to_string());
                n = count;
                nodes = vec![None; count];
            }
            Some("node") => {
                if name.is_none() {
                    return Err(err(line, "node line before network header".into()));
                }
                let idx: usize = words
                    .next()
                    .ok_or_else(|| err(line, "missing node index".into()))?
                    .parse()
                    .map_err(|_| err(line, "node index is not an integer".into()))?;
                if idx >= n {
                    return Err(err(line, format!("node index {idx} out of range (n = {n})")));
                }
                if nodes[idx].is_some() {
                    return Err(err(line, format!("duplicate definition of node {idx}")));
                }
                let mut kind = None;
                let mut t = None;
                let mut inputs = None;
                for word in words {
                    let (key, value) = word
                        .split_once('=')
                        .ok_or_else(|| err(line, format!("expected key=value, got `{word}`")))?;
                    match key {
                        "kind" => kind = Some(value.to_string()),
                        "t" => {
                            t = Some(if value == "inf" {
                                None
                            } else {
                                Some(value.parse::<u32>().map_err(|_| {
                                    err(line, format!("threshold `{value}` is not a nonnegative integer or inf"))
                                })?)
                            })
                        }
                        "inputs" => {
                            let list = if value.is_empty() {
                                Vec::new()
                            } else {
                                value
                                    .split(',')
                                    .map(|v| {
                                        v.parse::<usize>().map_err(|_| {
                                            err(line, format!("input `{v}` is not a node index"))
                                        })
                                    })
                                    .collect::<Result<Vec<_>, _>>()?
                            };
                            inputs = Some(list);
                        }
                        other => return Err(err(line, format!("unknown key `{other}`"))),
                    }
                }
                let kind = kind.ok_or_else(|| err(line, "missing kind=".into()))?;
                let inputs = inputs.ok_or_else(|| err(line, "missing inputs=".into()))?;
                let gate = match kind.as_str() {
                    "threshold" => {
                        Gate::Threshold(t.ok_or_else(|| err(line, "threshold gate needs t=".into()))?)
                    }
                    "xor" => Gate::Xor,
                    "copy" => Gate::Copy,
                    "zero" => Gate::Zero,
                    other => return Err(err(line, format!("unknown gate kind `{other}`"))),
                };
                nodes[idx] = Some(NodeSpec { gate, inputs });
            }
            Some(other) => return Err(err(line, format!("unknown directive `{other}`"))),
            None => unreachable!(),
        }
    }
    let name = name.ok_or_else(|| err(0, "missing network header".into()))?;
    let nodes = nodes
        .into_iter()
        .enumerate()
        .map(|(i, node)| node.ok_or_else(|| err(0, format!("node {i} is not defined"))))
        .collect::<Result<Vec<_>, _>>()?;
    NetworkSpec::new(name, nodes)
}

/// Renders a spec in the exact format `parse_network` accepts: LF line
/// endings, single spaces, one node per line in index order.
pub fn render_network(spec: &NetworkSpec) -> String {
    let mut out = format!("network {} {}\n", spec.name, spec.n());
    for (i, node) in spec.nodes.iter().enumerate() {
        let kind = match node.gate {
            Gate::Threshold(_) => "threshold",
            Gate::Xor => "xor",
            Gate::Copy => "copy",
            Gate::Zero => "zero",
        };
        out.push_str(&format!("node {i} kind={kind}"));
        if let Gate::Threshold(t) = node.gate {
            match t {
                Some(v) => out.push_str(&format!(" t={v}")),
                None => out.push_str(" t=inf"),
            }
        }
        let list = node.inputs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        out.push_str(&format!(" inputs={list}\n"));
    }
    out
}

const DOUBLET_GATES: [&str; 5] = ["ZERO", "KEEP", "GET", "AND", "XOR"];

fn doublet_node(gate: &str, this: usize, other: usize) -> NodeSpec {
    match gate {
        "ZERO" => NodeSpec { gate: Gate::Zero, inputs: vec![] },
        "KEEP" => NodeSpec { gate: Gate::Copy, inputs: vec![this] },
        "GET" => NodeSpec { gate: Gate::Copy, inputs: vec![other] },
        "AND" => NodeSpec { gate: Gate::Threshold(Some(2)), inputs: vec![0, 1] },
        "XOR" => NodeSpec { gate: Gate::Xor, inputs: vec![0, 1] },
        _ => unreachable!(),
    }
}

/// Two-node network named `<G0>-<G1>` from the doublet gate vocabulary.
pub fn doublet(g0: &str, g1: &str) -> Result<NetworkSpec, NetError> {
    for g in [g0, g1] {
        if !DOUBLET_GATES.contains(&g) {
            return Err(NetError::UnknownBuiltin(format!("{g0}-{g1}")));
        }
    }
    NetworkSpec::new(format!("{g0}-{g1}"), vec![doublet_node(g0, 0, 1), doublet_node(g1, 1, 0)])
}

/// Directed cycle of copy gates: node i reads node (i-1) mod n.
pub fn copy_cycle(name: &str, n: usize) -> Result<NetworkSpec, NetError> {
    let nodes = (0..n)
        .map(|i| NodeSpec { gate: Gate::Copy, inputs: vec![(i + n - 1) % n] })
        .collect();
    NetworkSpec::new(name, nodes)
}

/// All-to-all threshold network (every node reads every node, itself
/// included); node i's threshold is the i-th digit of the name.
pub fn digit_network(digits: &[u32]) -> Result<NetworkSpec, NetError> {
    let n = digits.len();
    let name: String = digits.iter().map(ToString::to_string).collect();
    let nodes = digits
        .iter()
        .map(|&t| NodeSpec { gate: Gate::Threshold(Some(t)), inputs: (0..n).collect() })
        .collect();
    NetworkSpec::new(name, nodes)
}

/// The 16 doublets of the comparison battery, in table order.
pub fn doublet_battery() -> Vec<NetworkSpec> {
    [
        ("ZERO", "ZERO"), ("KEEP", "ZERO"), ("KEEP", "KEEP"), ("GET", "ZERO"),
        ("GET", "KEEP"), ("GET", "GET"), ("AND", "ZERO"), ("AND", "KEEP"),
        ("AND", "GET"), ("AND", "AND"), ("AND", "XOR"), ("XOR", "ZERO"),
        ("XOR", "KEEP"), ("XOR", "GET"), ("XOR", "AND"), ("XOR", "XOR"),
    ]
    .iter()
    .map(|(a, b)| doublet(a, b).expect("builtin doublet"))
    .collect()
}

/// The full 24-network battery: 16 doublets, 4 triplets, 4 quadruplets.
pub fn builtin_battery() -> Vec<NetworkSpec> {
    let mut nets = doublet_battery();
    nets.push(copy_cycle("GET3", 3).unwrap());
    nets.push(digit_network(&[1, 1, 1]).unwrap());
    nets.push(digit_network(&[1, 2, 1]).unwrap());
    nets.push(digit_network(&[1, 2, 3]).unwrap());
    nets.push(copy_cycle("GET4", 4).unwrap());
    nets.push(digit_network(&[4, 4, 2, 2]).unwrap());
    nets.push(digit_network(&[4, 3, 2, 2]).unwrap());
    nets.push(digit_network(&[4, 3, 2, 1]).unwrap());
    nets
}

/// Looks up a battery network by name, e.g. `AND-XOR`, `GET3`, `4321`.
pub fn builtin(name: &str) -> Result<NetworkSpec, NetError> {
    builtin_battery()
        .into_iter()
        .find(|spec| spec.name == name)
        .ok_or_else(|| NetError::UnknownBuiltin(name.to_string()))
}
