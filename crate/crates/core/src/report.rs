//! Battery runner and table assembly for the bundled comparison suites.
//!
//! Four suites reproduce the reference comparison tables: `table1` (16
//! doublets), `figure2` (4 triplets), `appendix4` (4 quadruplets) and
//! `appendixE` (20 systems, phi_s variants). Legacy columns whose
//! definitions live outside this crate render as em dashes unless supplied
//! through a sidecar values file.

use crate::iit4;
use crate::measures::{self, find_mip, MeasureKind, Normalization, Side};
use crate::netspec::{self, build_tpm, NetworkSpec};
use crate::partition::{bipartitions, PartitionMode};
use crate::pid::{synergy, PredictorSystem, SolverConfig};
use crate::probcore::{mean_id_past, CausalTriple, VariableView};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Measure(#[from] measures::MeasureError),
    #[error(transparent)]
    Pid(#[from] crate::pid::PidError),
    #[error(transparent)]
    Prob(#[from] crate::probcore::ProbError),
    #[error(transparent)]
    Iit4(#[from] iit4::Iit4Error),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("sidecar line {0}: {1}")]
    Sidecar(usize, String),
}

/// One of the bundled comparison suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Suite {
    Table1,
    Figure2,
    Appendix4,
    AppendixE,
}

impl Suite {
    pub fn parse(text: &str) -> Result<Self, ReportError> {
        match text {
            "table1" => Ok(Suite::Table1),
            "figure2" => Ok(Suite::Figure2),
            "appendix4" => Ok(Suite::Appendix4),
            "appendixE" | "appendixe" => Ok(Suite::AppendixE),
            other => Err(ReportError::UnknownSuite(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Table1 => "table1",
            Suite::Figure2 => "figure2",
            Suite::Appendix4 => "appendix4",
            Suite::AppendixE => "appendixE",
        }
    }

    fn networks(&self) -> Vec<NetworkSpec> {
        let battery = netspec::builtin_battery();
        let pick = |names: &[&str]| -> Vec<NetworkSpec> {
            names.iter().map(|n| battery.iter().find(|s| s.name == *n).unwrap().clone()).collect()
        };
        match self {
            Suite::Table1 => battery[..16].to_vec(),
            Suite::Figure2 => pick(&["GET3", "111", "121", "123"]),
            Suite::Appendix4 => pick(&["GET4", "4422", "4322", "4321"]),
            Suite::AppendixE => {
                let mut nets = battery[..16].to_vec();
                nets.extend(pick(&["GET3", "111", "121", "123"]));
                nets
            }
        }
    }

    /// Column keys in table order. `ext:` columns come from the sidecar.
    pub fn columns(&self) -> Vec<&'static str> {
        match self {
            Suite::Table1 => vec![
                "id_a_s", "ext:phi_2008", "ext:phi_c_2014", "phi_c_2023", "ext:phi_c_2025",
                "phi_c_s1", "mi_a_s", "s_c",
            ],
            Suite::Figure2 | Suite::Appendix4 => vec![
                "id_a_s", "min_phi_c_2023", "max_phi_c_2023", "phi_c_2023", "phi_c_s1",
                "mi_a_s", "s_c",
            ],
            Suite::AppendixE => vec![
                "id_a_s", "ext:phi_2008", "ext:phi_s_2014", "phi_s_2023", "phi_s_s1",
                "mi_a_s", "s_s",
            ],
        }
    }
}

/// A computed cell; `None` renders as an em dash.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct Cell {
    pub value: Option<f64>,
    /// Value is a certified upper bound, not an exact solve.
    pub bounded: bool,
    /// An infinite contribution was excluded and flagged upstream.
    pub infinite: bool,
    /// A negative raw value was clamped to zero somewhere in the average.
    pub clamped: bool,
}

impl Cell {
    fn exact(v: f64) -> Self {
        Cell { value: Some(v), ..Default::default() }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TableRow {
    pub network: String,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TableArtifact {
    pub suite: Suite,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

/// Sidecar values for the legacy columns: `(network, column) -> value`.
#[derive(Debug, Default, Clone)]
pub struct SidecarValues {
    values: BTreeMap<(String, String), f64>,
}

impl SidecarValues {
    /// Parses CSV with a `network` first column and legacy column headers,
    /// e.g. `network,phi_2008,phi_c_2014,phi_c_2025`.
    pub fn parse(text: &str) -> Result<Self, ReportError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| ReportError::Sidecar(0, "empty sidecar".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.first() != Some(&"network") {
            return Err(ReportError::Sidecar(1, "first column must be `network`".into()));
        }
        let mut values = BTreeMap::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != cols.len() {
                return Err(ReportError::Sidecar(i + 1, "field count mismatch".into()));
            }
            for (col, field) in cols.iter().zip(&fields).skip(1) {
                if field.is_empty() {
                    continue;
                }
                let v: f64 = field
                    .parse()
                    .map_err(|_| ReportError::Sidecar(i + 1, format!("bad number `{field}`")))?;
                values.insert((fields[0].to_string(), col.to_string()), v);
            }
        }
        Ok(SidecarValues { values })
    }

    fn get(&self, network: &str, column: &str) -> Option<f64> {
        self.values.get(&(network.to_string(), column.to_string())).copied()
    }
}

/// Per-network quantities shared by the suites.
struct NetworkAnalysis {
    id_a_s: f64,
    mi_a_s: f64,
    iit4: iit4::MipSummary,
    phi_c_s1: Cell,
    phi_s_s1: Cell,
    s_c: f64,
    s_s: f64,
}

fn state_weighted_s1(
    triple: &CausalTriple,
    side: Side,
    cfg: SolverConfig,
) -> Result<Cell, ReportError> {
    let mut acc = 0.0;
    let mut cell = Cell::default();
    for (&s, &p) in &triple.state_marginal() {
        if p <= 0.0 {
            continue;
        }
        let (_, result) =
            find_mip(triple, None, s, MeasureKind::S1, side, Normalization::Unnormalized, cfg)?;
        acc += p * result.value;
        cell.bounded |= result.bounded;
        cell.clamped |= result.clamped;
    }
    cell.value = Some(acc);
    Ok(cell)
}

/// Network-level Shannon synergy minimized over bipartitions, one side.
fn shannon_synergy_mip(
    triple: &CausalTriple,
    side: Side,
    cfg: SolverConfig,
) -> Result<f64, ReportError> {
    let mut best = f64::INFINITY;
    for partition in bipartitions(triple.n(), PartitionMode::Plain) {
        let predictors: Vec<Vec<VariableView>> = partition
            .blocks()
            .iter()
            .map(|b| {
                vec![match side {
                    Side::Cause => VariableView::past(b.clone()),
                    _ => VariableView::future(b.clone()),
                }]
            })
            .collect();
        let sys = PredictorSystem::from_triple(triple, &predictors)?;
        let union = sys.solve_union(cfg)?;
        best = best.min(synergy(&sys, &union, cfg.tol_bits)?);
    }
    Ok(best)
}

fn analyze(spec: &NetworkSpec, cfg: SolverConfig) -> Result<NetworkAnalysis, ReportError> {
    let tpm = build_tpm(spec);
    let triple = CausalTriple::from_tpm(&tpm);
    let all: Vec<usize> = (0..triple.n()).collect();
    let mi_a_s = triple.mutual_information(
        &[VariableView::past(all.clone())],
        &[VariableView::present(all)],
    )?;
    let s_c = shannon_synergy_mip(&triple, Side::Cause, cfg)?;
    let s_e = shannon_synergy_mip(&triple, Side::Effect, cfg)?;
    Ok(NetworkAnalysis {
        id_a_s: mean_id_past(&triple)?,
        mi_a_s,
        iit4: iit4::mip_summary(&tpm)?,
        phi_c_s1: state_weighted_s1(&triple, Side::Cause, cfg)?,
        phi_s_s1: state_weighted_s1(&triple, Side::Both, cfg)?,
        s_c,
        s_s: s_c.min(s_e),
    })
}

/// Runs a suite and assembles its table.
pub fn run_suite(
    suite: Suite,
    cfg: SolverConfig,
    sidecar: Option<&SidecarValues>,
) -> Result<TableArtifact, ReportError> {
    let columns: Vec<String> = suite.columns().iter().map(|c| c.to_string()).collect();
    let mut rows = Vec::new();
    for spec in suite.networks() {
        let a = analyze(&spec, cfg)?;
        let mut cells = Vec::new();
        for col in suite.columns() {
            let cell = match col {
                "id_a_s" => Cell::exact(a.id_a_s),
                "mi_a_s" => Cell::exact(a.mi_a_s),
                "s_c" => Cell::exact(a.s_c),
                "s_s" => Cell::exact(a.s_s),
                "phi_c_2023" => Cell {
                    value: Some(a.iit4.mean_phi_c),
                    infinite: a.iit4.infinite,
                    ..Default::default()
                },
                "phi_s_2023" => Cell {
                    value: Some(a.iit4.mean_phi_s),
                    infinite: a.iit4.infinite,
                    ..Default::default()
                },
                "min_phi_c_2023" => Cell::exact(a.iit4.min_phi_c),
                "max_phi_c_2023" => Cell::exact(a.iit4.max_phi_c),
                "phi_c_s1" => a.phi_c_s1,
                "phi_s_s1" => a.phi_s_s1,
                ext if ext.starts_with("ext:") => Cell {
                    value: sidecar.and_then(|s| s.get(&spec.name, &ext[4..])),
                    ..Default::default()
                },
                other => unreachable!("column {other}"),
            };
            cells.push(cell);
        }
        rows.push(TableRow { network: spec.name.clone(), cells });
    }
    Ok(TableArtifact { suite, columns, rows })
}

/// Rounds half-even to three decimals; display only, comparisons use full
/// precision.
pub fn format_3dp(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_infinite() { "inf".to_string() } else { "nan".to_string() };
    }
    let scaled = v * 1000.0;
    let floor = scaled.floor();
    let frac = scaled - floor;
    let rounded = if (frac - 0.5).abs() < 1e-9 {
        // exact half: round to even
        if (floor as i64) % 2 == 0 {
            floor
        } else {
            floor + 1.0
        }
    } else {
        scaled.round()
    };
    format!("{:.3}", rounded / 1000.0)
}

fn cell_text(cell: &Cell) -> String {
    match cell.value {
        None => "\u{2014}".to_string(),
        Some(v) => {
            let mut text = format_3dp(v);
            if cell.bounded {
                text.push('*');
            }
            if cell.infinite {
                text.push('!');
            }
            text
        }
    }
}

fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// CSV per RFC 4180 quoting, LF line endings. Bounded proxies carry `*`,
/// excluded infinities `!`.
pub fn render_csv(table: &TableArtifact) -> String {
    let mut out = String::new();
    out.push_str("network");
    for c in &table.columns {
        out.push(',');
        out.push_str(&csv_quote(c));
    }
    out.push('\n');
    for row in &table.rows {
        out.push_str(&csv_quote(&row.network));
        for cell in &row.cells {
            out.push(',');
            out.push_str(&csv_quote(&cell_text(cell)));
        }
        out.push('\n');
    }
    out
}

/// Markdown table with the same values and markers as the CSV form.
pub fn render_markdown(table: &TableArtifact) -> String {
    let mut out = String::new();
    out.push_str("| network |");
    for c in &table.columns {
        out.push_str(&format!(" {c} |"));
    }
    out.push('\n');
    out.push_str("| --- |");
    for _ in &table.columns {
        out.push_str(" --- |");
    }
    out.push('\n');
    for row in &table.rows {
        out.push_str(&format!("| {} |", row.network));
        for cell in &row.cells {
            out.push_str(&format!(" {} |", cell_text(cell)));
        }
        out.push('\n');
    }
    out
}

/// JSON with full-precision values and explicit flags.
pub fn render_json(table: &TableArtifact) -> String {
    let mut text = serde_json::to_string_pretty(table).expect("table serializes");
    text.push('\n');
    text
}

/// One reference-table deviation found by `--check`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Mismatch {
    pub network: String,
    pub column: String,
    pub got: f64,
    pub want: f64,
}

/// Reference values for the bundled suites, keyed `(network, column)`.
/// Used by `--check` and the regression tests. Tolerance is +/- 0.001.
pub fn reference_values(suite: Suite) -> Vec<(&'static str, &'static str, f64)> {
    // (network, column, value)
    const T1: &[(&str, f64, f64, f64, f64)] = &[
        // (name, id_a_s, phi_c_2023, phi_c_s1, s_c); mi_a_s listed below
        ("ZERO-ZERO", 0.0, 0.0, 0.0, 0.0),
        ("KEEP-ZERO", 0.500, 0.0, 0.0, 0.0),
        ("KEEP-KEEP", 2.000, 0.0, 0.0, 0.0),
        ("GET-ZERO", 0.500, 0.0, 0.0, 0.0),
        ("GET-KEEP", 0.500, 0.0, 0.0, 0.0),
        ("GET-GET", 2.000, 2.000, 0.0, 0.0),
        ("AND-ZERO", 0.604, 0.0, 0.354, 0.500),
        ("AND-KEEP", 1.250, 0.0, 0.0, 0.0),
        ("AND-GET", 1.250, 0.750, 0.0, 0.0),
        ("AND-AND", 0.604, 0.500, 0.354, 0.500),
        ("AND-XOR", 1.250, 0.500, 0.750, 1.000),
        ("XOR-ZERO", 0.500, 0.0, 0.500, 1.000),
        ("XOR-KEEP", 2.000, 0.0, 0.0, 0.0),
        ("XOR-GET", 2.000, 2.000, 0.0, 0.0),
        ("XOR-AND", 1.250, 0.500, 0.750, 1.000),
        ("XOR-XOR", 0.500, 1.000, 0.500, 1.000),
    ];
    const T1_MI: &[f64] = &[
        0.0, 1.000, 2.000, 1.000, 1.000, 2.000, 0.811, 1.500, 1.500, 0.811, 1.500, 1.000, 2.000,
        2.000, 1.500, 1.000,
    ];
    // (name, id, min, max, mean phi_c_2023, phi_c_s1, mi, s_c)
    const FIG2: &[(&str, f64, f64, f64, f64, f64, f64, f64)] = &[
        ("GET3", 3.000, 2.000, 2.000, 2.000, 0.0, 3.000, 0.0),
        ("111", 0.399, 0.0, 6.000, 0.750, 0.149, 0.544, 0.250),
        ("121", 0.677, 0.0, 0.415, 0.052, 0.426, 1.406, 0.750),
        ("123", 1.104, 0.0, 0.0, 0.0, 0.604, 1.811, 1.000),
    ];
    const APP4: &[(&str, f64, f64, f64, f64, f64, f64, f64)] = &[
        ("GET4", 4.000, 2.000, 2.000, 2.000, 0.0, 4.000, 0.0),
        ("4422", 0.397, 0.0, 0.0, 0.0, 0.198, 1.198, 0.500),
        ("4322", 0.568, 0.0, 0.0, 0.0, 0.369, 1.805, 0.875),
        ("4321", 0.838, 0.0, 0.0, 0.0, 0.455, 2.031, 1.000),
    ];
    // (name, phi_s_2023); id/mi shared with Table 1, phi_s_s1 and s_s are 0.
    const APPE_PHI_S: &[(&str, f64)] = &[
        ("ZERO-ZERO", 0.0), ("KEEP-ZERO", 0.0), ("KEEP-KEEP", 0.0), ("GET-ZERO", 0.0),
        ("GET-KEEP", 0.0), ("GET-GET", 2.000), ("AND-ZERO", 0.0), ("AND-KEEP", 0.0),
        ("AND-GET", 0.500), ("AND-AND", 0.500), ("AND-XOR", 0.500), ("XOR-ZERO", 0.0),
        ("XOR-KEEP", 0.0), ("XOR-GET", 2.000), ("XOR-AND", 0.500), ("XOR-XOR", 1.000),
        ("GET3", 2.000), ("111", 0.750), ("121", 0.052), ("123", 0.0),
    ];
    const TRIPLET_ID_MI: &[(&str, f64, f64)] =
        &[("GET3", 3.000, 3.000), ("111", 0.399, 0.544), ("121", 0.677, 1.406), ("123", 1.104, 1.811)];

    let mut out = Vec::new();
    match suite {
        Suite::Table1 => {
            for (i, &(name, id, phic, s1, sc)) in T1.iter().enumerate() {
                out.push((name, "id_a_s", id));
                out.push((name, "phi_c_2023", phic));
                out.push((name, "phi_c_s1", s1));
                out.push((name, "mi_a_s", T1_MI[i]));
                out.push((name, "s_c", sc));
            }
        }
        Suite::Figure2 | Suite::Appendix4 => {
            let src = if suite == Suite::Figure2 { FIG2 } else { APP4 };
            for &(name, id, min, max, mean, s1, mi, sc) in src {
                out.push((name, "id_a_s", id));
                out.push((name, "min_phi_c_2023", min));
                out.push((name, "max_phi_c_2023", max));
                out.push((name, "phi_c_2023", mean));
                out.push((name, "phi_c_s1", s1));
                out.push((name, "mi_a_s", mi));
                out.push((name, "s_c", sc));
            }
        }
        Suite::AppendixE => {
            for &(name, phis) in APPE_PHI_S {
                out.push((name, "phi_s_2023", phis));
                out.push((name, "phi_s_s1", 0.0));
                out.push((name, "s_s", 0.0));
                if let Some((i, _)) = T1.iter().enumerate().find(|(_, r)| r.0 == name) {
                    out.push((name, "id_a_s", T1[i].1));
                    out.push((name, "mi_a_s", T1_MI[i]));
                } else if let Some(&(_, id, mi)) = TRIPLET_ID_MI.iter().find(|r| r.0 == name) {
                    out.push((name, "id_a_s", id));
                    out.push((name, "mi_a_s", mi));
                }
            }
        }
    }
    out
}

/// Compares a computed table against the bundled reference values.
pub fn check_against_reference(table: &TableArtifact) -> Vec<Mismatch> {
    let mut mismatches = Vec::new();
    let refs = reference_values(table.suite);
    for (network, column, want) in refs {
        let Some(row) = table.rows.iter().find(|r| r.network == network) else {
            continue;
        };
        let Some(idx) = table.columns.iter().position(|c| c == column) else {
            continue;
        };
        if let Some(got) = row.cells[idx].value {
            if (got - want).abs() > 1e-3 {
                mismatches.push(Mismatch {
                    network: network.to_string(),
                    column: column.to_string(),
                    got,
                    want,
                });
            }
        }
    }
    mismatches
}
