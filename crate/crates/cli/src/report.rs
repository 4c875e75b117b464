//! Run reports.

use std::collections::BTreeMap;

use manifold_mean_core::AveragedSection64;
use serde::Serialize;
use serde_json::Value;

/// One checked inequality.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ContractRow {
    pub name: String,
    /// `None` when the quantity could not be evaluated; the row then fails.
    pub measured: Option<f64>,
    pub bound: f64,
    /// How `measured` must compare to `bound`: one of `<`, `<=`, `>`.
    pub relation: &'static str,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ContractRow {
    fn new(name: impl Into<String>, measured: f64, bound: f64, relation: &'static str) -> Self {
        let pass = match relation {
            "<" => measured < bound,
            "<=" => measured <= bound,
            ">" => measured > bound,
            _ => unreachable!("unknown relation {relation}"),
        };
        Self { name: name.into(), measured: Some(measured), bound, relation, pass, ratio: None, note: None }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, bound, "<=")
    }

    pub fn below(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, bound, "<")
    }

    pub fn above(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, bound, ">")
    }

    /// A row whose quantity could not be computed.
    pub fn failed(name: impl Into<String>, bound: f64, relation: &'static str, note: impl Into<String>) -> Self {
        Self { name: name.into(), measured: None, bound, relation, pass: false, ratio: None, note: Some(note.into()) }
    }

    pub fn with_ratio(mut self) -> Self {
        self.ratio = self.measured.map(|m| if self.bound != 0.0 { m / self.bound } else { f64::INFINITY });
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Per-slice solver figures.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SliceSummary {
    pub slices: usize,
    pub max_residual: f64,
    pub min_jacobian_eigenvalue: f64,
    pub max_offset: f64,
    /// Newton iteration count → number of slices.
    pub iteration_histogram: BTreeMap<usize, usize>,
}

impl SliceSummary {
    pub fn of(section: &AveragedSection64) -> Self {
        let mut hist = BTreeMap::new();
        for d in &section.per_slice {
            *hist.entry(d.iterations).or_insert(0) += 1;
        }
        let s = &section.summary;
        Self {
            slices: section.per_slice.len(),
            max_residual: s.max_residual,
            min_jacobian_eigenvalue: s.min_jacobian_eigenvalue,
            max_offset: s.max_offset,
            iteration_histogram: hist,
        }
    }
}

/// Outcome of one estimate suite (diagnose or selftest).
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SuiteOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub rows: Vec<ContractRow>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.rows.iter().all(|r| r.pass)
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Timing {
    pub wall_seconds: f64,
}

/// Everything a command reports. Serialized with `timing` last; it is the
/// only field that varies between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub scene: Value,
    pub seed: u64,
    pub solver: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub contracts: Vec<ContractRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slices: Option<SliceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariance: Option<f64>,
    pub estimates: Vec<SuiteOutcome>,
    pub data: Value,
    pub artifacts: Vec<String>,
    pub passed: bool,
    pub timing: Timing,
}

impl RunReport {
    pub fn new(command: &str, scene: Value, seed: u64, solver: Value) -> Self {
        Self {
            command: command.into(),
            scene,
            seed,
            solver,
            epsilon: None,
            contracts: Vec::new(),
            slices: None,
            invariance: None,
            estimates: Vec::new(),
            data: Value::Null,
            artifacts: Vec::new(),
            passed: false,
            timing: Timing { wall_seconds: 0.0 },
        }
    }

    /// Set `passed` from the contract rows and suites.
    pub fn finish(&mut self, wall_seconds: f64) {
        self.passed = self.contracts.iter().all(|r| r.pass) && self.estimates.iter().all(SuiteOutcome::passed);
        self.timing.wall_seconds = wall_seconds;
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human summary for stdout.
    pub fn summary_text(&self) -> String {
        let mut out = format!("{}: {}\n", self.command, if self.passed { "PASS" } else { "FAIL" });
        if let Some(e) = self.epsilon {
            out.push_str(&format!("  epsilon = {e:.6e}\n"));
        }
        let rows = self.contracts.iter().chain(self.estimates.iter().flat_map(|s| &s.rows));
        for r in rows {
            let m = r.measured.map_or("n/a".to_string(), |m| format!("{m:.6e}"));
            out.push_str(&format!(
                "  [{}] {}: {} {} {:.6e}{}\n",
                if r.pass { "ok" } else { "FAIL" },
                r.name,
                m,
                r.relation,
                r.bound,
                r.note.as_ref().map_or(String::new(), |n| format!(" ({n})"))
            ));
        }
        for s in &self.estimates {
            out.push_str(&format!("  suite {}: {} cases, {} failures\n", s.name, s.cases, s.failures));
        }
        out
    }
}

/// Contract rows of an averaged section: the C⁰ and C¹ bounds and the
/// per-slice solver certificates. Row names are prefixed with `label`.
pub fn section_contracts(section: &AveragedSection64, tol: f64, label: &str) -> Vec<ContractRow> {
    let summary = &section.summary;
    let slack = manifold_mean_core::averaging::CONTRACT_SLACK;
    let scaled_residual =
        section.per_slice.iter().map(|d| d.residual / (1.0 + d.offset_norm)).fold(0.0, f64::max);
    vec![
        ContractRow::at_most(format!("{label}c0_offset"), summary.max_offset, summary.c0_bound() + slack)
            .with_ratio()
            .with_note("max |w| <= 100 epsilon"),
        ContractRow::at_most(format!("{label}c1_distance"), summary.max_member_c1(), summary.c1_bound() + slack)
            .with_ratio()
            .with_note("max over members of c1_distance(member, average) <= 136 sqrt(epsilon)"),
        ContractRow::at_most(format!("{label}slice_radius"), summary.max_offset, summary.r_max),
        ContractRow::below(format!("{label}slice_residual"), scaled_residual, tol).with_note("residual / (1 + |w|)"),
        ContractRow::above(format!("{label}slice_jacobian_min_eigenvalue"), summary.min_jacobian_eigenvalue, 0.0),
    ]
}
