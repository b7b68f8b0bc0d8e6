//! Machine-readable reports. Every report embeds the job description for
//! provenance, and all collections are ordered so identical jobs produce
//! byte-identical output.

use serde::Serialize;

/// Echo of the command invocation embedded in every report.
#[derive(Clone, Debug, Serialize)]
pub struct JobSpec {
    pub command: String,
    pub type_label: String,
    pub rank: usize,
    pub perm: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    pub format: String,
    pub threads: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FoldReport {
    pub job: JobSpec,
    pub folded_type: String,
    pub folded_rank: usize,
    /// 1-based node orbits.
    pub orbits: Vec<Vec<usize>>,
    pub stabilizer_sizes: Vec<usize>,
    pub folded_cartan: Vec<Vec<i64>>,
    /// The same matrix recomputed from the fixed-point Chevalley generators.
    pub folded_cartan_fixed_point_oracle: Vec<Vec<i64>>,
    /// `P_0^+` generator multipliers (2 at the doubled `A_{2n}` node).
    pub p0_multipliers: Vec<i64>,
    pub graded_dims: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightLine {
    pub weight: Vec<i64>,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeylReport {
    pub job: JobSpec,
    /// Highest weight in orbit-coroot coordinates.
    pub lambda0: Vec<i64>,
    /// `tau = wt(xi)` of the chi-admissible choice, ambient coordinates.
    pub tau: Vec<i64>,
    pub dim: usize,
    /// Certified stabilization depth of the defining ideal.
    pub depth: usize,
    pub twisted_cyclic: bool,
    pub character0: Vec<WeightLine>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub job: JobSpec,
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckLine>,
}

impl VerifyReport {
    pub fn push(&mut self, name: impl Into<String>, pass: bool, witness: Option<String>) {
        if !pass {
            self.passed = false;
        }
        self.checks.push(CheckLine { name: name.into(), pass, witness });
    }
}

/// Render a report as pretty JSON (stable field order).
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("serializable report");
    out.push('\n');
    out
}

/// CSV rendering of a character table.
pub fn character_csv(lines: &[WeightLine]) -> String {
    let mut out = String::from("weight,multiplicity\n");
    for l in lines {
        let coords: Vec<String> = l.weight.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!("\"{}\",{}\n", coords.join(" "), l.multiplicity));
    }
    out
}

/// Text rendering of a verify report: one line per check.
pub fn verify_text(report: &VerifyReport) -> String {
    let mut out = String::new();
    for c in &report.checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        out.push_str(&format!("{status} {}", c.name));
        if let Some(w) = &c.witness {
            out.push_str(&format!(" [{w}]"));
        }
        out.push('\n');
    }
    out.push_str(&format!(
        "suite {}: {}\n",
        report.suite,
        if report.passed { "PASS" } else { "FAIL" }
    ));
    out
}
