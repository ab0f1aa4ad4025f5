//! The report produced by a suite run and its table, csv, json and plotdata forms.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use orbitgrowth::growth::{GrowthClass, Level};
use orbitgrowth::measures::MeasureRecord;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Format};

pub const CSV_HEADER: [&str; 11] = [
    "suite",
    "system",
    "level",
    "epsilon",
    "n",
    "count_exact",
    "count_greedy",
    "class_family",
    "class_param",
    "check_name",
    "check_pass",
];

/// One cell of the count table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub level: Level,
    pub epsilon: String,
    pub n: usize,
    pub count_exact: Option<usize>,
    pub count_greedy: Option<usize>,
    /// What is counted, when it is not a separated or spanning number.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantity: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub level: Level,
    /// `None` for the supremum over the schedule.
    pub epsilon: Option<String>,
    pub class: GrowthClass,
}

/// Evidence for a failed check, small enough to verify by hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Witness {
    /// Base points, by label.
    Points {
        labels: Vec<String>,
    },
    /// Two hyperpoints, each a set of labels.
    Sets {
        a: Vec<String>,
        b: Vec<String>,
    },
    Measures {
        measures: Vec<MeasureRecord>,
    },
    Text {
        detail: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub level: Level,
    pub epsilon: Option<String>,
    pub n: Option<usize>,
    /// The inequality or identity tested, with both sides evaluated.
    pub instance: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureSet {
    pub name: String,
    pub measures: Vec<MeasureRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub core_version: String,
    pub cli_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub system: String,
    pub counts: Vec<CountRow>,
    pub verdicts: Vec<VerdictRow>,
    pub checks: Vec<CheckRow>,
    /// Measure sets a suite constructed, for re-verification.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub measures: Vec<MeasureSet>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Errors that cut the run short; results before them are kept.
    pub errors: Vec<String>,
    pub config: Option<ExperimentConfig>,
    pub provenance: Option<Provenance>,
}

impl Report {
    pub fn empty(suite: &str, system: &str) -> Self {
        Report {
            suite: suite.to_string(),
            system: system.to_string(),
            counts: Vec::new(),
            verdicts: Vec::new(),
            checks: Vec::new(),
            measures: Vec::new(),
            notes: Vec::new(),
            errors: Vec::new(),
            config: None,
            provenance: None,
        }
    }

    pub fn new(config: &ExperimentConfig) -> Self {
        let mut report = Report::empty(config.suite.name(), &config.system.to_string());
        report.provenance = Some(Provenance {
            config_hash: config.hash(),
            core_version: orbitgrowth::VERSION.to_string(),
            cli_version: env!("CARGO_PKG_VERSION").to_string(),
        });
        report.config = Some(config.clone());
        report
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckRow> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// 2 when the run hit an error, 1 when a check failed, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        if !self.errors.is_empty() {
            2
        } else if self.failed_checks().next().is_some() {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn csv_records(&self) -> Vec<[String; 11]> {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let level = |l: Level| format!("{l:?}").to_lowercase();
        let mut rows = Vec::new();
        for c in &self.counts {
            rows.push([
                self.suite.clone(),
                self.system.clone(),
                level(c.level),
                c.epsilon.clone(),
                c.n.to_string(),
                opt(c.count_exact),
                opt(c.count_greedy),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]);
        }
        for v in &self.verdicts {
            rows.push([
                self.suite.clone(),
                self.system.clone(),
                level(v.level),
                v.epsilon.clone().unwrap_or_else(|| "sup".into()),
                String::new(),
                String::new(),
                String::new(),
                v.class.family.name().to_string(),
                v.class.family.param().map(|p| format!("{p:.6}")).unwrap_or_default(),
                String::new(),
                String::new(),
            ]);
        }
        for c in &self.checks {
            rows.push([
                self.suite.clone(),
                self.system.clone(),
                level(c.level),
                c.epsilon.clone().unwrap_or_default(),
                opt(c.n),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                c.name.clone(),
                c.pass.to_string(),
            ]);
        }
        rows
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for row in self.csv_records() {
            w.write_record(&row)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    /// Blank-line separated `n count` blocks, one per level and epsilon.
    pub fn to_plotdata(&self) -> String {
        let mut out = String::new();
        let mut series: Vec<(Level, &str)> = Vec::new();
        for c in &self.counts {
            if !series.contains(&(c.level, c.epsilon.as_str())) {
                series.push((c.level, &c.epsilon));
            }
        }
        for (level, eps) in series {
            let _ = writeln!(out, "# {} {} level={level:?} epsilon={eps}", self.suite, self.system);
            let _ = writeln!(out, "# n count_exact count_greedy");
            for c in self.counts.iter().filter(|c| c.level == level && c.epsilon == eps) {
                let cell = |v: Option<usize>| v.map_or("nan".to_string(), |x| x.to_string());
                let _ = writeln!(out, "{} {} {}", c.n, cell(c.count_exact), cell(c.count_greedy));
            }
            out.push_str("\n\n");
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "suite {}  system {}", self.suite, self.system);
        if let Some(p) = &self.provenance {
            let _ = writeln!(out, "config {}  orbitgrowth {}", &p.config_hash[..16], p.core_version);
        }
        if !self.counts.is_empty() {
            let _ = writeln!(
                out,
                "\n{:<8} {:>8} {:>4} {:>8} {:>8}",
                "level", "epsilon", "n", "exact", "greedy"
            );
            for c in &self.counts {
                let cell = |v: Option<usize>| v.map_or("-".to_string(), |x| x.to_string());
                let _ = writeln!(
                    out,
                    "{:<8} {:>8} {:>4} {:>8} {:>8}{}",
                    format!("{:?}", c.level).to_lowercase(),
                    c.epsilon,
                    c.n,
                    cell(c.count_exact),
                    cell(c.count_greedy),
                    c.quantity.as_ref().map(|q| format!("  {q}")).unwrap_or_default()
                );
            }
        }
        if !self.verdicts.is_empty() {
            out.push('\n');
            for v in &self.verdicts {
                let eps = v.epsilon.as_deref().unwrap_or("sup");
                let _ = writeln!(out, "class {:?} eps={eps}: {}", v.level, v.class.family);
            }
        }
        if !self.checks.is_empty() {
            let failed: Vec<&CheckRow> = self.failed_checks().collect();
            let _ = writeln!(
                out,
                "\nchecks: {} of {} pass",
                self.checks.len() - failed.len(),
                self.checks.len()
            );
            for c in failed {
                let _ = writeln!(out, "FAIL {}: {}", c.name, c.instance);
                if let Some(w) = &c.witness {
                    let _ = writeln!(out, "     witness {}", serde_json::to_string(w).unwrap_or_default());
                }
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        for e in &self.errors {
            let _ = writeln!(out, "ERROR: {e}");
        }
        out
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Table => Ok(self.to_table()),
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
            Format::Plotdata => Ok(self.to_plotdata()),
        }
    }

    /// Writes one file per format into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut paths = Vec::new();
        for &format in formats {
            let name = match format {
                Format::Table => "report.txt",
                Format::Csv => "report.csv",
                Format::Json => "report.json",
                Format::Plotdata => "plotdata.dat",
            };
            let path = dir.join(name);
            std::fs::write(&path, self.render(format)?).with_context(|| format!("writing {}", path.display()))?;
            paths.push(path);
        }
        Ok(paths)
    }
}

/// Rows present in one report but not the other, by their csv form, plus a
/// note when the configs differ.
pub fn diff(a: &Report, b: &Report) -> Result<Vec<String>> {
    let rows = |r: &Report| -> BTreeSet<String> { r.csv_records().iter().map(|row| row.join(",")).collect() };
    let (ra, rb) = (rows(a), rows(b));
    let mut out = Vec::new();
    let hash = |r: &Report| r.provenance.as_ref().map(|p| p.config_hash.clone());
    if hash(a) != hash(b) {
        out.push(format!(
            "config hash {} vs {}",
            hash(a).unwrap_or_default(),
            hash(b).unwrap_or_default()
        ));
    }
    out.extend(ra.difference(&rb).map(|r| format!("- {r}")));
    out.extend(rb.difference(&ra).map(|r| format!("+ {r}")));
    let witnesses =
        |r: &Report| -> BTreeSet<String> { r.checks.iter().map(|c| format!("{} {}", c.name, c.instance)).collect() };
    let (wa, wb) = (witnesses(a), witnesses(b));
    out.extend(wa.difference(&wb).map(|r| format!("- check {r}")));
    out.extend(wb.difference(&wa).map(|r| format!("+ check {r}")));
    out.extend(
        a.errors
            .iter()
            .filter(|e| !b.errors.contains(e))
            .map(|e| format!("- error {e}")),
    );
    out.extend(
        b.errors
            .iter()
            .filter(|e| !a.errors.contains(e))
            .map(|e| format!("+ error {e}")),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use orbitgrowth::growth::Family;

    use super::*;

    fn sample() -> Report {
        let mut r = Report::empty("growth", "identity-8");
        r.counts.push(CountRow {
            level: Level::Base,
            epsilon: "1/4".into(),
            n: 3,
            count_exact: Some(5),
            count_greedy: None,
            quantity: None,
        });
        r.verdicts.push(VerdictRow {
            level: Level::Base,
            epsilon: None,
            class: GrowthClass::symbolic(Family::Poly(1.5)),
        });
        r.checks.push(CheckRow {
            name: "monotone-in-n".into(),
            level: Level::Base,
            epsilon: Some("1/4".into()),
            n: Some(3),
            instance: "5 <= 6".into(),
            pass: false,
            witness: Some(Witness::Points {
                labels: vec!["0".into()],
            }),
        });
        r
    }

    #[test]
    fn empty_report_is_header_only_csv() {
        let csv = Report::empty("growth", "identity-8").to_csv().unwrap();
        assert_eq!(csv, format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn csv_rows_fill_their_columns() {
        let csv = sample().to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "growth,identity-8,base,1/4,3,5,,,,,");
        assert_eq!(lines[2], "growth,identity-8,base,sup,,,,Poly,1.500000,,");
        assert_eq!(lines[3], "growth,identity-8,base,1/4,3,,,,,monotone-in-n,false");
    }

    #[test]
    fn json_round_trips() {
        let r = sample();
        let back = Report::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn plotdata_has_one_block_per_series() {
        let text = sample().to_plotdata();
        assert!(text.contains("epsilon=1/4"));
        assert!(text.contains("\n3 5 nan\n"));
    }

    #[test]
    fn diff_finds_changed_rows() {
        let a = sample();
        assert!(diff(&a, &a).unwrap().is_empty());
        let mut b = a.clone();
        b.counts[0].count_exact = Some(6);
        let d = diff(&a, &b).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d[0].starts_with("- ") && d[1].starts_with("+ "));
    }
}
