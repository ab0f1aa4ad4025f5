//! Experiment configuration: the TOML file, command-line overrides and suite defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use orbitgrowth::growth::Level;
use orbitgrowth::hyperspace::DEFAULT_HYPER_CAP;
use orbitgrowth::separation::{CountKind, Limits, Mode, DEFAULT_EXACT_CAP, DEFAULT_NODE_LIMIT};
use orbitgrowth::space::ratio_string;
use orbitgrowth::zoo::{ZooKind, ZooSpec, CATALOG};
use orbitgrowth::{parse_ratio, Ratio};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Growth,
    HyperBounds,
    MeasureSquaring,
    PsiEmbedding,
    Quotient,
    SubshiftExample,
    MorseSmale,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Growth,
        Suite::HyperBounds,
        Suite::MeasureSquaring,
        Suite::PsiEmbedding,
        Suite::Quotient,
        Suite::SubshiftExample,
        Suite::MorseSmale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Growth => "growth",
            Suite::HyperBounds => "hyper-bounds",
            Suite::MeasureSquaring => "measure-squaring",
            Suite::PsiEmbedding => "psi-embedding",
            Suite::Quotient => "quotient",
            Suite::SubshiftExample => "subshift-example",
            Suite::MorseSmale => "morse-smale",
        }
    }

    /// Suites whose purpose is a ledger of inequality checks (accepted by `check`).
    pub fn is_lemma_suite(self) -> bool {
        !matches!(self, Suite::Growth)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|suite| suite.name() == s).with_context(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
            format!("unknown suite {s:?}; expected one of {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Csv,
    Json,
    Plotdata,
}

impl FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "table" => Format::Table,
            "csv" => Format::Csv,
            "json" => Format::Json,
            "plotdata" => Format::Plotdata,
            other => bail!("unknown format {other:?}; expected table, csv, json or plotdata"),
        })
    }
}

/// Parses a comma-separated format list such as `json,csv`.
pub fn parse_formats(list: &str) -> Result<Vec<Format>> {
    let formats = list.split(',').map(Format::from_str).collect::<Result<Vec<_>>>()?;
    if formats.is_empty() {
        bail!("format list is empty");
    }
    Ok(formats)
}

/// The `[system]` table. Parameters that do not belong to `kind` are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemTable {
    pub kind: String,
    pub resolution: usize,
    pub alpha: Option<String>,
    pub pairs: Option<usize>,
    pub lambda: Option<f64>,
}

impl SystemTable {
    pub fn to_spec(&self) -> Result<ZooSpec> {
        let extra = |name: &str, present: bool| -> Result<()> {
            if present {
                bail!("system kind {:?} takes no `{name}`", self.kind);
            }
            Ok(())
        };
        let kind = match self.kind.as_str() {
            "rotation" => {
                extra("pairs", self.pairs.is_some())?;
                extra("lambda", self.lambda.is_some())?;
                ZooKind::Rotation {
                    alpha: self.alpha.clone().context("rotation needs `alpha`")?,
                }
            }
            "morse-smale" => {
                extra("alpha", self.alpha.is_some())?;
                ZooKind::MorseSmale {
                    pairs: self.pairs.context("morse-smale needs `pairs`")?,
                    lambda: self.lambda.context("morse-smale needs `lambda`")?,
                }
            }
            other => {
                extra("alpha", self.alpha.is_some())?;
                extra("pairs", self.pairs.is_some())?;
                extra("lambda", self.lambda.is_some())?;
                match other {
                    "identity" => ZooKind::Identity,
                    "doubling" => ZooKind::Doubling,
                    "full-shift" => ZooKind::FullShift,
                    "single-one" => ZooKind::SingleOne,
                    _ => {
                        let kinds: Vec<&str> = CATALOG.iter().map(|k| k.0).collect();
                        bail!("unknown system kind {other:?}; expected one of {}", kinds.join(", "))
                    }
                }
            }
        };
        Ok(ZooSpec::new(kind, self.resolution))
    }
}

/// The config file as written. Every key is optional; unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub suite: Option<Suite>,
    pub system: Option<SystemTable>,
    pub level: Option<Level>,
    pub mode: Option<Mode>,
    pub count: Option<CountKind>,
    pub epsilons: Option<Vec<String>>,
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    pub window: Option<usize>,
    pub exact_cap: Option<usize>,
    pub hyper_cap: Option<usize>,
    pub node_limit: Option<u64>,
    pub measure_l: Option<usize>,
    pub pool_cap: Option<usize>,
    pub sizes: Option<Vec<usize>>,
    pub pairs: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Values given on the command line; they take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub suite: Option<Suite>,
    pub seed: Option<u64>,
    pub exact_cap: Option<usize>,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
}

/// A fully resolved experiment. Its JSON form is what the config hash covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub system: ZooSpec,
    pub level: Level,
    pub mode: Mode,
    pub count: CountKind,
    /// Strictly decreasing, written as reduced fractions.
    pub epsilons: Vec<String>,
    pub n_min: usize,
    pub n_max: usize,
    pub window: Option<usize>,
    pub exact_cap: usize,
    pub hyper_cap: usize,
    pub node_limit: u64,
    pub measure_l: usize,
    pub pool_cap: usize,
    pub sizes: Vec<usize>,
    pub pairs: usize,
    pub seed: u64,
}

/// Where and how the report is written; not part of the experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputOptions {
    pub out: Option<PathBuf>,
    pub formats: Vec<Format>,
}

struct SuiteDefaults {
    system: ZooSpec,
    mode: Mode,
    count: CountKind,
    epsilons: &'static [&'static str],
    ns: (usize, usize),
    window: Option<usize>,
    hyper_cap: usize,
    measure_l: usize,
}

fn ms(pairs: usize, lambda: f64, g: usize) -> ZooSpec {
    ZooSpec::new(ZooKind::MorseSmale { pairs, lambda }, g)
}

fn defaults(suite: Suite) -> SuiteDefaults {
    let base = SuiteDefaults {
        system: ZooSpec::new(ZooKind::Identity, 8),
        mode: Mode::Exact,
        count: CountKind::Spanning,
        epsilons: &["1/2", "1/4"],
        ns: (1, 12),
        window: None,
        hyper_cap: DEFAULT_HYPER_CAP,
        measure_l: 2,
    };
    match suite {
        Suite::Growth => base,
        Suite::HyperBounds => SuiteDefaults {
            system: ZooSpec::new(ZooKind::Doubling, 10),
            epsilons: &["1/2", "1/3", "1/4", "1/6"],
            ns: (1, 5),
            hyper_cap: 12,
            ..base
        },
        Suite::MeasureSquaring => SuiteDefaults {
            system: ZooSpec::new(ZooKind::Doubling, 16),
            epsilons: &["1/8"],
            ns: (2, 2),
            measure_l: 3,
            ..base
        },
        Suite::PsiEmbedding => SuiteDefaults {
            system: ZooSpec::new(ZooKind::Rotation { alpha: "1/4".into() }, 12),
            epsilons: &["1/17"],
            ns: (1, 1),
            measure_l: 4,
            ..base
        },
        Suite::Quotient => SuiteDefaults {
            system: ms(1, 0.5, 12),
            count: CountKind::Separated,
            epsilons: &["1/2", "1/4", "1/6"],
            ns: (1, 4),
            ..base
        },
        Suite::SubshiftExample => SuiteDefaults {
            system: ZooSpec::new(ZooKind::SingleOne, 12),
            epsilons: &["1"],
            ns: (1, 12),
            ..base
        },
        Suite::MorseSmale => SuiteDefaults {
            system: ms(1, 0.5, 4096),
            mode: Mode::Greedy,
            count: CountKind::Separated,
            epsilons: &["1/8", "1/16"],
            ns: (1, 16),
            window: Some(16),
            ..base
        },
    }
}

impl ExperimentConfig {
    /// Merges file values, overrides and the defaults of the chosen suite, then validates.
    pub fn resolve(file: ConfigFile, overrides: &Overrides) -> Result<(Self, OutputOptions)> {
        let suite = overrides
            .suite
            .or(file.suite)
            .context("no suite given; set `suite` in the config or pass --suite")?;
        let d = defaults(suite);
        let epsilons = match file.epsilons {
            Some(list) => list,
            None => d.epsilons.iter().map(|s| s.to_string()).collect(),
        };
        let schedule = epsilons
            .iter()
            .map(|e| parse_ratio(e).with_context(|| format!("epsilon {e:?}")))
            .collect::<Result<Vec<_>>>()?;
        let config = ExperimentConfig {
            suite,
            system: match &file.system {
                Some(table) => table.to_spec()?,
                None => d.system,
            },
            level: file.level.unwrap_or(Level::Base),
            mode: file.mode.unwrap_or(d.mode),
            count: file.count.unwrap_or(d.count),
            epsilons: schedule.iter().map(|&e| ratio_string(e)).collect(),
            n_min: file.n_min.unwrap_or(d.ns.0),
            n_max: file.n_max.unwrap_or(d.ns.1),
            window: file.window.or(d.window),
            exact_cap: overrides.exact_cap.or(file.exact_cap).unwrap_or(DEFAULT_EXACT_CAP),
            hyper_cap: file.hyper_cap.unwrap_or(d.hyper_cap),
            node_limit: file.node_limit.unwrap_or(DEFAULT_NODE_LIMIT),
            measure_l: file.measure_l.unwrap_or(d.measure_l),
            pool_cap: file.pool_cap.unwrap_or(48),
            sizes: file.sizes.unwrap_or_else(|| vec![2, 3, 4]),
            pairs: file.pairs.unwrap_or(240),
            seed: overrides.seed.or(file.seed).unwrap_or(0),
        };
        config.validate(&schedule)?;
        let output = OutputOptions {
            out: overrides.out.clone().or(file.out),
            formats: overrides
                .formats
                .clone()
                .or(file.formats)
                .unwrap_or_else(|| vec![Format::Table]),
        };
        Ok((config, output))
    }

    fn validate(&self, schedule: &[Ratio]) -> Result<()> {
        if schedule.is_empty() {
            bail!("epsilon schedule is empty");
        }
        if let Some(e) = schedule.iter().find(|e| **e <= Ratio::from_integer(0)) {
            bail!("epsilon {} is not positive", ratio_string(*e));
        }
        if let Some(w) = schedule.windows(2).find(|w| w[1] >= w[0]) {
            bail!(
                "epsilon schedule must be strictly decreasing, but {} is followed by {}",
                ratio_string(w[0]),
                ratio_string(w[1])
            );
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            bail!("n-range {}..={} is empty or starts at 0", self.n_min, self.n_max);
        }
        if self.measure_l == 0 {
            bail!("measure_l must be at least 1");
        }
        if self.window == Some(0) {
            bail!("window must be positive");
        }
        if matches!(self.suite, Suite::Growth | Suite::MorseSmale) && self.ns().len() < 6 {
            bail!("{} needs at least 6 values of n to classify growth", self.suite);
        }
        if self.suite == Suite::MeasureSquaring && self.sizes.contains(&0) {
            bail!("squaring set sizes must be positive");
        }
        Ok(())
    }

    pub fn schedule(&self) -> Vec<Ratio> {
        self.epsilons
            .iter()
            .map(|e| parse_ratio(e).expect("validated at resolution"))
            .collect()
    }

    pub fn ns(&self) -> Vec<usize> {
        (self.n_min..=self.n_max).collect()
    }

    pub fn limits(&self) -> Limits {
        Limits {
            exact_cap: self.exact_cap,
            node_limit: self.node_limit,
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}
