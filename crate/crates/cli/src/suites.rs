//! The experiment suites. Each one fills a report; an error from the core
//! library stops the suite and is recorded, keeping the rows already produced.

use orbitgrowth::growth::{generalized_entropy, ClassifyOptions, EntropyOptions, EntropyResult, Family, Level};
use orbitgrowth::hyperspace::{hyper_sep_lower_witness, hyper_span_upper_witness, HyperPoint, HyperSystem};
use orbitgrowth::measures::{
    enumerate_g, gamma_convergence, gamma_simplex_check, quotient_sep_pair, quotient_system, random_measure,
    seeded_separated_set, square_separated, PsiEmbedding, RationalMeasure, TestFunctionFamily,
};
use orbitgrowth::separation::{max_separated, min_spanning, CountKind, Mode};
use orbitgrowth::space::ratio_string;
use orbitgrowth::subshift::{count_words, example_pipeline};
use orbitgrowth::zoo::{dyadic, ZooKind};
use orbitgrowth::{Error, FiniteMetricSpace, Ratio, Result, System};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, Suite};
use crate::report::{CheckRow, CountRow, MeasureSet, Report, VerdictRow, Witness};

/// Iterates after which the fixed-point simplex must be within `gamma_radius()`.
const GAMMA_ITERATES: usize = 50;
const GAMMA_SAMPLES: usize = 20;

fn gamma_radius() -> Ratio {
    Ratio::new(1, 20)
}

pub fn run(config: &ExperimentConfig) -> Report {
    let mut report = Report::new(config);
    let outcome = match config.suite {
        Suite::Growth => growth(config, &mut report),
        Suite::HyperBounds => hyper_bounds(config, &mut report),
        Suite::MeasureSquaring => measure_squaring(config, &mut report),
        Suite::PsiEmbedding => psi_embedding(config, &mut report),
        Suite::Quotient => quotient(config, &mut report),
        Suite::SubshiftExample => subshift_example(config, &mut report),
        Suite::MorseSmale => morse_smale(config, &mut report),
    };
    if let Err(e) = outcome {
        report.errors.push(e.to_string());
    }
    report
}

fn labels(space: &FiniteMetricSpace, points: &[usize]) -> Vec<String> {
    points.iter().map(|&i| space.label(i).to_string()).collect()
}

fn set_witness(space: &FiniteMetricSpace, a: &HyperPoint, b: &HyperPoint) -> Witness {
    Witness::Sets {
        a: labels(space, a.members()),
        b: labels(space, b.members()),
    }
}

fn measure_witness(space: &FiniteMetricSpace, measures: &[&RationalMeasure]) -> Witness {
    Witness::Measures {
        measures: measures.iter().map(|m| m.record(space)).collect(),
    }
}

struct Check<'a> {
    name: &'a str,
    level: Level,
    epsilon: Option<Ratio>,
    n: Option<usize>,
}

impl Check<'_> {
    fn record(&self, report: &mut Report, instance: String, pass: bool, witness: impl FnOnce() -> Witness) {
        report.checks.push(CheckRow {
            name: self.name.to_string(),
            level: self.level,
            epsilon: self.epsilon.map(ratio_string),
            n: self.n,
            instance,
            pass,
            witness: (!pass).then(witness),
        });
    }
}

fn entropy_options(config: &ExperimentConfig, level: Level, mode: Mode) -> EntropyOptions {
    EntropyOptions {
        level,
        kind: config.count,
        mode,
        limits: config.limits(),
        classify: ClassifyOptions {
            window: config.window,
            ..ClassifyOptions::default()
        },
        hyper_cap: config.hyper_cap,
        measure_l: config.measure_l,
        pool_cap: config.pool_cap,
        seed: config.seed,
    }
}

/// Counts in the configured mode (plus greedy counts when that mode is exact),
/// verdicts per epsilon and their supremum, and the monotonicity checks.
fn growth_table(sys: &System, config: &ExperimentConfig, level: Level, report: &mut Report) -> Result<EntropyResult> {
    let schedule = config.schedule();
    let ns = config.ns();
    let result = generalized_entropy(sys, &schedule, &ns, &entropy_options(config, level, config.mode))?;
    let greedy = match config.mode {
        Mode::Exact => Some(generalized_entropy(
            sys,
            &schedule,
            &ns,
            &entropy_options(config, level, Mode::Greedy),
        )?),
        Mode::Greedy => None,
    };
    for (i, samples) in result.levels.iter().enumerate() {
        for (j, &(n, count)) in samples.samples.iter().enumerate() {
            let (count_exact, count_greedy) = match &greedy {
                Some(g) => (Some(count), Some(g.levels[i].samples[j].1)),
                None => (None, Some(count)),
            };
            report.counts.push(CountRow {
                level,
                epsilon: ratio_string(samples.epsilon),
                n,
                count_exact,
                count_greedy,
                quantity: None,
            });
        }
    }
    for (samples, class) in result.levels.iter().zip(&result.per_level) {
        report.verdicts.push(VerdictRow {
            level,
            epsilon: Some(ratio_string(samples.epsilon)),
            class: *class,
        });
    }
    report.verdicts.push(VerdictRow {
        level,
        epsilon: None,
        class: result.class,
    });
    if let Some(greedy) = &greedy {
        growth_checks(&result, greedy, level, config.count, report);
    }
    Ok(result)
}

fn growth_checks(exact: &EntropyResult, greedy: &EntropyResult, level: Level, kind: CountKind, report: &mut Report) {
    let name = match kind {
        CountKind::Separated => "Sep",
        CountKind::Spanning => "Span",
    };
    for (i, samples) in exact.levels.iter().enumerate() {
        let eps = samples.epsilon;
        for w in samples.samples.windows(2) {
            let ((m, a), (n, b)) = (w[0], w[1]);
            let check = Check {
                name: "monotone-in-n",
                level,
                epsilon: Some(eps),
                n: Some(n),
            };
            check.record(
                report,
                format!("{name}({m}) = {a} <= {name}({n}) = {b}"),
                a <= b,
                || Witness::Text {
                    detail: format!("exact {name} drops from {a} at n = {m} to {b} at n = {n}"),
                },
            );
        }
        if let Some(finer) = exact.levels.get(i + 1) {
            for (&(n, a), &(_, b)) in samples.samples.iter().zip(&finer.samples) {
                let check = Check {
                    name: "monotone-in-epsilon",
                    level,
                    epsilon: Some(finer.epsilon),
                    n: Some(n),
                };
                let instance = format!(
                    "{name}(eps = {}) = {a} <= {name}(eps = {}) = {b}",
                    ratio_string(eps),
                    ratio_string(finer.epsilon)
                );
                check.record(report, instance, a <= b, || Witness::Text {
                    detail: format!("the count at the smaller epsilon is {b} < {a}"),
                });
            }
        }
        for (&(n, e), &(_, g)) in samples.samples.iter().zip(&greedy.levels[i].samples) {
            let (instance, pass) = match kind {
                CountKind::Separated => (format!("greedy Sep = {g} <= exact Sep = {e}"), g <= e),
                CountKind::Spanning => (format!("greedy Span = {g} >= exact Span = {e}"), g >= e),
            };
            let check = Check {
                name: "greedy-bracket",
                level,
                epsilon: Some(eps),
                n: Some(n),
            };
            check.record(report, instance, pass, || Witness::Text {
                detail: format!("greedy {g} versus exact {e}"),
            });
        }
    }
}

fn growth(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let sys = config.system.build()?;
    growth_table(&sys, config, config.level, report)?;
    Ok(())
}

fn morse_smale(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    if !matches!(config.system.kind, ZooKind::MorseSmale { .. }) {
        return Err(Error::Input(format!(
            "the morse-smale suite needs a morse-smale system, got {}",
            config.system
        )));
    }
    let sys = config.system.build()?;
    let space = sys.space();
    let result = growth_table(&sys, config, Level::Base, report)?;
    let linear = matches!(result.class.family, Family::Poly(t) if (t - 1.0).abs() <= 0.2);
    let check = Check {
        name: "linear-growth",
        level: Level::Base,
        epsilon: None,
        n: None,
    };
    check.record(
        report,
        format!("{} is Poly(t) with |t - 1| <= 0.2", result.class.family),
        linear,
        || Witness::Text {
            detail: format!(
                "supremum class {}; per epsilon {:?}",
                result.class.family,
                result
                    .per_level
                    .iter()
                    .map(|c| c.family.to_string())
                    .collect::<Vec<_>>()
            ),
        },
    );

    let fixed = sys.fixed_points();
    for mu in enumerate_g(&fixed, config.measure_l) {
        let pass = gamma_simplex_check(&sys, &mu)?;
        let check = Check {
            name: "fixed-measure-invariant",
            level: Level::Measure,
            epsilon: None,
            n: None,
        };
        let instance = format!("T_* mu = mu for mu = {:?}", mu.record(space));
        check.record(report, instance, pass, || measure_witness(space, &[&mu]));
    }
    let points: Vec<usize> = (0..sys.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..GAMMA_SAMPLES {
        let nu = random_measure(&points, config.measure_l, &mut rng);
        let bounds = gamma_convergence(&sys, &nu, GAMMA_ITERATES)?;
        let last = bounds[GAMMA_ITERATES];
        let check = Check {
            name: "fixed-simplex-attracts",
            level: Level::Measure,
            epsilon: Some(gamma_radius()),
            n: Some(GAMMA_ITERATES),
        };
        let instance = format!(
            "distance bound after {GAMMA_ITERATES} iterates = {} < {}",
            ratio_string(last),
            ratio_string(gamma_radius())
        );
        check.record(report, instance, last < gamma_radius(), || {
            measure_witness(space, &[&nu])
        });
    }
    Ok(())
}

fn pow2(k: usize) -> Option<usize> {
    1usize.checked_shl(k as u32).filter(|_| k < usize::BITS as usize)
}

fn hyper_bounds(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let sys = config.system.build()?;
    let space = sys.space();
    let hyper = HyperSystem::new(sys.clone(), config.hyper_cap)?;
    let limits = config.limits();
    for eps in config.schedule() {
        for n in config.ns() {
            let span = min_spanning(&sys, n, eps, Mode::Exact, &limits)?;
            let sep = max_separated(&sys, n, eps, Mode::Exact, &limits)?;
            let lifted = min_spanning(&hyper, n, eps, Mode::Exact, &limits)?.count();
            let lifted_half = min_spanning(&hyper, n, eps / 2, Mode::Exact, &limits)?.count();
            let greedy = min_spanning(&sys, n, eps, Mode::Greedy, &limits)?.count();
            let greedy_lifted = min_spanning(&hyper, n, eps, Mode::Greedy, &limits)?.count();
            report.counts.push(CountRow {
                level: Level::Base,
                epsilon: ratio_string(eps),
                n,
                count_exact: Some(span.count()),
                count_greedy: Some(greedy),
                quantity: None,
            });
            report.counts.push(CountRow {
                level: Level::Hyper,
                epsilon: ratio_string(eps),
                n,
                count_exact: Some(lifted),
                count_greedy: Some(greedy_lifted),
                quantity: None,
            });

            let check = Check {
                name: "hyper-span-upper",
                level: Level::Hyper,
                epsilon: Some(eps),
                n: Some(n),
            };
            let bound = pow2(span.count());
            let pass = bound.is_none_or(|b| lifted <= b);
            check.record(
                report,
                format!("Span(T_K) = {lifted} <= 2^Span(T) = 2^{}", span.count()),
                pass,
                || Witness::Points {
                    labels: labels(space, &span.indices),
                },
            );

            let family = hyper_span_upper_witness(&sys, n, eps, &limits, config.hyper_cap)?;
            let check = Check {
                name: "hyper-span-family",
                level: Level::Hyper,
                epsilon: Some(eps),
                n: Some(n),
            };
            let instance = format!(
                "subsets of a minimum spanning set {:?} span the hyperspace",
                labels(space, &family.base_set)
            );
            check.record(report, instance, family.certified, || match &family.violation {
                Some((a, b)) => set_witness(space, a, b),
                None => Witness::Points {
                    labels: labels(space, &family.base_set),
                },
            });

            let check = Check {
                name: "hyper-sep-lower",
                level: Level::Hyper,
                epsilon: Some(eps),
                n: Some(n),
            };
            let target = pow2(sep.count()).map(|b| b - 1);
            let pass = target.is_some_and(|t| lifted_half >= t);
            let instance = format!(
                "Span(T_K, eps/2) = {lifted_half} >= 2^Sep(T) - 1 = 2^{} - 1",
                sep.count()
            );
            check.record(report, instance, pass, || Witness::Points {
                labels: labels(space, &sep.indices),
            });

            let family = hyper_sep_lower_witness(&sys, n, eps, &limits)?;
            let check = Check {
                name: "hyper-sep-family",
                level: Level::Hyper,
                epsilon: Some(eps),
                n: Some(n),
            };
            let instance = format!(
                "subsets of a maximum separated set {:?} are (n, eps/2)-separated",
                labels(space, &family.base_set)
            );
            check.record(report, instance, family.certified, || match &family.violation {
                Some((a, b)) => set_witness(space, a, b),
                None => Witness::Points {
                    labels: labels(space, &family.base_set),
                },
            });
        }
    }
    Ok(())
}

fn measure_squaring(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let sys = config.system.build()?;
    let space = sys.space();
    let fam = TestFunctionFamily::for_zoo(&config.system, &sys)?;
    for eps in config.schedule() {
        for n in config.ns() {
            for &size in &config.sizes {
                let seed = config.seed.wrapping_add(size as u64);
                let set = seeded_separated_set(&sys, &fam, n, eps, size, config.measure_l, seed)?;
                report.measures.push(MeasureSet {
                    name: format!("E, |E| = {size}, n = {n}, eps = {}, seed {seed}", ratio_string(eps)),
                    measures: set.iter().map(|m| m.record(space)).collect(),
                });
                report.counts.push(CountRow {
                    level: Level::Measure,
                    epsilon: ratio_string(eps),
                    n,
                    count_exact: Some(size),
                    count_greedy: None,
                    quantity: Some("|E|".into()),
                });
                let mut current = set;
                let mut current_eps = eps;
                for (round, name) in [(1, "squared"), (2, "squared-twice")] {
                    let squared = square_separated(&sys, &current, n, current_eps, &fam)?;
                    let expected = size.pow(1 << round);
                    let got = squared.measures.len();
                    report.counts.push(CountRow {
                        level: Level::Measure,
                        epsilon: ratio_string(squared.eps0),
                        n,
                        count_exact: Some(got),
                        count_greedy: None,
                        quantity: Some(format!("|E_b| after {round} squaring(s) of |E| = {size}")),
                    });
                    let check = Check {
                        name: &format!("{name}-size"),
                        level: Level::Measure,
                        epsilon: Some(squared.eps0),
                        n: Some(n),
                    };
                    check.record(
                        report,
                        format!("|E_b| = {got} equals {size}^{}", 1 << round),
                        got == expected,
                        || Witness::Text {
                            detail: format!("{got} measures instead of {expected}"),
                        },
                    );
                    let check = Check {
                        name: &format!("{name}-separated"),
                        level: Level::Measure,
                        epsilon: Some(squared.eps0),
                        n: Some(n),
                    };
                    let instance = format!(
                        "E_b with b = {} is (n, {})-separated",
                        ratio_string(squared.b),
                        ratio_string(squared.eps0)
                    );
                    check.record(report, instance, squared.certified, || match squared.violation {
                        Some((i, j)) => measure_witness(space, &[&squared.measures[i], &squared.measures[j]]),
                        None => Witness::Text {
                            detail: "no violating pair recorded".into(),
                        },
                    });
                    if !squared.certified {
                        break;
                    }
                    current_eps = squared.eps0;
                    current = squared.measures;
                }
            }
        }
    }
    Ok(())
}

fn psi_embedding(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let sys = config.system.build()?;
    let space = sys.space();
    let l = config.measure_l;
    let psi = PsiEmbedding::new(&sys, l)?;
    let points: Vec<usize> = (0..sys.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let injective = sys.is_injective();
    if !injective {
        report
            .notes
            .push("map is not injective; equivariance is not checked".into());
    }
    for _ in 0..config.pairs {
        let mu = random_measure(&points, l, &mut rng);
        let lambda = random_measure(&points, l, &mut rng);
        let d = psi.check_distance_distortion(&mu, &lambda)?;
        let check = Check {
            name: "psi-distortion",
            level: Level::Measure,
            epsilon: None,
            n: None,
        };
        let instance = format!(
            "d_H(Psi mu, Psi lambda) = {} >= rho(mu, lambda)/L = {}/{l}",
            ratio_string(d.hausdorff),
            ratio_string(d.prohorov)
        );
        check.record(report, instance, d.pass, || measure_witness(space, &[&mu, &lambda]));
        for eps in config.schedule() {
            let pass = psi.check_support_cardinality(&mu, &lambda, eps)?;
            let check = Check {
                name: "psi-support-cardinality",
                level: Level::Measure,
                epsilon: Some(eps),
                n: None,
            };
            let instance = format!(
                "d_H < eps implies |supp mu| = |supp lambda| ({} and {})",
                mu.support_len(),
                lambda.support_len()
            );
            check.record(report, instance, pass, || measure_witness(space, &[&mu, &lambda]));
        }
        if injective {
            let (lhs, rhs) = psi.equivariance_sides(&mu)?;
            let check = Check {
                name: "psi-equivariance",
                level: Level::Hyper,
                epsilon: None,
                n: None,
            };
            let product = psi.product().space();
            let instance = format!("Psi(T_* mu) = (T x Id)_K(Psi mu) for mu = {:?}", mu.record(space));
            check.record(report, instance, lhs == rhs, || set_witness(product, &lhs, &rhs));
        }
    }
    Ok(())
}

fn quotient(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let sys = config.system.build()?;
    let space = sys.space();
    let (q, h0) = quotient_system(&sys)?;
    let limits = config.limits();
    for eps in config.schedule() {
        for n in config.ns() {
            let (lhs, rhs) = quotient_sep_pair(&sys, n, eps, &limits)?;
            report.counts.push(CountRow {
                level: Level::Base,
                epsilon: ratio_string(eps),
                n,
                count_exact: Some(rhs.count()),
                count_greedy: None,
                quantity: Some("Sep(H, n, eps, X \\ Fix)".into()),
            });
            let check = Check {
                name: "quotient-sep-equal",
                level: Level::Base,
                epsilon: Some(eps),
                n: Some(n),
            };
            let instance = format!("Sep(H_0, K_0) = {} equals Sep(H, K) = {}", lhs.count(), rhs.count());
            let pass = lhs.count() == rhs.count();
            check.record(report, instance, pass, || {
                // two members of the separated set of X that merge in the quotient
                let set = &rhs.indices;
                let pair = set.iter().enumerate().find_map(|(i, &x)| {
                    set[i + 1..].iter().find_map(|&y| {
                        let d0 = h0.dyn_distance(q.projection[x], q.projection[y], n).ok()?;
                        (d0 < eps).then_some((x, y))
                    })
                });
                match pair {
                    Some((x, y)) => Witness::Points {
                        labels: labels(space, &[x, y]),
                    },
                    None => Witness::Points {
                        labels: labels(space, set),
                    },
                }
            });
        }
    }
    Ok(())
}

fn subshift_example(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let spec = &config.system;
    let opts = ClassifyOptions {
        window: config.window,
        ..ClassifyOptions::default()
    };
    let pipeline = example_pipeline(spec, &config.limits(), &opts)?;
    for row in &pipeline.rows {
        let eps = dyadic(row.k as u32);
        report.counts.push(CountRow {
            level: Level::Base,
            epsilon: ratio_string(eps),
            n: row.n,
            count_exact: Some(row.exact),
            count_greedy: None,
            quantity: None,
        });
        if let Some(formula) = row.formula {
            let check = Check {
                name: "span-formula",
                level: Level::Base,
                epsilon: Some(eps),
                n: Some(row.n),
            };
            let instance = format!("Span(n, 2^-{}) = {} equals |B_(n+2k)| = {formula}", row.k, row.exact);
            check.record(report, instance, row.matches, || Witness::Text {
                detail: format!(
                    "n = {}, k = {}: exact {} versus word count {formula}",
                    row.n, row.k, row.exact
                ),
            });
        }
    }
    if matches!(spec.kind, ZooKind::SingleOne) {
        for n in 1..=spec.resolution {
            let words = count_words(spec, n)?.count;
            let check = Check {
                name: "word-count",
                level: Level::Base,
                epsilon: None,
                n: Some(n),
            };
            check.record(report, format!("|B_n| = {words} equals n + 1"), words == n + 1, || {
                Witness::Text {
                    detail: format!("{words} words of length {n}"),
                }
            });
        }
    }
    for (k, class) in pipeline.per_level.iter().enumerate() {
        report.verdicts.push(VerdictRow {
            level: Level::Hyper,
            epsilon: Some(ratio_string(dyadic(k as u32))),
            class: *class,
        });
    }
    report.verdicts.push(VerdictRow {
        level: Level::Hyper,
        epsilon: None,
        class: pipeline.hyper_class,
    });
    match pipeline.hyper_entropy {
        Some(h) => report
            .notes
            .push(format!("hyperspace entropy estimate {h:.6} (log 2 = {:.6})", 2f64.ln())),
        None => report.notes.push(format!(
            "hyperspace class {} has no entropy rate",
            pipeline.hyper_class.family
        )),
    }
    if matches!(spec.kind, ZooKind::SingleOne) {
        let check = Check {
            name: "hyper-entropy",
            level: Level::Hyper,
            epsilon: None,
            n: None,
        };
        let pass = pipeline.hyper_entropy.is_some_and(|h| (h - 2f64.ln()).abs() <= 0.05);
        let instance = format!("{} is Exp(t) with |t - log 2| <= 0.05", pipeline.hyper_class.family);
        check.record(report, instance, pass, || Witness::Text {
            detail: format!(
                "per-level classes {:?}",
                pipeline
                    .per_level
                    .iter()
                    .map(|c| c.family.to_string())
                    .collect::<Vec<_>>()
            ),
        });
    }
    Ok(())
}
