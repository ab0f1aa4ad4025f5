//! Acceptance run over the zoo: ten end-to-end checks, each printed as one
//! PASS/FAIL line with the offending instances listed underneath.
//!
//! The process exits with status 1 when any check fails.

use std::collections::BTreeSet;
use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use orbitgrowth::growth::{generalized_entropy, ClassifyOptions, EntropyOptions, Family};
use orbitgrowth::hyperspace::{
    hausdorff_distance, hyper_sep_lower_witness, hyper_span_upper_witness, HyperPoint, HyperSystem,
};
use orbitgrowth::measures::{
    enumerate_g, gamma_convergence, gamma_simplex_check, prohorov_by_subsets, prohorov_distance, quotient_sep_pair,
    quotient_system, random_measure, seeded_pool, seeded_separated_set, square_separated, PsiEmbedding,
    RationalMeasure, TestFunctionFamily,
};
use orbitgrowth::separation::{max_separated, min_spanning, sep_on_subset, CountKind, Limits, Mode};
use orbitgrowth::space::ratio_string;
use orbitgrowth::subshift::{count_words, example_pipeline};
use orbitgrowth::zoo::{dyadic, ZooKind, ZooSpec};
use orbitgrowth::{FiniteMetricSpace, Ratio, Result, System};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Failures listed per check before the rest are only counted.
const SHOWN: usize = 4;

type Criterion = fn() -> Result<Outcome>;

struct Outcome {
    summary: String,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new(summary: String, failures: Vec<String>) -> Self {
        Outcome {
            summary,
            failures,
            notes: Vec::new(),
        }
    }
}

fn r(p: i64, q: i64) -> Ratio {
    Ratio::new(p, q)
}

fn rotation(alpha: &str, g: usize) -> ZooSpec {
    ZooSpec::new(ZooKind::Rotation { alpha: alpha.into() }, g)
}

fn morse_smale(pairs: usize, lambda: f64, g: usize) -> ZooSpec {
    ZooSpec::new(ZooKind::MorseSmale { pairs, lambda }, g)
}

fn circle_schedule() -> Vec<Ratio> {
    vec![r(1, 2), r(1, 3), r(1, 4), r(1, 6)]
}

fn shift_schedule() -> Vec<Ratio> {
    (0..3).map(dyadic).collect()
}

fn timed(limit: Duration, start: Instant, failures: &mut Vec<String>) {
    let elapsed = start.elapsed();
    if elapsed >= limit {
        failures.push(format!("took {elapsed:.1?}, limit {limit:?}"));
    }
}

fn subshift_window() -> Result<Outcome> {
    let start = Instant::now();
    let spec = ZooSpec::new(ZooKind::SingleOne, 12);
    let sys = spec.build()?;
    let limits = Limits::default();
    let mut failures = Vec::new();
    for n in 1..=12 {
        let c = count_words(&spec, n)?.count;
        if c != n + 1 {
            failures.push(format!("count_words({n}) = {c}, expected {}", n + 1));
        }
    }
    let mut cells = 0;
    for k in 0..=5usize {
        for n in 1..=12 - 2 * k {
            cells += 1;
            let exact = min_spanning(&sys, n, dyadic(k as u32), Mode::Exact, &limits)?.count();
            if exact != n + 2 * k + 1 {
                failures.push(format!("Span(n={n}, 2^-{k}) = {exact}, expected {}", n + 2 * k + 1));
            }
        }
    }
    let pipeline = example_pipeline(&spec, &limits, &ClassifyOptions::default())?;
    if let Some(row) = pipeline.rows.iter().find(|row| !row.matches) {
        failures.push(format!("pipeline row n={} k={} does not match", row.n, row.k));
    }
    match pipeline.hyper_entropy {
        Some(h) if (h - LN_2).abs() <= 0.05 => {}
        _ => failures.push(format!(
            "hyperspace class {}, expected Exp(log 2 +- 0.05)",
            pipeline.hyper_class.family
        )),
    }
    timed(Duration::from_secs(10), start, &mut failures);
    Ok(Outcome::new(
        format!(
            "{cells} (n,k) cells equal n+2k+1, hyperspace class {}",
            pipeline.hyper_class.family
        ),
        failures,
    ))
}

/// Zoo systems on at most 12 base points with their epsilon schedules.
fn small_zoo() -> Vec<(ZooSpec, Vec<Ratio>)> {
    let mut out: Vec<(ZooSpec, Vec<Ratio>)> = [
        ZooSpec::new(ZooKind::Identity, 12),
        rotation("1/4", 12),
        rotation("5/12", 12),
        ZooSpec::new(ZooKind::Doubling, 8),
        ZooSpec::new(ZooKind::Doubling, 12),
        morse_smale(1, 0.5, 12),
        morse_smale(2, 0.5, 12),
    ]
    .into_iter()
    .map(|s| (s, circle_schedule()))
    .collect();
    out.push((ZooSpec::new(ZooKind::SingleOne, 7), shift_schedule()));
    out.push((ZooSpec::new(ZooKind::SingleOne, 11), shift_schedule()));
    out
}

fn hyper_upper() -> Result<Outcome> {
    let start = Instant::now();
    let limits = Limits::default();
    let mut failures = Vec::new();
    let mut instances = 0;
    for (spec, schedule) in small_zoo() {
        let sys = spec.build()?;
        let hyper = HyperSystem::new(sys.clone(), 12)?;
        for &eps in &schedule {
            for n in 1..=5 {
                instances += 1;
                let base = min_spanning(&sys, n, eps, Mode::Exact, &limits)?.count();
                let lifted = min_spanning(&hyper, n, eps, Mode::Exact, &limits)?.count();
                if lifted > 1 << base {
                    failures.push(format!(
                        "{spec} n={n} eps={}: Span(T_K) = {lifted} > 2^{base}",
                        ratio_string(eps)
                    ));
                }
                let family = hyper_span_upper_witness(&sys, n, eps, &limits, 12)?;
                if let Some((a, b)) = family.violation {
                    failures.push(format!(
                        "{spec} n={n} eps={}: {:?} not covered by {:?}",
                        ratio_string(eps),
                        a.members(),
                        b.members()
                    ));
                }
            }
        }
    }
    timed(Duration::from_secs(120), start, &mut failures);
    Ok(Outcome::new(
        format!("{instances} instances of Span(T_K) <= 2^Span(T), spanning families certified"),
        failures,
    ))
}

fn hyper_lower() -> Result<Outcome> {
    let limits = Limits::default();
    let mut failures = Vec::new();
    let mut instances = 0;
    let mut uncertified = 0;
    for (spec, schedule) in small_zoo() {
        let sys = spec.build()?;
        let hyper = HyperSystem::new(sys.clone(), 12)?;
        for &eps in &schedule {
            for n in 1..=5 {
                instances += 1;
                let sep = max_separated(&sys, n, eps, Mode::Exact, &limits)?.count();
                let lifted = min_spanning(&hyper, n, eps / 2, Mode::Exact, &limits)?.count();
                if lifted + 1 < 1 << sep {
                    failures.push(format!(
                        "{spec} n={n} eps={}: Span(T_K, eps/2) = {lifted} < 2^{sep} - 1",
                        ratio_string(eps)
                    ));
                }
                let family = hyper_sep_lower_witness(&sys, n, eps, &limits)?;
                if let Some((a, b)) = family.violation {
                    uncertified += 1;
                    failures.push(format!(
                        "{spec} n={n} eps={}: subsets {:?} and {:?} of {:?} have D_n < eps/2",
                        ratio_string(eps),
                        a.members(),
                        b.members(),
                        family.base_set
                    ));
                }
            }
        }
    }
    Ok(Outcome::new(
        format!("{instances} instances, {uncertified} uncertified separated families"),
        failures,
    ))
}

fn measure_squaring() -> Result<Outcome> {
    let (n, eps) = (2, r(1, 8));
    let mut failures = Vec::new();
    let mut sets = 0;
    for spec in [ZooSpec::new(ZooKind::Doubling, 16), morse_smale(1, 0.5, 16)] {
        let sys = spec.build()?;
        let fam = TestFunctionFamily::for_zoo(&spec, &sys)?;
        for size in 2..=6usize {
            sets += 1;
            let set = seeded_separated_set(&sys, &fam, n, eps, size, 3, 40 + size as u64)?;
            let once = square_separated(&sys, &set, n, eps, &fam)?;
            if once.measures.len() != size.pow(2) || !once.certified {
                failures.push(format!(
                    "{spec} |E|={size}: {} measures, violating pair {:?}",
                    once.measures.len(),
                    once.violation
                ));
                continue;
            }
            let twice = square_separated(&sys, &once.measures, n, once.eps0, &fam)?;
            if twice.measures.len() != size.pow(4) || !twice.certified {
                failures.push(format!(
                    "{spec} |E|={size}, second squaring: {} measures, violating pair {:?}",
                    twice.measures.len(),
                    twice.violation
                ));
            }
        }
    }
    Ok(Outcome::new(
        format!("{sets} seeded sets squared twice (|E|^2 then |E|^4), all certified"),
        failures,
    ))
}

fn psi_chain() -> Result<Outcome> {
    let l = 4;
    let spec = rotation("1/4", 12);
    let sys = spec.build()?;
    let psi = PsiEmbedding::new(&sys, l)?;
    let points: Vec<usize> = (0..sys.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pairs: Vec<(RationalMeasure, RationalMeasure)> = (0..240)
        .map(|_| {
            (
                random_measure(&points, l, &mut rng),
                random_measure(&points, l, &mut rng),
            )
        })
        .collect();
    let mut failures = Vec::new();
    for (mu, lambda) in &pairs {
        let d = psi.check_distance_distortion(mu, lambda)?;
        if !d.pass {
            failures.push(format!(
                "{:?} vs {:?}: d_H = {} < rho/L with rho = {}",
                mu.atoms(),
                lambda.atoms(),
                ratio_string(d.hausdorff),
                ratio_string(d.prohorov)
            ));
        }
        for eps in [r(1, 17), r(1, 20), r(1, 32)] {
            if !psi.check_support_cardinality(mu, lambda, eps)? {
                failures.push(format!(
                    "{:?} vs {:?}: images closer than {} with different support sizes",
                    mu.atoms(),
                    lambda.atoms(),
                    ratio_string(eps)
                ));
            }
        }
    }
    let injective = [
        ZooSpec::new(ZooKind::Identity, 12),
        rotation("1/4", 12),
        rotation("5/12", 12),
    ];
    for spec in &injective {
        let psi = PsiEmbedding::new(&spec.build()?, l)?;
        for mu in pairs.iter().flat_map(|(a, b)| [a, b]) {
            let (lhs, rhs) = psi.equivariance_sides(mu)?;
            if lhs != rhs {
                failures.push(format!(
                    "{spec}: Psi(T_* mu) != (T x Id)_K Psi(mu) for {:?}",
                    mu.atoms()
                ));
            }
        }
    }
    Ok(Outcome::new(
        format!(
            "{} pairs in G_{l} on 12 points, equivariance on {} injective systems",
            pairs.len(),
            injective.len()
        ),
        failures,
    ))
}

fn product_identity() -> Result<Outcome> {
    let limits = Limits {
        exact_cap: 128,
        ..Limits::default()
    };
    let bases = [
        ZooSpec::new(ZooKind::Identity, 10),
        rotation("3/10", 10),
        ZooSpec::new(ZooKind::Doubling, 8),
        ZooSpec::new(ZooKind::Doubling, 10),
        morse_smale(1, 0.5, 10),
        ZooSpec::new(ZooKind::SingleOne, 9),
    ];
    let mut failures = Vec::new();
    let (mut instances, mut factorwise) = (0, 0);
    for spec in &bases {
        let sys = spec.build()?;
        for g in 1..=8 {
            let product = sys.product_with_identity(g)?;
            let interval = System::identity(FiniteMetricSpace::interval_grid(g)?)?;
            for eps in [r(1, 2), r(1, 3), r(1, 4), r(1, 5)] {
                let columns = eps.recip().ceil().to_integer() as usize;
                let id_span = min_spanning(&interval, 1, eps, Mode::Exact, &limits)?.count();
                for n in 1..=4 {
                    instances += 1;
                    let lhs = min_spanning(&product, n, eps, Mode::Exact, &limits)?.count();
                    let base = min_spanning(&sys, n, eps, Mode::Exact, &limits)?.count();
                    if lhs > base * columns {
                        failures.push(format!(
                            "{spec} g={g} n={n} eps={}: {lhs} > {base} * {columns} (Span(Id) on the grid is {id_span})",
                            ratio_string(eps)
                        ));
                    }
                    if lhs <= base * id_span {
                        factorwise += 1;
                    }
                }
            }
        }
    }
    let mut outcome = Outcome::new(
        format!("{instances} instances of Span(T x Id) <= Span(T) * ceil(1/eps)"),
        failures,
    );
    outcome.notes.push(format!(
        "Span(T x Id) <= Span(T) * Span(Id on the grid) in {factorwise} of {instances} instances"
    ));
    Ok(outcome)
}

fn growth_classes() -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut verdicts = Vec::new();
    let fine = [r(1, 8), r(1, 16)];

    let ms = morse_smale(1, 0.5, 4096);
    let ms_opts = EntropyOptions {
        kind: CountKind::Separated,
        mode: Mode::Greedy,
        classify: ClassifyOptions {
            window: Some(16),
            ..ClassifyOptions::default()
        },
        ..EntropyOptions::default()
    };
    let class = generalized_entropy(&ms.build()?, &fine, &(1..=16).collect::<Vec<_>>(), &ms_opts)?.class;
    verdicts.push(format!("{ms}: {}", class.family));
    if !matches!(class.family, Family::Poly(t) if (t - 1.0).abs() <= 0.2) {
        failures.push(format!("{ms} classified {}, expected Poly(1 +- 0.2)", class.family));
    }

    for spec in [ZooSpec::new(ZooKind::Identity, 32), rotation("1/4", 32)] {
        let class = generalized_entropy(
            &spec.build()?,
            &fine,
            &(1..=12).collect::<Vec<_>>(),
            &EntropyOptions::default(),
        )?
        .class;
        verdicts.push(format!("{spec}: {}", class.family));
        if class.family != Family::Bounded {
            failures.push(format!("{spec} classified {}, expected Bounded", class.family));
        }
    }

    let shift = ZooSpec::new(ZooKind::FullShift, 12);
    let shift_opts = EntropyOptions {
        limits: Limits {
            exact_cap: 1 << 12,
            ..Limits::default()
        },
        ..EntropyOptions::default()
    };
    let class = generalized_entropy(
        &shift.build()?,
        &[dyadic(0), dyadic(1)],
        &(1..=10).collect::<Vec<_>>(),
        &shift_opts,
    )?
    .class;
    verdicts.push(format!("{shift}: {}", class.family));
    if !matches!(class.family, Family::Exp(t) if (t - LN_2).abs() <= 0.05) {
        failures.push(format!(
            "{shift} classified {}, expected Exp(log 2 +- 0.05)",
            class.family
        ));
    }
    Ok(Outcome::new(verdicts.join(", "), failures))
}

fn quotient_equality() -> Result<Outcome> {
    let limits = Limits::default();
    let systems = [
        morse_smale(1, 0.5, 12),
        morse_smale(2, 0.5, 12),
        morse_smale(1, 0.5, 16),
        morse_smale(2, 0.6, 24),
    ];
    let mut failures = Vec::new();
    let (mut instances, mut restricted, mut restricted_equal) = (0, 0, 0);
    for spec in &systems {
        let sys = spec.build()?;
        let (q, h0) = quotient_system(&sys)?;
        let fixed = sys.fixed_points();
        for eps in [r(1, 2), r(1, 4), r(1, 6)] {
            for n in 1..=4 {
                instances += 1;
                let (lhs, rhs) = quotient_sep_pair(&sys, n, eps, &limits)?;
                if lhs.count() != rhs.count() {
                    let witness = close_in_quotient(&sys, &h0, &q.projection, &rhs.indices, n, eps);
                    failures.push(format!(
                        "{spec} n={n} eps={}: Sep(H_0, K_0) = {} but Sep(H, K) = {}{witness}",
                        ratio_string(eps),
                        lhs.count(),
                        rhs.count()
                    ));
                }
                let far: Vec<usize> = (0..sys.len())
                    .filter(|&x| {
                        sys.step(x) != x
                            && (0..n).all(|i| {
                                let y = sys.iterate(x, i);
                                fixed.iter().all(|&f| sys.space().dist(y, f) * 2 >= eps)
                            })
                    })
                    .collect();
                if far.is_empty() {
                    continue;
                }
                restricted += 1;
                let far0: Vec<usize> = far.iter().map(|&x| q.projection[x]).collect();
                let a = sep_on_subset(&sys, n, eps, &far, &limits)?.count();
                let b = sep_on_subset(&h0, n, eps, &far0, &limits)?.count();
                if a == b {
                    restricted_equal += 1;
                }
            }
        }
    }
    let mut outcome = Outcome::new(format!("{instances} instances with K = X \\ Fix"), failures);
    outcome.notes.push(format!(
        "orbits kept eps/2 away from Fix: equality in {restricted_equal} of {restricted} instances"
    ));
    Ok(outcome)
}

/// Two members of a separated set whose classes are `eps`-close in the quotient.
fn close_in_quotient(sys: &System, h0: &System, projection: &[usize], set: &[usize], n: usize, eps: Ratio) -> String {
    for (i, &x) in set.iter().enumerate() {
        for &y in &set[i + 1..] {
            let d0 = h0.dyn_distance(projection[x], projection[y], n).unwrap_or(eps);
            if d0 < eps {
                return format!(
                    "; {} and {} have d_n = {} in X but {} in X/Fix",
                    sys.space().label(x),
                    sys.space().label(y),
                    sys.dyn_distance(x, y, n).map(ratio_string).unwrap_or_default(),
                    ratio_string(d0)
                );
            }
        }
    }
    String::new()
}

fn gamma_fixed_points() -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut simplex, mut draws, mut slowest) = (0, 0, 0);
    for spec in [morse_smale(1, 0.5, 64), morse_smale(2, 0.5, 64)] {
        let sys = spec.build()?;
        for mu in enumerate_g(&sys.fixed_points(), 6) {
            simplex += 1;
            if !gamma_simplex_check(&sys, &mu)? {
                failures.push(format!("{spec}: {:?} is not fixed by the push-forward", mu.atoms()));
            }
        }
        let points: Vec<usize> = (0..sys.len()).collect();
        for _ in 0..200 {
            draws += 1;
            let nu = random_measure(&points, 8, &mut rng);
            let bounds = gamma_convergence(&sys, &nu, 50)?;
            match bounds.iter().position(|&b| b < r(1, 20)) {
                Some(i) => slowest = slowest.max(i),
                None => failures.push(format!(
                    "{spec}: {:?} still at distance {} after 50 iterates",
                    nu.atoms(),
                    ratio_string(bounds[50])
                )),
            }
        }
    }
    Ok(Outcome::new(
        format!("{simplex} simplex measures fixed exactly, {draws} random measures within 1/20 by iterate {slowest}"),
        failures,
    ))
}

fn metric_spaces() -> Result<Vec<(String, FiniteMetricSpace)>> {
    let mut out = Vec::new();
    for g in 4..=8 {
        out.push((format!("circle-{g}"), FiniteMetricSpace::circle_grid(g)?));
    }
    out.push(("interval-7".into(), FiniteMetricSpace::interval_grid(7)?));
    for w in [4, 7] {
        let spec = ZooSpec::new(ZooKind::SingleOne, w);
        out.push((spec.to_string(), spec.build()?.space().clone()));
    }
    Ok(out)
}

fn triangle_failure(name: &str, what: &str, d: &[Vec<Ratio>]) -> Option<String> {
    let k = d.len();
    for i in 0..k {
        for j in 0..k {
            for m in 0..k {
                if d[i][m] > d[i][j] + d[j][m] {
                    return Some(format!("{name}: {what} triangle fails at pool items ({i}, {j}, {m})"));
                }
            }
        }
    }
    None
}

fn metric_oracles() -> Result<Outcome> {
    let mut failures = Vec::new();
    let (mut pairs, mut spaces) = (0, 0);
    for (seed, (name, space)) in metric_spaces()?.into_iter().enumerate() {
        spaces += 1;
        let points: Vec<usize> = (0..space.len()).collect();
        let pool = seeded_pool(&points, 3, 40, seed as u64);
        let mut rho = vec![vec![Ratio::from_integer(0); pool.len()]; pool.len()];
        for i in 0..pool.len() {
            for j in i + 1..pool.len() {
                pairs += 1;
                let flow = prohorov_distance(&pool[i], &pool[j], &space)?;
                let oracle = prohorov_by_subsets(&pool[i], &pool[j], &space)?;
                if flow != oracle {
                    failures.push(format!(
                        "{name}: {:?} vs {:?}: flow {} but subsets {}",
                        pool[i].atoms(),
                        pool[j].atoms(),
                        ratio_string(flow),
                        ratio_string(oracle)
                    ));
                }
                rho[i][j] = flow;
                rho[j][i] = flow;
            }
        }
        failures.extend(triangle_failure(&name, "Prohorov", &rho));

        let sets: BTreeSet<Vec<usize>> = pool
            .iter()
            .map(|mu| mu.support())
            .chain(points.iter().map(|&x| vec![x]))
            .collect();
        let sets = sets.into_iter().map(HyperPoint::new).collect::<Result<Vec<_>>>()?;
        let d = sets
            .iter()
            .map(|a| {
                sets.iter()
                    .map(|b| hausdorff_distance(a, b, &space))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        failures.extend(triangle_failure(&name, "Hausdorff", &d));
    }
    Ok(Outcome::new(
        format!("{pairs} measure pairs over {spaces} spaces: flow equals subset oracle, triangle inequalities hold"),
        failures,
    ))
}

fn main() {
    let checks: [(&str, Criterion); 10] = [
        ("subshift window", subshift_window),
        ("hyperspace upper bound", hyper_upper),
        ("hyperspace lower bound", hyper_lower),
        ("measure squaring", measure_squaring),
        ("Psi_L chain", psi_chain),
        ("product with identity", product_identity),
        ("growth classes", growth_classes),
        ("quotient separation", quotient_equality),
        ("fixed-point simplex", gamma_fixed_points),
        ("metric oracles", metric_oracles),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = check().unwrap_or_else(|e| Outcome::new(format!("error: {e}"), vec![e.to_string()]));
        let pass = outcome.failures.is_empty();
        println!(
            "{} [{:>2}/10] {name}: {} ({:.2?})",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.summary,
            start.elapsed()
        );
        for f in outcome.failures.iter().take(SHOWN) {
            println!("         {f}");
        }
        if outcome.failures.len() > SHOWN {
            println!("         ... {} failures in total", outcome.failures.len());
        }
        for note in &outcome.notes {
            println!("         note: {note}");
        }
        if !pass {
            failed.push(*name);
        }
    }
    println!("acceptance: {} of {} passed", checks.len() - failed.len(), checks.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
