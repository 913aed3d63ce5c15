//! Acceptance suite: one check per criterion, each printed as a PASS/FAIL line.
//!
//! Run with `cargo test -p equidist --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use equidist::integrate::{IntegrandSpec, Probe};
use equidist::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> std::result::Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })
}

fn unit() -> IntervalQuery {
    IntervalQuery::closed(UnitPoint::zero(1).unwrap(), UnitPoint::one(1).unwrap()).unwrap()
}

fn c1_partition_exhaustion() -> Check {
    let start = Instant::now();
    let cfg = PartitionConfig::new(4, 10).map_err(|e| e.to_string())?;
    let top = cfg.grid_size();
    for k in 1..top {
        let x = UnitPoint::new(k, 10).unwrap();
        let hits = cfg
            .tags()
            .filter(|&t| is_member(&x, t, &cfg).unwrap())
            .count();
        ensure(hits == 1, || format!("{x} lies in {hits} classes"))?;
    }
    let mut intervals = 0u64;
    for a in 0..top {
        for b in a + cfg.m() + 1..=top {
            let (pa, pb) = (
                UnitPoint::new(a, 10).unwrap(),
                UnitPoint::new(b, 10).unwrap(),
            );
            for t in cfg.tags() {
                let x = pick_in_interval(&pa, &pb, t, &cfg)
                    .map_err(|e| format!("({pa}, {pb}) tag {}: {e}", t.get()))?;
                ensure(pa < x && x < pb && tag_of(&x, &cfg).unwrap() == t, || {
                    format!("({pa}, {pb}) tag {} gave {x}", t.get())
                })?;
            }
            intervals += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "{} points, {intervals} intervals x 4 tags",
        top - 1
    ))
}

fn c2_lift_preserves_tagged_ud() -> Check {
    let start = Instant::now();
    let cfg = PartitionConfig::new(8, 32).unwrap();
    let t = cfg.tag(3).unwrap();
    let n = 100_000;
    let x = kronecker(&"sqrt2".parse().unwrap(), n, 32).map_err(|e| e.to_string())?;
    let y = lift_to_tag(&x, t, &cfg).map_err(|e| e.to_string())?;
    for (i, (xn, yn)) in x.points().iter().zip(y.points()).enumerate() {
        let gap = (xn.numerator() - yn.numerator()) as u128;
        ensure((i as u128 + 1) * gap < 1u128 << 32, || {
            format!("|x_n - y_n| >= 1/n at n={}", i + 1)
        })?;
    }
    let verdict = ud_verdict(&y, &dyadic_grid(8).unwrap(), &[n], 0.02, Some((t, &cfg)))
        .map_err(|e| e.to_string())?;
    ensure(verdict.pass, || {
        format!("tagged verdict failed: {:?}", verdict.failing)
    })?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!(
        "max deviation {:.5}",
        verdict.report.final_max_abs_deviation
    ))
}

/// One randomized (sequence, interval, N, tag) case.
struct Case {
    seq: Materialized,
    cfg: PartitionConfig,
    interval: IntervalQuery,
    n: usize,
    t: TagIndex,
    fully_tagged_in: Option<TagIndex>,
}

fn random_cases(count: usize) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let alphas = ["sqrt2", "sqrt3", "golden", "e", "pi"];
    (0..count)
        .map(|_| {
            let p = rng.random_range(8..=40u32);
            let m = rng.random_range(2..=16u64);
            let cfg = PartitionConfig::new(m, p).unwrap();
            let len = rng.random_range(1..=2000usize);
            let tag = cfg.tag(rng.random_range(0..m)).unwrap();
            let seed: u64 = rng.random();
            let alpha = alphas[rng.random_range(0..alphas.len())].parse().unwrap();
            let (seq, fully) = match rng.random_range(0..6) {
                0 => (
                    Materialized::Plain(kronecker(&alpha, len, p).unwrap()),
                    None,
                ),
                1 => (
                    Materialized::Plain(van_der_corput(rng.random_range(2..=7), len, p).unwrap()),
                    None,
                ),
                2 => (
                    Materialized::Plain(iid_uniform(seed, len, p).unwrap()),
                    None,
                ),
                3 => (
                    Materialized::Tagged(sample_tagged(seed, tag, len, &cfg).unwrap()),
                    Some(tag),
                ),
                4 => {
                    // lift windows shrink like 2^p/n, so keep them wider than m
                    let cfg = PartitionConfig::new(m, p.max(24)).unwrap();
                    let x = kronecker(&alpha, len, cfg.p()).unwrap();
                    (
                        Materialized::Tagged(lift_to_tag(&x, tag, &cfg).unwrap()),
                        Some(tag),
                    )
                }
                _ => {
                    let cfg = PartitionConfig::new(len as u64 + 1, p.max(32)).unwrap();
                    let x = iid_uniform(seed, len, cfg.p()).unwrap();
                    (
                        Materialized::Tagged(diagonal_spoiler(&x, &cfg).unwrap()),
                        None,
                    )
                }
            };
            let cfg = seq.as_tagged().map(|s| *s.partition()).unwrap_or(cfg);
            let t = match fully {
                Some(f) if rng.random_bool(0.5) => f,
                _ => cfg.tag(rng.random_range(0..cfg.m())).unwrap(),
            };
            let (mut c, mut d) = (
                rng.random_range(0..=1u64 << 16),
                rng.random_range(0..=1u64 << 16),
            );
            if c > d {
                std::mem::swap(&mut c, &mut d);
            }
            let (c, d) = (
                UnitPoint::new(c, 16).unwrap(),
                UnitPoint::new(d, 16).unwrap(),
            );
            let interval = if rng.random_bool(0.5) {
                IntervalQuery::closed(c, d).unwrap()
            } else {
                IntervalQuery::half_open(c, d).unwrap()
            };
            Case {
                n: rng.random_range(1..=len),
                seq,
                cfg,
                interval,
                t,
                fully_tagged_in: fully,
            }
        })
        .collect()
}

fn c3_tagged_below_plain(cases: &[Case]) -> Check {
    let mut equalities = 0;
    for (i, c) in cases.iter().enumerate() {
        let plain = interval_count_ratio(&c.seq, &c.interval, c.n).unwrap();
        let tagged = tagged_count_ratio(&c.seq, &c.interval, c.t, &c.cfg, c.n).unwrap();
        ensure(tagged.count <= plain.count, || {
            format!("case {i}: tagged {tagged:?} > plain {plain:?}")
        })?;
        if c.fully_tagged_in == Some(c.t) {
            ensure(tagged == plain, || {
                format!("case {i}: fully tagged but {tagged:?} != {plain:?}")
            })?;
            equalities += 1;
        }
    }
    Ok(format!(
        "{} cases, {equalities} fully tagged equalities, 0 violations",
        cases.len()
    ))
}

fn c4_other_tags_see_nothing() -> Check {
    let mut grid = dyadic_grid(8).unwrap();
    grid.extend(dyadic_grid(64).unwrap());
    grid.push(unit());
    let mut checks = 0;
    for (m, t) in [(2u64, 1u64), (8, 3), (5, 0)] {
        let cfg = PartitionConfig::new(m, 32).unwrap();
        let t = cfg.tag(t).unwrap();
        let x = kronecker(&"golden".parse().unwrap(), 5000, 32).unwrap();
        let y = lift_to_tag(&x, t, &cfg).unwrap();
        for s in cfg.tags().filter(|&s| s != t) {
            for q in &grid {
                for n in [1, 10, 100, 1000, 5000] {
                    let r = tagged_count_ratio(&y, q, s, &cfg, n).unwrap();
                    ensure(r.count == 0, || {
                        format!("m={m} s={} N={n}: count {}", s.get(), r.count)
                    })?;
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{checks} (tag, interval, N) combinations all zero"))
}

fn c5_spoiler() -> Check {
    let n = 10_000;
    let cfg = PartitionConfig::new(1 << 14, 32).unwrap();
    let x = kronecker(&"sqrt2".parse().unwrap(), n, 32).unwrap();
    let y = diagonal_spoiler(&x, &cfg).map_err(|e| e.to_string())?;
    let mut per_class = vec![0u32; cfg.m() as usize];
    for p in y.points() {
        per_class[tag_of(p, &cfg).unwrap().get() as usize] += 1;
    }
    let worst = per_class.iter().copied().max().unwrap();
    ensure(worst <= 1, || format!("a class holds {worst} terms"))?;
    let verdict = ud_verdict(&y, &dyadic_grid(8).unwrap(), &[n], 0.02, None).unwrap();
    ensure(verdict.pass, || {
        format!("plain verdict failed: {:?}", verdict.failing)
    })?;
    Ok(format!(
        "max class size {worst}, plain deviation {:.5}",
        verdict.report.final_max_abs_deviation
    ))
}

fn c6_separation(cases: &[Case]) -> Check {
    let mut checked = 0;
    for (i, c) in cases.iter().enumerate() {
        let plain = interval_count_ratio(&c.seq, &c.interval, c.n).unwrap();
        let mut total = 0;
        for s in c.cfg.tags() {
            total += tagged_count_ratio(&c.seq, &c.interval, s, &c.cfg, c.n)
                .unwrap()
                .count;
            ensure(total <= plain.count, || {
                format!("case {i}: tag sum {total} > plain {}", plain.count)
            })?;
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} partial tag sums over {} cases, 0 violations",
        cases.len()
    ))
}

fn experiment(probe: Probe, tag: u64) -> ExperimentConfig {
    ExperimentConfig {
        probe,
        trials: 200,
        n: 10_000,
        eps: 0.02,
        tag,
        partition: PartitionConfig::new(4, 32).unwrap(),
        master_seed: 42,
        delta: 0.05,
    }
}

fn c7_hlawka() -> Check {
    let start = Instant::now();
    let report =
        hlawka_experiment(&experiment(Probe::hlawka_default(), 0)).map_err(|e| e.to_string())?;
    ensure(report.pass_fraction >= 0.95, || {
        format!("pass fraction {}", report.pass_fraction)
    })?;
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "pass fraction {:.3} in {:.2?}",
        report.pass_fraction,
        start.elapsed()
    ))
}

fn c8_slln() -> Check {
    let linear = slln_experiment(&experiment(
        Probe::Slln {
            integrand: IntegrandSpec::monomial(1),
        },
        1,
    ))
    .map_err(|e| e.to_string())?;
    ensure(linear.pass_fraction >= 0.95, || {
        format!("f=x pass fraction {}", linear.pass_fraction)
    })?;
    let constant = slln_experiment(&experiment(
        Probe::Slln {
            integrand: IntegrandSpec::constant(0.7),
        },
        1,
    ))
    .map_err(|e| e.to_string())?;
    ensure(constant.pass_fraction == 1.0, || {
        format!("constant pass fraction {}", constant.pass_fraction)
    })?;
    Ok(format!(
        "f=x {:.3}, constant {}",
        linear.pass_fraction, constant.pass_fraction
    ))
}

fn c9_weyl_brackets() -> Check {
    let cfg = PartitionConfig::new(4, 32).unwrap();
    let t = cfg.tag(2).unwrap();
    let mut family: Vec<IntegrandSpec> = (0..=6).map(IntegrandSpec::monomial).collect();
    family.push(IntegrandSpec::Polynomial {
        coeffs: vec![0.3, -2.0, 0.0, 5.0, -1.5],
    });
    for h in 1..=8 {
        family.push(IntegrandSpec::sin(h));
        family.push(IntegrandSpec::cos(h));
    }
    let x = kronecker(&"sqrt3".parse().unwrap(), 10_000, 32).unwrap();
    let sequences = [
        Materialized::Plain(x.clone()),
        Materialized::Tagged(lift_to_tag(&x, t, &cfg).unwrap()),
        Materialized::Tagged(sample_tagged(9, t, 10_000, &cfg).unwrap()),
    ];
    let mut checks = 0;
    for f in &family {
        for bits in [3, 6] {
            let (lo, hi) = f.step_brackets(bits).map_err(|e| e.to_string())?;
            for seq in &sequences {
                for n in [100, 1_000, 10_000] {
                    let a = tagged_integrate(&lo, t, seq, n, &cfg).unwrap().estimate;
                    let b = tagged_integrate(f, t, seq, n, &cfg).unwrap().estimate;
                    let c = tagged_integrate(&hi, t, seq, n, &cfg).unwrap().estimate;
                    ensure(a <= b && b <= c, || {
                        format!("{} N={n}: {a} {b} {c}", f.label())
                    })?;
                    checks += 1;
                }
            }
        }
    }
    Ok(format!(
        "{checks} orderings over {} integrands",
        family.len()
    ))
}

fn c10_qmc() -> Check {
    let x = kronecker(&"sqrt2".parse().unwrap(), 100_000, 32).unwrap();
    let est = qmc_integrate(&IntegrandSpec::monomial(2), &x, 100_000).unwrap();
    ensure((est.estimate - 1.0 / 3.0).abs() <= 0.01, || {
        format!("estimate {}", est.estimate)
    })?;
    let mut grid = dyadic_grid(16).unwrap();
    let third = |k| UnitPoint::from_f64(k as f64 / 3.0, 30).unwrap();
    grid.push(IntervalQuery::closed(third(1), third(2)).unwrap());
    grid.push(IntervalQuery::half_open(third(1), third(2)).unwrap());
    for q in &grid {
        for n in [1, 99, 1000, 100_000] {
            let integral = qmc_integrate(&IntegrandSpec::indicator(*q), &x, n)
                .unwrap()
                .estimate;
            let ratio = interval_count_ratio(&x, q, n).unwrap().value();
            ensure(integral == ratio, || {
                format!("indicator {integral} != ratio {ratio} at N={n}")
            })?;
        }
    }
    Ok(format!(
        "x^2 estimate {:.6}, |error| {:.2e}",
        est.estimate,
        (est.estimate - 1.0 / 3.0).abs()
    ))
}

fn c11_reproducibility() -> Check {
    let mut configs = vec![
        experiment(Probe::hlawka_default(), 3),
        experiment(
            Probe::Slln {
                integrand: IntegrandSpec::cos(3),
            },
            0,
        ),
    ];
    for c in &mut configs {
        c.trials = 20;
        c.n = 2_000;
    }
    for cfg in configs {
        let first = run_experiment(&cfg).map_err(|e| e.to_string())?;
        let manifest = serde_json::to_string(&first.config).unwrap();
        let replayed: ExperimentConfig = serde_json::from_str(&manifest).unwrap();
        let second = run_experiment(&replayed).map_err(|e| e.to_string())?;
        ensure(first.rows == second.rows, || "rerun rows differ".into())?;
        ensure(
            serde_json::to_string(&first).unwrap() == serde_json::to_string(&second).unwrap(),
            || "rerun report differs".into(),
        )?;
    }
    for d in [
        r#"{"kind":"kronecker","params":{"alpha":"sqrt2"},"N":500,"p":32}"#,
        r#"{"kind":"iid_uniform","params":{"rng":"chacha8"},"seed":7,"N":500,"p":32}"#,
    ] {
        let desc: SequenceDescriptor = serde_json::from_str(d).map_err(|e| e.to_string())?;
        ensure(
            desc.materialize().unwrap() == desc.materialize().unwrap(),
            || format!("{d} not reproducible"),
        )?;
    }
    Ok("experiment rows and sequences identical on replay".into())
}

fn main() -> ExitCode {
    let cases = random_cases(1000);
    let criteria: Vec<Criterion> = vec![
        (
            "1  partition exhaustion and density",
            Box::new(c1_partition_exhaustion),
        ),
        (
            "2  lift keeps tagged uniform distribution",
            Box::new(c2_lift_preserves_tagged_ud),
        ),
        (
            "3  tagged ratio never exceeds plain ratio",
            Box::new(|| c3_tagged_below_plain(&cases)),
        ),
        (
            "4  lifted terms invisible to other tags",
            Box::new(c4_other_tags_see_nothing),
        ),
        ("5  diagonal spoiler", Box::new(c5_spoiler)),
        (
            "6  distinct tags sum below plain ratio",
            Box::new(|| c6_separation(&cases)),
        ),
        ("7  Hlawka-type experiment", Box::new(c7_hlawka)),
        ("8  SLLN experiment", Box::new(c8_slln)),
        ("9  Weyl step brackets", Box::new(c9_weyl_brackets)),
        (
            "10 QMC integration and indicator identity",
            Box::new(c10_qmc),
        ),
        (
            "11 reproducibility from manifest",
            Box::new(c11_reproducibility),
        ),
    ];
    let mut failed = Vec::new();
    for (name, check) in &criteria {
        let start = Instant::now();
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail} [{:.2?}]", start.elapsed()),
            Err(why) => {
                println!("FAIL  {name}: {why} [{:.2?}]", start.elapsed());
                failed.push(*name);
            }
        }
    }
    if failed.is_empty() {
        println!(
            "acceptance: {} of {} criteria passed",
            criteria.len(),
            criteria.len()
        );
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
