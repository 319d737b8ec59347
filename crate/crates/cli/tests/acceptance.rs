//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shavis_cli::{cmd_scan, CliConfig};
use shavis_cohomology::random::{
    instance_rng, random_covering_pair, random_fixed_subgroup, random_glued_pair, random_module, random_triple,
};
use shavis_cohomology::{
    enact_r_split, h1_bruteforce, h1_cyclic, verify_antidiagonal, verify_prop_fact, RSplitConfig, SPLIT_RS,
};
use shavis_core::arith::{is_prime, isqrt, primes_up_to};
use shavis_core::curve::{
    count_points_bsgs, count_points_naive, hasse_interval, local_data_all, reduce, CountStrategy, Kodaira,
    ReductionKind,
};
use shavis_core::gate::{evaluate_corollary, find_heegner_discriminant, is_fundamental_discriminant, kronecker_symbol, GateContext};
use shavis_core::hecke::{build_trace_table_with, congruence_modulus, sturm_bound, CoefficientPolicy};
use shavis_core::ingest::{CurveDb, CurveRecord};
use shavis_core::ledger::{bsd_divisibility_verdict, level_primes, BsdSnapshot, ReportFormat};

const SEED: u64 = 20240601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn pass_if(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn db_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ecdata")
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    if took > limit {
        out.pass = false;
        out.detail.push_str(&format!("; over the {:?} limit", limit));
    }
    (out, took)
}

fn pair(db: &CurveDb) -> (&CurveRecord, &CurveRecord) {
    (db.get("28042a1").expect("28042a1"), db.get("28042b1").expect("28042b1"))
}

fn c1_congruence_to_100(db: &CurveDb) -> Outcome {
    let (e, f) = pair(db);
    let te = build_trace_table_with(&e.minimal().unwrap(), "28042a1", 28042, 100, None, CountStrategy::Auto).unwrap();
    let tf = build_trace_table_with(&f.minimal().unwrap(), "28042b1", 28042, 100, None, CountStrategy::Auto).unwrap();
    let bad: Vec<u64> = te
        .traces
        .iter()
        .filter(|(l, a)| (**a - tf.traces[l]).rem_euclid(3) != 0)
        .map(|(l, _)| *l)
        .collect();
    let full = te.traces.keys().copied().eq(primes_up_to(100));
    pass_if(
        bad.is_empty() && full && te.traces.len() == 25,
        format!("{} primes <= 100 compared, {} differ mod 3", te.traces.len(), bad.len()),
    )
}

fn c1_sturm_run(db: &CurveDb) -> Outcome {
    let (e, f) = pair(db);
    let bound = sturm_bound(28042);
    let te = build_trace_table_with(&e.minimal().unwrap(), "28042a1", 28042, bound, None, CountStrategy::Bsgs).unwrap();
    let tf = build_trace_table_with(&f.minimal().unwrap(), "28042b1", 28042, bound, None, CountStrategy::Bsgs).unwrap();
    let c = congruence_modulus(&te, &tf, CoefficientPolicy::AllPrimes).unwrap();
    let holds = c.modulus % 3 == 0;
    pass_if(
        bound == 8016 && te.validate() && tf.validate(),
        format!(
            "BSGS to {bound}: {} primes, modulus {}, mod-3 certification {}",
            te.traces.len(),
            c.modulus,
            if holds && c.certified { "holds" } else { "does not hold" }
        ),
    )
}

fn c2_sha(db: &CurveDb) -> Outcome {
    let (e, f) = pair(db);
    let ctx = GateContext::new(db).with_bound_cap(100);
    let cand = congruence_modulus(&ctx.table(e, 100).unwrap(), &ctx.table(f, 100).unwrap(), CoefficientPolicy::AllPrimes)
        .unwrap();
    let v = evaluate_corollary(e, f, 3, &cand, &ctx).unwrap();
    let snap = BsdSnapshot::from_record(e, &level_primes(e.level)).unwrap();
    let d = bsd_divisibility_verdict(&v, Some(&snap)).unwrap();
    let sha = d.rhs_valuations.map(|r| r.sha);
    pass_if(
        snap.sha_analytic_q == Some(9) && sha == Some(2),
        format!("|Sha| = {:?}, ord_3 = {:?}", snap.sha_analytic_q, sha),
    )
}

fn kodaira_class(k: Kodaira) -> &'static str {
    match k {
        Kodaira::I(0) => "I0",
        Kodaira::I(_) => "In",
        Kodaira::IStar(0) => "I0*",
        Kodaira::IStar(_) => "In*",
        Kodaira::II => "II",
        Kodaira::III => "III",
        Kodaira::IV => "IV",
        Kodaira::IVStar => "IV*",
        Kodaira::IIIStar => "III*",
        Kodaira::IIStar => "II*",
    }
}

fn c3_tate(db: &CurveDb) -> Outcome {
    let mut curves = 0;
    let mut mismatches = Vec::new();
    let mut types: BTreeSet<&str> = BTreeSet::new();
    let mut small_prime_types: BTreeSet<(u64, &str)> = BTreeSet::new();
    for rec in db.records() {
        let (Some(tam), Some(kod), Some(fexp)) = (
            rec.tamagawa.as_ref(),
            rec.extras.get("kodaira").and_then(|v| v.as_object()),
            rec.extras.get("conductor_exponents").and_then(|v| v.as_object()),
        ) else {
            continue;
        };
        curves += 1;
        let local = local_data_all(&rec.minimal().unwrap()).unwrap();
        let got: BTreeMap<u64, u64> = local.iter().map(|l| (l.p, l.tamagawa)).collect();
        let mut ok = &got == tam;
        for l in &local {
            let key = l.p.to_string();
            let want_k = kod.get(&key).and_then(|v| v.as_str()).and_then(|s| s.parse::<Kodaira>().ok());
            let want_f = fexp.get(&key).and_then(|v| v.as_u64());
            ok &= want_k == Some(l.kodaira) && want_f == Some(u64::from(l.conductor_exponent));
            types.insert(kodaira_class(l.kodaira));
            if l.p <= 3 {
                small_prime_types.insert((l.p, kodaira_class(l.kodaira)));
            }
        }
        if !ok {
            mismatches.push(rec.label());
        }
    }
    let all = ["In", "In*", "I0*", "II", "III", "IV", "IV*", "III*", "II*"];
    let missing: Vec<&str> = all.iter().copied().filter(|t| !types.contains(t)).collect();
    let additive_at = |p: u64| small_prime_types.iter().any(|&(q, t)| q == p && t != "In");
    pass_if(
        curves >= 100 && mismatches.is_empty() && missing.is_empty() && additive_at(2) && additive_at(3),
        format!(
            "{curves} curves, {} mismatches {:?}, types {:?}, missing {missing:?}, {} (p, type) pairs at p = 2, 3",
            mismatches.len(),
            mismatches.iter().take(3).collect::<Vec<_>>(),
            types,
            small_prime_types.len()
        ),
    )
}

fn c4_point_counts(db: &CurveDb) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let primes: Vec<u64> = (257..=10007).filter(|&p| is_prime(p)).collect();
    let (mut agree, mut hasse_ok, mut tried) = (0, 0, 0);
    let mut first_bad = None;
    while tried < 200 {
        let rec = db.records().choose(&mut rng).expect("database nonempty");
        let p = primes[rng.gen_range(0..primes.len())];
        let model = rec.minimal().unwrap();
        if reduce(&model, p).unwrap().kind != ReductionKind::Good {
            continue;
        }
        tried += 1;
        let naive = count_points_naive(&model, p);
        let bsgs = count_points_bsgs(&model, p);
        let (lo, hi) = hasse_interval(p);
        let in_hasse = |n: u64| (lo..=hi).contains(&n) && (p as i64 + 1 - n as i64).unsigned_abs() <= isqrt(4 * p);
        if naive == bsgs {
            agree += 1;
        } else {
            first_bad.get_or_insert((rec.label(), p, naive, bsgs));
        }
        if in_hasse(naive) && in_hasse(bsgs) {
            hasse_ok += 1;
        }
    }
    pass_if(
        agree == 200 && hasse_ok == 200,
        format!("{agree}/200 agree, {hasse_ok}/200 within Hasse; first disagreement {first_bad:?}"),
    )
}

fn c5_prop_fact() -> Outcome {
    let mut failures = Vec::new();
    let mut nontrivial = 0;
    for i in 0..1000 {
        let mut rng = instance_rng(SEED, i);
        let t = random_triple(&mut rng, 64, 2);
        let tp = random_fixed_subgroup(&mut rng, t.middle());
        match verify_prop_fact(&t, &tp) {
            Ok(p) if p.equal => nontrivial += u32::from(p.lhs > 1 && p.factor2 > 1),
            _ => failures.push(i),
        }
    }
    pass_if(
        failures.is_empty(),
        format!("1000 triples, {} failures {failures:?}, {nontrivial} with both sides nontrivial", failures.len()),
    )
}

fn c6_antidiagonal() -> Outcome {
    let mut failures = Vec::new();
    let mut nontrivial = 0;
    for i in 0..1000 {
        let mut rng = instance_rng(SEED ^ 0x6a, i);
        let (j, e, f) = if i % 2 == 0 {
            random_glued_pair(&mut rng, 64, 2)
        } else {
            let j = random_module(&mut rng, 64, 2);
            let (e, f) = random_covering_pair(&mut rng, &j);
            (j, e, f)
        };
        match verify_antidiagonal(&j, &e, &f) {
            Ok(d) if d.equal => nontrivial += u32::from(d.lhs > 1),
            _ => failures.push(i),
        }
    }
    pass_if(
        failures.is_empty(),
        format!("1000 covering pairs, {} failures {failures:?}, {nontrivial} with a nontrivial quotient", failures.len()),
    )
}

fn c7_r_split() -> Outcome {
    let mut configs = 0;
    let mut failures = Vec::new();
    for r in SPLIT_RS {
        for k in 0..r {
            configs += 1;
            let ok = RSplitConfig::standard(r, k)
                .and_then(|c| enact_r_split(&c, r))
                .is_ok_and(|s| s.factor1_divisible && s.factor2_divisible);
            if !ok {
                failures.push((r, k));
            }
        }
    }
    pass_if(
        failures.is_empty(),
        format!("r in {SPLIT_RS:?}, {configs} configs, failures {failures:?}"),
    )
}

fn c8_h1_oracle() -> Outcome {
    let mut failures = Vec::new();
    let mut over_budget = 0;
    let mut checked = 0;
    let mut i = 0;
    while checked < 500 {
        let mut rng = instance_rng(SEED ^ 0x81, i);
        let n = rng.gen_range(1..=4);
        let m = random_module(&mut rng, 16, n);
        match h1_bruteforce(&m) {
            Ok(h) => {
                checked += 1;
                if h != h1_cyclic(&m) {
                    failures.push(i);
                }
            }
            Err(_) => over_budget += 1,
        }
        i += 1;
    }
    pass_if(
        failures.is_empty(),
        format!("{checked} modules, {} failures {failures:?}, {over_budget} skipped over budget", failures.len()),
    )
}

fn c9_heegner() -> Outcome {
    let h11 = find_heegner_discriminant(11, 10_000).unwrap();
    let d = h11.discriminant;
    let independent = d == -7 && kronecker_symbol(-7, 11) == 1 && is_fundamental_discriminant(-7);
    let h = find_heegner_discriminant(28042, 10_000).unwrap();
    let invariants = h.discriminant < 0
        && h.discriminant != -3
        && h.discriminant != -4
        && is_fundamental_discriminant(h.discriminant)
        && [2u64, 7, 2003].iter().all(|&p| kronecker_symbol(h.discriminant, p) == 1)
        && h.is_valid_for(28042);
    pass_if(
        independent && invariants,
        format!("N = 11 gives D = {d}; N = 28042 gives D = {}", h.discriminant),
    )
}

fn c10_determinism() -> Outcome {
    let run = |from: u64, to: u64, format: ReportFormat| {
        let mut config = CliConfig::new(vec![db_path()]);
        config.from = from;
        config.to = to;
        config.format = format;
        let (mut out, mut err) = (Vec::new(), Vec::new());
        cmd_scan(&config, &mut out, &mut err).expect("scan runs");
        out
    };
    let (a, b) = (run(28042, 28042, ReportFormat::Json), run(28042, 28042, ReportFormat::Json));
    let (c, d) = (run(1, u64::MAX, ReportFormat::Json), run(1, u64::MAX, ReportFormat::Json));
    let (t1, t2) = (run(1, u64::MAX, ReportFormat::Text), run(1, u64::MAX, ReportFormat::Text));
    let has_pair = String::from_utf8_lossy(&a).contains("\"labelF\": \"28042b1\"");
    pass_if(
        a == b && c == d && t1 == t2 && has_pair,
        format!(
            "level 28042: {} bytes; whole database: {} bytes JSON, {} bytes text; identical across runs",
            a.len(),
            c.len(),
            t1.len()
        ),
    )
}

type Criterion<'a> = Box<dyn FnOnce() -> Outcome + 'a>;

fn main() -> ExitCode {
    let db = CurveDb::load(&[db_path()]).expect("database loads");
    let secs = Duration::from_secs;
    let criteria: Vec<(&str, Duration, Criterion)> = vec![
        ("1a congruence mod 3 for l <= 100", secs(5), Box::new(|| c1_congruence_to_100(&db))),
        ("1b BSGS run to the Sturm bound", secs(600), Box::new(|| c1_sturm_run(&db))),
        ("2 ord_3 Sha(28042a1) = 2", secs(60), Box::new(|| c2_sha(&db))),
        ("3 Tate's algorithm against the database", secs(10), Box::new(|| c3_tate(&db))),
        ("4 naive and BSGS point counts", secs(30), Box::new(|| c4_point_counts(&db))),
        ("5 proposition identity on random triples", secs(60), Box::new(c5_prop_fact)),
        ("6 anti-diagonal lemma on covering pairs", secs(60), Box::new(c6_antidiagonal)),
        ("7 r/r' split", secs(60), Box::new(c7_r_split)),
        ("8 H^1 oracle equivalence", secs(60), Box::new(c8_h1_oracle)),
        ("9 Heegner discriminants", secs(10), Box::new(c9_heegner)),
        ("10 deterministic scan output", secs(300), Box::new(c10_determinism)),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let (out, took) = timed(limit, f);
        failed += u32::from(!out.pass);
        println!(
            "{} [{:>8.2}s] {name}: {}",
            if out.pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            out.detail
        );
    }
    if failed == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
