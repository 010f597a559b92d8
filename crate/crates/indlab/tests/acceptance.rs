//! One line per acceptance criterion; exits non-zero if any fails.

use std::time::{Duration, Instant};

use indlab::data;
use indlab::hvfile::parse_model;
use indlab::rays::parse_rays;
use indlab_core::bell::{self, BipartiteModel, MismatchFunctional, SettingSet, SettingsSampler};
use indlab_core::born::linalg::{c, CMatrix, CVector};
use indlab_core::born::{equivalence_check, sample_range, BornMeasure, Caps, Observable, State};
use indlab_core::hv::{self, Sampler, DEFAULT_FLAG_MARGIN};
use indlab_core::ks::{self, ColoringResult};
use indlab_core::randomness::complexity::{
    count_c_incompressible, levin_chaitin_margin, omega_lower_bound, Budget, Dyadic, OmegaEstimate,
};
use indlab_core::randomness::stats::{borel_with_threshold, frequency_deviation_test, Z_THRESHOLD};
use indlab_core::randomness::TestReport;
use indlab_core::sequence::{champernowne, Champernowne, ConstantSource, Prefixes};
use indlab_core::SymbolString;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn fmt<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn fair_coin() -> BornMeasure {
    BornMeasure::scalar(&[0.0, 1.0], &[0.5, 0.5]).unwrap()
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    // small integer spectrum in a random basis, so degeneracies occur
    let mut g = CMatrix::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    g += CMatrix::identity(d, d).map(|x| x * c(2.0, 0.0));
    let q = g.qr().q();
    let diag = CMatrix::from_diagonal(&CVector::from_fn(d, |_, _| c(rng.random_range(0..3) as f64, 0.0)));
    let h = &q * diag * q.adjoint();
    (&h + h.adjoint()).map(|x| x * c(0.5, 0.0))
}

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> State {
    if rng.random_bool(0.5) {
        let v = CVector::from_fn(d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        State::vector(v.normalize()).unwrap()
    } else {
        let a = CMatrix::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let rho = &a * a.adjoint();
        let tr = rho.trace();
        State::density(rho.map(|x| x / tr)).unwrap()
    }
}

fn c1_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let d = rng.random_range(2..=4);
        let n = rng.random_range(1..=4);
        let a = Observable::new(random_hermitian(&mut rng, d)).map_err(fmt)?;
        let s = random_state(&mut rng, d);
        let r = equivalence_check(&s, &a, n, Caps::default()).map_err(|e| format!("pair {i}: {e}"))?;
        ensure(r.linf_distance <= 1e-10, || {
            format!("pair {i} (d={d}, n={n}): L∞ {:.3e}", r.linf_distance)
        })?;
        worst = worst.max(r.linf_distance);
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!("20 pairs, worst L∞ {worst:.2e}"))
}

fn c2_fair_coin() -> Outcome {
    let start = Instant::now();
    let mu = fair_coin();
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let xs = sample_range(&mu, seed, 0, 100_000);
        let f0 = xs.iter().filter(|&&x| x == 0).count() as f64 / 1e5;
        ensure((f0 - 0.5).abs() <= 0.01, || format!("seed {seed}: freq(0) = {f0}"))?;
        worst = worst.max((f0 - 0.5).abs());
    }
    within(start.elapsed(), 5.0)?;
    Ok(format!("10 seeds, worst |freq(0) - 1/2| {worst:.4}"))
}

fn c3_bell_violation() -> Outcome {
    let start = Instant::now();
    let s = SettingSet::three();
    let f = MismatchFunctional::default_three();
    let q = bell::quantum_value(&s, &f).map_err(fmt)?;
    ensure(q == 0.25, || format!("quantum value {q:?}"))?;
    let brute = bell::local_bound_bruteforce(&s, &f).map_err(fmt)?;
    let lp = bell::local_bound_enumerate(&s, &f).map_err(fmt)?;
    ensure(brute.bound == Ratio::from_integer(0) && brute.strategies == 64, || {
        format!("bound {} over {} strategies", brute.bound, brute.strategies)
    })?;
    ensure(lp.bound == brute.bound, || {
        format!("routes disagree: {} vs {}", brute.bound, lp.bound)
    })?;
    let mut worst = 0.0f64;
    for a in 0..3 {
        for b in 0..3 {
            let recs = bell::run_bipartite(
                &BipartiteModel::Quantum,
                &s,
                &SettingsSampler::Fixed(vec![(a, b)]),
                100_000,
                7 + (3 * a + b) as u64,
            )
            .map_err(fmt)?;
            let est = bell::pair_estimates(&recs, &s).map_err(fmt)?;
            let p = &est[0];
            ensure(p.trials == 100_000, || {
                format!("pair ({a},{b}) has {} trials", p.trials)
            })?;
            // σ at the predicted p; zero-variance pairs must be exact
            let sigma = (p.quantum * (1.0 - p.quantum) / 1e5).sqrt();
            let dev = (p.mismatch - p.quantum).abs();
            let ok = if sigma == 0.0 { dev < 1e-9 } else { dev <= 6.0 * sigma };
            ensure(ok, || format!("pair ({a},{b}): {} vs {}", p.mismatch, p.quantum))?;
            if sigma > 0.0 {
                worst = worst.max(dev / sigma);
            }
        }
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "quantum 1/4, local bound 0 (64 strategies, both routes), worst pair {worst:.2}σ"
    ))
}

fn c4_perfect_correlation() -> Outcome {
    let s = SettingSet::three();
    let recs = bell::run_bipartite(
        &BipartiteModel::Quantum,
        &s,
        &SettingsSampler::Fixed(vec![(0, 0), (1, 1), (2, 2)]),
        100_000,
        11,
    )
    .map_err(fmt)?;
    let equal = recs.iter().filter(|r| r.a == r.b).count();
    ensure(equal == 100_000, || format!("{equal} equal-setting trials"))?;
    let v = bell::perfect_correlation_violations(&recs);
    ensure(v == 0, || format!("{v} mismatches"))?;
    Ok("0 mismatches in 100000 equal-setting trials".into())
}

fn c5_kochen_specker() -> Outcome {
    let start = Instant::now();
    let (text, _) = data::resolve("peres33").map_err(fmt)?;
    let peres = parse_rays(&text).map_err(fmt)?;
    ks::validate_problem(&peres).map_err(fmt)?;
    let r = ks::search_coloring(&peres);
    ensure(r.is_unsat(), || "bundled 33-ray set is colourable".into())?;
    let unsat_time = start.elapsed();
    ensure(unsat_time.as_secs_f64() < 60.0, || format!("UNSAT took {unsat_time:?}"))?;

    let (text, _) = data::resolve("demo").map_err(fmt)?;
    let demo = parse_rays(&text).map_err(fmt)?;
    let ColoringResult::Colored { assignment, .. } = ks::search_coloring(&demo) else {
        return Err("demo set reported UNSAT".into());
    };
    let partial: Vec<Option<bool>> = assignment.iter().copied().map(Some).collect();
    ensure(ks::verify_coloring(&demo, &partial).map_err(fmt)?, || {
        "demo colouring rejected".into()
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let (mut sat, mut unsat) = (0, 0);
    let mut done = 0;
    while done < 50 {
        let mut which: Vec<usize> = (0..peres.bases.len()).filter(|_| rng.random_bool(0.4)).collect();
        which.sort_unstable();
        let sub = peres.restrict_to_bases(&which);
        if sub.rays.is_empty() || sub.rays.len() > ks::MAX_ORACLE_RAYS {
            continue;
        }
        let oracle = ks::enumerate_colorings(&sub).map_err(fmt)?;
        let (count, _) = ks::count_colorings(&sub);
        let found = !ks::search_coloring(&sub).is_unsat();
        ensure(oracle == count && (oracle > 0) == found, || {
            format!("bases {which:?}: oracle {oracle}, search {count}/{found}")
        })?;
        if found {
            sat += 1;
        } else {
            unsat += 1;
        }
        done += 1;
    }
    Ok(format!(
        "33 rays UNSAT in {:.0} ms, demo colouring verified, 50 subproblems agree ({sat} sat, {unsat} unsat)",
        unsat_time.as_secs_f64() * 1e3
    ))
}

fn c6_counting() -> Outcome {
    let start = Instant::now();
    let steps = Budget::default().max_steps;
    let mut rows = Vec::new();
    for n in [6usize, 8, 10] {
        for cc in [1usize, 2, 3] {
            let r = count_c_incompressible(n, cc, steps).map_err(fmt)?;
            let bound = (1i64 << n) - (1i64 << (n - cc + 1)) + 1;
            ensure(r.lower_bound == bound && r.count as i64 >= bound, || {
                format!("n={n} c={cc}: {} < {bound}", r.count)
            })?;
            rows.push(format!("{}/{}", r.count, bound));
        }
    }
    within(start.elapsed(), 300.0)?;
    Ok(format!("count/bound {}", rows.join(" ")))
}

fn dyadic_le(a: Dyadic, b: Dyadic) -> bool {
    let e = a.exponent.max(b.exponent);
    (a.numerator as u128) << (e - a.exponent) <= (b.numerator as u128) << (e - b.exponent)
}

fn kraft_sum(o: &OmegaEstimate) -> Dyadic {
    // recompute Σ 2^-|p| from the log as an exact fraction over 2^max_len
    let top = o.max_len as u32;
    let num: u64 = o.halting_programs.iter().map(|p| 1u64 << (top - p.len as u32)).sum();
    Dyadic::new(num, top)
}

fn c7_omega() -> Outcome {
    let base = omega_lower_bound(16, 10_000).map_err(fmt)?;
    let w = base.lower_bound;
    ensure(w.numerator > 0, || "Ω bound is zero".into())?;
    ensure(w.is_below_one(), || format!("Ω bound {w} is not below 1"))?;
    ensure(w.exponent == 0 || w.numerator % 2 == 1, || {
        format!("{w} not in lowest dyadic terms")
    })?;
    ensure(kraft_sum(&base) == w, || {
        format!("log sums to {}, bound {w}", kraft_sum(&base))
    })?;
    let more_steps = omega_lower_bound(16, 40_000).map_err(fmt)?.lower_bound;
    let longer = omega_lower_bound(18, 10_000).map_err(fmt)?.lower_bound;
    let shorter = omega_lower_bound(14, 10_000).map_err(fmt)?.lower_bound;
    ensure(
        dyadic_le(shorter, w) && dyadic_le(w, more_steps) && dyadic_le(w, longer),
        || format!("not monotone: {shorter} / {w} / {more_steps} / {longer}"),
    )?;
    ensure(base.prefix_violation().is_none(), || {
        "halting log has a prefix pair".into()
    })?;
    Ok(format!(
        "Ω >= {w} = {:.6} from {} programs, monotone, prefix-free",
        w.to_f64(),
        base.programs_found
    ))
}

fn c8_scenario_one() -> Outcome {
    let mut notes = Vec::new();
    for name in ["bohm_coin", "thooft_parity"] {
        let (text, _) = data::resolve(name).map_err(fmt)?;
        let f = parse_model(&text, name).map_err(fmt)?;
        let h = f
            .sampler
            .as_ref()
            .ok_or("model declares no sampler")?
            .build(&f.model, None)
            .map_err(fmt)?;
        ensure(matches!(h, Sampler::Deterministic(_)), || {
            format!("{name}: sampler is {}", h.kind())
        })?;
        let r = hv::scenario_one_audit(&f.model, &h, &[100, 1000, 10_000], DEFAULT_FLAG_MARGIN).map_err(fmt)?;
        let last = r.points.last().ok_or("no audit points")?;
        ensure(last.n == 10_000 && last.margin <= -9000, || {
            format!("{name}: margin {}", last.margin)
        })?;
        ensure(r.incompatible_with_randomness, || format!("{name}: flag not raised"))?;
        ensure(r.pushforward_defect <= 1e-10, || {
            format!("{name}: pushforward defect {:.2e}", r.pushforward_defect)
        })?;
        notes.push(format!(
            "{name} margin {} defect {:.0e}",
            last.margin, r.pushforward_defect
        ));
    }
    Ok(notes.join(", "))
}

fn c9_scenario_two() -> Outcome {
    let model = hv::bohm_coin(2).map_err(fmt)?;
    let mut fair = Sampler::SeededPrng {
        seed: 5,
        weights: model.measure.clone(),
    };
    let r = hv::scenario_two_audit(&model, &mut fair, 100_000, 6.0).map_err(fmt)?;
    ensure(r.passed(), || "seeded PRNG failed the sampling check".into())?;
    let mut biased = Sampler::SeededPrng {
        seed: 5,
        weights: vec![0.6, 0.4],
    };
    let b = hv::scenario_two_audit(&model, &mut biased, 100_000, 6.0).map_err(fmt)?;
    ensure(!b.sampling_ok && !b.passed(), || {
        "0.6/0.4 sampler passed against 0.5/0.5".into()
    })?;
    Ok("fair PRNG passes at 6σ, 0.6/0.4 sampler fails".into())
}

/// Largest |freq(s) - 1/2| of binary Champernowne over `n` digits.
fn champernowne_deviation(n: usize) -> f64 {
    let s = champernowne(2, n).unwrap();
    let ones = s.symbols().iter().filter(|&&x| x == 1).count() as f64;
    (ones / n as f64 - 0.5).abs()
}

fn c10_borel() -> Outcome {
    let n = 1_000_000;
    let coin = SymbolString::new(2, sample_range(&fair_coin(), 10, 0, n)).map_err(fmt)?;
    let reports = borel_with_threshold(&coin, 3, Z_THRESHOLD).map_err(fmt)?;
    ensure(reports.len() == 14 && reports.iter().all(TestReport::passed), || {
        let bad: Vec<_> = reports
            .iter()
            .filter(|r| !r.passed())
            .map(|r| r.test_name.clone())
            .collect();
        format!("fair coin failed {bad:?}")
    })?;
    let worst = reports.iter().map(|r| r.z_score.abs()).fold(0.0, f64::max);

    let constant = Prefixes::new(ConstantSource::new(2, 0).map_err(fmt)?)
        .truncate(n)
        .map_err(fmt)?;
    let c = borel_with_threshold(&constant, 1, Z_THRESHOLD).map_err(fmt)?;
    ensure(c.iter().any(|r| !r.passed()), || "constant string passed ℓ = 1".into())?;

    // calibration: the tolerance is the deviation seen at a tenth of the length
    let tolerance = (champernowne_deviation(n / 10) * 100.0).ceil() / 100.0;
    let champ = champernowne(2, n).map_err(fmt)?;
    let freq = frequency_deviation_test(&champ, 1, tolerance).map_err(fmt)?;
    ensure(freq.iter().all(TestReport::passed), || {
        format!("Champernowne off by more than {tolerance}")
    })?;
    let mut src = Prefixes::new(Champernowne::new(2, false).map_err(fmt)?);
    let margin = levin_chaitin_margin(&mut src, &[n]).map_err(fmt)?;
    let m = margin[0].margin;
    ensure(m <= -(n as i64 - 200), || format!("Champernowne margin {m}"))?;
    Ok(format!(
        "coin 14 blocks worst |z| {worst:.2}, constant fails ℓ=1, Champernowne ℓ=1 within {tolerance} with margin {m}"
    ))
}

fn c11_no_signaling() -> Outcome {
    let s = SettingSet::three();
    let q = bell::run_bipartite(&BipartiteModel::Quantum, &s, &SettingsSampler::Uniform, 100_000, 21).map_err(fmt)?;
    let (a, b) = bell::no_signaling_check(&q, &s).map_err(fmt)?;
    ensure(
        a.passed() && b.passed() && a.z_score.abs() <= 4.0 && b.z_score.abs() <= 4.0,
        || format!("quantum: z {:.2} / {:.2}", a.z_score, b.z_score),
    )?;
    let g = bell::run_bipartite(&BipartiteModel::Signaling, &s, &SettingsSampler::Uniform, 100_000, 21).map_err(fmt)?;
    let (ga, gb) = bell::no_signaling_check(&g, &s).map_err(fmt)?;
    ensure(!(ga.passed() && gb.passed()), || {
        "signaling model passed both checks".into()
    })?;
    Ok(format!(
        "quantum z {:+.2}/{:+.2}; signaling z {:+.1}/{:+.1}",
        a.z_score, b.z_score, ga.z_score, gb.z_score
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("finite-N joint vs product measure", c1_equivalence),
        ("fair-coin sampling frequency", c2_fair_coin),
        ("Bell violation and local bound", c3_bell_violation),
        ("perfect correlation", c4_perfect_correlation),
        ("Kochen-Specker search and oracle", c5_kochen_specker),
        ("c-incompressible counting bound", c6_counting),
        ("halting-probability lower bound", c7_omega),
        ("scenario one at N = 10^4", c8_scenario_one),
        ("scenario two sampling check", c9_scenario_two),
        ("Borel normality battery", c10_borel),
        ("no-signaling marginals", c11_no_signaling),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{t:.2} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{t:.2} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
