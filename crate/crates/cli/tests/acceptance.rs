//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fsc_core::capacity::{
    dmc_capacity, optimize_rate, z_channel, z_channel_closed_form, CausalPolicy, OptimizerSettings,
};
use fsc_core::gallery::{
    build_noiseless_z_pair, build_w_k, build_w_lambda, capacity_gap, extend_states, tv_distance_exact,
};
use fsc_core::info::{causal_product, single_letter_bound_check, CausalKernel};
use fsc_core::oracle::{
    check_certificate, lambda_row, threshold_stopper, FixedHaltingTimes, NeverHalts, StepBoundedOracle, StopOutcome,
};
use fsc_core::prob::parse_exact;
use fsc_core::UnifilarChannel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($msg)+));
        }
    };
}

fn quarter_pair() -> UnifilarChannel {
    build_noiseless_z_pair(&parse_exact("1/4").unwrap()).unwrap().channel().clone()
}

fn random_row(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

fn closed_forms_agree() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for eps in [0.1, 0.25, 0.4] {
        let closed = z_channel_closed_form(eps).map_err(|e| e.to_string())?.capacity;
        let ba = dmc_capacity(&z_channel(eps)).map_err(|e| e.to_string())?.capacity;
        worst = worst.max((closed - ba).abs());
    }
    let elapsed = start.elapsed();
    check!(worst <= 1e-6, "max deviation {worst:e}");
    check!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("max deviation {worst:e} in {elapsed:?}"))
}

fn noiseless_feedback_rate() -> Verdict {
    let start = Instant::now();
    let u = quarter_pair();
    let cfg = OptimizerSettings::default();
    let mut values = Vec::new();
    for n in 1..=4 {
        let e = optimize_rate(&u, 0, n, &cfg).map_err(|e| e.to_string())?;
        check!((e.value - 1.0).abs() <= 1e-6, "N={n}: {}", e.value);
        values.push(e.value);
    }
    let elapsed = start.elapsed();
    check!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    Ok(format!("rates {values:?} in {elapsed:?}"))
}

fn memoryless_equality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = OptimizerSettings::default();
    let mut worst = 0.0f64;
    for trial in 0..25 {
        let rows: Vec<Vec<f64>> = (0..2).map(|_| random_row(&mut rng, 2)).collect();
        let c = dmc_capacity(&rows).map_err(|e| e.to_string())?.capacity;
        let u = UnifilarChannel::memoryless(&rows).map_err(|e| e.to_string())?;
        for n in 1..=3 {
            let v = optimize_rate(&u, 0, n, &cfg).map_err(|e| e.to_string())?.value;
            worst = worst.max((v - c).abs());
            check!((v - c).abs() <= 1e-4, "trial {trial}, N={n}: {v} vs {c}");
        }
    }
    Ok(format!("25 channels, max deviation {worst:e}"))
}

fn single_letter_bound() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut iid, mut strict) = (0, 0);
    for trial in 0..1000 {
        let xs = rng.gen_range(2..=3);
        let ys = rng.gen_range(2..=3);
        let n = rng.gen_range(1..=4);
        let w: Vec<Vec<f64>> = (0..xs).map(|_| random_row(&mut rng, ys)).collect();
        let is_iid = trial % 2 == 0;
        let policy = if is_iid {
            let p = random_row(&mut rng, xs);
            CausalPolicy::iid(n, ys, &p)
        } else {
            CausalPolicy::random(n, xs, ys, &mut rng)
        }
        .map_err(|e| e.to_string())?;
        let channel = CausalKernel::memoryless_channel(n, &w).map_err(|e| e.to_string())?;
        let joint = causal_product(policy.kernel(), &channel).map_err(|e| e.to_string())?;
        let c = single_letter_bound_check(&joint, n).map_err(|e| e.to_string())?;
        check!(c.bound_holds(), "trial {trial}: {} > {}", c.directed, c.sum_single);
        if is_iid {
            check!(c.equality_holds(), "trial {trial}: iid but {} != {}", c.directed, c.sum_single);
            iid += 1;
        } else if c.directed < c.sum_single - 1e-9 {
            strict += 1;
        }
    }
    Ok(format!("1000 instances ({iid} iid with equality, {strict} strict)"))
}

fn discontinuity_surrogate() -> Verdict {
    let eps = parse_exact("1/4").unwrap();
    let g = (1.0 + (-(2.0 - 0.75 * 3f64.log2()) / 0.75).exp2()).log2();
    let closed_gap = 1.0 - g;
    check!((closed_gap - 0.4417).abs() <= 1e-4, "closed-form gap {closed_gap}");
    let cfg = OptimizerSettings::default();
    let pair = build_noiseless_z_pair(&eps).map_err(|e| e.to_string())?;
    let est_gap = capacity_gap(pair.channel(), 0, 1, 2, &cfg).map_err(|e| e.to_string())?;
    check!((est_gap - closed_gap).abs() <= 1e-4, "estimated zero-crossover gap {est_gap} vs {closed_gap}");
    for k in [2u64, 4, 8, 16, 32, 64] {
        let wk = build_w_k(&eps, k).map_err(|e| e.to_string())?;
        let tv = tv_distance_exact(&pair, &wk).map_err(|e| e.to_string())?;
        check!(tv == parse_exact(&format!("2/{k}")).unwrap(), "k={k}: distance {tv}");
    }
    let w4 = build_w_k(&eps, 4).map_err(|e| e.to_string())?;
    let gap4 = capacity_gap(w4.channel(), 0, 1, 4, &cfg).map_err(|e| e.to_string())?;
    check!(gap4.abs() < closed_gap, "k=4 gap {gap4} not below {closed_gap}");
    Ok(format!(
        "zero-crossover gap {est_gap:.6} (closed form {closed_gap:.6}); distances 2/k exact; k=4, N=4 gap {gap4:e}"
    ))
}

fn connectivity_verdicts() -> Verdict {
    let eps = parse_exact("1/4").unwrap();
    let connected = |g: &fsc_core::gallery::GalleryChannel| g.channel().compose().strongly_connected().strongly_connected;
    let pair = build_noiseless_z_pair(&eps).map_err(|e| e.to_string())?;
    check!(!connected(&pair), "zero-crossover pair reported connected");
    for l in ["1/8", "1/4", "1/2"] {
        let g = build_w_lambda(&eps, &parse_exact(l).unwrap()).map_err(|e| e.to_string())?;
        check!(connected(&g), "lambda={l} reported disconnected");
        for s in 3..=5 {
            let e = extend_states(&g, s).map_err(|e| e.to_string())?;
            check!(connected(&e), "lambda={l}, {s} states reported disconnected");
        }
    }
    Ok("disconnected at lambda=0; connected for lambda in {1/8,1/4,1/2} and 3-5 states".into())
}

fn indecomposability_decay() -> Verdict {
    let g = build_w_lambda(&parse_exact("1/4").unwrap(), &parse_exact("1/4").unwrap()).map_err(|e| e.to_string())?;
    let law = g.channel().compose();
    let gaps: Vec<f64> = [2, 4, 6, 8, 10]
        .iter()
        .map(|&n| law.indecomposability_gap(n))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    check!(gaps[..4].windows(2).all(|w| w[1] <= w[0]), "not non-increasing: {gaps:?}");
    check!(gaps[4] < 0.1, "gap at n=10 is {}", gaps[4]);
    Ok(format!("gaps at n=2,4,6,8,10: {gaps:?}"))
}

fn effective_sequences() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..100 {
        let mut oracle: Box<dyn StepBoundedOracle> = if trial % 10 == 0 {
            Box::new(NeverHalts)
        } else {
            let mut o = FixedHaltingTimes {
                default: rng.gen_bool(0.8).then(|| rng.gen_range(1..=30)),
                ..Default::default()
            };
            for n in 1..=4 {
                o.times.insert(n, rng.gen_bool(0.8).then(|| rng.gen_range(1..=30)));
            }
            Box::new(o)
        };
        for n in 1..=4 {
            let row = lambda_row(oracle.as_mut(), n, 40).map_err(|e| e.to_string())?;
            check!(row.windows(2).all(|w| w[1] <= w[0]), "oracle {trial}, n={n}: not monotone");
            check!(check_certificate(&row).is_ok(), "oracle {trial}, n={n}: {:?}", check_certificate(&row));
        }
    }
    let mut halted = 0;
    for trial in 0..200 {
        let mu = if trial % 4 == 0 { 0.0 } else { rng.gen_range(-30.0..0.0f64).exp2() };
        let noise: Vec<f64> = (0..64).map(|_| rng.gen_range(-0.999..0.999)).collect();
        let out = threshold_stopper(|m| Ok(mu + noise[m as usize - 1] * (-(m as f64)).exp2()), 64)
            .map_err(|e| e.to_string())?;
        match out {
            StopOutcome::Halted { .. } => {
                check!(mu > 0.0, "halted on a zero limit");
                halted += 1;
            }
            StopOutcome::Exhausted { .. } => check!(mu == 0.0, "missed positive limit {mu:e}"),
        }
    }
    Ok(format!("100 oracles certified; stopper halted on all {halted} positive limits and none of the zero ones"))
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fsc"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    check!(out.status.success(), "`fsc {}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr));
    Ok(out.stdout)
}

fn cli_determinism() -> Verdict {
    let dir = std::env::temp_dir().join(format!("fsc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let program = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/programs/countdown.cm");
    run_cli(&dir, &["gallery", "noiseless-z", "--eps", "1/4", "--out", "pair.json"])?;
    run_cli(&dir, &["gallery", "w-lambda", "--eps", "1/4", "--lambda", "1/4", "--out", "wl.json"])?;
    run_cli(&dir, &["capacity", "pair.json", "--n", "1", "--s0", "1", "--policy-out", "pol.json"])?;
    let commands: Vec<Vec<&str>> = vec![
        vec!["validate", "pair.json"],
        vec!["capacity", "wl.json", "--n", "3", "--all-states", "--sweep-n"],
        vec!["directed-info", "pair.json", "--policy", "pol.json", "--s0", "1"],
        vec!["dmc-capacity", "pair.json", "--state", "1"],
        vec!["gallery", "extend-states", "--lambda", "1/4", "--s", "4", "--out", "ext.json"],
        vec!["discontinuity-demo", "--k", "2,4,8", "--n", "3"],
        vec!["lambda-seq", "--program", program, "--n", "3"],
        vec!["indecomp", "wl.json", "--n", "8"],
        vec!["connectivity", "wl.json"],
    ];
    let mut compared = 0;
    for cmd in &commands {
        for format in ["json", "csv", "table"] {
            let mut args = cmd.clone();
            args.extend(["--format", format]);
            let first = run_cli(&dir, &args)?;
            let first_file = std::fs::read(dir.join("ext.json")).ok();
            let second = run_cli(&dir, &args)?;
            let second_file = std::fs::read(dir.join("ext.json")).ok();
            check!(first == second, "`fsc {}` output differs between runs", args.join(" "));
            check!(first_file == second_file, "`fsc {}` file differs between runs", args.join(" "));
            compared += 1;
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{compared} invocations byte-identical across two runs"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("Z-channel closed form vs Blahut-Arimoto", closed_forms_agree),
        ("noiseless state feedback rate", noiseless_feedback_rate),
        ("memoryless equality regime", memoryless_equality),
        ("single-letter bound on directed information", single_letter_bound),
        ("discontinuity surrogate", discontinuity_surrogate),
        ("connectivity verdicts", connectivity_verdicts),
        ("indecomposability decay", indecomposability_decay),
        ("effective-sequence certificates", effective_sequences),
        ("CLI determinism", cli_determinism),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let took = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} [{took:.2}s]", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {}: FAIL  {name}: {why} [{took:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
