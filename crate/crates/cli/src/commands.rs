use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use fsc_core::capacity::{
    dmc_capacity, finite_n_bracket, optimize_rate, z_channel, z_channel_closed_form, CapacityEstimate, CausalPolicy,
    OptimizerSettings, PolicyFile,
};
use fsc_core::channel::DEFAULT_GAP_BUDGET;
use fsc_core::format::{ChannelFile, LoadedChannel};
use fsc_core::gallery::{
    build_noiseless_z_pair, build_w_k, build_w_lambda, extend_alphabets, extend_states, tv_distance_exact,
    GalleryChannel,
};
use fsc_core::info::{causal_product, directed_information_routes, single_letter_bound_check};
use fsc_core::oracle::{check_certificate, lambda_row, CounterMachine, FixedHaltingTimes, NeverHalts, StepBoundedOracle};
use fsc_core::prob::{format_decimal, parse_exact, rational_to_f64};

use crate::args::{GalleryName, OptimizerFlags};
use crate::report::{digest, num, yes_no, Outcome, Table};

/// Parsed channel file plus the digest of its bytes.
pub struct Input {
    pub file: ChannelFile,
    pub channel: LoadedChannel,
    pub digest: String,
}

pub fn read_channel(path: &Path) -> Result<Input> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = String::from_utf8(bytes.clone()).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let file = ChannelFile::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    let channel = file.load().with_context(|| format!("validating {}", path.display()))?;
    Ok(Input {
        file,
        channel,
        digest: digest(&bytes),
    })
}

pub fn settings(file: Option<&ChannelFile>, flags: &OptimizerFlags, seed: Option<u64>) -> OptimizerSettings {
    let mut cfg = OptimizerSettings::default();
    if let Some(s) = file.and_then(|f| f.settings.as_ref()) {
        s.apply(&mut cfg);
    }
    if let Some(r) = flags.restarts {
        cfg.restarts = r;
    }
    if let Some(t) = flags.tol {
        cfg.tol = t;
    }
    if let Some(m) = flags.max_iters {
        cfg.max_iters = m;
    }
    if let Some(m) = flags.max_leaves {
        cfg.max_leaves = m;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg
}

fn notes(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn validate(input: &Input, gap_n: usize) -> Result<Outcome> {
    let law = input.channel.law();
    let conn = law.strongly_connected();
    let mut gaps = Vec::new();
    let mut skipped = None;
    for n in 1..=gap_n {
        match law.indecomposability_gap_with_budget(n, DEFAULT_GAP_BUDGET) {
            Ok(g) => gaps.push(json!({"n": n, "gap": g})),
            Err(fsc_core::Error::Resource { .. }) => {
                skipped = Some(n);
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let unifilar = input.channel.is_unifilar();
    let mut table = Table::new(&["property", "value"]);
    table.push(vec!["sizes".into(), format!("{}x{}x{}", law.x_size(), law.y_size(), law.s_size())]);
    table.push(vec!["stochastic".into(), yes_no(true)]);
    table.push(vec!["unifilar".into(), yes_no(unifilar)]);
    table.push(vec!["strongly_connected".into(), yes_no(conn.strongly_connected)]);
    if let Some((a, b)) = conn.unreachable {
        table.push(vec!["unreachable".into(), format!("{a} -> {b}")]);
    }
    if let Some(d) = conn.max_path_len {
        table.push(vec!["max_path_len".into(), d.to_string()]);
    }
    for g in &gaps {
        table.push(vec![format!("gap(n={})", g["n"]), num(g["gap"].as_f64().unwrap_or(f64::NAN))]);
    }
    Ok(Outcome {
        results: json!({
            "x_size": law.x_size(),
            "y_size": law.y_size(),
            "s_size": law.s_size(),
            "stochastic": true,
            "unifilar": unifilar,
            "connectivity": conn,
            "indecomposability": gaps,
        }),
        diagnostics: json!({"gap_budget": DEFAULT_GAP_BUDGET.to_string(), "gap_stopped_at": skipped}),
        table,
        notes: vec![],
    })
}

fn estimate_json(e: &CapacityEstimate, s0: usize) -> Value {
    json!({
        "n": e.horizon,
        "s0": s0,
        "value": e.value,
        "converged": e.converged,
        "status": if e.converged { "converged" } else { "not_converged" },
        "diagnostics": e.diagnostics,
    })
}

fn estimate_row(e: &CapacityEstimate, s0: usize) -> Vec<String> {
    let d = &e.diagnostics;
    vec![
        e.horizon.to_string(),
        s0.to_string(),
        num(e.value),
        yes_no(e.converged),
        d.best_restart.to_string(),
        d.iterations[d.best_restart].to_string(),
        num(d.final_gradient_norm),
        opt_num(d.fd_max_error),
        num(d.baseline),
    ]
}

pub struct CapacityArgs<'a> {
    pub n: usize,
    pub s0: Option<usize>,
    pub all_states: bool,
    pub sweep_n: bool,
    pub policy_out: Option<&'a PathBuf>,
    pub cfg: OptimizerSettings,
}

pub fn capacity(input: &Input, a: CapacityArgs) -> Result<Outcome> {
    let Some(u) = input.channel.unifilar() else {
        bail!("capacity estimation needs a unifilar channel");
    };
    if a.n == 0 {
        bail!("--n must be at least 1");
    }
    let horizons: Vec<usize> = if a.sweep_n { (1..=a.n).collect() } else { vec![a.n] };
    let mut table = Table::new(&[
        "n", "s0", "value", "converged", "best_restart", "iterations", "grad_norm", "fd_error", "baseline",
    ]);
    let mut estimates = Vec::new();
    let mut brackets = Vec::new();
    let mut note_lines = Vec::new();
    let mut last_policy = None;
    for &n in &horizons {
        if a.all_states {
            let b = finite_n_bracket(&u, n, &a.cfg)?;
            for (s0, e) in b.per_state.iter().enumerate() {
                table.push(estimate_row(e, s0));
                estimates.push(estimate_json(e, s0));
            }
            brackets.push(json!({
                "n": n,
                "min": b.min,
                "max": b.max,
                "gap": b.gap(),
                "argmin_state": b.argmin_state,
                "argmax_state": b.argmax_state,
                "min_is_upper_bound_on_max_min": b.min_is_upper_bound_on_max_min,
            }));
            note_lines.push((
                format!("n={n} bracket"),
                format!("min {} (s0={}), max {} (s0={}), gap {}", num(b.min), b.argmin_state, num(b.max), b.argmax_state, num(b.gap())),
            ));
            last_policy = Some(b.per_state[b.argmax_state].policy.clone());
        } else {
            let s0 = a.s0.or(input.file.s0).unwrap_or(0);
            let e = optimize_rate(&u, s0, n, &a.cfg)?;
            table.push(estimate_row(&e, s0));
            estimates.push(estimate_json(&e, s0));
            last_policy = Some(e.policy.clone());
        }
    }
    if a.all_states {
        note_lines.push(("note".into(), "min is the minimum of per-state maxima (a bracket, not the max-min)".into()));
    }
    if let (Some(path), Some(p)) = (a.policy_out, last_policy) {
        let text = serde_json::to_string_pretty(&PolicyFile::from(&p))? + "\n";
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Outcome {
        results: json!({"estimates": estimates, "brackets": brackets}),
        diagnostics: json!({"settings": a.cfg}),
        table,
        notes: note_lines,
    })
}

pub fn directed_info(input: &Input, policy: Option<&Path>, n: usize, s0: Option<usize>) -> Result<(Outcome, Option<String>)> {
    let law = input.channel.law();
    let (policy, policy_digest) = match policy {
        Some(path) => {
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let file: PolicyFile = serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?;
            (CausalPolicy::try_from(file)?, Some(digest(&bytes)))
        }
        None => (CausalPolicy::uniform(n, law.x_size(), law.y_size())?, None),
    };
    if (policy.x_size(), policy.y_size()) != (law.x_size(), law.y_size()) {
        bail!(
            "policy alphabets {}x{} do not match the channel's {}x{}",
            policy.x_size(),
            policy.y_size(),
            law.x_size(),
            law.y_size()
        );
    }
    let n = policy.horizon();
    let s0 = s0.or(input.file.s0).unwrap_or(0);
    let joint = causal_product(policy.kernel(), &law.output_kernel(s0, n)?)?;
    let routes = directed_information_routes(&joint, n)?;
    let di = fsc_core::info::directed_information(&joint, n)?;
    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec!["n".into(), n.to_string()]);
    table.push(vec!["s0".into(), s0.to_string()]);
    table.push(vec!["directed_information".into(), num(di)]);
    table.push(vec!["rate".into(), num(di / n as f64)]);
    let mut results = json!({
        "n": n,
        "s0": s0,
        "directed_information": di,
        "rate": di / n as f64,
        "policy": if policy_digest.is_some() { "file" } else { "uniform_iid" },
    });
    if law.s_size() == 1 {
        let c = single_letter_bound_check(&joint, n)?;
        table.push(vec!["sum_single_letter".into(), num(c.sum_single)]);
        table.push(vec!["bound_holds".into(), yes_no(c.bound_holds())]);
        table.push(vec!["equality_holds".into(), yes_no(c.equality_holds())]);
        table.push(vec!["outputs_independent".into(), yes_no(c.outputs_independent)]);
        results["memoryless_check"] = json!({
            "sum_single_letter": c.sum_single,
            "bound_holds": c.bound_holds(),
            "equality_holds": c.equality_holds(),
            "outputs_independent": c.outputs_independent,
        });
    }
    let outcome = Outcome {
        results,
        diagnostics: json!({
            "conditional_mi_sum": routes.conditional_mi_sum,
            "entropy_form": routes.entropy_form,
            "route_difference": (routes.conditional_mi_sum - routes.entropy_form).abs(),
        }),
        table,
        notes: vec![],
    };
    Ok((outcome, policy_digest))
}

pub fn dmc(input: Option<&Input>, state: usize, eps: Option<&str>) -> Result<Outcome> {
    let (rows, closed) = match (input, eps) {
        (_, Some(e)) => {
            let eps = rational_to_f64(&parse_exact(e)?);
            (z_channel(eps), Some(z_channel_closed_form(eps)?))
        }
        (Some(input), None) => {
            let law = input.channel.law();
            if state >= law.s_size() {
                bail!("state {state} out of range for {} states", law.s_size());
            }
            let rows = (0..law.x_size())
                .map(|x| {
                    (0..law.y_size())
                        .map(|y| (0..law.s_size()).map(|s| law.law(state, x, y, s)).sum())
                        .collect()
                })
                .collect();
            (rows, None)
        }
        (None, None) => bail!("need a channel file or --eps"),
    };
    let c = dmc_capacity(&rows)?;
    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec!["capacity".into(), num(c.capacity)]);
    table.push(vec!["lower".into(), num(c.lower)]);
    table.push(vec!["upper".into(), num(c.upper)]);
    for (x, p) in c.input.iter().enumerate() {
        table.push(vec![format!("p({x})"), num(*p)]);
    }
    let mut results = json!({
        "capacity": c.capacity,
        "lower": c.lower,
        "upper": c.upper,
        "input": c.input,
    });
    if let Some(z) = &closed {
        table.push(vec!["closed_form".into(), num(z.capacity)]);
        table.push(vec!["closed_form_p(0)".into(), num(z.input[0])]);
        results["closed_form"] = json!({"capacity": z.capacity, "input": z.input});
    }
    Ok(Outcome {
        results,
        diagnostics: json!({"iterations": c.iterations}),
        table,
        notes: vec![],
    })
}

pub struct GalleryArgs<'a> {
    pub name: GalleryName,
    pub eps: &'a str,
    pub lambda: Option<&'a str>,
    pub k: Option<u64>,
    pub states: Option<usize>,
    pub x_size: Option<usize>,
    pub y_size: Option<usize>,
}

pub fn build_gallery(a: &GalleryArgs) -> Result<GalleryChannel> {
    let eps = parse_exact(a.eps)?;
    let base = || -> Result<GalleryChannel> {
        Ok(match (a.k, a.lambda) {
            (Some(k), _) => build_w_k(&eps, k)?,
            (None, Some(l)) => build_w_lambda(&eps, &parse_exact(l)?)?,
            (None, None) => build_noiseless_z_pair(&eps)?,
        })
    };
    Ok(match a.name {
        GalleryName::NoiselessZ => build_noiseless_z_pair(&eps)?,
        GalleryName::WLambda => {
            let l = a.lambda.context("w-lambda needs --lambda")?;
            build_w_lambda(&eps, &parse_exact(l)?)?
        }
        GalleryName::WK => build_w_k(&eps, a.k.context("w-k needs --k")?)?,
        GalleryName::ExtendStates => extend_states(&base()?, a.states.context("extend-states needs --states")?)?,
        GalleryName::ExtendAlphabets => {
            let g = base()?;
            let xs = a.x_size.unwrap_or(g.params().x_size);
            let ys = a.y_size.unwrap_or(g.params().y_size);
            extend_alphabets(&g, xs, ys)?
        }
    })
}

pub fn gallery_summary(g: &GalleryChannel, file_text: &str) -> Outcome {
    let p = g.params();
    let conn = g.channel().compose().strongly_connected();
    let mut table = Table::new(&["property", "value"]);
    table.push(vec!["label".into(), g.label().to_string()]);
    table.push(vec!["eps".into(), p.eps.to_string()]);
    table.push(vec!["lambda".into(), p.lambda.to_string()]);
    table.push(vec!["sizes".into(), format!("{}x{}x{}", p.x_size, p.y_size, p.s_size)]);
    table.push(vec!["strongly_connected".into(), yes_no(conn.strongly_connected)]);
    table.push(vec!["file_digest".into(), digest(file_text.as_bytes())]);
    Outcome {
        results: json!({
            "label": g.label(),
            "params": p,
            "strongly_connected": conn.strongly_connected,
            "file_digest": digest(file_text.as_bytes()),
        }),
        diagnostics: Value::Null,
        table,
        notes: vec![],
    }
}

pub fn discontinuity(eps: &str, ks: &[u64], n: usize, cfg: &OptimizerSettings) -> Result<Outcome> {
    let eps_exact = parse_exact(eps)?;
    let base = build_noiseless_z_pair(&eps_exact)?;
    let closed_gap = 1.0 - z_channel_closed_form(rational_to_f64(&eps_exact))?.capacity;
    let mut table = Table::new(&["k", "lambda", "tv_distance", "est_s0_0", "est_s0_1", "gap"]);
    let mut rows = Vec::new();
    let members = std::iter::once((None, base.clone()))
        .chain(ks.iter().map(|&k| Ok::<_, anyhow::Error>((Some(k), build_w_k(&eps_exact, k)?))).collect::<Result<Vec<_>>>()?);
    for (k, g) in members {
        let tv = tv_distance_exact(&base, &g)?;
        let b = finite_n_bracket(g.channel(), n, cfg)?;
        let (e0, e1) = (b.per_state[0].value, b.per_state[1].value);
        table.push(vec![
            k.map_or("inf".to_string(), |k| k.to_string()),
            g.params().lambda.to_string(),
            tv.to_string(),
            num(e0),
            num(e1),
            num(e0 - e1),
        ]);
        rows.push(json!({
            "k": k,
            "lambda": g.params().lambda.to_string(),
            "tv_distance": tv.to_string(),
            "est_s0_0": e0,
            "est_s0_1": e1,
            "gap": e0 - e1,
            "converged": b.per_state.iter().all(|e| e.converged),
        }));
    }
    Ok(Outcome {
        results: json!({"eps": eps_exact.to_string(), "n": n, "rows": rows, "zero_lambda_closed_form_gap": closed_gap}),
        diagnostics: json!({"settings": cfg}),
        table,
        notes: vec![("closed-form gap at lambda=0".into(), format_decimal(closed_gap))],
    })
}

pub fn lambda_seq(program: Option<&Path>, mock: Option<&str>, n: u64, m_max: u64) -> Result<(Outcome, Option<String>)> {
    let (mut oracle, source, digest_value): (Box<dyn StepBoundedOracle>, String, Option<String>) = match (program, mock) {
        (Some(path), _) => {
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let text = String::from_utf8(bytes.clone())?;
            let m: CounterMachine = text.parse().with_context(|| format!("parsing {}", path.display()))?;
            (Box::new(m), "program".into(), Some(digest(&bytes)))
        }
        (None, Some("never")) => (Box::new(NeverHalts), "never".into(), None),
        (None, Some(name)) => {
            let steps = name
                .strip_prefix("halt:")
                .and_then(|s| s.parse::<u64>().ok())
                .with_context(|| format!("unknown mock oracle `{name}` (use `halt:<steps>` or `never`)"))?;
            (Box::new(FixedHaltingTimes::uniform(steps)), name.to_string(), None)
        }
        (None, None) => bail!("need --program or --mock"),
    };
    let row = lambda_row(oracle.as_mut(), n, m_max)?;
    let cert = check_certificate(&row);
    let mut table = Table::new(&["m", "lambda", "value"]);
    for (m, d) in (1..).zip(&row) {
        table.push(vec![m.to_string(), d.to_string(), num(d.to_f64())]);
    }
    let outcome = Outcome {
        results: json!({
            "n": n,
            "m_max": m_max,
            "oracle": source,
            "lambda": row,
            "certificate": match &cert {
                Ok(()) => json!({"passed": true}),
                Err(v) => json!({"passed": false, "violation": v}),
            },
        }),
        diagnostics: Value::Null,
        table,
        notes: notes(&[("certificate", if cert.is_ok() { "pass".into() } else { "FAIL".into() })]),
    };
    Ok((outcome, digest_value))
}

pub fn indecomp(input: &Input, n_max: usize) -> Result<Outcome> {
    let law = input.channel.law();
    let mut table = Table::new(&["n", "gap"]);
    let mut gaps = Vec::new();
    for n in 1..=n_max {
        let g = law.indecomposability_gap(n)?;
        table.push(vec![n.to_string(), num(g)]);
        gaps.push(json!({"n": n, "gap": g}));
    }
    Ok(Outcome {
        results: json!({"gaps": gaps}),
        diagnostics: Value::Null,
        table,
        notes: vec![],
    })
}

pub fn connectivity(input: &Input) -> Result<Outcome> {
    let law = input.channel.law();
    let conn = law.strongly_connected();
    let mut table = Table::new(&["from", "to", "distance"]);
    let mut distances = Vec::new();
    for from in 0..law.s_size() {
        let d = law.reach_distances(from);
        for (to, dist) in d.iter().enumerate() {
            table.push(vec![from.to_string(), to.to_string(), dist.map_or("unreachable".into(), |v| v.to_string())]);
        }
        distances.push(d);
    }
    let mut summary = vec![("strongly connected", yes_no(conn.strongly_connected))];
    if let Some((a, b)) = conn.unreachable {
        summary.push(("unreachable", format!("{a} -> {b}")));
    }
    if let Some(d) = conn.max_path_len {
        summary.push(("max path length", d.to_string()));
    }
    Ok(Outcome {
        results: json!({"connectivity": conn, "distances": distances, "support_graph": law.support_graph()}),
        diagnostics: Value::Null,
        table,
        notes: notes(&summary),
    })
}
