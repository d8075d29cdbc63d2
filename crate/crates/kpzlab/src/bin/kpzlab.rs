//! Command-line driver: every subcommand writes its artifacts and a manifest
//! into `<out>/<subcommand>/`.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::RngCore;
use serde::Serialize;

use kpzlab::analysis::{acceptance_probability_experiment, TwReference, TW_DEFAULT_N, TW_DEFAULT_SEED};
use kpzlab::asep::{simulate_asep, TruncationPolicy};
use kpzlab::coupling::{delta_growth_experiment, local_clt_check};
use kpzlab::gibbs::verify_monotone_suite;
use kpzlab::hallittlewood::{line_ensemble_from_sequence, mcmc_plane_partition, Cap, HahpParams, HahpSampler};
use kpzlab::harness::{
    asep_onepoint, bernoulli_increment_report, delta_growth_gate, hahp_gibbs_invariance, hl_height_vectors,
    identity_report, kmt_marginals, mcmc_stationarity, random_gibbs_instance, rejection_check, rng_from_seed,
    run_replicas, sv_height_vectors, sv_increment_report, sv_profiles, sv_scan, sv_scan_transversal, sv_width, AsepSetup,
    OnePointReport, Run, RunConfig, SvSetup,
};
use kpzlab::sixvertex::{sample_s6v_seeded, S6VParams};

#[derive(Parser)]
#[command(name = "kpzlab", version, about = "Samplers and statistical checks for KPZ line ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of replicas.
    #[arg(long)]
    replicas: Option<usize>,
    /// Worker threads; results do not depend on this value.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; defaults to $KPZLAB_OUT, then ./kpzlab-out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model parameter `name=value`, repeatable.
    #[arg(long = "param", short = 'p', value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Comma-separated system sizes.
    #[arg(long = "sizes", value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Model selector (`sv` or `asep`) for the one-point experiment.
    #[arg(long)]
    model: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Exclusion process with step initial data; writes height slices.
    SampleAsep(Common),
    /// Stochastic six-vertex height fields.
    SampleS6v(Common),
    /// Exact ascending Hall-Littlewood samples.
    SampleHahp(Common),
    /// Metropolis chain on boxed plane partitions.
    McmcHahp(Common),
    /// Exact Gibbs invariance and rejection-sampler checks.
    VerifyGibbs(Common),
    /// Exhaustive monotone-coupling verification.
    VerifyMonotone(Common),
    /// Dyadic walk-bridge coupling and the growth of its error.
    CoupleKmt(Common),
    /// Local limit theorem for the conditioned walk.
    LocalClt(Common),
    /// Tracy-Widom GUE reference table.
    TwReference(Common),
    /// One-point fluctuations against the Tracy-Widom reference.
    ExpOnepoint(Common),
    /// Transversal-exponent variance scan.
    ExpTransversal(Common),
    /// Hall-Littlewood versus six-vertex height-vector identity.
    ExpIdentitySvhl(Common),
    /// Acceptance probability of the top curve on a centred window.
    ExpAcceptance(Common),
    /// Pinned Brownian-increment variances.
    ExpIncrements(Common),
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let v: f64 = v.parse().map_err(|e| format!("bad value in {s:?}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn build_config(name: &str, c: &Common, replicas: usize, sizes: &[usize]) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => {
            let mut cfg = RunConfig::new(name, 0);
            cfg.replicas = replicas;
            cfg.n_list = sizes.to_vec();
            cfg
        }
    };
    cfg.experiment = name.to_string();
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(r) = c.replicas {
        cfg.replicas = r;
    }
    if let Some(w) = c.workers {
        cfg.workers = w;
    }
    if c.out.is_some() {
        cfg.out = c.out.clone();
    }
    if c.model.is_some() {
        cfg.model = c.model.clone();
    }
    if !c.sizes.is_empty() {
        cfg.n_list = c.sizes.clone();
    }
    if cfg.n_list.is_empty() {
        cfg.n_list = sizes.to_vec();
    }
    for (k, v) in &c.params {
        cfg.params.insert(k.clone(), *v);
    }
    cfg.workers = cfg.workers.max(1);
    cfg.validate()?;
    Ok(cfg)
}

fn uint(cfg: &RunConfig, name: &str, default: usize) -> Result<usize> {
    let v = cfg.param(name, default as f64);
    if v < 0.0 || v.fract() != 0.0 {
        bail!("parameter {name} must be a nonnegative integer, got {v}");
    }
    Ok(v as usize)
}

fn first_size(cfg: &RunConfig) -> usize {
    cfg.n_list[0]
}

fn finish<T: Serialize>(mut run: Run, name: &str, summary: &T) -> Result<()> {
    run.write_json(name, summary)?;
    let dir = run.dir().to_path_buf();
    run.finish()?;
    println!("{}", serde_json::to_string_pretty(summary)?);
    eprintln!("artifacts in {}", dir.display());
    Ok(())
}

fn hahp_params(cfg: &RunConfig, m: usize, n: usize, t: f64, zeta: f64) -> Result<HahpParams> {
    Ok(HahpParams::new(uint(cfg, "m", m)?, uint(cfg, "n", n)?, cfg.param("t", t), cfg.param("zeta", zeta))?)
}

fn sv_setup(cfg: &RunConfig) -> SvSetup {
    SvSetup { q: cfg.param("q", 0.3), zeta: cfg.param("zeta", 0.3), mu: cfg.param("mu", 1.0) }
}

fn sample_asep(c: &Common) -> Result<()> {
    let cfg = build_config("sample-asep", c, 4, &[64])?;
    let t = cfg.param("t", 0.4);
    let n = first_size(&cfg) as f64;
    let time = cfg.param("time", n / (1.0 - t));
    let mut run = Run::start(&cfg)?;
    let states = run_replicas(cfg.seed, cfg.replicas, cfg.workers, |_, rng| {
        simulate_asep(rng, t, time, TruncationPolicy::for_time(time))
    })
    .into_iter()
    .collect::<kpzlab::Result<Vec<_>>>()?;
    for line in &states[0].policy.log {
        run.note(line.clone());
    }
    let mut rows = Vec::new();
    for (i, s) in states.iter().enumerate() {
        let start = kpzlab::asep::reliable_window_start(time);
        for x in start..=s.positions[0] + 1 {
            rows.push([i.to_string(), x.to_string(), s.height_int(x)?.to_string()]);
        }
        if !s.truncation_safe() {
            run.note(format!("replica {i}: last simulated particle entered the reliable window"));
        }
    }
    run.write_csv("heights.csv", &["replica", "x", "h"], rows)?;
    let summary = serde_json::json!({
        "t": t,
        "time": time,
        "particles": states[0].policy.particles,
        "events": states.iter().map(|s| s.events).collect::<Vec<_>>(),
        "truncation_safe": states.iter().all(|s| s.truncation_safe()),
    });
    finish(run, "summary.json", &summary)
}

fn sample_s6v(c: &Common) -> Result<()> {
    let cfg = build_config("sample-s6v", c, 4, &[64])?;
    let params = S6VParams::from_zeta(cfg.param("q", 0.5), cfg.param("zeta", 0.5))?;
    let rows = first_size(&cfg);
    let width = uint(&cfg, "width", 2 * rows)?;
    let mut run = Run::start(&cfg)?;
    let fields = run_replicas(cfg.seed, cfg.replicas, cfg.workers, |_, rng| {
        sample_s6v_seeded(rng.next_u64(), &params, width, rows)
    })
    .into_iter()
    .collect::<kpzlab::Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (i, f) in fields.iter().enumerate() {
        for (x, h) in f.height_row(rows)?.into_iter().enumerate() {
            out.push([i.to_string(), (x + 1).to_string(), h.to_string()]);
        }
    }
    run.write_csv("top_row.csv", &["replica", "x", "h"], out)?;
    run.write_artifact("field_0.bin", &fields[0].to_bitplanes())?;
    let summary = serde_json::json!({ "params": params, "width": width, "rows": rows });
    finish(run, "summary.json", &summary)
}

fn sample_hahp(c: &Common) -> Result<()> {
    let cfg = build_config("sample-hahp", c, 100, &[])?;
    let params = hahp_params(&cfg, 6, 4, 0.5, 0.5)?;
    let cap = Cap::Weight(params.weight_cap_for_tail(cfg.param("cap_tail", 1e-9)) as u32);
    let sampler = HahpSampler::new(params, cap)?;
    let mut run = Run::start(&cfg)?;
    run.note(format!("cap {cap:?}, tail bound {:.3e}", sampler.tail_bound()));
    let seqs = run_replicas(cfg.seed, cfg.replicas, cfg.workers, |_, rng| sampler.sample(rng));
    let lines: String = seqs.iter().map(|s| s.to_json() + "\n").collect();
    run.write_artifact("samples.jsonl", lines.as_bytes())?;
    let summary = serde_json::json!({
        "params": params,
        "cap": cap,
        "listed_mass": sampler.listed_mass(),
        "tail_bound": sampler.tail_bound(),
    });
    finish(run, "summary.json", &summary)
}

fn mcmc_hahp(c: &Common) -> Result<()> {
    let cfg = build_config("mcmc-hahp", c, 1000, &[])?;
    let (m, n, h) = (uint(&cfg, "m", 2)?, uint(&cfg, "n", 2)?, uint(&cfg, "h", 2)? as u32);
    let (t, zeta) = (cfg.param("t", 0.5), cfg.param("zeta", 0.5));
    let burn_in = uint(&cfg, "burn_in", 10_000)? as u64;
    let thin = uint(&cfg, "thin", 200)? as u64;
    let mut run = Run::start(&cfg)?;
    let mut rng = rng_from_seed(cfg.seed);
    let samples = mcmc_plane_partition(&mut rng, m, n, h, t, zeta, burn_in, thin, cfg.replicas)?;
    let rows = samples.iter().enumerate().map(|(i, p)| [i.to_string(), p.size().to_string(), p.diag().to_string()]);
    run.write_csv("samples.csv", &["sample", "size", "diag"], rows)?;
    let text: String = samples.iter().map(|p| p.to_csv() + "\n").collect();
    run.write_artifact("states.txt", text.as_bytes())?;
    let check = if uint(&cfg, "check", 1)? == 1 {
        Some(mcmc_stationarity(m, n, h, t, zeta, cfg.replicas, thin, cfg.seed ^ 1)?)
    } else {
        None
    };
    finish(run, "stationarity.json", &check)
}

fn verify_gibbs(c: &Common) -> Result<()> {
    let cfg = build_config("verify-gibbs", c, 20, &[])?;
    let height = uint(&cfg, "height", 4)? as u32;
    let draws = uint(&cfg, "draws", 100_000)?;
    let mut run = Run::start(&cfg)?;
    let mut invariance = Vec::new();
    for m in 1..=uint(&cfg, "m_max", 3)? {
        for n in 1..=uint(&cfg, "n_max", 2)? {
            for t in [0.3, 0.6] {
                for zeta in [0.3, 0.6] {
                    invariance.push(hahp_gibbs_invariance(&HahpParams::new(m, n, t, zeta)?, Cap::Height(height))?);
                }
            }
        }
    }
    run.write_json("invariance.json", &invariance)?;
    let mut rng = rng_from_seed(cfg.seed);
    let mut rejection = Vec::new();
    for _ in 0..cfg.replicas {
        let inst = random_gibbs_instance(&mut rng, cfg.param("min_z", 0.05))?;
        rejection.push(rejection_check(&mut rng, &inst, draws)?);
    }
    let summary = serde_json::json!({
        "max_invariance_tv": invariance.iter().flat_map(|r| r.tv.iter().map(|x| x.1)).fold(0.0, f64::max),
        "rejection": rejection,
    });
    finish(run, "summary.json", &summary)
}

fn verify_monotone(c: &Common) -> Result<()> {
    let cfg = build_config("verify-monotone", c, 1, &[])?;
    let run = Run::start(&cfg)?;
    let suite = verify_monotone_suite(cfg.param("t", 0.3), uint(&cfg, "max_len", 6)? as i64, uint(&cfg, "box", 6)? as i64)?;
    finish(run, "suite.json", &suite)
}

fn couple_kmt(c: &Common) -> Result<()> {
    let sizes: Vec<usize> = (4..=12).map(|k| 1usize << k).collect();
    let cfg = build_config("couple-kmt", c, 2000, &sizes)?;
    let p = cfg.param("p", 0.5);
    let mut run = Run::start(&cfg)?;
    let growth = delta_growth_experiment(p, &cfg.n_list, cfg.replicas, cfg.seed, cfg.workers)?;
    let rows = growth.rows.iter().map(|r| {
        [r.n.to_string(), r.z.to_string(), r.median_delta.to_string(), r.median_se.to_string(), r.q99_delta.to_string()]
    });
    run.write_csv("delta.csv", &["n", "z", "median", "median_se", "q99"], rows)?;
    let gate = delta_growth_gate(&growth, uint(&cfg, "fit_max_n", 256)?, cfg.param("k_se", 3.0)).ok();
    let marginals = match uint(&cfg, "marginal_n", 0)? {
        0 => None,
        n => Some(kmt_marginals(n, p, uint(&cfg, "marginal_draws", 100_000)?, cfg.seed ^ 1, cfg.workers)?),
    };
    let summary = serde_json::json!({ "growth": growth, "gate": gate, "marginals": marginals });
    finish(run, "summary.json", &summary)
}

fn local_clt(c: &Common) -> Result<()> {
    let cfg = build_config("local-clt", c, 1, &[100, 1000, 10_000])?;
    let exponent = cfg.param("exponent", 0.6);
    let run = Run::start(&cfg)?;
    let rows = cfg
        .n_list
        .iter()
        .map(|&n| {
            let z = (cfg.param("p", 0.5) * n as f64).floor() as usize;
            local_clt_check(n, z, (n as f64).powf(exponent))
        })
        .collect::<kpzlab::Result<Vec<_>>>()?;
    finish(run, "local_clt.json", &rows)
}

fn tw_reference(c: &Common) -> Result<()> {
    let mut c = c.clone();
    c.seed = c.seed.or(Some(TW_DEFAULT_SEED));
    let cfg = build_config("tw-reference", &c, 100_000, &[TW_DEFAULT_N])?;
    let mut run = Run::start(&cfg)?;
    let tw = TwReference::build(first_size(&cfg), cfg.replicas, cfg.seed, cfg.workers)?;
    run.write_artifact("tw_cdf.csv", tw.to_csv().as_bytes())?;
    let summary = serde_json::json!({
        "matrix_size": tw.matrix_size,
        "replicas": tw.replicas,
        "median": tw.median(),
        "q05": tw.quantile(0.05),
        "q95": tw.quantile(0.95),
    });
    finish(run, "summary.json", &summary)
}

fn reference(cfg: &RunConfig) -> Result<TwReference> {
    let n = uint(cfg, "tw_n", TW_DEFAULT_N)?;
    let reps = uint(cfg, "tw_replicas", 100_000)?;
    Ok(TwReference::build(n, reps, TW_DEFAULT_SEED, cfg.workers)?)
}

fn exp_onepoint(c: &Common) -> Result<()> {
    let cfg = build_config("exp-onepoint", c, 10_000, &[64, 128, 256])?;
    let model = cfg.model.clone().unwrap_or_else(|| "sv".into());
    let mut run = Run::start(&cfg)?;
    let tw = reference(&cfg)?;
    let mut reports = Vec::new();
    for &n in &cfg.n_list {
        let values = match model.as_str() {
            "sv" => sv_scan(&sv_setup(&cfg), n, 1.0, &[], cfg.replicas, cfg.seed, cfg.workers)?.onepoint,
            "asep" => {
                let setup = AsepSetup { t: cfg.param("t", 0.4), alpha: cfg.param("alpha", 0.5) };
                let reps = asep_onepoint(&setup, n, cfg.replicas, cfg.seed, cfg.workers)?;
                if !reps.iter().all(|r| r.identity_holds) {
                    run.note(format!("N={n}: event identity failed on some trajectory"));
                }
                reps.into_iter().map(|r| r.scaled).collect()
            }
            other => bail!("unknown model {other:?}; expected sv or asep"),
        };
        run.write_csv(&format!("onepoint_{n}.csv"), &["f"], values.iter().map(|v| [v.to_string()]))?;
        reports.push(OnePointReport::new(n, values, &tw)?);
    }
    finish(run, "onepoint.json", &reports)
}

const TRANSVERSAL_EXPONENTS: [f64; 3] = [0.5, 2.0 / 3.0, 5.0 / 6.0];

fn exp_transversal(c: &Common) -> Result<()> {
    let cfg = build_config("exp-transversal", c, 10_000, &[64, 128, 256])?;
    let setup = sv_setup(&cfg);
    let s = cfg.param("s", 1.0);
    let run = Run::start(&cfg)?;
    let scans = cfg
        .n_list
        .iter()
        .map(|&n| sv_scan(&setup, n, s, &TRANSVERSAL_EXPONENTS, cfg.replicas, cfg.seed, cfg.workers))
        .collect::<kpzlab::Result<Vec<_>>>()?;
    let report = sv_scan_transversal(&scans, s, &TRANSVERSAL_EXPONENTS)?;
    finish(run, "transversal.json", &report)
}

fn exp_identity(c: &Common) -> Result<()> {
    let cfg = build_config("exp-identity-svhl", c, 100_000, &[])?;
    let params = hahp_params(&cfg, 6, 4, 0.5, 0.5)?;
    let cap = Cap::Weight(params.weight_cap_for_tail(cfg.param("cap_tail", 1e-9)) as u32);
    let run = Run::start(&cfg)?;
    let hl = hl_height_vectors(&params, cap, cfg.replicas, cfg.seed, cfg.workers)?;
    let sv_params = S6VParams::from_zeta(params.t, params.zeta)?;
    let sv = sv_height_vectors(&sv_params, params.m, params.n, cfg.replicas, cfg.seed ^ 1, cfg.workers)?;
    finish(run, "identity.json", &identity_report(&params, cap, &hl, &sv)?)
}

fn exp_acceptance(c: &Common) -> Result<()> {
    let cfg = build_config("exp-acceptance", c, 200, &[])?;
    let params = hahp_params(&cfg, 8, 4, 0.5, 0.5)?;
    let r = cfg.param("r", 1.0);
    let alpha = cfg.param("alpha", 2.0 / 3.0);
    let s1 = (r * (params.n as f64).powf(alpha)).floor() as i64;
    let centre = (params.m / 2) as i64;
    if s1 < 1 || centre < s1 || params.m as i64 - centre < s1 {
        bail!("window half-width {s1} does not fit in [0, {}]", params.m);
    }
    let cap = Cap::Weight(params.weight_cap_for_tail(cfg.param("cap_tail", 1e-9)) as u32);
    let sampler = HahpSampler::new(params, cap)?;
    let mut run = Run::start(&cfg)?;
    run.note(format!("curves from exact samples with cap {cap:?}; window [{}, {}]", centre - s1, centre + s1));
    let pairs: Vec<_> = run_replicas(cfg.seed, cfg.replicas, cfg.workers, |_, rng| {
        let ens = line_ensemble_from_sequence(&sampler.sample(rng), 2);
        (ens.curves()[0].shifted(-centre, 0), ens.curves()[1].shifted(-centre, 0))
    });
    let mut rng = rng_from_seed(cfg.seed ^ 1);
    let deltas = [0.01, 0.05, 0.1, 0.25, 0.5];
    let report = acceptance_probability_experiment(
        &mut rng,
        &pairs,
        s1,
        params.t,
        uint(&cfg, "mc_samples", 20_000)?,
        &deltas,
    )?;
    finish(run, "acceptance.json", &report)
}

fn exp_increments(c: &Common) -> Result<()> {
    let cfg = build_config("exp-increments", c, 10_000, &[512])?;
    let xis = [0.25, 0.5, 0.75];
    let n = first_size(&cfg);
    let r = cfg.param("r", 1.0);
    let run = Run::start(&cfg)?;
    let bernoulli = [0.5, 0.25]
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            bernoulli_increment_report(n as f64, 1.0, p, r, cfg.replicas, cfg.seed + k as u64, cfg.workers, &xis)
        })
        .collect::<kpzlab::Result<Vec<_>>>()?;
    let setup = sv_setup(&cfg);
    let sv_n = uint(&cfg, "sv_n", 256)?;
    let sv_replicas = uint(&cfg, "sv_replicas", 2000)?;
    let width = sv_width(&setup, sv_n, 2.0 * r * (sv_n as f64).powf(2.0 / 3.0));
    let profiles = sv_profiles(&setup, sv_n, width, sv_replicas, cfg.seed ^ 1, cfg.workers)?;
    let six_vertex = sv_increment_report(&setup, sv_n, &profiles, r, 64, &xis)?;
    let summary = serde_json::json!({ "bernoulli": bernoulli, "six_vertex": six_vertex });
    finish(run, "increments.json", &summary)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::SampleAsep(c) => sample_asep(&c),
        Command::SampleS6v(c) => sample_s6v(&c),
        Command::SampleHahp(c) => sample_hahp(&c),
        Command::McmcHahp(c) => mcmc_hahp(&c),
        Command::VerifyGibbs(c) => verify_gibbs(&c),
        Command::VerifyMonotone(c) => verify_monotone(&c),
        Command::CoupleKmt(c) => couple_kmt(&c),
        Command::LocalClt(c) => local_clt(&c),
        Command::TwReference(c) => tw_reference(&c),
        Command::ExpOnepoint(c) => exp_onepoint(&c),
        Command::ExpTransversal(c) => exp_transversal(&c),
        Command::ExpIdentitySvhl(c) => exp_identity(&c),
        Command::ExpAcceptance(c) => exp_acceptance(&c),
        Command::ExpIncrements(c) => exp_increments(&c),
    }
}
