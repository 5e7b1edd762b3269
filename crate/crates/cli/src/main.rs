//! `facets`: command line front end for the facet process workbench.
//!
//! Every subcommand reads the same JSON experiment config; knobs that are not
//! part of the config schema (partition shape, moment request, MC depth) are
//! flags. Exit codes: 0 success, 2 config/model validation failure, 3
//! acceptance starvation in the rejection sampler, 1 anything else.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use facets_core::asymptotics::{
    asymptotic_mean, covariance_limit, covariance_limit_poisson, poisson_mean_scaled, rho_limit,
    rho_estimate_mc,
};
use facets_core::combinatorics::{enumerate_row_partitions, RowShape};
use facets_core::geometry::Facet;
use facets_core::harness::{
    configure_threads, run_experiment, sample_runs, write_sigma_csv, ExperimentConfig,
};
use facets_core::moments::{
    centered_moment_assembly, centered_moment_leading, poisson_mixed_moment, MomentRequest,
};
use facets_core::samplers::{
    sample_gibbs_mcmc, sample_gibbs_rejection, sample_poisson, SamplerMethod,
};
use facets_core::ustats::{energy, g_stat_all};
use facets_core::{Error, Result};

#[derive(Parser)]
#[command(name = "facets", version, about = "Gibbsian facet process workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, value_name = "path.json")]
    config: PathBuf,
    /// Override the config's master_seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads (outputs never depend on this).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Output directory, overriding the config's output_dir.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw all configured replicates and write runs.csv.
    Sample(Common),
    /// Draw one configuration per grid intensity and print its statistics.
    Ustat(Common),
    /// Estimate the scaled correlation function at probe tuples of every
    /// size and compare with the closed-form limits.
    Rho {
        #[command(flatten)]
        common: Common,
        /// MC samples per estimate.
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
    },
    /// Print the theoretical covariance, scaled means, and spectrum; write
    /// sigma.csv.
    Asymptotics {
        #[command(flatten)]
        common: Common,
        /// MC samples when chi is not constant.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
    /// Count row-constrained set partitions of a shape.
    Partitions {
        #[command(flatten)]
        common: Common,
        /// Row lengths, e.g. 2,2.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 1])]
        shape: Vec<usize>,
        /// Also list the blocks of every partition.
        #[arg(long)]
        list: bool,
    },
    /// Mixed moments of the U-statistics from the partition expansion.
    Moments {
        #[command(flatten)]
        common: Common,
        /// Multiplicities per order: m[j-1] factors of G_j, e.g. 2,0 for G_1^2.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1usize])]
        m: Vec<usize>,
        /// MC samples per partition sum.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Full pipeline: sample, test marginal normality against the limit
    /// covariance, report degeneration trends, write all artifacts.
    VerifyClt(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Sample(c) | Command::Ustat(c) | Command::VerifyClt(c) => c,
            Command::Rho { common, .. }
            | Command::Asymptotics { common, .. }
            | Command::Partitions { common, .. }
            | Command::Moments { common, .. } => common,
        }
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::from_path(&common.config)?;
    if let Some(seed) = common.seed {
        config.master_seed = seed;
    }
    if let Some(out) = &common.out {
        config.output_dir = Some(out.clone());
    }
    if let Some(threads) = common.threads {
        configure_threads(threads)?;
    }
    Ok(config)
}

fn out_dir(config: &ExperimentConfig) -> PathBuf {
    config.output_dir.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn seeded(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cmd_sample(config: &ExperimentConfig) -> Result<()> {
    let dir = out_dir(config);
    let records = sample_runs(config, &dir)?;
    for (a_idx, &a) in config.a_grid.iter().enumerate() {
        let rows = &records[a_idx * config.replicates..(a_idx + 1) * config.replicates];
        let n = rows.len() as f64;
        let mean_n = rows.iter().map(|r| r.n as f64).sum::<f64>() / n;
        let occupancy = rows.iter().map(|r| r.orient_occupancy).sum::<f64>() / n;
        println!(
            "a={a}: {} replicates, mean N = {mean_n:.3}, mean orientation occupancy = {occupancy:.3}",
            rows.len()
        );
    }
    println!("wrote {}", dir.join("runs.csv").display());
    Ok(())
}

fn cmd_ustat(config: &ExperimentConfig) -> Result<()> {
    let mut draws = Vec::new();
    for (a_idx, &a) in config.a_grid.iter().enumerate() {
        let params = config.params_at(a);
        let mut rng = seeded(config.master_seed, a_idx as u64);
        let sample = match config.sampler.method {
            SamplerMethod::Poisson => sample_poisson(&params, &mut rng)?,
            SamplerMethod::Rejection => {
                sample_gibbs_rejection(&params, &config.sampler, &mut rng)?.config
            }
            SamplerMethod::Mcmc => sample_gibbs_mcmc(&params, &config.sampler, &mut rng)?.0,
        };
        let g = g_stat_all(&sample, params.d, &params)?;
        draws.push(json!({
            "a": a,
            "N": sample.len(),
            "G": g,
            "energy": energy(&sample, &params)?,
            "distinct_orientations": sample.distinct_orientations(),
        }));
    }
    print_json(&json!({ "sampler": config.sampler.method, "draws": draws }))
}

fn cmd_rho(config: &ExperimentConfig, samples: usize) -> Result<()> {
    let d = config.params.d;
    let c_effective = config.params.effective_c();
    let mut report = Vec::new();
    for (a_idx, &a) in config.a_grid.iter().enumerate() {
        let params = config.params_at(a);
        let mut rng = seeded(config.master_seed, a_idx as u64);
        let mut per_k = Vec::new();
        for k in 1..=d {
            // Probe: k facets at the window centre with orientations e_1..e_k.
            let probes: Vec<Facet> = (1..=k)
                .map(|l| Facet::new(vec![params.b / 2.0; d], l))
                .collect();
            let est = rho_estimate_mc(&params, &probes, samples, &mut rng)?;
            let limit = match c_effective {
                Some(c) => rho_limit(k, c, d)?,
                None => 1.0,
            };
            per_k.push(json!({
                "k": k,
                "estimate": est.value,
                "stderr": est.stderr,
                "limit": limit,
            }));
        }
        // Two equal-orientation probes see one fewer competing direction, so
        // their pair correlation approaches the k=1 limit, not the k=2 one.
        let same_pair = if d >= 2 {
            let probes = vec![
                Facet::new(vec![params.b / 2.0; d], 1),
                Facet::new(vec![params.b / 4.0; d], 1),
            ];
            let est = rho_estimate_mc(&params, &probes, samples, &mut rng)?;
            let (k1, k2) = match c_effective {
                Some(c) => (rho_limit(1, c, d)?, rho_limit(2, c, d)?),
                None => (1.0, 1.0),
            };
            json!({
                "estimate": est.value,
                "stderr": est.stderr,
                "limit_k1": k1,
                "limit_k2": k2,
            })
        } else {
            serde_json::Value::Null
        };
        report.push(json!({ "a": a, "rho": per_k, "same_orientation_pair": same_pair }));
    }
    print_json(&json!({ "samples": samples, "per_a": report }))
}

fn cmd_asymptotics(config: &ExperimentConfig, samples: usize) -> Result<()> {
    let params = config.params_at(*config.a_grid.last().expect("validated non-empty"));
    let c_effective = params.effective_c();
    let mut rng = seeded(config.master_seed, 0);
    let sigma = match c_effective {
        Some(_) => covariance_limit(&params, samples, &mut rng)?,
        None => covariance_limit_poisson(&params, samples, &mut rng)?,
    };
    let dir = out_dir(config);
    std::fs::create_dir_all(&dir)?;
    write_sigma_csv(&dir.join("sigma.csv"), &sigma)?;
    let mut means = Vec::new();
    for j in 1..=params.d {
        let est = match c_effective {
            Some(_) => asymptotic_mean(j, &params, samples, &mut rng)?,
            None => poisson_mean_scaled(j, &params, samples, &mut rng)?,
        };
        means.push(json!({ "order": j, "scaled_mean": est.value, "stderr": est.stderr }));
    }
    print_json(&json!({
        "c_effective": c_effective,
        "theta": sigma.theta,
        "theta_stderr": sigma.stderr,
        "zero_from": sigma.zero_from,
        "leading_eigenvalues": sigma.leading_eigenvalues(),
        "scaled_means": means,
        "sigma_csv": dir.join("sigma.csv").display().to_string(),
    }))
}

fn cmd_partitions(shape: &[usize], list: bool) -> Result<()> {
    let shape = RowShape::new(shape.to_vec())?;
    let partitions = enumerate_row_partitions(&shape)?;
    let mut out = json!({
        "shape": shape.rows(),
        "count": partitions.len(),
    });
    if list {
        let blocks: Vec<_> = partitions.iter().map(|p| p.blocks.clone()).collect();
        out["partitions"] = json!(blocks);
    }
    print_json(&out)
}

fn cmd_moments(config: &ExperimentConfig, m: &[usize], samples: usize) -> Result<()> {
    let req = MomentRequest::new(m.to_vec());
    req.validate(config.params.d)?;
    let c_effective = config.params.effective_c();
    let centered_applicable = match c_effective {
        Some(c) => req.orders().iter().all(|&j| j < c),
        None => false,
    };
    let mut per_a = Vec::new();
    for (a_idx, &a) in config.a_grid.iter().enumerate() {
        let params = config.params_at(a);
        let mut rng = seeded(config.master_seed, a_idx as u64);
        let poisson = poisson_mixed_moment(&req, &params, samples, &mut rng)?;
        let mut entry = json!({
            "a": a,
            "poisson_mixed_moment": { "value": poisson.value, "stderr": poisson.stderr },
        });
        if centered_applicable {
            let centered = centered_moment_assembly(&req, &params, samples, &mut rng)?;
            entry["centered_scaled"] =
                json!({ "value": centered.value, "stderr": centered.stderr });
        }
        per_a.push(entry);
    }
    let mut out = json!({ "m": m, "samples": samples, "per_a": per_a });
    if centered_applicable {
        let params = config.params_at(config.a_grid[0]);
        let mut rng = seeded(config.master_seed, u64::MAX);
        out["wick_limit"] = json!(centered_moment_leading(&req, &params, samples, &mut rng)?);
    }
    print_json(&out)
}

fn cmd_verify_clt(config: &ExperimentConfig) -> Result<()> {
    config.validate_for_tests()?;
    let summary = run_experiment(config)?;
    let dir = out_dir(config);
    let c_label = summary.c_effective.map_or_else(|| "none".into(), |c| c.to_string());
    println!(
        "model: d={}, b={}, nu={:?}, effective c = {}, sampler = {:?}",
        summary.d, summary.b, summary.nu, c_label, summary.sampler
    );
    for report in &summary.per_a {
        println!("a = {} ({} replicates):", report.a, report.replicates);
        for marginal in &report.marginals {
            let mut line = format!(
                "  G_{}: mean {:.4} (se {:.4}), Var(std) {:.4} vs theta {:.4}",
                marginal.order,
                marginal.mean_g,
                marginal.stderr_mean,
                marginal.var_standardized,
                marginal.theta
            );
            if let Some(ks) = &marginal.ks {
                line += &format!(
                    ", KS D {:.4} p {:.4} [{}]",
                    ks.statistic,
                    ks.p_value,
                    if ks.pass { "pass" } else { "FAIL" }
                );
            }
            if let (Some(ratio), Some(pass)) =
                (marginal.fourth_moment_ratio, marginal.fourth_moment_pass)
            {
                line += &format!(
                    ", m4/3Var^2 {:.4} [{}]",
                    ratio,
                    if pass { "pass" } else { "FAIL" }
                );
            }
            if let Some(ratio) = marginal.degeneracy_ratio {
                line += &format!(", degeneracy vs Poisson {ratio:.4}");
            }
            println!("{line}");
        }
    }
    for trend in &summary.degeneration {
        let scaled: Vec<String> =
            trend.scaled_means.iter().map(|v| format!("{v:.5}")).collect();
        println!(
            "degeneration G_{}: E[G/a^{}] = {} ({}), final ratio vs Poisson = {:.4}",
            trend.order,
            trend.order,
            scaled.join(" -> "),
            if trend.strictly_decreasing { "strictly decreasing" } else { "NOT decreasing" },
            trend.final_degeneracy_ratio
        );
    }
    println!(
        "wrote {}, {}, {}",
        dir.join("runs.csv").display(),
        dir.join("sigma.csv").display(),
        dir.join("summary.json").display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let config = load_config(cli.command.common())?;
    match &cli.command {
        Command::Sample(_) => cmd_sample(&config),
        Command::Ustat(_) => cmd_ustat(&config),
        Command::Rho { samples, .. } => cmd_rho(&config, *samples),
        Command::Asymptotics { samples, .. } => cmd_asymptotics(&config, *samples),
        Command::Partitions { shape, list, .. } => cmd_partitions(shape, *list),
        Command::Moments { m, samples, .. } => cmd_moments(&config, m, *samples),
        Command::VerifyClt(_) => cmd_verify_clt(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Validation(_) => 2,
                Error::AcceptanceStarvation { .. } => 3,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
