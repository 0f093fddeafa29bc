//! Reproducible experiment driver.
//!
//! Every run writes three files into the output directory: a CSV table, a
//! JSON mirror of the same table, and a manifest recording the seed, a
//! hash of the full configuration, the library version and the wall
//! clock. Outputs are deterministic given (config, seed); rerunning a
//! config reproduces the CSV/JSON byte-for-byte.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::exit;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use tracefluct::asclt::{il_statistic, log_mean, replicated_paths, target_characteristic};
use tracefluct::child_seed;
use tracefluct::combinatorics::{cardinality_bound_check, remainder_variance_exact};
use tracefluct::ensemble::EntryDistribution;
use tracefluct::kernels::{contraction_scaling, normalized_kernel};
use tracefluct::oracle::{exact_expected_trace, exact_fluct_covariance};
use tracefluct::stein::{berry_rate_experiment, universal_bound, BoundInput, Phi};
use tracefluct::trace::trace_power;
use tracefluct::{Error, Result};

const EXIT_INVALID_CONFIG: i32 = 2;
const EXIT_BUDGET: i32 = 3;

#[derive(Parser)]
#[command(name = "tracefluct", version, about = "Experiment driver for trace-fluctuation studies")]
struct Cli {
    /// Output directory (overridden by TRACEFLUCT_OUT if set)
    #[arg(long, default_value = "out", global = true)]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Entry distribution: rademacher | normal | discrete:v1,p1;v2,p2;...
    #[arg(long, default_value = "rademacher")]
    dist: String,
    /// Master seed; replication r uses a derived child seed
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Monte-Carlo replications
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Empirical variances of centered trace powers vs the exact oracle
    Clt {
        #[command(flatten)]
        common: Common,
        /// Trace orders, strictly increasing, e.g. 2,3
        #[arg(long, default_value = "2,3")]
        orders: String,
        /// Matrix sizes, e.g. 16,32,64 or 2..6
        #[arg(long = "N", default_value = "16,32,64")]
        n: String,
    },
    /// Berry-type discrepancy table for several entry distributions
    Universality {
        /// Entry distributions (repeat the flag); default rademacher + normal
        #[arg(long)]
        dist: Vec<String>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        #[arg(long, default_value = "2,3")]
        orders: String,
        #[arg(long = "N", default_value = "16,32,64,128")]
        n: String,
        /// Frequencies of the cosine-product test function, one per order
        #[arg(long, default_value = "1,1")]
        t: String,
    },
    /// sqrt(N)-scaled contraction norms of the trace kernels
    ContractionScaling {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long = "N", default_value = "4,8,16,32")]
        n: String,
    },
    /// Chain-class cardinality ratios |C_pi(2k,N)| / N^{k-1}
    Combinatorics {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long = "N", default_value = "2..8")]
        n: String,
    },
    /// Exact remainder variances, scaled by N
    Remainder {
        /// Entry distribution: rademacher | normal | discrete:...
        #[arg(long, default_value = "normal")]
        dist: String,
        #[arg(long, default_value = "2,3")]
        orders: String,
        #[arg(long = "N", default_value = "2..6")]
        n: String,
    },
    /// The explicit smooth-function bound for normalized trace kernels
    Bounds {
        #[arg(long, default_value = "rademacher")]
        dist: String,
        #[arg(long, default_value = "2,3")]
        orders: String,
        #[arg(long = "N", default_value = "4,8,16,32")]
        n: String,
        /// Cosine-product frequencies defining the smooth test function
        #[arg(long, default_value = "1,1")]
        t: String,
    },
    /// Logarithmic path averages of a test function vs the Gaussian value
    Asclt {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "2")]
        orders: String,
        #[arg(long = "N", default_value = "64,128,256")]
        n: String,
        #[arg(long, default_value = "1")]
        t: String,
    },
    /// Averaged characteristic-function criterion statistic E|Delta_N|^2
    IlCriterion {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "2")]
        orders: String,
        #[arg(long = "N", default_value = "64,128,256")]
        n: String,
        #[arg(long, default_value = "0.5")]
        t: String,
    },
    /// Monte-Carlo covariances vs the exact moment oracle
    OracleCheck {
        #[command(flatten)]
        common: Common,
        /// Trace orders whose pairwise covariances are checked
        #[arg(long, default_value = "2,3")]
        k: String,
        #[arg(long = "N", default_value = "3")]
        n: String,
    },
}

/// A flat result table; one per command run.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // 17 significant digits: round-trips every f64
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => serde_json::Value::from(*v),
            Cell::Float(v) => serde_json::Value::from(*v),
            Cell::Text(s) => serde_json::Value::from(s.as_str()),
        }
    }
}

fn parse_usize_list(spec: &str) -> Result<Vec<usize>> {
    let spec = spec.trim();
    let bad = |m: &str| Error::InvalidArgument(format!("bad size list '{spec}': {m}"));
    if let Some((a, b)) = spec.split_once("..") {
        let lo: usize = a.trim().parse().map_err(|_| bad("range start"))?;
        let hi: usize = b.trim().parse().map_err(|_| bad("range end"))?;
        if lo > hi {
            return Err(bad("empty range"));
        }
        return Ok((lo..=hi).collect());
    }
    let out: std::result::Result<Vec<usize>, _> =
        spec.split(',').map(|p| p.trim().parse::<usize>()).collect();
    let out = out.map_err(|_| bad("expected comma-separated integers"))?;
    if out.is_empty() {
        return Err(bad("empty"));
    }
    Ok(out)
}

fn parse_f64_list(spec: &str) -> Result<Vec<f64>> {
    let out: std::result::Result<Vec<f64>, _> =
        spec.split(',').map(|p| p.trim().parse::<f64>()).collect();
    out.map_err(|_| Error::InvalidArgument(format!("bad real list '{spec}'")))
}

struct RunContext {
    command: &'static str,
    config: Vec<(String, String)>,
    seed: Option<u64>,
    notes: Vec<&'static str>,
}

impl RunContext {
    fn new(command: &'static str) -> Self {
        RunContext {
            command,
            config: vec![("command".into(), command.into())],
            seed: None,
            notes: Vec::new(),
        }
    }

    fn arg(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.config.push((key.into(), value.to_string()));
        self
    }

    fn seed(&mut self, seed: u64) -> &mut Self {
        self.seed = Some(seed);
        self.arg("seed", seed)
    }

    fn config_hash(&self) -> String {
        let mut canonical = String::new();
        for (k, v) in &self.config {
            let _ = writeln!(canonical, "{k}={v}");
        }
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn emit(&self, out_dir: &PathBuf, table: &Table, started: Instant) -> Result<()> {
        if table.rows.is_empty() {
            return Err(Error::InvalidArgument("empty result table".into()));
        }
        std::fs::create_dir_all(out_dir)
            .map_err(|e| Error::InvalidArgument(format!("cannot create {out_dir:?}: {e}")))?;
        let hash = self.config_hash();
        let seed = self.seed;

        let mut csv = String::new();
        if let Some(s) = seed {
            let _ = writeln!(csv, "# seed={s}");
        }
        let _ = writeln!(csv, "# config_sha256={hash}");
        let _ = writeln!(csv, "{}", table.columns.join(","));
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(csv, "{}", cells.join(","));
        }
        let csv_path = out_dir.join(format!("{}.csv", self.command));
        std::fs::write(&csv_path, csv)
            .map_err(|e| Error::InvalidArgument(format!("cannot write {csv_path:?}: {e}")))?;

        let rows: Vec<serde_json::Value> = table
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, cell)| (c.to_string(), cell.json()))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let json = serde_json::json!({
            "command": self.command,
            "seed": seed,
            "config_sha256": hash,
            "columns": table.columns,
            "rows": rows,
        });
        let json_path = out_dir.join(format!("{}.json", self.command));
        std::fs::write(&json_path, format!("{:#}\n", json))
            .map_err(|e| Error::InvalidArgument(format!("cannot write {json_path:?}: {e}")))?;

        let config: serde_json::Map<String, serde_json::Value> = self
            .config
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::from(v.as_str())))
            .collect();
        let manifest = serde_json::json!({
            "command": self.command,
            "config": config,
            "config_sha256": hash,
            "seed": seed,
            "library_version": env!("CARGO_PKG_VERSION"),
            "wall_clock_seconds": started.elapsed().as_secs_f64(),
            "notes": self.notes,
        });
        let manifest_path = out_dir.join(format!("{}.manifest.json", self.command));
        std::fs::write(&manifest_path, format!("{:#}\n", manifest))
            .map_err(|e| Error::InvalidArgument(format!("cannot write {manifest_path:?}: {e}")))?;

        println!("wrote {:?}, {:?}, {:?}", csv_path, json_path, manifest_path);
        Ok(())
    }
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let out_dir = match std::env::var_os("TRACEFLUCT_OUT") {
        Some(dir) => PathBuf::from(dir),
        None => cli.out.clone(),
    };

    match cli.command {
        Command::Clt { common, orders, n } => {
            let dist = EntryDistribution::parse(&common.dist)?;
            let orders_v = parse_usize_list(&orders)?;
            let n_v = parse_usize_list(&n)?;
            validate_orders(&orders_v)?;
            let mut ctx = RunContext::new("clt");
            ctx.arg("dist", dist.name()).arg("orders", &orders).arg("N", &n).arg("reps", common.reps);
            ctx.seed(common.seed);
            let mut table = Table {
                columns: vec!["N", "k", "reps", "empirical_variance", "se", "exact_variance", "limit"],
                rows: Vec::new(),
            };
            for &nn in &n_v {
                let centers: Vec<f64> = orders_v
                    .iter()
                    .map(|&k| exact_expected_trace(nn, k, &dist).map(|e| e.value_f64()))
                    .collect::<Result<_>>()?;
                // per-order centered trace samples
                let mut samples: Vec<Vec<f64>> = vec![Vec::new(); orders_v.len()];
                for rep in 0..common.reps {
                    let array = tracefluct::ensemble::MatrixArray::new(
                        child_seed(common.seed, rep),
                        dist.clone(),
                    );
                    let m = array.sample_matrix(nn)?;
                    for (j, &k) in orders_v.iter().enumerate() {
                        samples[j].push(trace_power(&m, k)? - centers[j]);
                    }
                }
                for (j, &k) in orders_v.iter().enumerate() {
                    let r = common.reps as f64;
                    let mean = samples[j].iter().sum::<f64>() / r;
                    let sq: Vec<f64> = samples[j].iter().map(|x| (x - mean).powi(2)).collect();
                    let var = sq.iter().sum::<f64>() / (r - 1.0);
                    let m4 = sq.iter().map(|s| (s - var).powi(2)).sum::<f64>() / (r - 1.0);
                    let exact = exact_fluct_covariance(nn, k, k, &dist)?.value_f64();
                    table.rows.push(vec![
                        Cell::Int(nn as i64),
                        Cell::Int(k as i64),
                        Cell::Int(common.reps as i64),
                        Cell::Float(var),
                        Cell::Float((m4 / r).sqrt()),
                        Cell::Float(exact),
                        Cell::Float(k as f64),
                    ]);
                }
            }
            ctx.emit(&out_dir, &table, started)
        }
        Command::Universality { dist, seed, reps, orders, n, t } => {
            let dists = if dist.is_empty() {
                vec!["rademacher".to_string(), "normal".to_string()]
            } else {
                dist
            };
            let orders_v = parse_usize_list(&orders)?;
            validate_orders(&orders_v)?;
            let n_v = parse_usize_list(&n)?;
            let t_v = parse_f64_list(&t)?;
            if t_v.len() != orders_v.len() {
                return Err(Error::InvalidArgument(
                    "need one frequency per order".into(),
                ));
            }
            let phi = Phi::CosProduct { t: t_v };
            let mut ctx = RunContext::new("universality");
            ctx.arg("dists", dists.join("|"))
                .arg("orders", &orders)
                .arg("N", &n)
                .arg("reps", reps)
                .arg("phi", phi.id());
            ctx.seed(seed);
            let mut table = Table {
                columns: vec!["dist", "N", "reps", "discrepancy", "scaled_discrepancy", "se"],
                rows: Vec::new(),
            };
            for (d_idx, spec) in dists.iter().enumerate() {
                let d = EntryDistribution::parse(spec)?;
                let rows = berry_rate_experiment(
                    &d,
                    &orders_v,
                    &n_v,
                    reps,
                    &phi,
                    child_seed(seed, d_idx as u64),
                )?;
                for row in rows {
                    table.rows.push(vec![
                        Cell::Text(d.name().to_string()),
                        Cell::Int(row.n as i64),
                        Cell::Int(row.replications as i64),
                        Cell::Float(row.discrepancy),
                        Cell::Float(row.scaled_discrepancy),
                        Cell::Float(row.se),
                    ]);
                }
            }
            ctx.emit(&out_dir, &table, started)
        }
        Command::ContractionScaling { k, n } => {
            let n_v = parse_usize_list(&n)?;
            let mut ctx = RunContext::new("contraction-scaling");
            ctx.arg("k", k).arg("N", &n);
            let mut table = Table {
                columns: vec!["N", "k", "r", "norm", "sqrtN_norm"],
                rows: Vec::new(),
            };
            for row in contraction_scaling(k, &n_v)? {
                table.rows.push(vec![
                    Cell::Int(row.n as i64),
                    Cell::Int(k as i64),
                    Cell::Int(row.r as i64),
                    Cell::Float(row.norm),
                    Cell::Float(row.scaled_norm),
                ]);
            }
            ctx.emit(&out_dir, &table, started)
        }
        Command::Combinatorics { k, n } => {
            let n_v = parse_usize_list(&n)?;
            let mut ctx = RunContext::new("combinatorics");
            ctx.arg("k", k).arg("N", &n);
            let mut table = Table {
                columns: vec!["partition", "N", "cardinality", "ratio"],
                rows: Vec::new(),
            };
            for row in cardinality_bound_check(k, &n_v)? {
                table.rows.push(vec![
                    Cell::Text(row.partition.to_string()),
                    Cell::Int(row.n as i64),
                    Cell::Int(row.cardinality as i64),
                    Cell::Float(row.ratio),
                ]);
            }
            ctx.emit(&out_dir, &table, started)
        }
        Command::Remainder { dist, orders, n } => {
            let d = EntryDistribution::parse(&dist)?;
            let orders_v = parse_usize_list(&orders)?;
            validate_orders(&orders_v)?;
            let n_v = parse_usize_list(&n)?;
            let mut ctx = RunContext::new("remainder");
            ctx.arg("dist", d.name()).arg("orders", &orders).arg("N", &n);
            let mut table = Table {
                columns: vec!["N", "k", "dist", "variance_exact", "variance", "N_times_variance"],
                rows: Vec::new(),
            };
            for &k in &orders_v {
                for &nn in &n_v {
                    let v = remainder_variance_exact(nn, k, &d)?;
                    let f = rational_to_f64(&v);
                    table.rows.push(vec![
                        Cell::Int(nn as i64),
                        Cell::Int(k as i64),
                        Cell::Text(d.name().to_string()),
                        Cell::Text(v.to_string()),
                        Cell::Float(f),
                        Cell::Float(nn as f64 * f),
                    ]);
                }
            }
            ctx.emit(&out_dir, &table, started)
        }
        Command::Bounds { dist, orders, n, t } => {
            let d = EntryDistribution::parse(&dist)?;
            let orders_v = parse_usize_list(&orders)?;
            validate_orders(&orders_v)?;
            let n_v = parse_usize_list(&n)?;
            let t_v = parse_f64_list(&t)?;
            if t_v.len() != orders_v.len() {
                return Err(Error::InvalidArgument(
                    "need one frequency per order".into(),
                ));
            }
            let phi = Phi::CosProduct { t: t_v };
            let mut ctx = RunContext::new("bounds");
            ctx.arg("dist", d.name())
                .arg("orders", &orders)
                .arg("N", &n)
                .arg("phi", phi.id());
            let mut table = Table {
                columns: vec!["N", "contraction_part", "influence_part", "total", "sqrtN_contraction"],
                rows: Vec::new(),
            };
            for &nn in &n_v {
                let kernels: Vec<_> = orders_v
                    .iter()
                    .map(|&k| normalized_kernel(k, nn))
                    .collect::<Result<_>>()?;
                let input = BoundInput::new(
                    kernels,
                    d.abs_third(),
                    phi.derivative_norm(2),
                    phi.derivative_norm(3),
                    None,
                )?;
                let b = universal_bound(&input)?;
                table.rows.push(vec![
                    Cell::Int(nn as i64),
                    Cell::Float(b.contraction_part),
                    Cell::Float(b.influence_part),
                    Cell::Float(b.total()),
                    Cell::Float((nn as f64).sqrt() * b.contraction_part),
                ]);
            }
            ctx.emit(&out_dir, &table, started)
        }
        Command::Asclt { common, orders, n, t } => {
            let dist = EntryDistribution::parse(&common.dist)?;
            let orders_v = parse_usize_list(&orders)?;
            validate_orders(&orders_v)?;
            let n_v = parse_usize_list(&n)?;
            let t_v = parse_f64_list(&t)?;
            if t_v.len() != orders_v.len() {
                return Err(Error::InvalidArgument(
                    "need one frequency per order".into(),
                ));
            }
            let n_max = *n_v.iter().max().unwrap();
            let mut ctx = RunContext::new("asclt");
            ctx.arg("dist", dist.name())
                .arg("orders", &orders)
                .arg("N", &n)
                .arg("reps", common.reps)
                .arg("t", &t);
            ctx.seed(common.seed);
            ctx.notes.push(
                "desk-scale run: the almost-sure limit is asymptotic and is not itself \
                 reproduced at these sizes; the table reports finite-N logarithmic averages",
            );
            let paths = replicated_paths(common.seed, &dist, &orders_v, n_max, common.reps)?;
            let target: f64 = target_characteristic(&orders_v, &t_v);
            let phi_path = |record: &[f64]| -> f64 {
                record.iter().zip(&t_v).map(|(x, tt)| (tt * x).cos()).product()
            };
            let mut table = Table {
                columns: vec!["N", "reps", "mean_log_average", "gaussian_value", "abs_error", "se"],
                rows: Vec::new(),
            };
            for &nn in &n_v {
                let vals: Vec<f64> = paths
                    .iter()
                    .map(|p| log_mean(&p.truncate(nn), phi_path))
                    .collect::<Result<_>>()?;
                let r = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / r;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
                table.rows.push(vec![
                    Cell::Int(nn as i64),
                    Cell::Int(common.reps as i64),
                    Cell::Float(mean),
                    Cell::Float(target),
                    Cell::Float((mean - target).abs()),
                    Cell::Float((var / r).sqrt()),
                ]);
            }
            ctx.emit(&out_dir, &table, started)
        }
        Command::IlCriterion { common, orders, n, t } => {
            let dist = EntryDistribution::parse(&common.dist)?;
            let orders_v = parse_usize_list(&orders)?;
            validate_orders(&orders_v)?;
            let n_v = parse_usize_list(&n)?;
            let t_v = parse_f64_list(&t)?;
            if t_v.len() != orders_v.len() {
                return Err(Error::InvalidArgument(
                    "need one frequency per order".into(),
                ));
            }
            let n_max = *n_v.iter().max().unwrap();
            let mut ctx = RunContext::new("il-criterion");
            ctx.arg("dist", dist.name())
                .arg("orders", &orders)
                .arg("N", &n)
                .arg("reps", common.reps)
                .arg("t", &t);
            ctx.seed(common.seed);
            ctx.notes.push(
                "desk-scale run: the criterion requires E|Delta_N|^2 log N bounded as N grows; \
                 only the finite-N statistics are reported",
            );
            let paths = replicated_paths(common.seed, &dist, &orders_v, n_max, common.reps)?;
            let mut table = Table {
                columns: vec!["N", "reps", "t", "mean_abs2", "logN_scaled", "se"],
                rows: Vec::new(),
            };
            for &nn in &n_v {
                let truncated: Vec<_> = paths.iter().map(|p| p.truncate(nn)).collect();
                let stat = il_statistic(&truncated, &t_v)?;
                let r = stat.per_replication.len() as f64;
                let var = stat
                    .per_replication
                    .iter()
                    .map(|z| (z.norm_sqr() - stat.mean_abs2).powi(2))
                    .sum::<f64>()
                    / (r - 1.0);
                table.rows.push(vec![
                    Cell::Int(nn as i64),
                    Cell::Int(common.reps as i64),
                    Cell::Text(t.clone()),
                    Cell::Float(stat.mean_abs2),
                    Cell::Float(stat.mean_abs2 * (nn as f64).ln()),
                    Cell::Float((var / r).sqrt()),
                ]);
            }
            ctx.emit(&out_dir, &table, started)
        }
        Command::OracleCheck { common, k, n } => {
            let dist = EntryDistribution::parse(&common.dist)?;
            let k_v = parse_usize_list(&k)?;
            validate_orders(&k_v)?;
            let n_v = parse_usize_list(&n)?;
            let mut ctx = RunContext::new("oracle-check");
            ctx.arg("dist", dist.name()).arg("k", &k).arg("N", &n).arg("reps", common.reps);
            ctx.seed(common.seed);
            let mut table = Table {
                columns: vec!["N", "k1", "k2", "reps", "exact", "mc", "se", "z"],
                rows: Vec::new(),
            };
            for &nn in &n_v {
                let centers: Vec<f64> = k_v
                    .iter()
                    .map(|&kk| exact_expected_trace(nn, kk, &dist).map(|e| e.value_f64()))
                    .collect::<Result<_>>()?;
                let mut samples: Vec<Vec<f64>> = vec![Vec::new(); k_v.len()];
                for rep in 0..common.reps {
                    let array = tracefluct::ensemble::MatrixArray::new(
                        child_seed(common.seed, rep),
                        dist.clone(),
                    );
                    let m = array.sample_matrix(nn)?;
                    for (j, &kk) in k_v.iter().enumerate() {
                        samples[j].push(trace_power(&m, kk)? - centers[j]);
                    }
                }
                for a in 0..k_v.len() {
                    for b in a..k_v.len() {
                        let exact = exact_fluct_covariance(nn, k_v[a], k_v[b], &dist)?.value_f64();
                        let r = common.reps as f64;
                        let ma = samples[a].iter().sum::<f64>() / r;
                        let mb = samples[b].iter().sum::<f64>() / r;
                        let prods: Vec<f64> = samples[a]
                            .iter()
                            .zip(&samples[b])
                            .map(|(x, y)| (x - ma) * (y - mb))
                            .collect();
                        let mc = prods.iter().sum::<f64>() / r;
                        let var =
                            prods.iter().map(|p| (p - mc).powi(2)).sum::<f64>() / (r - 1.0);
                        let se = (var / r).sqrt();
                        table.rows.push(vec![
                            Cell::Int(nn as i64),
                            Cell::Int(k_v[a] as i64),
                            Cell::Int(k_v[b] as i64),
                            Cell::Int(common.reps as i64),
                            Cell::Float(exact),
                            Cell::Float(mc),
                            Cell::Float(se),
                            Cell::Float((mc - exact).abs() / se),
                        ]);
                    }
                }
            }
            ctx.emit(&out_dir, &table, started)
        }
    }
}

fn validate_orders(orders: &[usize]) -> Result<()> {
    if orders.is_empty() || !orders.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument(
            "orders must be nonempty and strictly increasing".into(),
        ));
    }
    Ok(())
}

fn rational_to_f64(v: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(f64::NAN)
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(Error::BudgetExceeded { what, needed, budget }) => {
            eprintln!("budget exceeded: {what} needs {needed}, budget {budget}");
            exit(EXIT_BUDGET);
        }
        Err(e) => {
            eprintln!("invalid configuration: {e}");
            exit(EXIT_INVALID_CONFIG);
        }
    }
}
