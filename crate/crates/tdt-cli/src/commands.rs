//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use tdt_core::ecosystem::{chain_health, pervasive_dependencies, spof};
use tdt_core::evidence::{collect_grace_pools, pools_to_csv, ClusterId, GracePool, PoolOptions};
use tdt_core::forecast::{forecast, reports_to_json, ForecastOptions};
use tdt_core::joint::{diagonal_cut, probability_plane};
use tdt_core::kde::{CdfHandle, FitOptions, KdeModel};
use tdt_core::model::{build_cchains, export};

use crate::util;
use crate::{FitArgs, ForecastArgs, HealthArgs, JointArgs, TdtExportArgs};

/// Exit status for sparse clusters, distinct from ordinary failures.
pub struct Sparse(pub Vec<String>);

pub fn cmd_fit(args: &FitArgs) -> Result<Option<Sparse>> {
    let metadata = util::load_metadata(&args.metadata)?;
    let vulns = util::load_vulns(&args.vulns)?;
    let scheme = util::load_scheme(args.scheme.as_deref())?;
    let chains = build_cchains(metadata.instances())?;

    let pool_options = PoolOptions {
        min_severity: if args.no_min_cvss {
            None
        } else {
            Some(args.min_cvss)
        },
    };
    let pools = collect_grace_pools(&vulns, &chains, &metadata, &scheme, &pool_options)?;

    let min_samples = args.min_samples;
    let mut sparse: Vec<String> = Vec::new();
    let mut fitted: Vec<(&ClusterId, &GracePool, KdeModel)> = Vec::new();
    for (cluster, pool) in &pools {
        if pool.samples.len() < min_samples && !args.allow_sparse {
            sparse.push(format!("{} ({} samples)", cluster, pool.samples.len()));
            continue;
        }
        let options = FitOptions {
            bandwidth_override: args.bandwidth,
            min_samples: Some(if args.allow_sparse { 1 } else { min_samples }),
        };
        let model = KdeModel::fit(pool, &options)
            .with_context(|| format!("fitting cluster {cluster}"))?;
        fitted.push((cluster, pool, model));
    }

    // summary: one line per scheme cluster, fitted or not
    let mut summary = String::new();
    for cluster in scheme.all_clusters() {
        let n = pools.get(&cluster).map(|p| p.samples.len()).unwrap_or(0);
        let _ = writeln!(summary, "{cluster}={n}");
    }
    print!("{summary}");

    if !sparse.is_empty() {
        return Ok(Some(Sparse(sparse)));
    }

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    for (cluster, _pool, model) in &fitted {
        let path = args.out.join(format!("{}.kde.json", cluster.file_stem()));
        util::write_output(&path, &model.to_json())?;
        println!("wrote {}", path.display());
    }
    if let Some(csv_path) = &args.pools_csv {
        util::write_output(csv_path, &pools_to_csv(&pools))?;
        println!("wrote {}", csv_path.display());
    }
    if let Some(plot_dir) = &args.plots {
        std::fs::create_dir_all(plot_dir)
            .with_context(|| format!("creating {}", plot_dir.display()))?;
        for (cluster, _pool, model) in &fitted {
            let path = plot_dir.join(format!("{}.csv", cluster.file_stem()));
            util::write_output(&path, &model.to_plot_csv())?;
        }
    }
    Ok(None)
}

pub fn cmd_forecast(args: &ForecastArgs) -> Result<()> {
    if args.snapshots.is_empty() {
        bail!("at least one --snapshots file is required");
    }
    let metadata = util::load_metadata(&args.metadata)?;
    let scheme = util::load_scheme(args.scheme.as_deref())?;
    let models = util::load_models(&args.models_dir)?;
    let tdt = util::build_tree(&args.snapshots, &metadata, &args.omit_scopes)?;
    let mut at = util::parse_dates(&args.at)?;
    at.sort();

    let options = ForecastOptions {
        allow_extrapolation: args.extrapolate,
    };
    let reports = forecast(
        &tdt,
        &at,
        args.horizon,
        &models,
        &metadata,
        &scheme,
        &options,
    )?;

    let mut table = String::from("time_point  horizon_days  root_probability\n");
    for r in &reports {
        let _ = writeln!(
            table,
            "{}  {:>12}  {:.6}",
            r.time_point, r.horizon_days, r.root_probability
        );
        for leaf in r.leaves.iter().take(3) {
            let _ = writeln!(
                table,
                "    {}:{}  p_hat={:.3e}  drop_if_zeroed={:.3e}",
                leaf.ga, leaf.version, leaf.p_hat, leaf.marginal_drop_if_zeroed
            );
        }
    }
    print!("{table}");

    if let Some(out) = &args.out {
        util::write_output(out, &reports_to_json(&reports))?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

pub fn cmd_joint(args: &JointArgs) -> Result<()> {
    let models = util::load_models(&args.models_dir)?;
    let find = |label: &str| -> Result<&KdeModel> {
        models
            .get(&ClusterId(label.to_string()))
            .or_else(|| {
                models
                    .iter()
                    .find(|(c, _)| c.file_stem() == label)
                    .map(|(_, m)| m)
            })
            .ok_or_else(|| {
                anyhow::anyhow!(
                    "no model for cluster \"{}\" (available: {})",
                    label,
                    models
                        .keys()
                        .map(|c| c.label().to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            })
    };
    let model_a = find(&args.cluster_a)?;
    let model_b = find(&args.cluster_b)?;
    let handle_a = CdfHandle::new(model_a);
    let handle_b = CdfHandle::new(model_b);

    let csv = match (&args.offsets, &args.plane) {
        (Some(offsets), None) => {
            let parts: Vec<&str> = offsets.split(',').collect();
            if parts.len() != 2 {
                bail!("--offsets expects X,Y in days");
            }
            let x: f64 = parts[0].trim().parse().context("parsing --offsets x")?;
            let y: f64 = parts[1].trim().parse().context("parsing --offsets y")?;
            let cut = diagonal_cut(&handle_a, &handle_b, x, y, args.u_max, args.resolution)?;
            cut.to_csv()
        }
        (None, Some(plane)) => {
            let parts: Vec<&str> = plane.split(',').collect();
            if parts.len() != 2 {
                bail!("--plane expects X_MAX,Y_MAX in days");
            }
            let x: f64 = parts[0].trim().parse().context("parsing --plane x_max")?;
            let y: f64 = parts[1].trim().parse().context("parsing --plane y_max")?;
            let plane = probability_plane(&handle_a, &handle_b, x, y, args.resolution)?;
            plane.to_csv()
        }
        _ => bail!("exactly one of --offsets or --plane is required"),
    };
    util::write_output(&args.out, &csv)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

pub fn cmd_health(args: &HealthArgs) -> Result<()> {
    let metadata = util::load_metadata(&args.metadata)?;
    let vulns_all = util::load_vulns(&args.vulns)?;
    let vulns: Vec<_> = match args.min_cvss {
        Some(min) => vulns_all
            .into_iter()
            .filter(|v| v.severity_score >= min)
            .collect(),
        None => vulns_all,
    };
    let chains = build_cchains(metadata.instances())?;
    let report = chain_health(&chains, &vulns);

    let mut table = String::from("chain  affected/total  fraction\n");
    for c in &report.chains {
        let _ = writeln!(
            table,
            "{}  {}/{}  {:.4}",
            c.chain, c.instances_affected, c.instances_total, c.fraction_affected
        );
    }
    let _ = writeln!(table, "aggregate  {:.4}", report.aggregate_fraction);
    print!("{table}");

    if let Some(out) = &args.out {
        let mut json = serde_json::to_string_pretty(&report)?;
        json.push('\n');
        util::write_output(out, &json)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

pub fn cmd_tdt_export(args: &TdtExportArgs) -> Result<()> {
    if args.snapshots.is_empty() {
        bail!("at least one --snapshots file is required");
    }
    let metadata = util::load_metadata(&args.metadata)?;
    let tdt = util::build_tree(&args.snapshots, &metadata, &args.omit_scopes)?;

    util::write_output(&args.out, &export::to_graph_json(&tdt))?;
    println!("wrote {}", args.out.display());
    if let Some(dot_path) = &args.dot {
        util::write_output(dot_path, &export::to_dot(&tdt))?;
        println!("wrote {}", dot_path.display());
    }

    if args.spof {
        for report in spof(&tdt, args.min_coverage) {
            println!(
                "spof {} covers {}/{} root versions",
                report.instance,
                report.compromised_root_versions.len(),
                tdt.column_count()
            );
        }
    }
    if let Some(min) = args.pervasive {
        for (instance, count) in pervasive_dependencies(&tdt, min) {
            println!("pervasive {instance} dependents={count}");
        }
    }
    Ok(())
}

/// Paths accepted by --snapshots: comma-separated files, or a directory
/// whose *.json files are taken in name order.
pub fn expand_snapshot_paths(raw: &[String]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for item in raw {
        for part in item.split(',') {
            let path = Path::new(part.trim());
            if path.is_dir() {
                let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
                    .with_context(|| format!("reading {}", path.display()))?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| {
                        p.extension()
                            .map(|e| e.eq_ignore_ascii_case("json"))
                            .unwrap_or(false)
                    })
                    .collect();
                entries.sort();
                out.extend(entries);
            } else {
                out.push(path.to_path_buf());
            }
        }
    }
    Ok(out)
}
