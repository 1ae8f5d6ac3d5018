use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use log::{info, warn};
use rec_sizer::config::{base_dir, load_config, ConfigFile, ParticipantEntry};
use rec_sizer::report::build_report;
use rec_sizer::schema::{
    from_json, to_json, Document, RepDaysDoc, ReportDoc, SolutionDoc, SCHEMA_VERSION,
};
use rec_sizer::series::{read_series_csv, read_weather_csv, write_series_csv, write_weather_csv};
use rec_sizer::signal::{extract_with_models, ExtractOptions, RegressorSpec, Season};
use rec_sizer::sizing::{
    brute_force_oracle, check_solution, solve_bnb, BnbOptions, SizingProblem, SizingSolution,
};
use rec_sizer::synth::synthetic_community;
use rec_sizer::tariff::{rate_series, HourLabel, RateKind};
use rec_sizer::types::{BessSpec, EconomicParams, PvSpec, RecConfig, TariffSchedule};

use crate::manifest::{config_hash, digest_file, manifest_name, provenance, ManifestBuilder};
use crate::plots::plots;
use crate::{
    write_file, CliError, EvaluateArgs, ExtractArgs, Format, Method, ReportArgs, SizeArgs,
    SynthArgs, EXIT_LIMIT,
};

fn open_flag(flag: &str, path: &Path) -> Result<fs::File, CliError> {
    fs::File::open(path)
        .map_err(|e| CliError::input(format!("{flag}: cannot open {}: {e}", path.display())))
}

fn read_doc<D: Document>(flag: &str, path: &Path) -> Result<D, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{flag}: cannot read {}: {e}", path.display())))?;
    from_json(&text).map_err(|e| CliError::from(e).context(format!("{flag} {}", path.display())))
}

fn write_doc<D: Document>(path: &Path, doc: &D) -> Result<(), CliError> {
    write_file(path, &to_json(doc)?)
}

fn sidecar(output: &Path) -> PathBuf {
    output.with_file_name(manifest_name(output))
}

fn load_flag_config(path: &Path) -> Result<(ConfigFile, RecConfig, String), CliError> {
    let ctx =
        |e: rec_sizer::Error| CliError::from(e).context(format!("--config {}", path.display()));
    let (file, config) = load_config(path).map_err(ctx)?;
    let hash = config_hash(&file, &base_dir(path))?;
    Ok((file, config, hash))
}

fn day_names() -> Vec<String> {
    Season::ALL.iter().map(|s| s.name().to_owned()).collect()
}

pub fn extract(a: &ExtractArgs) -> Result<(), CliError> {
    let mut m = ManifestBuilder::start("extract");
    let loads = read_series_csv(open_flag("--input", &a.input)?)
        .map_err(|e| CliError::from(e).context(format!("--input {}", a.input.display())))?;
    let weather = read_weather_csv(open_flag("--weather", &a.weather)?)
        .map_err(|e| CliError::from(e).context(format!("--weather {}", a.weather.display())))?;
    m.inputs = vec![digest_file(&a.input)?, digest_file(&a.weather)?];

    let opts = ExtractOptions {
        regressors: RegressorSpec {
            n_yearly: a.ny,
            n_weekly: a.nw,
            n_daily: a.nd,
            ..RegressorSpec::default()
        },
        lambda: a.lambda.0,
        ..ExtractOptions::default()
    };
    let (repdays, models) = extract_with_models(&loads, &weather, &opts)?;
    for ((id, series), model) in loads.iter().zip(&models) {
        if !model.converged {
            warn!("{id}: FISTA stopped after {} iterations", model.iterations);
        }
        info!(
            "{id}: {} samples, lambda={:.6e}",
            series.len(),
            model.lambda
        );
    }
    let doc = RepDaysDoc {
        schema_version: SCHEMA_VERSION,
        kind: RepDaysDoc::KIND.into(),
        provenance: provenance("extract", &m.inputs, &manifest_name(&a.output)),
        lambdas: models.iter().map(|m| m.lambda).collect(),
        repdays,
    };
    write_doc(&a.output, &doc)?;
    m.finish(&sidecar(&a.output), &[&a.output])?;

    println!("{:<16} {:>14} {:>14}", "participant", "lambda", "kWh/day");
    for ((id, days), lambda) in doc.repdays.demand.iter().zip(&doc.lambdas) {
        println!("{:<16} {:>14.6e} {:>14.3}", id, lambda, days.total() / 4.0);
    }
    println!(
        "representative dates: {}",
        doc.repdays.dates.map(|d| d.to_string()).join(", ")
    );
    Ok(())
}

fn print_sizing(s: &SizingSolution) {
    println!("{:<16} {:>8} {:>8}", "participant", "N_pv", "N_bess");
    for ((id, np), nb) in s.ids.iter().zip(&s.n_pv).zip(&s.n_bess) {
        println!("{id:<16} {np:>8} {nb:>8}");
    }
    println!("net profit: {:.2} EUR", s.objective);
    let st = &s.stats;
    println!(
        "nodes={} lp_iterations={} bound={:.2} gap={:.3e} proven={}",
        st.nodes, st.lp_iterations, st.bound, st.gap, st.proven
    );
}

pub fn size(a: &SizeArgs) -> Result<(), CliError> {
    if !(a.gap.is_finite() && a.gap >= 0.0) {
        return Err(CliError::input(format!(
            "--gap must be a nonnegative number, got {}",
            a.gap
        )));
    }
    if a.threads == 0 {
        return Err(CliError::input("--threads must be at least 1"));
    }
    let time_limit = match a.time_limit {
        Some(t) if t.is_finite() && t >= 0.0 => Some(Duration::from_secs_f64(t)),
        Some(t) => {
            return Err(CliError::input(format!(
                "--time-limit must be a nonnegative number, got {t}"
            )))
        }
        None => None,
    };
    let mut m = ManifestBuilder::start("size");
    let (_, config, hash) = load_flag_config(&a.config)?;
    let rep: RepDaysDoc = read_doc("--repdays", &a.repdays)?;
    m.inputs = vec![digest_file(&a.config)?, digest_file(&a.repdays)?];
    m.config_hash = Some(hash.clone());

    let problem = SizingProblem::from_config(&config, &rep.repdays)?;
    let solution = match a.method {
        Method::Bnb => solve_bnb(
            &problem,
            &BnbOptions {
                gap_tol: a.gap,
                time_limit,
                node_limit: a.node_limit,
                threads: a.threads,
            },
        )?,
        Method::Oracle => brute_force_oracle(&problem)?,
    };
    let violations = check_solution(&problem, &solution);
    for v in &violations {
        warn!("solution check: {v}");
    }
    m.solver = Some(solution.stats.clone());
    let doc = SolutionDoc {
        schema_version: SCHEMA_VERSION,
        kind: SolutionDoc::KIND.into(),
        provenance: provenance("size", &m.inputs, &manifest_name(&a.out)),
        config_hash: hash,
        method: a.method.name().into(),
        repdays: rep.repdays,
        solution,
    };
    write_doc(&a.out, &doc)?;
    m.finish(&sidecar(&a.out), &[&a.out])?;
    print_sizing(&doc.solution);

    if !violations.is_empty() {
        return Err(CliError::internal(format!(
            "solution fails {} constraint checks",
            violations.len()
        )));
    }
    if !doc.solution.stats.proven {
        return Err(CliError {
            code: EXIT_LIMIT,
            message: format!(
                "limit reached with gap {:.3e} above {:.3e}; incumbent written to {}",
                doc.solution.stats.gap,
                a.gap,
                a.out.display()
            ),
        });
    }
    Ok(())
}

pub fn evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let mut m = ManifestBuilder::start("evaluate");
    let (_, config, hash) = load_flag_config(&a.config)?;
    let sol: SolutionDoc = read_doc("--solution", &a.solution)?;
    if sol.config_hash != hash {
        return Err(CliError::input(format!(
            "--solution {} was produced for configuration {}, but --config {} hashes to {}",
            a.solution.display(),
            sol.config_hash,
            a.config.display(),
            hash
        )));
    }
    m.inputs = vec![digest_file(&a.config)?, digest_file(&a.solution)?];
    m.config_hash = Some(hash.clone());

    let problem = SizingProblem::from_config(&config, &sol.repdays)?;
    for v in check_solution(&problem, &sol.solution) {
        warn!("solution check: {v}");
    }
    let bills: Vec<f64> = config
        .participants
        .iter()
        .map(|p| p.annual_bill_eur)
        .collect();
    let report = build_report(&problem, &sol.solution, &bills, day_names())?;
    let doc = ReportDoc {
        schema_version: SCHEMA_VERSION,
        kind: ReportDoc::KIND.into(),
        provenance: provenance("evaluate", &m.inputs, &manifest_name(&a.out)),
        config_hash: hash,
        report,
    };
    write_doc(&a.out, &doc)?;
    m.finish(&sidecar(&a.out), &[&a.out])?;

    println!(
        "{:<16} {:>6} {:>6} {:>8} {:>12} {:>12} {:>12} {:>8}",
        "participant", "N_pv", "N_bess", "zeta", "bill before", "bill after", "NPV", "payback"
    );
    for p in &doc.report.participants {
        println!(
            "{:<16} {:>6} {:>6} {:>8.4} {:>12.2} {:>12.2} {:>12.2} {:>8}",
            p.id,
            p.n_pv,
            p.n_bess,
            p.zeta,
            p.bill_before_eur,
            p.bill_after_eur,
            p.npv_by_year.last().copied().unwrap_or(0.0),
            p.payback_year.map_or("never".to_owned(), |y| y.to_string())
        );
    }
    println!("community net profit: {:.2} EUR", doc.report.net_profit_eur);
    let shared: f64 = doc.report.shared_kw.iter().sum::<f64>() * doc.report.season_days;
    println!("shared energy: {shared:.3} kWh/year");
    Ok(())
}

pub fn report(a: &ReportArgs) -> Result<(), CliError> {
    let mut m = ManifestBuilder::start("report");
    let doc: ReportDoc = read_doc("--in", &a.input)?;
    m.inputs = vec![digest_file(&a.input)?];
    m.config_hash = Some(doc.config_hash.clone());
    fs::create_dir_all(&a.outdir)
        .map_err(|e| CliError::input(format!("--outdir {}: {e}", a.outdir.display())))?;

    let mut written = Vec::new();
    for plot in plots(&doc.report) {
        if a.format == Format::Svg {
            let p = a.outdir.join(format!("{}.svg", plot.stem));
            write_file(&p, &plot.svg())?;
            written.push(p);
        }
        let p = a.outdir.join(format!("{}.csv", plot.stem));
        write_file(&p, &plot.csv())?;
        written.push(p);
    }
    let refs: Vec<&Path> = written.iter().map(PathBuf::as_path).collect();
    m.finish(&a.outdir.join("manifest.json"), &refs)?;
    for p in &written {
        println!("{}", p.display());
    }
    Ok(())
}

pub fn synth(a: &SynthArgs) -> Result<(), CliError> {
    if a.participants < 2 {
        return Err(CliError::input("--participants must be at least 2"));
    }
    if a.hours == 0 {
        return Err(CliError::input("--hours must be positive"));
    }
    let start = a.start.and_hms_opt(0, 0, 0).expect("midnight");
    let c = synthetic_community(a.seed, a.participants, start, a.hours)?;
    fs::create_dir_all(&a.outdir)
        .map_err(|e| CliError::input(format!("--outdir {}: {e}", a.outdir.display())))?;

    let loads = a.outdir.join("loads.csv");
    let weather = a.outdir.join("weather.csv");
    let file = |p: &Path| {
        fs::File::create(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))
    };
    let columns: Vec<(&str, &rec_sizer::types::TimeSeries)> = c
        .ids
        .iter()
        .map(String::as_str)
        .zip(c.demands.iter())
        .collect();
    write_series_csv(file(&loads)?, &columns)?;
    write_weather_csv(file(&weather)?, &c.weather)?;

    let tariff = TariffSchedule::default();
    let labels: Vec<HourLabel> = c.demands[0]
        .timestamps()
        .map(HourLabel::starting_at)
        .collect();
    let buy = rate_series(&tariff, RateKind::Buy, &labels);
    let years = a.hours as f64 / 8760.0;
    let participants = c
        .ids
        .iter()
        .zip(&c.demands)
        .zip(&c.roof_areas_m2)
        .map(|((id, d), &roof)| {
            let cost: f64 = d.values.iter().zip(&buy).map(|(p, r)| p * r).sum();
            ParticipantEntry {
                id: id.clone(),
                roof_area_m2: roof,
                annual_bill_eur: (cost / years * 100.0).round() / 100.0,
                demand: None,
                column: None,
            }
        })
        .collect();
    let config = ConfigFile {
        weather: "weather.csv".into(),
        loads: Some("loads.csv".into()),
        participants,
        pv: PvSpec::default(),
        bess: BessSpec::default(),
        tariff,
        economics: EconomicParams::default(),
    };
    let toml = a.outdir.join("rec.toml");
    write_file(&toml, &config.to_toml_string()?)?;
    for p in [&loads, &weather, &toml] {
        println!("{}", p.display());
    }
    Ok(())
}
