//! Command-line front end: classification, integration, asymptotic-rate
//! verification, Keller-Osserman tests, phase flows, and parameter sweeps.
//!
//! Every subcommand writes `results.json` (and any CSV artifacts) into the
//! `--out` directory and prints a one-line summary. Exit codes: 0 success,
//! 2 validation failure, 3 inconclusive verdict, 4 hypothesis violation,
//! 1 anything else.

use clap::{Args, Parser, Subcommand};
use gradsys::error::Error;
use gradsys::ko::{self, Nonlinearity};
use gradsys::model::{self, BallClassification};
use gradsys::ode::OdeOptions;
use gradsys::phase;
use gradsys::report::{
    agreement, Agreement, BlowupSection, ClassificationSection, DiscrepancySection, FitSection,
    KoSection, PhaseSection, ResultEnvelope, SweepSection, TimingSection,
};
use gradsys::shooter::{self, IntegrationControls, Outcome};
use gradsys::SystemParams;
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_VALIDATION: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
const EXIT_HYPOTHESIS: u8 = 4;

#[derive(Parser)]
#[command(
    name = "gradsys",
    version,
    about = "Radial solutions of weighted elliptic systems with gradient nonlinearities: classification, blow-up detection, and asymptotic rates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ParamFlags {
    /// Space dimension N >= 2.
    #[arg(long = "N")]
    n: u32,
    /// Weight exponent a >= 0 of the u-equation.
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    /// Weight exponent b >= 0 of the v-equation.
    #[arg(long, default_value_t = 0.0)]
    b: f64,
    /// Exponent p > 0 of v in the u-equation.
    #[arg(long)]
    p: f64,
    /// Exponent q > 0 of v in the v-equation.
    #[arg(long)]
    q: f64,
    /// Gradient exponent s >= 1.
    #[arg(long)]
    s: f64,
}

impl ParamFlags {
    fn validate(&self) -> Result<SystemParams, Error> {
        SystemParams::new(self.n, self.a, self.b, self.p, self.q, self.s)
    }
}

#[derive(Args, Clone)]
struct OutputFlags {
    /// Output directory for results.json and CSV artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed recorded in the envelope (reproducibility bookkeeping).
    #[arg(long)]
    seed: Option<u64>,
    /// Include wall-clock timing in results.json (off by default so that
    /// repeated runs are byte-identical).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Clone)]
struct ControlFlags {
    /// Startup radius.
    #[arg(long, default_value_t = 1e-6)]
    r0: f64,
    /// Outer radius at which integration stops.
    #[arg(long = "r-max", default_value_t = 1e6)]
    r_max: f64,
    /// Blow-up detection level for v.
    #[arg(long = "v-cap", default_value_t = 1e12)]
    v_cap: f64,
    /// Relative tolerance of the integrator.
    #[arg(long = "rel-tol", default_value_t = 1e-10)]
    rel_tol: f64,
    /// Absolute tolerance of the integrator.
    #[arg(long = "abs-tol", default_value_t = 1e-12)]
    abs_tol: f64,
}

impl ControlFlags {
    fn controls(&self) -> IntegrationControls {
        IntegrationControls {
            r0: self.r0,
            r_max: self.r_max,
            v_cap: self.v_cap,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            ..Default::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form and numerical boundary classification.
    Classify {
        #[command(flatten)]
        params: ParamFlags,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Integrate the radial IVP; writes trajectory.csv.
    Integrate {
        #[command(flatten)]
        params: ParamFlags,
        #[command(flatten)]
        controls: ControlFlags,
        #[command(flatten)]
        output: OutputFlags,
        #[arg(long, default_value_t = 1.0)]
        u0: f64,
        #[arg(long, default_value_t = 1.0)]
        v0: f64,
    },
    /// Verify the growth rates and amplitudes at infinity against the
    /// closed-form profile; writes trajectory.csv and phase.csv.
    VerifyAsymptotics {
        #[command(flatten)]
        params: ParamFlags,
        #[command(flatten)]
        controls: ControlFlags,
        #[command(flatten)]
        output: OutputFlags,
        /// Initial data pairs "u0,v0", separated by ';' (repeatable).
        #[arg(long = "initial", value_delimiter = ';', default_value = "1,1")]
        initial: Vec<String>,
        /// Trailing fit window in decades.
        #[arg(long = "window-decades", default_value_t = 1.0)]
        window_decades: f64,
    },
    /// Keller-Osserman convergence verdicts for a power-law or tabulated f.
    KoTest {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        /// Power-law exponent for f(t) = t^s.
        #[arg(long, conflicts_with = "f_csv")]
        s: Option<f64>,
        /// Two-column CSV "t,f" of a tabulated nonlinearity.
        #[arg(long = "f-csv")]
        f_csv: Option<PathBuf>,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Integrate the reduced (Y, Z, W) flow; writes phase.csv.
    Phase {
        #[command(flatten)]
        params: ParamFlags,
        #[command(flatten)]
        output: OutputFlags,
        #[arg(long)]
        y0: f64,
        #[arg(long)]
        z0: f64,
        #[arg(long)]
        w0: f64,
        /// Flow time span.
        #[arg(long = "t-span", default_value_t = 50.0)]
        t_span: f64,
    },
    /// Cartesian (s, p, q) classification sweep; writes summary.csv.
    Sweep {
        /// Space dimension N >= 2.
        #[arg(long = "N")]
        n: u32,
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = 0.0)]
        b: f64,
        /// Grid of s values.
        #[arg(long = "s-grid", value_delimiter = ',', required = true)]
        s_grid: Vec<f64>,
        /// Grid of p values.
        #[arg(long = "p-grid", value_delimiter = ',', required = true)]
        p_grid: Vec<f64>,
        /// Grid of q values.
        #[arg(long = "q-grid", value_delimiter = ',', required = true)]
        q_grid: Vec<f64>,
        /// Also integrate each admissible cell and report growth-fit errors
        /// against the closed-form exponents.
        #[arg(long)]
        fit: bool,
        #[command(flatten)]
        output: OutputFlags,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match cli.command {
        Command::Classify { params, output } => cmd_classify(&params, &output, started),
        Command::Integrate {
            params,
            controls,
            output,
            u0,
            v0,
        } => cmd_integrate(&params, &controls, &output, u0, v0, started),
        Command::VerifyAsymptotics {
            params,
            controls,
            output,
            initial,
            window_decades,
        } => cmd_verify_asymptotics(&params, &controls, &output, &initial, window_decades, started),
        Command::KoTest {
            p,
            q,
            s,
            f_csv,
            output,
        } => cmd_ko_test(p, q, s, f_csv.as_deref(), &output, started),
        Command::Phase {
            params,
            output,
            y0,
            z0,
            w0,
            t_span,
        } => cmd_phase(&params, &output, [y0, z0, w0], t_span, started),
        Command::Sweep {
            n,
            a,
            b,
            s_grid,
            p_grid,
            q_grid,
            fit,
            output,
        } => cmd_sweep(n, a, b, &s_grid, &p_grid, &q_grid, fit, &output, started),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::HypothesisViolated { .. } => EXIT_HYPOTHESIS,
        Error::NonPositiveExponent { .. }
        | Error::NegativeWeight { .. }
        | Error::GradientExponentTooSmall { .. }
        | Error::DimensionTooSmall { .. }
        | Error::NonFiniteParameter { .. }
        | Error::GuardViolation { .. }
        | Error::NonPositiveInitialData { .. }
        | Error::NonMonotoneInput { .. }
        | Error::InvalidInput(_) => EXIT_VALIDATION,
        _ => 1,
    }
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<(), Error> {
    std::fs::create_dir_all(dir)
        .and_then(|_| std::fs::write(dir.join(name), content))
        .map_err(|e| Error::InvalidInput(format!("cannot write {name}: {e}")))
}

fn finish(
    mut env: ResultEnvelope,
    output: &OutputFlags,
    started: Instant,
    summary: &str,
    code: u8,
) -> Result<ExitCode, Error> {
    if output.timing {
        env.timing = Some(TimingSection {
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }
    env.seed = output.seed;
    write_out(&output.out, "results.json", &env.to_json())?;
    println!("{summary}");
    Ok(ExitCode::from(code))
}

fn cmd_classify(params: &ParamFlags, output: &OutputFlags, started: Instant) -> Result<ExitCode, Error> {
    let sp = params.validate()?;
    let closed = model::classify_ball(&sp);
    let f = Nonlinearity::power(sp.s)?;
    let numeric = ko::integral_classify(&f, sp.p, sp.q)?;
    let agr = agreement(closed, numeric);

    let mut env = ResultEnvelope::new("classify");
    env.params = Some(sp);
    env.classification = Some(ClassificationSection {
        closed_form: closed,
        ko_numeric: Some(numeric),
        empirical: None,
        global_existence: model::global_existence(&sp),
        agreement: agr,
    });
    if let Ok(profile) = model::asymptotic_profile(&sp) {
        env.profile = Some(profile.into());
    }

    let inconclusive = !closed.is_decisive() || !numeric.is_decisive();
    let code = if inconclusive { EXIT_INCONCLUSIVE } else { 0 };
    let summary = format!("classify: closed-form {closed:?}, ko {numeric:?}, agreement {agr:?}");
    finish(env, output, started, &summary, code)
}

fn cmd_integrate(
    params: &ParamFlags,
    controls: &ControlFlags,
    output: &OutputFlags,
    u0: f64,
    v0: f64,
    started: Instant,
) -> Result<ExitCode, Error> {
    let sp = params.validate()?;
    let traj = shooter::integrate(&sp, u0, v0, &controls.controls())?;
    write_out(&output.out, "trajectory.csv", &traj.to_csv())?;

    let empirical = shooter::empirical_classification(&traj);
    let mut env = ResultEnvelope::new("integrate");
    env.params = Some(sp);
    env.classification = Some(ClassificationSection {
        closed_form: model::classify_ball(&sp),
        ko_numeric: None,
        empirical: Some(empirical),
        global_existence: model::global_existence(&sp),
        agreement: agreement(model::classify_ball(&sp), empirical),
    });
    if let Outcome::BlowUp { radius, uncertainty } = traj.outcome {
        // Re-localize through a decade ladder up to the cap so the envelope
        // carries the per-threshold self-consistency data.
        let ctrl = controls.controls();
        let mut thresholds = Vec::new();
        let mut level = ctrl.v_cap / 1e8;
        while level <= ctrl.v_cap && thresholds.len() < 5 {
            if level > 10.0 * v0 {
                thresholds.push(level);
            }
            level *= 100.0;
        }
        let per_threshold = shooter::estimate_blowup_radius(&sp, u0, v0, &thresholds, &ctrl)
            .map(|est| est.per_threshold)
            .unwrap_or_default();
        env.blowup = Some(BlowupSection {
            radius,
            uncertainty,
            per_threshold,
        });
    }
    let summary = format!(
        "integrate: outcome {:?}, {} samples, empirical {empirical:?}",
        traj.outcome,
        traj.samples.len()
    );
    let code = if empirical.is_decisive() { 0 } else { EXIT_INCONCLUSIVE };
    finish(env, output, started, &summary, code)
}

fn parse_initial(pair: &str) -> Result<(f64, f64), Error> {
    let parts: Vec<&str> = pair.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "bad initial data '{pair}', expected 'u0,v0'"
        )));
    }
    match (parts[0].trim().parse::<f64>(), parts[1].trim().parse::<f64>()) {
        (Ok(u0), Ok(v0)) => Ok((u0, v0)),
        _ => Err(Error::InvalidInput(format!("bad initial data '{pair}'"))),
    }
}

fn cmd_verify_asymptotics(
    params: &ParamFlags,
    controls: &ControlFlags,
    output: &OutputFlags,
    initial: &[String],
    window_decades: f64,
    started: Instant,
) -> Result<ExitCode, Error> {
    let sp = params.validate()?;
    let profile = model::asymptotic_profile(&sp)?;
    let ctrl = controls.controls();

    let mut fits = Vec::new();
    let mut first_traj = None;
    for pair in initial {
        let (u0, v0) = parse_initial(pair)?;
        let traj = shooter::integrate(&sp, u0, v0, &ctrl)?;
        let fit = shooter::fit_growth(&traj, window_decades)?;
        fits.push(FitSection::new(u0, v0, traj.outcome.clone(), &fit, &profile));
        if first_traj.is_none() {
            first_traj = Some(traj);
        }
    }
    let traj = first_traj.expect("at least one initial datum");
    write_out(&output.out, "trajectory.csv", &traj.to_csv())?;

    let image = phase::image_trajectory(&sp, &traj)?;
    write_out(&output.out, "phase.csv", &phase::phase_csv(&image.samples))?;
    let violations = phase::box_check(&sp, &image.samples)?;
    let dbox = phase::divergence_box(&sp)?;
    let (xi1, xi2) = model::equilibria(&sp);
    let last = image.samples.last();

    let lead = &fits[0];
    let discrepancy = DiscrepancySection {
        rho_u_reported: profile.rho_u_reported,
        rho_u_derived: profile.rho_u_derived,
        fitted_slope_u: lead.slope_u,
        sigma_from_reported: (lead.slope_u - profile.rho_u_reported).abs() / lead.slope_stderr_u,
        sigma_from_derived: (lead.slope_u - profile.rho_u_derived).abs() / lead.slope_stderr_u,
        ln_c_u_reported: profile.ln_c_u_reported,
        ln_c_u_derived: profile.ln_c_u_derived,
        fitted_log_amp_u: lead.log_amp_u,
        amplitude_matches_derived: (lead.log_amp_u - profile.ln_c_u_derived).abs()
            < (lead.log_amp_u - profile.ln_c_u_reported).abs(),
    };

    let slope_v = lead.slope_v;
    let slope_u = lead.slope_u;
    let verdict = image.limit_verdict;

    let mut env = ResultEnvelope::new("verify-asymptotics");
    env.params = Some(sp);
    env.profile = Some(profile.into());
    env.fits = Some(fits);
    env.discrepancy = Some(discrepancy);
    env.phase = Some(PhaseSection {
        limit_verdict: verdict,
        terminal: last.map(|s| [s.y, s.z, s.w]),
        xi1: Some(xi1.as_array()),
        xi2: xi2.map(|e| e.as_array()),
        divergence_min: Some(dbox.min),
        divergence_max: Some(dbox.max),
        divergence_condition: Some(dbox.condition_holds),
        box_violations: Some(violations.len()),
        box_max_excess: violations
            .iter()
            .map(|v| v.excess)
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x)))),
    });

    let summary = format!(
        "verify-asymptotics: slope_v {slope_v:.4} (A = {}), slope_u {slope_u:.4} (D = {}), limit {verdict:?}",
        profile.a_lim, profile.d_lim,
    );
    finish(env, output, started, &summary, 0)
}

fn load_tabulated(path: &Path) -> Result<Nonlinearity, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let mut ts = Vec::new();
    let mut fs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 2 {
            return Err(Error::InvalidInput(format!("line {} is not 't,f'", i + 1)));
        }
        let t = cols[0].trim().parse::<f64>().map_err(|e| Error::InvalidInput(e.to_string()))?;
        let f = cols[1].trim().parse::<f64>().map_err(|e| Error::InvalidInput(e.to_string()))?;
        ts.push(t);
        fs.push(f);
    }
    Nonlinearity::tabulated(&ts, &fs)
}

fn cmd_ko_test(
    p: f64,
    q: f64,
    s: Option<f64>,
    f_csv: Option<&Path>,
    output: &OutputFlags,
    started: Instant,
) -> Result<ExitCode, Error> {
    let f = match (s, f_csv) {
        (Some(s), None) => Nonlinearity::power(s)?,
        (None, Some(path)) => load_tabulated(path)?,
        _ => {
            return Err(Error::InvalidInput(
                "exactly one of --s or --f-csv is required".into(),
            ))
        }
    };
    let verdicts = ko::ko_verdicts(&f, p, q)?;
    let classification = ko::classify_from_verdicts(&verdicts);
    let equivalence = ko::sqrtf_equivalence(&f, p, q)?;

    let mut env = ResultEnvelope::new("ko-test");
    env.ko = Some(KoSection {
        verdicts,
        classification,
        sqrtf_agrees: Some(equivalence.verdicts_agree),
    });
    let code = if classification.is_decisive() { 0 } else { EXIT_INCONCLUSIVE };
    let summary = format!(
        "ko-test: plain {:?} (slope {:.4}), weighted {:?} (slope {:.4}) -> {classification:?}",
        verdicts.plain.verdict,
        verdicts.plain.tail_exponent_estimate,
        verdicts.weighted.verdict,
        verdicts.weighted.tail_exponent_estimate,
    );
    finish(env, output, started, &summary, code)
}

fn cmd_phase(
    params: &ParamFlags,
    output: &OutputFlags,
    xi0: [f64; 3],
    t_span: f64,
    started: Instant,
) -> Result<ExitCode, Error> {
    let sp = params.validate()?;
    let traj = phase::integrate_phase(&sp, xi0, (0.0, t_span), &OdeOptions::default())?;
    write_out(&output.out, "phase.csv", &phase::phase_csv(&traj.samples))?;

    let (xi1, xi2) = model::equilibria(&sp);
    let dbox = phase::divergence_box(&sp).ok();
    let last = traj.samples.last();
    let terminal = last.map(|s| [s.y, s.z, s.w]);
    let mut env = ResultEnvelope::new("phase");
    env.params = Some(sp);
    env.phase = Some(PhaseSection {
        limit_verdict: traj.limit_verdict,
        terminal,
        xi1: Some(xi1.as_array()),
        xi2: xi2.map(|e| e.as_array()),
        divergence_min: dbox.as_ref().map(|d| d.min),
        divergence_max: dbox.as_ref().map(|d| d.max),
        divergence_condition: dbox.as_ref().map(|d| d.condition_holds),
        box_violations: None,
        box_max_excess: None,
    });
    let code = match traj.limit_verdict {
        phase::LimitVerdict::ConvergedTo(_) => 0,
        phase::LimitVerdict::Undecided => EXIT_INCONCLUSIVE,
    };
    let summary = format!("phase: {:?}, terminal {terminal:?}", traj.limit_verdict);
    finish(env, output, started, &summary, code)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    n: u32,
    a: f64,
    b: f64,
    s_grid: &[f64],
    p_grid: &[f64],
    q_grid: &[f64],
    fit: bool,
    output: &OutputFlags,
    started: Instant,
) -> Result<ExitCode, Error> {
    if s_grid.is_empty() || p_grid.is_empty() || q_grid.is_empty() {
        return Err(Error::InvalidInput("sweep grids must be nonempty".into()));
    }
    let mut cells = Vec::new();
    for &s in s_grid {
        for &p in p_grid {
            for &q in q_grid {
                cells.push((s, p, q));
            }
        }
    }

    struct Row {
        line: String,
        agreement: Option<Agreement>,
        failed: bool,
    }

    // Cells run in parallel; the indexed map keeps the output order
    // deterministic regardless of scheduling.
    let rows: Vec<Row> = cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(s, p, q))| {
            type CellData = (BallClassification, BallClassification, bool, f64, f64, String);
            let run = || -> Result<CellData, Error> {
                let sp = SystemParams::new(n, a, b, p, q, s)?;
                let closed = model::classify_ball(&sp);
                let f = Nonlinearity::power(s)?;
                let verdicts = ko::ko_verdicts(&f, p, q)?;
                let numeric = ko::classify_from_verdicts(&verdicts);
                // Optional growth-fit error columns for admissible cells.
                let fit_cols = match model::asymptotic_profile(&sp) {
                    Ok(profile) if fit => {
                        let controls = IntegrationControls {
                            r_max: 1e4,
                            ..Default::default()
                        };
                        let traj = shooter::integrate(&sp, 1.0, 1.0, &controls)?;
                        let gf = shooter::fit_growth(&traj, 1.0)?;
                        format!(
                            "{:.6e},{:.6e}",
                            (gf.slope_v - profile.a_lim).abs() / profile.a_lim,
                            (gf.slope_u - profile.d_lim).abs() / profile.d_lim,
                        )
                    }
                    _ => String::from(","),
                };
                Ok((
                    closed,
                    numeric,
                    model::global_existence(&sp),
                    verdicts.plain.tail_exponent_estimate,
                    verdicts.weighted.tail_exponent_estimate,
                    fit_cols,
                ))
            };
            match run() {
                Ok((closed, numeric, global, slope_p, slope_w, fit_cols)) => {
                    let agr = agreement(closed, numeric);
                    Row {
                        line: format!(
                            "{idx},{s},{p},{q},{closed:?},{numeric:?},{global},{agr:?},{slope_p:.6},{slope_w:.6},{fit_cols},",
                        ),
                        agreement: Some(agr),
                        failed: false,
                    }
                }
                Err(e) => Row {
                    line: format!("{idx},{s},{p},{q},,,,,,,,,\"{e}\""),
                    agreement: None,
                    failed: true,
                },
            }
        })
        .collect();

    let mut csv = String::from(
        "idx,s,p,q,closed_form,ko_numeric,global_existence,agreement,plain_slope,weighted_slope,slope_v_rel_err,slope_u_rel_err,error\n",
    );
    for row in &rows {
        csv.push_str(&row.line);
        csv.push('\n');
    }
    write_out(&output.out, "summary.csv", &csv)?;

    let succeeded = rows.iter().filter(|r| !r.failed).count();
    let identical = rows.iter().filter(|r| r.agreement == Some(Agreement::Identical)).count();
    let compatible = rows
        .iter()
        .filter(|r| r.agreement == Some(Agreement::CompatibleInconclusive))
        .count();
    let opposite = rows.iter().filter(|r| r.agreement == Some(Agreement::Opposite)).count();
    let mut env = ResultEnvelope::new("sweep");
    env.sweep = Some(SweepSection {
        cells: rows.len(),
        succeeded,
        identical,
        compatible_inconclusive: compatible,
        opposite,
        agreement_rate: (identical + compatible) as f64 / rows.len() as f64,
        summary_csv: "summary.csv".into(),
    });

    // A sweep with zero usable cells is an error; partial failure is data.
    if succeeded == 0 {
        return Err(Error::InvalidInput("all sweep cells failed".into()));
    }
    let summary = format!(
        "sweep: {} cells, {} ok, {} identical + {} inconclusive, {} opposite",
        rows.len(),
        succeeded,
        identical,
        compatible,
        opposite
    );
    finish(env, output, started, &summary, 0)
}
