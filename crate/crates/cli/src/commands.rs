use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use tomocheck::io::{grid_to_json, read_grid_json, read_samples_csv, wigner_to_json, write_samples_csv};
use tomocheck::radon::Apodization;
use tomocheck::tomogram::{equispaced_thetas, EPS_NORM_ANALYTIC, EPS_NORM_MEASURED};
use tomocheck::uncertainty::{default_theta_scan, f_scan};
use tomocheck::{
    acquire, histogram_tomogram, inverse_radon, AcquisitionPlan, CheckConfig, FockState, GaussianState,
    OpticalTomogramGrid, Quadrature, QuadratureSampleSet, ReconstructionOptions, StateModel, TomoError,
    TomographicData,
};

use crate::cli::{CheckArgs, Format, GenerateArgs, InputKind, Preset, SampleArgs, StateArgs, Window, WignerArgs};

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    CheckFailed,
}

/// Input, usage or data problem; always exit status 2.
#[derive(Debug)]
pub struct CliError(pub String);

impl From<TomoError> for CliError {
    fn from(e: TomoError) -> Self {
        CliError(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError(format!("I/O error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError(format!("JSON error: {e}"))
    }
}

type CliResult<T> = Result<T, CliError>;

fn provenance(command: &str, config: Value) -> Value {
    json!({
        "tool": "tomocheck",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
    })
}

fn path_json(p: &Option<PathBuf>) -> Value {
    p.as_ref().map_or(Value::Null, |p| json!(p.display().to_string()))
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut f = File::create(p).map_err(|e| CliError(format!("cannot create {}: {e}", p.display())))?;
            f.write_all(bytes)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(bytes)?;
            lock.flush()?;
        }
    }
    Ok(())
}

/// CSV outputs carry their provenance in `<file>.provenance.json`.
fn write_sidecar(path: Option<&Path>, provenance: &Value) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut name = p.as_os_str().to_owned();
            name.push(".provenance.json");
            let text = serde_json::to_string_pretty(&json!({ "provenance": provenance }))?;
            std::fs::write(PathBuf::from(name), text + "\n")?;
        }
        None => log::warn!("CSV written to standard output; provenance not recorded"),
    }
    Ok(())
}

fn resolve_state(args: &StateArgs, fock_n: Option<u32>, fock_flag: &str) -> CliResult<StateModel> {
    let flags = [
        ("--alpha-re", args.alpha_re.is_some()),
        ("--alpha-im", args.alpha_im.is_some()),
        ("--r", args.r.is_some()),
        ("--phi", args.phi.is_some()),
        ("--nbar", args.nbar.is_some()),
        (fock_flag, fock_n.is_some()),
    ];
    let allowed: &[&str] = match args.preset {
        Some(Preset::Coherent) => &["--alpha-re", "--alpha-im"],
        Some(Preset::Squeezed) => &["--r", "--phi"],
        Some(Preset::Thermal) => &["--nbar"],
        Some(Preset::Fock) => &[fock_flag],
        _ => &[],
    };
    let target = match args.preset {
        Some(p) => format!("--preset {}", preset_name(p)),
        None => "--spec".to_string(),
    };
    for (flag, present) in flags {
        if present && !allowed.contains(&flag) {
            return Err(CliError(format!("{flag} cannot be combined with {target}")));
        }
    }
    let state = match (args.preset, &args.spec) {
        (Some(Preset::Vacuum), _) => GaussianState::vacuum().into(),
        (Some(Preset::Coherent), _) => {
            GaussianState::coherent(args.alpha_re.unwrap_or(0.0), args.alpha_im.unwrap_or(0.0))?.into()
        }
        (Some(Preset::Squeezed), _) => {
            GaussianState::squeezed_vacuum(args.r.unwrap_or(0.0), args.phi.unwrap_or(0.0))?.into()
        }
        (Some(Preset::Thermal), _) => GaussianState::thermal(args.nbar.unwrap_or(0.0))?.into(),
        (Some(Preset::Fock), _) => match fock_n {
            Some(n) => StateModel::Fock(FockState::new(n)),
            None => return Err(CliError(format!("--preset fock needs {fock_flag}"))),
        },
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))?;
            StateModel::from_json(&text).map_err(|e| CliError(format!("invalid state spec {}: {e}", path.display())))?
        }
        (None, None) => return Err(CliError("a state is required: --preset or --spec".into())),
    };
    Ok(state)
}

fn preset_name(p: Preset) -> &'static str {
    match p {
        Preset::Vacuum => "vacuum",
        Preset::Coherent => "coherent",
        Preset::Squeezed => "squeezed",
        Preset::Thermal => "thermal",
        Preset::Fock => "fock",
    }
}

fn grid_csv(grid: &OpticalTomogramGrid) -> String {
    let mut out = String::from("theta,x,w\n");
    for (theta, row) in grid.thetas().iter().zip(grid.rows()) {
        for (x, w) in grid.xs().iter().zip(row) {
            writeln!(out, "{theta:?},{x:?},{w:?}").expect("write to string");
        }
    }
    out
}

pub fn generate(args: &GenerateArgs) -> CliResult<Outcome> {
    let state = resolve_state(&args.state, args.n, "--n")?;
    if args.thetas == 0 {
        return Err(CliError("--thetas must be at least 1".into()));
    }
    let grid = OpticalTomogramGrid::from_state(&state, equispaced_thetas(args.thetas), args.x_range.values())?;
    grid.validate(EPS_NORM_ANALYTIC)
        .into_result()
        .map_err(|e| CliError(format!("generated grid fails validation ({e}); widen --x-range")))?;
    let format = args.common.format.unwrap_or(Format::Json);
    let prov = provenance(
        "generate",
        json!({
            "state": state,
            "thetas": args.thetas,
            "x_range": args.x_range.to_json(),
            "seed": args.common.seed,
            "format": format.name(),
            "out": path_json(&args.common.out),
        }),
    );
    let out = args.common.out.as_deref();
    match format {
        Format::Json => write_output(out, (grid_to_json(&grid, Some(&prov))? + "\n").as_bytes())?,
        Format::Csv => {
            write_output(out, grid_csv(&grid).as_bytes())?;
            write_sidecar(out, &prov)?;
        }
    }
    Ok(Outcome::Pass)
}

pub fn sample(args: &SampleArgs) -> CliResult<Outcome> {
    let state = resolve_state(&args.state, args.fock_n, "--fock-n")?;
    let phases = match (&args.phases, args.thetas) {
        (Some(p), _) => p.clone(),
        (None, Some(n)) => equispaced_thetas(n),
        (None, None) => return Err(CliError("give --phases or --thetas".into())),
    };
    let plan = AcquisitionPlan::new(phases, args.n, args.common.seed, args.noise_sigma)?;
    let samples = acquire(&state, &plan);
    let format = args.common.format.unwrap_or(Format::Csv);
    let prov = provenance(
        "sample",
        json!({
            "state": state,
            "plan": plan,
            "rng": tomocheck::sampler::RNG_NAME,
            "format": format.name(),
            "out": path_json(&args.common.out),
        }),
    );
    let out = args.common.out.as_deref();
    match format {
        Format::Csv => {
            let mut buf = Vec::with_capacity(samples.len() * 40);
            write_samples_csv(&samples, &mut buf)?;
            write_output(out, &buf)?;
            write_sidecar(out, &prov)?;
        }
        Format::Json => {
            let doc = json!({
                "records": samples.records(),
                "metadata": samples.metadata(),
                "provenance": prov,
            });
            write_output(out, (serde_json::to_string(&doc)? + "\n").as_bytes())?;
        }
    }
    Ok(Outcome::Pass)
}

enum Loaded {
    Grid(OpticalTomogramGrid),
    Samples(QuadratureSampleSet),
}

fn load(path: &Path, kind: InputKind, min_samples: usize) -> CliResult<Loaded> {
    let kind = match kind {
        InputKind::Auto => {
            let csv = path
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
            if csv {
                InputKind::Samples
            } else {
                InputKind::Grid
            }
        }
        k => k,
    };
    let file = File::open(path).map_err(|e| CliError(format!("cannot open {}: {e}", path.display())))?;
    let what = path.display().to_string();
    Ok(match kind {
        InputKind::Samples => {
            Loaded::Samples(read_samples_csv(file, &what)?.with_min_samples_per_phase(min_samples))
        }
        _ => Loaded::Grid(read_grid_json(file).map_err(|e| CliError(format!("{what}: {e}")))?),
    })
}

fn contains_phase(phases: &[f64], theta: f64, tol: f64) -> bool {
    phases.iter().any(|&p| {
        let d = (p - theta).rem_euclid(PI);
        d.min(PI - d) <= tol
    })
}

/// Sample phases θ for which θ + π/4 and θ + π/2 were measured too.
fn sample_scan(samples: &QuadratureSampleSet, tol: f64) -> Vec<f64> {
    let phases = samples.distinct_phases(tol);
    phases
        .iter()
        .copied()
        .filter(|&t| contains_phase(&phases, t + FRAC_PI_4, tol) && contains_phase(&phases, t + FRAC_PI_2, tol))
        .collect()
}

fn check_csv(report: &tomocheck::UncertaintyReport) -> String {
    let mut out = String::from("theta,f,se,pass\n");
    for p in &report.f_curve {
        match (p.f, p.se, p.pass) {
            (Some(f), Some(se), Some(pass)) => writeln!(out, "{:?},{f:?},{se:?},{pass}", p.theta),
            _ => writeln!(out, "{:?},,,", p.theta),
        }
        .expect("write to string");
    }
    out
}

pub fn check(args: &CheckArgs) -> CliResult<Outcome> {
    let loaded = load(&args.input, args.input_kind, args.min_samples)?;
    let (loaded, histogram) = match (loaded, args.histogram) {
        (Loaded::Samples(s), Some(bins)) => {
            let r = args.hist_x_range;
            let grid = histogram_tomogram(&s, bins, r.points, (r.start, r.end))?;
            (Loaded::Grid(grid), json!({"theta_bins": bins, "x_range": r.to_json()}))
        }
        (Loaded::Grid(_), Some(_)) => return Err(CliError("--histogram needs sample input".into())),
        (l, None) => (l, Value::Null),
    };
    if let Loaded::Grid(g) = &loaded {
        g.validate(EPS_NORM_MEASURED).into_result()?;
    }
    let data: TomographicData<'_> = match &loaded {
        Loaded::Grid(g) => g.into(),
        Loaded::Samples(s) => s.into(),
    };
    let thetas = match (&args.scan_thetas, args.scan, &loaded) {
        (Some(t), _, _) => t.clone(),
        (None, Some(n), _) => equispaced_thetas(n),
        (None, None, Loaded::Grid(_)) => default_theta_scan(),
        (None, None, Loaded::Samples(s)) => sample_scan(s, args.theta_tol),
    };
    if thetas.is_empty() {
        return Err(CliError("the F scan has no angles".into()));
    }
    let config = CheckConfig {
        bootstrap_replicates: args.replicates,
        sample_slack_se: args.slack_se,
        grid_slack: args.grid_slack,
        theta_scan: thetas.clone(),
        theta_tol: args.theta_tol,
        max_neighbor_distance: args.max_neighbor_distance,
        quadrature: if args.simpson { Quadrature::Simpson } else { Quadrature::Trapezoid },
        seed: args.common.seed,
    };
    let mut report = f_scan(data, &thetas, &config)?;
    let format = args.common.format.unwrap_or(Format::Json);
    let prov = provenance(
        "check",
        json!({
            "input": args.input.display().to_string(),
            "input_kind": match &loaded { Loaded::Grid(_) => "grid", Loaded::Samples(_) => "samples" },
            "histogram": histogram,
            "min_samples": args.min_samples,
            "check": config,
            "format": format.name(),
            "out": path_json(&args.common.out),
        }),
    );
    if let Value::Object(map) = &prov {
        for (k, v) in map {
            report.provenance.insert(k.clone(), v.clone());
        }
    }
    let out = args.common.out.as_deref();
    match format {
        Format::Json => write_output(out, (serde_json::to_string_pretty(&report)? + "\n").as_bytes())?,
        Format::Csv => {
            write_output(out, check_csv(&report).as_bytes())?;
            write_sidecar(out, &Value::Object(report.provenance.clone()))?;
        }
    }

    let evaluated = report.f_values();
    let min_f = evaluated.iter().map(|&(_, f)| f).fold(f64::INFINITY, f64::min);
    eprintln!(
        "heisenberg {:.6} ({}), sr {:.6} ({}), min F {:.6} over {}/{} angles ({})",
        report.heisenberg.product,
        verdict(report.heisenberg.pass),
        report.sr.determinant,
        verdict(report.sr.pass),
        min_f,
        evaluated.len(),
        report.f_curve.len(),
        verdict(report.f_pass),
    );
    for w in &report.warnings {
        log::warn!("{w}");
    }
    if evaluated.is_empty() {
        return Err(CliError("no scan angle could be evaluated".into()));
    }
    Ok(if report.all_pass() {
        Outcome::Pass
    } else {
        Outcome::CheckFailed
    })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

pub fn wigner(args: &WignerArgs) -> CliResult<Outcome> {
    let grid = match load(&args.input, InputKind::Grid, 0)? {
        Loaded::Grid(g) => g,
        Loaded::Samples(_) => unreachable!("grid input requested"),
    };
    grid.validate(EPS_NORM_MEASURED).into_result()?;
    let options = ReconstructionOptions {
        cutoff_fraction: args.cutoff,
        apodization: match args.apodize {
            Window::None => Apodization::None,
            Window::Cosine => Apodization::Cosine,
        },
    };
    let w = inverse_radon(&grid, &args.q_range.values(), &args.p_range.values(), options)?;
    let format = args.common.format.unwrap_or(Format::Json);
    let prov = provenance(
        "wigner",
        json!({
            "input": args.input.display().to_string(),
            "q_range": args.q_range.to_json(),
            "p_range": args.p_range.to_json(),
            "reconstruction": options,
            "slice": path_json(&args.slice),
            "slice_p": args.slice_p,
            "seed": args.common.seed,
            "format": format.name(),
            "out": path_json(&args.common.out),
        }),
    );
    let out = args.common.out.as_deref();
    match format {
        Format::Json => write_output(out, (wigner_to_json(&w, Some(&prov))? + "\n").as_bytes())?,
        Format::Csv => {
            let mut text = String::from("q,p,w\n");
            for (q, row) in w.qs().iter().zip(w.values()) {
                for (p, v) in w.ps().iter().zip(row) {
                    writeln!(text, "{q:?},{p:?},{v:?}").expect("write to string");
                }
            }
            write_output(out, text.as_bytes())?;
            write_sidecar(out, &prov)?;
        }
    }
    if let Some(path) = &args.slice {
        let (j, p0) = w
            .ps()
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| (a.1 - args.slice_p).abs().total_cmp(&(b.1 - args.slice_p).abs()))
            .expect("non-empty axis");
        let mut text = String::from("q,w\n");
        for (q, row) in w.qs().iter().zip(w.values()) {
            writeln!(text, "{q:?},{:?}", row[j]).expect("write to string");
        }
        write_output(Some(path), text.as_bytes())?;
        let mut slice_prov = prov.clone();
        slice_prov["slice_p_used"] = json!(p0);
        write_sidecar(Some(path), &slice_prov)?;
    }
    let (q, p, peak) = w.peak();
    eprintln!(
        "W range [{:.4}, {:.4}], peak at ({q:.3}, {p:.3}), integral {:.6}",
        w.min_value(),
        peak,
        w.integral()
    );
    Ok(Outcome::Pass)
}
