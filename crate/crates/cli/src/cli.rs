use std::path::PathBuf;

use clap::{ArgAction, ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "tomocheck", version, about = "Uncertainty-relation checks on optical homodyne tomograms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Log more (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write the exact tomogram of a state on a θ/X grid.
    Generate(GenerateArgs),
    /// Simulate homodyne acquisition of a state.
    Sample(SampleArgs),
    /// Run the Heisenberg, Schrödinger-Robertson and F(θ) checks.
    Check(CheckArgs),
    /// Reconstruct the Wigner function by filtered back-projection.
    Wigner(WignerArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Vacuum,
    Coherent,
    Squeezed,
    Thermal,
    Fock,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    Auto,
    Grid,
    Samples,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    None,
    Cosine,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("state").required(true).args(["preset", "spec"])))]
pub struct StateArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,

    /// JSON state file, e.g. {"kind":"gaussian","sigma_qq":0.5,"sigma_pp":0.5,"sigma_qp":0} or {"kind":"fock","n":2}.
    #[arg(long)]
    pub spec: Option<PathBuf>,

    #[arg(long, allow_hyphen_values = true)]
    pub alpha_re: Option<f64>,

    #[arg(long, allow_hyphen_values = true)]
    pub alpha_im: Option<f64>,

    /// Squeezing parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<f64>,

    /// Squeezing angle.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,

    /// Mean thermal photon number.
    #[arg(long, allow_hyphen_values = true)]
    pub nbar: Option<f64>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub state: StateArgs,

    /// Photon number for --preset fock.
    #[arg(long)]
    pub n: Option<u32>,

    /// Number of equispaced phases over [0, π).
    #[arg(long, default_value_t = 48)]
    pub thetas: usize,

    /// Quadrature axis as start:end:points.
    #[arg(long, default_value = "-7:7:281", allow_hyphen_values = true, value_parser = parse_range)]
    pub x_range: Range,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("phase_set").required(true).args(["phases", "thetas"])))]
pub struct SampleArgs {
    #[command(flatten)]
    pub state: StateArgs,

    /// Photon number for --preset fock.
    #[arg(long)]
    pub fock_n: Option<u32>,

    /// Comma-separated phases in radians.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub phases: Option<Vec<f64>>,

    /// Number of equispaced phases over [0, π).
    #[arg(long)]
    pub thetas: Option<usize>,

    /// Samples per phase.
    #[arg(long)]
    pub n: usize,

    /// Standard deviation of additive detector noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Tomogram grid JSON or sample CSV.
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long, value_enum, default_value_t = InputKind::Auto)]
    pub input_kind: InputKind,

    /// Number of equispaced scan angles over [0, π).
    #[arg(long, conflicts_with = "scan_thetas")]
    pub scan: Option<usize>,

    /// Comma-separated scan angles in radians.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub scan_thetas: Option<Vec<f64>>,

    #[arg(long, default_value_t = 200)]
    pub replicates: usize,

    /// Pass slack for sample data, in bootstrap standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub slack_se: f64,

    /// Absolute pass slack for grid data.
    #[arg(long, default_value_t = 1e-9)]
    pub grid_slack: f64,

    /// Phase-matching tolerance for sample records.
    #[arg(long, default_value_t = tomocheck::tomogram::DEFAULT_THETA_TOL)]
    pub theta_tol: f64,

    /// Largest θ distance to a grid row usable for interpolation.
    #[arg(long, default_value_t = tomocheck::tomogram::DEFAULT_MAX_NEIGHBOR_DISTANCE)]
    pub max_neighbor_distance: f64,

    /// Use Simpson's rule instead of the trapezoid rule on grids.
    #[arg(long)]
    pub simpson: bool,

    /// Fewest records a phase needs to be used.
    #[arg(long, default_value_t = tomocheck::tomogram::DEFAULT_MIN_SAMPLES_PER_PHASE)]
    pub min_samples: usize,

    /// Bin samples into this many θ-bins and check the histogram tomogram instead.
    #[arg(long)]
    pub histogram: Option<usize>,

    /// X binning for --histogram as start:end:bins.
    #[arg(long, default_value = "-7:7:141", allow_hyphen_values = true, value_parser = parse_range)]
    pub hist_x_range: Range,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct WignerArgs {
    /// Tomogram grid JSON.
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long, default_value = "-6:6:241", allow_hyphen_values = true, value_parser = parse_range)]
    pub q_range: Range,

    #[arg(long, default_value = "-6:6:241", allow_hyphen_values = true, value_parser = parse_range)]
    pub p_range: Range,

    /// Ramp cutoff as a fraction of the X-grid Nyquist frequency.
    #[arg(long, default_value_t = 0.9)]
    pub cutoff: f64,

    #[arg(long, value_enum, default_value_t = Window::None)]
    pub apodize: Window,

    /// Also write the cut W(q, p0) as CSV here.
    #[arg(long)]
    pub slice: Option<PathBuf>,

    /// p0 for --slice (nearest grid value).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub slice_p: f64,

    #[command(flatten)]
    pub common: Common,
}

/// `start:end:points`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        tomocheck::quadrature::linspace(self.start, self.end, self.points)
    }

    pub fn to_json(self) -> serde_json::Value {
        serde_json::json!({"start": self.start, "end": self.end, "points": self.points})
    }
}

pub fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:end:points, got {s:?}"));
    }
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?} in {s:?}"));
    let start = num(parts[0])?;
    let end = num(parts[1])?;
    let points: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("bad point count {:?} in {s:?}", parts[2]))?;
    if !(start.is_finite() && end.is_finite() && start < end) {
        return Err(format!("range needs finite start < end, got {s:?}"));
    }
    if points < 2 {
        return Err(format!("range needs at least two points, got {s:?}"));
    }
    Ok(Range { start, end, points })
}
