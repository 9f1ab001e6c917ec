//! Command-line runner. Every subcommand delegates to a library operation,
//! prints a one-line JSON summary and optionally writes an artifact.

use std::f64::consts::FRAC_PI_2;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::epr;
use crate::error::Error;
use crate::instrument::{apply, choi_cp_check, simple_instrument, KrausInstrument};
use crate::io::{self, EstimateJson, InstrumentJson, MatrixJson, ModelSpecJson, PovmJson};
use crate::measure::{from_observable, Povm};
use crate::qcore::{identity, C64, DensityMatrix, Hermitian, StateVector};
use crate::qinfo::{self, ParametricModel};
use crate::qmodels::{self, ExpModelSpec};
use crate::random;
use crate::tomo::{self, QuadratureSamples};
use crate::trajectory::{self, LindbladGenerator, TimeGrid, Unraveling};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical { module: &'static str, source: Error },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config: {msg}"),
            CliError::Numerical { module, source } => write!(f, "{module}: {source}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical { .. } => EXIT_NUMERIC,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn num(module: &'static str) -> impl Fn(Error) -> CliError {
    move |source| CliError::Numerical { module, source }
}

fn cfg(e: impl fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "qinfer", version, about = "Quantum statistical inference experiments", args_override_self = true)]
pub struct Cli {
    /// Master seed; required by stochastic commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Artifact path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON object whose keys mirror the long flags; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quantum and classical Fisher information with the attainment check.
    Fisher(FisherArgs),
    /// Helstrom, Braunstein-Caves and Gill-Massar bounds over random POVMs.
    Bounds(BoundsArgs),
    /// Monte Carlo of the adaptive two-stage spin-half estimator.
    Adaptive(AdaptiveArgs),
    /// Evaluate an exponential model.
    Model(ModelArgs),
    /// Apply an instrument to a state.
    Instrument(InstrumentArgs),
    /// Quantum trajectories of a Lindblad generator.
    Traj(TrajArgs),
    /// Homodyne tomography.
    Tomo {
        #[command(subcommand)]
        action: TomoCommand,
    },
    /// Singlet table against local hidden variables.
    Bell,
    /// Teleport a qubit through a singlet.
    Teleport(TeleportArgs),
    /// Phase-averaged detector decoherence.
    Decohere(DecohereArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    GreatCircle,
    Latitude,
    Bloch,
    Spec,
}

#[derive(Debug, Args)]
pub struct ModelSel {
    #[arg(long, value_enum, default_value = "great-circle")]
    pub model: ModelName,
    /// Colatitude of the latitude model.
    #[arg(long, default_value_t = FRAC_PI_2)]
    pub eta: f64,
    /// Model spec JSON, used with `--model spec`.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Parameter vector, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct FisherArgs {
    #[command(flatten)]
    pub sel: ModelSel,
    /// In-plane simple measurement `cosφ σ_x + sinφ σ_y` instead of the optimal one.
    #[arg(long, allow_hyphen_values = true)]
    pub angle: Option<f64>,
    /// POVM JSON.
    #[arg(long)]
    pub povm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub sel: ModelSel,
    #[arg(long, default_value_t = 200)]
    pub povms: usize,
}

#[derive(Debug, Args)]
pub struct AdaptiveArgs {
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, default_value_t = FRAC_PI_2)]
    pub eta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model spec JSON; defaults to the great circle as a unitary model.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct InstrumentArgs {
    /// Instrument JSON; defaults to the simple σ_x instrument.
    #[arg(long)]
    pub instrument: Option<PathBuf>,
    /// Density matrix JSON; defaults to |0⟩⟨0|.
    #[arg(long)]
    pub state: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorName {
    Decay,
    Driven,
    Cascade,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnravelingName {
    Jump,
    Diffusion,
}

#[derive(Debug, Args)]
pub struct TrajArgs {
    #[arg(long, value_enum, default_value = "decay")]
    pub generator: GeneratorName,
    #[arg(long, value_enum, default_value = "jump")]
    pub unraveling: UnravelingName,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 3.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 10)]
    pub record_every: usize,
    #[arg(long, default_value_t = 1)]
    pub n_traj: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateName {
    Vacuum,
    Superposition,
}

impl StateName {
    fn vector(self, n_max: usize) -> StateVector {
        let mut v = vec![C64::new(0.0, 0.0); n_max + 1];
        match self {
            StateName::Vacuum => v[0] = C64::new(1.0, 0.0),
            StateName::Superposition => {
                v[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                v[1] = v[0];
            }
        }
        StateVector::from_slice(&v).expect("unit vector")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TomoMethod {
    Mle,
    Kernel,
}

#[derive(Debug, Subcommand)]
pub enum TomoCommand {
    /// Draw homodyne samples and write them as CSV.
    Simulate {
        #[arg(long, value_enum, default_value = "vacuum")]
        state: StateName,
        #[arg(long, default_value_t = 20_000)]
        n: usize,
        /// Gaussian detector noise standard deviation.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Reconstruct a density matrix from a samples CSV.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "mle")]
        method: TomoMethod,
        #[arg(long = "nmax", alias = "n-max", default_value_t = 4)]
        nmax: usize,
        /// Reference state for the reported fidelity.
        #[arg(long, value_enum)]
        state: Option<StateName>,
    },
}

#[derive(Debug, Args)]
pub struct TeleportArgs {
    /// Complex amplitude, e.g. `0.6` or `0.3+0.1i`.
    #[arg(long, default_value = "0.6", allow_hyphen_values = true)]
    pub alpha: C64,
    #[arg(long, default_value = "0+0.8i", allow_hyphen_values = true)]
    pub beta: C64,
}

#[derive(Debug, Args)]
pub struct DecohereArgs {
    #[arg(long, default_value = "0.7071067811865476", allow_hyphen_values = true)]
    pub alpha: C64,
    #[arg(long, default_value = "0.7071067811865476", allow_hyphen_values = true)]
    pub beta: C64,
    /// Detector dimension.
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 360)]
    pub n_phase: usize,
}

/// Appends `--key value` for each config entry whose flag is absent from `args`.
pub fn merge_config(mut args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let pos = args.iter().position(|a| a == "--config" || a.to_string_lossy().starts_with("--config="));
    let Some(pos) = pos else { return Ok(args) };
    let path = match args[pos].to_string_lossy().strip_prefix("--config=") {
        Some(p) => PathBuf::from(p),
        None => args.get(pos + 1).map(PathBuf::from).ok_or_else(|| cfg("--config needs a path"))?,
    };
    let text = std::fs::read_to_string(&path).map_err(|e| cfg(format!("{}: {e}", path.display())))?;
    let obj: serde_json::Map<String, Value> = serde_json::from_str(&text).map_err(|e| cfg(format!("{}: {e}", path.display())))?;
    let present: Vec<String> = args
        .iter()
        .filter_map(|a| a.to_str())
        .filter(|a| a.starts_with("--"))
        .map(|a| a.split('=').next().unwrap().to_string())
        .collect();
    for (key, value) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        if flag == "--config" || present.contains(&flag) {
            continue;
        }
        let value = match value {
            Value::String(s) => s,
            Value::Number(n) => n.to_string(),
            Value::Bool(true) => {
                args.push(flag.into());
                continue;
            }
            Value::Bool(false) | Value::Null => continue,
            Value::Array(items) => items.iter().map(|v| v.to_string().trim_matches('"').to_string()).collect::<Vec<_>>().join(","),
            Value::Object(_) => return Err(cfg(format!("config key {key} must be a scalar or list"))),
        };
        args.push(flag.into());
        args.push(value.into());
    }
    Ok(args)
}

fn require_seed(seed: Option<u64>) -> CliResult<u64> {
    seed.ok_or_else(|| cfg("this command is stochastic and needs --seed"))
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| cfg(format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> CliResult<T> {
    io::from_json(&read(path)?).map_err(|e| cfg(format!("{}: {e}", path.display())))
}

fn write(out: &Option<PathBuf>, contents: &str) -> CliResult<()> {
    if let Some(path) = out {
        std::fs::write(path, contents).map_err(|e| cfg(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn json_only(format: Option<Format>, command: &str) -> CliResult<()> {
    match format {
        Some(Format::Csv) => Err(cfg(format!("{command} has no CSV artifact"))),
        _ => Ok(()),
    }
}

fn ser<T: serde::Serialize>(v: &T) -> CliResult<String> {
    io::to_json(v).map_err(num("io"))
}

fn load_model(sel: &ModelSel) -> CliResult<(ParametricModel, Vec<f64>)> {
    let model = match sel.model {
        ModelName::GreatCircle => qmodels::great_circle_model(identity(2)),
        ModelName::Latitude => qmodels::latitude_model(sel.eta),
        ModelName::Bloch => qmodels::bloch_pure_model(),
        ModelName::Spec => {
            let path = sel.spec.as_ref().ok_or_else(|| cfg("--model spec needs --spec <path>"))?;
            let spec: ModelSpecJson = read_json(path)?;
            spec.to_spec().map_err(cfg)?.model()
        }
    };
    let theta = if sel.theta.is_empty() {
        match model.dim_param() {
            1 => vec![0.3],
            _ => vec![1.0; model.dim_param()],
        }
    } else {
        sel.theta.clone()
    };
    if theta.len() != model.dim_param() {
        return Err(cfg(format!("model has {} parameters, --theta gives {}", model.dim_param(), theta.len())));
    }
    Ok((model, theta))
}

fn scalar_or_matrix(rows: &[Vec<f64>]) -> Value {
    if rows.len() == 1 {
        json!(rows[0][0])
    } else {
        json!(rows)
    }
}

fn fisher(a: &FisherArgs, out: &Option<PathBuf>, format: Option<Format>) -> CliResult<Value> {
    json_only(format, "fisher")?;
    let (model, theta) = load_model(&a.sel)?;
    let povm: Povm = if let Some(path) = &a.povm {
        read_json::<PovmJson>(path)?.to_povm().map_err(cfg)?
    } else if let Some(phi) = a.angle {
        if model.dim() != 2 {
            return Err(cfg("--angle needs a qubit model"));
        }
        from_observable(&Hermitian::pauli_dot([phi.cos(), phi.sin(), 0.0])).0.into_povm()
    } else if model.dim_param() == 1 {
        qinfo::optimal_measurement(&model, theta[0]).map_err(num("qinfo"))?.into_povm()
    } else {
        let k = model.dim_param();
        qinfo::gill_massar_constructor(&model, &theta, &vec![1.0 / k as f64; k]).map_err(num("qinfo"))?
    };
    if povm.dim() != model.dim() {
        return Err(cfg("POVM and model dimensions differ"));
    }
    let report = qinfo::bc_audit(&model, &theta, &povm).map_err(num("qinfo"))?;
    write(out, &ser(&report)?)?;
    Ok(json!({
        "I": scalar_or_matrix(&report.quantum),
        "i": scalar_or_matrix(&report.classical),
        "attained": report.attained,
    }))
}

fn bounds(a: &BoundsArgs, seed: u64, out: &Option<PathBuf>, format: Option<Format>) -> CliResult<Value> {
    json_only(format, "bounds")?;
    let (model, theta) = load_model(&a.sel)?;
    let helstrom = qinfo::helstrom_bound(&model, &theta).map_err(num("qinfo"))?;
    let d = model.dim();
    let mut min_gap = f64::INFINITY;
    let mut gm_max = f64::NEG_INFINITY;
    for k in 0..a.povms {
        let mut rng = random::stream(seed, k as u64);
        let m = random::povm(d, 2 * d, 1, &mut rng);
        let rep = qinfo::bc_audit(&model, &theta, &m).map_err(num("qinfo"))?;
        min_gap = min_gap.min(rep.gap_min_eig);
        gm_max = gm_max.max(qinfo::gill_massar_check(&model, &theta, &m, 1).map_err(num("qinfo"))?);
    }
    let rows: Vec<Vec<f64>> = (0..helstrom.nrows()).map(|i| helstrom.row(i).iter().copied().collect()).collect();
    let summary = json!({
        "helstrom": scalar_or_matrix(&rows),
        "min_gap_eig": min_gap,
        "gill_massar_max": gm_max,
        "gill_massar_bound": (d - 1) as f64,
        "povms": a.povms,
    });
    write(out, &ser(&summary)?)?;
    Ok(summary)
}

fn adaptive(a: &AdaptiveArgs, seed: u64, out: &Option<PathBuf>, format: Option<Format>) -> CliResult<Value> {
    json_only(format, "adaptive")?;
    if a.n < 100 {
        return Err(cfg("--n must be at least 100"));
    }
    let s = qinfo::adaptive_monte_carlo(a.theta, a.eta, a.n, a.reps, seed).map_err(num("qinfo"))?;
    write(out, &ser(&s)?)?;
    serde_json::to_value(s).map_err(cfg)
}

fn model(a: &ModelArgs, out: &Option<PathBuf>, format: Option<Format>) -> CliResult<Value> {
    json_only(format, "model")?;
    let spec: ExpModelSpec = match &a.spec {
        Some(path) => read_json::<ModelSpecJson>(path)?.to_spec().map_err(cfg)?,
        None => qmodels::great_circle_unitary_spec(&identity(2)),
    };
    let theta = if a.theta.is_empty() { vec![0.0; spec.dim_param()] } else { a.theta.clone() };
    if theta.len() != spec.dim_param() {
        return Err(cfg(format!("model has {} parameters, --theta gives {}", spec.dim_param(), theta.len())));
    }
    let rho = spec.state(&theta).map_err(num("qmodels"))?;
    let qfi = qinfo::quantum_fisher(&spec.model(), &theta).map_err(num("qinfo"))?;
    write(out, &ser(&MatrixJson::from_matrix(rho.matrix()))?)?;
    let rows: Vec<Vec<f64>> = (0..qfi.nrows()).map(|i| qfi.row(i).iter().copied().collect()).collect();
    Ok(json!({
        "kind": spec.kind(),
        "dim": rho.dim(),
        "kappa": spec.kappa(&theta),
        "purity": rho.purity(),
        "I": scalar_or_matrix(&rows),
    }))
}

fn instrument(a: &InstrumentArgs, out: &Option<PathBuf>, format: Option<Format>) -> CliResult<Value> {
    json_only(format, "instrument")?;
    let n: KrausInstrument = match &a.instrument {
        Some(path) => read_json::<InstrumentJson>(path)?.to_instrument().map_err(cfg)?,
        None => simple_instrument(&Hermitian::pauli_x()),
    };
    let rho = match &a.state {
        Some(path) => read_json::<MatrixJson>(path)?.to_density().map_err(cfg)?,
        None => DensityMatrix::pure(&StateVector::basis(n.dim(), 0)),
    };
    if rho.dim() != n.dim() {
        return Err(cfg("state and instrument dimensions differ"));
    }
    let fam = apply(&n, &rho).map_err(num("instrument"))?;
    let choi = choi_cp_check(&n);
    let posteriors: Vec<Option<MatrixJson>> =
        fam.posteriors.iter().map(|p| p.as_ref().map(|s| MatrixJson::from_matrix(s.matrix()))).collect();
    write(out, &ser(&json!({ "outcomes": fam.labels, "probs": fam.probs, "posteriors": posteriors }))?)?;
    Ok(json!({
        "outcomes": fam.labels,
        "probs": fam.probs,
        "completely_positive": choi.completely_positive,
        "min_choi_eig": choi.min_eigenvalue,
    }))
}

fn traj(a: &TrajArgs, seed: u64, out: &Option<PathBuf>, format: Option<Format>) -> CliResult<Value> {
    let (g, psi0) = match a.generator {
        GeneratorName::Decay => (LindbladGenerator::two_level_decay(a.alpha), trajectory::excited()),
        GeneratorName::Driven => (LindbladGenerator::driven_qubit(a.omega, a.gamma), trajectory::ground()),
        GeneratorName::Cascade => (LindbladGenerator::three_level_cascade(a.gamma, a.alpha * a.alpha), StateVector::basis(3, 2)),
    };
    let grid = TimeGrid::new(a.t_max, a.dt, a.record_every).map_err(cfg)?;
    let kind = match a.unraveling {
        UnravelingName::Jump => Unraveling::Jump,
        UnravelingName::Diffusion => Unraveling::Diffusion,
    };
    let reference = trajectory::integrate_master(&g, &DensityMatrix::pure(&psi0), &grid).map_err(num("trajectory"))?;
    if a.n_traj == 1 {
        let path = match kind {
            Unraveling::Jump => trajectory::jump_trajectory(&g, &psi0, &grid, seed),
            Unraveling::Diffusion => trajectory::diffusion_trajectory(&g, &psi0, &grid, seed),
        }
        .map_err(num("trajectory"))?;
        let artifact = match format.unwrap_or(Format::Csv) {
            Format::Csv => path.to_csv(),
            Format::Json => ser(&json!({
                "t": path.times,
                "jump_flag": path.jump_flags,
                "psi": path.states.iter().map(|v| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
            }))?,
        };
        write(out, &artifact)?;
        let last = path.states.last().expect("at least one record");
        return Ok(json!({
            "n_traj": 1,
            "jumps": path.jump_times.len(),
            "first_jump": path.jump_times.first(),
            "final_populations": last.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>(),
        }));
    }
    let ens = trajectory::ensemble_mean(&g, &psi0, &grid, a.n_traj, seed, kind).map_err(num("trajectory"))?;
    let artifact = match format.unwrap_or(Format::Csv) {
        Format::Csv => trajectory::series_csv(&ens.times, &ens.mean),
        Format::Json => ser(&json!({
            "t": ens.times,
            "rho": ens.mean.iter().map(MatrixJson::from_matrix).collect::<Vec<_>>(),
            "standard_error": ens.standard_error,
        }))?,
    };
    write(out, &artifact)?;
    Ok(json!({
        "n_traj": a.n_traj,
        "max_z": ens.max_z(&reference, 1.0 / a.n_traj as f64),
        "max_deviation": ens.max_deviation(&reference),
    }))
}

fn tomo_cmd(action: &TomoCommand, seed: Option<u64>, out: &Option<PathBuf>, format: Option<Format>) -> CliResult<Value> {
    match action {
        TomoCommand::Simulate { state, n, noise } => {
            if format == Some(Format::Json) {
                return Err(cfg("tomo simulate writes CSV samples"));
            }
            let seed = require_seed(seed)?;
            let path = out.as_ref().ok_or_else(|| cfg("tomo simulate needs --out"))?;
            let rho = DensityMatrix::pure(&state.vector(1));
            let samples = tomo::sample_homodyne(&rho, *n, seed, *noise).map_err(num("tomo"))?;
            write(out, &samples.to_csv())?;
            Ok(json!({ "n": samples.len(), "state": format!("{state:?}").to_lowercase(), "out": path }))
        }
        TomoCommand::Estimate { input, method, nmax, state } => {
            json_only(format, "tomo estimate")?;
            let samples = QuadratureSamples::from_csv(&read(input)?).map_err(cfg)?;
            let (rho_m, extra) = match method {
                TomoMethod::Mle => {
                    let res = tomo::mle_estimate(&samples, *nmax).map_err(num("tomo"))?;
                    write(out, &ser(&EstimateJson::from_mle(*nmax, &res))?)?;
                    (res.rho.matrix().clone(), json!({ "loglik": res.loglik, "iters": res.iters, "converged": res.converged }))
                }
                TomoMethod::Kernel => {
                    let d = nmax + 1;
                    let mut m = crate::qcore::zeros(d);
                    let mut worst_se: f64 = 0.0;
                    for i in 0..d {
                        for j in i..d {
                            let est = tomo::kernel_estimate(&samples, i, j).map_err(num("tomo"))?;
                            worst_se = worst_se.max(est.standard_error);
                            m[(i, j)] = est.value();
                            m[(j, i)] = est.value().conj();
                        }
                    }
                    write(out, &ser(&json!({ "n_max": nmax, "rho": MatrixJson::from_matrix(&m) }))?)?;
                    (m, json!({ "max_standard_error": worst_se }))
                }
            };
            let mut summary = json!({
                "method": format!("{method:?}").to_lowercase(),
                "n_max": nmax,
                "n": samples.len(),
            });
            if let Some(s) = state {
                let v = s.vector(*nmax);
                let f = (v.vector().adjoint() * &rho_m * v.vector())[(0, 0)].re;
                summary["fidelity"] = json!(f);
            }
            if let (Value::Object(s), Value::Object(e)) = (&mut summary, extra) {
                s.extend(e);
            }
            Ok(summary)
        }
    }
}

fn bell(out: &Option<PathBuf>, format: Option<Format>) -> CliResult<Value> {
    let rep = epr::bell_demo().map_err(num("epr"))?;
    let artifact = match format.unwrap_or(Format::Csv) {
        Format::Csv => rep.to_csv(),
        Format::Json => ser(&rep)?,
    };
    write(out, &artifact)?;
    Ok(json!({
        "p_equal": rep.rows.iter().map(|r| r.p_equal_quantum).collect::<Vec<_>>(),
        "lhv_max": rep.lhv_max,
        "violated": rep.violated,
    }))
}

fn teleport(a: &TeleportArgs, seed: u64, out: &Option<PathBuf>, format: Option<Format>) -> CliResult<Value> {
    json_only(format, "teleport")?;
    let res = epr::teleport(a.alpha, a.beta, seed).map_err(num("epr"))?;
    write(out, &ser(&res.all)?)?;
    Ok(json!({
        "outcome": res.outcome,
        "fidelity": res.fidelity,
        "probabilities": res.probabilities,
    }))
}

fn decohere(a: &DecohereArgs, seed: u64, out: &Option<PathBuf>, format: Option<Format>) -> CliResult<Value> {
    json_only(format, "decohere")?;
    if a.dim == 0 {
        return Err(cfg("--dim must be positive"));
    }
    let mut rng = random::stream(seed, 0);
    let h = random::hermitian(a.dim, &mut rng);
    let psi = random::state_vector(a.dim, &mut rng);
    let rep = epr::decoherence_average(a.alpha, a.beta, &h, a.tau, &psi, a.n_phase).map_err(num("epr"))?;
    write(out, &ser(&MatrixJson::from_matrix(rep.rho.matrix()))?)?;
    Ok(json!({
        "offdiag_norm": rep.offdiag_norm,
        "limit_distance": crate::qcore::frobenius(&(rep.rho.matrix() - rep.limit.matrix())),
        "n_phase": a.n_phase,
    }))
}

/// Runs a parsed command and returns its summary.
pub fn run(cli: &Cli) -> CliResult<Value> {
    let (seed, out, format) = (cli.seed, &cli.out, cli.format);
    match &cli.command {
        Command::Fisher(a) => fisher(a, out, format),
        Command::Bounds(a) => bounds(a, require_seed(seed)?, out, format),
        Command::Adaptive(a) => adaptive(a, require_seed(seed)?, out, format),
        Command::Model(a) => model(a, out, format),
        Command::Instrument(a) => instrument(a, out, format),
        Command::Traj(a) => traj(a, require_seed(seed)?, out, format),
        Command::Tomo { action } => tomo_cmd(action, seed, out, format),
        Command::Bell => bell(out, format),
        Command::Teleport(a) => teleport(a, require_seed(seed)?, out, format),
        Command::Decohere(a) => decohere(a, require_seed(seed)?, out, format),
    }
}

/// Parses `args` (program name first), runs, prints the summary line and
/// returns the process exit code.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match run(&cli).and_then(|v| ser(&v)) {
        Ok(line) => {
            println!("{line}");
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("qinfer").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn fisher_great_circle_summary() {
        let v = run(&parse(&["fisher", "--model", "great-circle", "--theta", "0.3"])).unwrap();
        assert_eq!(ser(&v).unwrap(), r#"{"I":1.0,"i":1.0,"attained":true}"#);
    }

    #[test]
    fn fisher_in_plane_angle() {
        let v = run(&parse(&["fisher", "--theta", "0.3", "--angle", "-1.1"])).unwrap();
        assert!((v["i"].as_f64().unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn bell_summary() {
        let v = run(&parse(&["bell"])).unwrap();
        assert!(ser(&v).unwrap().contains(r#""p_equal":[1.0,0.25,0.25,0.25]"#));
        assert_eq!(v["violated"], json!(true));
    }

    #[test]
    fn stochastic_commands_need_seed() {
        let e = run(&parse(&["teleport"])).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
        assert!(run(&parse(&["teleport", "--seed", "4", "--alpha", "1", "--beta", "0"])).is_ok());
    }

    #[test]
    fn numeric_failure_exit_code() {
        let e = run(&parse(&["teleport", "--seed", "1", "--alpha", "1", "--beta", "1"])).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_NUMERIC);
        assert!(e.to_string().starts_with("epr: "));
    }

    #[test]
    fn wrong_theta_length_is_config_error() {
        let e = run(&parse(&["fisher", "--model", "bloch", "--theta", "0.3"])).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
    }

    #[test]
    fn config_file_fills_missing_flags() {
        let dir = std::env::temp_dir().join(format!("qinfer-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.json");
        std::fs::write(&path, r#"{"seed": 9, "n_phase": 12, "dim": 3}"#).unwrap();
        let args: Vec<OsString> =
            ["qinfer", "decohere", "--config", path.to_str().unwrap(), "--dim", "4"].iter().map(OsString::from).collect();
        let merged = merge_config(args).unwrap();
        let cli = Cli::try_parse_from(merged).unwrap();
        assert_eq!(cli.seed, Some(9));
        match cli.command {
            Command::Decohere(a) => {
                assert_eq!(a.n_phase, 12);
                assert_eq!(a.dim, 4);
            }
            _ => unreachable!(),
        }
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn decohere_is_deterministic() {
        let a = ser(&run(&parse(&["decohere", "--seed", "5", "--n-phase", "36"])).unwrap()).unwrap();
        let b = ser(&run(&parse(&["decohere", "--seed", "5", "--n-phase", "36"])).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
