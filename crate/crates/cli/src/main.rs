use clap::{Parser, Subcommand, ValueEnum};
use eikonal_lab::acceptance::run_all;
use eikonal_lab::circlegeom::{TrigPolynomial, UnitVec};
use eikonal_lab::cost::cost_curve;
use eikonal_lab::entropy::{entropy_dictionary, JumpConfig};
use eikonal_lab::fields::{make_jump_field, make_piecewise_field, make_vortex_field, AngleField};
use eikonal_lab::interaction::{
    coercivity_scan, delta_field_integral, immersion_check, jk_quartic_scan, xi_closed_form,
};
use eikonal_lab::io::{self, ProbeRow};
use eikonal_lab::kinetic::{
    default_bump, duality_check, kinetic_residual, low_mode_pairings, sigma_jump, KineticMeasure,
};
use eikonal_lab::production::{
    besov_profile, coarse_block_cells, defect_probe, fit_exponent, grad_cubed_probe,
    production_from_projected, LubAccumulator, ProjectedField,
};
use eikonal_lab::{ExperimentConfig, LabError, Result};
use serde_json::json;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const THREADS_VAR: &str = "EIKONAL_LAB_THREADS";

#[derive(Parser)]
#[command(name = "eikonal-lab", version, about = "Experiments on planar eikonal fields")]
struct Cli {
    /// JSON experiment configuration; missing fields take their defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the configuration
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid size, overriding the configuration
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Random seed, overriding the configuration
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Jump,
    Vortex,
    Piecewise,
}

#[derive(Subcommand)]
enum Command {
    /// Write a field pair (<stem>.json + <stem>.bin)
    GenField {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Half-angle of the jumps
        #[arg(long, default_value_t = FRAC_PI_4)]
        beta: f64,
        /// Vortex center or jump-line point, as x,y
        #[arg(long, value_delimiter = ',', num_args = 2)]
        center: Option<Vec<f64>>,
        /// Use the vortex -(x - p)^perp / |x - p|
        #[arg(long)]
        negative: bool,
        /// Output stem; defaults to <out>/<kind>
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Entropy production of a field against the entropy dictionary
    Production {
        #[arg(long)]
        field: Option<PathBuf>,
        /// Mollification radius; defaults to four cells
        #[arg(long)]
        eps: Option<f64>,
    },
    /// N_t over the configured scales
    Besov {
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Mollified gradient and defect probes with fitted exponents
    Scaling {
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// h -> int Delta(m(x + h e1), m(x)) dx
    DeltaDecay {
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Xi(beta) and Xi / (2 sin beta)^3 on a uniform grid
    Coercivity {
        #[arg(long)]
        samples: Option<usize>,
    },
    /// c(s) table against s^3 / 6
    CostCurve {
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Kinetic measure of a jump, weak residuals and duality checks
    KineticCheck {
        /// Half-angle of the symmetric jump
        #[arg(long, default_value_t = 0.9)]
        beta: f64,
        /// Residual of a given field against sigma = 0
        #[arg(long)]
        field: Option<PathBuf>,
        /// Where to write (s, S) rows; defaults to <out>/kinetic.csv
        #[arg(long)]
        kinetic_out: Option<PathBuf>,
    },
    /// Scan of det(X - Y) / |X - Y|^4 for the Jin-Kohn map
    JkQuartic {
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Every acceptance criterion, with a JSON report
    VerifyAll,
}

fn exit_code(e: &LabError) -> u8 {
    match e {
        LabError::Config(_)
        | LabError::OutOfRange(_)
        | LabError::FieldFormat(_)
        | LabError::GridMismatch(_)
        | LabError::InadmissibleJump(_)
        | LabError::NonzeroMean(_) => 2,
        LabError::Resolution(_) | LabError::InsufficientSampling(_) => 3,
        LabError::Io(_) | LabError::Json(_) | LabError::Csv(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let k: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&k| k > 0)
        .ok_or_else(|| LabError::Config(format!("{THREADS_VAR} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| LabError::Config(e.to_string()))
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(n) = cli.n {
        cfg.n = n;
        cfg.besov_n = cfg.besov_n.min(n);
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    cfg.validate_schema()?;
    Ok(cfg)
}

/// A field from `--field`, else the symmetric pi/4 jump at size `n`.
fn field_or_jump(path: &Option<PathBuf>, n: usize, cfg: &ExperimentConfig) -> Result<(String, AngleField)> {
    match path {
        Some(p) => {
            let id = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "field".into());
            Ok((id, io::read_field(p)?))
        }
        None => Ok((
            "jump".into(),
            make_jump_field(&JumpConfig::symmetric(FRAC_PI_4), [0.5 * cfg.l, 0.5 * cfg.l], n, cfg.l),
        )),
    }
}

fn out_file(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    cfg.output.file(name)
}

fn run(cli: Cli) -> Result<ExitCode> {
    configure_threads()?;
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::GenField {
            kind,
            beta,
            center,
            negative,
            output,
        } => gen_field(&cfg, *kind, *beta, center.as_deref(), *negative, output.as_deref())?,
        Command::Production { field, eps } => production(&cfg, field, *eps)?,
        Command::Besov { field } => besov(&cfg, field)?,
        Command::Scaling { field } => scaling(&cfg, field)?,
        Command::DeltaDecay { field } => delta_decay(&cfg, field)?,
        Command::Coercivity { samples } => coercivity(&cfg, samples.unwrap_or(cfg.coercivity_samples))?,
        Command::CostCurve { samples } => cost(&cfg, samples.unwrap_or(cfg.cost_samples))?,
        Command::KineticCheck {
            beta,
            field,
            kinetic_out,
        } => kinetic(&cfg, *beta, field, kinetic_out.as_deref())?,
        Command::JkQuartic { pairs } => quartic(&cfg, pairs.unwrap_or(cfg.quartic_pairs))?,
        Command::VerifyAll => return verify_all(&cfg),
    }
    Ok(ExitCode::SUCCESS)
}

fn gen_field(
    cfg: &ExperimentConfig,
    kind: Kind,
    beta: f64,
    center: Option<&[f64]>,
    negative: bool,
    output: Option<&Path>,
) -> Result<()> {
    let p = match center {
        Some(c) => [c[0], c[1]],
        None => [0.5 * cfg.l, 0.5 * cfg.l],
    };
    let (name, field) = match kind {
        Kind::Jump => ("jump", make_jump_field(&JumpConfig::symmetric(beta), p, cfg.n, cfg.l)),
        Kind::Vortex => ("vortex", make_vortex_field(p, !negative, cfg.n, cfg.l)?),
        Kind::Piecewise => (
            "piecewise",
            make_piecewise_field(
                UnitVec::E1,
                &[0.35 * cfg.l, 0.65 * cfg.l],
                &[beta, -beta, beta],
                cfg.n,
                cfg.l,
            )?,
        ),
    };
    let stem = output.map(Path::to_path_buf).unwrap_or_else(|| out_file(cfg, name));
    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    io::write_field(&field, &stem)?;
    let (json, bin) = io::field_paths(&stem);
    println!(
        "{name} field n = {}, masked cells: {} -> {}, {}",
        field.n(),
        field.masked_count(),
        json.display(),
        bin.display()
    );
    Ok(())
}

fn production(cfg: &ExperimentConfig, field: &Option<PathBuf>, eps: Option<f64>) -> Result<()> {
    let (id, f) = field_or_jump(field, cfg.n, cfg)?;
    let eps = eps.unwrap_or(4.0 * f.h());
    let proj = ProjectedField::new(&f, eps)?;
    let dict = entropy_dictionary(cfg.dictionary_k, cfg.dictionary_random, cfg.seed);
    let mut acc = LubAccumulator::new(f.n(), f.l(), cfg.margin, coarse_block_cells(eps, f.n(), f.l()));
    let mut entries = Vec::new();
    for (k, phi) in dict.iter().enumerate() {
        let mu = production_from_projected(&proj, phi, cfg.margin);
        entries.push(json!({
            "index": k,
            "source": phi.source,
            "total_variation": mu.total_variation(),
            "mass": mu.mass(),
        }));
        acc.push(&mu)?;
    }
    let lub = acc.cellwise();
    io::write_measure(io::create(&out_file(cfg, "production.csv"))?, &lub)?;
    let summary = json!({
        "field": id,
        "n": f.n(),
        "eps": eps,
        "margin": cfg.margin,
        "window_side": lub.window_side(),
        "entropies": entries,
        "lub_cellwise_tv": lub.total_variation(),
        "lub_coarse_tv": acc.coarse_total_variation(),
    });
    io::write_json(&out_file(cfg, "production.json"), &summary)?;
    println!(
        "{id}: {} entropies, lub total variation {:.6e} (cellwise) {:.6e} (coarse)",
        dict.len(),
        lub.total_variation(),
        acc.coarse_total_variation()
    );
    Ok(())
}

fn besov(cfg: &ExperimentConfig, field: &Option<PathBuf>) -> Result<()> {
    let (id, f) = field_or_jump(field, cfg.besov_n, cfg)?;
    let prof = besov_profile(&f, cfg.margin, &cfg.besov_t)?;
    let rows: Vec<[f64; 2]> = cfg.besov_t.iter().zip(&prof).map(|(&t, &v)| [t, v]).collect();
    io::write_curve(io::create(&out_file(cfg, "besov.csv"))?, ["t", "N_t"], &rows)?;
    let fit = fit_exponent(&rows.iter().map(|r| (r[0], r[1])).collect::<Vec<_>>());
    match fit {
        Ok(fit) => println!("{id}: N_t exponent {:.4}", fit.slope),
        Err(_) => println!("{id}: N_t vanishes"),
    }
    Ok(())
}

fn scaling(cfg: &ExperimentConfig, field: &Option<PathBuf>) -> Result<()> {
    let (id, f) = field_or_jump(field, cfg.n, cfg)?;
    let mut rows = Vec::new();
    let mut fits = serde_json::Map::new();
    for (op, probe) in [
        ("grad_cubed", grad_cubed_probe as fn(&AngleField, f64, f64) -> Result<f64>),
        ("defect", defect_probe),
    ] {
        let pairs = cfg
            .eps
            .iter()
            .map(|&e| Ok((e, probe(&f, e, cfg.margin)?)))
            .collect::<Result<Vec<_>>>()?;
        let fit = fit_exponent(&pairs).ok();
        for &(e, v) in &pairs {
            let residual = fit.map_or(0.0, |fit| v.ln() - (fit.slope * e.ln() + fit.intercept));
            rows.push(ProbeRow {
                field_id: id.clone(),
                op: op.into(),
                param: e,
                value: v,
                residual,
            });
        }
        fits.insert(op.into(), json!(fit.map(|f| f.slope)));
        match fit {
            Some(fit) => println!("{id}: {op} exponent {:.4}", fit.slope),
            None => println!("{id}: {op} vanishes"),
        }
    }
    io::write_probes(io::create(&out_file(cfg, "scaling.csv"))?, &rows)?;
    io::write_json(&out_file(cfg, "scaling.json"), &json!({ "field": id, "exponents": fits }))?;
    Ok(())
}

fn delta_decay(cfg: &ExperimentConfig, field: &Option<PathBuf>) -> Result<()> {
    let (id, f) = field_or_jump(field, cfg.n, cfg)?;
    let rows = cfg
        .h
        .iter()
        .map(|&h| Ok([h, delta_field_integral(&f, h, UnitVec::E1, cfg.margin)?]))
        .collect::<Result<Vec<[f64; 2]>>>()?;
    io::write_curve(io::create(&out_file(cfg, "delta_decay.csv"))?, ["h", "delta"], &rows)?;
    match fit_exponent(&rows.iter().map(|r| (r[0], r[1])).collect::<Vec<_>>()) {
        Ok(fit) => println!("{id}: exponent of h -> int Delta {:.4}", fit.slope),
        Err(_) => println!("{id}: int Delta vanishes"),
    }
    Ok(())
}

fn coercivity(cfg: &ExperimentConfig, samples: usize) -> Result<()> {
    let scan = coercivity_scan(samples)?;
    let mut xi = Vec::with_capacity(samples);
    let mut ratio = Vec::with_capacity(samples);
    for k in 1..=samples {
        let beta = if k == samples { FRAC_PI_2 } else { FRAC_PI_2 * k as f64 / samples as f64 };
        let v = xi_closed_form(beta)?;
        xi.push([beta, v]);
        ratio.push([beta, v / (2.0 * beta.sin()).powi(3)]);
    }
    io::write_curve(io::create(&out_file(cfg, "xi.csv"))?, ["beta", "xi"], &xi)?;
    io::write_curve(io::create(&out_file(cfg, "coercivity.csv"))?, ["beta", "ratio"], &ratio)?;
    println!(
        "min Xi / (2 sin b)^3 = {:.6} at b = {:.4}; b -> 0: {:.6}; b = pi/2: {:.12}",
        scan.min_ratio, scan.argmin_beta, scan.small_beta_ratio, scan.endpoint_ratio
    );
    Ok(())
}

fn cost(cfg: &ExperimentConfig, samples: usize) -> Result<()> {
    let curve = cost_curve(samples)?;
    let rows: Vec<[f64; 3]> = curve.iter().map(|p| [p.s, p.c_value, p.s.powi(3) / 6.0]).collect();
    io::write_curve(io::create(&out_file(cfg, "cost.csv"))?, ["s", "c", "s3_over_6"], &rows)?;
    let margin = rows.iter().map(|r| r[1] - r[2]).fold(f64::INFINITY, f64::min);
    let strict = rows.iter().filter(|r| r[1] > r[2]).count();
    println!("{strict} of {} rows have c(s) > s^3/6; smallest margin {margin:.6e}", rows.len());
    Ok(())
}

fn kinetic(cfg: &ExperimentConfig, beta: f64, field: &Option<PathBuf>, sigma_out: Option<&Path>) -> Result<()> {
    let jump = JumpConfig::symmetric(beta);
    let sigma = sigma_jump(&jump, cfg.angular_samples)?;
    let path = sigma_out.map(Path::to_path_buf).unwrap_or_else(|| out_file(cfg, "kinetic.csv"));
    io::write_kinetic(io::create(&path)?, &sigma)?;
    let (l1_error, sign) = sigma.l1_distance_up_to_sign(|t| eikonal_lab::cost::g_beta(beta, t));
    let psi = TrigPolynomial::new(0.0, vec![0.0, 1.0, 0.3], vec![0.0, -0.5, 0.8]);
    let zeta = default_bump();
    let center = [0.5 * cfg.l, 0.5 * cfg.l];
    let line = KineticMeasure::Line {
        density: &sigma,
        point: center,
        normal: UnitVec::E1,
    };
    let mut ladder = Vec::new();
    for &n in &cfg.ladder {
        let f = make_jump_field(&jump, center, n, cfg.l);
        let eps = 4.0 * f.h();
        let duality = duality_check(&f, &TrigPolynomial::cos_mode(2), &zeta, eps, cfg.angular_samples)?;
        ladder.push(json!({
            "n": n,
            "residual": kinetic_residual(&f, &line, &zeta, &psi),
            "residual_sigma_zero": kinetic_residual(&f, &KineticMeasure::Zero, &zeta, &psi),
            "low_modes": low_mode_pairings(&f, &zeta),
            "duality": duality,
        }));
    }
    let given = match field {
        Some(p) => {
            let f = io::read_field(p)?;
            Some(json!({
                "field": p.display().to_string(),
                "residual_sigma_zero": kinetic_residual(&f, &KineticMeasure::Zero, &zeta, &psi),
                "low_modes": low_mode_pairings(&f, &zeta),
            }))
        }
        None => None,
    };
    let summary = json!({
        "beta": beta,
        "samples": cfg.angular_samples,
        "l1_error_vs_g_beta": l1_error,
        "sign": sign,
        "ladder": ladder,
        "field": given,
    });
    io::write_json(&out_file(cfg, "kinetic.json"), &summary)?;
    println!("sigma for b = {beta}: L1 distance to g_b {l1_error:.3e} (sign {sign:+})");
    Ok(())
}

fn quartic(cfg: &ExperimentConfig, pairs: usize) -> Result<()> {
    let scan = jk_quartic_scan(pairs)?;
    let imm = immersion_check(4096);
    let summary = json!({ "scan": scan, "immersion": imm });
    io::write_json(&out_file(cfg, "jk_quartic.json"), &summary)?;
    println!(
        "min det / |X - Y|^4 = {:.6e} over {} pairs at ({:.4}, {:.4})",
        scan.min_ratio, scan.pairs, scan.argmin.0, scan.argmin.1
    );
    Ok(())
}

fn verify_all(cfg: &ExperimentConfig) -> Result<ExitCode> {
    cfg.validate_resolution()?;
    let report = run_all(cfg);
    for c in &report.criteria {
        println!("{}", c.summary_line());
    }
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir)?;
    io::write_json(&dir.join(&cfg.output.report), &report)?;
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(4) })
}
