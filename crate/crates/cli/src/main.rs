use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tvbd::alternating::{sample_instances, verify_theorem3, verify_theorem4, write_report_csv};
use tvbd::deblur::{deblur_blind, deblur_nonblind, DeblurConfig, DEFAULT_NONBLIND_LAMBDA};
use tvbd::diff::ColorMode;
use tvbd::eval::{histogram_rows, make_cases, report_rows, run_ablation};
use tvbd::io::{read_kernel, read_pnm, read_signal_csv, write_kernel, write_pnm, write_signal_csv, write_table_csv, PnmEncoding};
use tvbd::landscape::{landscape_fixed_u, landscape_min_u, pam_path_overlay, PathOptions, SimplexGrid};
use tvbd::tv1d::{blur_step, taut_string_denoise, tv_denoise, Blur3, StepSignal};
use tvbd::BoundaryMode;

#[derive(Parser)]
#[command(name = "tvbd", version, about = "Total-variation blind deconvolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Blind deconvolution of a PGM/PPM image.
    Deblur(DeblurArgs),
    /// TV deconvolution with a known kernel.
    Nonblind(NonblindArgs),
    /// 1D energy landscape over the 3-tap blur simplex.
    Landscape(LandscapeArgs),
    /// Error-ratio evaluation and boundary ablation on synthetic cases.
    Eval(EvalArgs),
    /// Exact 1D TV denoising of a CSV signal.
    Denoise1d(DenoiseArgs),
    /// Check the AM and PAM first-iteration results on sampled step instances.
    Verify(VerifyArgs),
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (h, w) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected HxW, got '{s}'"))?;
    let h = h.trim().parse().map_err(|e| format!("bad height: {e}"))?;
    let w = w.trim().parse().map_err(|e| format!("bad width: {e}"))?;
    Ok((h, w))
}

#[derive(Args)]
struct DeblurArgs {
    input: PathBuf,
    /// Kernel support as HxW (odd, at least 3x3).
    #[arg(long, value_parser = parse_size, default_value = "9x9")]
    kernel_size: (usize, usize),
    #[arg(long)]
    lambda_init: Option<f64>,
    #[arg(long)]
    lambda_min: Option<f64>,
    /// Multiplicative λ decay per iteration.
    #[arg(long)]
    anneal: Option<f64>,
    /// Keep only the finest N pyramid levels.
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, default_value = "free")]
    boundary: BoundaryMode,
    #[arg(long)]
    filtered_kernel_estimation: bool,
    #[arg(long, default_value = "gray")]
    color: ColorMode,
    /// Restored image (PGM/PPM).
    #[arg(short, long, default_value = "restored.pnm")]
    output: PathBuf,
    #[arg(long, default_value = "kernel.txt")]
    kernel_out: PathBuf,
    /// Per-iteration energy log.
    #[arg(long, default_value = "energy.csv")]
    energy_out: PathBuf,
}

#[derive(Args)]
struct NonblindArgs {
    input: PathBuf,
    #[arg(long)]
    kernel: PathBuf,
    #[arg(long, default_value_t = DEFAULT_NONBLIND_LAMBDA)]
    lambda: f64,
    #[arg(short, long, default_value = "restored.pnm")]
    output: PathBuf,
}

#[derive(Args)]
struct LandscapeArgs {
    /// Observed 1D signal (CSV). Without it a blurred zero-mean step is generated.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    u1: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.2)]
    u2: f64,
    #[arg(long, default_value_t = 10)]
    l1: usize,
    #[arg(long, default_value_t = 10)]
    l2: usize,
    /// True blur taps in window order.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0.4,0.3,0.3")]
    k0: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    #[arg(long, default_value_t = 101)]
    resolution: usize,
    /// Fixed-u cost over these norms instead of the min-u landscape.
    #[arg(long, value_delimiter = ',')]
    fixed_u_norms: Option<Vec<f64>>,
    /// Overlay a PAM path starting from delta, annealing λ from this value.
    #[arg(long)]
    path_lambda_start: Option<f64>,
    #[arg(long, default_value = "landscape")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, value_delimiter = ',', default_value = "free,symmetric,periodic,replicate")]
    modes: Vec<BoundaryMode>,
    /// Also run with filtered kernel estimation.
    #[arg(long)]
    filtered: bool,
    #[arg(long, default_value_t = DEFAULT_NONBLIND_LAMBDA)]
    lambda_nb: f64,
    #[arg(long, default_value_t = 10)]
    max_bin: usize,
    #[arg(long, default_value = "eval")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DenoiseArgs {
    input: PathBuf,
    #[arg(long)]
    lambda: f64,
    /// Extend the result by one replicated sample at each end.
    #[arg(long)]
    extend: bool,
    #[arg(short, long, default_value = "denoised.csv")]
    output: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "verify")]
    out_dir: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Deblur(a) => deblur(a),
        Command::Nonblind(a) => nonblind(a),
        Command::Landscape(a) => landscape(a),
        Command::Eval(a) => eval(a),
        Command::Denoise1d(a) => denoise(a),
        Command::Verify(a) => verify(a),
    }
}

fn deblur(a: DeblurArgs) -> Result<()> {
    let f = read_pnm(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let (kh, kw) = a.kernel_size;
    let d = DeblurConfig::default();
    let cfg = DeblurConfig {
        lambda_init: a.lambda_init.unwrap_or(d.lambda_init),
        lambda_min: a.lambda_min.unwrap_or(d.lambda_min),
        anneal_factor: a.anneal.unwrap_or(d.anneal_factor),
        max_iters_per_level: a.iters.unwrap_or(d.max_iters_per_level),
        max_levels: a.levels,
        boundary: a.boundary,
        filtered_kernel_estimation: a.filtered_kernel_estimation,
        color: a.color,
        ..d.with_kernel_size(kw, kh)
    };
    let r = deblur_blind(&f, &cfg).context("blind deconvolution failed")?;
    write_pnm(&a.output, &r.u, PnmEncoding::Binary)?;
    write_kernel(&a.kernel_out, &r.k)?;
    let rows = r.energy_log.iter().map(|e| {
        vec![e.level.to_string(), e.iteration.to_string(), e.lambda.to_string(), e.energy.to_string()]
    });
    write_table_csv(&a.energy_out, &["level", "iteration", "lambda", "energy"], rows)?;
    println!("wrote {}, {}, {}", a.output.display(), a.kernel_out.display(), a.energy_out.display());
    Ok(())
}

fn nonblind(a: NonblindArgs) -> Result<()> {
    let f = read_pnm(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let k = read_kernel(&a.kernel).with_context(|| format!("reading {}", a.kernel.display()))?;
    if !k.is_feasible(1e-6) {
        bail!("kernel must be nonnegative and sum to 1");
    }
    let u = deblur_nonblind(&f, &k, a.lambda)?;
    write_pnm(&a.output, &u, PnmEncoding::Binary)?;
    println!("wrote {}", a.output.display());
    Ok(())
}

fn out_dir(p: &Path) -> Result<()> {
    fs::create_dir_all(p).with_context(|| format!("creating {}", p.display()))
}

fn landscape(a: LandscapeArgs) -> Result<()> {
    out_dir(&a.out_dir)?;
    let f = match &a.input {
        Some(p) => read_signal_csv(p)?,
        None => {
            if a.k0.len() != 3 {
                bail!("--k0 needs three taps");
            }
            let s = StepSignal::new(a.u1, a.u2, a.l1, a.l2)?.zero_mean();
            blur_step(&s, &Blur3::new(a.k0[2], a.k0[0])?)
        }
    };
    let grids = match &a.fixed_u_norms {
        Some(norms) => landscape_fixed_u(&f, a.lambda, norms, a.resolution)?,
        None => vec![landscape_min_u(&f, a.lambda, SimplexGrid::new(a.resolution, 1.0)?)?],
    };
    for g in &grids {
        let stem = format!("norm_{}", g.norm);
        g.write_csv(a.out_dir.join(format!("{stem}.csv")))?;
        g.write_heatmap(a.out_dir.join(format!("{stem}.pgm")))?;
        if let Some((i, j)) = g.argmin() {
            let c = g.get(i, j).expect("argmin is a cell");
            println!("norm {}: minimum {:.6e} at delta1={:.4} delta2={:.4}", g.norm, c.energy.unwrap_or(f64::NAN), c.delta1, c.delta2);
        }
    }
    if let Some(start) = a.path_lambda_start {
        let opts = PathOptions { lambda_start: Some(start), ..PathOptions::default() };
        let path = pam_path_overlay(&f, a.lambda, Blur3::new(0.0, 0.0)?, &opts)?;
        let rows = path.iter().map(|p| vec![p.delta1.to_string(), p.delta2.to_string(), p.lambda.to_string()]);
        write_table_csv(a.out_dir.join("pam_path.csv"), &["delta1", "delta2", "lambda"], rows)?;
        let end = path.last().expect("path has a start");
        println!("PAM path: {} points, ends at delta1={:.4} delta2={:.4}", path.len(), end.delta1, end.delta2);
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    out_dir(&a.out_dir)?;
    let cases = make_cases(a.count, a.seed, a.noise)?;
    let mut reports = run_ablation(&cases, &a.modes, false, &DeblurConfig::default(), a.lambda_nb)?;
    if a.filtered {
        reports.extend(run_ablation(&cases, &a.modes, true, &DeblurConfig::default(), a.lambda_nb)?);
    }
    write_table_csv(a.out_dir.join("ratios.csv"), &["case", "mode", "filtered", "ratio"], report_rows(&reports))?;
    write_table_csv(a.out_dir.join("histogram.csv"), &["mode", "filtered", "bin", "fraction"], histogram_rows(&reports, a.max_bin))?;
    for r in &reports {
        println!("{:>10} filtered={:<5} ratio<3: {:.2}", r.mode.name(), r.filtered, r.fraction_below(3.0));
    }
    Ok(())
}

fn denoise(a: DenoiseArgs) -> Result<()> {
    let f = read_signal_csv(&a.input)?;
    let u = if a.extend { taut_string_denoise(&f, a.lambda)? } else { tv_denoise(&f, a.lambda)? };
    write_signal_csv(&a.output, "u", &u)?;
    println!("wrote {}", a.output.display());
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<()> {
    out_dir(&a.out_dir)?;
    let inst = sample_instances(a.count, a.seed);
    let mut r3 = Vec::with_capacity(inst.len());
    let mut r4 = Vec::with_capacity(inst.len());
    for i in &inst {
        r3.push(verify_theorem3(&i.step, &i.blur, i.lambda)?.row());
        r4.push(verify_theorem4(&i.step, &i.blur, i.lambda)?.row());
    }
    write_report_csv(a.out_dir.join("am.csv"), &r3)?;
    write_report_csv(a.out_dir.join("pam.csv"), &r4)?;
    let pass = |rows: &[tvbd::alternating::VerificationRow]| rows.iter().filter(|r| r.pass).count();
    println!("AM  returns delta: {}/{}", pass(&r3), r3.len());
    println!("PAM recovers blur: {}/{}", pass(&r4), r4.len());
    Ok(())
}
