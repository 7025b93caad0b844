//! `sigsr`: degrade, sharpen, super-resolve and score images, or run a sweep.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sigmoid_sr::bench::{run_benchmark, BenchSpec};
use sigmoid_sr::color::{rgb_to_ycbcr_planes, ycbcr_planes_to_rgb, ColorImage, ColorSpace};
use sigmoid_sr::io::{read_image, read_luma, write_color, write_gray, Image};
use sigmoid_sr::{
    degrade, psnr, reconstruct, sharpen_image, sr_color, BlendMode, ImagePlane, MetricParams, ResidualUpscaler,
    SRConfig,
};

#[derive(Parser)]
#[command(name = "sigsr", version, about = "Sigmoid-sharpened iterative super-resolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Blur, decimate and optionally add noise to an HR image.
    Degrade {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: ConfigArgs,
    },
    /// Apply the patch-wise sigmoid sharpening at HR resolution.
    Sharpen {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: ConfigArgs,
    },
    /// Reconstruct an HR image from an LR input.
    Sr {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write the per-iteration cost trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        opts: ConfigArgs,
    },
    /// Print PSNR and SSIM of a test image against a reference (luma).
    Metrics {
        reference: PathBuf,
        test: PathBuf,
        /// Default crop when --crop-border is not given.
        #[arg(long, default_value_t = 3)]
        scale: usize,
        #[arg(long)]
        crop_border: Option<usize>,
    },
    /// Run a dataset sweep described by a JSON spec.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding the spec's.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dataset directory, overriding the spec's.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        crop_border: Option<usize>,
        #[command(flatten)]
        solver: SolverFlags,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// SRConfig as JSON; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args, Default)]
struct SolverFlags {
    #[arg(long)]
    scale: Option<usize>,
    #[arg(long)]
    kernel_size: Option<usize>,
    #[arg(long)]
    kernel_sigma: Option<f64>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "K")]
    sharpness: Option<f64>,
    #[arg(long = "B", allow_hyphen_values = true)]
    location: Option<f64>,
    /// Patch side in LR pixels.
    #[arg(long)]
    patch: Option<usize>,
    /// Patch stride in LR pixels.
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    /// hann | mean
    #[arg(long)]
    blend: Option<BlendMode>,
    /// bicubic | zero_insert_blur
    #[arg(long)]
    residual_upscaler: Option<ResidualUpscaler>,
}

impl SolverFlags {
    fn apply(&self, cfg: &mut SRConfig) {
        if let Some(k) = self.scale {
            cfg.set_scale(k);
        }
        let d = &mut cfg.degradation;
        set(&mut d.kernel_size, self.kernel_size);
        set(&mut d.kernel_sigma, self.kernel_sigma);
        set(&mut d.noise_sigma, self.noise_sigma);
        set(&mut d.seed, self.seed);
        let s = &mut cfg.sigmoid;
        set(&mut s.sharpness, self.sharpness);
        set(&mut s.location, self.location);
        set(&mut s.patch_len_lr, self.patch);
        set(&mut s.stride_lr, self.stride);
        set(&mut s.blend, self.blend);
        set(&mut cfg.lambda, self.lambda);
        set(&mut cfg.eta, self.eta);
        set(&mut cfg.max_iters, self.iters);
        set(&mut cfg.residual_upscaler, self.residual_upscaler);
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl ConfigArgs {
    fn resolve(&self) -> Result<SRConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let mut cfg: SRConfig =
                    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
                // A config that only sets `scale` should carry it into the nested sections.
                let k = cfg.scale;
                cfg.set_scale(k);
                cfg
            }
            None => SRConfig::default(),
        };
        self.solver.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sigsr: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Degrade { input, out, opts } => cmd_degrade(&input, &out, &opts.resolve()?),
        Command::Sharpen { input, out, opts } => cmd_sharpen(&input, &out, &opts.resolve()?),
        Command::Sr {
            input,
            out,
            trace,
            opts,
        } => cmd_sr(&input, &out, trace.as_deref(), &opts.resolve()?),
        Command::Metrics {
            reference,
            test,
            scale,
            crop_border,
        } => cmd_metrics(&reference, &test, scale, crop_border),
        Command::Bench {
            config,
            out,
            dataset,
            crop_border,
            solver,
        } => cmd_bench(&config, out, dataset, crop_border, &solver),
    }
}

fn load(path: &Path) -> Result<Image> {
    read_image(path).with_context(|| format!("reading {}", path.display()))
}

fn color_from_planes(planes: &[ImagePlane; 3]) -> Result<ColorImage> {
    Ok(ColorImage::from_planes(planes, ColorSpace::Rgb)?)
}

fn cmd_degrade(input: &Path, out: &Path, cfg: &SRConfig) -> Result<()> {
    let model = &cfg.degradation;
    let (w, h) = match load(input)? {
        Image::Gray(p) => {
            let lr = degrade(&p, model)?;
            write_gray(out, &lr)?;
            lr.dims()
        }
        Image::Color(c) => {
            // Each channel gets its own noise stream.
            let mut lr = Vec::with_capacity(3);
            for (i, plane) in c.to_planes().iter().enumerate() {
                let mut m = model.clone();
                m.seed = model.seed.wrapping_add(i as u64);
                lr.push(degrade(plane, &m)?);
            }
            let planes: [ImagePlane; 3] = lr.try_into().expect("three channels");
            write_color(out, &color_from_planes(&planes)?)?;
            planes[0].dims()
        }
    };
    println!(
        "wrote {} ({w}x{h}) kernel_size={} kernel_sigma={} factor={} offset={} noise_sigma={} seed={}",
        out.display(),
        model.kernel_size,
        model.kernel_sigma,
        model.factor,
        model.offset,
        model.noise_sigma,
        model.seed
    );
    Ok(())
}

fn cmd_sharpen(input: &Path, out: &Path, cfg: &SRConfig) -> Result<()> {
    match load(input)? {
        Image::Gray(p) => write_gray(out, &sharpen_image(&p, &cfg.sigmoid)?)?,
        Image::Color(c) => {
            let [y, cb, cr] = rgb_to_ycbcr_planes(&c)?;
            let y = sharpen_image(&y, &cfg.sigmoid)?;
            write_color(out, &ycbcr_planes_to_rgb(&[y, cb, cr])?)?;
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_sr(input: &Path, out: &Path, trace_path: Option<&Path>, cfg: &SRConfig) -> Result<()> {
    let (dims, trace) = match load(input)? {
        Image::Gray(p) => {
            let (hr, trace) = reconstruct(&p, cfg)?;
            write_gray(out, &hr)?;
            (hr.dims(), trace)
        }
        Image::Color(c) => {
            let (hr, trace) = sr_color(&c, cfg)?;
            write_color(out, &hr)?;
            ((hr.width(), hr.height()), trace)
        }
    };
    if let Some(path) = trace_path {
        std::fs::write(path, trace.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "wrote {} ({}x{}) iterations={} final_cost={:.6e}",
        out.display(),
        dims.0,
        dims.1,
        trace.records.len(),
        trace.final_cost
    );
    Ok(())
}

fn cmd_metrics(reference: &Path, test: &Path, scale: usize, crop_border: Option<usize>) -> Result<()> {
    let a = read_luma(reference).with_context(|| format!("reading {}", reference.display()))?;
    let b = read_luma(test).with_context(|| format!("reading {}", test.display()))?;
    let mut params = MetricParams::for_scale(scale);
    set(&mut params.crop_border, crop_border);
    let p = psnr(&a, &b, &params)?;
    let s = sigmoid_sr::ssim(&a, &b, &params)?;
    println!("psnr_db={p:.4} ssim={s:.6}");
    Ok(())
}

fn cmd_bench(
    config: &Path,
    out: Option<PathBuf>,
    dataset: Option<PathBuf>,
    crop_border: Option<usize>,
    solver: &SolverFlags,
) -> Result<()> {
    let mut spec = BenchSpec::from_json_file(config).with_context(|| format!("loading {}", config.display()))?;
    for (flag, given) in [
        ("--scale", solver.scale.is_some()),
        ("--kernel-sigma", solver.kernel_sigma.is_some()),
        ("--noise-sigma", solver.noise_sigma.is_some()),
        ("--K", solver.sharpness.is_some()),
        ("--B", solver.location.is_some()),
    ] {
        if given {
            bail!("{flag} is a sweep axis; set it under \"sweep\" in the spec");
        }
    }
    solver.apply(&mut spec.base);
    if let Some(o) = out {
        spec.output_dir = Some(o);
    }
    set(&mut spec.dataset_dir, dataset);
    if crop_border.is_some() {
        spec.crop_border = crop_border;
    }
    let report = run_benchmark(&spec)?;
    for (path, why) in &report.skipped {
        eprintln!("skipped {}: {why}", path.display());
    }
    if let Some(dir) = &spec.output_dir {
        println!("wrote {}", dir.join("report.csv").display());
        for row in &report.sr.averages {
            println!(
                "k={} K={} B={} blur_sigma={} noise_sigma={} psnr_db={:.4} ssim={:.6}",
                row.k, row.sharpness, row.location, row.blur_sigma, row.noise_sigma, row.psnr_db, row.ssim
            );
        }
    } else {
        print!("{}", report.sr.to_csv()?);
    }
    Ok(())
}
