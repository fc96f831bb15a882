use std::fmt::Write as _;
use std::path::Path;

use cswarp_core::image_ops::encode_png;
use cswarp_core::registration::{preset_theta, SyntheticPreset, SyntheticSpec};
use cswarp_core::{
    backward_warp, compare_kernels, composite, l1_distance, load_png, make_synthetic_pair, register, ssim, Frame,
    ImageBuffer, KernelFamily, KernelSpec, Mask, WarpConfig,
};

use crate::args::{
    Cli, Command, CompareArgs, CompositeArgs, KernelCommand, MetricsArgs, PresetArg, ProfileArgs, RegisterArgs,
    SynthArgs, SynthFlags, WarpArgs,
};
use crate::output::Outputs;
use crate::CliError;

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Kernel(KernelCommand::Profile(a)) => profile(a),
        Command::Warp(a) => warp(a),
        Command::Register(a) => register_cmd(a),
        Command::Synth(a) => synth(a),
        Command::Composite(a) => composite_cmd(a),
        Command::Metrics(a) => metrics(a),
        Command::Compare(a) => compare(a),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn profile(a: ProfileArgs) -> Result<(), CliError> {
    if !(a.rmax.is_finite() && a.rmax >= 0.0) {
        return Err(CliError::Usage(format!("--rmax must be a finite value >= 0, got {}", a.rmax)));
    }
    if a.steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {}", a.steps)));
    }
    let spec = match KernelFamily::from(a.family) {
        KernelFamily::Tps => KernelSpec::Tps,
        KernelFamily::Wendland31 => KernelSpec::wendland31(a.alpha)?,
    };
    let wendland = spec.support().is_some();
    let mut csv = String::from(if wendland {
        "r,value,dvalue_dr,dvalue_dalpha\n"
    } else {
        "r,value,dvalue_dr\n"
    });
    for i in 0..a.steps {
        let r = a.rmax * i as f64 / (a.steps - 1) as f64;
        // Adding 0.0 turns -0 into 0.
        write!(csv, "{r},{},{}", spec.eval(r) + 0.0, spec.dr(r) + 0.0).unwrap();
        if wendland {
            write!(csv, ",{}", spec.dalpha(r) + 0.0).unwrap();
        }
        csv.push('\n');
    }
    match a.out {
        Some(path) => {
            let mut out = Outputs::default();
            out.add(path, csv);
            out.commit()
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn warp(a: WarpArgs) -> Result<(), CliError> {
    let config = WarpConfig::from_json(&read_text(&a.config)?)?;
    let (_, model) = config.build()?;
    let image = load_png(&a.input)?;
    let field = model.evaluate_field(&config.frame);
    let warped = backward_warp(&image, &field, a.border.into())?;

    let mut out = Outputs::default();
    out.add(&a.output, encode_png(&warped)?);
    if let Some(path) = a.field {
        let mut bytes = Vec::new();
        field.write_dfield(&mut bytes).expect("writing to memory");
        out.add(path, bytes);
    }
    out.commit()
}

fn register_cmd(a: RegisterArgs) -> Result<(), CliError> {
    let source = load_png(&a.source)?;
    let target = load_png(&a.target)?;
    let result = register(&source, &target, &a.flags.config())?;
    let warped = result.warp(&source)?;

    let mut out = Outputs::default();
    out.add(a.out_dir.join("result.json"), result.to_json());
    out.add(a.out_dir.join("warped.png"), encode_png(&warped)?);
    out.add(a.out_dir.join("curve.csv"), result.loss_curve_csv());
    out.commit()?;
    eprintln!(
        "l1 {:.6} ssim {:.6} alpha_hat {:.6} after {} iterations",
        result.metrics.l1, result.metrics.ssim, result.alpha_hat, result.iterations
    );
    Ok(())
}

fn synthetic_spec(
    flags: &SynthFlags,
    rows: usize,
    cols: usize,
    lambda_alpha: f64,
    normalized: bool,
    seed: u64,
) -> Result<SyntheticSpec, CliError> {
    let frame = Frame::new(flags.width, flags.height, normalized)?;
    let preset = match flags.preset {
        PresetArg::Identity => SyntheticPreset::Identity,
        PresetArg::Single => SyntheticPreset::Single,
        PresetArg::Random => SyntheticPreset::Random {
            amplitude: flags.amplitude,
        },
    };
    if rows < 2 || cols < 2 {
        return Err(CliError::Usage(format!("grid must be at least 2x2, got {rows}x{cols}")));
    }
    Ok(SyntheticSpec {
        width: flags.width,
        height: flags.height,
        pattern: flags.pattern.into(),
        rows,
        cols,
        theta_star: preset_theta(preset, rows, cols, &frame, seed),
        alpha_hat_star: flags.alpha_hat,
        lambda_alpha,
        normalized,
        seed,
    })
}

fn synth(a: SynthArgs) -> Result<(), CliError> {
    let spec = synthetic_spec(&a.synth, a.rows, a.cols, a.lambda_alpha, a.normalized, a.seed)?;
    let pair = make_synthetic_pair(&spec)?;
    let mut out = Outputs::default();
    out.add(a.out_dir.join("source.png"), encode_png(&pair.source)?);
    out.add(a.out_dir.join("target.png"), encode_png(&pair.target)?);
    out.add(a.out_dir.join("truth.json"), pair.truth.to_json());
    out.commit()
}

fn composite_cmd(a: CompositeArgs) -> Result<(), CliError> {
    let mask = Mask::from_image(&load_png(&a.mask)?)?;
    let warped = load_png(&a.warped)?;
    let render = load_png(&a.render)?;
    let blended = composite(&mask, &warped, &render)?;
    let mut out = Outputs::default();
    out.add(&a.output, encode_png(&blended)?);
    out.commit()
}

fn metrics(a: MetricsArgs) -> Result<(), CliError> {
    let x = load_png(&a.a)?;
    let y = load_png(&a.b)?;
    let report = serde_json::json!({
        "l1": l1_distance(&x, &y)?,
        "ssim": ssim(&x, &y)?,
    });
    println!("{report}");
    Ok(())
}

fn compare(a: CompareArgs) -> Result<(), CliError> {
    let cfg = a.flags.config();
    let (source, target): (ImageBuffer, ImageBuffer) = match (&a.source, &a.target) {
        (Some(s), Some(t)) => (load_png(s)?, load_png(t)?),
        _ => {
            let spec = synthetic_spec(&a.synth, cfg.rows, cfg.cols, cfg.lambda_alpha, cfg.normalized, cfg.seed)?;
            let pair = make_synthetic_pair(&spec)?;
            (pair.source, pair.target)
        }
    };
    let report = compare_kernels(&source, &target, &cfg)?;
    let tps = report.tps.result.warp(&source)?;
    let wendland = report.wendland31.result.warp(&source)?;
    let strip = ImageBuffer::hstack(&[&source, &tps, &wendland, &target])?;

    let mut out = Outputs::default();
    out.add(
        a.out_dir.join("report.json"),
        serde_json::to_string_pretty(&report).expect("report is serializable"),
    );
    out.add(a.out_dir.join("tps.png"), encode_png(&tps)?);
    out.add(a.out_dir.join("wendland31.png"), encode_png(&wendland)?);
    out.add(a.out_dir.join("side_by_side.png"), encode_png(&strip)?);
    out.commit()?;
    eprintln!(
        "tps: l1 {:.6} ssim {:.6} locality {}; wendland31: l1 {:.6} ssim {:.6} locality {}",
        report.tps.metrics.l1,
        report.tps.metrics.ssim,
        report.tps.locality,
        report.wendland31.metrics.l1,
        report.wendland31.metrics.ssim,
        report.wendland31.locality
    );
    Ok(())
}
