use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use defectscan::io::write_atomic;
use defectscan::{
    detect as run_detect, inject_defect, load_image, load_model, macro_detection_rate,
    mask_to_ground_truth, pooled_detection_rate, render_overlay, save_model, synth_texture,
    train as run_train, DefectModel, DetectionCounts, TrainConfig,
};

use crate::{DetectArgs, EvalArgs, ModelOverrides, SynthArgs, TrainArgs};

const IMAGE_EXTENSIONS: [&str; 2] = ["png", "pgm"];

fn has_image_extension(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| e.eq_ignore_ascii_case(x)))
}

/// Expands directories into their PNG/PGM files, sorted by name.
fn collect_images(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)
                .with_context(|| format!("reading {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && has_image_extension(p))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(input.clone());
        }
    }
    Ok(out)
}

pub fn train(args: TrainArgs) -> Result<()> {
    let config = TrainConfig {
        levels: args.levels,
        window: args.window,
        energy_mode: args.energy_mode,
        threshold_margin: args.margin,
    };
    config.validate()?;
    let paths = collect_images(&args.input)?;
    if paths.is_empty() {
        bail!("no training images");
    }
    let images = paths
        .iter()
        .map(|p| load_image(p).with_context(|| format!("loading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let model = run_train(&images, config)?;
    save_model(&model, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "trained on {} images, k={} windows, threshold={}",
        images.len(),
        model.trained_windows(),
        model.threshold()
    );
    Ok(())
}

fn check_overrides(model: &DefectModel, o: &ModelOverrides) -> Result<()> {
    let cfg = model.config();
    if let Some(l) = o.levels {
        ensure!(
            l == cfg.levels,
            "--levels {l} contradicts the model ({})",
            cfg.levels
        );
    }
    if let Some(w) = o.window {
        ensure!(
            w == cfg.window,
            "--window {w} contradicts the model ({})",
            cfg.window
        );
    }
    if let Some(m) = o.energy_mode {
        ensure!(
            m == cfg.energy_mode,
            "--energy-mode {m} contradicts the model ({})",
            cfg.energy_mode
        );
    }
    if let Some(m) = o.margin {
        ensure!(
            m == cfg.threshold_margin,
            "--margin {m} contradicts the model ({})",
            cfg.threshold_margin
        );
    }
    Ok(())
}

fn open_model(path: &Path, overrides: &ModelOverrides) -> Result<DefectModel> {
    let model = load_model(path).with_context(|| format!("loading model {}", path.display()))?;
    check_overrides(&model, overrides)?;
    Ok(model)
}

pub fn detect(args: DetectArgs) -> Result<()> {
    let model = open_model(&args.model, &args.overrides)?;
    let img =
        load_image(&args.image).with_context(|| format!("loading {}", args.image.display()))?;
    let map = run_detect(&img, &model)?;
    write_atomic(&args.report, map.to_report().to_json().as_bytes())
        .with_context(|| format!("writing {}", args.report.display()))?;
    if let Some(path) = &args.overlay {
        render_overlay(&img, &map)?
            .save(path)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "defective windows: {} of {}",
        map.defective_count(),
        map.verdicts().len()
    );
    Ok(())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    ensure!(
        args.image.len() == args.mask.len(),
        "{} images but {} masks",
        args.image.len(),
        args.mask.len()
    );
    let model = open_model(&args.model, &args.overrides)?;
    let window = model.config().window;
    let mut runs = Vec::with_capacity(args.image.len());
    for (image, mask) in args.image.iter().zip(&args.mask) {
        let img = load_image(image).with_context(|| format!("loading {}", image.display()))?;
        let mask_img = load_image(mask).with_context(|| format!("loading {}", mask.display()))?;
        let map = run_detect(&img, &model)?;
        let truth = mask_to_ground_truth(&mask_img, window, args.coverage)?;
        let counts = DetectionCounts::tally(&map, &truth)?;
        if args.image.len() > 1 {
            println!("{}: DR={:.2}", image.display(), counts.rate()?);
        }
        runs.push(counts);
    }
    println!("DR={:.2}", pooled_detection_rate(&runs)?);
    if runs.len() > 1 {
        println!("macro DR={:.2}", macro_detection_rate(&runs)?);
    }
    Ok(())
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}.png"),
    };
    out.with_file_name(name)
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let img = synth_texture(args.texture, args.period, args.size, args.noise, args.seed)?;
    if let Some(region) = args.defect {
        let (defected, mask) = inject_defect(&img, region, args.kind, args.seed)?;
        let defect_out = args
            .defect_out
            .unwrap_or_else(|| sibling(&args.out, "defect"));
        let mask_out = args.mask_out.unwrap_or_else(|| sibling(&args.out, "mask"));
        img.save(&args.out)?;
        defected.save(&defect_out)?;
        mask.save(&mask_out)?;
        println!(
            "wrote {}, {}, {}",
            args.out.display(),
            defect_out.display(),
            mask_out.display()
        );
    } else {
        img.save(&args.out)?;
        println!("wrote {}", args.out.display());
    }
    Ok(())
}
