use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use asymdetect::dataset::{generate_dataset, read_dataset, DatasetConfig, MANIFEST_FILE};
use asymdetect::epidemic::NetworkModel;
use asymdetect::eval::{evaluate, Aggregate, Scorer};
use asymdetect::features::{compute_features, normalize_features};
use asymdetect::gcn::{train as train_gcn, AdamConfig, Checkpoint, GraphSample, TrainConfig, TrainHistory};
use rayon::prelude::*;

use crate::run::Run;
use crate::{EvalArgs, GenerateArgs, ModelKind, TrainArgs};

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let model = match args.model {
        ModelKind::Ba => NetworkModel::Ba { m: args.m },
        ModelKind::Ws => NetworkModel::Ws { k: args.k, p: args.p },
    };
    let mut cfg = DatasetConfig::new(model, args.nodes, args.instances, args.theta, args.seed);
    cfg.spec.beta_choices = args.betas.clone();
    cfg.spec.stop_fraction = args.stop_fraction;
    cfg.validate().context("invalid dataset configuration")?;

    let mut run = Run::start("generate", Some(&args.out), args, Some(args.seed))?;
    let manifest = generate_dataset(&cfg, &run.dir)?;
    run.artifact(MANIFEST_FILE);
    for file in &manifest.files {
        run.artifact(file.path.clone());
    }
    let dir = run.finish()?;
    eprintln!("wrote {} instances to {}", cfg.instance_count, dir.display());
    Ok(())
}

fn write_history(path: &Path, history: &TrainHistory) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(out, "epoch,loss,validation_auc")?;
    for (i, loss) in history.epoch_loss.iter().enumerate() {
        let epoch = i + 1;
        let auc = history
            .validations
            .iter()
            .find(|v| v.epoch == epoch)
            .and_then(|v| v.auc)
            .map(|a| a.to_string())
            .unwrap_or_default();
        writeln!(out, "{epoch},{loss},{auc}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let cfg = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch,
        hidden: args.hidden,
        validation_every: args.validation_every,
        validation_fraction: args.val_fraction,
        adam: AdamConfig {
            lr: args.lr,
            ..AdamConfig::default()
        },
        seed: args.seed,
    };
    cfg.validate().context("invalid training configuration")?;

    let (manifest, reader) =
        read_dataset(&args.dataset).with_context(|| format!("opening dataset {}", args.dataset.display()))?;
    let mut run = Run::start("train", args.out.as_deref(), args, Some(args.seed))?;
    run.input(&args.dataset.join(MANIFEST_FILE))?;
    let instances = reader.collect::<Result<Vec<_>, _>>()?;
    eprintln!(
        "loaded {} instances ({} nodes, theta {})",
        instances.len(),
        manifest.config.spec.n,
        manifest.config.spec.theta
    );
    let samples = instances
        .par_iter()
        .map(GraphSample::from_instance)
        .collect::<Result<Vec<_>, _>>()?;
    drop(instances);

    let outcome = train_gcn(&samples, &cfg)?;
    let best = outcome
        .history
        .validations
        .iter()
        .find(|v| v.epoch == outcome.history.best_epoch)
        .and_then(|v| v.auc);
    let history_path = run.artifact("history.csv");
    write_history(&history_path, &outcome.history)?;
    let checkpoint = Checkpoint::new(outcome.model, cfg, outcome.history);
    checkpoint.save(&run.artifact("checkpoint.json"))?;
    let dir = run.finish()?;
    match best {
        Some(auc) => eprintln!(
            "selected epoch {} (validation AUC {auc:.4}); outputs in {}",
            checkpoint.history.best_epoch,
            dir.display()
        ),
        None => eprintln!("no validation AUC was defined; kept the final epoch; outputs in {}", dir.display()),
    }
    Ok(())
}

/// Dataset directories directly under `root`, in name order.
fn sweep_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(root).with_context(|| format!("listing {}", root.display()))? {
        let path = entry?.path();
        if path.join(MANIFEST_FILE).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    if dirs.is_empty() {
        bail!("no dataset directories under {}", root.display());
    }
    Ok(dirs)
}

/// File-name-safe label per dataset, unique within the run.
fn labels(dirs: &[PathBuf]) -> Vec<String> {
    let mut seen: Vec<String> = Vec::new();
    for dir in dirs {
        let base: String = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
            .collect();
        let mut label = base.clone();
        let mut i = 2;
        while seen.contains(&label) {
            label = format!("{base}-{i}");
            i += 1;
        }
        seen.push(label);
    }
    seen
}

fn dump_features(dir: &Path, out: &Path, label: &str, count: usize) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let (_, reader) = read_dataset(dir)?;
    for (i, inst) in reader.take(count).enumerate() {
        let inst = inst?;
        let raw = compute_features(&inst.graph, &inst.observed);
        for (kind, matrix) in [("raw", &raw), ("normalized", &normalize_features(&raw))] {
            let path = out.join(format!("{label}.{i}.{kind}.csv"));
            let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            matrix.write_csv(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn write_summary(path: &Path, rows: &[Aggregate]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(
        out,
        "dataset,method,n,theta,instances,auc_undefined,auc_mean,auc_std,top_k_mean,top_k_std,top_fraction"
    )?;
    for a in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            a.dataset,
            a.method,
            a.n,
            a.theta,
            a.instances,
            a.auc_undefined,
            a.auc_mean,
            a.auc_std,
            a.top_k_mean,
            a.top_k_std,
            a.top_fraction
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let dirs = match &args.sweep {
        Some(root) => sweep_dirs(root)?,
        None => args.dataset.clone(),
    };
    let checkpoint = match &args.checkpoint {
        Some(path) => Some(Checkpoint::load(path).with_context(|| format!("loading checkpoint {}", path.display()))?),
        None => None,
    };
    let mut scorers = Vec::new();
    if let Some(ckpt) = &checkpoint {
        scorers.push(Scorer::Model(&ckpt.model));
    }
    if checkpoint.is_none() || args.baseline {
        scorers.push(Scorer::Baseline);
    }
    let names: Vec<String> = scorers.iter().map(|s| s.default_name().to_string()).collect();

    let mut run = Run::start("eval", args.out.as_deref(), args, None)?;
    if let Some(path) = &args.checkpoint {
        run.input(path)?;
    }
    let mut summary = Vec::new();
    for (dir, label) in dirs.iter().zip(labels(&dirs)) {
        let (_, reader) = read_dataset(dir).with_context(|| format!("opening dataset {}", dir.display()))?;
        run.input(&dir.join(MANIFEST_FILE))?;
        if let Some(out) = &args.dump_features {
            dump_features(dir, out, &label, args.dump_count)?;
        }
        let reports = evaluate(&scorers, &names, reader, &label, args.top_fraction)
            .with_context(|| format!("evaluating {}", dir.display()))?;
        for report in reports {
            let a = &report.aggregate;
            let stem = format!("{label}.{}", a.method);
            let csv_path = run.artifact(format!("{stem}.csv"));
            let file = File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
            report.write_csv(BufWriter::new(file))?;
            let json_path = run.artifact(format!("{stem}.json"));
            fs::write(&json_path, serde_json::to_string_pretty(a)? + "\n")
                .with_context(|| format!("writing {}", json_path.display()))?;
            eprintln!(
                "{label} {}: AUC {:.4} ± {:.4}, top-{}% {:.4} ({} instances)",
                a.method,
                a.auc_mean,
                a.auc_std,
                a.top_fraction * 100.0,
                a.top_k_mean,
                a.instances
            );
            summary.push(report.aggregate);
        }
    }
    write_summary(&run.artifact("summary.csv"), &summary)?;
    let dir = run.finish()?;
    eprintln!("outputs in {}", dir.display());
    Ok(())
}
