//! Comparison tables over evaluation results: one row per (size, theta),
//! one column group per method.

use std::fs::{self, File};
use std::path::Path;

use anyhow::{bail, Context, Result};
use asymdetect::eval::{Aggregate, EvalReport};

use crate::run::Run;
use crate::{ReportArgs, TableFormat};

fn load(path: &Path, top_fraction: f64) -> Result<Aggregate> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "json" => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing aggregate {}", path.display()))
        }
        "csv" => {
            let file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
            let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let report = EvalReport::read_csv(file, &label, top_fraction)
                .with_context(|| format!("parsing {}", path.display()))?;
            Ok(report.aggregate)
        }
        _ => bail!("{}: expected an aggregate .json or per-instance .csv file", path.display()),
    }
}

pub struct Table {
    pub methods: Vec<String>,
    /// `(n, theta, cells)` with one optional aggregate per method.
    pub rows: Vec<(usize, f64, Vec<Option<Aggregate>>)>,
    pub top_fraction: f64,
}

impl Table {
    pub fn build(aggregates: Vec<Aggregate>) -> Result<Self> {
        let Some(first) = aggregates.first() else {
            bail!("no results to tabulate");
        };
        let top_fraction = first.top_fraction;
        if let Some(other) = aggregates.iter().find(|a| a.top_fraction != top_fraction) {
            bail!(
                "inconsistent metrics: top-k fraction {} in {} vs {} in {}",
                other.top_fraction,
                other.dataset,
                top_fraction,
                first.dataset
            );
        }
        let mut methods: Vec<String> = Vec::new();
        for a in &aggregates {
            if !methods.contains(&a.method) {
                methods.push(a.method.clone());
            }
        }
        let mut rows: Vec<(usize, f64, Vec<Option<Aggregate>>)> = Vec::new();
        for a in aggregates {
            let col = methods.iter().position(|m| *m == a.method).unwrap();
            let row = match rows.iter().position(|r| r.0 == a.n && r.1 == a.theta) {
                Some(i) => i,
                None => {
                    rows.push((a.n, a.theta, vec![None; methods.len()]));
                    rows.len() - 1
                }
            };
            let cells = &mut rows[row].2;
            cells.resize(methods.len(), None);
            if let Some(prev) = &cells[col] {
                bail!(
                    "two results for {} at n={} theta={} ({} and {})",
                    a.method,
                    a.n,
                    a.theta,
                    prev.dataset,
                    a.dataset
                );
            }
            cells[col] = Some(a);
        }
        for row in &mut rows {
            row.2.resize(methods.len(), None);
        }
        rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        Ok(Table {
            methods,
            rows,
            top_fraction,
        })
    }

    fn top_label(&self) -> String {
        format!("top-{}%", self.top_fraction * 100.0)
    }

    pub fn markdown(&self) -> String {
        let top = self.top_label();
        let mut header = vec!["n".to_string(), "theta".to_string()];
        for m in &self.methods {
            header.push(format!("{m} AUC"));
            header.push(format!("{m} {top}"));
        }
        let mut out = format!("| {} |\n", header.join(" | "));
        out += &format!("|{}\n", "---|".repeat(header.len()));
        for (n, theta, cells) in &self.rows {
            let mut line = vec![n.to_string(), theta.to_string()];
            for cell in cells {
                match cell {
                    Some(a) => {
                        line.push(format!("{:.4} ± {:.4}", a.auc_mean, a.auc_std));
                        line.push(format!("{:.4} ± {:.4}", a.top_k_mean, a.top_k_std));
                    }
                    None => line.extend(["".to_string(), "".to_string()]),
                }
            }
            out += &format!("| {} |\n", line.join(" | "));
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut header = vec!["n".to_string(), "theta".to_string()];
        for m in &self.methods {
            for col in ["auc_mean", "auc_std", "top_k_mean", "top_k_std"] {
                header.push(format!("{m}_{col}"));
            }
        }
        let mut out = header.join(",") + "\n";
        for (n, theta, cells) in &self.rows {
            let mut line = vec![n.to_string(), theta.to_string()];
            for cell in cells {
                match cell {
                    Some(a) => line.extend([a.auc_mean, a.auc_std, a.top_k_mean, a.top_k_std].map(|x| x.to_string())),
                    None => line.extend(std::iter::repeat_n(String::new(), 4)),
                }
            }
            out += &(line.join(",") + "\n");
        }
        out
    }
}

pub fn run(args: &ReportArgs) -> Result<()> {
    let aggregates = args
        .inputs
        .iter()
        .map(|p| load(p, args.top_fraction))
        .collect::<Result<Vec<_>>>()?;
    let table = Table::build(aggregates)?;
    let (text, name) = match args.format {
        TableFormat::Markdown => (table.markdown(), "table.md"),
        TableFormat::Csv => (table.csv(), "table.csv"),
    };
    let mut run = Run::start("report", args.out.as_deref(), args, None)?;
    for input in &args.inputs {
        run.input(input)?;
    }
    let path = run.artifact(name);
    fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    run.finish()?;
    print!("{text}");
    Ok(())
}
