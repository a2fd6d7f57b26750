use std::fmt::Display;
use std::fs;
use std::path::Path;

use leml::closed_form::{closed_form_squared_full, cplst_solution};
use leml::io::{self, Dataset, LabelData, ReadOptions};
use leml::metrics::{average_auc, hamming_loss, top_k_accuracy};
use leml::train::{predict_scores, predict_topk, train};
use leml::{DenseMatrix, Error, FactorModel, LossKind, Result, SparseRowMatrix, TrainConfig};

use crate::{ClosedFormArgs, Cli, Command, EvalArgs, MaskArgs, PredictArgs, TrainArgs};

/// Echoes the resolved configuration as `key=value` lines on stderr.
struct Echo(Vec<(&'static str, String)>);

impl Echo {
    fn new(command: &str, cli: &Cli) -> Self {
        Self(vec![
            ("command", command.to_string()),
            ("threads", cli.threads.to_string()),
            ("index_base", cli.index_base.to_string()),
        ])
    }

    fn set(mut self, key: &'static str, value: impl Display) -> Self {
        self.0.push((key, value.to_string()));
        self
    }

    fn opt(self, key: &'static str, value: Option<impl Display>) -> Self {
        match value {
            Some(v) => self.set(key, v),
            None => self.set(key, "none"),
        }
    }

    fn print(self) {
        for (k, v) in self.0 {
            eprintln!("{k}={v}");
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Train(a) => cmd_train(cli, a),
        Command::Predict(a) => cmd_predict(cli, a),
        Command::Eval(a) => cmd_eval(cli, a),
        Command::Mask(a) => cmd_mask(cli, a),
        Command::ClosedForm(a) => cmd_closed_form(cli, a),
    }
}

fn read_data(cli: &Cli, path: &Path, model: Option<&FactorModel>) -> Result<Dataset> {
    let opts = ReadOptions {
        index_base: cli.index_base,
        features: model.map(|m| m.n_features()),
        labels: model.map(|m| m.n_labels()),
    };
    io::read_multilabel(path, &opts)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn require_full<'a>(data: &'a Dataset, what: &str) -> Result<&'a SparseRowMatrix> {
    data.full_labels().ok_or_else(|| {
        Error::InvalidArgument(format!(
            "{what} needs fully labelled data, but the file lists observed label cells"
        ))
    })
}

fn cmd_train(cli: &Cli, a: &TrainArgs) -> Result<()> {
    let config = TrainConfig {
        outer_iters: a.iters,
        cg_tol: a.cg_tol,
        tron_tol: a.tron_tol,
        seed: a.seed,
        mode: a.mode,
        threads: cli.threads as usize,
        ..TrainConfig::new(a.rank, a.lambda, a.loss)
    };
    Echo::new("train", cli)
        .set("data", a.data.display())
        .set("rank", config.k)
        .set("lambda", config.lambda)
        .set("loss", config.loss)
        .set("iters", config.outer_iters)
        .set("seed", config.seed)
        .set("mode", config.mode)
        .set("cg_tol", config.cg_tol)
        .set("tron_tol", config.tron_tol)
        .set("inner_max_iter", config.inner_max_iter)
        .set("init_scale", config.effective_init_scale())
        .set("out", a.out.display())
        .opt("trace", a.trace.as_ref().map(|p| p.display()))
        .print();

    let data = read_data(cli, &a.data, None)?;
    let (model, trace) = train(&config, &data.x, data.label_view())?;
    io::write_model(&a.out, &model, None)?;
    if let Some(path) = &a.trace {
        write_file(path, &trace.to_lines())?;
    }
    if let Some(last) = trace.steps.last() {
        log::info!("final objective {:.10e}", last.objective);
    }
    Ok(())
}

fn cmd_predict(cli: &Cli, a: &PredictArgs) -> Result<()> {
    Echo::new("predict", cli)
        .set("model", a.model.display())
        .set("data", a.data.display())
        .opt("topk", a.topk)
        .set("scores_out", a.scores_out.display())
        .print();

    let model = io::read_model(&a.model)?;
    let data = read_data(cli, &a.data, Some(&model))?;
    let mut out = String::new();
    match a.topk {
        Some(k) => {
            for row in predict_topk(&model, &data.x, k)? {
                let idx: Vec<String> = row.iter().map(|j| (j + cli.index_base).to_string()).collect();
                out.push_str(&idx.join(","));
                out.push('\n');
            }
        }
        None => {
            let scores = predict_scores(&model, &data.x)?;
            for i in 0..scores.rows() {
                let row: Vec<String> = scores.row(i).iter().map(|v| v.to_string()).collect();
                out.push_str(&row.join("\t"));
                out.push('\n');
            }
        }
    }
    write_file(&a.scores_out, &out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Metric {
    Top(usize),
    Hamming,
    Auc,
}

fn parse_metrics(list: &str) -> Result<Vec<(String, Metric)>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| {
            let metric = match name {
                "top1" => Metric::Top(1),
                "top3" => Metric::Top(3),
                "top5" => Metric::Top(5),
                "hamming" => Metric::Hamming,
                "auc" => Metric::Auc,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown metric '{other}', expected top1, top3, top5, hamming or auc"
                    )))
                }
            };
            Ok((name.to_string(), metric))
        })
        .collect()
}

fn cmd_eval(cli: &Cli, a: &EvalArgs) -> Result<()> {
    let metrics = parse_metrics(&a.metrics)?;
    if metrics.is_empty() {
        return Err(Error::InvalidArgument("no metrics requested".into()));
    }
    let model = io::read_model(&a.model)?;
    let threshold = a.threshold.unwrap_or_else(|| model.kind.default_threshold());
    Echo::new("eval", cli)
        .set("model", a.model.display())
        .set("data", a.data.display())
        .set("metrics", &a.metrics)
        .set("threshold", threshold)
        .print();

    let data = read_data(cli, &a.data, Some(&model))?;
    let y = require_full(&data, "eval")?;
    let scores = predict_scores(&model, &data.x)?;
    for (name, metric) in metrics {
        let value = match metric {
            Metric::Top(k) => top_k_accuracy(&scores, y, k)?,
            Metric::Hamming => hamming_loss(&scores, y, threshold)?,
            Metric::Auc => {
                let (auc, skipped) = average_auc(&scores, y)?;
                if skipped > 0 {
                    log::warn!("{skipped} instances without both positive and negative labels were left out of the AUC");
                }
                auc
            }
        };
        println!("{name}\t{value}");
    }
    Ok(())
}

fn cmd_mask(cli: &Cli, a: &MaskArgs) -> Result<()> {
    Echo::new("mask", cli)
        .set("data", a.data.display())
        .set("ratio", a.ratio)
        .set("seed", a.seed)
        .set("out", a.out.display())
        .print();

    let data = read_data(cli, &a.data, None)?;
    let y = require_full(&data, "mask")?;
    let omega = io::make_mask(y, a.ratio, a.seed)?;
    log::info!("revealed {} of {} label cells", omega.len(), y.rows() * y.cols());
    let masked = Dataset {
        x: data.x.clone(),
        labels: LabelData::Missing(omega),
    };
    io::write_multilabel(&a.out, &masked, cli.index_base)
}

fn cmd_closed_form(cli: &Cli, a: &ClosedFormArgs) -> Result<()> {
    Echo::new("closed-form", cli)
        .set("data", a.data.display())
        .set("rank", a.rank)
        .set("out", a.out.display())
        .set("compare_cplst", a.compare_cplst)
        .print();

    let data = read_data(cli, &a.data, None)?;
    let y = require_full(&data, "closed-form")?;
    let sol = closed_form_squared_full(&data.x, y, a.rank)?;
    if sol.tie_at_rank {
        log::warn!("singular values tie at rank {}; the solution is not unique", a.rank);
    }
    let labels = y.cols();
    let model = FactorModel::new(sol.z.clone(), DenseMatrix::identity(labels), LossKind::Squared, 0.0)?;
    let note = format!(
        "closed-form squared-loss solution of rank <= {}: W stores Z ({} x {labels}), H is the {labels} x {labels} identity",
        a.rank,
        data.n_features()
    );
    io::write_model(&a.out, &model, Some(&note))?;

    if a.compare_cplst {
        let other = cplst_solution(&data.x, y, a.rank)?;
        let gap = sol.z.sub(&other.z)?.frobenius_norm();
        println!("cplst_gap\t{gap:e}");
    }
    Ok(())
}
