//! Plain-text datasets, observation masks and model files.
//!
//! A dataset line is `<labels> <fid>:<val> <fid>:<val> ...`. The label field
//! is either a comma-separated list of positive label indices (every other
//! label is a known 0) or a comma-separated list of `j:v` pairs with
//! `v` in {0, 1} (unlisted labels are missing). A line starting with
//! whitespace has an empty label field. Lines starting with `#` are comments,
//! except that a leading `# d=<d> L=<L>` line declares the dimensions.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::matrix::{DenseMatrix, SparseRowMatrix};
use crate::objective::Labels;
use crate::observation::ObservationSet;
use crate::train::FactorModel;

/// Labels as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelData {
    /// Every cell known; stored entries are the positives.
    Full(SparseRowMatrix),
    Missing(ObservationSet),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: SparseRowMatrix,
    pub labels: LabelData,
}

impl Dataset {
    pub fn n_instances(&self) -> usize {
        self.x.rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn n_labels(&self) -> usize {
        match &self.labels {
            LabelData::Full(y) => y.cols(),
            LabelData::Missing(o) => o.n_labels(),
        }
    }

    pub fn label_view(&self) -> Labels<'_> {
        match &self.labels {
            LabelData::Full(y) => Labels::Full(y),
            LabelData::Missing(o) => Labels::Missing(o),
        }
    }

    pub fn full_labels(&self) -> Option<&SparseRowMatrix> {
        match &self.labels {
            LabelData::Full(y) => Some(y),
            LabelData::Missing(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadOptions {
    /// Subtracted from every feature and label index on disk.
    pub index_base: usize,
    /// Overrides the header; without either, inferred as max index + 1.
    pub features: Option<usize>,
    pub labels: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Style {
    Full,
    Missing,
}

struct Parser<'a> {
    path: &'a Path,
    line: usize,
    base: usize,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            msg: msg.into(),
        }
    }

    fn index(&self, tok: &str, what: &str) -> Result<usize> {
        let raw: usize = tok
            .parse()
            .map_err(|_| self.err(format!("invalid {what} index '{tok}'")))?;
        raw.checked_sub(self.base)
            .ok_or_else(|| self.err(format!("{what} index {raw} is below the index base {}", self.base)))
    }

    fn number(&self, tok: &str, what: &str) -> Result<f64> {
        let v: f64 = tok
            .parse()
            .map_err(|_| self.err(format!("invalid {what} '{tok}'")))?;
        if !v.is_finite() {
            return Err(self.err(format!("non-finite {what} '{tok}'")));
        }
        Ok(v)
    }
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let rest = line.strip_prefix('#')?;
    let (mut d, mut l) = (None, None);
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix("d=") {
            d = v.parse().ok();
        } else if let Some(v) = tok.strip_prefix("L=") {
            l = v.parse().ok();
        }
    }
    Some((d?, l?))
}

type Row = (Vec<(usize, f64)>, Vec<(usize, f64)>);

/// Reads a multi-label dataset; errors carry the 1-based line number.
pub fn read_multilabel(path: &Path, opts: &ReadOptions) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_multilabel(&text, path, opts)
}

/// [`read_multilabel`] on in-memory text; `path` only labels errors.
pub fn parse_multilabel(text: &str, path: &Path, opts: &ReadOptions) -> Result<Dataset> {
    let mut p = Parser { path, line: 0, base: opts.index_base };
    let mut header = None;
    let mut style: Option<(Style, usize)> = None;
    let mut rows: Vec<Row> = Vec::new();

    for (no, raw) in text.lines().enumerate() {
        p.line = no + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.starts_with('#') {
            if rows.is_empty() && header.is_none() {
                header = parse_header(line);
            }
            continue;
        }
        let (label_field, rest) = if line.starts_with(char::is_whitespace) || line.is_empty() {
            ("", line)
        } else {
            line.split_once(char::is_whitespace).unwrap_or((line, ""))
        };

        let mut labels = Vec::new();
        if !label_field.is_empty() {
            let line_style = if label_field.contains(':') { Style::Missing } else { Style::Full };
            match style {
                Some((s, first)) if s != line_style => {
                    return Err(p.err(format!(
                        "label style differs from line {first}; full and missing-label lines cannot be mixed"
                    )))
                }
                None => style = Some((line_style, p.line)),
                _ => {}
            }
            for tok in label_field.split(',') {
                match line_style {
                    Style::Full => {
                        if tok.contains(':') {
                            return Err(p.err("mixed label styles within one line"));
                        }
                        labels.push((p.index(tok, "label")?, 1.0));
                    }
                    Style::Missing => {
                        let (j, v) = tok
                            .split_once(':')
                            .ok_or_else(|| p.err("mixed label styles within one line"))?;
                        let v = p.number(v, "label value")?;
                        if v != 0.0 && v != 1.0 {
                            return Err(p.err(format!("label value must be 0 or 1, got {v}")));
                        }
                        labels.push((p.index(j, "label")?, v));
                    }
                }
            }
        }

        let mut feats = Vec::new();
        for tok in rest.split_whitespace() {
            let (f, v) = tok
                .split_once(':')
                .ok_or_else(|| p.err(format!("feature '{tok}' is not <index>:<value>")))?;
            feats.push((p.index(f, "feature")?, p.number(v, "feature value")?));
        }
        for (list, what) in [(&mut labels, "label"), (&mut feats, "feature")] {
            list.sort_by_key(|e| e.0);
            if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(p.err(format!("duplicate {what} index {}", w[0].0 + p.base)));
            }
        }
        rows.push((labels, feats));
    }

    let d = opts.features.or(header.map(|h| h.0)).unwrap_or_else(|| {
        rows.iter().filter_map(|r| r.1.last()).map(|e| e.0 + 1).max().unwrap_or(0)
    });
    let n_labels = opts.labels.or(header.map(|h| h.1)).unwrap_or_else(|| {
        rows.iter().filter_map(|r| r.0.last()).map(|e| e.0 + 1).max().unwrap_or(0)
    });

    let n = rows.len();
    let mut x_trip = Vec::new();
    let mut y_trip = Vec::new();
    for (i, (labels, feats)) in rows.into_iter().enumerate() {
        for (f, v) in feats {
            if f >= d {
                return Err(line_error(path, text, i, format!("feature index {} >= {d} features", f + p.base)));
            }
            x_trip.push((i, f, v));
        }
        for (j, v) in labels {
            if j >= n_labels {
                return Err(line_error(path, text, i, format!("label index {} >= {n_labels} labels", j + p.base)));
            }
            y_trip.push((i, j, v));
        }
    }
    let x = SparseRowMatrix::from_triplets(n, d, x_trip)?;
    let labels = match style.map(|s| s.0) {
        Some(Style::Missing) => LabelData::Missing(ObservationSet::new(n, n_labels, y_trip)?),
        _ => LabelData::Full(SparseRowMatrix::from_triplets(n, n_labels, y_trip)?),
    };
    Ok(Dataset { x, labels })
}

/// Error for the `i`-th data row, located by rescanning the text.
fn line_error(path: &Path, text: &str, i: usize, msg: String) -> Error {
    let line = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#'))
        .nth(i)
        .map_or(0, |(no, _)| no + 1);
    Error::Parse { path: path.to_path_buf(), line, msg }
}

/// Serializes a dataset in the format [`read_multilabel`] reads, with a
/// dimension header and indices shifted by `index_base`.
pub fn format_multilabel(data: &Dataset, index_base: usize) -> String {
    let mut out = format!("# d={} L={}\n", data.n_features(), data.n_labels());
    for i in 0..data.n_instances() {
        let labels: Vec<String> = match &data.labels {
            LabelData::Full(y) => y.row(i).0.iter().map(|j| (j + index_base).to_string()).collect(),
            LabelData::Missing(o) => o
                .row_range(i)
                .map(|p| format!("{}:{}", o.label(p) + index_base, o.value(p)))
                .collect(),
        };
        out.push_str(&labels.join(","));
        let (idx, vals) = data.x.row(i);
        for (f, v) in idx.iter().zip(vals) {
            out.push_str(&format!(" {}:{v}", f + index_base));
        }
        out.push('\n');
    }
    out
}

pub fn write_multilabel(path: &Path, data: &Dataset, index_base: usize) -> Result<()> {
    write_text(path, &format_multilabel(data, index_base))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let io_err = |source| Error::Io { path: path.to_path_buf(), source };
    let mut f = fs::File::create(path).map_err(io_err)?;
    f.write_all(text.as_bytes()).map_err(io_err)
}

/// Reveals `round(ratio * n * L)` cells drawn uniformly without replacement
/// from the full grid; values come from `y` (absent = 0).
pub fn make_mask(y: &SparseRowMatrix, ratio: f64, seed: u64) -> Result<ObservationSet> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidArgument(format!("observed ratio must lie in (0, 1], got {ratio}")));
    }
    let (n, l) = (y.rows(), y.cols());
    let cells = n * l;
    let count = ((ratio * cells as f64).round() as usize).min(cells);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = index::sample(&mut rng, cells, count)
        .into_iter()
        .map(|c| {
            let (i, j) = (c / l, c % l);
            (i, j, if y.get(i, j) != 0.0 { 1.0 } else { 0.0 })
        })
        .collect();
    ObservationSet::new(n, l, entries)
}

const MODEL_MAGIC: &str = "LEML";
const MODEL_VERSION: u32 = 1;

/// Model text: header, `d` rows of `W`, `L` rows of `H`.
///
/// `comment` lines are emitted as `# ...` right after the header.
pub fn format_model(model: &FactorModel, comment: Option<&str>) -> String {
    let mut out = format!(
        "{MODEL_MAGIC} {MODEL_VERSION} {} {} {} {} {}\n",
        model.n_features(),
        model.n_labels(),
        model.rank(),
        model.kind.tag(),
        model.lambda
    );
    if let Some(c) = comment {
        for line in c.lines() {
            out.push_str(&format!("# {line}\n"));
        }
    }
    for m in [&model.w, &model.h] {
        for i in 0..m.rows() {
            let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn write_model(path: &Path, model: &FactorModel, comment: Option<&str>) -> Result<()> {
    write_text(path, &format_model(model, comment))
}

pub fn read_model(path: &Path) -> Result<FactorModel> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_model(&text, path)
}

/// [`read_model`] on in-memory text; `path` only labels errors.
pub fn parse_model(text: &str, path: &Path) -> Result<FactorModel> {
    let err = |msg: String| Error::ModelFormat { path: PathBuf::from(path), msg };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#') && !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err("empty model file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&MODEL_MAGIC) {
        return Err(err(format!("missing '{MODEL_MAGIC}' header")));
    }
    match fields.get(1).map(|v| v.parse::<u32>()) {
        Some(Ok(MODEL_VERSION)) => {}
        Some(Ok(v)) => {
            return Err(err(format!(
                "unsupported model version {v}, expected {MODEL_VERSION}"
            )))
        }
        _ => return Err(err("missing or invalid model version".into())),
    }
    if fields.len() != 7 {
        return Err(err(format!("header needs 7 fields, found {}", fields.len())));
    }
    let dim = |s: &str, what: &str| -> Result<usize> {
        s.parse().map_err(|_| err(format!("invalid {what} '{s}' in header")))
    };
    let (d, l, k) = (dim(fields[2], "d")?, dim(fields[3], "L")?, dim(fields[4], "k")?);
    let kind: LossKind = fields[5].parse().map_err(|e: Error| err(e.to_string()))?;
    let lambda: f64 = fields[6]
        .parse()
        .ok()
        .filter(|v: &f64| v.is_finite() && *v >= 0.0)
        .ok_or_else(|| err(format!("invalid lambda '{}'", fields[6])))?;
    if k == 0 {
        return Err(err("rank k must be at least 1".into()));
    }

    let mut read_block = |rows: usize, name: &str| -> Result<DenseMatrix> {
        let mut values = Vec::with_capacity(rows * k);
        for r in 0..rows {
            let (no, line) = lines.next().ok_or_else(|| {
                err(format!("truncated: {name} has {r} of {rows} rows"))
            })?;
            let before = values.len();
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| err(format!("line {}: invalid number '{tok}'", no + 1)))?;
                values.push(v);
            }
            if values.len() - before != k {
                return Err(err(format!(
                    "line {}: {name} row has {} values, expected k = {k}",
                    no + 1,
                    values.len() - before
                )));
            }
        }
        DenseMatrix::new(rows, k, values).map_err(|e| err(e.to_string()))
    };
    let w = read_block(d, "W")?;
    let h = read_block(l, "H")?;
    if let Some((no, _)) = lines.next() {
        return Err(err(format!("line {}: unexpected data after H", no + 1)));
    }
    FactorModel::new(w, h, kind, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn parse(text: &str) -> Result<Dataset> {
        parse_multilabel(text, Path::new("mem"), &ReadOptions::default())
    }

    fn parse_line_of(err: Error) -> usize {
        match err {
            Error::Parse { line, .. } => line,
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn full_label_line() {
        let opts = ReadOptions { features: Some(6), labels: Some(5), ..ReadOptions::default() };
        let ds = parse_multilabel("1,3 0:2.5 4:1.0\n", Path::new("mem"), &opts).unwrap();
        let y = ds.full_labels().unwrap();
        assert_eq!(y.row(0).0, &[1, 3]);
        assert_eq!(ds.x.to_dense().row(0), &[2.5, 0.0, 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn missing_label_line() {
        let ds = parse("1:1,3:0 0:2.5\n").unwrap();
        match &ds.labels {
            LabelData::Missing(o) => assert_eq!(o.iter().collect::<Vec<_>>(), vec![(0, 1, 1.0), (0, 3, 0.0)]),
            _ => panic!("expected missing labels"),
        }
        assert_eq!((ds.n_features(), ds.n_labels()), (1, 4));
    }

    #[test]
    fn header_and_blank_label_fields() {
        let ds = parse("# d=4 L=3\n 1:1.0\n2 \n").unwrap();
        assert_eq!((ds.n_instances(), ds.n_features(), ds.n_labels()), (2, 4, 3));
        assert_eq!(ds.full_labels().unwrap().nnz(), 1);
        let ds = parse(" 0:1\n1:0 0:1\n").unwrap();
        assert!(matches!(ds.labels, LabelData::Missing(_)));
    }

    #[test]
    fn index_base_shifts() {
        let opts = ReadOptions { index_base: 1, ..ReadOptions::default() };
        let ds = parse_multilabel("1,2 1:0.5 3:1\n", Path::new("mem"), &opts).unwrap();
        assert_eq!(ds.full_labels().unwrap().row(0).0, &[0, 1]);
        assert_eq!(ds.x.row(0).0, &[0, 2]);
        assert!(parse_multilabel("0 1:1\n", Path::new("mem"), &opts).is_err());
    }

    #[test]
    fn malformed_lines_report_their_number() {
        let cases = [
            ("0 0:1\n1:1 0:1\n", 2),
            ("0,1:1 0:1\n", 1),
            ("0,0 0:1\n", 1),
            ("0 0:1 0:2\n", 1),
            ("0 0:x\n", 1),
            ("a 0:1\n", 1),
            ("0 0:1\n0 1\n", 2),
            ("0:2 0:1\n", 1),
            ("0 0:nan\n", 1),
            ("# d=2 L=2\n0 0:1\n\n0 5:1\n", 4),
            ("# d=2 L=2\n0 0:1\n3 1:1\n", 3),
        ];
        for (text, line) in cases {
            let e = parse(text).expect_err(text);
            assert_eq!(parse_line_of(e), line, "{text:?}");
        }
    }

    #[test]
    fn mask_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let y = crate::synth::random_labels(&mut rng, 10, 5, 0.3);
        let all = make_mask(&y, 1.0, 3).unwrap();
        assert!(all.is_full());
        for (i, j, v) in all.iter() {
            assert_eq!(v, y.get(i, j));
        }
        assert_eq!(make_mask(&y, 0.37, 9).unwrap(), make_mask(&y, 0.37, 9).unwrap());
        assert_eq!(make_mask(&y, 0.37, 9).unwrap().len(), 19);
        for bad in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(make_mask(&y, bad, 1).is_err());
        }
    }

    #[test]
    fn mask_inclusion_is_uniform() {
        let y = SparseRowMatrix::zeros(100, 50);
        let mut hits = vec![0u32; 5000];
        for seed in 0..50 {
            let m = make_mask(&y, 0.2, seed).unwrap();
            assert_eq!(m.len(), 1000);
            for (i, j, _) in m.iter() {
                hits[i * 50 + j] += 1;
            }
        }
        let freq: Vec<f64> = hits.iter().map(|&h| h as f64 / 50.0).collect();
        let mean = freq.iter().sum::<f64>() / freq.len() as f64;
        assert!((mean - 0.2).abs() <= 0.02);
        // per-row and per-column inclusion rates pool 2500 and 5000 draws
        for i in 0..100 {
            let r: f64 = freq[i * 50..(i + 1) * 50].iter().sum::<f64>() / 50.0;
            assert!((r - 0.2).abs() < 0.05, "row {i}: {r}");
        }
        for j in 0..50 {
            let c: f64 = (0..100).map(|i| freq[i * 50 + j]).sum::<f64>() / 100.0;
            assert!((c - 0.2).abs() < 0.04, "col {j}: {c}");
        }
    }

    fn random_model(rng: &mut ChaCha8Rng, d: usize, l: usize, k: usize) -> FactorModel {
        let w = DenseMatrix::from_fn(d, k, |_, _| rng.gen::<f64>() * 10f64.powi(rng.gen_range(-30..30)));
        let h = DenseMatrix::from_fn(l, k, |_, _| -rng.gen::<f64>());
        FactorModel::new(w, h, LossKind::Logistic, 0.1).unwrap()
    }

    #[test]
    fn model_round_trip_is_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let model = random_model(&mut rng, 7, 5, 3);
        let text = format_model(&model, Some("note one\nnote two"));
        let back = parse_model(&text, Path::new("mem")).unwrap();
        assert_eq!(back, model);
        let x = crate::synth::random_sparse(&mut rng, 4, 7, 0.5);
        assert_eq!(
            crate::train::predict_scores(&back, &x).unwrap(),
            crate::train::predict_scores(&model, &x).unwrap()
        );
    }

    #[test]
    fn model_errors() {
        let good = "LEML 1 1 1 1 squared 0.5\n3\n4\n";
        let model = parse_model(good, Path::new("mem")).unwrap();
        let x = SparseRowMatrix::from_dense(&DenseMatrix::from_rows(&[[2.0]]));
        assert_eq!(crate::train::predict_scores(&model, &x).unwrap().get(0, 0), 24.0);

        for bad in [
            "LEML 2 1 1 1 squared 0.5\n3\n4\n",
            "LEML 1 1 1 1 squared 0.5\n3\n",
            "LEML 1 1 1 2 squared 0.5\n3\n4\n",
            "LEML 1 2 1 1 squared 0.5\n3\n4\n",
            "LEML 1 1 1 1 hinge 0.5\n3\n4\n",
            "LEML 1 1 1 1 squared 0.5\n3\n4\n5\n",
            "LEML 1 1 1 0 squared 0.5\n",
            "MODEL 1 1 1 1 squared 0.5\n3\n4\n",
            "",
        ] {
            let e = parse_model(bad, Path::new("mem")).expect_err(bad);
            assert!(matches!(e, Error::ModelFormat { .. }), "{bad:?}");
        }
        let e = parse_model("LEML 2 1 1 1 squared 0.5\n", Path::new("mem")).unwrap_err();
        assert!(e.to_string().contains("version"));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = crate::synth::random_sparse(&mut rng, 9, 6, 0.4);
        let y = crate::synth::random_labels(&mut rng, 9, 4, 0.3);
        let full = Dataset { x: x.clone(), labels: LabelData::Full(y.clone()) };
        let path = dir.path().join("full.txt");
        write_multilabel(&path, &full, 0).unwrap();
        assert_eq!(read_multilabel(&path, &ReadOptions::default()).unwrap(), full);

        let masked = Dataset { x, labels: LabelData::Missing(make_mask(&y, 0.3, 1).unwrap()) };
        write_multilabel(&path, &masked, 0).unwrap();
        assert_eq!(read_multilabel(&path, &ReadOptions::default()).unwrap(), masked);

        let model = random_model(&mut rng, 6, 4, 2);
        let mpath = dir.path().join("model.txt");
        write_model(&mpath, &model, None).unwrap();
        assert_eq!(read_model(&mpath).unwrap(), model);
        assert!(matches!(read_model(&dir.path().join("none")), Err(Error::Io { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn random_datasets_round_trip(seed in any::<u64>(), missing in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(0..8);
            let x = crate::synth::random_sparse(&mut rng, n, 5, 0.4);
            let y = crate::synth::random_labels(&mut rng, n, 4, 0.3);
            let labels = if missing && n > 0 {
                LabelData::Missing(make_mask(&y, 0.5, seed).unwrap())
            } else {
                LabelData::Full(y)
            };
            let ds = Dataset { x, labels };
            let back = parse(&format_multilabel(&ds, 0)).unwrap();
            prop_assert_eq!(&back, &ds);
            let opts = ReadOptions { index_base: 1, ..ReadOptions::default() };
            let shifted = parse_multilabel(&format_multilabel(&ds, 1), Path::new("mem"), &opts).unwrap();
            prop_assert_eq!(shifted, ds);
        }

        #[test]
        fn mutated_files_never_panic(seed in any::<u64>(), edits in prop::collection::vec((any::<prop::sample::Index>(), 0u8..128), 1..6)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = crate::synth::random_sparse(&mut rng, 5, 4, 0.5);
            let y = crate::synth::random_labels(&mut rng, 5, 3, 0.4);
            let mut bytes = format_multilabel(&Dataset { x, labels: LabelData::Full(y) }, 0).into_bytes();
            for (at, b) in edits {
                let i = at.index(bytes.len());
                bytes[i] = b;
            }
            let text = String::from_utf8_lossy(&bytes);
            let _ = parse(&text);
            let _ = parse_model(&text, Path::new("mem"));
        }
    }
}
