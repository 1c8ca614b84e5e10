//! File formats. Floats are written with the shortest representation that
//! parses back to the same value, so every numeric artifact round-trips
//! exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use mtnet_core::gibbs::{ChainTrace, Draw, GibbsConfig, ObservationSet};
use mtnet_core::granger::{GrangerSequence, PricePanel};
use mtnet_core::Matrix;

use crate::error::{AppError, Result};

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn parse_f64(path: &Path, line: u64, field: &str, text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| AppError::input(path, format!("line {line}: {field} is not a number: \"{text}\"")))
}

fn parse_usize(path: &Path, line: u64, field: &str, text: &str) -> Result<usize> {
    text.trim()
        .parse::<usize>()
        .map_err(|_| AppError::input(path, format!("line {line}: {field} is not a non-negative integer: \"{text}\"")))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

/// Writes rows of already formatted fields.
pub struct CsvOut {
    path: PathBuf,
    inner: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let file = File::create(path).map_err(|e| AppError::io(path, e))?;
        let mut out = CsvOut {
            path: path.to_path_buf(),
            inner: csv::WriterBuilder::new().from_writer(BufWriter::new(file)),
        };
        out.row(header)?;
        Ok(out)
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields).map_err(|e| self.err(e))
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.inner.flush().map_err(|e| AppError::io(&self.path, e))?;
        Ok(self.path)
    }

    fn err(&self, e: csv::Error) -> AppError {
        AppError::io(&self.path, std::io::Error::other(e.to_string()))
    }
}

fn csv_input_error(path: &Path, e: csv::Error) -> AppError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => AppError::io(path, io),
        other => AppError::input(path, format!("{other:?}")),
    }
}

/// Loads a price panel: a header of series labels and one row per period.
/// A leading column named `date` (any case) is ignored.
pub fn read_panel(path: &Path) -> Result<PricePanel> {
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_input_error(path, e))?.clone();
    let skip_first = headers.get(0).is_some_and(|h| h.eq_ignore_ascii_case("date"));
    let labels: Vec<String> = headers.iter().skip(usize::from(skip_first)).map(str::to_string).collect();
    if labels.is_empty() {
        return Err(AppError::input(path, "no series columns"));
    }
    let mut series = vec![Vec::new(); labels.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_input_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        for (k, field) in rec.iter().skip(usize::from(skip_first)).enumerate() {
            series[k].push(parse_f64(path, line, &labels[k], field)?);
        }
    }
    PricePanel::new(labels, series).map_err(|e| AppError::input(path, e.to_string()))
}

/// `t,row,col,value`, ordered by `t` then column-major within a matrix.
pub fn write_observations(path: &Path, obs: &ObservationSet) -> Result<PathBuf> {
    let mut out = CsvOut::create(path, &["t", "row", "col", "value"])?;
    let n = obs.n();
    for (t, y) in obs.matrices().iter().enumerate() {
        for j in 0..n {
            for i in 0..n {
                out.row([t.to_string(), i.to_string(), j.to_string(), fmt_f64(y[(i, j)])])?;
            }
        }
    }
    out.finish()
}

/// Reads the long format back; every `(t, row, col)` cell must appear
/// exactly once.
pub fn read_observations(path: &Path) -> Result<ObservationSet> {
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_input_error(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "row", "col", "value"] {
        return Err(AppError::input(path, "expected header t,row,col,value"));
    }
    let mut cells = Vec::new();
    let (mut t_max, mut n_max) = (0usize, 0usize);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_input_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let t = parse_usize(path, line, "t", &rec[0])?;
        let i = parse_usize(path, line, "row", &rec[1])?;
        let j = parse_usize(path, line, "col", &rec[2])?;
        let v = parse_f64(path, line, "value", &rec[3])?;
        t_max = t_max.max(t + 1);
        n_max = n_max.max(i.max(j) + 1);
        cells.push((t, i, j, v));
    }
    if cells.is_empty() {
        return Err(AppError::input(path, "no observations"));
    }
    let n = n_max;
    let mut ys = vec![Matrix::zeros(n, n); t_max];
    let mut seen = vec![false; t_max * n * n];
    for (t, i, j, v) in cells {
        let slot = (t * n + j) * n + i;
        if seen[slot] {
            return Err(AppError::input(path, format!("duplicate entry t={t} row={i} col={j}")));
        }
        seen[slot] = true;
        ys[t][(i, j)] = v;
    }
    if let Some(slot) = seen.iter().position(|s| !s) {
        let (t, rest) = (slot / (n * n), slot % (n * n));
        return Err(AppError::input(
            path,
            format!("missing entry t={t} row={} col={}", rest % n, rest / n),
        ));
    }
    ObservationSet::new(n, ys).map_err(|e| AppError::input(path, e.to_string()))
}

/// Sidecar for a Granger sequence: the window end of each `t` and a 0/1
/// flag for pairs whose statistic is a degenerate placeholder.
pub fn write_mask(path: &Path, seq: &GrangerSequence) -> Result<PathBuf> {
    let mut out = CsvOut::create(path, &["t", "window_end", "row", "col", "degenerate"])?;
    for (t, (mask, end)) in seq.masks.iter().zip(&seq.window_ends).enumerate() {
        let n = mask.nrows();
        for j in 0..n {
            for i in 0..n {
                let flag = if mask[(i, j)] != 0.0 { "1" } else { "0" };
                out.row([t.to_string(), end.to_string(), i.to_string(), j.to_string(), flag.to_string()])?;
            }
        }
    }
    out.finish()
}

/// A plain matrix, one CSV row per matrix row, no header.
pub fn write_matrix(path: &Path, m: &Matrix) -> Result<PathBuf> {
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(file));
    for i in 0..m.nrows() {
        w.write_record((0..m.ncols()).map(|j| fmt_f64(m[(i, j)])))
            .map_err(|e| AppError::io(path, std::io::Error::other(e.to_string())))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))?;
    Ok(path.to_path_buf())
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_input_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push(rec.iter().map(|f| parse_f64(path, line, "entry", f)).collect::<Result<_>>()?);
    }
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    Ok(Matrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn trace_path(dir: &Path, chain: usize) -> PathBuf {
    dir.join(format!("trace_chain{chain}.csv"))
}

pub fn b_draws_path(dir: &Path, chain: usize) -> PathBuf {
    dir.join(format!("b_draws_chain{chain}.bin"))
}

const B_MAGIC: &[u8; 4] = b"MTNB";
const B_VERSION: u32 = 1;

/// Writes `draw,sweep,parameter,index,value` rows: `nu`, `gamma`, `beta`
/// with index 0, then `B` entries by column-major index unless `binary`
/// puts them in a little-endian side file.
pub fn write_trace(dir: &Path, chain: usize, trace: &ChainTrace, binary: bool) -> Result<Vec<PathBuf>> {
    let mut out = CsvOut::create(&trace_path(dir, chain), &["draw", "sweep", "parameter", "index", "value"])?;
    for (k, d) in trace.draws.iter().enumerate() {
        let (k, s) = (k.to_string(), d.sweep.to_string());
        for (name, v) in [("nu", d.nu), ("gamma", d.gamma), ("beta", d.beta)] {
            out.row([k.as_str(), s.as_str(), name, "0", &fmt_f64(v)])?;
        }
        if !binary {
            for (idx, v) in d.b.as_slice().iter().enumerate() {
                out.row([k.clone(), s.clone(), "B".into(), idx.to_string(), fmt_f64(*v)])?;
            }
        }
    }
    let mut files = vec![out.finish()?];
    if binary {
        let path = b_draws_path(dir, chain);
        let file = File::create(&path).map_err(|e| AppError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        let n = trace.draws.first().map_or(0, |d| d.b.nrows());
        let mut put = |bytes: &[u8]| w.write_all(bytes);
        let res = (|| {
            put(B_MAGIC)?;
            put(&B_VERSION.to_le_bytes())?;
            put(&(n as u32).to_le_bytes())?;
            put(&(trace.draws.len() as u64).to_le_bytes())?;
            for d in &trace.draws {
                for v in d.b.as_slice() {
                    put(&v.to_le_bytes())?;
                }
            }
            Ok(())
        })();
        res.and_then(|_| w.flush()).map_err(|e| AppError::io(&path, e))?;
        files.push(path);
    }
    Ok(files)
}

fn read_b_draws(path: &Path) -> Result<(usize, Vec<Vec<f64>>)> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file).read_to_end(&mut bytes).map_err(|e| AppError::io(path, e))?;
    if bytes.len() < 20 || &bytes[..4] != B_MAGIC {
        return Err(AppError::input(path, "not a B draws file"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != B_VERSION {
        return Err(AppError::input(path, format!("unsupported B draws version {version}")));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let body = &bytes[20..];
    if body.len() != count * n * n * 8 {
        return Err(AppError::input(path, "B draws file is truncated"));
    }
    let values: Vec<f64> = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let draws = if n == 0 {
        vec![Vec::new(); count]
    } else {
        values.chunks_exact(n * n).map(<[f64]>::to_vec).collect()
    };
    Ok((n, draws))
}

/// Rebuilds a chain written by [`write_trace`]. The sampler configuration
/// is inferred from the recorded sweep indices; the seed and final state
/// are not stored.
pub fn read_trace(dir: &Path, chain: usize) -> Result<ChainTrace> {
    let path = trace_path(dir, chain);
    let mut rdr = csv_reader(&path)?;
    struct Partial {
        sweep: usize,
        nu: Option<f64>,
        gamma: Option<f64>,
        beta: Option<f64>,
        b: Vec<(usize, f64)>,
    }
    let mut rows: Vec<Partial> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_input_error(&path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 5 {
            return Err(AppError::input(&path, format!("line {line}: expected 5 fields")));
        }
        let k = parse_usize(&path, line, "draw", &rec[0])?;
        let sweep = parse_usize(&path, line, "sweep", &rec[1])?;
        let idx = parse_usize(&path, line, "index", &rec[3])?;
        let v = parse_f64(&path, line, "value", &rec[4])?;
        if k == rows.len() {
            rows.push(Partial {
                sweep,
                nu: None,
                gamma: None,
                beta: None,
                b: Vec::new(),
            });
        } else if k + 1 != rows.len() {
            return Err(AppError::input(&path, format!("line {line}: draws out of order")));
        }
        let p = rows.last_mut().unwrap();
        match &rec[2] {
            "nu" => p.nu = Some(v),
            "gamma" => p.gamma = Some(v),
            "beta" => p.beta = Some(v),
            "B" => p.b.push((idx, v)),
            other => return Err(AppError::input(&path, format!("line {line}: unknown parameter \"{other}\""))),
        }
    }
    let bin = b_draws_path(dir, chain);
    let external = if bin.exists() { Some(read_b_draws(&bin)?) } else { None };
    if let Some((_, ref b)) = external {
        if b.len() != rows.len() {
            return Err(AppError::input(&bin, "draw count differs from the trace file"));
        }
    }
    let mut draws = Vec::with_capacity(rows.len());
    for (k, p) in rows.into_iter().enumerate() {
        let missing = |name: &str| AppError::input(&path, format!("draw {k} has no {name}"));
        let values = match &external {
            Some((_, b)) => b[k].clone(),
            None => {
                let mut vals = vec![f64::NAN; p.b.len()];
                for (idx, v) in p.b {
                    *vals.get_mut(idx).ok_or_else(|| missing("consistent B index"))? = v;
                }
                vals
            }
        };
        let n = (values.len() as f64).sqrt().round() as usize;
        if n * n != values.len() || values.iter().any(|v| v.is_nan()) {
            return Err(missing("complete B"));
        }
        draws.push(Draw {
            sweep: p.sweep,
            b: Matrix::from_col_major(n, n, values)?,
            nu: p.nu.ok_or_else(|| missing("nu"))?,
            gamma: p.gamma.ok_or_else(|| missing("gamma"))?,
            beta: p.beta.ok_or_else(|| missing("beta"))?,
        });
    }
    let burn_in = draws.first().map_or(0, |d| d.sweep);
    let thin = if draws.len() > 1 { draws[1].sweep - draws[0].sweep } else { 1 };
    let sweeps = draws.last().map_or(1, |d| d.sweep + 1);
    Ok(ChainTrace {
        config: GibbsConfig {
            sweeps,
            burn_in,
            thin: thin.max(1),
            seed: 0,
        },
        draws,
        final_state: None,
    })
}

/// Number of chains present in a fit directory.
pub fn count_chains(dir: &Path) -> usize {
    (0..).take_while(|&k| trace_path(dir, k).exists()).count()
}
