//! Sample sets, their normalisation regimes, and generators for the planted
//! hidden-set distributions and their worst-case counterparts.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, invalid, CsvErrorKind, Error, Result};
use crate::rng;

/// Squared row norms may exceed 1 by this much before an `L2` row is flagged;
/// rows built from `d` entries of magnitude `1/sqrt(d)` round to just above 1.
const L2_SLACK: f64 = 1e-12;

/// Which normalisation the features obey.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormRegime {
    /// Every `|X_ij| <= 1` and `|y_i| <= 1` (Lasso).
    LInf,
    /// Every row `||x_i||_2 <= 1` and `|y_i| <= 1` (Ridge).
    L2,
}

impl fmt::Display for NormRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormRegime::LInf => "linf",
            NormRegime::L2 => "l2",
        })
    }
}

impl FromStr for NormRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linf" | "lasso" => Ok(NormRegime::LInf),
            "l2" | "ridge" => Ok(NormRegime::L2),
            other => Err(invalid("regime", format!("unknown regime `{other}`"))),
        }
    }
}

/// `N` samples `(x_i, y_i)` stored as an `N x d` design matrix and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    x: Array2<f64>,
    y: Array1<f64>,
    regime: NormRegime,
}

/// A single normalisation violation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Entry { row: usize, col: usize, value: f64 },
    Row { row: usize, norm: f64 },
    Target { row: usize, value: f64 },
}

impl SampleSet {
    /// Checks shapes only; regime constraints are reported by [`validate`](Self::validate).
    pub fn new(x: Array2<f64>, y: Array1<f64>, regime: NormRegime) -> Result<Self> {
        let (n, d) = x.dim();
        ensure(n >= 1, "N", || "need at least one sample".into())?;
        ensure(d >= 1, "d", || "need at least one feature".into())?;
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        Ok(Self { x, y, regime })
    }

    pub fn from_rows(rows: &[Vec<f64>], y: &[f64], regime: NormRegime) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(rows.len() * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        let x = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| invalid("rows", e.to_string()))?;
        Self::new(x, Array1::from(y.to_vec()), regime)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn regime(&self) -> NormRegime {
        self.regime
    }

    /// Every entry or row that breaks the regime constraint. Empty iff valid.
    // negated comparisons so that NaN counts as a violation
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, row) in self.x.rows().into_iter().enumerate() {
            match self.regime {
                NormRegime::LInf => {
                    for (j, &v) in row.iter().enumerate() {
                        if !(v.abs() <= 1.0) {
                            out.push(Violation::Entry {
                                row: i,
                                col: j,
                                value: v,
                            });
                        }
                    }
                }
                NormRegime::L2 => {
                    let sq: f64 = row.iter().map(|v| v * v).sum();
                    if !(sq <= 1.0 + L2_SLACK) {
                        out.push(Violation::Row {
                            row: i,
                            norm: sq.sqrt(),
                        });
                    }
                }
            }
            let yi = self.y[i];
            if !(yi.abs() <= 1.0) {
                out.push(Violation::Target { row: i, value: yi });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Writes the set in the `d,N,regime` / `y,x_0,...` text format with 17
    /// significant digits per value.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "{},{},{}", self.d(), self.n(), self.regime)?;
        for (row, yi) in self.x.rows().into_iter().zip(self.y.iter()) {
            write!(w, "{yi:.16e}")?;
            for v in row {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse_csv(&text).map_err(|(line, kind)| Error::Csv {
            path: path.to_path_buf(),
            line,
            kind,
        })
    }

    /// Parses the text format; errors carry 1-based line numbers.
    pub fn parse_csv(text: &str) -> std::result::Result<Self, (usize, CsvErrorKind)> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines
            .next()
            .ok_or((1, CsvErrorKind::MalformedHeader("empty file".into())))?;
        let fields: Vec<&str> = header.split(',').map(str::trim).collect();
        let bad_header = |why: &str| (hline, CsvErrorKind::MalformedHeader(why.to_string()));
        if fields.len() != 3 {
            return Err(bad_header("expected `d,N,regime`"));
        }
        let d: usize = fields[0].parse().map_err(|_| bad_header("d is not an integer"))?;
        let n: usize = fields[1].parse().map_err(|_| bad_header("N is not an integer"))?;
        let regime: NormRegime = fields[2]
            .parse()
            .map_err(|_| bad_header("regime must be `linf` or `l2`"))?;
        if d == 0 || n == 0 {
            return Err(bad_header("d and N must be positive"));
        }

        let mut x = Vec::with_capacity(n * d);
        let mut y = Vec::with_capacity(n);
        let mut rows = 0usize;
        for (lineno, line) in lines {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != d + 1 {
                return Err((
                    lineno,
                    CsvErrorKind::RowLength {
                        expected: d + 1,
                        found: cells.len(),
                    },
                ));
            }
            if rows == n {
                return Err((
                    lineno,
                    CsvErrorKind::RowCount {
                        expected: n,
                        found: rows + 1,
                    },
                ));
            }
            for (k, cell) in cells.iter().enumerate() {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| (lineno, CsvErrorKind::NonNumeric(cell.to_string())))?;
                if k == 0 {
                    y.push(v);
                } else {
                    x.push(v);
                }
            }
            rows += 1;
        }
        if rows != n {
            let last = text.lines().count().max(1);
            return Err((
                last,
                CsvErrorKind::RowCount {
                    expected: n,
                    found: rows,
                },
            ));
        }
        let x = Array2::from_shape_vec((n, d), x).expect("shape checked row by row");
        Ok(Self {
            x,
            y: Array1::from(y),
            regime,
        })
    }
}

/// A bias `p` held as an exact fraction so that `pN` integrality is decidable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bias {
    pub num: u64,
    pub den: u64,
}

impl Bias {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        ensure(den > 0, "p", || "denominator must be positive".into())?;
        Ok(Self { num, den })
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `p * n` when it is an integer.
    pub fn times(self, n: usize) -> Option<u64> {
        let prod = self.num.checked_mul(n as u64)?;
        (prod % self.den == 0).then_some(prod / self.den)
    }
}

impl fmt::Display for Bias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Bias {
    type Err = Error;

    /// Accepts `a/b` or a terminating decimal such as `0.05`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || invalid("p", format!("`{s}` is not a fraction or decimal"));
        if let Some((a, b)) = s.split_once('/') {
            let num = a.trim().parse().map_err(|_| bad())?;
            let den = b.trim().parse().map_err(|_| bad())?;
            return Bias::new(num, den);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac_val: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int.checked_mul(den).and_then(|v| v.checked_add(frac_val)).ok_or_else(bad)?;
        let g = gcd(num, den);
        Bias::new(num / g, den / g)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Parameters of a planted distribution together with its hidden set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenSetInstance {
    pub d: usize,
    pub p: f64,
    pub planted: Vec<usize>,
    pub regime: NormRegime,
    pub seed: u64,
}

impl HiddenSetInstance {
    pub fn w(&self) -> usize {
        self.planted.len()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.planted.binary_search(&j).is_ok()
    }
}

/// Uniform `w`-subset of `0..d`: the first `w` slots of a seeded Fisher-Yates
/// shuffle, returned sorted.
pub fn choose_hidden_set(d: usize, w: usize, seed: u64) -> Result<Vec<usize>> {
    ensure(w <= d, "w", || format!("w = {w} exceeds d = {d}"))?;
    let mut rng = rng::stream(seed, &[rng::DOMAIN_HIDDEN_SET]);
    let mut perm: Vec<usize> = (0..d).collect();
    for i in 0..w {
        let k = rng.gen_range(i..d);
        perm.swap(i, k);
    }
    let mut set = perm[..w].to_vec();
    set.sort_unstable();
    Ok(set)
}

fn check_planted(d: usize, planted: &[usize]) -> Result<Vec<usize>> {
    let mut set = planted.to_vec();
    set.sort_unstable();
    set.dedup();
    ensure(set.len() == planted.len(), "W", || "indices must be distinct".into())?;
    if let Some(&j) = set.last() {
        if j >= d {
            return Err(Error::IndexOutOfRange { index: j, len: d });
        }
    }
    Ok(set)
}

fn membership(d: usize, planted: &[usize]) -> Vec<bool> {
    let mut inside = vec![false; d];
    for &j in planted {
        inside[j] = true;
    }
    inside
}

/// Fills `x` column by column with `value` or `-value`, taking `value` with
/// probability `prob`. Each column draws from its own substream.
fn fill_sign_columns(x: &mut Array2<f64>, seed: u64, lean: impl Fn(usize) -> (f64, f64)) {
    for j in 0..x.ncols() {
        let (value, prob) = lean(j);
        let mut rng = rng::stream(seed, &[rng::DOMAIN_COLUMNS, j as u64]);
        for v in x.column_mut(j) {
            *v = if rng.gen_bool(prob) { value } else { -value };
        }
    }
}

/// `m` samples from the Lasso planted distribution with a seeded random `W`.
pub fn gen_lasso_hidden(d: usize, w: usize, p: f64, m: usize, seed: u64) -> Result<(SampleSet, HiddenSetInstance)> {
    let planted = choose_hidden_set(d, w, seed)?;
    gen_lasso_hidden_with(d, &planted, p, m, seed)
}

/// `m` samples from the Lasso planted distribution with a caller-supplied `W`:
/// planted columns are `+1` with probability `1/2 + p`, the others are fair
/// signs, and `y = 1` always.
pub fn gen_lasso_hidden_with(d: usize, planted: &[usize], p: f64, m: usize, seed: u64) -> Result<(SampleSet, HiddenSetInstance)> {
    ensure(d >= 1, "d", || "must be at least 1".into())?;
    ensure(p > 0.0 && p < 0.5, "p", || format!("{p} not in (0, 1/2)"))?;
    ensure(m >= 1, "M", || "must be at least 1".into())?;
    let planted = check_planted(d, planted)?;
    let inside = membership(d, &planted);
    let mut x = Array2::zeros((m, d));
    fill_sign_columns(&mut x, seed, |j| (1.0, if inside[j] { 0.5 + p } else { 0.5 }));
    let set = SampleSet::new(x, Array1::ones(m), NormRegime::LInf)?;
    Ok((
        set,
        HiddenSetInstance {
            d,
            p,
            planted,
            regime: NormRegime::LInf,
            seed,
        },
    ))
}

/// `m` samples from the Ridge planted distribution with a seeded random `W`.
pub fn gen_ridge_hidden(d: usize, w: usize, p: f64, m: usize, seed: u64) -> Result<(SampleSet, HiddenSetInstance)> {
    let planted = choose_hidden_set(d, w, seed)?;
    gen_ridge_hidden_with(d, &planted, p, m, seed)
}

/// Ridge planted distribution: entries are `+-1/sqrt(d)`; planted columns
/// lean positive and the rest lean negative, each with probability `1/2 + p`.
pub fn gen_ridge_hidden_with(d: usize, planted: &[usize], p: f64, m: usize, seed: u64) -> Result<(SampleSet, HiddenSetInstance)> {
    ensure(d >= 1, "d", || "must be at least 1".into())?;
    ensure(p > 0.0 && p < 0.25, "p", || format!("{p} not in (0, 1/4)"))?;
    ensure(m >= 1, "M", || "must be at least 1".into())?;
    let planted = check_planted(d, planted)?;
    let inside = membership(d, &planted);
    let scale = 1.0 / (d as f64).sqrt();
    let mut x = Array2::zeros((m, d));
    fill_sign_columns(&mut x, seed, |j| (if inside[j] { scale } else { -scale }, 0.5 + p));
    let set = SampleSet::new(x, Array1::ones(m), NormRegime::L2)?;
    Ok((
        set,
        HiddenSetInstance {
            d,
            p,
            planted,
            regime: NormRegime::L2,
            seed,
        },
    ))
}

/// Which worst-case column-sum family a matrix belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorstCaseVariant {
    /// `+-1` entries; planted column sums `2pN`, others `0`.
    Wsf,
    /// `+-1/sqrt(d)` entries; planted sums `+2pN/sqrt(d)`, others `-2pN/sqrt(d)`.
    Wssf,
}

impl FromStr for WorstCaseVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wsf" => Ok(Self::Wsf),
            "wssf" => Ok(Self::Wssf),
            other => Err(invalid("variant", format!("unknown variant `{other}`"))),
        }
    }
}

/// A fixed matrix whose column sums reveal the planted set exactly.
///
/// Stored column-major as signs; the entry value is `sign * scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseMatrix {
    n: usize,
    columns: Vec<Vec<i8>>,
    scale: f64,
    planted: Vec<usize>,
    bias: Bias,
    variant: WorstCaseVariant,
}

impl WorstCaseMatrix {
    /// Builds a matrix from explicit `+-1` columns. Used for degenerate test
    /// inputs; column sums are not checked.
    pub fn from_sign_columns(columns: Vec<Vec<i8>>, planted: Vec<usize>, bias: Bias, variant: WorstCaseVariant) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        ensure(n >= 1 && columns.iter().all(|c| c.len() == n), "columns", || {
            "columns must be non-empty and of equal length".into()
        })?;
        ensure(
            columns.iter().flatten().all(|&s| s == 1 || s == -1),
            "columns",
            || "entries must be +1 or -1".into(),
        )?;
        let d = columns.len();
        let planted = check_planted(d, &planted)?;
        let scale = match variant {
            WorstCaseVariant::Wsf => 1.0,
            WorstCaseVariant::Wssf => 1.0 / (d as f64).sqrt(),
        };
        Ok(Self {
            n,
            columns,
            scale,
            planted,
            bias,
            variant,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn planted(&self) -> &[usize] {
        &self.planted
    }

    pub fn bias(&self) -> Bias {
        self.bias
    }

    pub fn variant(&self) -> WorstCaseVariant {
        self.variant
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        f64::from(self.columns[j][i]) * self.scale
    }

    pub fn sign_column(&self, j: usize) -> &[i8] {
        &self.columns[j]
    }

    /// Column sum in units of `scale`; exact.
    pub fn column_sign_sum(&self, j: usize) -> i64 {
        self.columns[j].iter().map(|&s| i64::from(s)).sum()
    }

    pub fn column_sum(&self, j: usize) -> f64 {
        self.column_sign_sum(j) as f64 * self.scale
    }

    pub fn to_sample_set(&self) -> SampleSet {
        let regime = match self.variant {
            WorstCaseVariant::Wsf => NormRegime::LInf,
            WorstCaseVariant::Wssf => NormRegime::L2,
        };
        let x = Array2::from_shape_fn((self.n, self.d()), |(i, j)| self.entry(i, j));
        SampleSet::new(x, Array1::ones(self.n), regime).expect("non-empty by construction")
    }
}

/// A worst-case matrix with a seeded random planted set of size `w`.
pub fn gen_worst_case(d: usize, w: usize, bias: Bias, n: usize, variant: WorstCaseVariant, seed: u64) -> Result<WorstCaseMatrix> {
    let planted = choose_hidden_set(d, w, seed)?;
    gen_worst_case_with(d, &planted, bias, n, variant, seed)
}

/// Each column is a uniformly random arrangement with a prescribed number of
/// `+1` entries: `N/2 + pN` for planted columns, and `N/2` (WSF) or
/// `N/2 - pN` (WSSF) for the rest.
pub fn gen_worst_case_with(d: usize, planted: &[usize], bias: Bias, n: usize, variant: WorstCaseVariant, seed: u64) -> Result<WorstCaseMatrix> {
    ensure(d >= 1, "d", || "must be at least 1".into())?;
    ensure(n >= 2 && n.is_multiple_of(2), "N", || format!("N = {n} must be even and positive"))?;
    ensure(bias.num * 2 < bias.den, "p", || format!("p = {bias} not in [0, 1/2)"))?;
    let pn = bias
        .times(n)
        .ok_or_else(|| invalid("p", format!("pN = {bias} * {n} is not an integer")))? as usize;
    let planted = check_planted(d, planted)?;
    let inside = membership(d, &planted);
    let half = n / 2;
    let columns = (0..d)
        .map(|j| {
            let ones = match (inside[j], variant) {
                (true, _) => half + pn,
                (false, WorstCaseVariant::Wsf) => half,
                (false, WorstCaseVariant::Wssf) => half - pn,
            };
            let mut col: Vec<i8> = (0..n).map(|i| if i < ones { 1 } else { -1 }).collect();
            let mut rng = rng::stream(seed, &[rng::DOMAIN_COLUMNS, j as u64]);
            col.shuffle(&mut rng);
            col
        })
        .collect();
    WorstCaseMatrix::from_sign_columns(columns, planted, bias, variant)
}

/// Output of the resampling reduction.
#[derive(Debug, Clone)]
pub struct AverageCaseSample {
    pub sample: SampleSet,
    /// Distinct entries of each source column that were read; one X-oracle
    /// query each.
    pub distinct_reads: Vec<usize>,
}

impl AverageCaseSample {
    pub fn total_reads(&self) -> usize {
        self.distinct_reads.iter().sum()
    }
}

/// Turns a worst-case matrix into `m` i.i.d. planted samples by drawing every
/// entry `X'_ij = X[R_ij, j]` with `R_ij` uniform over the rows.
pub fn worst_to_average(xw: &WorstCaseMatrix, m: usize, seed: u64) -> Result<AverageCaseSample> {
    let identity: Vec<usize> = (0..xw.d()).collect();
    resample_columns(xw, m, &identity, seed)
}

/// As [`worst_to_average`], but column `j` of the output resamples source
/// column `source[j]`. `source` must be a permutation of `0..d`.
pub fn resample_columns(xw: &WorstCaseMatrix, m: usize, source: &[usize], seed: u64) -> Result<AverageCaseSample> {
    ensure(m >= 1, "M", || "must be at least 1".into())?;
    let d = xw.d();
    if source.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: source.len(),
        });
    }
    let mut x = Array2::zeros((m, d));
    let mut distinct_reads = vec![0usize; d];
    let mut seen = vec![false; xw.n()];
    for (j, &src) in source.iter().enumerate() {
        if src >= d {
            return Err(Error::IndexOutOfRange { index: src, len: d });
        }
        let col = xw.sign_column(src);
        let mut rng = rng::stream(seed, &[rng::DOMAIN_RESAMPLE, j as u64]);
        seen.iter_mut().for_each(|s| *s = false);
        let mut reads = 0;
        for v in x.column_mut(j) {
            let r = rng.gen_range(0..xw.n());
            if !seen[r] {
                seen[r] = true;
                reads += 1;
            }
            *v = f64::from(col[r]) * xw.scale();
        }
        distinct_reads[src] = reads;
    }
    let regime = match xw.variant() {
        WorstCaseVariant::Wsf => NormRegime::LInf,
        WorstCaseVariant::Wssf => NormRegime::L2,
    };
    Ok(AverageCaseSample {
        sample: SampleSet::new(x, Array1::ones(m), regime)?,
        distinct_reads,
    })
}

/// Uniform generalisation gap bound for the regime, logs in base 2:
/// `4 sqrt(2 log(2d)/N) + 4 sqrt(log(1/delta)/(2N))` for `LInf`,
/// `8 sqrt(1/N) + 4 sqrt(log(1/delta)/(2N))` for `L2`.
pub fn generalization_gap_bound(n: usize, d: usize, delta: f64, regime: NormRegime) -> Result<f64> {
    ensure(n >= 1, "N", || "must be at least 1".into())?;
    ensure(d >= 1, "d", || "must be at least 1".into())?;
    ensure(delta > 0.0 && delta <= 1.0, "delta", || format!("{delta} not in (0, 1]"))?;
    let n = n as f64;
    let confidence = 4.0 * ((1.0 / delta).log2() / (2.0 * n)).sqrt();
    let complexity = match regime {
        NormRegime::LInf => 4.0 * (2.0 * (2.0 * d as f64).log2() / n).sqrt(),
        NormRegime::L2 => 8.0 * (1.0 / n).sqrt(),
    };
    Ok(complexity + confidence)
}
