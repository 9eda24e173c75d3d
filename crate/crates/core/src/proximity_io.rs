//! Reading proximity matrices from text.
//!
//! Two layouts are accepted:
//!
//! * **matrix-like**: one matrix row per line, with an optional row of labels
//!   *or* an optional first column of labels (never both);
//! * **list-like**: one `label label value` triple per line. Self-pairs must
//!   not appear; a pair may be given in one or both orders, and when both are
//!   present they must agree.
//!
//! Fields are separated by any of space, tab, `;`, `,` or `|`, and separators
//! may be mixed within a line. Runs of whitespace collapse, but two adjacent
//! non-whitespace separators (`,,`) are rejected as an empty field. Blank lines
//! and lines starting with `#` are skipped.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Characters that separate fields in both input layouts.
pub const SEPARATORS: [char; 5] = [' ', '\t', ';', ',', '|'];

const HARD_SEPARATORS: [char; 3] = [';', ',', '|'];
const SOFT_SEPARATORS: [char; 2] = [' ', '\t'];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProximityError {
    #[error("input contains no data lines")]
    EmptyInput,

    #[error("line {line}: empty field between separators")]
    EmptyField { line: usize },

    #[error("entry ({i}, {j}) = {upper} but ({j}, {i}) = {lower}: matrix is not symmetric")]
    AsymmetricMatrix { i: usize, j: usize, upper: f64, lower: f64 },

    #[error("diagonal entry {0} is not zero")]
    NonZeroDiagonal(usize),

    #[error("line {0}: row length differs from the matrix size")]
    RaggedRows(usize),

    #[error("matrix has {rows} rows but {cols} columns")]
    NotSquare { rows: usize, cols: usize },

    #[error("labels given both as first row and first column")]
    LabelsBothRowAndColumn,

    #[error("line {line}, field {column}: not a finite number")]
    NonNumericCell { line: usize, column: usize },

    #[error("line {0}: distance from a node to itself")]
    SelfDistanceLine(usize),

    #[error("pair ({a}, {b}) given as {first} and as {second}")]
    ConflictingSymmetricPair { a: String, b: String, first: f64, second: f64 },

    #[error("no value for pair ({a}, {b})")]
    MissingPair { a: String, b: String },

    #[error("line {line}: expected 3 fields, found {found}")]
    BadFieldCount { line: usize, found: usize },

    #[error("label {0:?} appears more than once")]
    DuplicateLabel(String),

    #[error("label {0:?} is empty or contains a separator")]
    InvalidLabel(String),

    #[error("at least two nodes are required, found {0}")]
    TooFewNodes(usize),

    #[error("weight ({i}, {j}) = {value} is outside [0, 1]")]
    ValueOutOfUnitInterval { i: usize, j: usize, value: f64 },

    #[error("operation requires weights, data holds distances")]
    NotWeights,
}

/// How proximities relate to closeness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Measure {
    /// Close nodes have small values.
    #[serde(rename = "distances")]
    Distance,
    /// Close nodes have large values.
    #[serde(rename = "weights")]
    Weight,
}

impl Measure {
    /// Factor mapping a reported value into the distance space the engines
    /// work in. Weights are clustered as negated distances.
    pub fn engine_sign(self) -> f64 {
        match self {
            Measure::Distance => 1.0,
            Measure::Weight => -1.0,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Distance => "distances",
            Measure::Weight => "weights",
        })
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "distance" | "distances" => Ok(Measure::Distance),
            "weight" | "weights" => Ok(Measure::Weight),
            other => Err(format!("unknown measure type {other:?} (expected distances or weights)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatKind {
    MatrixLike,
    ListLike,
}

/// A labeled, symmetric proximity matrix.
///
/// Values are stored exactly as read; [`apply_precision`] produces the rounded
/// copy the clustering engines expect. In weight mode the diagonal carries no
/// information and is stored as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityData {
    labels: Vec<String>,
    values: Vec<f64>,
    measure: Measure,
    precision: u32,
    source_decimals: u32,
}

impl ProximityData {
    /// Builds validated data from labels and full rows. The precision is taken
    /// from the shortest decimal rendering of the off-diagonal values.
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>, measure: Measure) -> Result<Self, ProximityError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(ProximityError::RaggedRows(bad + 1));
        }
        let mut values = Vec::with_capacity(n * n);
        let mut decimals = 0;
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(ProximityError::NonNumericCell { line: i + 1, column: j + 1 });
                }
                if i != j {
                    decimals = decimals.max(decimals_of(&format!("{v}")));
                }
                values.push(v);
            }
        }
        Self::validated(labels, values, measure, decimals)
    }

    /// Same as [`ProximityData::new`] with labels `"1"..="n"`.
    pub fn unlabeled(rows: Vec<Vec<f64>>, measure: Measure) -> Result<Self, ProximityError> {
        let labels = (1..=rows.len()).map(|i| i.to_string()).collect();
        Self::new(labels, rows, measure)
    }

    fn validated(labels: Vec<String>, mut values: Vec<f64>, measure: Measure, source_decimals: u32) -> Result<Self, ProximityError> {
        let n = labels.len();
        if n < 2 {
            return Err(ProximityError::TooFewNodes(n));
        }
        debug_assert_eq!(values.len(), n * n);
        let mut seen = HashMap::with_capacity(n);
        for label in &labels {
            if label.is_empty() || label.contains(SEPARATORS) || label.contains(['\n', '\r']) {
                return Err(ProximityError::InvalidLabel(label.clone()));
            }
            if seen.insert(label.as_str(), ()).is_some() {
                return Err(ProximityError::DuplicateLabel(label.clone()));
            }
        }
        for i in 0..n {
            match measure {
                Measure::Distance if values[i * n + i] != 0.0 => return Err(ProximityError::NonZeroDiagonal(i)),
                _ => values[i * n + i] = 0.0,
            }
            for j in i + 1..n {
                let (upper, lower) = (values[i * n + j], values[j * n + i]);
                if upper != lower {
                    return Err(ProximityError::AsymmetricMatrix { i, j, upper, lower });
                }
            }
        }
        Ok(Self { labels, values, measure, precision: source_decimals, source_decimals })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    /// Decimal places used for rounding during clustering.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Largest number of decimal places written in the source values.
    pub fn source_decimals(&self) -> u32 {
        self.source_decimals
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Values mapped into distance space: unchanged for distances, negated
    /// for weights.
    pub fn engine_value(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.measure.engine_sign() * self.get(i, j)
        }
    }

    /// Re-labels the data as the given measure without touching the values.
    pub fn with_measure(mut self, measure: Measure) -> Self {
        self.measure = measure;
        self
    }

    /// Returns the data restricted and reordered to `order` (indices into the
    /// current labels).
    pub fn permuted(&self, order: &[usize]) -> Self {
        let n = order.len();
        let labels = order.iter().map(|&i| self.labels[i].clone()).collect();
        let mut values = Vec::with_capacity(n * n);
        for &i in order {
            for &j in order {
                values.push(self.get(i, j));
            }
        }
        Self { labels, values, ..self.clone() }
    }

    /// Off-diagonal pairs `(i, j, value)` with `i < j`, row-major.
    pub fn upper_triangle(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j, self.get(i, j))))
    }
}

/// A non-blank, non-comment line split into fields.
struct DataLine<'a> {
    line_no: usize,
    fields: Vec<&'a str>,
}

fn split_fields(line: &str, line_no: usize) -> Result<Vec<&str>, ProximityError> {
    let mut fields = Vec::new();
    for piece in line.split(HARD_SEPARATORS) {
        let piece = piece.trim_matches(SOFT_SEPARATORS);
        if piece.is_empty() {
            return Err(ProximityError::EmptyField { line: line_no });
        }
        fields.extend(piece.split(SOFT_SEPARATORS).filter(|s| !s.is_empty()));
    }
    Ok(fields)
}

fn data_lines(text: &str) -> Result<Vec<DataLine<'_>>, ProximityError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_matches(|c: char| c.is_whitespace());
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(DataLine { line_no: idx + 1, fields: split_fields(line, idx + 1)? });
    }
    if out.is_empty() {
        return Err(ProximityError::EmptyInput);
    }
    Ok(out)
}

fn parse_number(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn is_numeric(token: &str) -> bool {
    parse_number(token).is_some()
}

/// Decimal places of a numeric token as written, e.g. `"0.400"` → 3,
/// `"1.5e-3"` → 4, `"12"` → 0.
fn decimals_of(token: &str) -> u32 {
    let token = token.trim_start_matches(['+', '-']);
    let (mantissa, exponent) = match token.find(['e', 'E']) {
        Some(pos) => (&token[..pos], token[pos + 1..].parse::<i64>().unwrap_or(0)),
        None => (token, 0),
    };
    let fraction = mantissa.split_once('.').map_or(0, |(_, f)| f.len() as i64);
    (fraction - exponent).max(0) as u32
}

/// A matrix layout before numeric validation.
struct MatrixTable<'a> {
    labels: Option<Vec<&'a str>>,
    label_column: bool,
    rows: Vec<(usize, Vec<&'a str>)>,
}

fn matrix_table<'a>(lines: &[DataLine<'a>]) -> Result<MatrixTable<'a>, ProximityError> {
    let first = &lines[0];
    let first_text = first.fields.iter().any(|f| !is_numeric(f));
    let rest_labeled = lines[1..].iter().any(|l| l.fields.first().is_some_and(|f| !is_numeric(f)));
    // A first line whose only text is its first field is a labeled data row.
    let first_is_data_row = first.fields[1..].iter().all(|f| is_numeric(f));
    let (header_text, column_text) = match (first_text, rest_labeled) {
        (true, true) if first_is_data_row => (false, true),
        (true, true) => return Err(ProximityError::LabelsBothRowAndColumn),
        (true, false) => (true, false),
        (false, labeled) => (false, labeled),
    };

    let (label_row, label_column) = if header_text {
        (true, false)
    } else if column_text {
        (false, true)
    } else {
        // All numeric: numeric labels are recognised by shape alone.
        let width = first.fields.len();
        let uniform = lines.iter().all(|l| l.fields.len() == width);
        if uniform && lines.len() == width + 1 {
            (true, false)
        } else if uniform && width == lines.len() + 1 {
            (false, true)
        } else {
            (false, false)
        }
    };

    let labels;
    let body: &[DataLine<'a>] = if label_row {
        labels = Some(first.fields.clone());
        &lines[1..]
    } else if label_column {
        labels = Some(lines.iter().map(|l| l.fields[0]).collect());
        lines
    } else {
        labels = None;
        lines
    };

    let rows: Vec<(usize, Vec<&str>)> = body
        .iter()
        .map(|l| {
            let cells = if label_column { l.fields[1..].to_vec() } else { l.fields.clone() };
            (l.line_no, cells)
        })
        .collect();
    let n = rows.len();
    if n == 0 {
        return Err(ProximityError::TooFewNodes(0));
    }
    let width = rows[0].1.len();
    if let Some((line_no, _)) = rows.iter().find(|(_, cells)| cells.len() != width) {
        return Err(ProximityError::RaggedRows(*line_no));
    }
    if width != n {
        return Err(ProximityError::NotSquare { rows: n, cols: width });
    }
    if let Some(labels) = &labels {
        if labels.len() != n {
            return Err(ProximityError::RaggedRows(first.line_no));
        }
    }
    Ok(MatrixTable { labels, label_column, rows })
}

fn list_shaped(lines: &[DataLine<'_>]) -> bool {
    lines.iter().all(|l| l.fields.len() == 3 && is_numeric(l.fields[2]))
}

/// Guesses the layout of `text`. Inputs that read as both a list and a
/// square matrix (e.g. a 3×3 numeric matrix) are treated as matrices.
pub fn detect_format(text: &str) -> Result<FormatKind, ProximityError> {
    let lines = data_lines(text)?;
    if list_shaped(&lines) && matrix_table(&lines).is_err() {
        Ok(FormatKind::ListLike)
    } else {
        Ok(FormatKind::MatrixLike)
    }
}

/// Parses either layout, detected with [`detect_format`].
pub fn parse(text: &str, measure: Measure) -> Result<ProximityData, ProximityError> {
    match detect_format(text)? {
        FormatKind::MatrixLike => parse_matrix_as(text, measure),
        FormatKind::ListLike => parse_list_as(text, measure),
    }
}

/// Parses a matrix-like distance file.
pub fn parse_matrix(text: &str) -> Result<ProximityData, ProximityError> {
    parse_matrix_as(text, Measure::Distance)
}

pub fn parse_matrix_as(text: &str, measure: Measure) -> Result<ProximityData, ProximityError> {
    let lines = data_lines(text)?;
    let table = matrix_table(&lines)?;
    let n = table.rows.len();
    let label_offset = usize::from(table.label_column);

    let mut values = Vec::with_capacity(n * n);
    let mut decimals = 0;
    for (i, (line_no, cells)) in table.rows.iter().enumerate() {
        for (j, cell) in cells.iter().enumerate() {
            let v = parse_number(cell).ok_or(ProximityError::NonNumericCell { line: *line_no, column: j + 1 + label_offset })?;
            if i != j {
                decimals = decimals.max(decimals_of(cell));
            }
            values.push(v);
        }
    }
    let labels = match table.labels {
        Some(labels) => labels.into_iter().map(str::to_owned).collect(),
        None => (1..=n).map(|i| i.to_string()).collect(),
    };
    ProximityData::validated(labels, values, measure, decimals)
}

/// Parses a list-like distance file.
pub fn parse_list(text: &str) -> Result<ProximityData, ProximityError> {
    parse_list_as(text, Measure::Distance)
}

pub fn parse_list_as(text: &str, measure: Measure) -> Result<ProximityData, ProximityError> {
    let lines = data_lines(text)?;
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut labels: Vec<&str> = Vec::new();
    let mut entries = Vec::with_capacity(lines.len());
    let mut decimals = 0;

    for line in &lines {
        if line.fields.len() != 3 {
            return Err(ProximityError::BadFieldCount { line: line.line_no, found: line.fields.len() });
        }
        let (a, b, token) = (line.fields[0], line.fields[1], line.fields[2]);
        if a == b {
            return Err(ProximityError::SelfDistanceLine(line.line_no));
        }
        let value = parse_number(token).ok_or(ProximityError::NonNumericCell { line: line.line_no, column: 3 })?;
        decimals = decimals.max(decimals_of(token));
        let mut ids = [0; 2];
        for (slot, label) in ids.iter_mut().zip([a, b]) {
            let next = labels.len();
            *slot = *index.entry(label).or_insert_with(|| {
                labels.push(label);
                next
            });
        }
        let [ia, ib] = ids;
        entries.push((ia.min(ib), ia.max(ib), value));
    }

    let n = labels.len();
    let mut cells: Vec<Option<f64>> = vec![None; n * n];
    for (i, j, value) in entries {
        match cells[i * n + j] {
            Some(prev) if round_half_away(prev, decimals) != round_half_away(value, decimals) => {
                return Err(ProximityError::ConflictingSymmetricPair {
                    a: labels[i].to_owned(),
                    b: labels[j].to_owned(),
                    first: prev,
                    second: value,
                });
            }
            Some(_) => {}
            None => cells[i * n + j] = Some(value),
        }
    }

    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = cells[i * n + j].ok_or_else(|| ProximityError::MissingPair { a: labels[i].to_owned(), b: labels[j].to_owned() })?;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    ProximityData::validated(labels.into_iter().map(str::to_owned).collect(), values, measure, decimals)
}

/// The default precision: the most decimal places written for any
/// off-diagonal value.
pub fn infer_precision(data: &ProximityData) -> u32 {
    data.source_decimals
}

/// Rounds every off-diagonal value to `places` decimals, half away from zero.
pub fn apply_precision(data: &ProximityData, places: u32) -> ProximityData {
    let mut out = data.clone();
    for v in &mut out.values {
        *v = round_half_away(*v, places);
    }
    out.precision = places;
    out
}

/// Converts similarities in `[0, 1]` to distances `1 - s`.
pub fn similarity_to_dissimilarity(data: &ProximityData) -> Result<ProximityData, ProximityError> {
    if data.measure != Measure::Weight {
        return Err(ProximityError::NotWeights);
    }
    let n = data.len();
    let mut out = data.clone();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let s = data.get(i, j);
            if !(0.0..=1.0).contains(&s) {
                return Err(ProximityError::ValueOutOfUnitInterval { i, j, value: s });
            }
            out.values[i * n + j] = round_half_away(1.0 - s, data.precision);
        }
    }
    out.measure = Measure::Distance;
    Ok(out)
}

/// Rounds to `places` decimal places, ties away from zero, using the decimal
/// value of `value` to 15 significant digits. This keeps `0.445` → `0.45`
/// even though the nearest binary double lies just below `0.445`.
pub fn round_half_away(value: f64, places: u32) -> f64 {
    if !value.is_finite() || value == 0.0 {
        return if value == 0.0 { 0.0 } else { value };
    }
    let sci = format!("{:.14e}", value.abs());
    let (mantissa, exponent) = sci.split_once('e').expect("exponent form");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let digits: Vec<u8> = mantissa.bytes().filter(u8::is_ascii_digit).map(|b| b - b'0').collect();

    // Digits kept: the integer part (exponent + 1 digits) plus `places`.
    let keep = exponent + 1 + places as i32;
    if keep >= digits.len() as i32 {
        let exact: f64 = sci.parse().expect("valid float");
        return exact.copysign(value);
    }
    if keep < 0 {
        return 0.0;
    }
    let keep = keep as usize;
    let mut scaled: u64 = digits[..keep].iter().fold(0, |acc, &d| acc * 10 + u64::from(d));
    if digits[keep] >= 5 {
        scaled += 1;
    }
    if scaled == 0 {
        return 0.0;
    }
    let rounded: f64 = format!("{scaled}e-{places}").parse().expect("valid float");
    rounded.copysign(value)
}
