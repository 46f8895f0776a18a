//! CSV matrices and JSON result documents.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SeriationError};
use crate::instances::GenSpec;
use crate::matrix::{apply_permutations, DenseMatrix, Permutation};
use crate::measures::{deviation_report, DeviationReport, Measure, MeasureRecord, StressParams};
use crate::neighborhoods::Neighborhood;
use crate::solver::SeriationResult;

/// Schema version written into every result document.
pub const SCHEMA_VERSION: &str = "1";

/// A matrix with optional row and column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    pub matrix: DenseMatrix,
    pub row_labels: Option<Vec<String>>,
    pub col_labels: Option<Vec<String>>,
}

impl From<DenseMatrix> for LabeledMatrix {
    fn from(matrix: DenseMatrix) -> Self {
        Self { matrix, row_labels: None, col_labels: None }
    }
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> SeriationError {
    SeriationError::Parse { path: path.to_path_buf(), line, message: message.into() }
}

/// Parses CSV text. A first record with any non-numeric cell is a header;
/// a non-numeric first cell in the first body record means every record
/// starts with a label. `origin` only names the source in errors.
pub fn parse_matrix_csv(text: &str, origin: &Path) -> Result<LabeledMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records: Vec<(u64, Vec<String>)> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        records.push((line, rec.iter().map(str::to_string).collect()));
    }
    if records.is_empty() {
        return Err(parse_err(origin, 1, "no data"));
    }
    let numeric = |s: &str| s.parse::<f64>().is_ok_and(f64::is_finite);
    let has_header = records[0].1.iter().any(|c| !numeric(c));
    let body = &records[has_header as usize..];
    if body.is_empty() {
        return Err(parse_err(origin, records[0].0, "header without data rows"));
    }
    let has_labels = !numeric(&body[0].1[0]);
    let skip = has_labels as usize;
    let width = body[0].1.len();
    if width <= skip {
        return Err(parse_err(origin, body[0].0, "row has no numeric cells"));
    }
    let mut data = Vec::with_capacity(body.len() * (width - skip));
    let mut row_labels = Vec::new();
    for (line, cells) in body {
        if cells.len() != width {
            return Err(parse_err(origin, *line, format!("expected {width} fields, found {}", cells.len())));
        }
        if has_labels {
            row_labels.push(cells[0].clone());
        }
        for cell in &cells[skip..] {
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(origin, *line, format!("'{cell}' is not a finite number")))?;
            data.push(v);
        }
    }
    let col_labels = if has_header {
        let (line, header) = &records[0];
        if header.len() != width {
            return Err(parse_err(origin, *line, format!("header has {} fields, rows have {width}", header.len())));
        }
        Some(header[skip..].to_vec())
    } else {
        None
    };
    Ok(LabeledMatrix {
        matrix: DenseMatrix::new(body.len(), width - skip, data)?,
        row_labels: has_labels.then_some(row_labels),
        col_labels,
    })
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<LabeledMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_matrix_csv(&text, path)
}

/// CSV text with shortest round-trip number formatting. A header is written
/// when column labels exist; the corner cell is empty when row labels exist
/// too.
pub fn matrix_to_csv(m: &LabeledMatrix) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    if let Some(cols) = &m.col_labels {
        let corner = m.row_labels.as_ref().map(|_| String::new());
        w.write_record(corner.iter().chain(cols.iter()))?;
    }
    for i in 0..m.matrix.rows() {
        let label = m.row_labels.as_ref().map(|l| l[i].clone());
        let cells = m.matrix.row(i).iter().map(|v| format!("{v}"));
        w.write_record(label.into_iter().chain(cells))?;
    }
    let bytes = w.into_inner().map_err(|e| SeriationError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn write_matrix_csv(path: impl AsRef<Path>, m: &LabeledMatrix) -> Result<()> {
    std::fs::write(path, matrix_to_csv(m)?)?;
    Ok(())
}

/// Serializable description of a [`Measure`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    /// `vn`, `moore`, `cross2`, `eps`, `custom` or `me`.
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub offsets: Option<Vec<(isize, isize)>>,
}

impl From<&Measure> for MeasureSpec {
    fn from(m: &Measure) -> Self {
        let Measure::Stress(s) = m else {
            return Self { name: "me".into(), p: None, eps: None, offsets: None };
        };
        let (name, eps, offsets) = match &s.neighborhood {
            Neighborhood::VonNeumann => ("vn", None, None),
            Neighborhood::Moore => ("moore", None, None),
            Neighborhood::Cross2 => ("cross2", None, None),
            Neighborhood::Epsilon(e) => ("eps", Some(*e), None),
            Neighborhood::Custom(o) => ("custom", None, Some(o.clone())),
        };
        Self { name: name.into(), p: Some(s.p), eps, offsets }
    }
}

impl MeasureSpec {
    pub fn to_measure(&self) -> Result<Measure> {
        if self.name == "me" {
            return Ok(Measure::Effectiveness);
        }
        let p = self.p.ok_or_else(|| SeriationError::InvalidArgument(format!("measure {} needs p", self.name)))?;
        let nb = match self.name.as_str() {
            "vn" => Neighborhood::VonNeumann,
            "moore" => Neighborhood::Moore,
            "cross2" => Neighborhood::Cross2,
            "eps" => Neighborhood::epsilon(self.eps.unwrap_or(f64::NAN))?,
            "custom" => Neighborhood::custom(self.offsets.clone().unwrap_or_default())?,
            other => return Err(SeriationError::InvalidArgument(format!("unknown measure '{other}'"))),
        };
        Ok(Measure::Stress(StressParams::new(nb, p)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spec: Option<GenSpec>,
    pub rows: usize,
    pub cols: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub row_labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub col_labels: Option<Vec<String>>,
    /// The input matrix, row by row, so the document can be re-verified.
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub name: String,
    pub status: String,
    pub gap: f64,
    /// Omitted unless requested, so repeated runs give identical files.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_seconds: Option<f64>,
}

/// A seriation result as stored on disk. Permutations are 1-based maps from
/// original index to position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: String,
    pub instance: InstanceMeta,
    pub measure: MeasureSpec,
    pub coordinated: bool,
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
    pub objective: f64,
    pub bound: f64,
    pub measures: MeasureRecord,
    pub deviations: DeviationReport,
    pub solver: SolverInfo,
}

impl ResultDocument {
    pub fn new(
        input: &LabeledMatrix,
        measure: &Measure,
        coordinated: bool,
        result: &SeriationResult,
        include_runtime: bool,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            instance: InstanceMeta {
                source: None,
                spec: None,
                rows: input.matrix.rows(),
                cols: input.matrix.cols(),
                row_labels: input.row_labels.clone(),
                col_labels: input.col_labels.clone(),
                matrix: input.matrix.to_rows(),
            },
            measure: measure.into(),
            coordinated,
            row_perm: result.row_perm.to_one_based(),
            col_perm: result.col_perm.to_one_based(),
            objective: result.objective,
            bound: result.bound,
            measures: result.measures,
            deviations: result.deviations,
            solver: SolverInfo {
                name: result.solver_name.clone(),
                status: result.status.label().into(),
                gap: result.gap(),
                runtime_seconds: include_runtime.then(|| result.runtime.as_secs_f64()),
            },
        }
    }

    pub fn matrix(&self) -> Result<DenseMatrix> {
        DenseMatrix::from_rows(&self.instance.matrix)
    }

    pub fn permutations(&self) -> Result<(Permutation, Permutation)> {
        Ok((Permutation::from_one_based(&self.row_perm)?, Permutation::from_one_based(&self.col_perm)?))
    }

    /// Recomputes objective, measures and deviations from the stored matrix
    /// and permutations; any disagreement beyond `1e-9` (relative to values
    /// above 1) is an integrity error.
    pub fn verify(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SeriationError::Integrity(format!("unsupported schema version '{}'", self.schema_version)));
        }
        let a = self.matrix()?;
        if (a.rows(), a.cols()) != (self.instance.rows, self.instance.cols) {
            return Err(SeriationError::Integrity("matrix shape disagrees with metadata".into()));
        }
        let (r, c) = self.permutations().map_err(|e| SeriationError::Integrity(e.to_string()))?;
        if self.coordinated && r != c {
            return Err(SeriationError::Integrity("coordinated result with different permutations".into()));
        }
        let b = apply_permutations(&a, &r, &c).map_err(|e| SeriationError::Integrity(e.to_string()))?;
        let measure = self.measure.to_measure()?;
        let p = measure.stress_params().map_or(1, |s| s.p);
        let rec = MeasureRecord::evaluate(&b);
        let dev = deviation_report(&a, &b, p)?;
        let checks = [
            ("objective", self.objective, measure.evaluate(&b)),
            ("vn_p1", self.measures.vn_p1, rec.vn_p1),
            ("vn_p2", self.measures.vn_p2, rec.vn_p2),
            ("moore_p1", self.measures.moore_p1, rec.moore_p1),
            ("moore_p2", self.measures.moore_p2, rec.moore_p2),
            ("me", self.measures.me, rec.me),
            ("homogeneity", self.measures.homogeneity, rec.homogeneity),
            ("dev_n", self.deviations.dev_n, dev.dev_n),
            ("dev_mo", self.deviations.dev_mo, dev.dev_mo),
            ("dev_me", self.deviations.dev_me, dev.dev_me),
            ("dev_hom", self.deviations.dev_hom, dev.dev_hom),
        ];
        for (name, stored, actual) in checks {
            if (stored - actual).abs() > 1e-9 * actual.abs().max(1.0) {
                return Err(SeriationError::Integrity(format!("{name}: stored {stored}, recomputed {actual}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses and verifies a document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        doc.verify()?;
        Ok(doc)
    }
}

pub fn write_result_json(doc: &ResultDocument, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, doc.to_json()?)?;
    Ok(())
}

pub fn read_result_json(path: impl AsRef<Path>) -> Result<ResultDocument> {
    ResultDocument::from_json(&std::fs::read_to_string(path)?)
}

/// Permutation files: one or two lines of 1-based positions (rows, then
/// columns), separated by commas or whitespace. A single line applies to
/// both axes.
pub fn parse_permutation_text(text: &str, origin: &Path) -> Result<(Permutation, Option<Permutation>)> {
    let mut perms = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values: Vec<usize> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<usize>().map_err(|_| parse_err(origin, idx as u64 + 1, format!("'{s}' is not a position"))))
            .collect::<Result<_>>()?;
        let perm = Permutation::from_one_based(&values).map_err(|e| parse_err(origin, idx as u64 + 1, e.to_string()))?;
        perms.push(perm);
    }
    let mut it = perms.into_iter();
    match (it.next(), it.next(), it.next()) {
        (Some(r), c, None) => Ok((r, c)),
        (None, ..) => Err(parse_err(origin, 1, "no permutation")),
        _ => Err(parse_err(origin, 3, "more than two permutations")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{seriate, SolveOptions};

    fn p() -> &'static Path {
        Path::new("t.csv")
    }

    #[test]
    fn plain_csv() {
        let m = parse_matrix_csv("0,1\n1,0", p()).unwrap();
        assert_eq!(m.matrix, DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap());
        assert!(m.row_labels.is_none() && m.col_labels.is_none());
    }

    #[test]
    fn labels_round_trip() {
        let text = ",a,b\nr1,0.5,1\nr2,2,0.125\n";
        let m = parse_matrix_csv(text, p()).unwrap();
        assert_eq!(m.row_labels.as_deref(), Some(&["r1".to_string(), "r2".to_string()][..]));
        assert_eq!(m.col_labels.as_deref(), Some(&["a".to_string(), "b".to_string()][..]));
        assert_eq!(matrix_to_csv(&m).unwrap(), text);
        let header_only = parse_matrix_csv("a,b\n1,2\n", p()).unwrap();
        assert!(header_only.row_labels.is_none());
        assert_eq!(matrix_to_csv(&header_only).unwrap(), "a,b\n1,2\n");
    }

    #[test]
    fn csv_errors_name_lines() {
        let err = parse_matrix_csv("0,1\n1,0,2\n", p()).unwrap_err();
        assert!(matches!(err, SeriationError::Parse { line: 2, .. }), "{err}");
        let err = parse_matrix_csv("0,1\n1,x\n3,4\n", p()).unwrap_err();
        assert!(matches!(err, SeriationError::Parse { line: 2, .. }), "{err}");
        assert!(parse_matrix_csv("", p()).is_err());
    }

    #[test]
    fn document_round_trip_and_tamper() {
        let a = DenseMatrix::from_rows(&[[0.0, 3.0, 1.0], [3.0, 0.0, 2.0], [1.0, 2.0, 0.0]]).unwrap();
        let measure = Measure::von_neumann(1).unwrap();
        let result = seriate(&a, &SolveOptions::new(measure.clone())).unwrap();
        let doc = ResultDocument::new(&a.clone().into(), &measure, false, &result, false);
        assert_eq!(doc.row_perm.len(), 3);
        let mut sorted = doc.row_perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 2, 3]);
        let json = doc.to_json().unwrap();
        assert!(!json.contains("runtime_seconds"));
        assert_eq!(ResultDocument::from_json(&json).unwrap(), doc);
        let tampered = json.replacen(&format!("\"objective\": {}", serde_json::to_string(&doc.objective).unwrap()), "\"objective\": 1.5", 1);
        assert_ne!(tampered, json);
        assert!(matches!(ResultDocument::from_json(&tampered), Err(SeriationError::Integrity(_))));
    }

    #[test]
    fn measure_specs_round_trip() {
        for m in [
            Measure::von_neumann(2).unwrap(),
            Measure::moore(1).unwrap(),
            Measure::cross2(1).unwrap(),
            Measure::epsilon(2.5, 1).unwrap(),
            Measure::Stress(StressParams::new(Neighborhood::custom([(1, 1)]).unwrap(), 2).unwrap()),
            Measure::Effectiveness,
        ] {
            assert_eq!(MeasureSpec::from(&m).to_measure().unwrap(), m);
        }
    }

    #[test]
    fn permutation_files() {
        let (r, c) = parse_permutation_text("2,1,3\n3 2 1\n", p()).unwrap();
        assert_eq!(r.to_one_based(), vec![2, 1, 3]);
        assert_eq!(c.unwrap().to_one_based(), vec![3, 2, 1]);
        assert!(parse_permutation_text("1,1\n", p()).is_err());
        assert!(parse_permutation_text("", p()).is_err());
    }
}
