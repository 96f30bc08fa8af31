use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::data::{Dataset, ProteinTarget, Representation, TargetRecord, WidthPolicy};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub fn dataset_file_name(target_id: &str, representation: Representation) -> String {
    format!("{target_id}.{}.csv", representation.token())
}

/// Reads a dataset CSV: header row, one `activity` column, empty cell = missing.
pub fn load_dataset(
    path: &Path,
    representation: Representation,
    width_policy: WidthPolicy,
) -> Result<Dataset> {
    let target_id = path
        .file_name()
        .and_then(|n| n.to_str())
        .and_then(|n| n.strip_suffix(".csv"))
        .map(|n| {
            n.strip_suffix(&format!(".{}", representation.token()))
                .unwrap_or(n)
                .to_string()
        })
        .unwrap_or_default();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&bytes, &target_id, representation, width_policy)
}

pub(crate) fn parse_dataset(
    bytes: &[u8],
    target_id: &str,
    representation: Representation,
    width_policy: WidthPolicy,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut records = reader.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(Error::MalformedHeader("file is empty".into())),
    };
    let names: Vec<String> = header.iter().map(str::to_string).collect();
    let activity_cols: Vec<usize> = names
        .iter()
        .enumerate()
        .filter(|(_, n)| n.as_str() == "activity")
        .map(|(i, _)| i)
        .collect();
    let activity_col = match activity_cols.as_slice() {
        [c] => *c,
        [] => return Err(Error::MalformedHeader("no `activity` column".into())),
        _ => return Err(Error::MalformedHeader("duplicate `activity` column".into())),
    };
    let mut seen = HashSet::new();
    for n in &names {
        if n.is_empty() {
            return Err(Error::MalformedHeader("empty column name".into()));
        }
        if !seen.insert(n.as_str()) {
            return Err(Error::MalformedHeader(format!("duplicate column {n:?}")));
        }
    }
    let feature_names: Vec<String> = names
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != activity_col)
        .map(|(_, n)| n.clone())
        .collect();
    width_policy.check(representation, feature_names.len())?;

    let width = feature_names.len();
    let mut data = Vec::new();
    let mut missing = Vec::new();
    let mut activity = Vec::new();
    for (row, record) in records.enumerate() {
        let record = record?;
        if record.len() != names.len() {
            return Err(Error::RaggedRow {
                row,
                expected: names.len(),
                found: record.len(),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            let value = parse_cell(cell, row, &names[col])?;
            if col == activity_col {
                match value {
                    Some(v) => activity.push(v),
                    None => {
                        return Err(Error::NonNumeric {
                            row,
                            column: names[col].clone(),
                            value: String::new(),
                        })
                    }
                }
            } else {
                missing.push(value.is_none());
                data.push(value.unwrap_or(f64::NAN));
            }
        }
    }
    if activity.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let features = Matrix::from_vec(activity.len(), width, data);
    Dataset::new(
        target_id,
        representation,
        feature_names,
        features,
        missing,
        activity,
    )
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<Option<f64>> {
    if cell.is_empty() {
        return Ok(None);
    }
    let non_numeric = || Error::NonNumeric {
        row,
        column: column.to_string(),
        value: cell.to_string(),
    };
    // f64::from_str accepts "NaN"/"inf"; those tokens are rejected here.
    let v: f64 = cell.parse().map_err(|_| non_numeric())?;
    if !v.is_finite() {
        return Err(non_numeric());
    }
    Ok(Some(v))
}

/// Writes a dataset with `activity` as the first column. Values use the
/// shortest round-trip decimal form, so reloading is bit-exact.
pub fn write_dataset(path: &Path, d: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["activity".to_string()];
    header.extend(d.feature_names().iter().cloned());
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for r in 0..d.n_rows() {
        record.clear();
        record.push(d.activity()[r].to_string());
        for c in 0..d.n_features() {
            if d.is_missing(r, c) {
                record.push(String::new());
            } else {
                record.push(d.features().get(r, c).to_string());
            }
        }
        w.write_record(&record)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads `>target_id` records; sequence lines are concatenated.
pub fn read_fasta(path: &Path) -> Result<Vec<ProteinTarget>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut current: Option<(String, String)> = None;
    let malformed = |reason: String| Error::Malformed {
        path: path.to_path_buf(),
        reason,
    };
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if let Some(header) = line.strip_prefix('>') {
            if let Some((id, seq)) = current.take() {
                out.push(ProteinTarget::new(id, seq)?);
            }
            let id = header.split_whitespace().next().unwrap_or("").to_string();
            if id.is_empty() {
                return Err(malformed(format!("empty header on line {}", lineno + 1)));
            }
            current = Some((id, String::new()));
        } else if !line.is_empty() {
            match current.as_mut() {
                Some((_, seq)) => seq.push_str(line.trim()),
                None => {
                    return Err(malformed(format!(
                        "sequence data before first header on line {}",
                        lineno + 1
                    )))
                }
            }
        }
    }
    if let Some((id, seq)) = current.take() {
        out.push(ProteinTarget::new(id, seq)?);
    }
    Ok(out)
}

pub fn write_fasta(path: &Path, proteins: &[ProteinTarget]) -> Result<()> {
    let mut buf = Vec::new();
    for p in proteins {
        writeln!(buf, ">{}", p.target_id).expect("write to vec");
        for chunk in p.sequence().as_bytes().chunks(60) {
            buf.extend_from_slice(chunk);
            buf.push(b'\n');
        }
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub const GROUPINGS_HEADER: [&str; 8] =
    ["target_id", "L1", "L2", "L3", "L4", "L5", "L6", "preferred_name"];

/// Reads `target_id,L1..L6,preferred_name` rows keyed by target id.
pub fn read_groupings(path: &Path) -> Result<BTreeMap<String, ([String; 6], String)>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    if header.iter().ne(GROUPINGS_HEADER.iter().copied()) {
        return Err(Error::MalformedHeader(format!(
            "groupings header must be {}",
            GROUPINGS_HEADER.join(",")
        )));
    }
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let levels: [String; 6] = std::array::from_fn(|i| record[i + 1].to_string());
        out.insert(record[0].to_string(), (levels, record[7].to_string()));
    }
    Ok(out)
}

pub fn write_groupings(path: &Path, proteins: &[ProteinTarget]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(GROUPINGS_HEADER)?;
    for p in proteins {
        let mut rec = vec![p.target_id.as_str()];
        rec.extend(p.class_levels.iter().map(String::as_str));
        rec.push(&p.preferred_name);
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads every `<target_id>.<representation>.csv` in `datasets_dir`, joined
/// with its protein sequence and (optional) grouping row.
pub fn load_corpus(
    datasets_dir: &Path,
    fasta: &Path,
    groupings: Option<&Path>,
    width_policy: WidthPolicy,
) -> Result<Vec<TargetRecord>> {
    let mut files: BTreeMap<String, BTreeMap<Representation, PathBuf>> = BTreeMap::new();
    let entries = fs::read_dir(datasets_dir).map_err(|e| Error::io(datasets_dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(datasets_dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let Some(stem) = name.strip_suffix(".csv") else {
            continue;
        };
        let Some((target, rep)) = stem.rsplit_once('.') else {
            continue;
        };
        let Ok(rep) = rep.parse::<Representation>() else {
            continue;
        };
        files
            .entry(target.to_string())
            .or_default()
            .insert(rep, entry.path());
    }
    let mut proteins: BTreeMap<String, ProteinTarget> = read_fasta(fasta)?
        .into_iter()
        .map(|p| (p.target_id.clone(), p))
        .collect();
    let groups = match groupings {
        Some(p) => read_groupings(p)?,
        None => BTreeMap::new(),
    };
    let mut out = Vec::with_capacity(files.len());
    for (target_id, reps) in files {
        let protein = proteins.remove(&target_id).ok_or_else(|| {
            Error::Inconsistent(format!("target {target_id} has no FASTA record"))
        })?;
        let protein = match groups.get(&target_id) {
            Some((levels, name)) => protein.with_groups(levels.clone(), name.clone()),
            None => protein,
        };
        let mut datasets = BTreeMap::new();
        for (rep, path) in reps {
            let d = load_dataset(&path, rep, width_policy)?;
            datasets.insert(rep, d);
        }
        out.push(TargetRecord {
            target_id,
            datasets,
            protein,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, rep: Representation) -> Result<Dataset> {
        parse_dataset(text.as_bytes(), "t", rep, WidthPolicy::AllowOverride)
    }

    #[test]
    fn one_empty_cell_is_flagged_missing() {
        let d = parse(
            "activity,a,b\n1.0,2,3\n2.0,,4\n3.0,5,6\n",
            Representation::BasicMolProp,
        )
        .unwrap();
        assert_eq!(d.missing_count(), 1);
        assert!(d.is_missing(1, 0));
        assert_eq!(d.feature_names(), ["a", "b"]);
        assert_eq!(d.activity(), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn activity_column_may_be_anywhere() {
        let d = parse("a,activity\n7,1\n8,2\n", Representation::BasicMolProp).unwrap();
        assert_eq!(d.activity(), [1.0, 2.0]);
        assert_eq!(d.features().column(0), [7.0, 8.0]);
    }

    #[test]
    fn fingerprint_value_two_is_binary_violation() {
        let err = parse("activity,f0,f1\n1,0,2\n", Representation::FingerprintFcfp4).unwrap_err();
        assert!(matches!(err, Error::BinaryViolation { .. }), "{err}");
    }

    #[test]
    fn header_only_is_empty_dataset() {
        let err = parse("activity,a\n", Representation::BasicMolProp).unwrap_err();
        assert!(matches!(err, Error::EmptyDataset));
    }

    #[test]
    fn na_tokens_are_rejected() {
        for tok in ["NA", "NaN", "nan", "inf", "x"] {
            let err = parse(
                &format!("activity,a\n1,{tok}\n"),
                Representation::BasicMolProp,
            )
            .unwrap_err();
            assert!(matches!(err, Error::NonNumeric { .. }), "{tok}: {err}");
        }
    }

    #[test]
    fn malformed_headers() {
        for text in ["a,b\n1,2\n", "activity,activity\n1,2\n", "activity,a,a\n1,2,3\n", ""] {
            let err = parse(text, Representation::BasicMolProp).unwrap_err();
            assert!(matches!(err, Error::MalformedHeader(_)), "{text:?}: {err}");
        }
    }

    #[test]
    fn ragged_rows_and_missing_activity() {
        let err = parse("activity,a\n1,2,3\n", Representation::BasicMolProp).unwrap_err();
        assert!(matches!(err, Error::RaggedRow { .. }));
        let err = parse("activity,a\n,2\n", Representation::BasicMolProp).unwrap_err();
        assert!(matches!(err, Error::NonNumeric { .. }));
    }

    #[test]
    fn strict_width_policy() {
        let err = parse_dataset(
            b"activity,a\n1,2\n",
            "t",
            Representation::BasicMolProp,
            WidthPolicy::Strict,
        )
        .unwrap_err();
        assert!(matches!(err, Error::WidthMismatch { expected: 43, found: 1, .. }));
    }

    #[test]
    fn fasta_and_groupings_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let seq: String = "ACDEFGHIKLMNPQRSTVWY".repeat(7);
        let p = ProteinTarget::new("T1", seq.clone()).unwrap().with_groups(
            [
                "Enzyme".into(),
                "Kinase".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ],
            "Tyrosine kinase".into(),
        );
        let q = ProteinTarget::new("T2", "KKK").unwrap();
        let fasta = dir.path().join("p.fasta");
        write_fasta(&fasta, &[p.clone(), q.clone()]).unwrap();
        let back = read_fasta(&fasta).unwrap();
        assert_eq!(back[0].sequence(), seq);
        assert_eq!(back[1].sequence(), "KKK");
        let gpath = dir.path().join("g.csv");
        write_groupings(&gpath, &[p.clone(), q]).unwrap();
        let g = read_groupings(&gpath).unwrap();
        assert_eq!(g["T1"].0, p.class_levels);
        assert_eq!(g["T1"].1, "Tyrosine kinase");
        assert_eq!(g["T2"].0[0], "");
    }

    #[test]
    fn fasta_rejects_invalid_residues() {
        let dir = tempfile::tempdir().unwrap();
        let fasta = dir.path().join("p.fasta");
        fs::write(&fasta, ">T1\nACDZ\n").unwrap();
        assert!(matches!(read_fasta(&fasta), Err(Error::InvalidSequence(_))));
    }
}
