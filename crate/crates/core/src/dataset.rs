//! Categorical training data and per-outcome count tallies.
//!
//! Every value is an opaque text token compared byte-wise. Rows keep the
//! position they were loaded at as their index for the lifetime of the
//! dataset, and duplicate rows are kept since they carry count weight.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One training example.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Row {
    pub index: usize,
    pub values: Vec<String>,
    pub outcome: String,
}

impl Row {
    pub fn value(&self, attribute: usize) -> &str {
        &self.values[attribute]
    }
}

/// Immutable table of categorical attributes plus one outcome column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    attribute_names: Vec<String>,
    outcome_name: String,
    rows: Vec<Row>,
}

impl Dataset {
    /// Builds a dataset from `(attribute values, outcome)` records; row
    /// indices are assigned densely in record order.
    pub fn new<I>(attribute_names: Vec<String>, outcome_name: impl Into<String>, records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<String>, String)>,
    {
        let outcome_name = outcome_name.into();
        if attribute_names.is_empty() {
            return Err(Error::NoAttributes { column: outcome_name });
        }
        let mut seen = HashSet::new();
        for name in attribute_names.iter().chain(std::iter::once(&outcome_name)) {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn { column: name.clone() });
            }
        }
        let mut rows = Vec::new();
        for (index, (values, outcome)) in records.into_iter().enumerate() {
            if values.len() != attribute_names.len() {
                return Err(Error::RowArity {
                    row: index,
                    expected: attribute_names.len(),
                    found: values.len(),
                });
            }
            rows.push(Row { index, values, outcome });
        }
        if rows.is_empty() {
            return Err(Error::EmptyData);
        }
        Ok(Self { attribute_names, outcome_name, rows })
    }

    /// Reads a headered, comma-separated UTF-8 table. Every column other
    /// than `outcome_column` becomes an attribute, in header order. Fields
    /// are trimmed of surrounding whitespace and otherwise kept verbatim.
    pub fn load_csv<R: Read>(source: R, outcome_column: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(source);

        let header = reader.headers()?.clone();
        if header.is_empty() {
            return Err(Error::MissingHeader);
        }
        if let Some(position) = header.iter().position(str::is_empty) {
            return Err(Error::EmptyColumnName { position });
        }
        let outcome_at = header
            .iter()
            .position(|h| h == outcome_column)
            .ok_or_else(|| Error::UnknownOutcomeColumn { column: outcome_column.to_owned() })?;
        let attribute_names: Vec<String> = header
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != outcome_at)
            .map(|(_, h)| h.to_owned())
            .collect();

        let mut records = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != header.len() {
                return Err(Error::RaggedRow {
                    row,
                    line: record.position().map_or(0, |p| p.line()),
                    expected: header.len(),
                    found: record.len(),
                });
            }
            let values = record
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != outcome_at)
                .map(|(_, v)| v.to_owned())
                .collect();
            records.push((values, record[outcome_at].to_owned()));
        }

        Self::new(attribute_names, outcome_column, records)
    }

    /// Writes the dataset as CSV with the outcome column first, followed by
    /// the attributes in order.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(sink);
        writer.write_record(std::iter::once(&self.outcome_name).chain(&self.attribute_names))?;
        for row in &self.rows {
            writer.write_record(std::iter::once(&row.outcome).chain(&row.values))?;
        }
        writer.flush()?;
        Ok(())
    }

    /// The eight-row categorical training set used throughout the crate's
    /// golden tests: outcomes `t0..t3` over attributes `Attr A` and `Attr B`.
    pub fn builtin_table1() -> Self {
        const ROWS: [(&str, &str, &str); 8] = [
            ("t3", "a1", "b0"),
            ("t0", "a1", "b0"),
            ("t0", "a0", "b1"),
            ("t1", "a0", "b1"),
            ("t2", "a1", "b1"),
            ("t2", "a1", "b1"),
            ("t2", "a0", "b0"),
            ("t1", "a0", "b0"),
        ];
        let records = ROWS
            .iter()
            .map(|&(o, a, b)| (vec![a.to_owned(), b.to_owned()], o.to_owned()));
        Self::new(vec!["Attr A".into(), "Attr B".into()], "Outcome", records)
            .expect("built-in table is well formed")
    }

    /// Counts outcomes over the given rows.
    pub fn histogram<I>(&self, indices: I) -> Result<Histogram>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut histogram = Histogram::new();
        for index in indices {
            let row = self.row(index)?;
            histogram.record(&row.outcome);
        }
        Ok(histogram)
    }

    /// A new dataset holding the given rows, re-indexed from zero in the
    /// order supplied.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let records = indices
            .iter()
            .map(|&i| self.row(i).map(|r| (r.values.clone(), r.outcome.clone())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.attribute_names.clone(), self.outcome_name.clone(), records)
    }

    pub fn row(&self, index: usize) -> Result<&Row> {
        self.rows
            .get(index)
            .ok_or(Error::IndexOutOfRange { index, len: self.rows.len() })
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attribute_names.iter().position(|n| n == name)
    }

    pub fn outcome_name(&self) -> &str {
        &self.outcome_name
    }
}

/// Per-outcome row counts. Absent outcomes count zero; present ones are
/// always at least one.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, usize>", into = "BTreeMap<String, usize>")]
pub struct Histogram {
    counts: BTreeMap<String, usize>,
}

impl Histogram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a histogram from explicit counts, dropping zero entries.
    pub fn from_counts<I, S>(counts: I) -> Self
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut histogram = Self::new();
        for (outcome, count) in counts {
            histogram.add_count(outcome.into(), count);
        }
        histogram
    }

    pub fn record(&mut self, outcome: &str) {
        match self.counts.get_mut(outcome) {
            Some(c) => *c += 1,
            None => {
                self.counts.insert(outcome.to_owned(), 1);
            }
        }
    }

    fn add_count(&mut self, outcome: String, count: usize) {
        if count > 0 {
            *self.counts.entry(outcome).or_insert(0) += count;
        }
    }

    pub fn count(&self, outcome: &str) -> usize {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Number of distinct outcomes present.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn outcomes(&self) -> impl Iterator<Item = &str> + '_ {
        self.counts.keys().map(String::as_str)
    }

    pub fn counts(&self) -> &BTreeMap<String, usize> {
        &self.counts
    }
}

impl Add for &Histogram {
    type Output = Histogram;

    fn add(self, rhs: &Histogram) -> Histogram {
        let mut out = self.clone();
        for (outcome, &count) in &rhs.counts {
            out.add_count(outcome.clone(), count);
        }
        out
    }
}

impl<'a> std::iter::Sum<&'a Histogram> for Histogram {
    fn sum<I: Iterator<Item = &'a Histogram>>(iter: I) -> Self {
        iter.fold(Histogram::new(), |acc, h| &acc + h)
    }
}

impl TryFrom<BTreeMap<String, usize>> for Histogram {
    type Error = String;

    fn try_from(counts: BTreeMap<String, usize>) -> std::result::Result<Self, String> {
        if let Some((outcome, _)) = counts.iter().find(|&(_, &c)| c == 0) {
            return Err(format!("outcome {outcome:?} has a zero count"));
        }
        Ok(Self { counts })
    }
}

impl From<Histogram> for BTreeMap<String, usize> {
    fn from(h: Histogram) -> Self {
        h.counts
    }
}

impl fmt::Display for Histogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (outcome, count)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{outcome}:{count}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TABLE1_CSV: &str = "Outcome,Attr A,Attr B\n\
        t3,a1,b0\nt0,a1,b0\nt0,a0,b1\nt1,a0,b1\nt2,a1,b1\nt2,a1,b1\nt2,a0,b0\nt1,a0,b0\n";

    #[test]
    fn loads_table1_csv() {
        let d = Dataset::load_csv(TABLE1_CSV.as_bytes(), "Outcome").unwrap();
        assert_eq!(d.attribute_names(), ["Attr A", "Attr B"]);
        assert_eq!(d.len(), 8);
        assert_eq!(d, Dataset::builtin_table1());
    }

    #[test]
    fn outcome_column_may_sit_anywhere() {
        let d = Dataset::load_csv("a,y,b\n1,t0,2\n".as_bytes(), "y").unwrap();
        assert_eq!(d.attribute_names(), ["a", "b"]);
        assert_eq!(d.rows()[0].values, ["1", "2"]);
        assert_eq!(d.rows()[0].outcome, "t0");
    }

    #[test]
    fn minimal_csv() {
        let d = Dataset::load_csv("a,y\n1,t0".as_bytes(), "y").unwrap();
        assert_eq!(d.attribute_names().len(), 1);
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn surrounding_whitespace_is_trimmed() {
        let d = Dataset::load_csv(" a , y \n x 1 ,  t0\n".as_bytes(), "y").unwrap();
        assert_eq!(d.attribute_names(), ["a"]);
        assert_eq!(d.rows()[0].values, ["x 1"]);
    }

    #[test]
    fn ragged_row_names_the_row() {
        let err = Dataset::load_csv("a,b,y\n1,2,t0\n1,t1\n".as_bytes(), "y").unwrap_err();
        match err {
            Error::RaggedRow { row, line, expected, found } => {
                assert_eq!((row, line, expected, found), (1, 3, 3, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_errors_are_distinct() {
        assert!(matches!(Dataset::load_csv("".as_bytes(), "y"), Err(Error::MissingHeader)));
        assert!(matches!(
            Dataset::load_csv("a,b\n1,2\n".as_bytes(), "y"),
            Err(Error::UnknownOutcomeColumn { column }) if column == "y"
        ));
        assert!(matches!(Dataset::load_csv("a,y\n".as_bytes(), "y"), Err(Error::EmptyData)));
        assert!(matches!(
            Dataset::load_csv("y\nt0\n".as_bytes(), "y"),
            Err(Error::NoAttributes { .. })
        ));
        assert!(matches!(
            Dataset::load_csv("a,a,y\n1,2,t0\n".as_bytes(), "y"),
            Err(Error::DuplicateColumn { column }) if column == "a"
        ));
    }

    #[test]
    fn values_are_case_sensitive() {
        let d = Dataset::load_csv("a,y\nX,T0\nx,t0\n".as_bytes(), "y").unwrap();
        let h = d.histogram(0..2).unwrap();
        assert_eq!(h.len(), 2);
    }

    #[test]
    fn table1_rows() {
        let d = Dataset::builtin_table1();
        assert_eq!(d.len(), 8);
        assert_eq!(d.attribute_names().len(), 2);
        let r0 = d.row(0).unwrap();
        assert_eq!((r0.value(0), r0.value(1), r0.outcome.as_str()), ("a1", "b0", "t3"));
        let r5 = d.row(5).unwrap();
        assert_eq!((r5.value(0), r5.value(1), r5.outcome.as_str()), ("a1", "b1", "t2"));
    }

    #[test]
    fn table1_histograms() {
        let d = Dataset::builtin_table1();
        assert_eq!(
            d.histogram(0..8).unwrap(),
            Histogram::from_counts([("t0", 2), ("t1", 2), ("t2", 3), ("t3", 1)])
        );
        assert_eq!(d.histogram([6, 7]).unwrap(), Histogram::from_counts([("t2", 1), ("t1", 1)]));
        assert!(d.histogram([]).unwrap().is_empty());
        assert!(matches!(d.histogram([8]), Err(Error::IndexOutOfRange { index: 8, len: 8 })));
    }

    #[test]
    fn histogram_json_rejects_zero_counts() {
        let err = serde_json::from_str::<Histogram>(r#"{"t0":0}"#);
        assert!(err.is_err());
        let h: Histogram = serde_json::from_str(r#"{"t0":2,"t1":1}"#).unwrap();
        assert_eq!(h.total(), 3);
    }

    #[test]
    fn subset_reindexes() {
        let d = Dataset::builtin_table1().subset(&[7, 0]).unwrap();
        assert_eq!(d.row(0).unwrap().outcome, "t1");
        assert_eq!(d.row(1).unwrap().index, 1);
    }

    fn small_dataset() -> impl Strategy<Value = Dataset> {
        (1usize..4, 1usize..30).prop_flat_map(|(attrs, rows)| {
            prop::collection::vec(
                (prop::collection::vec("[a-c ,\"]{1,3}", attrs), "t[0-3]"),
                rows,
            )
            .prop_map(move |records| {
                let names = (0..attrs).map(|i| format!("attr {i}")).collect();
                let records = records
                    .into_iter()
                    .map(|(v, o)| (v.into_iter().map(|s| s.trim().to_owned()).map(|s| if s.is_empty() { "_".into() } else { s }).collect(), o));
                Dataset::new(names, "outcome", records).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn histogram_is_additive_over_disjoint_sets(d in small_dataset(), mask in prop::collection::vec(any::<bool>(), 30)) {
            let (left, right): (Vec<usize>, Vec<usize>) = (0..d.len()).partition(|&i| mask[i]);
            let whole = d.histogram(0..d.len()).unwrap();
            let l = d.histogram(left.iter().copied()).unwrap();
            let r = d.histogram(right.iter().copied()).unwrap();
            prop_assert_eq!(&l + &r, whole.clone());
            prop_assert_eq!(l.total(), left.len());
            prop_assert_eq!(whole.total(), d.len());
        }

        #[test]
        fn csv_round_trip(d in small_dataset()) {
            let mut buf = Vec::new();
            d.write_csv(&mut buf).unwrap();
            let back = Dataset::load_csv(buf.as_slice(), d.outcome_name()).unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
