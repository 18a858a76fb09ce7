use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::bits::BitSet;
use crate::error::{Error, Result};

use super::{Dataset, PsvOrigin, PsvSchema};

/// Value recorded for an empty cell in a categorical column.
pub const MISSING_VALUE: &str = "<missing>";

enum ColumnKind {
    Binary,
    /// Observed values in first-appearance order.
    Categorical(Vec<String>),
}

/// Load a population from a CSV file with a header row.
///
/// Columns holding only `0`/`1` become one binary PSV each; any other column
/// is one-hot expanded into one PSV per observed value (empty cells become
/// the value [`MISSING_VALUE`]). Classes are numbered in order of first
/// appearance of their label.
pub fn load_csv(path: &Path, class_column: &str, id_column: Option<&str>) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, class_column, id_column)
}

pub fn read_csv<R: Read>(
    reader: R,
    class_column: &str,
    id_column: Option<&str>,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut seen = HashSet::new();
    for h in &headers {
        if !seen.insert(h.as_str()) {
            return Err(Error::DuplicateHeader(h.clone()));
        }
    }
    let class_idx = headers
        .iter()
        .position(|h| h == class_column)
        .ok_or_else(|| Error::MissingClassColumn(class_column.to_string()))?;
    let id_idx = match id_column {
        Some(id) => Some(
            headers
                .iter()
                .position(|h| h == id)
                .ok_or_else(|| Error::MissingIdColumn(id.to_string()))?,
        ),
        None => None,
    };
    let psv_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| c != class_idx && Some(c) != id_idx)
        .collect();
    if psv_cols.is_empty() {
        return Err(Error::NoPsvs);
    }

    let records: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;

    let kinds: Vec<ColumnKind> = psv_cols
        .iter()
        .map(|&c| classify(&headers[c], records.iter().map(|r| &r[c])))
        .collect::<Result<_>>()?;

    let mut names = Vec::new();
    let mut origins = Vec::new();
    // first PSV index of each column
    let mut offsets = Vec::with_capacity(psv_cols.len());
    for (&c, kind) in psv_cols.iter().zip(&kinds) {
        offsets.push(names.len());
        match kind {
            ColumnKind::Binary => {
                names.push(headers[c].clone());
                origins.push(PsvOrigin::binary(&headers[c]));
            }
            ColumnKind::Categorical(values) => {
                for v in values {
                    names.push(format!("{}={}", headers[c], v));
                    origins.push(PsvOrigin::one_hot(&headers[c], v));
                }
            }
        }
    }
    let schema = PsvSchema::new(names, origins)?;
    let m = schema.len();

    let mut class_names: Vec<String> = Vec::new();
    let mut class_of = Vec::with_capacity(records.len());
    let mut rows = Vec::with_capacity(records.len());
    let mut ids = id_idx.map(|_| Vec::with_capacity(records.len()));
    for rec in &records {
        let label = &rec[class_idx];
        let k = match class_names.iter().position(|c| c == label) {
            Some(k) => k,
            None => {
                class_names.push(label.to_string());
                class_names.len() - 1
            }
        };
        class_of.push(k);
        let mut bits = BitSet::new(m);
        for ((&c, kind), &offset) in psv_cols.iter().zip(&kinds).zip(&offsets) {
            let cell = &rec[c];
            match kind {
                ColumnKind::Binary => {
                    if cell == "1" {
                        bits.insert(offset);
                    }
                }
                ColumnKind::Categorical(values) => {
                    let v = if cell.is_empty() { MISSING_VALUE } else { cell };
                    let pos = values.iter().position(|x| x == v).expect("value observed");
                    bits.insert(offset + pos);
                }
            }
        }
        rows.push(bits);
        if let (Some(ids), Some(i)) = (ids.as_mut(), id_idx) {
            ids.push(rec[i].to_string());
        }
    }
    let data = Dataset::new(schema, rows, class_of, class_names)?;
    match ids {
        Some(ids) => data.with_ids(ids),
        None => Ok(data),
    }
}

fn classify<'a>(name: &str, cells: impl Iterator<Item = &'a str>) -> Result<ColumnKind> {
    let mut values: Vec<String> = Vec::new();
    let mut binary_seen = false;
    let mut other_seen = false;
    for cell in cells {
        if cell == "0" || cell == "1" {
            binary_seen = true;
        } else {
            other_seen = true;
        }
        let v = if cell.is_empty() { MISSING_VALUE } else { cell };
        if !values.iter().any(|x| x == v) {
            values.push(v.to_string());
        }
    }
    match (binary_seen, other_seen) {
        (true, true) => Err(Error::MixedColumn(name.to_string())),
        (true, false) => Ok(ColumnKind::Binary),
        _ => Ok(ColumnKind::Categorical(values)),
    }
}

/// Write `data` as CSV readable by [`read_csv`] with the same class column.
///
/// Binary PSVs are written as `0`/`1` columns and one-hot groups collapse
/// back into one categorical column per raw attribute.
pub fn write_csv<W: Write>(data: &Dataset, writer: W, class_column: &str) -> Result<()> {
    let schema = data.schema();
    // (attribute, PSV indices) in order of first appearance
    let mut attributes: Vec<(String, Vec<usize>)> = Vec::new();
    for (j, origin) in schema.origins().iter().enumerate() {
        match attributes
            .iter_mut()
            .find(|(a, _)| origin.value.is_some() && *a == origin.attribute)
        {
            Some((_, members)) => members.push(j),
            None => attributes.push((origin.attribute.clone(), vec![j])),
        }
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = attributes.iter().map(|(a, _)| a.as_str()).collect();
    header.push(class_column);
    w.write_record(&header)?;
    for i in 0..data.n() {
        let row = data.row(i);
        let mut record: Vec<&str> = Vec::with_capacity(header.len());
        for (_, members) in &attributes {
            let first = &schema.origins()[members[0]];
            match &first.value {
                None => record.push(if row.get(members[0]) { "1" } else { "0" }),
                Some(_) => {
                    let value = members
                        .iter()
                        .find(|&&j| row.get(j))
                        .and_then(|&j| schema.origins()[j].value.as_deref())
                        .filter(|v| *v != MISSING_VALUE)
                        .unwrap_or("");
                    record.push(value);
                }
            }
        }
        record.push(&data.class_names()[data.class_of(i)]);
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::fixtures;

    fn read(text: &str) -> Result<Dataset> {
        read_csv(text.as_bytes(), "class", None)
    }

    #[test]
    fn one_hot_expands_categorical_columns() {
        let d = read("gender,married,class\nM,0,A\nF,1,A\nF,0,B\nM,1,B\n").unwrap();
        assert_eq!(d.schema().names(), &["gender=M", "gender=F", "married"]);
        assert_eq!(d.m(), 3);
        assert_eq!(d.k(), 2);
        assert_eq!(d.row(1), &BitSet::from_bools([false, true, true]));
        assert_eq!(d.schema().one_hot_groups(), vec![vec![0, 1]]);
    }

    #[test]
    fn single_class_is_rejected() {
        let err = read("a,class\n1,X\n0,X\n").unwrap_err();
        assert!(matches!(err, Error::TooFewClasses(1)));
        assert!(err.to_string().contains("K ≥ 2 required"));
    }

    #[test]
    fn loader_errors() {
        assert!(matches!(
            read("a,b\n1,0\n"),
            Err(Error::MissingClassColumn(_))
        ));
        assert!(matches!(
            read("a,a,class\n1,0,X\n0,1,Y\n"),
            Err(Error::DuplicateHeader(_))
        ));
        assert!(matches!(
            read("a,class\n1,X\nyes,Y\n"),
            Err(Error::MixedColumn(ref c)) if c == "a"
        ));
        assert!(matches!(read("class\nX\nY\n"), Err(Error::NoPsvs)));
    }

    #[test]
    fn missing_categorical_values_get_their_own_psv() {
        let d = read("color,class\nred,X\n,Y\nblue,Y\n").unwrap();
        assert_eq!(
            d.schema().names(),
            &["color=red", "color=<missing>", "color=blue"]
        );
        assert!(d.row(1).get(1));
    }

    #[test]
    fn id_column_is_kept_out_of_psvs() {
        let d = read_csv(
            "id,a,class\nr1,1,X\nr2,0,Y\n".as_bytes(),
            "class",
            Some("id"),
        )
        .unwrap();
        assert_eq!(d.m(), 1);
        assert_eq!(d.ids().unwrap(), &["r1", "r2"]);
        assert!(matches!(
            read_csv("a,class\n1,X\n0,Y\n".as_bytes(), "class", Some("id")),
            Err(Error::MissingIdColumn(_))
        ));
    }

    #[test]
    fn d1_round_trips_through_csv() {
        let d1 = fixtures::d1();
        let mut buf = Vec::new();
        write_csv(&d1, &mut buf, "class").unwrap();
        let back = read_csv(buf.as_slice(), "class", None).unwrap();
        assert_eq!(back, d1);
    }

    #[test]
    fn categorical_round_trip() {
        let text = "gender,married,color,class\nM,0,red,A\nF,1,,A\nF,0,blue,B\nM,1,red,B\n";
        let d = read(text).unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf, "class").unwrap();
        assert_eq!(read(std::str::from_utf8(&buf).unwrap()).unwrap(), d);
    }

    #[test]
    fn loading_is_deterministic_and_one_hot_sound() {
        let text = "g,r,class\nM,a,X\nF,b,Y\nF,c,X\nM,,Y\n";
        let a = read(text).unwrap();
        assert_eq!(a, read(text).unwrap());
        for group in a.schema().one_hot_groups() {
            for row in a.rows() {
                assert_eq!(group.iter().filter(|&&j| row.get(j)).count(), 1);
            }
        }
    }
}
