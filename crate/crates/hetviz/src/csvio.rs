//! Delimited text into [`RawTable`].

use std::path::Path;

use hetviz_core::scheme::RawTable;

use crate::error::{HetvizError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    /// First record names the columns. Without a header the columns are
    /// called `X1`, `X2`, ...
    pub has_header: bool,
    pub missing_token: String,
    /// Lines starting with this byte are skipped.
    pub comment: Option<u8>,
    /// Strip whitespace around every field.
    pub trim: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            has_header: true,
            missing_token: "?".into(),
            comment: None,
            trim: false,
        }
    }
}

/// Column names used for header-less input.
pub fn synthetic_header(width: usize) -> Vec<String> {
    (1..=width).map(|i| format!("X{i}")).collect()
}

/// Parses delimited text. Blank lines are skipped; a record whose width
/// differs from the first one is an error naming its line.
pub fn parse_csv(bytes: &[u8], options: &CsvOptions) -> Result<RawTable> {
    if let Err(e) = std::str::from_utf8(bytes) {
        return Err(HetvizError::Utf8 { offset: e.valid_up_to() });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(options.delimiter)
        .comment(options.comment)
        .trim(if options.trim { csv::Trim::All } else { csv::Trim::None })
        .from_reader(bytes);

    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                return Err(HetvizError::Csv { line, message: e.to_string() });
            }
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let cells: Vec<String> = record.iter().map(String::from).collect();
        let width = header.as_ref().map(Vec::len).or_else(|| rows.first().map(Vec::len));
        if let Some(width) = width
            && cells.len() != width {
                return Err(HetvizError::Csv {
                    line,
                    message: format!("{} cells under a {width}-column header", cells.len()),
                });
            }
        if options.has_header && header.is_none() {
            header = Some(cells);
        } else {
            rows.push(cells);
        }
    }
    let header = match header {
        Some(h) => h,
        None => synthetic_header(rows.first().map_or(0, Vec::len)),
    };
    Ok(RawTable::new(header, rows, options.missing_token.clone())?)
}

pub fn read_csv(path: &Path, options: &CsvOptions) -> Result<RawTable> {
    let bytes = std::fs::read(path).map_err(|e| HetvizError::io(path, e))?;
    parse_csv(&bytes, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hetviz_core::Error;

    #[test]
    fn minimal_table() {
        let t = parse_csv(b"a,b\n1,2\n", &CsvOptions::default()).unwrap();
        assert_eq!(t.header(), ["a", "b"]);
        assert_eq!(t.rows(), [vec!["1".to_string(), "2".into()]]);
    }

    #[test]
    fn ragged_row_names_its_line() {
        let err = parse_csv(b"a,b\n1,2\n1,2,3\n", &CsvOptions::default()).unwrap_err();
        match err {
            HetvizError::Csv { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("3 cells"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_header_rejected() {
        let err = parse_csv(b"a,a\n1,2\n", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, HetvizError::Engine(Error::Schema { ref attribute, .. }) if attribute == "a"));
    }

    #[test]
    fn headerless_with_comments_blanks_and_padding() {
        let opts = CsvOptions {
            has_header: false,
            comment: Some(b'|'),
            trim: true,
            ..Default::default()
        };
        let text = b"39, State-gov, <=50K\n\n|1x3 Cross validator\n50, ?, >50K.\n\n";
        let t = parse_csv(text, &opts).unwrap();
        assert_eq!(t.header(), ["X1", "X2", "X3"]);
        assert_eq!(t.len(), 2);
        assert_eq!(t.rows()[1], vec!["50".to_string(), "?".into(), ">50K.".into()]);
        assert!(t.is_missing(&t.rows()[1][1]));
    }

    #[test]
    fn other_delimiter_and_missing_token() {
        let opts = CsvOptions {
            delimiter: b';',
            missing_token: "NA".into(),
            ..Default::default()
        };
        let t = parse_csv(b"a;b\nNA;x\n", &opts).unwrap();
        assert!(t.is_missing(&t.rows()[0][0]));
        assert!(!t.is_missing(&t.rows()[0][1]));
    }

    #[test]
    fn invalid_utf8() {
        let err = parse_csv(b"a,b\n\xff,1\n", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, HetvizError::Utf8 { offset: 4 }));
    }

    #[test]
    fn empty_input_is_empty_table() {
        let t = parse_csv(b"", &CsvOptions::default()).unwrap();
        assert!(t.is_empty());
        assert!(t.header().is_empty());
    }

    #[test]
    fn missing_file() {
        let err = read_csv(Path::new("/nonexistent/x.csv"), &CsvOptions::default()).unwrap_err();
        assert!(err.to_string().starts_with("file not found"));
    }
}
