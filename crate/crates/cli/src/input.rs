//! Reading two-column numeric CSV input.

use std::path::Path;

use crate::config::{CliError, CliResult};

/// Reads the two numeric columns of `path`. Lines starting with `#` are
/// skipped; a first row that does not parse as numbers is taken as a header.
pub fn read_two_columns(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;

    let mut x1 = Vec::new();
    let mut x2 = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => CliError::Io(format!("{}: {e}", path.display())),
            _ => CliError::Usage(format!("{}: {e}", path.display())),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 2 {
            return Err(CliError::Usage(format!(
                "{}: row {} has {} columns, expected 2",
                path.display(),
                i + 1,
                record.len()
            )));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(a), Ok(b)) if a.is_finite() && b.is_finite() => {
                x1.push(a);
                x2.push(b);
            }
            _ if i == 0 && x1.is_empty() => continue,
            _ => {
                return Err(CliError::Usage(format!(
                    "{}: row {} is not a pair of finite numbers",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    if x1.is_empty() {
        return Err(CliError::Usage(format!("{}: no data rows", path.display())));
    }
    Ok((x1, x2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn header_and_comments_are_skipped() {
        let f = file("# made by hand\nu1,u2\n0.1,0.2\n0.3, 0.4\n");
        let (a, b) = read_two_columns(f.path()).unwrap();
        assert_eq!(a, vec![0.1, 0.3]);
        assert_eq!(b, vec![0.2, 0.4]);
    }

    #[test]
    fn headerless_input() {
        let f = file("1,2\n3,4\n");
        assert_eq!(read_two_columns(f.path()).unwrap().0, vec![1.0, 3.0]);
    }

    #[test]
    fn malformed_input() {
        assert_eq!(read_two_columns(file("").path()).unwrap_err().exit_code(), 2);
        assert_eq!(read_two_columns(file("a,b\n").path()).unwrap_err().exit_code(), 2);
        assert_eq!(read_two_columns(file("1,2\nx,4\n").path()).unwrap_err().exit_code(), 2);
        assert_eq!(read_two_columns(file("1,2,3\n").path()).unwrap_err().exit_code(), 2);
        assert_eq!(read_two_columns(Path::new("/nonexistent/x.csv")).unwrap_err().exit_code(), 1);
    }
}
