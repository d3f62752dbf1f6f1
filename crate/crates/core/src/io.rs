//! Plain-text signal files: one sample per line, 17 significant digits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub fn format_sample(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_signal(path: impl AsRef<Path>, samples: &[f64]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for &x in samples {
        writeln!(out, "{}", format_sample(x))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads one sample per line; blank lines and `#` comments are skipped.
pub fn read_signal(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut samples = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let value = text.parse::<f64>().map_err(|e| {
            Error::Config(format!("{}:{}: cannot parse {text:?}: {e}", path.display(), lineno + 1))
        })?;
        samples.push(value);
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_sample(0.1), "1.0000000000000001e-1");
        assert_eq!(format_sample(-1.0), "-1.0000000000000000e0");
    }

    #[test]
    fn comments_and_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.txt");
        std::fs::write(&path, "# header\n0.5\n\n-0.25\n").unwrap();
        assert_eq!(read_signal(&path).unwrap(), vec![0.5, -0.25]);
        std::fs::write(&path, "0.5\nabc\n").unwrap();
        assert!(read_signal(&path).is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip_is_exact(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let back: f64 = format_sample(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
