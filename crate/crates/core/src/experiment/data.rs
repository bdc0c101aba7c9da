//! CSV readers and writers for price vectors and error pools.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::time_market::{ErrorPool, PriceVector};

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::parse(path, format!("{other:?}")),
        })
}

/// Reads a `period,price` file whose periods run 1..K in order.
pub fn read_prices(path: &Path) -> Result<PriceVector> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| Error::parse(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["period", "price"] {
        return Err(Error::parse(path, "expected header `period,price`"));
    }
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e))?;
        let period: usize = rec[0]
            .parse()
            .map_err(|_| Error::parse(path, format!("line {}: bad period `{}`", i + 2, &rec[0])))?;
        if period != i + 1 {
            return Err(Error::parse(
                path,
                format!("line {}: expected period {}, found {period}", i + 2, i + 1),
            ));
        }
        let price: f64 = rec[1]
            .parse()
            .map_err(|_| Error::parse(path, format!("line {}: bad price `{}`", i + 2, &rec[1])))?;
        values.push(price);
    }
    PriceVector::new(values).map_err(|e| Error::parse(path, e))
}

/// Reads an `h1,...,hH` file, one observation per row.
pub fn read_errors(path: &Path) -> Result<ErrorPool> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| Error::parse(path, e))?.clone();
    for (i, h) in headers.iter().enumerate() {
        if h != format!("h{}", i + 1) {
            return Err(Error::parse(
                path,
                format!("column {} should be named h{}", i + 1, i + 1),
            ));
        }
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e))?;
        let row = rec
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::parse(path, format!("line {}: bad number", i + 2)))?;
        rows.push(row);
    }
    ErrorPool::from_rows(rows).map_err(|e| Error::parse(path, e))
}

pub fn prices_csv(prices: &PriceVector) -> String {
    let mut out = String::from("period,price\n");
    for (k, p) in prices.values().iter().enumerate() {
        let _ = writeln!(out, "{},{p:.6}", k + 1);
    }
    out
}

pub fn errors_csv(pool: &ErrorPool) -> String {
    let mut out = (1..=pool.lookahead())
        .map(|h| format!("h{h}"))
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for row in pool.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn price_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let prices = PriceVector::new(vec![12.5, -3.25, 300.0]).unwrap();
        write_text(&path, &prices_csv(&prices)).unwrap();
        assert_eq!(read_prices(&path).unwrap(), prices);
    }

    #[test]
    fn price_file_rejects_out_of_order_periods() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_text(&path, "period,price\n1,1.0\n3,2.0\n").unwrap();
        assert!(matches!(read_prices(&path), Err(Error::Parse { .. })));
        write_text(&path, "k,price\n1,1.0\n").unwrap();
        assert!(read_prices(&path).is_err());
        assert!(matches!(
            read_prices(&dir.path().join("missing.csv")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn error_file_round_trip_and_header_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        let pool = ErrorPool::from_rows(vec![vec![1.0, -2.5], vec![0.125, 4.0]]).unwrap();
        write_text(&path, &errors_csv(&pool)).unwrap();
        assert_eq!(read_errors(&path).unwrap(), pool);
        write_text(&path, "h1,h3\n1,2\n").unwrap();
        assert!(read_errors(&path).is_err());
    }
}
