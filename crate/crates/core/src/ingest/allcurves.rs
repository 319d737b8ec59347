use std::io::BufRead;

use num_bigint::BigInt;

use super::{validate, CurveRecord, IngestError, Ingested, Quarantined};

/// Parse `N class number [a1,a2,a3,a4,a6] rank torsion` lines. Blank lines
/// and lines starting with `#` are skipped.
pub fn parse_allcurves<R: BufRead>(reader: R) -> Result<Ingested, IngestError> {
    let mut out = Ingested::default();
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| IngestError::parse(n, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let record = parse_line(trimmed, n)?;
        match validate(&record, n)? {
            Ok(()) => out.records.push(record),
            Err(error) => out.quarantined.push(Quarantined { record, error }),
        }
    }
    Ok(out)
}

fn parse_line(line: &str, n: usize) -> Result<CurveRecord, IngestError> {
    let err = |reason: &str| IngestError::parse(n, reason);
    let open = line.find('[').ok_or_else(|| err("missing '['"))?;
    let close = line.rfind(']').ok_or_else(|| err("missing ']'"))?;
    if close < open {
        return Err(err("brackets out of order"));
    }
    let head: Vec<&str> = line[..open].split_whitespace().collect();
    let [level, class, number] = head[..] else {
        return Err(err("expected level, class and number before the coefficients"));
    };
    let tail: Vec<&str> = line[close + 1..].split_whitespace().collect();
    let [rank, torsion] = tail[..] else {
        return Err(err("expected rank and torsion after the coefficients"));
    };
    let coeffs = line[open + 1..close]
        .split(',')
        .map(|c| c.trim().parse::<BigInt>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| err("non-integer coefficient"))?;
    let ainvs: [BigInt; 5] = coeffs
        .try_into()
        .map_err(|v: Vec<BigInt>| IngestError::parse(n, format!("expected 5 coefficients, found {}", v.len())))?;
    let level: u64 = level.parse().map_err(|_| err("bad level"))?;
    if level == 0 {
        return Err(err("level must be positive"));
    }
    if class.is_empty() || !class.chars().all(|c| c.is_ascii_alphabetic()) {
        return Err(err("bad class label"));
    }
    let number: u32 = number.parse().map_err(|_| err("bad curve number"))?;
    let rank: u32 = rank.parse().map_err(|_| err("bad rank"))?;
    let torsion: u32 = torsion.parse().map_err(|_| err("bad torsion"))?;
    Ok(CurveRecord::new(
        level,
        &class.to_ascii_lowercase(),
        number,
        ainvs,
        rank,
        torsion,
    ))
}
