//! Min-margin tables over `(inequality, p)` cells.

use std::collections::BTreeMap;

use schatten_lab::inequality::CheckRecord;
use schatten_lab::SchattenExponent;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub inequality_id: String,
    pub p: SchattenExponent,
    pub records: usize,
    pub failures: usize,
    pub errors: usize,
    pub min_margin: f64,
    pub min_relative_margin: f64,
}

/// Orders exponents numerically with `inf` last.
fn p_key(p: SchattenExponent) -> u64 {
    p.value().to_bits()
}

pub fn aggregate(records: &[CheckRecord]) -> Vec<Row> {
    let mut cells: BTreeMap<(String, u64), Row> = BTreeMap::new();
    for r in records {
        let id = r.inequality_id.to_string();
        let row = cells.entry((id.clone(), p_key(r.p))).or_insert_with(|| Row {
            inequality_id: id,
            p: r.p,
            records: 0,
            failures: 0,
            errors: 0,
            min_margin: f64::INFINITY,
            min_relative_margin: f64::INFINITY,
        });
        row.records += 1;
        row.failures += usize::from(!r.pass);
        if r.error.is_some() {
            row.errors += 1;
        } else {
            row.min_margin = row.min_margin.min(r.margin);
            row.min_relative_margin = row.min_relative_margin.min(r.relative_margin());
        }
    }
    cells.into_values().collect()
}

/// Records and header seeds from a JSONL file; header lines are
/// `{"header": {...}}`.
pub fn parse_jsonl(text: &str) -> Result<(Vec<CheckRecord>, Vec<u64>), String> {
    let mut records = Vec::new();
    let mut seeds = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
        if let Some(h) = value.get("header") {
            seeds.extend(h.get("seed").and_then(|s| s.as_u64()));
            continue;
        }
        records.push(serde_json::from_value(value).map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    Ok((records, seeds))
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.3e}")
    } else {
        "-".to_string()
    }
}

pub fn markdown(rows: &[Row], seeds: &[u64]) -> String {
    let mut out = format!(
        "<!-- generated {} -->\n# Inequality report\n\n",
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    );
    let seeds: Vec<String> = seeds.iter().map(u64::to_string).collect();
    out.push_str(&format!("Seeds: {}\n\n", if seeds.is_empty() { "-".to_string() } else { seeds.join(", ") }));
    out.push_str("| inequality | p | records | failures | errors | min margin | min margin / scale |\n");
    out.push_str("|---|---|---|---|---|---|---|\n");
    for r in rows {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} |\n",
            r.inequality_id,
            r.p,
            r.records,
            r.failures,
            r.errors,
            num(r.min_margin),
            num(r.min_relative_margin)
        ));
    }
    let failures: usize = rows.iter().map(|r| r.failures).sum();
    let total: usize = rows.iter().map(|r| r.records).sum();
    out.push_str(&format!("\n{failures} of {total} records failed.\n"));
    out
}

pub fn csv(rows: &[Row]) -> String {
    let mut out = String::from("inequality_id,p,records,failures,errors,min_margin,min_relative_margin\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:e},{:e}\n",
            r.inequality_id, r.p, r.records, r.failures, r.errors, r.min_margin, r.min_relative_margin
        ));
    }
    out
}
