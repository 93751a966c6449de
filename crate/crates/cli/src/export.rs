use std::io::Write;

use serde_json::Value;

use crate::commands::Failure;
use crate::record::RunRecord;

fn num(v: &Value) -> String {
    match v {
        Value::Number(n) => n.to_string(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn point_cols(p: &Value) -> Vec<String> {
    p.as_array().map(|a| a.iter().map(num).collect()).unwrap_or_default()
}

fn polyline(w: &mut csv::Writer<Vec<u8>>, strand: Option<usize>, seg: &Value) -> csv::Result<()> {
    let pts = seg["points"].as_array().cloned().unwrap_or_default();
    let s = seg["arclength"].as_array().cloned().unwrap_or_default();
    for (p, s) in pts.iter().zip(&s) {
        let mut row: Vec<String> = strand.map(|k| vec![k.to_string()]).unwrap_or_default();
        row.push(num(s));
        row.extend(point_cols(p));
        w.write_record(&row)?;
    }
    Ok(())
}

/// CSV rows for one command's records. Schemas:
///
/// * `lyapunov`: `n, lambda1, …, lambdad`
/// * `manifold`: `s, x1, x2` (local), `strand, s, x1, x2` (global),
///   `step, log_distance` (rate)
/// * `periodic`: `num1, den1, num2, den2, period, hyperbolic`
/// * `birkhoff`: `n, average`
/// * `holonomy`: `source, target, density`
fn to_csv(command: &str, records: &[RunRecord]) -> Result<Vec<u8>, Failure> {
    let io = |e: csv::Error| Failure::Io(e.into());
    let mut w = csv::Writer::from_writer(Vec::new());
    let first = &records[0].result;
    match command {
        "lyapunov" => {
            let d = first["per_direction"].as_array().map_or(0, |a| a.len());
            let mut header = vec!["n".to_string()];
            header.extend((1..=d).map(|i| format!("lambda{i}")));
            w.write_record(&header).map_err(io)?;
            for r in records {
                let mut row = vec![num(&r.result["n"])];
                row.extend(point_cols(&r.result["per_direction"]));
                w.write_record(&row).map_err(io)?;
            }
        }
        "manifold" if first.get("strands").is_some() => {
            w.write_record(["strand", "s", "x1", "x2"]).map_err(io)?;
            for r in records {
                for (k, seg) in r.result["strands"].as_array().into_iter().flatten().enumerate() {
                    polyline(&mut w, Some(k), seg).map_err(io)?;
                }
            }
        }
        "manifold" if first.get("log_distances").is_some() => {
            w.write_record(["step", "log_distance"]).map_err(io)?;
            for r in records {
                for (k, d) in r.result["log_distances"].as_array().into_iter().flatten().enumerate() {
                    w.write_record([k.to_string(), num(d)]).map_err(io)?;
                }
            }
        }
        "manifold" => {
            w.write_record(["s", "x1", "x2"]).map_err(io)?;
            for r in records {
                polyline(&mut w, None, &r.result).map_err(io)?;
            }
        }
        "periodic" => {
            w.write_record(["num1", "den1", "num2", "den2", "period", "hyperbolic"]).map_err(io)?;
            for r in records {
                for p in r.result.as_array().into_iter().flatten() {
                    let c = &p["point"];
                    w.write_record([
                        num(&c[0]["num"]),
                        num(&c[0]["den"]),
                        num(&c[1]["num"]),
                        num(&c[1]["den"]),
                        num(&p["period"]),
                        p["hyperbolic"].to_string(),
                    ])
                    .map_err(io)?;
                }
            }
        }
        "birkhoff" => {
            w.write_record(["n", "average"]).map_err(io)?;
            for r in records {
                for c in r.result["checkpoints"].as_array().into_iter().flatten() {
                    w.write_record([num(&c["n"]), num(&c["average"])]).map_err(io)?;
                }
            }
        }
        "holonomy" => {
            w.write_record(["source", "target", "density"]).map_err(io)?;
            for r in records {
                for c in r.result["density"].as_array().into_iter().flatten() {
                    w.write_record([num(&c["source"]), num(&c["target"]), num(&c["density"])]).map_err(io)?;
                }
            }
        }
        other => {
            return Err(Failure::Validation(format!("no CSV schema for '{other}' records; use --format json-lines")))
        }
    }
    w.into_inner().map_err(|e| Failure::Io(anyhow::anyhow!("{e}")))
}

fn manifold_mode(r: &RunRecord) -> &'static str {
    if r.result.get("strands").is_some() {
        "global"
    } else if r.result.get("log_distances").is_some() {
        "rate"
    } else {
        "local"
    }
}

/// Exports records from a record file. The selector is a command name,
/// optionally followed by `#k` to pick only the k-th (0-based) record of
/// that command.
pub fn export(input: &std::path::Path, selector: &str, format: &str, sink: &mut dyn Write) -> Result<usize, Failure> {
    if !matches!(format, "csv" | "json-lines") {
        return Err(Failure::Validation(format!("unknown format '{format}' (expected csv or json-lines)")));
    }
    let (select, pick) = match selector.split_once('#') {
        Some((c, k)) => {
            let k = k.parse::<usize>().map_err(|_| Failure::Validation(format!("bad record index in '{selector}'")))?;
            (c, Some(k))
        }
        None => (selector, None),
    };
    let text = std::fs::read_to_string(input)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", input.display())))?;
    let mut lines = Vec::new();
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let r: RunRecord = serde_json::from_str(line)
            .map_err(|e| Failure::Validation(format!("{}:{}: not a run record: {e}", input.display(), i + 1)))?;
        if !select.is_empty() && r.config.command == select {
            lines.push(line);
            records.push(r);
        }
    }
    if let Some(k) = pick {
        if k < records.len() {
            lines = vec![lines[k]];
            records = vec![records.swap_remove(k)];
        } else {
            records.clear();
        }
    }
    if records.is_empty() {
        return Err(Failure::NoMatch(format!("no '{selector}' records in {}", input.display())));
    }
    if format == "csv" && select == "manifold" && records.iter().any(|r| manifold_mode(r) != manifold_mode(&records[0])) {
        return Err(Failure::Validation(
            "manifold records mix local, global and rate results; pick one with 'manifold#k'".into(),
        ));
    }
    let bytes = match format {
        "csv" => to_csv(select, &records)?,
        _ => lines.iter().flat_map(|l| format!("{l}\n").into_bytes()).collect(),
    };
    sink.write_all(&bytes).map_err(|e| Failure::Io(e.into()))?;
    Ok(records.len())
}
