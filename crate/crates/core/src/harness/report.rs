//! CSV/JSONL output of an experiment.
//!
//! Layout under the output directory:
//!
//! - `results.csv`: one row per metric, `<policy>_mean` / `<policy>_std`
//!   column pairs per policy.
//! - `pairwise_tests.csv`: `policy_a,policy_b,metric,u,p` for every pair.
//! - `conversations.csv`: per-conversation means, one row per group.
//! - `conversations/<policy>_g<NN>.jsonl` and `.csv`: per-turn logs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{ExperimentResults, Metric};
use crate::error::{Error, Result};

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Writes every output file and returns their paths.
pub fn summarize_to_files(results: &ExperimentResults, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();

    let rows = &results.table.rows;
    let path = out_dir.join("results.csv");
    let mut header = vec!["metric".to_string()];
    for row in rows {
        header.push(format!("{}_mean", row.policy));
        header.push(format!("{}_std", row.policy));
    }
    let body: Vec<Vec<String>> = if rows.is_empty() {
        Vec::new()
    } else {
        Metric::ALL
            .iter()
            .map(|&m| {
                let mut cells = vec![m.name().to_string()];
                for row in rows {
                    let v = row.metric(m);
                    cells.push(v.mean.to_string());
                    cells.push(v.std.to_string());
                }
                cells
            })
            .collect()
    };
    write_rows(&path, &header, &body)?;
    written.push(path);

    let path = out_dir.join("pairwise_tests.csv");
    let body: Vec<Vec<String>> = results
        .pairwise_tests()?
        .iter()
        .map(|t| {
            vec![
                t.a.to_string(),
                t.b.to_string(),
                t.metric.name().to_string(),
                t.test.u.to_string(),
                t.test.p.to_string(),
            ]
        })
        .collect();
    write_rows(&path, &strings(&["policy_a", "policy_b", "metric", "u", "p"]), &body)?;
    written.push(path);

    let path = out_dir.join("conversations.csv");
    let body: Vec<Vec<String>> = results
        .conversations
        .iter()
        .map(|c| {
            vec![
                c.policy.to_string(),
                c.group.to_string(),
                c.seed.to_string(),
                c.log.len().to_string(),
                c.time_err_s.to_string(),
                c.word_err.to_string(),
                c.n_comm.to_string(),
            ]
        })
        .collect();
    write_rows(
        &path,
        &strings(&["policy", "group", "seed", "turns", "time_err_s", "word_err", "n_comm"]),
        &body,
    )?;
    written.push(path);

    if results.conversations.is_empty() {
        return Ok(written);
    }
    let dir = out_dir.join("conversations");
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for c in &results.conversations {
        let stem = format!("{}_g{:02}", c.policy, c.group);

        let path = dir.join(format!("{stem}.jsonl"));
        let mut out = create(&path)?;
        c.log.write_jsonl(&mut out).map_err(|e| Error::io(&path, e))?;
        out.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);

        let path = dir.join(format!("{stem}.csv"));
        let mut w = csv_writer(&path)?;
        for r in &c.log.records {
            w.serialize(r).map_err(|e| csv_err(&path, e))?;
        }
        if c.log.is_empty() {
            w.write_record(turn_csv_header()).map_err(|e| csv_err(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn turn_csv_header() -> [&'static str; 9] {
    [
        "t_index", "speaker", "duration_s", "words", "time_err_s", "word_err", "n_comm",
        "addressee", "directive",
    ]
}
