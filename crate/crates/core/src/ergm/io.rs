use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::graph::NetworkGraph;

/// Parses an edge list: whitespace-separated `i j` pairs with 1-based ids,
/// `#` comments, and an optional `n=<count>` line declaring isolated nodes.
pub fn parse_edge_list(text: &str, path: &Path) -> Result<NetworkGraph> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut declared = 0usize;
    let mut pairs = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(count) = line.strip_prefix("n=").or_else(|| line.strip_prefix("n =")) {
            declared = count
                .trim()
                .parse()
                .map_err(|_| err(line_no, format!("bad node count `{}`", count.trim())))?;
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(line_no, format!("expected `i j`, found `{line}`")));
        }
        let id = |f: &str| -> Result<usize> {
            match f.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(err(line_no, format!("node id `{f}` is not a positive integer"))),
            }
        };
        let (i, j) = (id(fields[0])?, id(fields[1])?);
        if i == j {
            return Err(err(line_no, format!("self-loop on node {i}")));
        }
        pairs.push((i - 1, j - 1));
    }
    let n = pairs
        .iter()
        .map(|&(i, j)| i.max(j) + 1)
        .max()
        .unwrap_or(0)
        .max(declared);
    let mut g = NetworkGraph::empty(n);
    for (i, j) in pairs {
        g.add_edge(i, j);
    }
    Ok(g)
}

/// Reads a comma-separated covariate table: header row, node id in the first
/// column, one categorical label per remaining column. Returns the column
/// names and, per column, the labels indexed by node.
pub fn load_covariates(path: &Path, n: usize) -> Result<Vec<(String, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .skip(1)
        .map(str::to_string)
        .collect();
    let mut columns = vec![vec![None::<String>; n]; headers.len()];
    let mut rows = 0;
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = k + 2;
        let id: usize = record
            .get(0)
            .and_then(|f| f.parse().ok())
            .filter(|&v| v >= 1 && v <= n)
            .ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("node id must be in 1..={n}"),
            })?;
        if record.len() != headers.len() + 1 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected {} fields, found {}", headers.len() + 1, record.len()),
            });
        }
        for (c, col) in columns.iter_mut().enumerate() {
            col[id - 1] = Some(record[c + 1].to_string());
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: rows + 1,
            message: format!("covariate file has {rows} rows for {n} nodes"),
        });
    }
    headers
        .into_iter()
        .zip(columns)
        .map(|(name, col)| {
            let labels = col
                .into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    message: "duplicate node id leaves a node without covariates".into(),
                })?;
            Ok((name, labels))
        })
        .collect()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

/// Loads a network and, optionally, its node covariates.
pub fn load_network(edge_file: &Path, covariate_file: Option<&Path>) -> Result<NetworkGraph> {
    let text = fs::read_to_string(edge_file)?;
    let mut g = parse_edge_list(&text, edge_file)?;
    if let Some(cov) = covariate_file {
        for (name, labels) in load_covariates(cov, g.node_count())? {
            g.set_covariate(name, labels)?;
        }
    }
    Ok(g)
}
