//! `labels.csv`: one row per object, `object_id,name` then the 24
//! adjectives in table order as 0/1.

use std::fmt::Write as _;
use std::path::Path;

use crate::adjectives::{AdjectiveLabelSet, ADJECTIVES, ADJECTIVE_COUNT};
use crate::error::{Error, Result};

pub fn encode_labels(rows: &[(AdjectiveLabelSet, String)]) -> Result<String> {
    let mut s = String::from("object_id,name");
    for a in ADJECTIVES {
        s.push(',');
        s.push_str(a);
    }
    s.push('\n');
    for (l, name) in rows {
        if name.contains([',', '\n', '\r']) {
            return Err(Error::InvalidInput(format!("object name `{name}` contains a separator")));
        }
        let _ = write!(s, "{},{name}", l.object_id);
        for b in l.labels {
            s.push_str(if b { ",1" } else { ",0" });
        }
        s.push('\n');
    }
    Ok(s)
}

pub fn decode_labels(text: &str, origin: &Path) -> Result<Vec<(AdjectiveLabelSet, String)>> {
    let err = |line: usize, reason: String| Error::Parse {
        path: origin.display().to_string(),
        reason: format!("line {line}: {reason}"),
    };
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| err(1, "empty file".into()))?.split(',').collect();
    let expected: Vec<&str> = ["object_id", "name"].into_iter().chain(ADJECTIVES).collect();
    if header != expected {
        return Err(err(1, "header must be object_id,name followed by the 24 adjectives in order".into()));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != ADJECTIVE_COUNT + 2 {
            return Err(err(n, format!("{} cells, expected {}", cells.len(), ADJECTIVE_COUNT + 2)));
        }
        let object_id = cells[0].parse().map_err(|_| err(n, format!("bad object id `{}`", cells[0])))?;
        let mut labels = [false; ADJECTIVE_COUNT];
        for (j, cell) in cells[2..].iter().enumerate() {
            labels[j] = match *cell {
                "1" => true,
                "0" => false,
                other => return Err(err(n, format!("`{}` must be 0 or 1, got `{other}`", ADJECTIVES[j]))),
            };
        }
        out.push((AdjectiveLabelSet { object_id, labels }, cells[1].to_string()));
    }
    Ok(out)
}
