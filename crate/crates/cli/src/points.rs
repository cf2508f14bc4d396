//! Point-set files: a JSON array of rows, or one row per line with values
//! separated by whitespace or commas. Blank lines and `#` comments are
//! skipped.

use std::path::Path;

pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>, String> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).map_err(|e| format!("invalid JSON point list: {e}"));
    }
    let mut rows = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| format!("line {}: `{t}` is not a number", no + 1))
            })
            .collect::<Result<Vec<f64>, String>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_points(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn format_points(points: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for p in points {
        let row: Vec<String> = p.iter().map(f64::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_layouts() {
        assert_eq!(
            parse_points("[[0,1],[1,0]]").unwrap(),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]]
        );
        assert_eq!(
            parse_points("# f1 f2\n0 1\n\n1,0\n").unwrap(),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]]
        );
        assert!(parse_points("0 x").unwrap_err().contains("line 1"));
    }

    #[test]
    fn formatting_round_trips() {
        let p = vec![vec![0.1, 1e-17], vec![3.0, -2.5]];
        assert_eq!(parse_points(&format_points(&p)).unwrap(), p);
    }
}
