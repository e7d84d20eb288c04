//! Deterministic CSV/JSON result files.
//!
//! Layout contract: CSV starts with `# schema=capillary-asym/1`, then the
//! column header row, then data rows sorted by the primary sweep variable;
//! the resolved configuration and the summary block follow as `#` comment
//! lines. JSON mirrors the rows as arrays plus a summary object. Floats are
//! printed with 17 significant digits everywhere so identical runs produce
//! byte-identical files; wall-clock timings never enter the files.

use std::fmt::Write as _;

/// One cell of a data row.
#[derive(Debug, Clone)]
pub enum Field {
    Num(f64),
    Text(&'static str),
}

#[derive(Debug, Clone)]
pub enum Value {
    Num(f64),
    Text(String),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

/// Fully resolved result of one command.
#[derive(Debug, Clone)]
pub struct OutputRecord {
    pub command: &'static str,
    /// Resolved configuration echo, in fixed order.
    pub config: Vec<(&'static str, Value)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
    pub summary: Vec<(&'static str, Value)>,
}

pub const SCHEMA: &str = "capillary-asym/1";

/// 17-significant-digit float formatting shared by both formats.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_value(v: &Value) -> String {
    match v {
        Value::Num(x) => fmt_f64(*x),
        Value::Text(s) => s.clone(),
    }
}

impl OutputRecord {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# schema={SCHEMA}");
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|f| match f {
                    Field::Num(x) => fmt_f64(*x),
                    Field::Text(s) => (*s).to_string(),
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        let _ = writeln!(out, "# command={}", self.command);
        for (k, v) in &self.config {
            let _ = writeln!(out, "# config {k}={}", fmt_value(v));
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# summary {k}={}", fmt_value(v));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"schema\": \"{SCHEMA}\",");
        let _ = writeln!(out, "  \"command\": \"{}\",", self.command);
        out.push_str("  \"config\": {");
        push_object_body(&mut out, &self.config);
        out.push_str("},\n");
        let _ = writeln!(
            out,
            "  \"columns\": [{}],",
            self.columns
                .iter()
                .map(|c| format!("\"{c}\""))
                .collect::<Vec<_>>()
                .join(", ")
        );
        out.push_str("  \"rows\": [\n");
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .map(|f| match f {
                    Field::Num(x) => fmt_f64(*x),
                    Field::Text(s) => format!("\"{s}\""),
                })
                .collect();
            let sep = if i + 1 == self.rows.len() { "" } else { "," };
            let _ = writeln!(out, "    [{}]{sep}", cells.join(", "));
        }
        out.push_str("  ],\n");
        out.push_str("  \"summary\": {");
        push_object_body(&mut out, &self.summary);
        out.push_str("}\n}\n");
        out
    }
}

fn push_object_body(out: &mut String, entries: &[(&'static str, Value)]) {
    for (i, (k, v)) in entries.iter().enumerate() {
        let sep = if i + 1 == entries.len() { "" } else { "," };
        match v {
            Value::Num(x) => {
                let _ = write!(out, "\"{k}\": {}{sep}", fmt_f64(*x));
            }
            Value::Text(s) => {
                let escaped = s.replace('\\', "\\\\").replace('"', "\\\"");
                let _ = write!(out, "\"{k}\": \"{escaped}\"{sep}");
            }
        }
        if i + 1 != entries.len() {
            out.push(' ');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> OutputRecord {
        OutputRecord {
            command: "simulate",
            config: vec![
                ("epsilon", Value::Num(0.8)),
                ("format", Value::Text("csv".into())),
            ],
            columns: vec!["kind", "s", "u"],
            rows: vec![
                vec![Field::Text("grid"), Field::Num(0.0), Field::Num(0.5)],
                vec![Field::Text("max"), Field::Num(1.0), Field::Num(1.125)],
            ],
            summary: vec![("energy_residual", Value::Num(1e-9))],
        }
    }

    #[test]
    fn csv_layout_contract() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# schema=capillary-asym/1");
        assert_eq!(lines[1], "kind,s,u");
        assert!(lines[2].starts_with("grid,0.0000000000000000e0,"));
        assert!(csv.ends_with('\n'));
        assert!(csv.contains("# config epsilon=8.0000000000000004e-1"));
        assert!(csv.contains("# summary energy_residual="));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn json_is_self_describing() {
        let json = sample().to_json();
        assert!(json.contains("\"schema\": \"capillary-asym/1\""));
        assert!(json.contains("\"columns\": [\"kind\", \"s\", \"u\"]"));
        assert!(json.contains("[\"max\", 1.0000000000000000e0, 1.1250000000000000e0]"));
    }

    #[test]
    fn formatting_is_deterministic() {
        let a = sample().to_csv();
        let b = sample().to_csv();
        assert_eq!(a, b);
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    }
}
