//! Output formatting shared by the CLI and the reports.

use serde_json::Value;

/// 17 significant digits in scientific notation; round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// `serialize_with` adapter writing [`fmt_f64`] strings.
pub fn decimal<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_f64(*x))
}

pub fn decimal_pair<S: serde::Serializer>(x: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&fmt_f64(x.0))?;
    t.serialize_element(&fmt_f64(x.1))?;
    t.end()
}

/// Identifier of the random generator, echoed in every output.
pub const RNG_ID: &str = "chacha8-stream-v1";

/// Run metadata carried by every output document.
#[derive(Debug, Clone, Default)]
pub struct Metadata {
    pub command: String,
    pub seed: Option<u64>,
    pub config: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: impl Into<String>) -> Self {
        Metadata {
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.config.push((key.into(), value.to_string()));
    }

    pub fn to_json(&self) -> Value {
        let config: serde_json::Map<String, Value> = self
            .config
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        serde_json::json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "seed": self.seed,
            "rng": RNG_ID,
            "config": config,
        })
    }

    /// `#`-prefixed preamble lines for CSV output, LF terminated.
    pub fn csv_preamble(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# {} {}\n",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION")
        ));
        out.push_str(&format!("# command: {}\n", self.command));
        if let Some(seed) = self.seed {
            out.push_str(&format!("# seed: {seed}\n"));
        }
        out.push_str(&format!("# rng: {RNG_ID}\n"));
        for (k, v) in &self.config {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out
    }
}

/// Pretty JSON with a trailing newline.
pub fn json_document(meta: &Metadata, body: Value) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert("metadata".into(), meta.to_json());
    if let Value::Object(fields) = body {
        doc.extend(fields);
    } else {
        doc.insert("result".into(), body);
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, -7.25e10] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn preamble_lines_are_comments() {
        let mut meta = Metadata::new("sweep").seed(7);
        meta.push("grid", "0.1:0.9:0.1");
        let pre = meta.csv_preamble();
        assert!(pre.lines().all(|l| l.starts_with("# ")));
        assert!(pre.contains("# seed: 7\n"));
        assert!(pre.ends_with('\n'));
    }
}
