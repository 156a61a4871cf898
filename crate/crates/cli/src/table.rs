//! Plot-ready threshold table: one row per (state, channel).

use lmes_core::noise::ChannelKind;

pub const HEADER: &str = "# state\tchannel\tthreshold\n";

/// One finished (or failed) threshold run.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub state: String,
    pub channel: ChannelKind,
    /// `None` when the run did not produce a threshold.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TableStatus {
    /// Dropped repeats of an already listed (state, channel).
    pub duplicates: Vec<String>,
    /// Runs without a threshold; listed as comments, not rows.
    pub missing: Vec<String>,
}

impl TableStatus {
    pub fn is_partial(&self) -> bool {
        !self.missing.is_empty()
    }
}

/// Rows keep input order; the first of any repeated (state, channel) wins.
/// Lines starting with `#` are comments for gnuplot and similar tools.
pub fn emit_threshold_table(results: &[ThresholdRow]) -> (String, TableStatus) {
    let mut out = String::from(HEADER);
    let mut status = TableStatus::default();
    let mut seen: Vec<(&str, ChannelKind)> = Vec::new();
    for r in results {
        let key = (r.state.as_str(), r.channel);
        let label = format!("{} {}", r.state, r.channel);
        if seen.contains(&key) {
            status.duplicates.push(label);
            continue;
        }
        seen.push(key);
        match r.threshold {
            Some(t) => out.push_str(&format!("{}\t{}\t{t:.6}\n", r.state, r.channel)),
            None => status.missing.push(label),
        }
    }
    for m in &status.missing {
        out.push_str(&format!("# missing: {m}\n"));
    }
    (out, status)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(state: &str, t: Option<f64>) -> ThresholdRow {
        ThresholdRow {
            state: state.into(),
            channel: ChannelKind::GlobalWhite,
            threshold: t,
        }
    }

    #[test]
    fn three_states_three_rows() {
        let (t, s) = emit_threshold_table(&[row("u123", Some(0.65)), row("bell", Some(0.5)), row("ghz5", Some(0.4))]);
        assert_eq!(t.lines().filter(|l| !l.starts_with('#')).count(), 3);
        assert!(t.contains("bell\tglobal_white\t0.500000\n"));
        assert_eq!(s, TableStatus::default());
    }

    #[test]
    fn empty_is_header_only() {
        let (t, s) = emit_threshold_table(&[]);
        assert_eq!(t, HEADER);
        assert!(!s.is_partial());
    }

    #[test]
    fn duplicates_and_missing() {
        let (t, s) = emit_threshold_table(&[row("bell", Some(0.5)), row("bell", Some(0.7)), row("u123", None)]);
        assert_eq!(s.duplicates, ["bell global_white"]);
        assert!(s.is_partial());
        assert!(t.contains("bell\tglobal_white\t0.500000\n"));
        assert!(!t.contains("0.700000"));
        assert!(t.ends_with("# missing: u123 global_white\n"));
    }
}
