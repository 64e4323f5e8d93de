//! Canonical `key = value` reports.
//!
//! Keys are written in sorted order, one per line, so two reports of the
//! same run differ only where the run differed. Certificate records are
//! numbered with zero-padded indices to keep that order numeric.

use std::collections::BTreeMap;
use std::fmt::Display;

use anyhow::{anyhow, bail, Context, Result};
use crownkernel::kernels::ReductionRecord;
use crownkernel::VertexSet;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunReport {
    entries: BTreeMap<String, String>,
}

impl RunReport {
    pub fn set(&mut self, key: impl Into<String>, value: impl Display) {
        let value = value.to_string();
        debug_assert!(!value.contains('\n'));
        self.entries.insert(key.into(), value);
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.entries.get(key).map(String::as_str).ok_or_else(|| anyhow!("report has no `{key}` entry"))
    }

    pub fn get_u64(&self, key: &str) -> Result<u64> {
        self.get(key)?.parse().with_context(|| format!("report entry `{key}` is not an integer"))
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(" = ").ok_or_else(|| anyhow!("report line {}: expected `key = value`", i + 1))?;
            if entries.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                bail!("report line {}: duplicate key `{}`", i + 1, k.trim());
            }
        }
        Ok(RunReport { entries })
    }

    /// Store a certificate under `certificate.*`.
    pub fn set_certificate(&mut self, records: &[ReductionRecord]) {
        self.set("certificate.count", records.len());
        for (i, r) in records.iter().enumerate() {
            let key = |f: &str| format!("certificate.{i:05}.{f}");
            self.set(key("head"), render_set(&r.head));
            self.set(key("crown"), render_set(&r.crown));
            self.set(key("decrement"), r.decrement);
            self.set(key("gadget"), r.gadget.map_or_else(|| "none".to_string(), |b| b.to_string()));
        }
    }

    pub fn certificate(&self) -> Result<Vec<ReductionRecord>> {
        let n = self.get_u64("certificate.count")? as usize;
        (0..n)
            .map(|i| {
                let key = |f: &str| format!("certificate.{i:05}.{f}");
                let gadget = match self.get(&key("gadget"))? {
                    "none" => None,
                    b => Some(b.parse().with_context(|| format!("bad gadget size in record {i}"))?),
                };
                Ok(ReductionRecord {
                    head: parse_set(self.get(&key("head"))?)?,
                    crown: parse_set(self.get(&key("crown"))?)?,
                    decrement: self.get_u64(&key("decrement"))?,
                    gadget,
                })
            })
            .collect()
    }
}

/// Space-separated ids, or `-` for the empty set.
pub fn render_set(s: &VertexSet) -> String {
    if s.is_empty() {
        return "-".into();
    }
    s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn parse_set(s: &str) -> Result<VertexSet> {
    if s == "-" {
        return Ok(VertexSet::new());
    }
    s.split_whitespace().map(|t| t.parse().with_context(|| format!("bad vertex id `{t}`"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_certificate() {
        let mut r = RunReport::default();
        r.set("problem", "coc");
        let recs: Vec<ReductionRecord> = (0..12)
            .map(|i| ReductionRecord {
                head: VertexSet::from([i]),
                crown: if i % 2 == 0 { VertexSet::new() } else { VertexSet::from([100 + i, 200]) },
                decrement: 1,
                gadget: (i % 3 == 0).then_some(i as u64),
            })
            .collect();
        r.set_certificate(&recs);
        let text = r.to_text();
        let back = RunReport::parse(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.certificate().unwrap(), recs);
        let keys: Vec<&str> = text.lines().map(|l| l.split(" = ").next().unwrap()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(RunReport::parse("no separator here").is_err());
        assert!(RunReport::parse("a = 1\na = 2").is_err());
    }

    proptest::proptest! {
        #[test]
        fn any_report_survives_a_round_trip(
            values in proptest::collection::btree_map("[a-z][a-z0-9._]{0,12}", "[ -~]{0,20}", 0..12),
            sets in proptest::collection::vec(proptest::collection::btree_set(0u32..500, 0..6), 0..5),
        ) {
            let mut r = RunReport::default();
            for (k, v) in &values {
                // Leading and trailing blanks are not preserved by design.
                r.set(k.clone(), v.trim());
            }
            let recs: Vec<ReductionRecord> = sets
                .iter()
                .enumerate()
                .map(|(i, s)| ReductionRecord { head: s.clone(), crown: VertexSet::new(), decrement: i as u64, gadget: None })
                .collect();
            r.set_certificate(&recs);
            let back = RunReport::parse(&r.to_text()).unwrap();
            proptest::prop_assert_eq!(back.certificate().unwrap(), recs);
            proptest::prop_assert_eq!(back, r);
        }
    }
}
