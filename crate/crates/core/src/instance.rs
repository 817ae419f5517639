//! Instance data model.
//!
//! A materialized [`OnlineInstance`] stores its arrivals as runs of identical neighbor
//! sets. Adversarial constructions keep the same neighborhood for long stretches, so
//! a horizon of 10^6 arrivals costs a few thousand runs instead of 10^8 indices. The
//! JSON form is always the expanded one.

use std::sync::Arc;

use serde::de::Deserializer;
use serde::ser::{SerializeSeq, SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::budget::{BudgetState, Cap};
use crate::error::{param, Error, Result};
use crate::rng::{nested_bernoulli_indices, stream_rng, Stream};

/// Neighbor set of one arrival: sorted, duplicate-free offline node indices.
pub type NodeSet = Arc<[u32]>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RefillSchedule {
    /// No refills at all.
    None,
    /// Every node gains one unit at each `t` with `t mod m = 0`.
    Periodic { m: u64 },
    /// `eta_{u,t}` ~ Bernoulli(beta/n), independent per (u, t), drawn from `seed`. The
    /// draw is nested in `beta`: raising `beta` only adds refills.
    Bernoulli { beta: f64, seed: u64 },
    /// `matrix[u][t-1]` units for node `u` at step `t`.
    Explicit { matrix: Vec<Vec<u64>> },
}

impl RefillSchedule {
    pub fn validate(&self, n: u32, horizon: u64) -> Result<()> {
        match self {
            RefillSchedule::None => Ok(()),
            RefillSchedule::Periodic { m } => {
                if *m == 0 {
                    return Err(param("periodic refill period must be positive"));
                }
                Ok(())
            }
            RefillSchedule::Bernoulli { beta, .. } => {
                if !(beta.is_finite() && *beta >= 0.0) {
                    return Err(param(format!("beta must be non-negative, got {beta}")));
                }
                if n > 0 && *beta > n as f64 {
                    return Err(param(format!("beta/n = {}/{} exceeds 1", beta, n)));
                }
                Ok(())
            }
            RefillSchedule::Explicit { matrix } => {
                if matrix.len() != n as usize {
                    return Err(Error::InvalidInstance(format!(
                        "explicit refill matrix has {} rows, expected n = {}",
                        matrix.len(),
                        n
                    )));
                }
                if let Some(row) = matrix.iter().find(|r| r.len() as u64 != horizon) {
                    return Err(Error::InvalidInstance(format!(
                        "explicit refill row has {} columns, expected T = {}",
                        row.len(),
                        horizon
                    )));
                }
                Ok(())
            }
        }
    }

    /// Append `(u, eta_{u,t})` for every node refilled at step `t` (1-based), in
    /// increasing node order.
    pub fn refills_at(&self, t: u64, n: u32, out: &mut Vec<(u32, u64)>) {
        match self {
            RefillSchedule::None => {}
            RefillSchedule::Periodic { m } => {
                if t % m == 0 {
                    out.extend((0..n).map(|u| (u, 1)));
                }
            }
            RefillSchedule::Bernoulli { beta, seed } => {
                if *beta <= 0.0 || n == 0 {
                    return;
                }
                let mut rng = stream_rng(*seed, Stream::Refills, t);
                let mut idx = Vec::new();
                nested_bernoulli_indices(n, beta / n as f64, &mut rng, &mut idx);
                out.extend(idx.into_iter().map(|u| (u, 1)));
            }
            RefillSchedule::Explicit { matrix } => {
                for (u, row) in matrix.iter().enumerate() {
                    if let Some(&eta) = row.get((t - 1) as usize) {
                        if eta > 0 {
                            out.push((u as u32, eta));
                        }
                    }
                }
            }
        }
    }

    /// Total units delivered over `1..=horizon` (used for network capacity bounds).
    pub fn total(&self, n: u32, horizon: u64) -> u64 {
        match self {
            RefillSchedule::None => 0,
            RefillSchedule::Periodic { m } => n as u64 * (horizon / m),
            RefillSchedule::Explicit { matrix } => matrix.iter().flatten().sum(),
            RefillSchedule::Bernoulli { .. } => {
                let mut buf = Vec::new();
                (1..=horizon)
                    .map(|t| {
                        buf.clear();
                        self.refills_at(t, n, &mut buf);
                        buf.iter().map(|&(_, e)| e).sum::<u64>()
                    })
                    .sum()
            }
        }
    }
}

/// Static description shared by materialized and adaptive instances.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceHeader {
    pub n: u32,
    pub horizon: u64,
    pub b0: u64,
    pub cap: Cap,
    pub refills: RefillSchedule,
}

impl InstanceHeader {
    pub fn validate(&self) -> Result<()> {
        if let Cap::Bounded(k) = self.cap {
            if self.b0 > k {
                return Err(Error::InvalidInstance(format!(
                    "initial budget {} exceeds cap {}",
                    self.b0, k
                )));
            }
        }
        self.refills.validate(self.n, self.horizon)
    }
}

/// `len` consecutive arrivals sharing the neighbor set `nodes`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrivalRun {
    pub len: u64,
    pub nodes: NodeSet,
}

/// A fully materialized instance.
#[derive(Clone, Debug, PartialEq)]
pub struct OnlineInstance {
    header: InstanceHeader,
    runs: Vec<ArrivalRun>,
}

impl OnlineInstance {
    /// Build from runs, checking every structural invariant.
    pub fn from_runs(header: InstanceHeader, runs: Vec<ArrivalRun>) -> Result<Self> {
        header.validate()?;
        let total: u64 = runs.iter().map(|r| r.len).sum();
        if total != header.horizon {
            return Err(Error::InvalidInstance(format!(
                "{} arrivals given for horizon T = {}",
                total, header.horizon
            )));
        }
        for run in &runs {
            check_node_set(&run.nodes, header.n)?;
        }
        let mut inst = Self {
            header,
            runs: Vec::with_capacity(runs.len()),
        };
        for run in runs {
            inst.push_run(run.nodes, run.len);
        }
        Ok(inst)
    }

    /// Build from one neighbor list per arrival.
    pub fn from_neighbors(header: InstanceHeader, neighbors: Vec<Vec<u32>>) -> Result<Self> {
        if neighbors.len() as u64 != header.horizon {
            return Err(Error::InvalidInstance(format!(
                "{} neighbor sets given for horizon T = {}",
                neighbors.len(),
                header.horizon
            )));
        }
        let runs = neighbors
            .into_iter()
            .map(|v| ArrivalRun {
                len: 1,
                nodes: v.into(),
            })
            .collect();
        Self::from_runs(header, runs)
    }

    fn push_run(&mut self, nodes: NodeSet, len: u64) {
        if len == 0 {
            return;
        }
        if let Some(last) = self.runs.last_mut() {
            if Arc::ptr_eq(&last.nodes, &nodes) || last.nodes == nodes {
                last.len += len;
                return;
            }
        }
        self.runs.push(ArrivalRun { len, nodes });
    }

    pub fn header(&self) -> &InstanceHeader {
        &self.header
    }

    pub fn n(&self) -> u32 {
        self.header.n
    }

    pub fn horizon(&self) -> u64 {
        self.header.horizon
    }

    pub fn runs(&self) -> &[ArrivalRun] {
        &self.runs
    }

    /// Neighbor sets in arrival order, `t = 1..=T`.
    pub fn neighbors(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.runs
            .iter()
            .flat_map(|r| std::iter::repeat_n(&*r.nodes, r.len as usize))
    }

    pub fn edge_count(&self) -> u64 {
        self.runs.iter().map(|r| r.len * r.nodes.len() as u64).sum()
    }

    /// A fresh reveal cursor over this instance.
    pub fn source(&self) -> FixedSource<'_> {
        FixedSource {
            inst: self,
            run: 0,
            offset: 0,
        }
    }

    pub fn with_refills(mut self, refills: RefillSchedule) -> Result<Self> {
        refills.validate(self.header.n, self.header.horizon)?;
        self.header.refills = refills;
        Ok(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(s)?;
        doc.try_into()
    }
}

fn check_node_set(nodes: &[u32], n: u32) -> Result<()> {
    if let Some(&u) = nodes.iter().find(|&&u| u >= n) {
        return Err(Error::InvalidInstance(format!(
            "neighbor {u} out of range for n = {n}"
        )));
    }
    if nodes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInstance(
            "neighbor sets must be strictly increasing (sorted, no duplicates)".into(),
        ));
    }
    Ok(())
}

/// Incrementally builds an instance from revealed neighbor sets (adversary transcripts).
#[derive(Debug)]
pub struct TranscriptRecorder {
    header: InstanceHeader,
    runs: Vec<ArrivalRun>,
}

impl TranscriptRecorder {
    pub fn new(header: InstanceHeader) -> Self {
        Self {
            header,
            runs: Vec::new(),
        }
    }

    pub fn push(&mut self, nodes: &NodeSet) {
        if let Some(last) = self.runs.last_mut() {
            if Arc::ptr_eq(&last.nodes, nodes) || last.nodes == *nodes {
                last.len += 1;
                return;
            }
        }
        self.runs.push(ArrivalRun {
            len: 1,
            nodes: nodes.clone(),
        });
    }

    /// Freeze into a materialized instance (validated like any other).
    pub fn finish(self) -> Result<OnlineInstance> {
        OnlineInstance::from_runs(self.header, self.runs)
    }
}

/// Reactive instance protocol. `reveal(t, ·)` is called exactly once per `t`, in order,
/// and always before `observe(t, ·)`.
pub trait AdaptiveInstance {
    fn header(&self) -> &InstanceHeader;

    /// Neighbor set of arrival `t` given the budgets at the end of step `t - 1`.
    fn reveal(&mut self, t: u64, state: &BudgetState) -> NodeSet;

    /// Acknowledge the decision taken for arrival `t`.
    fn observe(&mut self, t: u64, choice: Option<u32>);
}

/// Sequential reader over a materialized instance.
#[derive(Debug)]
pub struct FixedSource<'a> {
    inst: &'a OnlineInstance,
    run: usize,
    offset: u64,
}

impl AdaptiveInstance for FixedSource<'_> {
    fn header(&self) -> &InstanceHeader {
        &self.inst.header
    }

    fn reveal(&mut self, _t: u64, _state: &BudgetState) -> NodeSet {
        while self.offset >= self.inst.runs[self.run].len {
            self.run += 1;
            self.offset = 0;
        }
        self.offset += 1;
        self.inst.runs[self.run].nodes.clone()
    }

    fn observe(&mut self, _t: u64, _choice: Option<u32>) {}
}

// JSON document: {n, T, b0, cap, refills, neighbors: [[...], ...]}.

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    n: u32,
    #[serde(rename = "T")]
    horizon: u64,
    b0: u64,
    cap: Cap,
    refills: RefillSchedule,
    neighbors: Vec<Vec<u32>>,
}

impl TryFrom<InstanceDoc> for OnlineInstance {
    type Error = Error;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        let header = InstanceHeader {
            n: doc.n,
            horizon: doc.horizon,
            b0: doc.b0,
            cap: doc.cap,
            refills: doc.refills,
        };
        OnlineInstance::from_neighbors(header, doc.neighbors)
    }
}

impl<'de> Deserialize<'de> for OnlineInstance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = InstanceDoc::deserialize(d)?;
        doc.try_into().map_err(serde::de::Error::custom)
    }
}

struct Expanded<'a>(&'a [ArrivalRun]);

impl Serialize for Expanded<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let total: u64 = self.0.iter().map(|r| r.len).sum();
        let mut seq = s.serialize_seq(Some(total as usize))?;
        for run in self.0 {
            for _ in 0..run.len {
                seq.serialize_element(&*run.nodes)?;
            }
        }
        seq.end()
    }
}

impl Serialize for OnlineInstance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("OnlineInstance", 6)?;
        st.serialize_field("n", &self.header.n)?;
        st.serialize_field("T", &self.header.horizon)?;
        st.serialize_field("b0", &self.header.b0)?;
        st.serialize_field("cap", &self.header.cap)?;
        st.serialize_field("refills", &self.header.refills)?;
        st.serialize_field("neighbors", &Expanded(&self.runs))?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(n: u32, horizon: u64) -> InstanceHeader {
        InstanceHeader {
            n,
            horizon,
            b0: 1,
            cap: Cap::Unbounded,
            refills: RefillSchedule::Periodic { m: 2 },
        }
    }

    #[test]
    fn runs_are_compressed() {
        let inst =
            OnlineInstance::from_neighbors(header(3, 4), vec![vec![0, 1], vec![0, 1], vec![2], vec![2]])
                .unwrap();
        assert_eq!(inst.runs().len(), 2);
        let expanded: Vec<Vec<u32>> = inst.neighbors().map(|s| s.to_vec()).collect();
        assert_eq!(expanded, vec![vec![0, 1], vec![0, 1], vec![2], vec![2]]);
        assert_eq!(inst.edge_count(), 6);
    }

    #[test]
    fn rejects_bad_neighbor_sets() {
        assert!(OnlineInstance::from_neighbors(header(2, 1), vec![vec![2]]).is_err());
        assert!(OnlineInstance::from_neighbors(header(3, 1), vec![vec![1, 1]]).is_err());
        assert!(OnlineInstance::from_neighbors(header(3, 1), vec![vec![2, 1]]).is_err());
        assert!(OnlineInstance::from_neighbors(header(3, 2), vec![vec![1]]).is_err());
    }

    #[test]
    fn rejects_initial_budget_above_cap() {
        let mut h = header(1, 1);
        h.b0 = 3;
        h.cap = Cap::Bounded(2);
        assert!(OnlineInstance::from_neighbors(h, vec![vec![0]]).is_err());
    }

    #[test]
    fn json_round_trip_and_schema() {
        let inst =
            OnlineInstance::from_neighbors(header(3, 3), vec![vec![0, 2], vec![], vec![1]]).unwrap();
        let s = inst.to_json().unwrap();
        assert_eq!(
            s,
            r#"{"n":3,"T":3,"b0":1,"cap":"unbounded","refills":{"kind":"periodic","m":2},"neighbors":[[0,2],[],[1]]}"#
        );
        assert_eq!(OnlineInstance::from_json(&s).unwrap(), inst);
        assert!(OnlineInstance::from_json(&s.replace("\"b0\"", "\"bogus\":1,\"b0\"")).is_err());
    }

    #[test]
    fn periodic_refills_hit_all_nodes_on_multiples() {
        let r = RefillSchedule::Periodic { m: 3 };
        let mut out = Vec::new();
        r.refills_at(2, 4, &mut out);
        assert!(out.is_empty());
        r.refills_at(3, 4, &mut out);
        assert_eq!(out, vec![(0, 1), (1, 1), (2, 1), (3, 1)]);
        assert_eq!(r.total(4, 10), 12);
    }

    #[test]
    fn bernoulli_refills_are_keyed_by_time() {
        let r = RefillSchedule::Bernoulli { beta: 5.0, seed: 9 };
        let mut a = Vec::new();
        let mut b = Vec::new();
        r.refills_at(17, 10, &mut a);
        r.refills_at(17, 10, &mut b);
        assert_eq!(a, b);
        assert!(RefillSchedule::Bernoulli { beta: 11.0, seed: 0 }.validate(10, 5).is_err());
    }
}
