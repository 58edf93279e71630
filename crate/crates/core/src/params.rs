//! Benchmark parameter sets: database generation, workload execution, store
//! and clustering configuration, and whole-run validation.
//!
//! Field names follow the benchmark's parameter vocabulary (`nc`, `maxnref`,
//! `coldn`, ...) so CLI flags, config files, and reports all speak the same
//! language.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::RefType;
use crate::rng::{Distribution, RngError, DEFAULT_RSEED};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{field}: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("occurrence probabilities sum to {sum}, expected 1.0 (tolerance 1e-9)")]
    ProbabilitySum { sum: f64 },
    #[error("distribution {field}: {source}")]
    Distribution {
        field: &'static str,
        source: RngError,
    },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

/// Per-class integer parameter: a single default, optionally overridden for
/// individual classes (`maxnref(i)`, `basesize(i)`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerClass {
    Single(u64),
    Overridden {
        default: u64,
        #[serde(default)]
        per_class: Vec<ClassOverride>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassOverride {
    pub class: u64,
    pub value: u64,
}

impl PerClass {
    pub fn get(&self, class_id: u64) -> u64 {
        match self {
            PerClass::Single(v) => *v,
            PerClass::Overridden { default, per_class } => per_class
                .iter()
                .find(|o| o.class == class_id)
                .map_or(*default, |o| o.value),
        }
    }
}

fn default_nc() -> u64 {
    50
}
fn default_maxnref() -> PerClass {
    PerClass::Single(10)
}
fn default_basesize() -> PerClass {
    PerClass::Single(50)
}
fn default_no() -> u64 {
    20_000
}
fn default_nreft() -> u32 {
    4
}
fn default_attrange() -> u32 {
    1
}
fn default_maxretry() -> u32 {
    3
}
fn default_pnil() -> f64 {
    0.1
}
fn default_acyclic_types() -> BTreeSet<u32> {
    BTreeSet::from([0, 1])
}

/// Parameters of the generated object base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatabaseParams {
    /// Number of classes.
    pub nc: u64,
    /// Maximum number of reference slots, per class.
    pub maxnref: PerClass,
    /// Instance base size in bytes, per class.
    pub basesize: PerClass,
    /// Total number of objects.
    pub no: u64,
    /// Number of reference types.
    pub nreft: u32,
    /// Integer attributes per object.
    pub attrange: u32,
    /// Class locality window; `None` means the whole class space (`nc`).
    pub clocref: Option<u64>,
    /// Object locality window; `None` means the whole object space (`no`).
    pub olocref: Option<u64>,
    /// Retry bound when linking fails or would close a forbidden cycle.
    pub maxretry: u32,
    /// Probability that a class reference slot is NIL, applied before target
    /// selection.
    pub pnil: f64,
    /// Reference types whose class-level subgraph must stay acyclic.
    pub acyclic_types: BTreeSet<u32>,
    /// Reference type random distribution (keys: class, slot).
    pub dist1: Distribution,
    /// Class reference random distribution, applied within the locality
    /// window (keys: class, slot).
    pub dist2: Distribution,
    /// Objects-in-classes random distribution: index into the live class
    /// list (keys: oid).
    pub dist3: Distribution,
    /// Object reference random distribution: index into the candidate list,
    /// target class iterator intersected with the locality window
    /// (keys: slot, oid).
    pub dist4: Distribution,
}

impl Default for DatabaseParams {
    fn default() -> Self {
        DatabaseParams {
            nc: default_nc(),
            maxnref: default_maxnref(),
            basesize: default_basesize(),
            no: default_no(),
            nreft: default_nreft(),
            attrange: default_attrange(),
            clocref: None,
            olocref: None,
            maxretry: default_maxretry(),
            pnil: default_pnil(),
            acyclic_types: default_acyclic_types(),
            dist1: Distribution::Uniform,
            dist2: Distribution::Uniform,
            dist3: Distribution::Uniform,
            dist4: Distribution::Uniform,
        }
    }
}

impl DatabaseParams {
    /// Effective class locality window.
    pub fn clocref(&self) -> u64 {
        self.clocref.unwrap_or(self.nc)
    }

    /// Effective object locality window.
    pub fn olocref(&self) -> u64 {
        self.olocref.unwrap_or(self.no)
    }

    /// Acyclic-flagged reference types.
    pub fn acyclic(&self) -> impl Iterator<Item = RefType> + '_ {
        self.acyclic_types.iter().map(|&t| RefType(t))
    }

    pub fn is_acyclic_type(&self, t: RefType) -> bool {
        self.acyclic_types.contains(&t.0)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.nc < 1 {
            return Err(invalid("nc", "must be >= 1"));
        }
        if self.nreft < 1 {
            return Err(invalid("nreft", "must be >= 1"));
        }
        if self.attrange < 1 {
            return Err(invalid("attrange", "must be >= 1"));
        }
        if let Some(c) = self.clocref {
            if c > self.nc {
                return Err(invalid("clocref", format!("{c} exceeds nc={}", self.nc)));
            }
        }
        if let Some(o) = self.olocref {
            if o > self.no {
                return Err(invalid("olocref", format!("{o} exceeds no={}", self.no)));
            }
        }
        if !(0.0..=1.0).contains(&self.pnil) {
            return Err(invalid("pnil", "must be in [0, 1]"));
        }
        if self.acyclic_types.iter().any(|&t| t >= self.nreft) {
            return Err(invalid("acyclic_types", "contains a type >= nreft"));
        }
        for (field, dist) in [
            ("dist1", &self.dist1),
            ("dist2", &self.dist2),
            ("dist3", &self.dist3),
            ("dist4", &self.dist4),
        ] {
            dist.validate()
                .map_err(|source| ConfigError::Distribution { field, source })?;
        }
        Ok(())
    }
}

/// Occurrence probabilities of the 13 transaction kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TxnProbabilities {
    pub prnd: f64,
    pub pscan: f64,
    pub prange: f64,
    pub pset: f64,
    pub psimple: f64,
    pub phier: f64,
    pub pstoch: f64,
    pub pcinsert: f64,
    pub pcdel: f64,
    pub poinsert: f64,
    pub podel: f64,
    pub prndup: f64,
    pub psequp: f64,
}

impl Default for TxnProbabilities {
    fn default() -> Self {
        TxnProbabilities {
            prnd: 0.1,
            pscan: 0.05,
            prange: 0.05,
            pset: 0.2,
            psimple: 0.2,
            phier: 0.2,
            pstoch: 0.1,
            pcinsert: 0.005,
            pcdel: 0.005,
            poinsert: 0.02,
            podel: 0.02,
            prndup: 0.025,
            psequp: 0.025,
        }
    }
}

impl TxnProbabilities {
    /// Probabilities in transaction-kind order.
    pub fn as_array(&self) -> [f64; 13] {
        [
            self.prnd,
            self.pscan,
            self.prange,
            self.pset,
            self.psimple,
            self.phier,
            self.pstoch,
            self.pcinsert,
            self.pcdel,
            self.poinsert,
            self.podel,
            self.prndup,
            self.psequp,
        ]
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.as_array().iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(invalid("probabilities", "each must be in [0, 1]"));
        }
        let sum = self.sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ConfigError::ProbabilitySum { sum });
        }
        Ok(())
    }
}

fn default_nrnd() -> u64 {
    50
}
fn default_ntest() -> u32 {
    1
}
fn default_setdepth() -> u32 {
    3
}
fn default_simdepth() -> u32 {
    3
}
fn default_hiedepth() -> u32 {
    5
}
fn default_stodepth() -> u32 {
    50
}
fn default_nupdt() -> u64 {
    50
}
fn default_coldn() -> u64 {
    1_000
}
fn default_hotn() -> u64 {
    10_000
}
fn default_clientn() -> u32 {
    1
}

/// Parameters of the transaction workload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkloadParams {
    /// Objects accessed per Random Access transaction.
    pub nrnd: u64,
    /// Attributes tested per instance in Range Lookups.
    pub ntest: u32,
    /// Depth of Set-Oriented Accesses.
    pub setdepth: u32,
    /// Depth of Simple Traversals.
    pub simdepth: u32,
    /// Depth of Hierarchy Traversals.
    pub hiedepth: u32,
    /// Depth of Stochastic Traversals.
    pub stodepth: u32,
    /// Objects updated per Random Update transaction.
    pub nupdt: u64,
    /// Random Access objects (keys: draw ordinal; index into live OIDs).
    pub dist5: Distribution,
    /// Sequential Scan classes (keys: draw ordinal; index into live classes).
    pub dist6: Distribution,
    /// Transaction root objects (keys: draw ordinal; index into live OIDs).
    pub dist7: Distribution,
    /// Schema Evolution classes (keys: draw ordinal; index into live classes).
    pub dist8: Distribution,
    /// Database Evolution objects (keys: draw ordinal; index into live OIDs).
    pub dist9: Distribution,
    /// Random Update objects (keys: draw ordinal; index into live OIDs).
    pub dista: Distribution,
    /// Sequential Update classes (keys: draw ordinal; index into live classes).
    pub distb: Distribution,
    /// Occurrence probabilities of the 13 transaction kinds.
    #[serde(flatten)]
    pub probabilities: TxnProbabilities,
    /// Transactions in the cold run.
    pub coldn: u64,
    /// Transactions in the warm run.
    pub hotn: u64,
    /// Latency between transactions, in seconds, charged to the simulated
    /// clock (never slept).
    pub think: f64,
    /// Number of client streams, executed round-robin.
    pub clientn: u32,
    /// Random generator seed.
    pub rseed: u64,
    /// Probability that a traversal runs over backward references.
    pub reverse_fraction: f64,
}

impl Default for WorkloadParams {
    fn default() -> Self {
        WorkloadParams {
            nrnd: default_nrnd(),
            ntest: default_ntest(),
            setdepth: default_setdepth(),
            simdepth: default_simdepth(),
            hiedepth: default_hiedepth(),
            stodepth: default_stodepth(),
            nupdt: default_nupdt(),
            dist5: Distribution::Uniform,
            dist6: Distribution::Uniform,
            dist7: Distribution::Uniform,
            dist8: Distribution::Uniform,
            dist9: Distribution::Uniform,
            dista: Distribution::Uniform,
            distb: Distribution::Uniform,
            probabilities: TxnProbabilities::default(),
            coldn: default_coldn(),
            hotn: default_hotn(),
            think: 0.0,
            clientn: default_clientn(),
            rseed: DEFAULT_RSEED,
            reverse_fraction: 0.0,
        }
    }
}

impl WorkloadParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.probabilities.validate()?;
        if self.clientn < 1 {
            return Err(invalid("clientn", "must be >= 1"));
        }
        if self.think < 0.0 {
            return Err(invalid("think", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.reverse_fraction) {
            return Err(invalid("reverse_fraction", "must be in [0, 1]"));
        }
        for (field, dist) in [
            ("dist5", &self.dist5),
            ("dist6", &self.dist6),
            ("dist7", &self.dist7),
            ("dist8", &self.dist8),
            ("dist9", &self.dist9),
            ("dista", &self.dista),
            ("distb", &self.distb),
        ] {
            dist.validate()
                .map_err(|source| ConfigError::Distribution { field, source })?;
        }
        Ok(())
    }
}

fn default_page_size() -> u64 {
    4096
}
fn default_buffer_pages() -> usize {
    1024
}

/// Buffer replacement policy of the simulated store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Replacement {
    #[default]
    Lru,
}

/// Configuration of the simulated page store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoreConfig {
    /// Page size in bytes.
    pub page_size: u64,
    /// Buffer pool capacity in pages.
    pub buffer_pages: usize,
    /// Replacement policy.
    pub replacement: Replacement,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig {
            page_size: default_page_size(),
            buffer_pages: default_buffer_pages(),
            replacement: Replacement::Lru,
        }
    }
}

impl StoreConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.page_size < 1 {
            return Err(invalid("store.page_size", "must be >= 1"));
        }
        if self.buffer_pages < 1 {
            return Err(invalid("store.buffer_pages", "must be >= 1"));
        }
        Ok(())
    }
}

/// Which clustering policy drives placement decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Baseline: never proposes a placement.
    #[default]
    None,
    /// Reference-heat policy: clusters along frequently traversed edges.
    Heat,
}

fn default_threshold() -> u64 {
    2
}
fn default_max_cluster_pages() -> u64 {
    16
}
fn default_window() -> u64 {
    100
}

/// Clustering policy configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusteringConfig {
    pub policy: PolicyKind,
    /// Minimum edge heat for an edge to seed or extend a cluster.
    pub threshold: u64,
    /// Cluster size cap in bytes; `None` means 16 pages.
    pub max_cluster_bytes: Option<u64>,
    /// Minimum observed transactions before a placement is proposed.
    pub window: u64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig {
            policy: PolicyKind::None,
            threshold: default_threshold(),
            max_cluster_bytes: None,
            window: default_window(),
        }
    }
}

impl ClusteringConfig {
    /// Effective cluster byte cap for a given page size.
    pub fn max_cluster_bytes(&self, page_size: u64) -> u64 {
        self.max_cluster_bytes
            .unwrap_or(default_max_cluster_pages() * page_size)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.threshold < 1 {
            return Err(invalid("clustering.threshold", "must be >= 1"));
        }
        Ok(())
    }
}

fn default_replicate() -> u32 {
    1
}

/// The merged configuration of one benchmark invocation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub database: DatabaseParams,
    pub workload: WorkloadParams,
    pub store: StoreConfig,
    pub clustering: ClusteringConfig,
    /// How many times the whole run repeats on freshly generated bases
    /// (seeds `rseed`, `rseed+1`, ...).
    pub replicate: u32,
}

impl RunConfig {
    /// Validates the whole configuration; no partial side effects on failure.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.database.validate()?;
        self.workload.validate()?;
        self.store.validate()?;
        self.clustering.validate()?;
        if self.replicate < 1 {
            return Err(invalid("replicate", "must be >= 1"));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON encoding, hex-encoded. Identifies the
    /// effective parameter set in reports.
    pub fn params_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&json);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
