//! Crate-wide error type.

use alloc::string::String;
use alloc::vec::Vec;

use crate::types::ClusterId;

/// Errors raised by the core operations.
///
/// Every fallible operation in this crate reports one of these variants;
/// none of them silently produce NaN or clamp bad input.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A feature vector had zero norm and cannot be normalized.
    ZeroNorm,
    /// A feature vector contained a NaN or infinite entry.
    NonFinite,
    /// A vector had the wrong number of entries.
    DimensionMismatch { expected: usize, got: usize },
    /// A centroid was requested for an empty member set.
    EmptyMemberSet,
    /// The member mean vanished (perfectly antipodal members), so no
    /// normalized centroid exists.
    DegenerateCentroid,
    /// A memory slot id was out of range.
    InvalidSlot { slot: usize, count: usize },
    /// A slot appeared in more than one cluster.
    DuplicateMember { slot: usize },
    /// A cluster was constructed with no members.
    EmptyCluster,
    /// A cluster id did not reference the current cluster set.
    UnknownCluster(ClusterId),
    /// An instance id appeared in more than one scene.
    DuplicateSceneMembership { instance: usize },
    /// An instance was not covered by the scene index.
    MissingScene { instance: usize },
    /// A foreground group was constructed with no features.
    EmptyInstanceGroup,
    /// A feature appeared in both the foreground and background sets.
    ForegroundBackgroundOverlap,
    /// An anchor index was out of range for the batch.
    InvalidAnchor { anchor: usize, foreground: usize },
    /// Hard-negative selection needs at least two clusters.
    NoNegativeClusters,
    /// The anchor's instance group has no other proposal to pull toward.
    NoPositiveProposal,
    /// The batch has no foreground feature from a different instance.
    NoNegativeInstance,
    /// The batch has no background features.
    NoBackground,
    /// A configuration field was outside its documented range.
    InvalidConfig(String),
    /// Metric inputs did not cover the same instance set.
    MismatchedInstanceSets,
    /// Pairwise scores need at least two instances.
    TooFewInstances { got: usize },
    /// Query identities with no gallery match, listed by identity.
    QueryIdentityMissing(Vec<u64>),
    /// Retrieval scoring was invoked with no queries.
    NoQueries,
    /// Retrieval scoring was invoked with an empty gallery.
    EmptyGallery,
    /// DBSCAN was invoked on an empty memory.
    EmptyMemory,
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::ZeroNorm => write!(f, "zero norm: cannot normalize the zero vector"),
            Error::NonFinite => write!(f, "feature contains a non-finite entry"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::EmptyMemberSet => write!(f, "centroid of an empty member set"),
            Error::DegenerateCentroid => {
                write!(f, "degenerate centroid: member mean has zero norm")
            }
            Error::InvalidSlot { slot, count } => {
                write!(f, "invalid slot {slot}: memory holds {count} slots")
            }
            Error::DuplicateMember { slot } => {
                write!(f, "slot {slot} appears in more than one cluster")
            }
            Error::EmptyCluster => write!(f, "clusters must be nonempty"),
            Error::UnknownCluster(id) => write!(f, "unknown cluster id {}", id.0),
            Error::DuplicateSceneMembership { instance } => {
                write!(f, "instance {instance} appears in more than one scene")
            }
            Error::MissingScene { instance } => {
                write!(f, "instance {instance} is not covered by the scene index")
            }
            Error::EmptyInstanceGroup => write!(f, "foreground groups must be nonempty"),
            Error::ForegroundBackgroundOverlap => {
                write!(f, "foreground and background feature sets overlap")
            }
            Error::InvalidAnchor { anchor, foreground } => {
                write!(f, "anchor {anchor} out of range: {foreground} foreground features")
            }
            Error::NoNegativeClusters => {
                write!(f, "no negatives: hard-negative selection needs at least two clusters")
            }
            Error::NoPositiveProposal => {
                write!(f, "no positive proposal: anchor's instance group has a single member")
            }
            Error::NoNegativeInstance => {
                write!(f, "no negative instance: batch has no foreground from another instance")
            }
            Error::NoBackground => write!(f, "no background features in batch"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::MismatchedInstanceSets => {
                write!(f, "assignment and truth cover different instance sets")
            }
            Error::TooFewInstances { got } => {
                write!(f, "pairwise scores need at least 2 instances, got {got}")
            }
            Error::QueryIdentityMissing(ids) => {
                write!(f, "query identities absent from gallery: {ids:?}")
            }
            Error::NoQueries => write!(f, "retrieval scoring needs at least one query"),
            Error::EmptyGallery => write!(f, "retrieval scoring needs a nonempty gallery"),
            Error::EmptyMemory => write!(f, "clustering needs a nonempty memory"),
        }
    }
}

impl core::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
