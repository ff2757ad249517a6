//! Shared data model: instances, scenes, the feature memory, cluster
//! partitions, and per-step training batches.
//!
//! Indexing conventions used throughout the crate:
//!
//! - instances are identified by dense ids `0..N_a` which double as memory
//!   slot indices,
//! - cluster ids index into the current [`ClusterSet`],
//! - every stored feature vector is L2-normalized within [`UNIT_NORM_TOL`].

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Tolerance on `| ||v|| - 1 |` for stored features and centroids.
pub const UNIT_NORM_TOL: f64 = 1e-6;

/// Index of a cluster within a [`ClusterSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClusterId(pub usize);

fn check_finite(feature: &[f64]) -> Result<()> {
    if feature.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub(crate) fn check_unit(feature: &[f64], dims: usize) -> Result<()> {
    if feature.len() != dims {
        return Err(Error::DimensionMismatch { expected: dims, got: feature.len() });
    }
    check_finite(feature)?;
    let norm = math::l2_norm(feature);
    if math::abs(norm - 1.0) > UNIT_NORM_TOL {
        return Err(Error::ZeroNorm);
    }
    Ok(())
}

/// Scale a feature vector to unit L2 norm.
///
/// Idempotent on already-normalized input. The zero vector (and any
/// non-finite input) is rejected rather than silently producing NaN.
pub fn normalize(feature: &[f64]) -> Result<Vec<f64>> {
    check_finite(feature)?;
    let norm = math::l2_norm(feature);
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    if !norm.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(feature.iter().map(|x| x / norm).collect())
}

/// L2-normalized arithmetic mean of a nonempty set of unit vectors.
///
/// Perfectly antipodal member sets have a vanishing mean and no meaningful
/// direction; those report [`Error::DegenerateCentroid`].
pub fn centroid<'a, I>(members: I) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut iter = members.into_iter();
    let first = iter.next().ok_or(Error::EmptyMemberSet)?;
    let mut acc: Vec<f64> = first.to_vec();
    let mut count = 1usize;
    for member in iter {
        if member.len() != acc.len() {
            return Err(Error::DimensionMismatch { expected: acc.len(), got: member.len() });
        }
        for (a, x) in acc.iter_mut().zip(member) {
            *a += x;
        }
        count += 1;
    }
    let inv = 1.0 / count as f64;
    for a in acc.iter_mut() {
        *a *= inv;
    }
    if math::l2_norm(&acc) < 1e-12 {
        return Err(Error::DegenerateCentroid);
    }
    normalize(&acc)
}

/// One detected or proposed person crop: its scene, an optional hidden
/// ground-truth identity (simulator bookkeeping, never visible to the
/// training path), and a unit-norm feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub instance_id: usize,
    pub scene_id: u64,
    /// Ground-truth identity, withheld from training; `None` when unknown.
    pub truth_identity: Option<u64>,
    pub feature: Vec<f64>,
}

impl Instance {
    pub fn new(
        instance_id: usize,
        scene_id: u64,
        truth_identity: Option<u64>,
        feature: Vec<f64>,
    ) -> Result<Self> {
        check_unit(&feature, feature.len())?;
        Ok(Self { instance_id, scene_id, truth_identity, feature })
    }
}

/// The matrix of per-instance stored features (one slot per training
/// instance) plus each slot's current cluster assignment.
///
/// Follows a single-writer/multiple-reader contract: shared reads are safe,
/// and the training loop serializes slot updates within a step.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMemory {
    dims: usize,
    slots: Vec<Vec<f64>>,
    assignment: Vec<Option<ClusterId>>,
}

impl FeatureMemory {
    /// Build a memory from unit-norm features; slot ids follow input order.
    pub fn from_features(dims: usize, features: Vec<Vec<f64>>) -> Result<Self> {
        for feature in &features {
            check_unit(feature, dims)?;
        }
        let count = features.len();
        Ok(Self { dims, slots: features, assignment: alloc::vec![None; count] })
    }

    /// Rebuild a memory from stored features and assignment labels, as read
    /// back from a snapshot.
    pub fn from_parts(
        dims: usize,
        features: Vec<Vec<f64>>,
        assignment: Vec<Option<ClusterId>>,
    ) -> Result<Self> {
        if assignment.len() != features.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                got: assignment.len(),
            });
        }
        let mut memory = Self::from_features(dims, features)?;
        memory.assignment = assignment;
        Ok(memory)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Number of stored instances (`N_a`).
    pub fn count(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slot(&self, slot: usize) -> Result<&[f64]> {
        self.slots
            .get(slot)
            .map(Vec::as_slice)
            .ok_or(Error::InvalidSlot { slot, count: self.slots.len() })
    }

    pub fn slots(&self) -> impl Iterator<Item = &[f64]> {
        self.slots.iter().map(Vec::as_slice)
    }

    /// Overwrite one slot with a new unit-norm feature.
    pub fn set_slot(&mut self, slot: usize, feature: Vec<f64>) -> Result<()> {
        check_unit(&feature, self.dims)?;
        let target = self
            .slots
            .get_mut(slot)
            .ok_or(Error::InvalidSlot { slot, count: self.assignment.len() })?;
        *target = feature;
        Ok(())
    }

    pub fn assignment(&self, slot: usize) -> Result<Option<ClusterId>> {
        self.assignment
            .get(slot)
            .copied()
            .ok_or(Error::InvalidSlot { slot, count: self.assignment.len() })
    }

    pub fn assignments(&self) -> &[Option<ClusterId>] {
        &self.assignment
    }

    /// Stamp every slot with its cluster id from `clusters`. Slots not
    /// covered by any cluster revert to unclustered.
    pub fn apply_assignment(&mut self, clusters: &ClusterSet) -> Result<()> {
        let mut next = alloc::vec![None; self.assignment.len()];
        for (id, members) in clusters.iter() {
            for &slot in members {
                if slot >= next.len() {
                    return Err(Error::InvalidSlot { slot, count: next.len() });
                }
                next[slot] = Some(id);
            }
        }
        self.assignment = next;
        Ok(())
    }
}

/// A partition of memory slots into clusters with unit-norm centroids.
///
/// Clusters are disjoint and nonempty; singleton clusters are legal and are
/// how unclustered (noise) slots are represented after promotion. Member
/// lists are kept sorted so recomputation is reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    clusters: Vec<Vec<usize>>,
    centroids: Vec<Vec<f64>>,
    epoch: u64,
}

impl ClusterSet {
    /// Build a cluster set over `memory`, validating disjointness and
    /// computing each centroid as the renormalized member mean.
    pub fn from_members(
        memory: &FeatureMemory,
        mut clusters: Vec<Vec<usize>>,
        epoch: u64,
    ) -> Result<Self> {
        let mut seen = alloc::vec![false; memory.count()];
        for members in clusters.iter_mut() {
            if members.is_empty() {
                return Err(Error::EmptyCluster);
            }
            members.sort_unstable();
            for &slot in members.iter() {
                if slot >= memory.count() {
                    return Err(Error::InvalidSlot { slot, count: memory.count() });
                }
                if seen[slot] {
                    return Err(Error::DuplicateMember { slot });
                }
                seen[slot] = true;
            }
        }
        let centroids = clusters
            .iter()
            .map(|members| centroid(members.iter().map(|&slot| memory.slot(slot).unwrap())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { clusters, centroids, epoch })
    }

    /// Number of clusters (`N_c`).
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    /// Same partition restamped with a new epoch.
    pub fn with_epoch(mut self, epoch: u64) -> Self {
        self.epoch = epoch;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn members(&self, id: ClusterId) -> Result<&[usize]> {
        self.clusters.get(id.0).map(Vec::as_slice).ok_or(Error::UnknownCluster(id))
    }

    pub fn centroid_of(&self, id: ClusterId) -> Result<&[f64]> {
        self.centroids.get(id.0).map(Vec::as_slice).ok_or(Error::UnknownCluster(id))
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClusterId, &[usize])> {
        self.clusters.iter().enumerate().map(|(i, m)| (ClusterId(i), m.as_slice()))
    }

    pub fn centroids(&self) -> impl Iterator<Item = (ClusterId, &[f64])> {
        self.centroids.iter().enumerate().map(|(i, c)| (ClusterId(i), c.as_slice()))
    }

    /// Cluster label per slot; every slot in `0..count` must be covered.
    pub fn labels(&self, count: usize) -> Result<Vec<usize>> {
        let mut labels = alloc::vec![usize::MAX; count];
        for (id, members) in self.iter() {
            for &slot in members {
                if slot >= count {
                    return Err(Error::InvalidSlot { slot, count });
                }
                labels[slot] = id.0;
            }
        }
        if let Some(missing) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::MissingScene { instance: missing });
        }
        Ok(labels)
    }
}

/// Mapping from scene id to the ordered set of instance ids appearing in
/// that scene. Every instance belongs to exactly one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneIndex {
    scenes: BTreeMap<u64, Vec<usize>>,
    scene_of: Vec<u64>,
}

impl SceneIndex {
    /// Build from the per-instance scene id, indexed by instance id.
    pub fn from_scene_of(scene_of: Vec<u64>) -> Self {
        let mut scenes: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (instance, &scene) in scene_of.iter().enumerate() {
            scenes.entry(scene).or_default().push(instance);
        }
        Self { scenes, scene_of }
    }

    /// Number of distinct scenes (`N_I`).
    pub fn scene_count(&self) -> usize {
        self.scenes.len()
    }

    /// Total instances across all scenes; equals the memory count when the
    /// index covers the full training set.
    pub fn instance_count(&self) -> usize {
        self.scene_of.len()
    }

    pub fn scene_of(&self, instance: usize) -> Result<u64> {
        self.scene_of.get(instance).copied().ok_or(Error::MissingScene { instance })
    }

    pub fn members(&self, scene: u64) -> Option<&[usize]> {
        self.scenes.get(&scene).map(Vec::as_slice)
    }

    pub fn scenes(&self) -> impl Iterator<Item = (u64, &[usize])> {
        self.scenes.iter().map(|(&scene, members)| (scene, members.as_slice()))
    }

    pub fn scene_ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.scenes.keys().copied()
    }
}

/// Proposals of one instance within a batch: at least one unit-norm
/// foreground feature, all sharing the same source instance id.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceGroup {
    pub instance: usize,
    pub features: Vec<Vec<f64>>,
}

/// One training step's worth of features: foreground features grouped by
/// source instance plus ungrouped background features.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSample {
    groups: Vec<InstanceGroup>,
    backgrounds: Vec<Vec<f64>>,
    /// Flat foreground index -> (group index, offset within group).
    flat: Vec<(usize, usize)>,
    dims: usize,
}

impl BatchSample {
    pub fn new(groups: Vec<InstanceGroup>, backgrounds: Vec<Vec<f64>>, dims: usize) -> Result<Self> {
        let mut flat = Vec::new();
        for (g, group) in groups.iter().enumerate() {
            if group.features.is_empty() {
                return Err(Error::EmptyInstanceGroup);
            }
            for (offset, feature) in group.features.iter().enumerate() {
                check_unit(feature, dims)?;
                flat.push((g, offset));
            }
        }
        for feature in &backgrounds {
            check_unit(feature, dims)?;
            if groups.iter().any(|g| g.features.iter().any(|f| f == feature)) {
                return Err(Error::ForegroundBackgroundOverlap);
            }
        }
        Ok(Self { groups, backgrounds, flat, dims })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Total foreground feature count (`n_x`).
    pub fn foreground_count(&self) -> usize {
        self.flat.len()
    }

    pub fn background_count(&self) -> usize {
        self.backgrounds.len()
    }

    pub fn groups(&self) -> &[InstanceGroup] {
        &self.groups
    }

    pub fn backgrounds(&self) -> &[Vec<f64>] {
        &self.backgrounds
    }

    /// Foreground feature by flat index (groups in order, features in order).
    pub fn foreground(&self, idx: usize) -> Result<&[f64]> {
        let &(g, offset) = self
            .flat
            .get(idx)
            .ok_or(Error::InvalidAnchor { anchor: idx, foreground: self.flat.len() })?;
        Ok(&self.groups[g].features[offset])
    }

    /// Group index of a flat foreground index.
    pub fn group_of(&self, idx: usize) -> Result<usize> {
        self.flat
            .get(idx)
            .map(|&(g, _)| g)
            .ok_or(Error::InvalidAnchor { anchor: idx, foreground: self.flat.len() })
    }

    /// Source instance id of a flat foreground index.
    pub fn instance_of(&self, idx: usize) -> Result<usize> {
        Ok(self.groups[self.group_of(idx)?].instance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn normalize_scales_to_unit() {
        let out = normalize(&[3.0, 4.0]).unwrap();
        assert_eq!(out, alloc::vec![0.6, 0.8]);
    }

    #[test]
    fn normalize_is_identity_on_unit_vectors() {
        let out = normalize(&[1.0, 0.0]).unwrap();
        assert_eq!(out, alloc::vec![1.0, 0.0]);
    }

    #[test]
    fn normalize_rejects_zero_vector() {
        assert_eq!(normalize(&[0.0, 0.0]), Err(Error::ZeroNorm));
    }

    #[test]
    fn normalize_rejects_non_finite() {
        assert_eq!(normalize(&[f64::NAN, 1.0]), Err(Error::NonFinite));
        assert_eq!(normalize(&[f64::INFINITY, 1.0]), Err(Error::NonFinite));
    }

    #[test]
    fn centroid_singleton() {
        let a = [1.0, 0.0];
        assert_eq!(centroid([a.as_slice()]).unwrap(), alloc::vec![1.0, 0.0]);
    }

    #[test]
    fn centroid_symmetric_pair() {
        let a = [1.0, 0.0];
        let b = [0.0, 1.0];
        let c = centroid([a.as_slice(), b.as_slice()]).unwrap();
        assert!((c[0] - SQRT2_2).abs() < 1e-15);
        assert!((c[1] - SQRT2_2).abs() < 1e-15);
    }

    #[test]
    fn centroid_antipodal_is_degenerate() {
        let a = [1.0, 0.0];
        let b = [-1.0, 0.0];
        assert_eq!(centroid([a.as_slice(), b.as_slice()]), Err(Error::DegenerateCentroid));
    }

    #[test]
    fn centroid_empty_errors() {
        assert_eq!(centroid(core::iter::empty::<&[f64]>()), Err(Error::EmptyMemberSet));
    }

    #[test]
    fn cluster_set_validates_membership() {
        let memory = FeatureMemory::from_features(
            2,
            alloc::vec![alloc::vec![1.0, 0.0], alloc::vec![0.0, 1.0]],
        )
        .unwrap();
        let err = ClusterSet::from_members(
            &memory,
            alloc::vec![alloc::vec![0, 1], alloc::vec![1]],
            0,
        );
        assert_eq!(err, Err(Error::DuplicateMember { slot: 1 }));
        let err = ClusterSet::from_members(&memory, alloc::vec![alloc::vec![]], 0);
        assert_eq!(err, Err(Error::EmptyCluster));
        let err = ClusterSet::from_members(&memory, alloc::vec![alloc::vec![5]], 0);
        assert_eq!(err, Err(Error::InvalidSlot { slot: 5, count: 2 }));
    }

    #[test]
    fn cluster_set_centroids_match_recomputation() {
        let memory = FeatureMemory::from_features(
            2,
            alloc::vec![
                alloc::vec![1.0, 0.0],
                alloc::vec![0.0, 1.0],
                alloc::vec![SQRT2_2, SQRT2_2],
            ],
        )
        .unwrap();
        let cs =
            ClusterSet::from_members(&memory, alloc::vec![alloc::vec![0, 1], alloc::vec![2]], 3)
                .unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs.epoch(), 3);
        for (id, members) in cs.iter() {
            let again = centroid(members.iter().map(|&s| memory.slot(s).unwrap())).unwrap();
            let stored = cs.centroid_of(id).unwrap();
            for (a, b) in again.iter().zip(stored) {
                assert!((a - b).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn scene_index_partitions_instances() {
        let idx = SceneIndex::from_scene_of(alloc::vec![0, 0, 1, 2, 1]);
        assert_eq!(idx.scene_count(), 3);
        assert_eq!(idx.instance_count(), 5);
        assert_eq!(idx.members(1), Some([2usize, 4].as_slice()));
        assert_eq!(idx.scene_of(3).unwrap(), 2);
        let total: usize = idx.scenes().map(|(_, m)| m.len()).sum();
        assert_eq!(total, idx.instance_count());
    }

    #[test]
    fn batch_sample_flat_indexing() {
        let g0 = InstanceGroup {
            instance: 7,
            features: alloc::vec![alloc::vec![1.0, 0.0], alloc::vec![0.0, 1.0]],
        };
        let g1 = InstanceGroup { instance: 9, features: alloc::vec![alloc::vec![0.0, -1.0]] };
        let batch =
            BatchSample::new(alloc::vec![g0, g1], alloc::vec![alloc::vec![-1.0, 0.0]], 2).unwrap();
        assert_eq!(batch.foreground_count(), 3);
        assert_eq!(batch.instance_of(0).unwrap(), 7);
        assert_eq!(batch.instance_of(2).unwrap(), 9);
        assert_eq!(batch.foreground(2).unwrap(), &[0.0, -1.0]);
    }

    #[test]
    fn batch_sample_rejects_overlap_and_empty_groups() {
        let g = InstanceGroup { instance: 0, features: alloc::vec![alloc::vec![1.0, 0.0]] };
        let err = BatchSample::new(alloc::vec![g], alloc::vec![alloc::vec![1.0, 0.0]], 2);
        assert_eq!(err, Err(Error::ForegroundBackgroundOverlap));
        let empty = InstanceGroup { instance: 0, features: alloc::vec![] };
        let err = BatchSample::new(alloc::vec![empty], alloc::vec![], 2);
        assert_eq!(err, Err(Error::EmptyInstanceGroup));
    }
}
