//! Pseudo-label generation: DBSCAN over memory features under cosine
//! distance, plus the scene-constrained cluster splitting pass that keeps
//! at most one instance per scene in any cluster.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::types::{ClusterSet, FeatureMemory, SceneIndex};

/// DBSCAN parameters over cosine distance (`1 - cosine similarity`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbscanParams {
    /// Neighborhood radius in cosine distance, `0 < epsilon < 2`.
    pub epsilon: f64,
    /// Core-point threshold; the neighborhood of a point includes the
    /// point itself.
    pub min_points: usize,
}

impl Default for DbscanParams {
    fn default() -> Self {
        Self { epsilon: 0.7, min_points: 2 }
    }
}

impl DbscanParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 2.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "dbscan.epsilon must lie in (0, 2), got {}",
                self.epsilon
            )));
        }
        if self.min_points == 0 {
            return Err(Error::InvalidConfig("dbscan.min_points must be >= 1".into()));
        }
        Ok(())
    }
}

/// Cosine distance between two unit vectors.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    1.0 - math::dot(a, b)
}

/// Per-epoch clustering bookkeeping, one row of the cluster trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpochClusterStats {
    pub epoch: u64,
    pub n_clusters_raw: usize,
    pub n_clusters_after_scene_constraint: usize,
    pub n_evictions: usize,
}

fn region_query(memory: &FeatureMemory, point: usize, epsilon: f64) -> Vec<usize> {
    let feature = memory.slot(point).expect("point in range");
    (0..memory.count())
        .filter(|&other| {
            cosine_distance(feature, memory.slot(other).expect("other in range")) <= epsilon
        })
        .collect()
}

/// DBSCAN over the memory's features, with every noise point promoted to a
/// singleton cluster.
///
/// Points are seeded in slot-id order, so border points reachable from
/// cores of two different clusters join the cluster whose seed came first.
/// The neighborhood predicate is `distance <= epsilon` and includes the
/// query point itself. Output is deterministic.
pub fn dbscan(memory: &FeatureMemory, params: &DbscanParams) -> Result<ClusterSet> {
    params.validate()?;
    if memory.is_empty() {
        return Err(Error::EmptyMemory);
    }
    let n = memory.count();
    let mut label: Vec<Option<usize>> = alloc::vec![None; n];
    let mut visited = alloc::vec![false; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        let neighbors = region_query(memory, seed, params.epsilon);
        if neighbors.len() < params.min_points {
            continue; // noise for now; a later expansion may still claim it
        }
        let cluster = clusters.len();
        clusters.push(Vec::new());
        label[seed] = Some(cluster);
        clusters[cluster].push(seed);
        let mut queue = neighbors;
        let mut head = 0;
        while head < queue.len() {
            let point = queue[head];
            head += 1;
            if label[point].is_none() {
                label[point] = Some(cluster);
                clusters[cluster].push(point);
            }
            if visited[point] {
                continue;
            }
            visited[point] = true;
            let expansion = region_query(memory, point, params.epsilon);
            if expansion.len() >= params.min_points {
                queue.extend(expansion);
            }
        }
    }

    // Singleton promotion: unclustered instances become their own clusters.
    for point in 0..n {
        if label[point].is_none() {
            clusters.push(alloc::vec![point]);
        }
    }

    ClusterSet::from_members(memory, clusters, 0)
}

/// Split every cluster so no two of its members share a scene.
///
/// For each (cluster, scene) collision group the member most similar to the
/// *input* cluster's centroid is retained (ties go to the lower instance
/// id); every other member is evicted into a fresh singleton cluster.
/// Centroids of all clusters are recomputed once after the full pass. The
/// instance multiset is preserved and the cluster count grows by exactly
/// the number of evictions.
pub fn apply_scene_constraint(
    clusters: &ClusterSet,
    scenes: &SceneIndex,
    memory: &FeatureMemory,
) -> Result<(ClusterSet, usize)> {
    let mut retained: Vec<Vec<usize>> = Vec::with_capacity(clusters.len());
    let mut evicted: Vec<usize> = Vec::new();

    for (id, members) in clusters.iter() {
        let centroid = clusters.centroid_of(id)?;
        // Members are sorted by slot id, so BTreeMap groups stay ordered and
        // the first maximum encountered is the lowest-id tie winner.
        let mut by_scene: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for &slot in members {
            by_scene.entry(scenes.scene_of(slot)?).or_default().push(slot);
        }
        let mut keep: Vec<usize> = Vec::with_capacity(members.len());
        for (_, group) in by_scene {
            if group.len() == 1 {
                keep.push(group[0]);
                continue;
            }
            let mut best = group[0];
            let mut best_sim = math::dot(memory.slot(best)?, centroid);
            for &slot in &group[1..] {
                let sim = math::dot(memory.slot(slot)?, centroid);
                if sim > best_sim {
                    best = slot;
                    best_sim = sim;
                }
            }
            for &slot in &group {
                if slot == best {
                    keep.push(slot);
                } else {
                    evicted.push(slot);
                }
            }
        }
        retained.push(keep);
    }

    let n_evictions = evicted.len();
    retained.extend(evicted.into_iter().map(|slot| alloc::vec![slot]));
    let out = ClusterSet::from_members(memory, retained, clusters.epoch())?;
    Ok((out, n_evictions))
}

/// One epoch's clustering: DBSCAN, then (optionally) the scene-constraint
/// split, with centroids recomputed after splitting. Returns the cluster
/// set stamped with `epoch` plus the trajectory stats for that epoch.
pub fn recluster_epoch(
    memory: &FeatureMemory,
    scenes: &SceneIndex,
    params: &DbscanParams,
    use_scene_context: bool,
    epoch: u64,
) -> Result<(ClusterSet, EpochClusterStats)> {
    let raw = dbscan(memory, params)?.with_epoch(epoch);
    let n_raw = raw.len();
    if !use_scene_context {
        let stats = EpochClusterStats {
            epoch,
            n_clusters_raw: n_raw,
            n_clusters_after_scene_constraint: n_raw,
            n_evictions: 0,
        };
        return Ok((raw, stats));
    }
    let (constrained, n_evictions) = apply_scene_constraint(&raw, scenes, memory)?;
    let stats = EpochClusterStats {
        epoch,
        n_clusters_raw: n_raw,
        n_clusters_after_scene_constraint: constrained.len(),
        n_evictions,
    };
    Ok((constrained, stats))
}
