//! Topology generators for sweeps and property tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph_model::CommunicationTopology;

/// Node pairs that may carry an edge (no leader-leader pairs), ascending.
pub fn admissible_pairs(node_count: usize, leaders: &[usize]) -> Vec<(usize, usize)> {
    (1..=node_count)
        .flat_map(|i| (i + 1..=node_count).map(move |j| (i, j)))
        .filter(|(i, j)| !(leaders.contains(i) && leaders.contains(j)))
        .collect()
}

/// Every topology on `node_count` nodes with the given leaders: one per
/// subset of admissible pairs, in mask order.
pub fn all_topologies(node_count: usize, leaders: Vec<usize>) -> impl Iterator<Item = CommunicationTopology> {
    let pairs = admissible_pairs(node_count, &leaders);
    assert!(pairs.len() < 32, "too many pairs for exhaustive enumeration");
    (0u32..1 << pairs.len()).map(move |mask| {
        let edges = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, e)| *e);
        CommunicationTopology::new(node_count, leaders.iter().copied(), edges).expect("admissible by construction")
    })
}

fn random_leaders<R: Rng>(rng: &mut R, node_count: usize, leader_count: usize) -> Vec<usize> {
    let mut nodes: Vec<usize> = (1..=node_count).collect();
    nodes.shuffle(rng);
    let mut leaders = nodes[..leader_count].to_vec();
    leaders.sort_unstable();
    leaders
}

/// Erdős–Rényi style topology: random leader set, each admissible pair kept
/// with probability `p`, edges in random order.
pub fn random_topology<R: Rng>(rng: &mut R, node_count: usize, leader_count: usize, p: f64) -> CommunicationTopology {
    assert!(leader_count >= 1 && leader_count < node_count);
    let leaders = random_leaders(rng, node_count, leader_count);
    let mut edges: Vec<(usize, usize)> = admissible_pairs(node_count, &leaders)
        .into_iter()
        .filter(|_| rng.gen_bool(p))
        .collect();
    edges.shuffle(rng);
    CommunicationTopology::new(node_count, leaders, edges).expect("admissible by construction")
}

/// Leader-follower connected forest with exactly `N − l` edges: one tree per
/// leader, each follower attached to a random earlier node.
pub fn random_forest_topology<R: Rng>(rng: &mut R, node_count: usize, leader_count: usize) -> CommunicationTopology {
    assert!(leader_count >= 1 && leader_count < node_count);
    let leaders = random_leaders(rng, node_count, leader_count);
    let mut followers: Vec<usize> = (1..=node_count).filter(|v| !leaders.contains(v)).collect();
    followers.shuffle(rng);
    let mut placed = leaders.clone();
    let mut edges = Vec::with_capacity(followers.len());
    for f in followers {
        let anchor = placed[rng.gen_range(0..placed.len())];
        edges.push((f, anchor));
        placed.push(f);
    }
    edges.shuffle(rng);
    CommunicationTopology::new(node_count, leaders, edges).expect("forest is admissible")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn enumeration_counts() {
        assert_eq!(all_topologies(5, vec![5]).count(), 1024);
        assert_eq!(all_topologies(4, vec![3, 4]).count(), 32);
    }

    #[test]
    fn forests_are_leader_follower_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(3..10);
            let l = rng.gen_range(1..n);
            let t = random_forest_topology(&mut rng, n, l);
            assert_eq!(t.sigma(), n - l);
            assert!(t.is_leader_follower_connected());
            assert_eq!(t.connected_components().len(), l);
        }
    }

    #[test]
    fn random_topology_respects_leaders() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = random_topology(&mut rng, 8, 3, 1.0);
        assert_eq!(t.leader_count(), 3);
        assert_eq!(t.sigma(), 28 - 3);
    }
}
