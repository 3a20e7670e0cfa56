//! Erdős–Rényi social graph and the conformity bonus computed from
//! neighbours' previous choices.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::transit::TransitMode;

/// Fraction reported for both modes when no neighbour information exists.
pub const NO_INFORMATION_FRACTION: f64 = 0.5;

/// Undirected simple graph stored as sorted neighbour lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SocialGraph {
    adjacency: Vec<Vec<usize>>,
}

impl SocialGraph {
    /// Graph on `n` nodes with no edges.
    pub fn empty(n: usize) -> Self {
        SocialGraph {
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n {
                return Err(Error::UnknownAgent(u));
            }
            if v >= n {
                return Err(Error::UnknownAgent(v));
            }
            if u == v {
                return Err(Error::validation("graph", format!("self-loop on node {u}")));
            }
            if !adjacency[u].contains(&v) {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
        adjacency.iter_mut().for_each(|a| a.sort_unstable());
        Ok(SocialGraph { adjacency })
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, agent: usize) -> Result<&[usize]> {
        self.adjacency
            .get(agent)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownAgent(agent))
    }

    pub fn degree(&self, agent: usize) -> usize {
        self.adjacency.get(agent).map_or(0, Vec::len)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Writes one `u v` pair per line.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    pub fn save_edge_list(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_edge_list(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }
}

/// G(n, p): every unordered pair is linked independently with probability `p`.
pub fn generate_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<SocialGraph> {
    if n == 0 {
        return Err(Error::validation(
            "n_agents",
            "graph needs at least one node",
        ));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::validation(
            "graph.edge_probability",
            format!("{p} is not a probability"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adjacency = vec![Vec::new(); n];
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(p) {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
    }
    Ok(SocialGraph { adjacency })
}

/// Share of `agent`'s neighbours whose previous choice was `choice`.
///
/// Returns 0.5 when there is nothing to go on: an isolated agent, or no
/// previous choices yet (`previous_choices` is `None`).
pub fn neighbor_fraction(
    graph: &SocialGraph,
    agent: usize,
    choice: TransitMode,
    previous_choices: Option<&[TransitMode]>,
) -> Result<f64> {
    let neighbors = graph.neighbors(agent)?;
    let Some(previous) = previous_choices else {
        return Ok(NO_INFORMATION_FRACTION);
    };
    if neighbors.is_empty() {
        return Ok(NO_INFORMATION_FRACTION);
    }
    let mut same = 0usize;
    for &n in neighbors {
        match previous.get(n) {
            Some(&c) if c == choice => same += 1,
            Some(_) => {}
            None => return Err(Error::UnknownAgent(n)),
        }
    }
    Ok(same as f64 / neighbors.len() as f64)
}

/// Utility added to a choice for conforming with neighbours: `cf * frac`.
pub fn conformity_bonus(cf: f64, frac: f64) -> f64 {
    cf * frac
}
