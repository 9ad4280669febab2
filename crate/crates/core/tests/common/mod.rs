//! Slow, formula-direct reference implementations used as test oracles.
//! Clusterings here are plain `Vec<Vec<usize>>`.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use rand::Rng;

pub type Chains = Vec<Vec<usize>>;

/// (precision, recall, f1)
pub type Prf = (f64, f64, f64);

fn prf(p_num: f64, p_den: f64, r_num: f64, r_den: f64) -> Prf {
    let p = if p_den > 0.0 { p_num / p_den } else { 0.0 };
    let r = if r_den > 0.0 { r_num / r_den } else { 0.0 };
    let f = if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    };
    (p, r, f)
}

fn chain_index(chains: &Chains) -> HashMap<usize, usize> {
    chains
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&m| (m, i)))
        .collect()
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    r
}

/// Links of `gold` recovered by `other`, counted as
/// (|S| - connected components of S under links both sides share).
fn muc_side(gold: &Chains, other: &Chains) -> (f64, f64) {
    let other_of = chain_index(other);
    let (mut num, mut den) = (0.0, 0.0);
    for chain in gold {
        let n = chain.len();
        let mut parent: Vec<usize> = (0..n).collect();
        for a in 0..n {
            for b in a + 1..n {
                let same = matches!(
                    (other_of.get(&chain[a]), other_of.get(&chain[b])),
                    (Some(x), Some(y)) if x == y
                );
                if same {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        let comps = (0..n).filter(|&i| find(&mut parent, i) == i).count();
        num += (n - comps) as f64;
        den += (n - 1) as f64;
    }
    (num, den)
}

pub fn muc(key: &Chains, response: &Chains) -> Prf {
    let (rn, rd) = muc_side(key, response);
    let (pn, pd) = muc_side(response, key);
    prf(pn, pd, rn, rd)
}

/// Per-mention precision/recall, with a mention missing from one side
/// treated as a singleton there.
pub fn b_cubed(key: &Chains, response: &Chains) -> Prf {
    let cluster = |chains: &Chains, m: usize| -> HashSet<usize> {
        chains
            .iter()
            .find(|c| c.contains(&m))
            .map(|c| c.iter().copied().collect())
            .unwrap_or_else(|| [m].into_iter().collect())
    };
    let side = |gold: &Chains, other: &Chains| -> (f64, f64) {
        let mut num = 0.0;
        let mut den = 0.0;
        for chain in gold {
            for &m in chain {
                let g = cluster(gold, m);
                let o = cluster(other, m);
                num += g.intersection(&o).count() as f64 / g.len() as f64;
                den += 1.0;
            }
        }
        (num, den)
    };
    let (rn, rd) = side(key, response);
    let (pn, pd) = side(response, key);
    prf(pn, pd, rn, rd)
}

fn phi4(k: &[usize], r: &[usize]) -> f64 {
    let inter = k.iter().filter(|m| r.contains(m)).count();
    2.0 * inter as f64 / (k.len() + r.len()) as f64
}

/// Best total similarity over every partial one-to-one chain alignment.
pub fn ceaf_similarity(key: &Chains, response: &Chains) -> f64 {
    fn go(key: &Chains, response: &Chains, i: usize, used: &mut Vec<bool>) -> f64 {
        if i == key.len() {
            return 0.0;
        }
        let mut best = go(key, response, i + 1, used);
        for j in 0..response.len() {
            if !used[j] {
                used[j] = true;
                let s = phi4(&key[i], &response[j]) + go(key, response, i + 1, used);
                used[j] = false;
                if s > best {
                    best = s;
                }
            }
        }
        best
    }
    go(key, response, 0, &mut vec![false; response.len()])
}

pub fn ceaf(key: &Chains, response: &Chains) -> Prf {
    let phi = ceaf_similarity(key, response);
    prf(phi, response.len() as f64, phi, key.len() as f64)
}

/// Random clustering of a random subset of `0..mentions` into at most
/// `max_chains` non-empty chains.
pub fn random_chains<R: Rng>(rng: &mut R, mentions: usize, max_chains: usize) -> Chains {
    let k = rng.gen_range(1..=max_chains);
    let mut chains = vec![Vec::new(); k];
    for m in 0..mentions {
        if rng.gen_bool(0.8) {
            chains[rng.gen_range(0..k)].push(m);
        }
    }
    chains.retain(|c| !c.is_empty());
    chains
}
