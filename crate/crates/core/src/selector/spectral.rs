//! Spectral sentence clustering: cosine TF-IDF affinity, normalized
//! affinity eigendecomposition (Ng, Jordan, Weiss construction), and
//! seeded k-means in the eigenvector space.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{vsm_similarity, SentenceRecord, TokenStats};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpectralError {
    #[error("{have} sentences cannot fill {want} clusters")]
    TooFewSentences { have: usize, want: usize },
}

/// Square matrix of pairwise sentence similarities: symmetric, unit
/// diagonal, entries in [0, 1].
#[derive(Debug, Clone)]
pub struct AffinityMatrix {
    pub entries: Vec<Vec<f64>>,
}

impl AffinityMatrix {
    pub fn build(sentences: &[SentenceRecord], stats: &TokenStats) -> AffinityMatrix {
        let n = sentences.len();
        let mut entries = vec![vec![0.0; n]; n];
        for i in 0..n {
            entries[i][i] = 1.0;
            for j in (i + 1)..n {
                let s = vsm_similarity(&sentences[i].tokens, &sentences[j].tokens, stats);
                entries[i][j] = s;
                entries[j][i] = s;
            }
        }
        AffinityMatrix { entries }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn check_invariants(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| {
            (self.entries[i][i] - 1.0).abs() < 1e-12
                && (0..n).all(|j| {
                    let v = self.entries[i][j];
                    (0.0..=1.0 + 1e-12).contains(&v)
                        && (v - self.entries[j][i]).abs() < 1e-12
                })
        })
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// (eigenvalues, eigenvectors as columns), unsorted.
pub fn jacobi_eigen(matrix: &[Vec<f64>], tolerance: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let off = |a: &Vec<Vec<f64>>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i][j] * a[i][j];
                }
            }
        }
        s.sqrt()
    };
    for _sweep in 0..100 {
        if off(&a) <= tolerance {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= tolerance * 1e-3 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    (values, v)
}

/// Rows of the spectral embedding: the M largest-eigenvalue eigenvectors
/// of D^{-1/2} A D^{-1/2}, stacked as columns and row-normalized.
fn spectral_embedding(affinity: &AffinityMatrix, m: usize) -> Vec<Vec<f64>> {
    let n = affinity.size();
    let degrees: Vec<f64> = affinity.entries.iter().map(|row| row.iter().sum()).collect();
    let dinv: Vec<f64> = degrees
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            l[i][j] = dinv[i] * affinity.entries[i][j] * dinv[j];
        }
    }
    let (values, vectors) = jacobi_eigen(&l, 1e-10);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        values[y]
            .partial_cmp(&values[x])
            .unwrap()
            .then(x.cmp(&y))
    });
    let take = m.min(n);
    let mut rows = vec![vec![0.0; take]; n];
    for (col, &ev) in order.iter().take(take).enumerate() {
        for i in 0..n {
            rows[i][col] = vectors[i][ev];
        }
    }
    for row in &mut rows {
        let norm: f64 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }
    rows
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd k-means with seeded restarts; returns the assignment with the
/// lowest inertia (first found wins ties, so output is seed-stable).
fn kmeans(points: &[Vec<f64>], k: usize, restarts: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = points.len();
    let dim = points.first().map(|p| p.len()).unwrap_or(0);
    let mut best_assign = vec![0usize; n];
    let mut best_inertia = f64::INFINITY;
    for _ in 0..restarts {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(rng);
        let mut centroids: Vec<Vec<f64>> =
            idx.iter().take(k).map(|&i| points[i].clone()).collect();
        let mut assign = vec![0usize; n];
        for _iter in 0..100 {
            let mut changed = false;
            for (i, p) in points.iter().enumerate() {
                let c = (0..k)
                    .min_by(|&x, &y| {
                        sq_dist(p, &centroids[x])
                            .partial_cmp(&sq_dist(p, &centroids[y]))
                            .unwrap()
                            .then(x.cmp(&y))
                    })
                    .unwrap();
                if assign[i] != c {
                    assign[i] = c;
                    changed = true;
                }
            }
            let mut sums = vec![vec![0.0; dim]; k];
            let mut counts = vec![0usize; k];
            for (i, p) in points.iter().enumerate() {
                counts[assign[i]] += 1;
                for (d, x) in p.iter().enumerate() {
                    sums[assign[i]][d] += x;
                }
            }
            for c in 0..k {
                if counts[c] > 0 {
                    centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
                }
            }
            if !changed {
                break;
            }
        }
        let inertia: f64 = points
            .iter()
            .enumerate()
            .map(|(i, p)| sq_dist(p, &centroids[assign[i]]))
            .sum();
        if inertia < best_inertia {
            best_inertia = inertia;
            best_assign = assign;
        }
    }
    best_assign
}

/// Cluster source sentences into the M largest topic clusters and keep
/// the N most central sentences of each.
///
/// Large clusters sort first (ties by lowest member index); within a
/// cluster, sentences with the highest average affinity to the rest of
/// the cluster are kept.
pub fn spectral_select(
    sentences: &[SentenceRecord],
    m: usize,
    n: usize,
    seed: u64,
    stats: &TokenStats,
) -> Result<Vec<Vec<SentenceRecord>>, SpectralError> {
    let m = m.max(1);
    let n = n.max(1);
    if sentences.len() < m {
        return Err(SpectralError::TooFewSentences {
            have: sentences.len(),
            want: m,
        });
    }
    let affinity = AffinityMatrix::build(sentences, stats);
    debug_assert!(affinity.check_invariants());
    let embedding = spectral_embedding(&affinity, m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let assign = kmeans(&embedding, m, 50, &mut rng);

    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, &c) in assign.iter().enumerate() {
        clusters[c].push(i);
    }
    clusters.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then_with(|| a.iter().min().cmp(&b.iter().min()))
    });
    let mut out = Vec::with_capacity(m);
    for members in clusters {
        let mut ranked: Vec<(f64, usize)> = members
            .iter()
            .map(|&i| {
                let avg = if members.len() > 1 {
                    members
                        .iter()
                        .filter(|&&j| j != i)
                        .map(|&j| affinity.entries[i][j])
                        .sum::<f64>()
                        / (members.len() - 1) as f64
                } else {
                    0.0
                };
                (avg, i)
            })
            .collect();
        ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let mut chosen: Vec<usize> = ranked.into_iter().take(n).map(|(_, i)| i).collect();
        chosen.sort_unstable();
        out.push(chosen.into_iter().map(|i| sentences[i].clone()).collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::parse_penman;

    fn record(doc: usize, sent: usize, text: &str) -> SentenceRecord {
        SentenceRecord::new(doc, sent, text, parse_penman("(x / thing)").unwrap())
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1.
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let (mut values, _) = jacobi_eigen(&m, 1e-12);
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((values[0] - 1.0).abs() < 1e-9);
        assert!((values[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn jacobi_eigenpairs_satisfy_definition() {
        let m = vec![
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.25],
            vec![0.5, 0.25, 2.0],
        ];
        let (values, vectors) = jacobi_eigen(&m, 1e-12);
        for k in 0..3 {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| m[i][j] * vectors[j][k]).sum();
                assert!((av - values[k] * vectors[i][k]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn jacobi_converges_on_a_large_random_matrix() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 40;
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-1.0..=1.0);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        let (values, vectors) = jacobi_eigen(&m, 1e-10);
        // Spot-check a few eigenpairs against the definition and the
        // trace identity.
        let trace: f64 = (0..n).map(|i| m[i][i]).sum();
        let sum: f64 = values.iter().sum();
        assert!((trace - sum).abs() < 1e-7);
        for k in [0, n / 2, n - 1] {
            for i in 0..n {
                let av: f64 = (0..n).map(|j| m[i][j] * vectors[j][k]).sum();
                assert!((av - values[k] * vectors[i][k]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn block_diagonal_affinity_separates_groups() {
        let sentences = vec![
            record(0, 0, "alpha beta gamma"),
            record(0, 1, "alpha beta gamma"),
            record(1, 0, "delta epsilon zeta"),
            record(1, 1, "delta epsilon zeta"),
        ];
        let stats = TokenStats::build(&sentences, &Default::default());
        let clusters = spectral_select(&sentences, 2, 1, 13, &stats).unwrap();
        assert_eq!(clusters.len(), 2);
        let texts: Vec<&str> = clusters
            .iter()
            .map(|c| c.first().map(|r| r.text.as_str()).unwrap_or(""))
            .collect();
        assert_ne!(texts[0], texts[1]);
    }

    #[test]
    fn single_cluster_returns_most_central() {
        let sentences = vec![
            record(0, 0, "the cat sat on the mat"),
            record(0, 1, "the cat sat on a mat"),
            record(0, 2, "quantum chromodynamics lectures"),
        ];
        let stats = TokenStats::build(&sentences, &Default::default());
        let clusters = spectral_select(&sentences, 1, 2, 13, &stats).unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].len(), 2);
        // The two cat sentences are mutually closest.
        assert!(clusters[0].iter().all(|r| r.text.contains("cat")));
    }

    #[test]
    fn affinity_matrix_invariants() {
        let sentences = vec![
            record(0, 0, "alpha beta gamma"),
            record(0, 1, "beta gamma delta"),
            record(1, 0, "epsilon zeta"),
            record(1, 1, ""),
        ];
        let stats = TokenStats::build(&sentences, &Default::default());
        let m = AffinityMatrix::build(&sentences, &stats);
        assert!(m.check_invariants());
    }

    #[test]
    fn too_few_sentences() {
        let sentences = vec![record(0, 0, "only one")];
        let stats = TokenStats::build(&sentences, &Default::default());
        assert_eq!(
            spectral_select(&sentences, 2, 1, 13, &stats).unwrap_err(),
            SpectralError::TooFewSentences { have: 1, want: 2 }
        );
    }

    #[test]
    fn deterministic_under_fixed_seed() {
        let sentences: Vec<SentenceRecord> = (0..9)
            .map(|i| {
                let topic = ["solar wind", "river flood", "trade deal"][i % 3];
                record(i / 3, i % 3, &format!("{topic} item{i}"))
            })
            .collect();
        let stats = TokenStats::build(&sentences, &Default::default());
        let a = spectral_select(&sentences, 3, 2, 42, &stats).unwrap();
        let b = spectral_select(&sentences, 3, 2, 42, &stats).unwrap();
        let key = |cs: &Vec<Vec<SentenceRecord>>| -> Vec<Vec<(usize, usize)>> {
            cs.iter()
                .map(|c| c.iter().map(|r| (r.doc, r.sent)).collect())
                .collect()
        };
        assert_eq!(key(&a), key(&b));
    }
}
