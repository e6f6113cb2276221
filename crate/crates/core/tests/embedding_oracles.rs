//! Numerical oracles for the embedding losses, tree, sampler, and trainer.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use reprrec::corpus::{build_vocabulary, EntityToken, Sentence};
use reprrec::embedding::{
    hs_loss_and_grads, hs_probability, ns_loss_given_negatives, softmax_distribution, softmax_loss_and_grads,
    train, EmbeddingConfig, HuffmanTree, LossGrads, LossKind, Matrix, ModelKind, NoiseTable,
};
use reprrec::vectorspace::cosine;

const STEP: f64 = 1e-5;

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let normal = Normal::new(0.0, 0.7).unwrap();
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| normal.sample(rng)).collect())
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let normal = Normal::new(0.0, 0.7).unwrap();
    (0..n).map(|_| normal.sample(rng)).collect()
}

fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / scale(analytic).max(scale(numeric)).max(1e-12)
}

/// Central differences of `loss` with respect to `h` and every entry of
/// `rows`, compared against the analytic gradients.
fn check_gradients(
    hidden: &[f64],
    rows: &Matrix,
    loss: impl Fn(&[f64], &Matrix) -> f64,
    grads: &LossGrads,
) -> f64 {
    let mut numeric_h = Vec::with_capacity(hidden.len());
    for d in 0..hidden.len() {
        let mut plus = hidden.to_vec();
        let mut minus = hidden.to_vec();
        plus[d] += STEP;
        minus[d] -= STEP;
        numeric_h.push((loss(&plus, rows) - loss(&minus, rows)) / (2.0 * STEP));
    }
    let mut analytic_rows = vec![0.0; rows.rows() * rows.cols()];
    for (row, g) in grads.row_gradients(hidden) {
        for (d, x) in g.iter().enumerate() {
            analytic_rows[row * rows.cols() + d] += x;
        }
    }
    let mut numeric_rows = Vec::with_capacity(analytic_rows.len());
    for i in 0..analytic_rows.len() {
        let mut plus = rows.clone();
        let mut minus = rows.clone();
        plus.as_mut_slice()[i] += STEP;
        minus.as_mut_slice()[i] -= STEP;
        numeric_rows.push((loss(hidden, &plus) - loss(hidden, &minus)) / (2.0 * STEP));
    }
    relative_error(&grads.grad_hidden, &numeric_h).max(relative_error(&analytic_rows, &numeric_rows))
}

#[test]
fn negative_sampling_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let (v, r) = (10, 6);
        let output = random_matrix(v, r, &mut rng);
        let hidden = random_vec(r, &mut rng);
        let target = rng.gen_range(0..v);
        let negatives: Vec<usize> = (0..5)
            .map(|_| loop {
                let n = rng.gen_range(0..v);
                if n != target {
                    break n;
                }
            })
            .collect();
        let grads = ns_loss_given_negatives(&hidden, target, &negatives, &output);
        let loss = |h: &[f64], o: &Matrix| ns_loss_given_negatives(h, target, &negatives, o).loss;
        let err = check_gradients(&hidden, &output, loss, &grads);
        assert!(err < 1e-4, "relative error {err}");
    }
}

#[test]
fn hierarchical_softmax_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let v = 9;
        let counts: Vec<u64> = (0..v).map(|_| rng.gen_range(1..50)).collect();
        let tree = HuffmanTree::new(&counts);
        let nodes = random_matrix(v - 1, 5, &mut rng);
        let hidden = random_vec(5, &mut rng);
        let target = rng.gen_range(0..v);
        let grads = hs_loss_and_grads(&hidden, target, &tree, &nodes);
        let loss = |h: &[f64], n: &Matrix| hs_loss_and_grads(h, target, &tree, n).loss;
        let err = check_gradients(&hidden, &nodes, loss, &grads);
        assert!(err < 1e-4, "relative error {err}");
    }
}

#[test]
fn exact_softmax_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let output = random_matrix(8, 4, &mut rng);
        let hidden = random_vec(4, &mut rng);
        let target = rng.gen_range(0..8);
        let grads = softmax_loss_and_grads(&hidden, target, &output);
        let loss = |h: &[f64], o: &Matrix| softmax_loss_and_grads(h, target, o).loss;
        let err = check_gradients(&hidden, &output, loss, &grads);
        assert!(err < 1e-4, "relative error {err}");
    }
}

#[test]
fn softmax_normalizes_extreme_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let n = rng.gen_range(1..20);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1000.0..1000.0)).collect();
        let p = softmax_distribution(&xs);
        assert!(p.iter().all(|x| x.is_finite() && *x >= 0.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn hs_leaf_probabilities_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let counts: Vec<u64> = (0..8).map(|_| rng.gen_range(1..100)).collect();
        let tree = HuffmanTree::new(&counts);
        let nodes = random_matrix(7, 4, &mut rng);
        let hidden = random_vec(4, &mut rng);
        let total: f64 = (0..8).map(|leaf| hs_probability(&hidden, leaf, &tree, &nodes)).sum();
        assert!((total - 1.0).abs() < 1e-12, "{total}");
    }
}

/// Minimum total weighted code length over every merge order.
fn exhaustive_optimum(weights: &[u64]) -> u64 {
    if weights.len() <= 1 {
        return 0;
    }
    let mut best = u64::MAX;
    for i in 0..weights.len() {
        for j in i + 1..weights.len() {
            let merged = weights[i] + weights[j];
            let mut rest: Vec<u64> = weights
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i && k != j)
                .map(|(_, &w)| w)
                .collect();
            rest.push(merged);
            best = best.min(merged + exhaustive_optimum(&rest));
        }
    }
    best
}

#[test]
fn huffman_matches_exhaustive_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..40 {
        let v = rng.gen_range(2..=7);
        let counts: Vec<u64> = (0..v).map(|_| rng.gen_range(1..30)).collect();
        let tree = HuffmanTree::new(&counts);
        assert_eq!(tree.weighted_length(&counts), exhaustive_optimum(&counts), "{counts:?}");
    }
    let counts = [5, 1, 1, 2, 8, 3, 3, 1];
    assert_eq!(HuffmanTree::new(&counts).weighted_length(&counts), exhaustive_optimum(&counts));
}

#[test]
fn noise_sampling_matches_distribution() {
    let counts: Vec<u64> = vec![1, 3, 7, 12, 20, 33, 50, 80, 120, 400];
    let table = NoiseTable::new(&counts, 0.75).unwrap();
    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
    let total: f64 = weights.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draws = 1_000_000;
    let mut hits = vec![0usize; counts.len()];
    for _ in 0..draws {
        hits[table.sample(&mut rng)] += 1;
    }
    for (i, &h) in hits.iter().enumerate() {
        let expected = weights[i] / total;
        let observed = h as f64 / draws as f64;
        assert!((observed - expected).abs() < 0.01, "token {i}: {observed} vs {expected}");
    }
}

/// Full-batch gradient descent on the exact-softmax CBOW objective, with
/// gradients assembled by hand from the per-example loss.
#[test]
fn cbow_exact_softmax_full_batch_descends() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (v, r) = (6, 3);
    let mut input = random_matrix(v, r, &mut rng);
    let mut output = random_matrix(v, r, &mut rng);
    let examples: Vec<(Vec<usize>, usize)> = vec![
        (vec![1, 2], 0),
        (vec![0, 2], 1),
        (vec![0, 1], 2),
        (vec![4, 5], 3),
        (vec![3, 5], 4),
        (vec![3, 4, 0], 5),
    ];
    let hidden_of = |input: &Matrix, ctx: &[usize]| -> Vec<f64> {
        let mut h = vec![0.0; r];
        for &c in ctx {
            for d in 0..r {
                h[d] += input.row(c)[d] / ctx.len() as f64;
            }
        }
        h
    };
    let total_loss = |input: &Matrix, output: &Matrix| -> f64 {
        examples
            .iter()
            .map(|(ctx, t)| softmax_loss_and_grads(&hidden_of(input, ctx), *t, output).loss)
            .sum()
    };
    let lr = 1e-2;
    let mut previous = total_loss(&input, &output);
    for _ in 0..300 {
        let mut grad_in = Matrix::zeros(v, r);
        let mut grad_out = Matrix::zeros(v, r);
        for (ctx, t) in &examples {
            let h = hidden_of(&input, ctx);
            let g = softmax_loss_and_grads(&h, *t, &output);
            for &c in ctx {
                grad_in.add_scaled_row(c, 1.0 / ctx.len() as f64, &g.grad_hidden);
            }
            for (row, coeff) in &g.row_coeffs {
                grad_out.add_scaled_row(*row, *coeff, &h);
            }
        }
        for i in 0..v {
            input.add_scaled_row(i, -lr, &grad_in.row(i).to_vec());
            output.add_scaled_row(i, -lr, &grad_out.row(i).to_vec());
        }
        let current = total_loss(&input, &output);
        assert!(current < previous, "{current} >= {previous}");
        previous = current;
    }
}

fn changed_rows(before: &Matrix, after: &Matrix) -> HashSet<usize> {
    (0..before.rows()).filter(|&i| before.row(i) != after.row(i)).collect()
}

fn sentence(tokens: &[&str]) -> Sentence {
    Sentence::new(
        tokens
            .iter()
            .enumerate()
            .map(|(i, t)| match i {
                0 => EntityToken::user(*t),
                1 => EntityToken::movie(*t),
                _ => EntityToken::actor(*t),
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn updates_touch_only_expected_rows() {
    // Vocabulary from a larger corpus; training on a single two-token sentence.
    let corpus: Vec<Sentence> = (0..6).map(|i| sentence(&[&format!("u{i}"), &format!("m{i}"), "shared"])).collect();
    let vocabulary = build_vocabulary(&corpus, 1).unwrap();
    let one = vec![sentence(&["u0", "m0"])];
    let a = vocabulary.index(&EntityToken::user("u0")).unwrap();
    let b = vocabulary.index(&EntityToken::movie("m0")).unwrap();
    for model in [ModelKind::Cbow, ModelKind::SkipGram] {
        for loss in [LossKind::NegativeSampling, LossKind::HierarchicalSoftmax] {
            let config = EmbeddingConfig {
                loss,
                dim: 4,
                epochs: 1,
                window: 1,
                negatives: 2,
                ..EmbeddingConfig::new(model)
            };
            let base = train(&one, &vocabulary, &EmbeddingConfig { epochs: 0, ..config.clone() }).unwrap();
            let trained = train(&one, &vocabulary, &config).unwrap();
            // Output rows start at zero, so the first steps leave input rows
            // unchanged; only output-side rows and context rows may move.
            let inputs = changed_rows(&base.input_vectors, &trained.input_vectors);
            assert!(inputs.is_subset(&[a, b].into_iter().collect()), "{model} {loss}: {inputs:?}");
            match loss {
                LossKind::HierarchicalSoftmax => {
                    let hs = trained.hierarchical.as_ref().unwrap();
                    let expected: HashSet<usize> = [a, b]
                        .iter()
                        .flat_map(|&t| hs.tree.path(t).iter().map(|s| s.node))
                        .collect();
                    let nodes = changed_rows(&base.hierarchical.as_ref().unwrap().nodes, &hs.nodes);
                    assert!(!nodes.is_empty() && nodes.is_subset(&expected), "{model}: {nodes:?} vs {expected:?}");
                    assert_eq!(trained.output_vectors, base.output_vectors);
                }
                _ => {
                    let rows = changed_rows(&base.output_vectors, &trained.output_vectors);
                    assert!(rows.contains(&a) || rows.contains(&b));
                    assert!(rows.len() <= 2 * (1 + config.negatives));
                }
            }
        }
    }
}

#[test]
fn negative_sampling_touches_target_and_negatives_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let output = random_matrix(10, 3, &mut rng);
    let hidden = random_vec(3, &mut rng);
    let grads = ns_loss_given_negatives(&hidden, 4, &[1, 7, 7], &output);
    let rows: Vec<usize> = grads.row_coeffs.iter().map(|r| r.0).collect();
    assert_eq!(rows, vec![4, 1, 7, 7]);
}

fn planted_corpus() -> (Vec<Sentence>, Vec<Vec<EntityToken>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let clusters: Vec<Vec<EntityToken>> = (0..2)
        .map(|c| (0..8).map(|i| EntityToken::actor(format!("c{c}-{i}"))).collect())
        .collect();
    let sentences = (0..400)
        .map(|s| {
            let cluster = &clusters[s % 2];
            let user = EntityToken::user(format!("c{}-u{}", s % 2, rng.gen_range(0..5)));
            let movie = EntityToken::movie(format!("c{}-m{}", s % 2, rng.gen_range(0..6)));
            let mut tokens = vec![user, movie];
            tokens.extend(cluster.choose_multiple(&mut rng, 4).cloned());
            Sentence::new(tokens).unwrap()
        })
        .collect();
    (sentences, clusters)
}

fn separation(clusters: &[Vec<EntityToken>], vector: impl Fn(&EntityToken) -> Vec<f64>) -> f64 {
    let (mut intra, mut ni, mut inter, mut no) = (0.0, 0, 0.0, 0);
    let all: Vec<(usize, &EntityToken)> = clusters
        .iter()
        .enumerate()
        .flat_map(|(c, ts)| ts.iter().map(move |t| (c, t)))
        .collect();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            let s = cosine(&vector(all[i].1), &vector(all[j].1)).unwrap();
            if all[i].0 == all[j].0 {
                intra += s;
                ni += 1;
            } else {
                inter += s;
                no += 1;
            }
        }
    }
    intra / ni as f64 - inter / no as f64
}

#[test]
fn planted_clusters_separate() {
    let (sentences, clusters) = planted_corpus();
    let vocabulary = build_vocabulary(&sentences, 1).unwrap();
    let start = std::time::Instant::now();
    let config = EmbeddingConfig {
        dim: 16,
        epochs: 30,
        ..EmbeddingConfig::new(ModelKind::SkipGram)
    };
    let model = train(&sentences, &vocabulary, &config).unwrap();
    let gap = separation(&clusters, |t| model.vector(t).unwrap().to_vec());
    assert!(gap >= 0.2, "negative sampling gap {gap}");
    assert!(start.elapsed().as_secs() < 60);

    // The exact-softmax reference shows the same structure.
    let reference = train(
        &sentences,
        &vocabulary,
        &EmbeddingConfig {
            loss: LossKind::ExactSoftmax,
            ..config
        },
    )
    .unwrap();
    let gap = separation(&clusters, |t| reference.vector(t).unwrap().to_vec());
    assert!(gap >= 0.2, "exact softmax gap {gap}");
}
