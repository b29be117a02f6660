//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Runs single-threaded.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::time::{Duration, Instant};

use rand::Rng;
use transweight::ablation::{mean_dropped, write_curve};
use transweight::model::backward::batch_loss;
use transweight::phrase::SplitLabel;
use transweight::synthetic::hold_out_first_words;
use transweight::train::write_training_log;
use transweight::*;

use common::{max_abs_diff, randomize, rng, uniform_vec, Inputs};

type Outcome = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T>(r: transweight::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

// 1

fn parameter_counts() -> Outcome {
    let tw = ok(param_count(ModelKind::TransWeight, 200, Some(100), None))?;
    ensure!(tw == 12_020_200, "TransWeight n=200 t=100: {tw}");
    let fl = ok(param_count(ModelKind::FullLex, 200, None, Some(18_481)))?;
    ensure!(fl == 739_320_200, "FullLex n=200 |V|=18481: {fl}");
    let expected = [
        (ModelKind::TransWeightFeat, 400),
        (ModelKind::TransWeightTrans, 300),
        (ModelKind::TransWeightMat, 20_200),
        (ModelKind::TransWeight, 4_000_200),
    ];
    for (kind, want) in expected {
        let got = ok(weighting_param_count(kind, 200, 100))?;
        ensure!(got == want, "{kind} weighting: {got} != {want}");
    }
    Ok(format!("{tw}, {fl}, weightings 400/300/20200/4000200"))
}

// 2

fn linear_collapse() -> Outcome {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for set in 0..20 {
        let n = r.random_range(1..=16);
        let t = r.random_range(1..=8);
        let kind = [
            ModelKind::TransWeight,
            ModelKind::TransWeightFeat,
            ModelKind::TransWeightTrans,
            ModelKind::TransWeightMat,
        ][set % 4];
        let config = ModelConfig::new(kind, n).with_t(t).with_activation(Activation::Identity);
        let mut model = ok(init_model(&config, set as u64))?;
        randomize(&mut model, &mut r, 1.0);
        let matrix = ok(ok(collapse_transweight_linear(&model))?.into_matrix_model())?;
        let inputs = Inputs::draw(&mut r, 100, n, 1);
        for k in 0..100 {
            let input = inputs.input(k, kind);
            let full = ok(model.compose(&input, None))?;
            let folded = ok(matrix.compose(&input, None))?;
            worst = worst.max(max_abs_diff(&full, &folded));
        }
    }
    ensure!(worst < 1e-9, "identity deviation {worst:e}");

    // A strongly negative bias on one transformed entry that the weighting
    // reads: relu clips it, the linear fold does not.
    let (n, t) = (4, 3);
    let config = ModelConfig::new(ModelKind::TransWeight, n).with_t(t).with_activation(Activation::Identity);
    let mut model = ok(init_model(&config, 99))?;
    randomize(&mut model, &mut r, 0.5);
    model.get_mut("B").unwrap()[0] = -10.0;
    model.get_mut("W").unwrap()[0] = 1.0;
    let matrix = ok(ok(collapse_transweight_linear(&model))?.into_matrix_model())?;
    model.set_activation(Activation::Relu);
    let inputs = Inputs::draw(&mut r, 100, n, 1);
    let mut relu_gap: f64 = f64::INFINITY;
    for k in 0..100 {
        let input = inputs.input(k, ModelKind::TransWeight);
        let gap = max_abs_diff(&ok(model.compose(&input, None))?, &ok(matrix.compose(&input, None))?);
        relu_gap = relu_gap.min(gap);
    }
    ensure!(relu_gap > 1e-3, "relu deviation only {relu_gap:e}");
    Ok(format!("identity max dev {worst:.1e}, relu min dev {relu_gap:.2}"))
}

// 3

fn gradient_check() -> Outcome {
    let (n, t, vocab, batch, h) = (4, 3, 5, 7, 1e-5);
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for (k, kind) in ModelKind::ALL.into_iter().enumerate() {
        let config = ModelConfig::new(kind, n).with_t(t).with_vocab_size(vocab);
        let mut model = ok(init_model(&config, k as u64))?;
        randomize(&mut model, &mut r, 0.5);
        let inputs = Inputs::draw(&mut r, batch, n, vocab);
        let targets: Vec<Vec<f64>> = (0..batch).map(|_| uniform_vec(&mut r, n, 1.0)).collect();
        let examples: Vec<Example<'_>> =
            (0..batch).map(|i| Example { input: inputs.input(i, kind), target: &targets[i] }).collect();

        let grads = ok(gradients(&model, &examples, None))?;
        for ti in 0..model.tensors().len() {
            let name = model.tensors()[ti].name.clone();
            for j in 0..model.tensors()[ti].data.len() {
                let original = model.tensors()[ti].data[j];
                model.tensors_mut()[ti].data[j] = original + h;
                let up = ok(batch_loss(&model, &examples, None))?;
                model.tensors_mut()[ti].data[j] = original - h;
                let down = ok(batch_loss(&model, &examples, None))?;
                model.tensors_mut()[ti].data[j] = original;
                let numeric = (up - down) / (2.0 * h);
                let analytic = grads.get(&name)[j];
                let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-6);
                ensure!(rel < 1e-4, "{kind} {name}[{j}]: analytic {analytic:e} numeric {numeric:e}");
                worst = worst.max(rel);
            }
        }
    }
    Ok(format!("{} kinds, max relative error {worst:.1e}", ModelKind::ALL.len()))
}

// 4

fn matrix_with(source: &ModelParams) -> std::result::Result<ModelParams, String> {
    let n = source.n();
    ok(ModelParams::from_tensors(
        ModelKind::Matrix,
        ModelDims { n, t: 0, vocab_size: 0 },
        source.activation(),
        vec![
            Tensor { name: "W".into(), shape: vec![n, 2 * n], data: source.get("W").to_vec() },
            Tensor { name: "b".into(), shape: vec![n], data: source.get("b").to_vec() },
        ],
    ))
}

fn init_reductions() -> Outcome {
    let (n, vocab) = (6, 4);
    let mut r = rng(4);
    let inputs = Inputs::draw(&mut r, 50, n, vocab);

    let mut wmask = ok(init_model(&ModelConfig::new(ModelKind::WMask, n).with_vocab_size(vocab), 1))?;
    wmask.get_mut("b").unwrap().iter_mut().for_each(|b| *b = r.random_range(-1.0..1.0));
    let mut fulllex = ok(init_model(
        &ModelConfig::new(ModelKind::FullLex, n).with_vocab_size(vocab).with_identity_perturbation(0.0),
        2,
    ))?;
    fulllex.get_mut("b").unwrap().iter_mut().for_each(|b| *b = r.random_range(-1.0..1.0));
    let mut bilinear = ok(init_model(&ModelConfig::new(ModelKind::BiLinear, n), 3))?;
    bilinear.get_mut("E").unwrap().fill(0.0);

    let mut fulllex_dev: f64 = 0.0;
    for (model, bitwise) in [(&wmask, true), (&fulllex, false), (&bilinear, true)] {
        let matrix = matrix_with(model)?;
        for k in 0..inputs.pairs.len() {
            let p = ok(model.compose(&inputs.input(k, model.kind()), None))?;
            let q = ok(matrix.compose(&inputs.input(k, ModelKind::Matrix), None))?;
            if bitwise {
                let same = p.iter().zip(&q).all(|(a, b)| a.to_bits() == b.to_bits());
                ensure!(same, "{} differs from Matrix: {p:?} vs {q:?}", model.kind());
            } else {
                fulllex_dev = fulllex_dev.max(max_abs_diff(&p, &q));
            }
        }
    }
    ensure!(fulllex_dev < 1e-12, "FullLex deviation {fulllex_dev:e}");
    Ok(format!("WMask and BiLinear bitwise, FullLex dev {fulllex_dev:.1e}"))
}

// 5

fn two_model_fixture() -> Outcome {
    let space = ok(EmbeddingSpace::from_rows([
        ("apple_tree", vec![1.0, 0.0]),
        ("tree", vec![0.766, 0.643]),
        ("apple", vec![-1.0, 0.0]),
    ]))?;
    let data = ok(PhraseDataset::new(vec![ok(PhraseRecord::new("apple", "tree", "apple_tree"))?]))?;
    let mut got = Vec::new();
    for p in [vec![0.866, 0.5], vec![0.643, -0.766]] {
        // W = 0 makes the Matrix model output its bias.
        let mut model = ok(init_model(&ModelConfig::new(ModelKind::Matrix, 2), 0))?;
        model.get_mut("W").unwrap().fill(0.0);
        model.get_mut("b").unwrap().copy_from_slice(&p);
        let corrected = ok(evaluate(&model, &data, &space, RankMethod::Corrected, None))?.per_item[0].rank;
        let original = ok(evaluate(&model, &data, &space, RankMethod::Original, None))?.per_item[0].rank;
        ensure!(corrected == ok(corrected_rank(&space, &p, "apple_tree"))?, "rank paths disagree");
        got.push((corrected, original));
    }
    ensure!(got == vec![(1, 2), (2, 1)], "ranks (corrected, original) for p1, p2: {got:?}");
    Ok("p1 -> (1, 2), p2 -> (2, 1)".into())
}

// 6

struct Synthetic {
    space: EmbeddingSpace,
    train: PhraseDataset,
    dev: PhraseDataset,
    test: PhraseDataset,
}

fn synthetic(seed: u64) -> std::result::Result<Synthetic, String> {
    let config =
        SyntheticConfig { n: 20, num_classes: 5, words_per_class: 20, num_phrases: 600, noise_sigma: 0.05, seed };
    let (space, data) = ok(generate_synthetic(&config))?;
    let split = ok(split_dataset(&data, ok("4:1:1".parse())?, seed))?;
    Ok(Synthetic {
        space,
        train: split.portion(SplitLabel::Train),
        dev: split.portion(SplitLabel::Dev),
        test: split.portion(SplitLabel::Test),
    })
}

fn train_config(seed: u64) -> TrainConfig {
    TrainConfig { batch_size: 20, seed, ..TrainConfig::default() }
}

fn fit(kind: ModelKind, data: &Synthetic, seed: u64) -> std::result::Result<ModelParams, String> {
    let model = ok(init_model(&ModelConfig::new(kind, 20), seed))?;
    Ok(ok(train(model, &data.train, &data.dev, &data.space, None, &train_config(seed)))?.best)
}

fn desk_scale_learning(data: &Synthetic, transweight: &ModelParams) -> Outcome {
    ensure!(
        (data.train.len(), data.dev.len(), data.test.len()) == (400, 100, 100),
        "split sizes {} / {} / {}",
        data.train.len(),
        data.dev.len(),
        data.test.len()
    );
    let matrix = fit(ModelKind::Matrix, data, 1)?;
    let m = ok(evaluate(&matrix, &data.test, &data.space, RankMethod::Corrected, None))?;
    let tw = ok(evaluate(transweight, &data.test, &data.space, RankMethod::Corrected, None))?;
    let summary = format!("Matrix [{}], TransWeight [{}]", m.tsv_metrics(), tw.tsv_metrics());
    for (name, report) in [("Matrix", &m), ("TransWeight", &tw)] {
        ensure!(report.q2 == 1.0 && report.pct_le_5 >= 80.0, "{name} below target: {summary}");
    }
    ensure!(tw.pct_le_5 >= m.pct_le_5 - 2.0, "TransWeight behind Matrix: {summary}");
    Ok(summary)
}

// 7

fn oov_generalization() -> Outcome {
    let mut gaps = Vec::new();
    for seed in 1..=3 {
        let config =
            SyntheticConfig { n: 20, num_classes: 5, words_per_class: 20, num_phrases: 600, noise_sigma: 0.05, seed };
        let (space, data) = ok(generate_synthetic(&config))?;
        let (seen, unseen) = hold_out_first_words(&data, 0.2, seed);
        let split = ok(split_dataset(&seen, ok("9:0:1".parse())?, seed))?;
        let (train_set, dev) = (split.portion(SplitLabel::Train), split.portion(SplitLabel::Dev));
        ensure!(!unseen.is_empty(), "seed {seed}: empty held-out slice");

        let lexicon = Lexicon::from_dataset(&train_set);
        let resolver = ok(LexicalResolver::new(lexicon.clone(), FallbackPolicy::NearestNeighbor))?;
        let fulllex = ok(init_model(&ModelConfig::new(ModelKind::FullLex, 20).with_vocab_size(lexicon.len()), seed))?;
        let fulllex = ok(train(fulllex, &train_set, &dev, &space, Some(&resolver), &train_config(seed)))?.best;
        let fl = ok(evaluate(&fulllex, &unseen, &space, RankMethod::Corrected, Some(&resolver)))?;

        let tw = ok(init_model(&ModelConfig::new(ModelKind::TransWeight, 20), seed))?;
        let tw = ok(train(tw, &train_set, &dev, &space, None, &train_config(seed)))?.best;
        let tw = ok(evaluate(&tw, &unseen, &space, RankMethod::Corrected, None))?;
        gaps.push(tw.pct_le_5 - fl.pct_le_5);
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let summary = format!("TransWeight - FullLex+ pct_le_5 per seed {gaps:.2?}, mean {mean:.2}");
    ensure!(mean > 0.0, "{summary}");
    Ok(summary)
}

// 8

fn dropout_harness(data: &Synthetic, model: &ModelParams) -> Outcome {
    let base = ok(evaluate(model, &data.test, &data.space, RankMethod::Corrected, None))?;
    let curve = ok(dropout_experiment(model, &data.test, &data.space, &[0.0, 0.9], &AblationMode::BOTH, 8, 10))?;
    for mode in AblationMode::BOTH {
        let at = |rate: f64| curve.iter().find(|p| p.mode == mode && p.rate == rate).unwrap().mean_pct_le_5;
        ensure!(at(0.0) == base.pct_le_5, "{mode} at rate 0: {} vs {}", at(0.0), base.pct_le_5);
        ensure!(at(0.9) <= at(0.0), "{mode}: rate 0.9 {} above rate 0 {}", at(0.9), at(0.0));
    }

    let (t, n) = (model.dims().t, model.n());
    let mut worst: f64 = 0.0;
    for step in 1..=9 {
        let rate = step as f64 / 10.0;
        let full = ok(mean_dropped(AblationMode::FullTransformation, t, n, rate, 1000, step))?;
        let param = ok(mean_dropped(AblationMode::PerParameter, t, n, rate, 1000, step))?;
        let rel = (full - param).abs() / param;
        ensure!(rel <= 0.01, "rate {rate}: {full} vs {param} dropped");
        worst = worst.max(rel);
    }
    let pct = |mode, rate| curve.iter().find(|p| p.mode == mode && p.rate == rate).unwrap().mean_pct_le_5;
    Ok(format!(
        "rate 0 = {:.2}%, rate 0.9 full {:.2}% / per-parameter {:.2}%, count gap {:.2}%",
        base.pct_le_5,
        pct(AblationMode::FullTransformation, 0.9),
        pct(AblationMode::PerParameter, 0.9),
        100.0 * worst
    ))
}

// 9

fn run_pipeline(seed: u64) -> std::result::Result<Vec<Vec<u8>>, String> {
    let config =
        SyntheticConfig { n: 8, num_classes: 3, words_per_class: 6, num_phrases: 120, noise_sigma: 0.05, seed };
    let (space, data) = ok(generate_synthetic(&config))?;
    let split = ok(split_dataset(&data, SplitRatio::default(), seed))?;
    let mut split_tsv = Vec::new();
    ok(split.write_tsv(&mut split_tsv))?;

    let model = ok(init_model(&ModelConfig::new(ModelKind::TransWeight, 8).with_t(10), seed))?;
    let train_config = TrainConfig {
        max_epochs: 15,
        batch_size: 16,
        dropout_rate: 0.2,
        dropout_site: DropoutSite::TransformedH,
        seed,
        ..TrainConfig::default()
    };
    let outcome = ok(train(
        model,
        &split.portion(SplitLabel::Train),
        &split.portion(SplitLabel::Dev),
        &space,
        None,
        &train_config,
    ))?;
    let mut log = Vec::new();
    ok(write_training_log(&mut log, &outcome.history))?;
    let mut checkpoint = Vec::new();
    ok(Checkpoint::new(outcome.best.clone(), None).write(&mut checkpoint))?;

    let test = split.portion(SplitLabel::Test);
    let report = ok(evaluate(&outcome.best, &test, &space, RankMethod::Corrected, None))?;
    let curve = ok(dropout_experiment(&outcome.best, &test, &space, &[0.0, 0.5], &AblationMode::BOTH, seed, 3))?;
    let mut curve_tsv = Vec::new();
    ok(write_curve(&mut curve_tsv, &curve))?;
    Ok(vec![
        split_tsv,
        log,
        checkpoint,
        ok(report.to_json())?.into_bytes(),
        report.tsv_row("TransWeight").into_bytes(),
        curve_tsv,
    ])
}

fn determinism() -> Outcome {
    let first = run_pipeline(9)?;
    let second = run_pipeline(9)?;
    let names = ["split", "training log", "checkpoint", "report json", "report tsv", "dropout curve"];
    for ((a, b), name) in first.iter().zip(&second).zip(names) {
        ensure!(a == b, "{name} differs between identical runs");
    }
    let other = run_pipeline(10)?;
    ensure!(other[2] != first[2], "a different seed produced the same checkpoint");
    let bytes: usize = first.iter().map(Vec::len).sum();
    Ok(format!("6 artifacts, {bytes} bytes, identical across reruns"))
}

// 10

/// Median of a sorted slice by position.
fn oracle_median(sorted: &[usize]) -> f64 {
    let len = sorted.len();
    let mut total = 0.0;
    let mut count = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        // Middle element for odd lengths, the two middle ones for even.
        if 2 * i + 1 == len || 2 * i + 2 == len || 2 * i == len {
            total += x as f64;
            count += 1.0;
        }
    }
    total / count
}

fn oracle_quartiles(ranks: &[usize]) -> (f64, f64, f64) {
    let mut sorted = Vec::new();
    for &x in ranks {
        let at = sorted.iter().position(|&y| y > x).unwrap_or(sorted.len());
        sorted.insert(at, x);
    }
    if sorted.len() == 1 {
        let x = sorted[0] as f64;
        return (x, x, x);
    }
    let half = sorted.len() / 2;
    let lower: Vec<usize> = sorted.iter().take(half).copied().collect();
    let upper: Vec<usize> = sorted.iter().rev().take(half).rev().copied().collect();
    (oracle_median(&lower), oracle_median(&sorted), oracle_median(&upper))
}

fn scalar_cos(a: &[f64], b: &[f64]) -> f64 {
    let mut ab = 0.0;
    let mut aa = 0.0;
    let mut bb = 0.0;
    for i in 0..a.len() {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    ab / (aa.sqrt() * bb.sqrt())
}

fn metrics_oracle() -> Outcome {
    let mut r = rng(10);
    for case in 0..100 {
        let len = r.random_range(1..=60);
        let ranks: Vec<usize> = (0..len).map(|_| r.random_range(1..=40)).collect();
        let got = ok(quartiles(&ranks))?;
        let want = oracle_quartiles(&ranks);
        ensure!(got == want, "case {case} {ranks:?}: {got:?} vs {want:?}");
    }

    // Five phrases under the Addition model.
    let words: [(&str, [f64; 3]); 6] = [
        ("red", [1.0, 0.2, 0.0]),
        ("car", [0.0, 1.0, 0.3]),
        ("old", [0.4, -0.5, 1.0]),
        ("tree", [-0.3, 0.8, 0.6]),
        ("big", [0.9, 0.9, -0.2]),
        ("dog", [0.1, -1.0, 0.4]),
    ];
    let phrases: [(&str, &str, &str, [f64; 3]); 5] = [
        ("red", "car", "red_car", [0.9, 1.1, 0.4]),
        ("old", "tree", "old_tree", [-0.6, 0.2, 1.0]),
        ("big", "dog", "big_dog", [1.0, -0.2, 0.1]),
        ("old", "car", "old_car", [0.4, 0.3, 1.4]),
        ("big", "tree", "big_tree", [0.2, 0.3, -1.0]),
    ];
    let mut rows: Vec<(String, Vec<f64>)> = words.iter().map(|(w, v)| (w.to_string(), v.to_vec())).collect();
    rows.extend(phrases.iter().map(|(_, _, p, v)| (p.to_string(), v.to_vec())));
    let space = ok(EmbeddingSpace::from_rows(rows.clone()))?;
    let records =
        phrases.iter().map(|(a, b, p, _)| PhraseRecord::new(*a, *b, *p)).collect::<transweight::Result<Vec<_>>>();
    let data = ok(PhraseDataset::new(ok(records)?))?;
    let addition = ok(init_model(&ModelConfig::new(ModelKind::Addition, 3), 0))?;
    let report = ok(evaluate(&addition, &data, &space, RankMethod::Corrected, None))?;

    let original = ok(evaluate(&addition, &data, &space, RankMethod::Original, None))?;

    let vector = |token: &str| rows.iter().find(|(t, _)| t == token).unwrap().1.clone();
    let mut ranks = Vec::new();
    let mut original_ranks = Vec::new();
    let mut distance = 0.0;
    for (a, b, p, _) in phrases {
        let (u, v, target) = (vector(a), vector(b), vector(p));
        let composed: Vec<f64> = (0..3).map(|i| u[i] + v[i]).collect();
        let sim = scalar_cos(&composed, &target);
        let mut rank = 1;
        let mut original_rank = 1;
        for (token, w) in &rows {
            if token == p {
                continue;
            }
            if scalar_cos(&target, w) > sim {
                rank += 1;
            }
            if scalar_cos(&composed, w) > sim {
                original_rank += 1;
            }
        }
        ranks.push(rank);
        original_ranks.push(original_rank);
        distance += 1.0 - sim;
    }
    let got_original: Vec<usize> = original.per_item.iter().map(|i| i.rank).collect();
    ensure!(got_original == original_ranks, "original ranks {got_original:?} vs oracle {original_ranks:?}");
    let (q1, q2, q3) = oracle_quartiles(&ranks);
    let good = ranks.iter().filter(|&&r| r <= 5).count();
    let got_ranks: Vec<usize> = report.per_item.iter().map(|i| i.rank).collect();
    ensure!(got_ranks == ranks, "fixture ranks {got_ranks:?} vs oracle {ranks:?}");
    ensure!((report.q1, report.q2, report.q3) == (q1, q2, q3), "fixture quartiles differ");
    ensure!((report.cos_d - distance / 5.0).abs() < 1e-12, "cos-d {} vs {}", report.cos_d, distance / 5.0);
    ensure!(report.pct_le_5 == 100.0 * good as f64 / 5.0, "pct_le_5 {}", report.pct_le_5);

    // 238 of 365 ranks at most 5 is 65.21%; quartiles 1, 3, 11.
    let items: Vec<ItemResult> = (0..365)
        .map(|i| {
            let rank = match i {
                0..=91 => 1,
                92..=182 => 3,
                183..=237 => 5,
                _ => 11,
            };
            ItemResult { phrase: format!("p{i}"), rank, cosine_distance: 0.31 }
        })
        .collect();
    let table = ok(EvalReport::from_items(RankMethod::Corrected, items))?;
    ensure!(table.tsv_metrics() == "0.310\t1\t3\t11\t65.21%", "row {:?}", table.tsv_metrics());
    Ok(format!("100 rank lists, fixture ranks {ranks:?}, row {:?}", table.tsv_metrics()))
}

fn main() {
    rayon::ThreadPoolBuilder::new().num_threads(1).build_global().expect("single-threaded pool");

    let mut results: Vec<(usize, &str, Outcome, Duration)> = Vec::new();
    let mut run = |id: usize, name: &'static str, check: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let status = if outcome.is_ok() { "PASS" } else { "FAIL" };
        let detail = match &outcome {
            Ok(s) | Err(s) => s.clone(),
        };
        println!("{status} criterion {id:>2} {name} ({:.2}s): {detail}", elapsed.as_secs_f64());
        results.push((id, name, outcome, elapsed));
    };

    run(1, "parameter counts", &mut parameter_counts);
    run(2, "linear collapse", &mut linear_collapse);
    run(3, "gradient check", &mut gradient_check);
    run(4, "initialization reductions", &mut init_reductions);
    run(5, "two-model rank fixture", &mut two_model_fixture);

    let start = Instant::now();
    let shared = synthetic(1).and_then(|data| fit(ModelKind::TransWeight, &data, 1).map(|tw| (data, tw)));
    let setup = start.elapsed();
    match &shared {
        Ok((data, tw)) => {
            run(6, "desk-scale learning", &mut || desk_scale_learning(data, tw));
            run(8, "dropout harness", &mut || dropout_harness(data, tw));
        }
        Err(e) => {
            run(6, "desk-scale learning", &mut || Err(format!("setup failed: {e}")));
            run(8, "dropout harness", &mut || Err(format!("setup failed: {e}")));
        }
    }
    println!("       shared TransWeight training took {:.2}s", setup.as_secs_f64());
    run(7, "held-out first words", &mut oov_generalization);
    run(9, "determinism", &mut determinism);
    run(10, "quartiles and metrics", &mut metrics_oracle);

    let failed: Vec<usize> = results.iter().filter(|r| r.2.is_err()).map(|r| r.0).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
