use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tabgen_core::metrics::{
    contingency_similarity, correlation_similarity, evaluate_all, ks_complement, tv_complement, EvalOptions,
};
use tabgen_core::table::{ColumnData, ColumnSpec, DataTable};

// Brute-force oracles: quadratic scans over explicit value lists.

fn ecdf(sample: &[f64], x: f64) -> f64 {
    sample.iter().filter(|&&v| v <= x).count() as f64 / sample.len() as f64
}

fn ks_oracle(a: &[f64], b: &[f64]) -> f64 {
    let d = a
        .iter()
        .chain(b)
        .map(|&x| (ecdf(a, x) - ecdf(b, x)).abs())
        .fold(0.0, f64::max);
    1.0 - d
}

fn freq<T: PartialEq>(sample: &[T], v: &T) -> f64 {
    sample.iter().filter(|x| *x == v).count() as f64 / sample.len() as f64
}

fn tv_oracle(a: &[u32], b: &[u32]) -> f64 {
    let mut support: Vec<u32> = a.iter().chain(b).copied().collect();
    support.sort();
    support.dedup();
    1.0 - 0.5 * support.iter().map(|v| (freq(a, v) - freq(b, v)).abs()).sum::<f64>()
}

fn corr_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / n;
    let sx = (x.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / n).sqrt();
    let sy = (y.iter().map(|b| (b - my).powi(2)).sum::<f64>() / n).sqrt();
    cov / (sx * sy)
}

fn contingency_oracle(ra: &[u32], rb: &[u32], sa: &[u32], sb: &[u32]) -> f64 {
    let real: Vec<(u32, u32)> = ra.iter().copied().zip(rb.iter().copied()).collect();
    let synth: Vec<(u32, u32)> = sa.iter().copied().zip(sb.iter().copied()).collect();
    let mut support = real.clone();
    support.extend(&synth);
    support.sort();
    support.dedup();
    1.0 - 0.5 * support.iter().map(|p| (freq(&real, p) - freq(&synth, p)).abs()).sum::<f64>()
}

fn sample_f(rng: &mut ChaCha8Rng, n: usize, discrete: bool) -> Vec<f64> {
    (0..n)
        .map(|_| if discrete { rng.random_range(0..5) as f64 } else { rng.random_range(-3.0..3.0) })
        .collect()
}

fn sample_c(rng: &mut ChaCha8Rng, n: usize, k: u32) -> Vec<u32> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

proptest! {
    #[test]
    fn ks_matches_oracle(seed in any::<u64>(), n in 1usize..50, m in 1usize..50, ties in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = sample_f(&mut rng, n, ties);
        let b = sample_f(&mut rng, m, ties);
        let got = ks_complement(&a, &b).unwrap();
        prop_assert!((got - ks_oracle(&a, &b)).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&got));
        prop_assert_eq!(got, ks_complement(&b, &a).unwrap());
    }

    #[test]
    fn tv_matches_oracle(seed in any::<u64>(), n in 1usize..50, m in 1usize..50, k in 1u32..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = sample_c(&mut rng, n, k);
        let b = sample_c(&mut rng, m, k + 2);
        let got = tv_complement(&a, &b).unwrap();
        prop_assert!((got - tv_oracle(&a, &b)).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&got));
    }

    #[test]
    fn correlation_matches_oracle(seed in any::<u64>(), n in 3usize..50, m in 3usize..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rx, ry) = (sample_f(&mut rng, n, false), sample_f(&mut rng, n, false));
        let (sx, sy) = (sample_f(&mut rng, m, false), sample_f(&mut rng, m, false));
        let got = correlation_similarity(&rx, &ry, &sx, &sy).unwrap();
        let want = 1.0 - (corr_oracle(&rx, &ry) - corr_oracle(&sx, &sy)).abs() / 2.0;
        prop_assert!((got - want).abs() <= 1e-12);
    }

    #[test]
    fn contingency_matches_oracle(seed in any::<u64>(), n in 1usize..50, m in 1usize..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ra, rb) = (sample_c(&mut rng, n, 3), sample_c(&mut rng, n, 4));
        let (sa, sb) = (sample_c(&mut rng, m, 3), sample_c(&mut rng, m, 4));
        let got = contingency_similarity(&ra, &rb, &sa, &sb).unwrap();
        prop_assert!((got - contingency_oracle(&ra, &rb, &sa, &sb)).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&got));
    }

    #[test]
    fn self_comparison_scores_one(seed in any::<u64>()) {
        let t = mixed_table(seed, 40);
        let r = evaluate_all(&t, &t, &EvalOptions::default()).unwrap();
        prop_assert!((r.averages.overall - 1.0).abs() < 1e-12);
        for c in &r.columns {
            prop_assert!((c.score - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn report_is_bounded_and_symmetric(seed in any::<u64>()) {
        let real = mixed_table(seed, 40);
        let synth = mixed_table(seed.wrapping_add(1), 25);
        let r = evaluate_all(&real, &synth, &EvalOptions::default()).unwrap();
        let n = r.pairs.len();
        for i in 0..n {
            prop_assert!(r.pairs[i][i].is_none());
            for j in 0..n {
                if i != j {
                    let v = r.pairs[i][j].unwrap();
                    prop_assert!((0.0..=1.0).contains(&v));
                    prop_assert_eq!(r.pairs[i][j], r.pairs[j][i]);
                }
            }
        }
        prop_assert!((0.0..=1.0).contains(&r.averages.overall));
    }
}

fn mixed_table(seed: u64, rows: usize) -> DataTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DataTable::new(
        vec![
            ColumnSpec::continuous("x"),
            ColumnSpec::continuous("y"),
            ColumnSpec::categorical("c", ["a", "b", "c"]),
            ColumnSpec::categorical("d", (0..20).map(|i| i.to_string())),
        ],
        vec![
            ColumnData::Continuous(sample_f(&mut rng, rows, false).into_iter().map(Some).collect()),
            ColumnData::Continuous(sample_f(&mut rng, rows, false).into_iter().map(Some).collect()),
            ColumnData::Categorical(sample_c(&mut rng, rows, 3).into_iter().map(Some).collect()),
            ColumnData::Categorical(sample_c(&mut rng, rows, 20).into_iter().map(Some).collect()),
        ],
    )
    .unwrap()
}

#[test]
fn type_pairs_cover_the_mixed_table() {
    let r = evaluate_all(&mixed_table(1, 50), &mixed_table(2, 50), &EvalOptions::default()).unwrap();
    let keys: Vec<&str> = r.type_pairs.keys().map(String::as_str).collect();
    assert_eq!(keys, ["AA", "AB", "AC", "BC"]);
}

#[test]
fn mixed_pair_bins_over_the_real_range() {
    // x spans [0, 10]; synthetic values past the range fall in the edge bins
    let real = DataTable::new(
        vec![ColumnSpec::continuous("x"), ColumnSpec::categorical("c", ["a", "b"])],
        vec![
            ColumnData::Continuous(vec![Some(0.0), Some(10.0), Some(5.0), Some(9.99)]),
            ColumnData::Categorical(vec![Some(0), Some(1), Some(0), Some(1)]),
        ],
    )
    .unwrap();
    let synth = DataTable::new(
        real.schema().to_vec(),
        vec![
            ColumnData::Continuous(vec![Some(-4.0), Some(30.0), Some(5.01), Some(9.5)]),
            ColumnData::Categorical(vec![Some(0), Some(1), Some(0), Some(1)]),
        ],
    )
    .unwrap();
    let r = evaluate_all(&real, &synth, &EvalOptions::default()).unwrap();
    assert_eq!(r.pairs[0][1], Some(1.0));
}
