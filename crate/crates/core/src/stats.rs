//! One-way ANOVA and Holm-corrected pairwise Welch tests.
//!
//! Test statistics are computed in the caller's scalar type; p-values come
//! from the F and Student-t distributions in `f64`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anova {
    #[serde(with = "extended_f64")]
    pub f: f64,
    pub p: f64,
    pub df_between: usize,
    pub df_within: usize,
}

impl Anova {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p < alpha
    }
}

/// JSON has no infinities; non-finite values travel as strings.
mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&x.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(x) => Ok(x),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn check_groups<S: Scalar>(groups: &[Vec<S>]) -> Result<()> {
    if groups.len() < 2 {
        return Err(Error::Statistics(format!(
            "need at least 2 groups, got {}",
            groups.len()
        )));
    }
    if let Some((i, g)) = groups.iter().enumerate().find(|(_, g)| g.len() < 2) {
        return Err(Error::Statistics(format!(
            "group {i} has {} samples, need at least 2",
            g.len()
        )));
    }
    Ok(())
}

fn mean<S: Scalar>(xs: &[S]) -> S {
    xs.iter().copied().sum::<S>() / S::of(xs.len() as f64)
}

fn sum_sq_dev<S: Scalar>(xs: &[S], centre: S) -> S {
    xs.iter().map(|x| (*x - centre) * (*x - centre)).sum()
}

/// Unbiased sample variance.
fn variance<S: Scalar>(xs: &[S]) -> S {
    sum_sq_dev(xs, mean(xs)) / S::of((xs.len() - 1) as f64)
}

/// F ratio of between- to within-group mean squares, with its upper-tail p.
///
/// With zero within-group variance the ratio is reported as infinite with
/// `p = 0` when group means differ, and as `F = 0`, `p = 1` when they agree.
pub fn anova_oneway<S: Scalar>(groups: &[Vec<S>]) -> Result<Anova> {
    check_groups(groups)?;
    let k = groups.len();
    let n: usize = groups.iter().map(Vec::len).sum();
    let all: Vec<S> = groups.iter().flatten().copied().collect();
    let grand = mean(&all);
    let ssb: S = groups
        .iter()
        .map(|g| {
            let d = mean(g) - grand;
            S::of(g.len() as f64) * d * d
        })
        .sum();
    let ssw: S = groups.iter().map(|g| sum_sq_dev(g, mean(g))).sum();
    let df_between = k - 1;
    let df_within = n - k;
    let msb = ssb / S::of(df_between as f64);
    let msw = ssw / S::of(df_within as f64);

    let means: Vec<S> = groups.iter().map(|g| mean(g)).collect();
    let spread = means
        .iter()
        .fold(S::zero(), |acc, m| acc.max((*m - means[0]).abs()));
    let degenerate = msw <= S::epsilon() * S::of(64.0) * grand.abs().max(S::one());
    let (f, p) = if degenerate {
        if spread > S::epsilon() * S::of(64.0) * grand.abs().max(S::one()) {
            (f64::INFINITY, 0.0)
        } else {
            (0.0, 1.0)
        }
    } else {
        let f = (msb / msw).as_f64();
        let dist = FisherSnedecor::new(df_between as f64, df_within as f64)
            .map_err(|e| Error::Statistics(e.to_string()))?;
        (f, dist.sf(f).clamp(0.0, 1.0))
    };
    Ok(Anova {
        f,
        p,
        df_between,
        df_within,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

/// Two-sided Welch t-test for unequal variances.
pub fn welch_t_test<S: Scalar>(a: &[S], b: &[S]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Statistics(
            "Welch test needs 2 samples per group".into(),
        ));
    }
    let (ma, mb) = (mean(a), mean(b));
    let (na, nb) = (S::of(a.len() as f64), S::of(b.len() as f64));
    let (qa, qb) = (variance(a) / na, variance(b) / nb);
    let se2 = qa + qb;
    let diff = (ma - mb).as_f64();
    if se2 <= S::zero() {
        let (t, p) = if diff.abs() > 0.0 {
            (diff.signum() * f64::INFINITY, 0.0)
        } else {
            (0.0, 1.0)
        };
        return Ok(WelchTest { t, df: f64::NAN, p });
    }
    let t = diff / se2.as_f64().sqrt();
    let df = {
        let (qa, qb) = (qa.as_f64(), qb.as_f64());
        let num = (qa + qb).powi(2);
        let den = qa * qa / (a.len() - 1) as f64 + qb * qb / (b.len() - 1) as f64;
        num / den
    };
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Statistics(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
    Ok(WelchTest { t, df, p })
}

/// Holm step-down adjustment, returned in input order.
pub fn holm_adjust(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|a, b| p_values[*a].total_cmp(&p_values[*b]).then(a.cmp(b)));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        let scaled = ((m - rank) as f64 * p_values[i]).min(1.0);
        running = running.max(scaled);
        adjusted[i] = running;
    }
    adjusted
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub a: usize,
    pub b: usize,
    pub raw_p: f64,
    pub adjusted_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostHoc {
    pub comparisons: Vec<PairwiseComparison>,
    /// Groups not significantly worse than the highest-mean group.
    pub best: Vec<bool>,
}

impl PostHoc {
    pub fn adjusted_p(&self, a: usize, b: usize) -> Option<f64> {
        let (a, b) = (a.min(b), a.max(b));
        self.comparisons
            .iter()
            .find(|c| c.a == a && c.b == b)
            .map(|c| c.adjusted_p)
    }
}

/// Welch tests over every pair of groups with Holm correction, marking the
/// statistically best groups at `alpha`.
pub fn posthoc_pairwise<S: Scalar>(groups: &[Vec<S>], alpha: f64) -> Result<PostHoc> {
    check_groups(groups)?;
    let k = groups.len();
    let mut comparisons = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in a + 1..k {
            let w = welch_t_test(&groups[a], &groups[b])?;
            comparisons.push(PairwiseComparison {
                a,
                b,
                raw_p: w.p,
                adjusted_p: w.p,
            });
        }
    }
    let raw: Vec<f64> = comparisons.iter().map(|c| c.raw_p).collect();
    for (c, adj) in comparisons.iter_mut().zip(holm_adjust(&raw)) {
        c.adjusted_p = adj;
    }
    let means: Vec<S> = groups.iter().map(|g| mean(g)).collect();
    let top = (0..k).fold(0, |best, i| if means[i] > means[best] { i } else { best });
    let mut post = PostHoc {
        comparisons,
        best: vec![false; k],
    };
    post.best = (0..k)
        .map(|i| i == top || post.adjusted_p(i, top).is_some_and(|p| p >= alpha))
        .collect();
    Ok(post)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn groups(v: &[&[f64]]) -> Vec<Vec<f64>> {
        v.iter().map(|g| g.to_vec()).collect()
    }

    /// Two-pass oracle: grand mean first, then sums of squares.
    fn oracle_f(groups: &[Vec<f64>]) -> f64 {
        let n: usize = groups.iter().map(Vec::len).sum();
        let k = groups.len();
        let mut total = 0.0;
        for g in groups {
            for x in g {
                total += x;
            }
        }
        let grand = total / n as f64;
        let mut ssb = 0.0;
        let mut ssw = 0.0;
        for g in groups {
            let mut s = 0.0;
            for x in g {
                s += x;
            }
            let m = s / g.len() as f64;
            ssb += g.len() as f64 * (m - grand) * (m - grand);
            for x in g {
                ssw += (x - m) * (x - m);
            }
        }
        (ssb / (k - 1) as f64) / (ssw / (n - k) as f64)
    }

    #[test]
    fn anova_hand_example() {
        // means 2, 3, 4; SSB = 3 * (1 + 0 + 1) = 6, SSW = 3 * 2 = 6
        // F = (6 / 2) / (6 / 6) = 3
        let a = anova_oneway(&groups(&[
            &[1.0, 2.0, 3.0],
            &[2.0, 3.0, 4.0],
            &[3.0, 4.0, 5.0],
        ]))
        .unwrap();
        assert!((a.f - 3.0).abs() < 1e-9);
        assert_eq!((a.df_between, a.df_within), (2, 6));
        // upper tail of F(2, 6) at 3: (1 + 3 * 2 / 6)^(-3) = 1/8
        assert!((a.p - 0.125).abs() < 1e-9);
    }

    #[test]
    fn anova_identical_and_degenerate_groups() {
        let a = anova_oneway(&groups(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]])).unwrap();
        assert_eq!(a.f, 0.0);
        assert!((a.p - 1.0).abs() < 1e-12);
        let a = anova_oneway(&groups(&[&[0.0, 0.0], &[0.0, 0.0]])).unwrap();
        assert_eq!((a.f, a.p), (0.0, 1.0));
        let a = anova_oneway(&groups(&[&[0.0, 0.0], &[1.0, 1.0]])).unwrap();
        assert_eq!((a.f, a.p), (f64::INFINITY, 0.0));
        assert!(anova_oneway(&groups(&[&[1.0, 2.0]])).is_err());
        assert!(anova_oneway(&groups(&[&[1.0, 2.0], &[1.0]])).is_err());
    }

    #[test]
    fn infinite_f_survives_json() {
        let a = anova_oneway(&groups(&[&[0.0, 0.0], &[1.0, 1.0]])).unwrap();
        let back: Anova = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn anova_f32() {
        let g: Vec<Vec<f32>> = vec![
            vec![1.0, 2.0, 3.0],
            vec![2.0, 3.0, 4.0],
            vec![3.0, 4.0, 5.0],
        ];
        assert!((anova_oneway(&g).unwrap().f - 3.0).abs() < 1e-5);
    }

    #[test]
    fn holm_textbook() {
        // sorted: 0.01 * 3 = 0.03, 0.02 * 2 = 0.04, 0.04 * 1 = 0.04
        let adj = holm_adjust(&[0.04, 0.01, 0.02]);
        let expected = [0.04, 0.03, 0.04];
        for (a, e) in adj.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
        // monotonization: 0.03 * 2 = 0.06 lifts the last step's 0.05
        let adj = holm_adjust(&[0.01, 0.03, 0.05]);
        let expected = [0.03, 0.06, 0.06];
        for (a, e) in adj.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
        assert_eq!(holm_adjust(&[0.9, 0.8]), vec![1.0, 1.0]);
    }

    #[test]
    fn welch_matches_hand_computation() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 4.0, 6.0, 8.0, 10.0];
        let w = welch_t_test(&a, &b).unwrap();
        // var a = 5/3, var b = 10; se^2 = 5/12 + 2
        let se2: f64 = 5.0 / 12.0 + 2.0;
        assert!((w.t - (2.5 - 6.0) / se2.sqrt()).abs() < 1e-12);
        let df = se2 * se2 / ((5.0f64 / 12.0).powi(2) / 3.0 + 4.0 / 4.0);
        assert!((w.df - df).abs() < 1e-9);
        assert!(w.p > 0.05 && w.p < 0.1);
    }

    #[test]
    fn posthoc_identical_groups() {
        let g = groups(&[&[0.1, 0.2, 0.3], &[0.1, 0.2, 0.3], &[0.1, 0.2, 0.3]]);
        let post = posthoc_pairwise(&g, DEFAULT_ALPHA).unwrap();
        assert!(post
            .comparisons
            .iter()
            .all(|c| (c.adjusted_p - 1.0).abs() < 1e-12));
        assert_eq!(post.best, vec![true; 3]);
    }

    #[test]
    fn posthoc_single_clear_winner() {
        let around =
            |c: f64| -> Vec<f64> { (0..10).map(|i| c + 0.001 * (i as f64 - 4.5)).collect() };
        let g = vec![around(0.1), around(0.9), around(0.1), around(0.1)];
        let post = posthoc_pairwise(&g, DEFAULT_ALPHA).unwrap();
        assert_eq!(post.best, vec![false, true, false, false]);
        for c in &post.comparisons {
            assert!(c.adjusted_p >= c.raw_p);
        }
    }

    proptest! {
        #[test]
        fn anova_matches_two_pass_oracle(
            g in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2..8), 2..5),
        ) {
            let a = anova_oneway(&g).unwrap();
            let f = oracle_f(&g);
            prop_assume!(f.is_finite());
            prop_assert!((a.f - f).abs() <= 1e-9 * f.abs().max(1.0));
            prop_assert!((0.0..=1.0).contains(&a.p));
        }

        #[test]
        fn anova_translation_invariant(
            g in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2..8), 2..5),
            shift in -100.0f64..100.0,
        ) {
            let shifted: Vec<Vec<f64>> = g.iter().map(|v| v.iter().map(|x| x + shift).collect()).collect();
            let (a, b) = (anova_oneway(&g).unwrap(), anova_oneway(&shifted).unwrap());
            prop_assert!((a.f - b.f).abs() <= 1e-6 * a.f.abs().max(1.0));
        }

        #[test]
        fn holm_never_below_raw(p in prop::collection::vec(0.0f64..=1.0, 1..12)) {
            for (adj, raw) in holm_adjust(&p).iter().zip(&p) {
                prop_assert!(*adj >= *raw && *adj <= 1.0);
            }
        }
    }
}
