use std::hash::{DefaultHasher, Hash, Hasher};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::residuals::{fsmd_terms, pearson_residuals};
use crate::distributions::Family;
use crate::error::{Error, Result};
use crate::regression::{fit, Dataset};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, Copy)]
pub struct CvOptions {
    pub test_size: usize,
    pub partitions: usize,
    pub seed: u64,
}

impl CvOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            test_size: 10,
            partitions: 1000,
            seed,
        }
    }
}

/// Held-out RSS (squared Pearson residuals) and FSMD for the bessel (`a`)
/// and beta (`b`) regressions over random train/test partitions.
#[derive(Debug, Clone, Serialize)]
pub struct CvResult {
    pub rss_bessel: Vec<f64>,
    pub rss_beta: Vec<f64>,
    pub fsmd_bessel: Vec<f64>,
    pub fsmd_beta: Vec<f64>,
    pub rss_ratio: Vec<f64>,
    pub fsmd_ratio: Vec<f64>,
    /// Test rows of each retained partition.
    pub test_indices: Vec<Vec<usize>>,
    /// Hash of each retained partition's test rows.
    pub split_hashes: Vec<u64>,
    /// Original partition number of each retained partition.
    pub partition_ids: Vec<usize>,
    /// Partitions dropped because a fit failed.
    pub dropped: usize,
    pub test_size: usize,
    pub seed: u64,
}

impl CvResult {
    /// Fraction of partitions with `RSS_bessel < RSS_beta`.
    pub fn rss_bessel_wins(&self) -> f64 {
        frac_below_one(&self.rss_ratio)
    }

    /// Fraction of partitions with `FSMD_bessel < FSMD_beta`.
    pub fn fsmd_bessel_wins(&self) -> f64 {
        frac_below_one(&self.fsmd_ratio)
    }
}

fn frac_below_one(r: &[f64]) -> f64 {
    if r.is_empty() {
        return f64::NAN;
    }
    r.iter().filter(|&&x| x < 1.0).count() as f64 / r.len() as f64
}

pub(crate) fn split_hash(idx: &[usize]) -> u64 {
    let mut h = DefaultHasher::new();
    idx.hash(&mut h);
    h.finish()
}

struct Partition {
    test: Vec<usize>,
    rss: [f64; 2],
    fsmd: [f64; 2],
}

fn evaluate(data: &Dataset, train: &[usize], test: &[usize]) -> Option<([f64; 2], [f64; 2])> {
    let tr = data.subset(train).ok()?;
    let te = data.subset_unchecked(test);
    let mut rss = [0.0; 2];
    let mut fsmd = [0.0; 2];
    for (k, model) in [Family::Bessel, Family::Beta].into_iter().enumerate() {
        let f = fit(model, &tr, None).ok().filter(|f| f.converged)?;
        rss[k] = pearson_residuals(&f, &te).iter().map(|r| r * r).sum();
        fsmd[k] = fsmd_terms(&f, &te).iter().sum();
    }
    (rss.iter().chain(&fsmd).all(|v| v.is_finite() && *v > 0.0)).then_some((rss, fsmd))
}

/// Random-partition cross-validation of the bessel against the beta
/// regression. Both models are fitted on the same training rows of every
/// partition; a partition where either fit fails is dropped for both.
pub fn cross_validate(data: &Dataset, opts: &CvOptions) -> Result<CvResult> {
    let n = data.n();
    if opts.test_size == 0 || n <= opts.test_size + data.p() + data.q() {
        return Err(Error::Config(format!(
            "need 0 < test size and n > test size + p + q (n={n}, test size={})",
            opts.test_size
        )));
    }
    let parts: Vec<Option<Partition>> = (0..opts.partitions)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream(opts.seed, j as u64, Purpose::Split);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let mut test = idx[..opts.test_size].to_vec();
            let mut train = idx[opts.test_size..].to_vec();
            test.sort_unstable();
            train.sort_unstable();
            let (rss, fsmd) = evaluate(data, &train, &test)?;
            Some(Partition { test, rss, fsmd })
        })
        .collect();
    let mut out = CvResult {
        rss_bessel: vec![],
        rss_beta: vec![],
        fsmd_bessel: vec![],
        fsmd_beta: vec![],
        rss_ratio: vec![],
        fsmd_ratio: vec![],
        test_indices: vec![],
        split_hashes: vec![],
        partition_ids: vec![],
        dropped: 0,
        test_size: opts.test_size,
        seed: opts.seed,
    };
    for (j, p) in parts.into_iter().enumerate() {
        let Some(p) = p else {
            out.dropped += 1;
            continue;
        };
        out.rss_bessel.push(p.rss[0]);
        out.rss_beta.push(p.rss[1]);
        out.fsmd_bessel.push(p.fsmd[0]);
        out.fsmd_beta.push(p.fsmd[1]);
        out.rss_ratio.push(p.rss[0] / p.rss[1]);
        out.fsmd_ratio.push(p.fsmd[0] / p.fsmd[1]);
        out.split_hashes.push(split_hash(&p.test));
        out.test_indices.push(p.test);
        out.partition_ids.push(j);
    }
    Ok(out)
}
