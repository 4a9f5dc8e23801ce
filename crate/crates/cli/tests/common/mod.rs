#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use affrec::matchfile::{write_fundamental, write_match_list, MatchList, MatchRecord};
use affrec::synthbench::{generate_scene, plane_with_outliers, SyntheticScene};
use affrec::{FundamentalMatrix, SiftCorrespondence, SiftFeature};

pub fn affrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_affrec"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

pub fn write_f(dir: &Path, name: &str, f: &FundamentalMatrix) -> PathBuf {
    write(dir, name, &write_fundamental(f))
}

fn records(corrs: &[SiftCorrespondence], qualities: Option<&[f64]>, labels: Option<&[i64]>) -> MatchList {
    MatchList {
        records: corrs
            .iter()
            .enumerate()
            .map(|(i, c)| MatchRecord {
                corr: *c,
                quality: qualities.map(|q| q[i]),
                label: labels.map(|l| l[i]),
            })
            .collect(),
    }
}

/// Detector output of a scene plus its ground-truth F.
pub fn scene_files(dir: &Path, seed: u64, sigma: f64) -> (SyntheticScene, PathBuf, PathBuf) {
    let s = generate_scene(seed, sigma, None).unwrap();
    let m = write(dir, &format!("scene_{seed}.txt"), &write_match_list(&records(&s.sift, None, None), false));
    let f = write_f(dir, &format!("scene_{seed}_f.txt"), &s.gt_f);
    (s, m, f)
}

/// A labelled plane (label 0) with random outliers (label −1), qualities
/// included.
pub fn plane_files(dir: &Path, seed: u64, inliers: usize, outliers: usize, sigma: f64) -> (PathBuf, PathBuf) {
    let pl = plane_with_outliers(seed, inliers, outliers, sigma).unwrap();
    let labels: Vec<i64> = pl.is_inlier.iter().map(|&b| if b { 0 } else { -1 }).collect();
    let text = write_match_list(&records(&pl.corrs, Some(&pl.qualities), Some(&labels)), false);
    let name = format!("plane_{seed}_{inliers}_{outliers}");
    (write(dir, &format!("{name}.txt"), &text), write_f(dir, &format!("{name}_f.txt"), &pl.gt_f))
}

/// Plane matches plus off-plane matches labelled as outliers, so that F can
/// be estimated from the file itself.
pub fn scene_with_background(dir: &Path, seed: u64) -> PathBuf {
    let s = generate_scene(seed, 0.0, None).unwrap();
    let mut corrs = s.sift.clone();
    let mut labels = vec![0i64; corrs.len()];
    for (a, b) in &s.general_noisy {
        corrs.push(SiftCorrespondence::new(
            SiftFeature::new(a.x, a.y, 1.0, 0.0).unwrap(),
            SiftFeature::new(b.x, b.y, 1.0, 0.0).unwrap(),
        ));
        labels.push(-1);
    }
    let q = vec![1.0; corrs.len()];
    write(dir, &format!("background_{seed}.txt"), &write_match_list(&records(&corrs, Some(&q), Some(&labels)), false))
}

/// Off-plane point matches with dummy scale and orientation.
pub fn general_files(dir: &Path, seed: u64, sigma: f64) -> PathBuf {
    let s = generate_scene(seed, sigma, None).unwrap();
    let corrs: Vec<SiftCorrespondence> = s
        .general_noisy
        .iter()
        .map(|(a, b)| {
            SiftCorrespondence::new(
                SiftFeature::new(a.x, a.y, 1.0, 0.0).unwrap(),
                SiftFeature::new(b.x, b.y, 1.0, 0.0).unwrap(),
            )
        })
        .collect();
    write(dir, &format!("general_{seed}.txt"), &write_match_list(&records(&corrs, None, None), false))
}
