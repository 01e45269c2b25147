//! Helpers shared by the integration tests: test images and an explicit
//! enumeration of every path through a pair's tree.
#![allow(dead_code)]

use wmcap::imaging::load_pgm;
use wmcap::schemes::{PairChildren, StreamKind};
use wmcap::{GrayImage, PixelPair, Scheme};

pub const IMAGES: [&str; 3] = ["camera", "astronaut", "brick"];

pub fn image(name: &str) -> GrayImage {
    load_pgm(format!("{}/assets/{name}.pgm", env!("CARGO_MANIFEST_DIR"))).expect("test image")
}

/// One root-to-leaf path: the visited pairs and how many embedding steps
/// took bit 1 and bit 0 along the way.
#[derive(Debug, Clone)]
pub struct Path {
    pub nodes: Vec<PixelPair>,
    pub ones: i32,
    pub zeros: i32,
}

impl Path {
    pub fn weight(&self, p: f64) -> f64 {
        p.powi(self.ones) * (1.0 - p).powi(self.zeros)
    }
}

/// Every path of `depth` nodes starting at `root`, built from the scheme's
/// pair-level transform only.
pub fn paths(scheme: &Scheme, root: PixelPair, depth: usize) -> Vec<Path> {
    let mut out = Vec::new();
    let mut stack = vec![Path {
        nodes: vec![root],
        ones: 0,
        zeros: 0,
    }];
    while let Some(path) = stack.pop() {
        if path.nodes.len() == depth {
            out.push(path);
            continue;
        }
        let last = *path.nodes.last().unwrap();
        match scheme.children(last) {
            PairChildren::Phi(next) => {
                let mut p = path;
                p.nodes.push(next);
                stack.push(p);
            }
            PairChildren::Embed { zero, one } => {
                let mut a = path.clone();
                a.nodes.push(zero);
                a.zeros += 1;
                stack.push(a);
                let mut b = path;
                b.nodes.push(one);
                b.ones += 1;
                stack.push(b);
            }
        }
    }
    out
}

/// Membership of a pair in the stream region of `kind`, from the scheme's
/// classification.
pub fn member(scheme: &Scheme, kind: StreamKind, xi: PixelPair) -> f64 {
    if kind.bit(&scheme.classify(xi)) {
        1.0
    } else {
        0.0
    }
}

/// Deterministic walk of one pair when every embedded bit equals `bit`.
pub fn walk(scheme: &Scheme, root: PixelPair, passes: usize, bit: bool) -> Vec<PixelPair> {
    std::iter::successors(Some(root), |&xi| Some(scheme.children(xi).follow(bit)))
        .take(passes)
        .collect()
}

pub fn rel_err(estimate: f64, truth: f64) -> f64 {
    (estimate - truth) / truth
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
