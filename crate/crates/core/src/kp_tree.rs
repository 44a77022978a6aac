//! A sparse vector under a global scalar, stored as a binary tree of absolute
//! partial sums.
//!
//! Layer `depth = ceil(log2 d)` holds one leaf per nonzero entry `j`, storing
//! `theta_j / A`, where `A` is the root scalar. Every internal node `(l, k)`
//! stores `|KP(l+1, 2k)| + |KP(l+1, 2k+1)|`, so `KP(0,0) * |A| = ||theta||_1`.
//! Reads walk one root-to-leaf path; updates of the form
//! `theta <- a * theta + b * e_j` rescale `A` and rewrite one path.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::Serialize;

use crate::error::{ensure, Error, Result};

const SCALE_MIN: f64 = 1e-100;
const SCALE_MAX: f64 = 1e100;

/// Node address: `(layer, position)`.
type Key = (u32, usize);

#[derive(Debug)]
pub struct KpTree {
    d: usize,
    depth: u32,
    scale: f64,
    support: usize,
    nodes: HashMap<Key, f64>,
    last_touched: AtomicUsize,
}

impl Clone for KpTree {
    fn clone(&self) -> Self {
        Self {
            d: self.d,
            depth: self.depth,
            scale: self.scale,
            support: self.support,
            nodes: self.nodes.clone(),
            last_touched: AtomicUsize::new(self.last_touched.load(Ordering::Relaxed)),
        }
    }
}

impl PartialEq for KpTree {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.to_dense() == other.to_dense()
    }
}

/// One entry of the l1-proportional amplitude vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Amplitude {
    pub index: usize,
    /// `sqrt(|theta_j| / ||theta||_1)`.
    pub magnitude: f64,
    pub negative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeVector {
    pub entries: Vec<Amplitude>,
}

impl AmplitudeVector {
    pub fn norm_squared(&self) -> f64 {
        self.entries.iter().map(|a| a.magnitude * a.magnitude).sum()
    }
}

fn ceil_log2(d: usize) -> u32 {
    if d <= 1 {
        0
    } else {
        usize::BITS - (d - 1).leading_zeros()
    }
}

impl KpTree {
    /// The all-zero vector in dimension `d`: root only, `A = 1`, `t = 0`.
    pub fn new_zero(d: usize) -> Result<Self> {
        ensure(d >= 1, "d", || "dimension must be at least 1".into())?;
        Ok(Self {
            d,
            depth: ceil_log2(d),
            scale: 1.0,
            support: 0,
            nodes: HashMap::new(),
            last_touched: AtomicUsize::new(0),
        })
    }

    /// Builds a tree for a dense vector by one update per nonzero entry.
    pub fn from_dense(theta: &[f64]) -> Result<Self> {
        let mut tree = Self::new_zero(theta.len())?;
        for (j, &v) in theta.iter().enumerate() {
            if v != 0.0 {
                tree.update(1.0, v, j)?;
            }
        }
        Ok(tree)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Root scalar `A`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Support size `t`.
    pub fn support_len(&self) -> usize {
        self.support
    }

    pub fn is_zero(&self) -> bool {
        self.support == 0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes read or written by the most recent `read_entry` or `update`.
    pub fn last_touched(&self) -> usize {
        self.last_touched.load(Ordering::Relaxed)
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j < self.d {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: j, len: self.d })
        }
    }

    fn get(&self, key: Key) -> f64 {
        self.nodes.get(&key).copied().unwrap_or(0.0)
    }

    /// Stored value at `(layer, k)`, or 0 for absent nodes.
    pub fn node_value(&self, layer: u32, k: usize) -> Result<f64> {
        if layer > self.depth {
            return Err(Error::IndexOutOfRange {
                index: layer as usize,
                len: self.depth as usize + 1,
            });
        }
        let width = 1usize << layer;
        if k >= width {
            return Err(Error::IndexOutOfRange { index: k, len: width });
        }
        Ok(self.get((layer, k)))
    }

    /// `theta_j`, found by walking the path selected by the bits of `j`.
    pub fn read_entry(&self, j: usize) -> Result<f64> {
        self.check_index(j)?;
        // the root scalar
        let mut touched = 1;
        let mut value = 0.0;
        for layer in 0..=self.depth {
            let key = (layer, j >> (self.depth - layer));
            touched += 1;
            match self.nodes.get(&key) {
                Some(&v) if layer == self.depth => value = v * self.scale,
                Some(_) => {}
                None => break,
            }
        }
        self.last_touched.store(touched, Ordering::Relaxed);
        Ok(value)
    }

    /// Replaces `theta` with `a * theta + b * e_j`.
    ///
    /// The root scalar becomes `a * A`; only the leaf `j` and its ancestors are
    /// rewritten. A leaf whose new stored value is exactly zero is removed
    /// together with any ancestors left without children.
    pub fn update(&mut self, a: f64, b: f64, j: usize) -> Result<()> {
        ensure(a != 0.0 && a.is_finite(), "a", || format!("scalar must be finite and nonzero, got {a}"))?;
        ensure(b.is_finite(), "b", || format!("coefficient must be finite, got {b}"))?;
        self.check_index(j)?;

        let new_scale = a * self.scale;
        let leaf = (self.depth, j);
        // root (A, t) and the leaf read
        let mut touched = 2;
        match self.nodes.get(&leaf).copied() {
            None if b == 0.0 => {}
            None => {
                self.nodes.insert(leaf, b / new_scale);
                self.support += 1;
                touched += 1 + self.refresh_path(j);
            }
            Some(v) => {
                let updated = v + b / new_scale;
                if updated == 0.0 {
                    self.nodes.remove(&leaf);
                    self.support -= 1;
                } else {
                    self.nodes.insert(leaf, updated);
                }
                touched += 1 + self.refresh_path(j);
            }
        }
        self.scale = new_scale;
        self.last_touched.store(touched, Ordering::Relaxed);

        if !(SCALE_MIN..=SCALE_MAX).contains(&self.scale.abs()) {
            self.fold_scale();
        }
        Ok(())
    }

    /// Recomputes the ancestors of leaf `j` from their children; returns the
    /// number of nodes touched.
    fn refresh_path(&mut self, j: usize) -> usize {
        let mut touched = 0;
        for layer in (0..self.depth).rev() {
            let k = j >> (self.depth - layer);
            let left = self.nodes.get(&(layer + 1, 2 * k)).copied();
            let right = self.nodes.get(&(layer + 1, 2 * k + 1)).copied();
            touched += 3;
            match (left, right) {
                (None, None) => {
                    self.nodes.remove(&(layer, k));
                }
                _ => {
                    let sum = left.unwrap_or(0.0).abs() + right.unwrap_or(0.0).abs();
                    self.nodes.insert((layer, k), sum);
                }
            }
        }
        touched
    }

    /// Recomputes every internal node from the leaves.
    pub fn rebuild(&mut self) {
        let leaves: Vec<(usize, f64)> = self.leaves().collect();
        self.nodes.retain(|&(layer, _), _| layer == self.depth);
        for layer in (0..self.depth).rev() {
            let shift = self.depth - layer;
            let mut parents: Vec<usize> = leaves.iter().map(|&(j, _)| j >> shift).collect();
            parents.dedup();
            for k in parents {
                let sum = self.get((layer + 1, 2 * k)).abs() + self.get((layer + 1, 2 * k + 1)).abs();
                self.nodes.insert((layer, k), sum);
            }
        }
    }

    /// Multiplies `A` into the leaves and resets it to 1.
    fn fold_scale(&mut self) {
        let scale = self.scale;
        let depth = self.depth;
        self.nodes.retain(|&(layer, _), v| {
            if layer == depth {
                *v *= scale;
                *v != 0.0
            } else {
                true
            }
        });
        self.support = self.nodes.keys().filter(|k| k.0 == depth).count();
        self.scale = 1.0;
        self.rebuild();
    }

    /// `(j, stored leaf value)` in increasing `j`.
    fn leaves(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let mut out: Vec<(usize, f64)> = self
            .nodes
            .iter()
            .filter(|(k, _)| k.0 == self.depth)
            .map(|(k, &v)| (k.1, v))
            .collect();
        out.sort_unstable_by_key(|&(j, _)| j);
        out.into_iter()
    }

    /// `(j, theta_j)` over the support in increasing `j`.
    pub fn support(&self) -> Vec<(usize, f64)> {
        self.leaves().map(|(j, v)| (j, v * self.scale)).collect()
    }

    /// `||theta||_1 = |A| * KP(0,0)`.
    pub fn l1_norm(&self) -> f64 {
        self.scale.abs() * self.get((0, 0)).abs()
    }

    /// The l1-proportional amplitudes, computed the way a state-preparation
    /// circuit would: each leaf's squared magnitude is the product of the
    /// branching ratios `|child| / |parent|` along its path.
    pub fn amplitudes(&self) -> Result<AmplitudeVector> {
        if self.is_zero() {
            return Err(Error::Precondition("the zero vector has no amplitude vector".into()));
        }
        let entries = self
            .leaves()
            .map(|(j, leaf)| {
                let mut prob = 1.0;
                for layer in 1..=self.depth {
                    let child = self.get((layer, j >> (self.depth - layer))).abs();
                    let parent = self.get((layer - 1, j >> (self.depth - layer + 1)));
                    prob *= child / parent;
                }
                Amplitude {
                    index: j,
                    magnitude: prob.sqrt(),
                    negative: leaf * self.scale < 0.0,
                }
            })
            .collect();
        Ok(AmplitudeVector { entries })
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for (j, v) in self.support() {
            out[j] = v;
        }
        out
    }

    /// Line-oriented dump: `A,t,d` followed by `layer,k,value` per node in
    /// `(layer, k)` order.
    pub fn debug_dump(&self) -> String {
        let mut keys: Vec<&Key> = self.nodes.keys().collect();
        keys.sort_unstable();
        let mut out = format!("{},{},{}\n", self.scale, self.support, self.d);
        for key in keys {
            let _ = writeln!(out, "{},{},{}", key.0, key.1, self.nodes[key]);
        }
        out
    }

    /// Checks every structural invariant; returns a description of the first
    /// violation found.
    pub fn audit(&self) -> std::result::Result<(), String> {
        let leaves = self.nodes.keys().filter(|k| k.0 == self.depth).count();
        if leaves != self.support {
            return Err(format!("support {} but {} leaves", self.support, leaves));
        }
        for (&(layer, k), &v) in &self.nodes {
            if layer == self.depth {
                if v == 0.0 || !v.is_finite() {
                    return Err(format!("leaf {k} stores {v}"));
                }
                if k >= self.d {
                    return Err(format!("leaf {k} beyond dimension {}", self.d));
                }
            } else {
                let left = self.nodes.get(&(layer + 1, 2 * k));
                let right = self.nodes.get(&(layer + 1, 2 * k + 1));
                if left.is_none() && right.is_none() {
                    return Err(format!("node ({layer},{k}) has no children"));
                }
                let sum = left.copied().unwrap_or(0.0).abs() + right.copied().unwrap_or(0.0).abs();
                if sum != v {
                    return Err(format!("node ({layer},{k}) stores {v}, children sum to {sum}"));
                }
            }
            if layer > 0 && !self.nodes.contains_key(&(layer - 1, k / 2)) {
                return Err(format!("node ({layer},{k}) has no parent"));
            }
        }
        let bound = self.support * (self.depth as usize + 1) + 1;
        if self.nodes.len() > bound {
            return Err(format!("{} nodes exceeds bound {}", self.nodes.len(), bound));
        }
        Ok(())
    }
}
