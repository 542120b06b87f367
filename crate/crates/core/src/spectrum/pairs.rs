use serde::{Deserialize, Serialize};

use super::{dot, fix_phase, Spectrum};

pub const DEFAULT_GAP_TOL: f64 = 1e-3;
/// Gaps below this fraction of the matrix norm are not resolvable in double precision.
pub const RESOLUTION: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "+")]
    Symmetric,
    #[serde(rename = "-")]
    Antisymmetric,
}

impl Parity {
    pub fn from_expectation(p: f64) -> Self {
        if p >= 0.0 {
            Parity::Symmetric
        } else {
            Parity::Antisymmetric
        }
    }

    pub fn sign(&self) -> f64 {
        match self {
            Parity::Symmetric => 1.0,
            Parity::Antisymmetric => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub lower: usize,
    pub upper: usize,
    pub gap: f64,
    /// False when the gap is below numerical resolution; the closed-form splitting
    /// should be used instead.
    pub resolved: bool,
}

#[derive(Debug, Clone)]
pub struct PairClassification {
    pub pairs: Vec<StatePair>,
    pub singles: Vec<usize>,
    /// Indices in clusters of three or more near-degenerate states.
    pub ambiguous: Vec<usize>,
    /// `<P>` per state when a well-swap permutation was supplied.
    pub parity: Vec<Option<f64>>,
    /// Input spectrum, with paired eigenvectors rotated into parity eigenstates
    /// when a well-swap permutation was supplied.
    pub spectrum: Spectrum,
}

impl PairClassification {
    pub fn parity_label(&self, k: usize) -> Option<Parity> {
        self.parity
            .get(k)
            .copied()
            .flatten()
            .map(Parity::from_expectation)
    }
}

fn apply_swap(perm: &[usize], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (i, &j) in perm.iter().enumerate() {
        out[j] = v[i];
    }
    out
}

/// Groups adjacent eigenvalues into near-degenerate pairs.
///
/// A pair `(k, k+1)` is formed when its gap is below `gap_tol` times the
/// smaller distance to the neighbouring eigenvalues. With `swap` (the well
/// exchange permutation, meaningful only at zero tilt) each pair is rotated
/// into eigenstates of the exchange operator.
pub fn classify_pairs(spec: &Spectrum, gap_tol: f64, swap: Option<&[usize]>) -> PairClassification {
    let e = &spec.eigenvalues;
    let len = e.len();
    let gap = |i: usize| e[i + 1] - e[i];
    let outer = |lo: usize, hi: usize| {
        let left = if lo > 0 {
            e[lo] - e[lo - 1]
        } else {
            f64::INFINITY
        };
        let right = if hi + 1 < len {
            e[hi + 1] - e[hi]
        } else {
            f64::INFINITY
        };
        let s = left.min(right);
        if s.is_finite() {
            s
        } else {
            spec.scale
        }
    };

    let mut pairs = Vec::new();
    let mut singles = Vec::new();
    let mut ambiguous = Vec::new();
    let mut i = 0;
    while i < len {
        if i + 1 >= len {
            singles.push(i);
            break;
        }
        let mut hi = i + 1;
        while hi + 1 < len
            && gap(hi) < gap_tol * outer(i, hi + 1)
            && gap(i) < gap_tol * outer(i, hi + 1)
        {
            hi += 1;
        }
        if hi > i + 1 {
            ambiguous.extend(i..=hi);
            i = hi + 1;
        } else if gap(i) < gap_tol * outer(i, i + 1) {
            pairs.push(StatePair {
                lower: i,
                upper: i + 1,
                gap: gap(i),
                resolved: gap(i) >= RESOLUTION * spec.scale,
            });
            i += 2;
        } else {
            singles.push(i);
            i += 1;
        }
    }

    let mut out = spec.clone();
    let mut parity = vec![None; len];
    if let Some(perm) = swap {
        for pair in &pairs {
            let (a, b) = (pair.lower, pair.upper);
            let va = &spec.eigenvectors[a];
            let vb = &spec.eigenvectors[b];
            let pva = apply_swap(perm, va);
            let pvb = apply_swap(perm, vb);
            let m = nalgebra::Matrix2::new(
                dot(va, &pva),
                0.5 * (dot(va, &pvb) + dot(vb, &pva)),
                0.5 * (dot(va, &pvb) + dot(vb, &pva)),
                dot(vb, &pvb),
            );
            let eig = nalgebra::SymmetricEigen::new(m);
            let mut rotated: Vec<(f64, f64, Vec<f64>)> = (0..2)
                .map(|c| {
                    let (ca, cb) = (eig.eigenvectors[(0, c)], eig.eigenvectors[(1, c)]);
                    let mut v: Vec<f64> = va.iter().zip(vb).map(|(x, y)| ca * x + cb * y).collect();
                    fix_phase(&mut v);
                    let energy = ca * ca * e[a] + cb * cb * e[b];
                    (energy, eig.eigenvalues[c], v)
                })
                .collect();
            rotated.sort_by(|x, y| x.0.total_cmp(&y.0));
            for (slot, (energy, p, v)) in [a, b].into_iter().zip(rotated) {
                out.eigenvalues[slot] = energy;
                out.eigenvectors[slot] = v;
                parity[slot] = Some(p);
            }
        }
        for k in 0..len {
            if parity[k].is_none() {
                let v = &out.eigenvectors[k];
                parity[k] = Some(dot(v, &apply_swap(perm, v)));
            }
        }
    }

    PairClassification {
        pairs,
        singles,
        ambiguous,
        parity,
        spectrum: out,
    }
}
