//! Finite outcome spaces, algebras as partitions, and finitely additive measures.
//!
//! An [`Algebra`] on `n` atoms is stored as the map from atom to block. A
//! [`SimpleFunction`] holds one (possibly vector) value per block, so it is
//! measurable by construction, and an [`FAMeasure`] holds one weight per block.
//! Restriction to a coarser algebra is summation over the blocks it merges.

use crate::error::{Error, Result};

/// A partition of the atoms `0..n` into blocks numbered `0..b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Algebra {
    block_of: Vec<usize>,
    blocks: usize,
}

impl Algebra {
    /// Blocks must be numbered contiguously from 0, each used at least once.
    pub fn new(block_of: Vec<usize>) -> Result<Self> {
        if block_of.is_empty() {
            return Err(Error::InvalidPartition("no atoms".into()));
        }
        let blocks = block_of.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; blocks];
        for &b in &block_of {
            seen[b] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("block {missing} is empty")));
        }
        Ok(Self { block_of, blocks })
    }

    /// The one-block algebra.
    pub fn trivial(atoms: usize) -> Self {
        Self {
            block_of: vec![0; atoms.max(1)],
            blocks: 1,
        }
    }

    /// Every atom in its own block.
    pub fn discrete(atoms: usize) -> Self {
        Self {
            block_of: (0..atoms.max(1)).collect(),
            blocks: atoms.max(1),
        }
    }

    pub fn atom_count(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_count(&self) -> usize {
        self.blocks
    }

    pub fn block_of(&self, atom: usize) -> usize {
        self.block_of[atom]
    }

    pub fn block_map(&self) -> &[usize] {
        &self.block_of
    }

    pub fn atoms_in(&self, block: usize) -> Vec<usize> {
        (0..self.block_of.len())
            .filter(|&a| self.block_of[a] == block)
            .collect()
    }

    /// For each block of `self`, the block of `coarser` containing it, if
    /// every block of `self` lies inside a single block of `coarser`.
    pub fn coarsening_map(&self, coarser: &Algebra) -> Option<Vec<usize>> {
        if coarser.atom_count() != self.atom_count() {
            return None;
        }
        let mut map = vec![usize::MAX; self.blocks];
        for (a, &b) in self.block_of.iter().enumerate() {
            let c = coarser.block_of[a];
            if map[b] == usize::MAX {
                map[b] = c;
            } else if map[b] != c {
                return None;
            }
        }
        Some(map)
    }

    /// Whether every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Algebra) -> bool {
        self.coarsening_map(other).is_some()
    }

    /// Blocks of `self` inside block `parent` of a coarser algebra.
    pub fn children_of(&self, coarser: &Algebra, parent: usize) -> Result<Vec<usize>> {
        let map = self.coarsening_map(coarser).ok_or(Error::NotCoarser)?;
        Ok((0..self.blocks).filter(|&b| map[b] == parent).collect())
    }
}

/// An increasing sequence of algebras `A_0 ⊆ A_1 ⊆ … ⊆ A_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    algebras: Vec<Algebra>,
    relaxed: bool,
}

impl Filtration {
    /// Each algebra must refine the one before it.
    pub fn new(algebras: Vec<Algebra>) -> Result<Self> {
        Self::check_atoms(&algebras)?;
        for (j, pair) in algebras.windows(2).enumerate() {
            if !pair[1].refines(&pair[0]) {
                return Err(Error::NotRefining {
                    previous: j,
                    index: j + 1,
                });
            }
        }
        Ok(Self {
            algebras,
            relaxed: false,
        })
    }

    /// Accept algebras that need not increase.
    pub fn new_relaxed(algebras: Vec<Algebra>) -> Result<Self> {
        Self::check_atoms(&algebras)?;
        Ok(Self {
            algebras,
            relaxed: true,
        })
    }

    fn check_atoms(algebras: &[Algebra]) -> Result<()> {
        let first = algebras
            .first()
            .ok_or_else(|| Error::InvalidPartition("empty filtration".into()))?;
        for a in algebras {
            if a.atom_count() != first.atom_count() {
                return Err(Error::DimensionMismatch {
                    expected: first.atom_count(),
                    found: a.atom_count(),
                });
            }
        }
        Ok(())
    }

    /// A tree whose time-0 layer has `roots` nodes and in which node `b` at
    /// time `j` has `children[j][b]` children. Leaves are numbered depth-first
    /// and every node's descendants form a contiguous range of atoms.
    pub fn tree(roots: usize, children: &[Vec<usize>]) -> Result<Self> {
        if roots == 0 {
            return Err(Error::InvalidPartition("tree needs a root".into()));
        }
        // parent[j][c] = parent at time j of node c at time j + 1
        let mut width = roots;
        let mut parents: Vec<Vec<usize>> = Vec::with_capacity(children.len());
        for (j, counts) in children.iter().enumerate() {
            if counts.len() != width {
                return Err(Error::InvalidPartition(format!(
                    "time {j} has {width} nodes but {} child counts",
                    counts.len()
                )));
            }
            let mut parent = Vec::new();
            for (b, &c) in counts.iter().enumerate() {
                if c == 0 {
                    return Err(Error::InvalidPartition(format!("node {b} at time {j} has no children")));
                }
                parent.extend(std::iter::repeat_n(b, c));
            }
            width = parent.len();
            parents.push(parent);
        }
        let atoms = width;
        let mut algebras = vec![Algebra::discrete(atoms)];
        let mut map: Vec<usize> = (0..atoms).collect();
        for parent in parents.iter().rev() {
            map = map.iter().map(|&c| parent[c]).collect();
            algebras.push(Algebra::new(map.clone())?);
        }
        algebras.reverse();
        Self::new(algebras)
    }

    /// Single root with `branching[j]` children per node at time `j`.
    pub fn uniform_tree(branching: &[usize]) -> Result<Self> {
        let mut width = 1;
        let mut children = Vec::with_capacity(branching.len());
        for &k in branching {
            children.push(vec![k; width]);
            width *= k;
        }
        Self::tree(1, &children)
    }

    /// `n` binary steps on `2ⁿ` atoms. The first step is the most significant
    /// bit of the atom index, so the block of atom `a` at time `j` is `a >> (n − j)`.
    pub fn binary(n: usize) -> Self {
        Self::uniform_tree(&vec![2; n]).expect("binary tree is valid")
    }

    pub fn algebras(&self) -> &[Algebra] {
        &self.algebras
    }

    pub fn algebra(&self, j: usize) -> &Algebra {
        &self.algebras[j]
    }

    /// Index of the last algebra.
    pub fn horizon(&self) -> usize {
        self.algebras.len() - 1
    }

    pub fn atom_count(&self) -> usize {
        self.algebras[0].atom_count()
    }

    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }

    /// The sub-filtration at the listed times.
    pub fn select(&self, times: &[usize]) -> Result<Self> {
        if times.iter().any(|&t| t > self.horizon()) {
            return Err(Error::InvalidParameter("time index out of range".into()));
        }
        let algebras = times.iter().map(|&t| self.algebras[t].clone()).collect();
        if self.relaxed {
            Self::new_relaxed(algebras)
        } else {
            Self::new(algebras)
        }
    }

    /// The algebras `A_j, …, A_k`.
    pub fn window(&self, j: usize, k: usize) -> Result<Self> {
        if j > k {
            return Err(Error::InvalidParameter("window start after end".into()));
        }
        self.select(&(j..=k).collect::<Vec<_>>())
    }
}

/// A function constant on the blocks of an algebra, valued in `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleFunction {
    algebra: Algebra,
    dim: usize,
    values: Vec<f64>,
}

impl SimpleFunction {
    /// `values` is block-major: block `b` occupies `values[b*dim..(b+1)*dim]`.
    pub fn new(algebra: Algebra, dim: usize, values: Vec<f64>) -> Result<Self> {
        let expected = algebra.block_count() * dim;
        if dim == 0 || values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(Self { algebra, dim, values })
    }

    pub fn scalar(algebra: Algebra, values: Vec<f64>) -> Result<Self> {
        Self::new(algebra, 1, values)
    }

    pub fn from_blocks(algebra: Algebra, blocks: &[Vec<f64>]) -> Result<Self> {
        let dim = blocks.first().map_or(0, |b| b.len());
        if blocks.iter().any(|b| b.len() != dim) {
            return Err(Error::InvalidParameter("ragged block values".into()));
        }
        Self::new(algebra, dim, blocks.concat())
    }

    pub fn constant(algebra: Algebra, value: &[f64]) -> Self {
        let values = value.repeat(algebra.block_count());
        Self {
            dim: value.len().max(1),
            values: if value.is_empty() {
                vec![0.0; algebra.block_count()]
            } else {
                values
            },
            algebra,
        }
    }

    pub fn zeros(algebra: Algebra, dim: usize) -> Self {
        let values = vec![0.0; algebra.block_count() * dim.max(1)];
        Self {
            algebra,
            dim: dim.max(1),
            values,
        }
    }

    /// Evaluate `f` on the block containing each atom.
    pub fn from_atom_fn<F: FnMut(usize) -> Vec<f64>>(algebra: Algebra, mut f: F) -> Result<Self> {
        let blocks: Vec<Vec<f64>> = (0..algebra.block_count())
            .map(|b| f(algebra.atoms_in(b)[0]))
            .collect();
        Self::from_blocks(algebra, &blocks)
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, block: usize) -> &[f64] {
        &self.values[block * self.dim..(block + 1) * self.dim]
    }

    pub fn value_mut(&mut self, block: usize) -> &mut [f64] {
        &mut self.values[block * self.dim..(block + 1) * self.dim]
    }

    pub fn at_atom(&self, atom: usize) -> &[f64] {
        self.value(self.algebra.block_of(atom))
    }

    /// Scalar value on a block (first component).
    pub fn get(&self, block: usize) -> f64 {
        self.values[block * self.dim]
    }

    /// The same function viewed on a finer algebra.
    pub fn refine_to(&self, finer: &Algebra) -> Result<Self> {
        let map = finer.coarsening_map(&self.algebra).ok_or(Error::NotCoarser)?;
        let mut values = Vec::with_capacity(finer.block_count() * self.dim);
        for &b in &map {
            values.extend_from_slice(self.value(b));
        }
        Ok(Self {
            algebra: finer.clone(),
            dim: self.dim,
            values,
        })
    }

    pub fn component(&self, i: usize) -> Self {
        let values = (0..self.algebra.block_count())
            .map(|b| self.value(b)[i])
            .collect();
        Self {
            algebra: self.algebra.clone(),
            dim: 1,
            values,
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            algebra: self.algebra.clone(),
            dim: self.dim,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|v| v * k)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            algebra: self.algebra.clone(),
            dim: self.dim,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Blockwise inner product of two vector functions.
    pub fn dot(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let values = (0..self.algebra.block_count())
            .map(|b| {
                self.value(b)
                    .iter()
                    .zip(other.value(b))
                    .map(|(x, y)| x * y)
                    .sum()
            })
            .collect();
        Ok(Self {
            algebra: self.algebra.clone(),
            dim: 1,
            values,
        })
    }

    /// Blockwise product of a scalar function with this one.
    pub fn times_scalar(&self, scalar: &Self) -> Result<Self> {
        if self.algebra != scalar.algebra {
            return Err(Error::AlgebraMismatch);
        }
        if scalar.dim != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: scalar.dim,
            });
        }
        let mut out = self.clone();
        for b in 0..self.algebra.block_count() {
            let s = scalar.values[b];
            out.value_mut(b).iter_mut().for_each(|v| *v *= s);
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// A finitely additive (vector) measure given by its weight on each block.
#[derive(Debug, Clone, PartialEq)]
pub struct FAMeasure {
    algebra: Algebra,
    dim: usize,
    weights: Vec<f64>,
}

impl FAMeasure {
    pub fn new(algebra: Algebra, dim: usize, weights: Vec<f64>) -> Result<Self> {
        let expected = algebra.block_count() * dim;
        if dim == 0 || weights.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("non-finite measure weight".into()));
        }
        Ok(Self { algebra, dim, weights })
    }

    pub fn scalar(algebra: Algebra, weights: Vec<f64>) -> Result<Self> {
        Self::new(algebra, 1, weights)
    }

    /// Equal mass on every atom, total 1.
    pub fn uniform(algebra: Algebra) -> Self {
        let n = algebra.atom_count() as f64;
        let weights = (0..algebra.block_count())
            .map(|b| algebra.atoms_in(b).len() as f64 / n)
            .collect();
        Self {
            algebra,
            dim: 1,
            weights,
        }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, block: usize) -> &[f64] {
        &self.weights[block * self.dim..(block + 1) * self.dim]
    }

    /// Scalar weight on a block.
    pub fn get(&self, block: usize) -> f64 {
        self.weights[block * self.dim]
    }

    /// Total mass of each component.
    pub fn total(&self) -> Vec<f64> {
        let mut t = vec![0.0; self.dim];
        for b in 0..self.algebra.block_count() {
            for (acc, w) in t.iter_mut().zip(self.weight(b)) {
                *acc += w;
            }
        }
        t
    }

    /// `⟨f, μ⟩` for a scalar measure and a (vector) simple function on the same algebra.
    pub fn pair(&self, f: &SimpleFunction) -> Result<Vec<f64>> {
        let fm = product(f, self)?;
        Ok(fm.total())
    }

    /// Sum the weights over the blocks of a coarser algebra.
    pub fn restrict(&self, coarser: &Algebra) -> Result<Self> {
        let map = self.algebra.coarsening_map(coarser).ok_or(Error::NotCoarser)?;
        let mut weights = vec![0.0; coarser.block_count() * self.dim];
        for (b, &c) in map.iter().enumerate() {
            for k in 0..self.dim {
                weights[c * self.dim + k] += self.weights[b * self.dim + k];
            }
        }
        Ok(Self {
            algebra: coarser.clone(),
            dim: self.dim,
            weights,
        })
    }

    /// View the weights as a simple function (density with respect to counting blocks).
    pub fn as_function(&self) -> SimpleFunction {
        SimpleFunction {
            algebra: self.algebra.clone(),
            dim: self.dim,
            values: self.weights.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(Self {
            algebra: self.algebra.clone(),
            dim: self.dim,
            weights: self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            algebra: self.algebra.clone(),
            dim: self.dim,
            weights: self.weights.iter().map(|w| w * k).collect(),
        }
    }
}

/// Blockwise product `f·μ`. One of the two must be scalar.
pub fn product(f: &SimpleFunction, mu: &FAMeasure) -> Result<FAMeasure> {
    if f.algebra != mu.algebra {
        return Err(Error::AlgebraMismatch);
    }
    let blocks = f.algebra.block_count();
    let (dim, weights) = match (f.dim, mu.dim) {
        (d, 1) => (
            d,
            (0..blocks)
                .flat_map(|b| f.value(b).iter().map(move |v| v * mu.weights[b]))
                .collect(),
        ),
        (1, d) => (
            d,
            (0..blocks)
                .flat_map(|b| mu.weight(b).iter().map(move |w| w * f.values[b]))
                .collect(),
        ),
        (a, b) if a == b => (a, f.values.iter().zip(&mu.weights).map(|(x, y)| x * y).collect()),
        (a, b) => return Err(Error::DimensionMismatch { expected: a, found: b }),
    };
    Ok(FAMeasure {
        algebra: f.algebra.clone(),
        dim,
        weights,
    })
}

/// Restrict `mu` to `coarser`, then pair.
pub fn restrict(mu: &FAMeasure, coarser: &Algebra) -> Result<FAMeasure> {
    mu.restrict(coarser)
}

/// Largest blockwise gap between `Y·P` and `(X·Q)|_A`, where `A` is the algebra of `Y`.
pub fn conditional_price_gap(
    y: &SimpleFunction,
    p: &FAMeasure,
    x: &SimpleFunction,
    q: &FAMeasure,
) -> Result<f64> {
    let lhs = product(y, p)?;
    let rhs = product(x, q)?.restrict(y.algebra())?;
    if lhs.dim != rhs.dim {
        return Err(Error::DimensionMismatch {
            expected: lhs.dim,
            found: rhs.dim,
        });
    }
    Ok(lhs
        .weights
        .iter()
        .zip(&rhs.weights)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
}

/// Whether `Y·P = (X·Q)|_A` blockwise within `tol`.
pub fn conditional_price_check(
    y: &SimpleFunction,
    p: &FAMeasure,
    x: &SimpleFunction,
    q: &FAMeasure,
    tol: f64,
) -> Result<bool> {
    Ok(conditional_price_gap(y, p, x, q)? <= tol)
}

/// Symmetric random walk on `n` coin flips with the uniform measure.
#[derive(Debug, Clone)]
pub struct RandomWalk {
    pub filtration: Filtration,
    /// `Z_j` on `A_j`, `j = 0..=n`.
    pub positions: Vec<SimpleFunction>,
    /// Uniform probability on the atoms.
    pub probability: FAMeasure,
}

impl RandomWalk {
    pub fn new(n: usize) -> Self {
        let filtration = Filtration::binary(n);
        let positions = (0..=n)
            .map(|j| {
                let alg = filtration.algebra(j).clone();
                let values = (0..alg.block_count())
                    .map(|b| {
                        let ups = (b as u64).count_ones() as f64;
                        2.0 * ups - j as f64
                    })
                    .collect();
                SimpleFunction::scalar(alg, values).expect("shape")
            })
            .collect();
        let probability = FAMeasure::uniform(filtration.algebra(n).clone());
        Self {
            filtration,
            positions,
            probability,
        }
    }

    /// `P` restricted to `A_j`.
    pub fn probability_at(&self, j: usize) -> FAMeasure {
        self.probability
            .restrict(self.filtration.algebra(j))
            .expect("filtration is increasing")
    }
}
