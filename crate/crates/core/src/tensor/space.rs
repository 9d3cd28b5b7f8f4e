use num_complex::Complex64 as C64;

use super::matrix::{kron, ComplexMatrix};
use crate::error::{Error, Result};

/// How basis indices of a subsystem are printed in exports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelKind {
    /// Photon number `0, 1, 2, ...`
    Oscillator,
    /// `g` / `e`
    Qubit,
    /// Dressed level index, `0, 1, 2, ...`
    Dressed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
    pub kind: LevelKind,
}

impl Subsystem {
    pub fn level_name(&self, index: usize) -> String {
        match self.kind {
            LevelKind::Qubit if self.dim == 2 => ["g", "e"][index].to_string(),
            _ => index.to_string(),
        }
    }
}

/// Ordered tensor-product layout. The first subsystem is the most significant index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceDescriptor {
    subsystems: Vec<Subsystem>,
    total: usize,
}

impl SpaceDescriptor {
    pub fn new(subsystems: Vec<Subsystem>) -> Result<Self> {
        let mut total = 1usize;
        for (i, s) in subsystems.iter().enumerate() {
            if s.dim == 0 {
                return Err(Error::InvalidParameter(format!(
                    "subsystem '{}' has dimension 0",
                    s.label
                )));
            }
            if subsystems[..i].iter().any(|o| o.label == s.label) {
                return Err(Error::DuplicateLabel(s.label.clone()));
            }
            total = total
                .checked_mul(s.dim)
                .ok_or(Error::SizeOverflow { rows: total, cols: s.dim })?;
        }
        Ok(Self { subsystems, total })
    }

    /// Layout from `(label, dim)` pairs, all printed as plain indices.
    pub fn from_dims<S: Into<String>>(parts: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        Self::new(
            parts
                .into_iter()
                .map(|(label, dim)| Subsystem { label: label.into(), dim, kind: LevelKind::Oscillator })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.subsystems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn subsystem(&self, label: &str) -> Result<&Subsystem> {
        Ok(&self.subsystems[self.position(label)?])
    }

    /// Multi-index of a flat basis index.
    pub fn decompose(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.subsystems.len()];
        for (slot, s) in out.iter_mut().zip(&self.subsystems).rev() {
            *slot = index % s.dim;
            index /= s.dim;
        }
        out
    }

    pub fn compose(&self, levels: &[usize]) -> usize {
        debug_assert_eq!(levels.len(), self.subsystems.len());
        levels
            .iter()
            .zip(&self.subsystems)
            .fold(0, |acc, (&l, s)| acc * s.dim + l)
    }

    /// Occupation string for a basis index, e.g. `ge` or `0,1,10`.
    pub fn basis_label(&self, index: usize) -> String {
        let parts: Vec<String> = self
            .decompose(index)
            .iter()
            .zip(&self.subsystems)
            .map(|(&l, s)| s.level_name(l))
            .collect();
        if parts.iter().all(|p| p.len() == 1) {
            parts.concat()
        } else {
            parts.join(",")
        }
    }

    /// Sub-layout made of the listed labels, in this space's order.
    pub fn restrict(&self, keep: &[&str]) -> Result<Self> {
        for k in keep {
            self.position(k)?;
        }
        Self::new(
            self.subsystems
                .iter()
                .filter(|s| keep.contains(&s.label.as_str()))
                .cloned()
                .collect(),
        )
    }
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` at the labeled slot.
pub fn embed(op: &ComplexMatrix, space: &SpaceDescriptor, label: &str) -> Result<ComplexMatrix> {
    embed_product(space, &[(label, op)])
}

/// Tensor product placing each operator at its labeled slot and identities elsewhere.
pub fn embed_product(space: &SpaceDescriptor, ops: &[(&str, &ComplexMatrix)]) -> Result<ComplexMatrix> {
    let mut slots: Vec<Option<&ComplexMatrix>> = vec![None; space.len()];
    for &(label, op) in ops {
        let pos = space.position(label)?;
        let dim = space.subsystems[pos].dim;
        if !op.is_square() || op.rows() != dim {
            return Err(Error::DimensionMismatch {
                context: format!("operator for '{label}'"),
                expected: dim,
                found: op.rows(),
            });
        }
        if slots[pos].is_some() {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
        slots[pos] = Some(op);
    }
    let mut out = ComplexMatrix::identity(1);
    let mut pending_identity = 1usize;
    for (slot, s) in slots.iter().zip(&space.subsystems) {
        match slot {
            None => pending_identity *= s.dim,
            Some(op) => {
                if pending_identity > 1 {
                    out = kron(&out, &ComplexMatrix::identity(pending_identity))?;
                    pending_identity = 1;
                }
                out = kron(&out, op)?;
            }
        }
    }
    if pending_identity > 1 {
        out = kron(&out, &ComplexMatrix::identity(pending_identity))?;
    }
    Ok(out)
}

/// Set of basis states of a [`SpaceDescriptor`] kept by a truncation rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    space: SpaceDescriptor,
    indices: Vec<usize>,
}

impl Subspace {
    pub fn full(space: SpaceDescriptor) -> Self {
        let indices = (0..space.dim()).collect();
        Self { space, indices }
    }

    /// Keeps the basis states whose multi-index satisfies `keep`.
    pub fn filtered(space: SpaceDescriptor, keep: impl Fn(&[usize]) -> bool) -> Self {
        let indices = (0..space.dim()).filter(|&i| keep(&space.decompose(i))).collect();
        Self { space, indices }
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn is_full(&self) -> bool {
        self.indices.len() == self.space.dim()
    }

    /// Position of a full-space basis index inside the subspace.
    pub fn locate(&self, full_index: usize) -> Option<usize> {
        self.indices.binary_search(&full_index).ok()
    }

    pub fn locate_levels(&self, levels: &[usize]) -> Option<usize> {
        self.locate(self.space.compose(levels))
    }

    pub fn levels(&self, sub_index: usize) -> Vec<usize> {
        self.space.decompose(self.indices[sub_index])
    }

    pub fn project_operator(&self, op: &ComplexMatrix) -> ComplexMatrix {
        if self.is_full() {
            op.clone()
        } else {
            op.select(&self.indices)
        }
    }

    pub fn project_vector(&self, v: &[C64]) -> Vec<C64> {
        self.indices.iter().map(|&i| v[i]).collect()
    }

    pub fn lift_vector(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.space.dim()];
        for (&i, &x) in self.indices.iter().zip(v) {
            out[i] = x;
        }
        out
    }

    pub fn lift_operator(&self, op: &ComplexMatrix) -> ComplexMatrix {
        let n = self.space.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (a, &i) in self.indices.iter().enumerate() {
            for (b, &j) in self.indices.iter().enumerate() {
                out[(i, j)] = op[(a, b)];
            }
        }
        out
    }

    pub fn basis_label(&self, sub_index: usize) -> String {
        self.space.basis_label(self.indices[sub_index])
    }

    /// Matrix of a product of local operators restricted to this subspace,
    /// built entry by entry without forming the full-space matrix.
    pub fn operator(&self, ops: &[(&str, &ComplexMatrix)]) -> Result<ComplexMatrix> {
        let mut slots: Vec<(usize, &ComplexMatrix)> = Vec::with_capacity(ops.len());
        for &(label, op) in ops {
            let pos = self.space.position(label)?;
            let dim = self.space.subsystems[pos].dim;
            if !op.is_square() || op.rows() != dim {
                return Err(Error::DimensionMismatch {
                    context: format!("operator for '{label}'"),
                    expected: dim,
                    found: op.rows(),
                });
            }
            if slots.iter().any(|&(p, _)| p == pos) {
                return Err(Error::DuplicateLabel(label.to_string()));
            }
            slots.push((pos, op));
        }
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        let mut target = Vec::new();
        for col in 0..n {
            let levels = self.levels(col);
            target.clone_from(&levels);
            self.scatter(&slots, 0, &mut target, C64::new(1.0, 0.0), &levels, col, &mut out);
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn scatter(
        &self,
        slots: &[(usize, &ComplexMatrix)],
        depth: usize,
        target: &mut Vec<usize>,
        amp: C64,
        source: &[usize],
        col: usize,
        out: &mut ComplexMatrix,
    ) {
        if depth == slots.len() {
            if let Some(row) = self.locate_levels(target) {
                out[(row, col)] += amp;
            }
            return;
        }
        let (pos, op) = slots[depth];
        let j = source[pos];
        for i in 0..op.rows() {
            let z = op[(i, j)];
            if z == C64::new(0.0, 0.0) {
                continue;
            }
            target[pos] = i;
            self.scatter(slots, depth + 1, target, amp * z, source, col, out);
        }
        target[pos] = source[pos];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::matrix::{basis_vector, destroy, sigma_x};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn single_subsystem_embed_is_identity_map() {
        let s = SpaceDescriptor::from_dims([("q", 2)]).unwrap();
        assert_eq!(embed(&sigma_x(), &s, "q").unwrap(), sigma_x());
    }

    #[test]
    fn embedded_lowering_acts_on_its_slot() {
        let s = SpaceDescriptor::from_dims([("qrs", 2), ("m", 3)]).unwrap();
        let a = embed(&destroy(3).unwrap(), &s, "m").unwrap();
        for q in 0..2 {
            let v = basis_vector(6, s.compose(&[q, 1]));
            let out = a.apply(&v);
            let expected = basis_vector(6, s.compose(&[q, 0]));
            for (o, e) in out.iter().zip(&expected) {
                assert!((o - e).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn operators_on_different_slots_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = SpaceDescriptor::from_dims([("x", 2), ("y", 3), ("z", 2)]).unwrap();
        let a = embed(&random(&mut rng, 2), &s, "x").unwrap();
        let b = embed(&random(&mut rng, 2), &s, "z").unwrap();
        assert!(a.commutator(&b).max_abs() < 1e-13);
    }

    #[test]
    fn embed_errors() {
        let s = SpaceDescriptor::from_dims([("x", 2), ("y", 3)]).unwrap();
        assert!(matches!(embed(&sigma_x(), &s, "w"), Err(Error::UnknownLabel(_))));
        assert!(matches!(embed(&sigma_x(), &s, "y"), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            SpaceDescriptor::from_dims([("x", 2), ("x", 3)]),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn compose_decompose_roundtrip() {
        let s = SpaceDescriptor::from_dims([("a", 3), ("b", 2), ("c", 4)]).unwrap();
        for i in 0..s.dim() {
            assert_eq!(s.compose(&s.decompose(i)), i);
        }
        assert_eq!(s.decompose(s.dim() - 1), vec![2, 1, 3]);
    }

    #[test]
    fn labels_follow_kind() {
        let s = SpaceDescriptor::new(vec![
            Subsystem { label: "q1".into(), dim: 2, kind: LevelKind::Qubit },
            Subsystem { label: "q2".into(), dim: 2, kind: LevelKind::Qubit },
        ])
        .unwrap();
        assert_eq!(s.basis_label(1), "ge");
        assert_eq!(s.basis_label(2), "eg");
    }

    #[test]
    fn subspace_projection_roundtrip() {
        let s = SpaceDescriptor::from_dims([("a", 3), ("b", 3)]).unwrap();
        let sub = Subspace::filtered(s, |l| l.iter().sum::<usize>() <= 2);
        assert_eq!(sub.dim(), 6);
        let v: Vec<C64> = (0..6).map(|i| C64::new(i as f64, 1.0)).collect();
        assert_eq!(sub.project_vector(&sub.lift_vector(&v)), v);
        let m = ComplexMatrix::from_fn(6, 6, |i, j| C64::new(i as f64, j as f64));
        assert_eq!(sub.project_operator(&sub.lift_operator(&m)), m);
    }

    #[test]
    fn subspace_operator_matches_projected_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = SpaceDescriptor::from_dims([("a", 3), ("b", 2), ("c", 3)]).unwrap();
        let x = random(&mut rng, 3);
        let y = random(&mut rng, 3);
        let dense = embed_product(&s, &[("a", &x), ("c", &y)]).unwrap();
        let full = Subspace::full(s.clone());
        assert!(full.operator(&[("a", &x), ("c", &y)]).unwrap().max_abs_diff(&dense) < 1e-14);
        let cut = Subspace::filtered(s, |l| l[1] + l[2] <= 2);
        let direct = cut.operator(&[("c", &y), ("a", &x)]).unwrap();
        assert!(direct.max_abs_diff(&cut.project_operator(&dense)) < 1e-14);
    }
}
