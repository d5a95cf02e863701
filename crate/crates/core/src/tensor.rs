//! Dense tensors over an `n`-dimensional fiber.
//!
//! Every tensor here has all of its `n^order` entries stored in row-major
//! order. With `n <= 4` and `order <= 4` that is at most 256 scalars, so
//! symmetric tensors are stored in full and their symmetry is checked rather
//! than exploited.

use std::ops::{Index, IndexMut};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};

/// Row-major dense tensor with every slot ranging over `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    n: usize,
    order: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(n: usize, order: usize) -> Self {
        Self {
            n,
            order,
            data: vec![0.0; n.pow(order as u32)],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            n: 0,
            order: 0,
            data: vec![value],
        }
    }

    pub fn from_vec(n: usize, order: usize, data: Vec<f64>) -> Result<Self> {
        let expected = n.pow(order as u32);
        if data.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "expected {expected} entries for n={n}, order={order}, got {}",
                data.len()
            )));
        }
        Ok(Self { n, order, data })
    }

    /// Builds a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(n: usize, order: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(n, order);
        let mut idx = vec![0usize; order];
        for flat in 0..t.data.len() {
            t.unflatten_into(flat, &mut idx);
            t.data[flat] = f(&idx);
        }
        t
    }

    /// Builds a fully symmetric tensor, evaluating `f` only on sorted
    /// multi-indices and copying the value to every permutation.
    pub fn symmetric_from_fn(n: usize, order: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(n, order);
        let mut idx = vec![0usize; order];
        let mut sorted = vec![0usize; order];
        let mut cache = std::collections::HashMap::new();
        for flat in 0..t.data.len() {
            t.unflatten_into(flat, &mut idx);
            sorted.copy_from_slice(&idx);
            sorted.sort_unstable();
            let v = *cache
                .entry(sorted.clone())
                .or_insert_with(|| f(&sorted));
            t.data[flat] = v;
        }
        t
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, 2, |ix| if ix[0] == ix[1] { 1.0 } else { 0.0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn same_shape(&self, other: &Tensor) -> bool {
        self.order == other.order && (self.order == 0 || self.n == other.n)
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order);
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.n);
            acc * self.n + i
        })
    }

    pub fn unflatten_into(&self, mut flat: usize, idx: &mut [usize]) {
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.n;
            flat /= self.n;
        }
    }

    pub fn unflatten(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.order];
        self.unflatten_into(flat, &mut idx);
        idx
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.flatten(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let flat = self.flatten(idx);
        self.data[flat] = value;
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, factor: f64) -> Tensor {
        self.map(|v| v * factor)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            n: self.n,
            order: self.order,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        assert!(self.same_shape(other), "tensor shape mismatch");
        Tensor {
            n: self.n,
            order: self.order,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        assert!(self.same_shape(other), "tensor shape mismatch");
        Tensor {
            n: self.n,
            order: self.order,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// Contracts the given slot with a vector, lowering the order by one.
    pub fn contract_vector(&self, slot: usize, v: &[f64]) -> Tensor {
        assert!(slot < self.order && v.len() == self.n);
        let mut out = Tensor::zeros(self.n, self.order - 1);
        let mut idx = vec![0usize; self.order];
        for flat in 0..self.data.len() {
            self.unflatten_into(flat, &mut idx);
            let w = v[idx[slot]];
            let mut rest = idx.clone();
            rest.remove(slot);
            let target = out.flatten(&rest);
            out.data[target] += self.data[flat] * w;
        }
        out
    }

    /// Largest deviation between this tensor and the copy with slots
    /// permuted by `perm` (`out[i] = self[idx[perm[..]]]`).
    pub fn permutation_defect(&self, perm: &[usize]) -> f64 {
        let mut idx = vec![0usize; self.order];
        let mut permuted = vec![0usize; self.order];
        let mut worst = 0.0_f64;
        for flat in 0..self.data.len() {
            self.unflatten_into(flat, &mut idx);
            for (k, &p) in perm.iter().enumerate() {
                permuted[k] = idx[p];
            }
            worst = worst.max((self.data[flat] - self.get(&permuted)).abs());
        }
        worst
    }

    /// Largest `|T[idx] + T[perm(idx)]|`, zero for a tensor antisymmetric
    /// under `perm`.
    pub fn antisymmetry_defect(&self, perm: &[usize]) -> f64 {
        let mut idx = vec![0usize; self.order];
        let mut permuted = vec![0usize; self.order];
        let mut worst = 0.0_f64;
        for flat in 0..self.data.len() {
            self.unflatten_into(flat, &mut idx);
            for (k, &p) in perm.iter().enumerate() {
                permuted[k] = idx[p];
            }
            worst = worst.max((self.data[flat] + self.get(&permuted)).abs());
        }
        worst
    }

    /// Largest deviation from full symmetry over all slot permutations.
    pub fn symmetry_defect(&self) -> f64 {
        permutations(self.order)
            .iter()
            .map(|p| self.permutation_defect(p))
            .fold(0.0, f64::max)
    }

    pub fn as_rows(&self) -> Vec<Vec<f64>> {
        assert_eq!(self.order, 2);
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn to_nested(&self) -> Value {
        fn build(data: &[f64], n: usize, depth: usize) -> Value {
            if depth == 0 {
                return number(data[0]);
            }
            let stride = data.len() / n;
            Value::Array(
                data.chunks(stride)
                    .map(|chunk| build(chunk, n, depth - 1))
                    .collect(),
            )
        }
        if self.order == 0 {
            return number(self.data[0]);
        }
        build(&self.data, self.n, self.order)
    }

    pub fn from_nested(n: usize, order: usize, value: &Value) -> Result<Tensor> {
        fn walk(v: &Value, n: usize, depth: usize, out: &mut Vec<f64>) -> Result<()> {
            if depth == 0 {
                let x = v
                    .as_f64()
                    .ok_or_else(|| Error::ShapeMismatch(format!("expected number, got {v}")))?;
                out.push(x);
                return Ok(());
            }
            let arr = v
                .as_array()
                .filter(|a| a.len() == n)
                .ok_or_else(|| Error::ShapeMismatch(format!("expected array of length {n}")))?;
            arr.iter().try_for_each(|x| walk(x, n, depth - 1, out))
        }
        let mut data = Vec::with_capacity(n.pow(order as u32));
        walk(value, n, order, &mut data)?;
        if order == 0 {
            return Ok(Tensor::scalar(data[0]));
        }
        Tensor::from_vec(n, order, data)
    }
}

fn number(v: f64) -> Value {
    // `+ 0.0` turns -0.0 into 0.0
    serde_json::Number::from_f64(v + 0.0)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

impl Index<&[usize]> for Tensor {
    type Output = f64;
    fn index(&self, idx: &[usize]) -> &f64 {
        &self.data[self.flatten(idx)]
    }
}

impl IndexMut<&[usize]> for Tensor {
    fn index_mut(&mut self, idx: &[usize]) -> &mut f64 {
        let flat = self.flatten(idx);
        &mut self.data[flat]
    }
}

/// `{"n": .., "order": .., "data": nested row-major arrays}`
impl Serialize for Tensor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Tensor", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("data", &self.to_nested())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Tensor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            order: usize,
            data: Value,
        }
        let raw = Raw::deserialize(d)?;
        Tensor::from_nested(raw.n, raw.order, &raw.data).map_err(D::Error::custom)
    }
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

/// Converts an order-2 tensor to an nalgebra matrix.
pub(crate) fn to_matrix(t: &Tensor) -> nalgebra::DMatrix<f64> {
    assert_eq!(t.order(), 2);
    nalgebra::DMatrix::from_row_slice(t.n(), t.n(), t.data())
}

pub(crate) fn from_matrix(m: &nalgebra::DMatrix<f64>) -> Tensor {
    let n = m.nrows();
    Tensor::from_fn(n, 2, |ix| m[(ix[0], ix[1])])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_roundtrip() {
        let t = Tensor::zeros(3, 3);
        for flat in 0..t.len() {
            assert_eq!(t.flatten(&t.unflatten(flat)), flat);
        }
    }

    #[test]
    fn symmetric_builder_is_symmetric() {
        let t = Tensor::symmetric_from_fn(4, 3, |ix| (ix[0] + 10 * ix[1] + 100 * ix[2]) as f64);
        assert_eq!(t.symmetry_defect(), 0.0);
        assert_eq!(t.get(&[2, 0, 1]), 210.0);
    }

    #[test]
    fn contraction_matches_loop() {
        let t = Tensor::from_fn(3, 2, |ix| (ix[0] * 3 + ix[1]) as f64);
        let c = t.contract_vector(1, &[1.0, 2.0, 3.0]);
        assert_eq!(c.data(), &[8.0, 26.0, 44.0]);
        let r = t.contract_vector(0, &[1.0, 0.0, 0.0]);
        assert_eq!(r.data(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn json_nested_shape() {
        let t = Tensor::from_fn(2, 2, |ix| (ix[0] * 2 + ix[1]) as f64);
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["data"], serde_json::json!([[0.0, 1.0], [2.0, 3.0]]));
        let back: Tensor = serde_json::from_value(v).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn from_nested_rejects_ragged() {
        let v = serde_json::json!([[1.0, 2.0], [3.0]]);
        assert!(Tensor::from_nested(2, 2, &v).is_err());
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
    }
}
