use crate::error::{Error, Result};
use crate::functions::DiscreteFunction;

/// Dyadic truncations `f_k = min(max(f - 2^k, 0), 2^k)` for every k with a
/// nonempty superlevel set `{f > 2^k}`, down to 64 dyadic levels under the
/// top (lower pieces are below resolution of the sum identity).
pub fn truncations(f: &DiscreteFunction) -> Result<Vec<(i32, DiscreteFunction)>> {
    if f.min() < 0.0 {
        return Err(Error::Domain(
            "truncations need a nonnegative function; shift by the minimum first".into(),
        ));
    }
    let top = f.max();
    if top <= 0.0 {
        return Ok(Vec::new());
    }
    let k_max = top.log2().floor() as i32;
    let k_min = k_max - 64;
    let mut family = Vec::new();
    for k in (k_min..=k_max).rev() {
        let cap = (k as f64).exp2();
        if !f.values.iter().any(|&v| v > cap) {
            continue;
        }
        let fk = f.map(|v| (v - cap).max(0.0).min(cap));
        family.push((k, fk));
    }
    family.reverse();
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{make_test_function, TestFunctionKind};
    use crate::geometry::{build_spec, LevelMesh, MeshBudget};
    use std::sync::Arc;

    fn mesh(name: &str, n: usize) -> Arc<LevelMesh> {
        let spec = Arc::new(build_spec(name).unwrap());
        Arc::new(LevelMesh::build(spec, n, 0, &MeshBudget::default()).unwrap())
    }

    #[test]
    fn constant_three_pieces() {
        let m = mesh("sg", 2);
        let f = DiscreteFunction::constant(m, 3.0);
        let fam = truncations(&f).unwrap();
        let by_k: std::collections::HashMap<i32, f64> = fam
            .iter()
            .map(|(k, fk)| (*k, fk.values[0]))
            .collect();
        assert_eq!(by_k.get(&1), Some(&1.0));
        assert_eq!(by_k.get(&0), Some(&1.0));
        assert_eq!(by_k.get(&-1), Some(&0.5));
        assert!(!by_k.contains_key(&2));
    }

    #[test]
    fn pieces_sum_back() {
        let m = mesh("vicsek", 3);
        let f = make_test_function(
            &m,
            &TestFunctionKind::RandomCellwise { m: 2, seed: 9 },
            None,
        )
        .unwrap();
        let fam = truncations(&f).unwrap();
        let mut sum = vec![0.0; f.values.len()];
        for (_, fk) in &fam {
            for (s, v) in sum.iter_mut().zip(&fk.values) {
                *s += v;
            }
        }
        for (s, v) in sum.iter().zip(&f.values) {
            assert!((s - v).abs() < 1e-12, "sum {s} vs value {v}");
        }
    }

    #[test]
    fn indicator_halves() {
        let m = mesh("vicsek", 3);
        let f = make_test_function(
            &m,
            &TestFunctionKind::Indicator {
                m: 1,
                cells: vec![2],
            },
            None,
        )
        .unwrap();
        let fam = truncations(&f).unwrap();
        assert!(fam.iter().all(|(k, _)| *k <= -1));
        let f_minus_1 = fam.iter().find(|(k, _)| *k == -1).unwrap();
        for (a, b) in f_minus_1.1.values.iter().zip(&f.values) {
            assert!((a - 0.5 * b).abs() < 1e-15);
        }
    }

    #[test]
    fn negative_function_rejected() {
        let m = mesh("sg", 2);
        let f = DiscreteFunction::constant(m, -1.0);
        assert!(truncations(&f).is_err());
    }
}
