use crate::checks::context::try_variation;
use crate::checks::{CheckReport, LabContext};
use crate::error::{Error, Result};
use crate::functions::{make_test_function, DiscreteFunction, TestFunctionKind, VariationKind};

const MAX_CHAINS_PER_LEVEL: usize = 4;
const MAX_PAIR_OPS: usize = 4_000_000;

/// L1 inequality over chains of adjacent cells: the full double integral of
/// `|f(x)-f(y)|` over the union of a chain is controlled by `L^{-2 m d_h}`
/// times the variation estimate on the union. Established on the Vicsek
/// family, where cutoff sets along the chain exist.
pub fn check_adjacent_simplices_l1(ctx: &LabContext) -> Result<CheckReport> {
    if !ctx.is_vicsek() {
        return Err(Error::Unsupported(
            "the adjacent-cell L1 inequality is only established on the Vicsek family".into(),
        ));
    }
    let mut report = CheckReport::new("adjacent-simplices-l1", ctx.config.stability_limit);
    let mesh = &ctx.mesh;
    let spec = &ctx.spec;

    for &m in &ctx.config.coarse_levels {
        let chains = enumerate_chains(ctx, m);
        let scale = ctx.cell_scale(m);
        let rhs_factor = scale.powf(2.0 * spec.d_h);
        for chain in chains {
            let ids = mesh.cell_vertices(m, &chain);
            if ids.len() * ids.len() > MAX_PAIR_OPS {
                report.notes.push(format!(
                    "chain {chain:?} at m={m} skipped: {} vertices exceed the pair budget",
                    ids.len()
                ));
                continue;
            }
            let label = format!("m={m} chain={chain:?}");
            let indicator = make_test_function(
                mesh,
                &TestFunctionKind::Indicator {
                    m,
                    cells: vec![chain[0]],
                },
                None,
            )?;
            let mut functions: Vec<(String, &DiscreteFunction)> = ctx
                .suite
                .iter()
                .map(|(id, f)| (id.clone(), f))
                .collect();
            functions.push(("indicator-chain-head".to_string(), &indicator));
            for (fid, f) in functions {
                let lhs = full_double_sum(f, &ids);
                let Some(est) = try_variation(
                    f,
                    &ids,
                    1.0,
                    VariationKind::KorevaarSchoen,
                    ctx.beta.beta,
                    m.max(1),
                )?
                else {
                    continue;
                };
                report.push(&fid, label.clone(), scale, lhs, rhs_factor * est);
            }
        }
    }
    report.finalize();
    Ok(report)
}

/// Simple neighbor paths of 2 and 3 cells, deterministic and capped.
fn enumerate_chains(ctx: &LabContext, m: usize) -> Vec<Vec<u32>> {
    let coarse = ctx.mesh.coarse(m);
    let mut chains = Vec::new();
    'outer: for (a, nbrs) in coarse.neighbors.iter().enumerate() {
        for &b in nbrs {
            if (b as usize) <= a {
                continue;
            }
            if chains.len() < MAX_CHAINS_PER_LEVEL {
                chains.push(vec![a as u32, b]);
            }
            for &c in &coarse.neighbors[b as usize] {
                if c as usize == a || (c as usize) < a {
                    continue;
                }
                chains.push(vec![a as u32, b, c]);
                if chains.len() >= 2 * MAX_CHAINS_PER_LEVEL {
                    break 'outer;
                }
            }
        }
    }
    chains
}

fn full_double_sum(f: &DiscreteFunction, ids: &[u32]) -> f64 {
    let w = &f.mesh.weights;
    let mut total = 0.0;
    for &x in ids {
        let fx = f.values[x as usize];
        let wx = w[x as usize];
        let mut inner = 0.0;
        for &y in ids {
            inner += (fx - f.values[y as usize]).abs() * w[y as usize];
        }
        total += wx * inner;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::CheckConfig;

    #[test]
    fn runs_on_small_vicsek() {
        let mut cfg = CheckConfig::new("vicsek", 3, 1.0);
        cfg.coarse_levels = vec![1, 2];
        let ctx = LabContext::build(cfg).unwrap();
        let rep = check_adjacent_simplices_l1(&ctx).unwrap();
        assert!(rep.hard_failures.is_empty(), "{:?}", rep.hard_failures);
        assert!(rep.max_ratio > 0.0);
    }

    #[test]
    fn indicator_double_sum_identity() {
        // For f = 1_G the double integral over U x U is 2 mu(G) mu(U \ G).
        let cfg = CheckConfig::new("vicsek", 3, 1.0);
        let ctx = LabContext::build(cfg).unwrap();
        let mesh = &ctx.mesh;
        let chain = vec![0u32, 4];
        let ids = mesh.cell_vertices(1, &chain);
        let f = make_test_function(
            mesh,
            &TestFunctionKind::Indicator {
                m: 1,
                cells: vec![0],
            },
            None,
        )
        .unwrap();
        let lhs = full_double_sum(&f, &ids);
        let mass_g: f64 = ids
            .iter()
            .filter(|&&id| f.values[id as usize] == 1.0)
            .map(|&id| mesh.weights[id as usize])
            .sum();
        let mass_rest: f64 = ids
            .iter()
            .filter(|&&id| f.values[id as usize] == 0.0)
            .map(|&id| mesh.weights[id as usize])
            .sum();
        assert!((lhs - 2.0 * mass_g * mass_rest).abs() < 1e-12);
    }

    #[test]
    fn non_vicsek_rejected() {
        let ctx = LabContext::build(CheckConfig::new("sg", 3, 1.0)).unwrap();
        assert!(check_adjacent_simplices_l1(&ctx).is_err());
    }
}
