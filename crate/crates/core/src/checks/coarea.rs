use crate::checks::context::try_variation;
use crate::checks::{CheckReport, LabContext};
use crate::error::Result;
use crate::functions::{level_sets, variation_raw_sum, VariationKind};

/// Coarea structure of the L1 variation. Part (a) is the exact layer-cake
/// identity at a fixed radius: the windowed double sum of f equals the
/// weighted integral of the double sums of its superlevel indicators, to
/// 1e-10 (asserted). Part (b) measures the constant in the estimate-level
/// inequality between the corresponding variation estimates.
pub fn check_coarea(ctx: &LabContext) -> Result<CheckReport> {
    let mut report = CheckReport::new("coarea", ctx.config.stability_limit);
    report.hard = true;
    let mesh = &ctx.mesh;
    let k = ctx.mesh.level - 2;
    let r = ctx.radius(k);
    let floor = k.max(1);

    let mut loci: Vec<(String, Vec<u32>)> = vec![(
        "whole".to_string(),
        (0..mesh.n_vertices() as u32).collect(),
    )];
    if let Some(&m) = ctx.config.coarse_levels.first() {
        if let Some(&c) = ctx.sampled_cells(m).first() {
            loci.push((
                format!("simplex m={m} cell={c}"),
                mesh.cell_vertices(m, &[c]),
            ));
        }
    }

    for (fid, f) in &ctx.suite {
        let shifted = f.map(|v| v - f.min());
        let family = level_sets(&shifted, None)?;
        for (label, ids) in &loci {
            // (a) exact identity at radius r.
            let total = variation_raw_sum(&shifted, ids, 1.0, r);
            let mut layered = 0.0;
            for (ind, w) in family.indicators.iter().zip(&family.weights) {
                layered += w * variation_raw_sum(ind, ids, 1.0, r);
            }
            report.push(fid, format!("identity {label} r={r:.3e}"), r, layered, total);
            let err = (layered - total).abs();
            if err > 1e-10 * total.max(1.0) {
                report.hard_failures.push(format!(
                    "{fid} on {label}: layer-cake mismatch {err:.3e} (sum {total:.6e})"
                ));
            }

            // (b) measured constant between the variation estimates.
            let Some(den) = try_variation(
                &shifted,
                ids,
                1.0,
                VariationKind::KorevaarSchoen,
                ctx.beta.beta,
                floor,
            )?
            else {
                continue;
            };
            let mut num = 0.0;
            for (ind, w) in family.indicators.iter().zip(&family.weights) {
                let Some(e) = try_variation(
                    ind,
                    ids,
                    1.0,
                    VariationKind::KorevaarSchoen,
                    ctx.beta.beta,
                    floor,
                )?
                else {
                    continue;
                };
                num += w * e;
            }
            report.push(fid, format!("estimate {label}"), 1.0, num, den);
        }
    }
    report.finalize();
    Ok(report)
}
