use crate::checks::context::try_variation;
use crate::checks::{CheckReport, LabContext};
use crate::error::Result;
use crate::functions::{variation, VariationKind};

/// Comparison of the two variation functionals: the sub-Gaussian estimate is
/// controlled by the plain Korevaar-Schoen estimate on the whole set and on
/// simplices. The reverse quotient is recorded in the notes.
pub fn check_variation_comparison(ctx: &LabContext) -> Result<CheckReport> {
    let p = ctx.config.p;
    let mut report = CheckReport::new("variation-comparison", ctx.config.stability_limit);
    let mesh = &ctx.mesh;

    let mut loci: Vec<(String, f64, usize, Vec<u32>)> = vec![(
        "whole".to_string(),
        1.0,
        1,
        (0..mesh.n_vertices() as u32).collect(),
    )];
    for &m in &ctx.config.coarse_levels {
        if let Some(&c) = ctx.sampled_cells(m).first() {
            loci.push((
                format!("simplex m={m} cell={c}"),
                ctx.cell_scale(m),
                m.max(1),
                mesh.cell_vertices(m, &[c]),
            ));
        }
    }

    let mut reverse_max = 0.0_f64;
    for (fid, f) in &ctx.suite {
        for (label, scale, floor, ids) in &loci {
            let sub = variation(f, ids, p, VariationKind::SubGaussian, ctx.beta.beta, *floor)?
                .estimate;
            let Some(ks) =
                try_variation(f, ids, p, VariationKind::KorevaarSchoen, ctx.beta.beta, *floor)?
            else {
                continue;
            };
            report.push(fid, label.clone(), *scale, sub, ks);
            if sub > 1e-12 {
                reverse_max = reverse_max.max(ks / sub);
            }
        }
    }
    report
        .notes
        .push(format!("reverse comparison constant: {reverse_max:.6e}"));
    report.finalize();
    Ok(report)
}
