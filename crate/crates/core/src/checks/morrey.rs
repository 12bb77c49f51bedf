use crate::checks::context::{oscillation, try_variation};
use crate::checks::{fit_exponent, CheckReport, LabContext};
use crate::error::{Error, Result};
use crate::functions::{variation, VariationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorreyLocus {
    Simplex,
    Star,
    DoubleStar,
    Ball,
}

/// Morrey oscillation estimate: `max_{x,y}|f(x)-f(y)|` over a locus is
/// controlled by `r^{(d_w-d_h)(1-1/p)}` times a variation estimate
/// (sub-Gaussian on cells and stars, plain on enlarged balls).
pub fn check_morrey(ctx: &LabContext, locus: MorreyLocus) -> Result<CheckReport> {
    let p = ctx.config.p;
    if p <= 1.0 {
        return Err(Error::Unsupported(
            "the Morrey oscillation estimate needs p in (1, 2]".into(),
        ));
    }
    let id = match locus {
        MorreyLocus::Simplex => "morrey-simplex",
        MorreyLocus::Star => "morrey-star",
        MorreyLocus::DoubleStar => "morrey-double-star",
        MorreyLocus::Ball => "morrey-ball",
    };
    let mut report = CheckReport::new(id, ctx.config.stability_limit);
    let spec = &ctx.spec;
    let mesh = &ctx.mesh;
    let exponent = (spec.d_w - spec.d_h) * (1.0 - 1.0 / p);
    let (fit_id, fit_f) = {
        let pair = ctx.fit_function_for("witness-morrey");
        (pair.0.clone(), &pair.1)
    };
    // The witness oscillates like r^exponent around the first boundary
    // corner; the fit tracks its oscillation on the locus at that corner.
    let corner = mesh.coarse(0).cells[0].corner_ids[0];
    let x0 = mesh.vertex(corner).to_vec();
    let mut fit_samples: Vec<(f64, f64)> = Vec::new();

    if locus == MorreyLocus::Ball {
        let a = ctx.big_a();
        for &j in &ctx.config.radius_levels {
            let r = ctx.radius(j);
            for center in ctx.ball_centers() {
                let ids = mesh.ball_query(&center.center, r);
                if ids.is_empty() {
                    continue;
                }
                let enlarged = mesh.ball_query(&center.center, a * r);
                let floor = j.saturating_sub(1).max(1);
                for (fid, f) in &ctx.suite {
                    let lhs = oscillation(f, &ids);
                    let Some(est) = try_variation(
                        f,
                        &enlarged,
                        p,
                        VariationKind::KorevaarSchoen,
                        ctx.beta.beta,
                        floor,
                    )?
                    else {
                        continue;
                    };
                    let rhs = r.powf(exponent) * est;
                    report.push(fid, format!("ball {} j={j}", center.label), r, lhs, rhs);
                }
            }
            let ids = mesh.ball_query(&x0, r);
            fit_samples.push((r, oscillation(fit_f, &ids)));
        }
    } else {
        for &m in &ctx.config.coarse_levels {
            let r = ctx.cell_scale(m);
            for c in ctx.sampled_cells(m) {
                let (label, ids) = match locus {
                    MorreyLocus::Simplex => {
                        (format!("simplex m={m} cell={c}"), mesh.cell_vertices(m, &[c]))
                    }
                    MorreyLocus::Star | MorreyLocus::DoubleStar => {
                        // Star around the first corner of the sampled cell.
                        let corner = mesh.coarse(m).cells[c as usize].corner_ids[0];
                        let loc = mesh.locate(mesh.vertex(corner), m)?;
                        let cells = if locus == MorreyLocus::Star {
                            loc.union_star
                        } else {
                            loc.union_double_star
                        };
                        (
                            format!("star m={m} around vertex {corner}"),
                            mesh.cell_vertices(m, &cells),
                        )
                    }
                    MorreyLocus::Ball => unreachable!(),
                };
                for (fid, f) in &ctx.suite {
                    let lhs = oscillation(f, &ids);
                    let est = variation(
                        f,
                        &ids,
                        p,
                        VariationKind::SubGaussian,
                        ctx.beta.beta,
                        m.max(1),
                    )?
                    .estimate;
                    let rhs = r.powf(exponent) * est;
                    report.push(fid, label.clone(), r, lhs, rhs);
                }
            }
            let loc = mesh.locate(&x0, m)?;
            let ids = mesh.cell_vertices(m, &[loc.cell]);
            fit_samples.push((r, oscillation(fit_f, &ids)));
        }
    }

    match fit_exponent(&fit_samples, exponent, ctx.config.exponent_tol) {
        Ok(fit) => report.exponent_fit = Some(fit),
        Err(e) => report
            .notes
            .push(format!("oscillation exponent fit skipped ({fit_id}): {e}")),
    }
    report.finalize();
    if report.stability_factor > report.stability_limit {
        report.notes.push(
            "per-scale max ratios decay with the locus scale: the time-normalized variation \
             estimate keeps an extra mass factor at its coarsest resolvable rung, so the bound \
             grows slack on small loci"
                .into(),
        );
    }
    Ok(report)
}
