use crate::checks::context::try_variation;
use crate::checks::{CheckReport, LabContext};
use crate::error::{Error, Result};
use crate::functions::{moving_average, variation, VariationKind};
use crate::spectral::{resolvable_window, semigroup_apply};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PseudoMechanism {
    Heat,
    Average,
}

/// Pseudo-Poincaré inequality. Heat mechanism: `‖f - P_t f‖_p` against the
/// sub-Gaussian variation seminorm (times `t^{d_h/d_w}` when p = 1).
/// Average mechanism: `‖f - f_s‖_{L^p(B(x0,R))}` against
/// `s^{alpha_p d_w}` times the variation on the enlarged ball `B(x0,C2 R)`.
pub fn check_pseudo_poincare(ctx: &LabContext, mechanism: PseudoMechanism) -> Result<CheckReport> {
    match mechanism {
        PseudoMechanism::Heat => heat_mechanism(ctx),
        PseudoMechanism::Average => average_mechanism(ctx),
    }
}

fn heat_mechanism(ctx: &LabContext) -> Result<CheckReport> {
    let p = ctx.config.p;
    let sd = ctx.spectral()?;
    let spec = &ctx.spec;
    let mut report = CheckReport::new("pseudo-poincare-heat", ctx.config.stability_limit);

    let (lo, hi) = resolvable_window(sd);
    let t_grid: Vec<f64> = (1..ctx.mesh.level)
        .map(|k| ctx.radius(k).powf(spec.d_w))
        .filter(|&t| t >= lo && t <= hi && t <= 1.0)
        .collect();
    if t_grid.is_empty() {
        return Err(Error::Resolution(format!(
            "no dyadic time inside the resolvable window [{lo:.3e}, {hi:.3e}]"
        )));
    }
    let all: Vec<u32> = (0..ctx.mesh.n_vertices() as u32).collect();
    for (fid, f) in &ctx.suite {
        let est = variation(f, &all, p, VariationKind::SubGaussian, ctx.beta.beta, 1)?.estimate;
        for &t in &t_grid {
            let ptf = semigroup_apply(sd, f, t)?;
            let lhs = f.zip(&ptf, |a, b| a - b)?.lp_norm(p);
            let rhs = if p == 1.0 {
                t.powf(spec.d_h / spec.d_w) * est
            } else {
                est
            };
            report.push(fid, format!("t={t:.6e}"), t, lhs, rhs);
        }
    }
    report.finalize();
    Ok(report)
}

fn average_mechanism(ctx: &LabContext) -> Result<CheckReport> {
    let p = ctx.config.p;
    if p == 1.0 && !ctx.is_vicsek() {
        return Err(Error::Unsupported(
            "the L1 moving-average pseudo-Poincaré inequality is only established on the \
             Vicsek family"
                .into(),
        ));
    }
    let spec = &ctx.spec;
    let mut report = CheckReport::new("pseudo-poincare-average", ctx.config.stability_limit);
    let c2 = 1.0 + 2.0 * ctx.big_a();
    let exponent = spec.alpha(p) * spec.d_w;
    let centers = ctx.ball_centers();
    let mesh = &ctx.mesh;

    for (fid, f) in &ctx.suite {
        for &j in &ctx.config.radius_levels {
            let r = ctx.radius(j);
            // Variation on the enlarged ball, shared by every s < R.
            let mut vars = Vec::new();
            for center in &centers {
                let enlarged = mesh.ball_query(&center.center, c2 * r);
                let floor = j.saturating_sub(1).max(1);
                let est = try_variation(
                    f,
                    &enlarged,
                    p,
                    VariationKind::KorevaarSchoen,
                    ctx.beta.beta,
                    floor,
                )?;
                vars.push(est);
            }
            for s_level in (j + 1)..(j + 3).min(mesh.level) {
                let s = ctx.radius(s_level);
                let fs = moving_average(f, s)?;
                let diff = f.zip(&fs, |a, b| a - b)?;
                for (center, var) in centers.iter().zip(&vars) {
                    let Some(est) = *var else { continue };
                    let ids = mesh.ball_query(&center.center, r);
                    if ids.is_empty() {
                        continue;
                    }
                    let lhs = diff.lp_norm_on(&ids, p);
                    let rhs = s.powf(exponent) * est;
                    report.push(
                        fid,
                        format!("ball {} R=L^-{j} s=L^-{s_level}", center.label),
                        s,
                        lhs,
                        rhs,
                    );
                }
            }
        }
    }
    report.finalize();
    Ok(report)
}
