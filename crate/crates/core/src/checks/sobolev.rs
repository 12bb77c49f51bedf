use crate::checks::context::try_variation;
use crate::checks::{CheckReport, LabContext};
use crate::error::{Error, Result};
use crate::functions::VariationKind;

/// Scale-invariant Sobolev inequality on balls:
/// `‖f‖_{L^inf(B(x0,R))} <= C (R^{-d_h/p} ‖f‖_{L^p(B)} +
/// R^{(1-1/p)(d_w-d_h)} Var_{B(x0,C2 R),p})`.
pub fn check_sobolev(ctx: &LabContext) -> Result<CheckReport> {
    let p = ctx.config.p;
    if p == 1.0 && !ctx.is_vicsek() {
        return Err(Error::Unsupported(
            "the L1 Sobolev inequality on balls is only established on the Vicsek family".into(),
        ));
    }
    let mut report = CheckReport::new("sobolev-balls", ctx.config.stability_limit);
    let spec = &ctx.spec;
    let mesh = &ctx.mesh;
    let c2 = 1.0 + 2.0 * ctx.big_a();
    let var_exponent = (1.0 - 1.0 / p) * (spec.d_w - spec.d_h);

    for &j in &ctx.config.radius_levels {
        let r = ctx.radius(j);
        for center in ctx.ball_centers() {
            let ids = mesh.ball_query(&center.center, r);
            if ids.is_empty() {
                continue;
            }
            let enlarged = mesh.ball_query(&center.center, c2 * r);
            let floor = j.saturating_sub(1).max(1);
            for (fid, f) in &ctx.suite {
                let lhs = ids
                    .iter()
                    .map(|&id| f.values[id as usize].abs())
                    .fold(0.0_f64, f64::max);
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
                let rhs = r.powf(-spec.d_h / p) * f.lp_norm_on(&ids, p)
                    + r.powf(var_exponent) * est;
                report.push(fid, format!("ball {} j={j}", center.label), r, lhs, rhs);
            }
        }
    }
    report.finalize();
    Ok(report)
}
