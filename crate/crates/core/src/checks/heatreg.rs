use crate::checks::{CheckReport, LabContext};
use crate::error::Result;
use crate::functions::besov_seminorm;
use crate::geometry::dist;
use crate::spectral::{resolvable_window, semigroup_apply};

/// Heat-semigroup regularity: (a) pointwise smoothing with exponential decay,
/// `|P_t g(x)-P_t g(y)| <= C d^{d_w-d_h} t^{-(1-d_h/d_w)} e^{-(lambda_1/4) t}
/// ‖g‖_inf`; (b) the interpolated Besov-smoothing bound for q in {2,3,4};
/// (c) monotone decay of `‖P_t f - mean f‖_p` along the time grid (asserted).
pub fn check_heat_regularity(ctx: &LabContext) -> Result<CheckReport> {
    let p = ctx.config.p;
    let sd = ctx.spectral()?;
    let spec = &ctx.spec;
    let mesh = &ctx.mesh;
    let mut report = CheckReport::new("heat-regularity", ctx.config.stability_limit);

    let (lo, hi) = resolvable_window(sd);
    let n_t = 4;
    let t_grid: Vec<f64> = (0..n_t)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n_t - 1) as f64))
        .collect();
    let s_grid: Vec<f64> = (0..3)
        .map(|i| lo * (hi / lo).powf(i as f64 / 2.0))
        .collect();
    let lambda = sd.eigenvalues[1] / 4.0;
    let gap = spec.d_w - spec.d_h;
    let nv = mesh.n_vertices();

    for (fid, f) in &ctx.suite {
        let f_sup = f.sup_norm();
        let mut prev = f64::INFINITY;
        for &t in &t_grid {
            let ptf = semigroup_apply(sd, f, t)?;

            // (a) pointwise smoothing ratio.
            if f_sup > 0.0 {
                let mut sup = 0.0_f64;
                for a in 0..nv {
                    let pa = mesh.vertex(a as u32);
                    let va = ptf.values[a];
                    for b in (a + 1)..nv {
                        let d = dist(pa, mesh.vertex(b as u32));
                        if d <= 0.0 {
                            continue;
                        }
                        let r = (va - ptf.values[b]).abs() / d.powf(gap);
                        sup = sup.max(r);
                    }
                }
                let rhs = t.powf(-(1.0 - spec.d_h / spec.d_w)) * (-lambda * t).exp() * f_sup;
                report.push(fid, format!("smoothing t={t:.4e}"), t, sup, rhs);
            }

            // (b) interpolated Besov-smoothing bound.
            for q in [2.0_f64, 3.0, 4.0] {
                let alpha_q = (1.0 - 2.0 / q) * (1.0 - spec.d_h / spec.d_w) + 1.0 / q;
                let lhs = besov_seminorm(&ptf, q, alpha_q, sd, &s_grid)?;
                let rhs = t.powf(-alpha_q) * (-lambda * t).exp() * f.lp_norm(q);
                report.push(fid, format!("besov q={q} t={t:.4e}"), t, lhs, rhs);
            }

            // (c) decay of the deviation from the mean.
            let dev = ptf.map(|v| v - f.mean()).lp_norm(p);
            if dev > prev * (1.0 + 1e-12) + 1e-12 {
                report.hard_failures.push(format!(
                    "{fid}: ‖P_t f - mean‖_p rose from {prev:.6e} to {dev:.6e} at t={t:.4e}"
                ));
            }
            prev = dev;
        }
    }
    report.finalize();
    Ok(report)
}
