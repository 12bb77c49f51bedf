use crate::checks::{CheckReport, LabContext};
use crate::error::Result;
use crate::functions::{truncations, variation_raw_sum};

/// Hard assertion: for a nonnegative f and a fixed radius r, the dyadic
/// truncations `f_k = min((f - 2^k)_+, 2^k)` satisfy
/// `sum_k W_r(f_k) <= 2(p+1) W_r(f) + 1e-10`, where `W_r` is the windowed
/// double sum.
pub fn check_truncation_bound(ctx: &LabContext) -> Result<CheckReport> {
    let p = ctx.config.p;
    let mut report = CheckReport::new("truncation-bound", ctx.config.stability_limit);
    report.hard = true;
    let mesh = &ctx.mesh;
    let all: Vec<u32> = (0..mesh.n_vertices() as u32).collect();
    let k = mesh.level - 2;
    let r = ctx.radius(k);
    let constant = 2.0 * (p + 1.0);

    for (fid, f) in &ctx.suite {
        let shifted = f.map(|v| v - f.min());
        let total = variation_raw_sum(&shifted, &all, p, r);
        let mut sum = 0.0;
        for (_, fk) in truncations(&shifted)? {
            sum += variation_raw_sum(&fk, &all, p, r);
        }
        report.push(fid, format!("r={r:.3e}"), r, sum, constant * total);
        if sum > constant * total + 1e-10 {
            report.hard_failures.push(format!(
                "{fid}: truncation sum {sum:.6e} exceeds {constant} x {total:.6e}"
            ));
        }
    }
    report.finalize();
    Ok(report)
}
