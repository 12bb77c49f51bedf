//! CSV rendering of the core artifacts. All floats use 17 significant
//! digits so round-tripping is lossless and output is byte-stable.

use crate::checks::CheckReport;
use crate::functions::{MaximalField, VariationKind, VariationProfile};
use crate::geometry::LevelMesh;
use crate::spectral::{HeatKernelSlice, SpectralData};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `(vertex_id, x…, weight)` rows.
pub fn mesh_vertices_csv(mesh: &LevelMesh) -> String {
    let mut out = String::from("vertex_id");
    for k in 0..mesh.dim {
        out.push_str(&format!(",x{k}"));
    }
    out.push_str(",weight\n");
    for id in 0..mesh.n_vertices() as u32 {
        out.push_str(&id.to_string());
        for c in mesh.vertex(id) {
            out.push(',');
            out.push_str(&fmt_f64(*c));
        }
        out.push(',');
        out.push_str(&fmt_f64(mesh.weights[id as usize]));
        out.push('\n');
    }
    out
}

/// `(u, v, orbit)` rows.
pub fn mesh_edges_csv(mesh: &LevelMesh) -> String {
    let mut out = String::from("u,v,orbit\n");
    for e in &mesh.edges {
        out.push_str(&format!("{},{},{}\n", e.u, e.v, e.orbit));
    }
    out
}

/// `(j, lambda_j)` rows.
pub fn spectrum_csv(sd: &SpectralData) -> String {
    let mut out = String::from("j,lambda\n");
    for (j, lam) in sd.eigenvalues.iter().enumerate() {
        out.push_str(&format!("{j},{}\n", fmt_f64(*lam)));
    }
    out
}

/// `(x_id, y_id, p_t)` rows.
pub fn heat_slice_csv(slice: &HeatKernelSlice) -> String {
    let n = slice.values.nrows();
    let mut out = String::from("x_id,y_id,p_t\n");
    for x in 0..n {
        for y in 0..n {
            out.push_str(&format!("{x},{y},{}\n", fmt_f64(slice.values[[x, y]])));
        }
    }
    out
}

/// `(kind, p, scale, raw, normalized)` rows.
pub fn variation_csv(profile: &VariationProfile) -> String {
    let kind = match profile.kind {
        VariationKind::KorevaarSchoen => "ks",
        VariationKind::SubGaussian => "sub-gaussian",
    };
    let mut out = String::from("kind,p,scale,raw,normalized\n");
    for (scale, raw, normalized) in &profile.entries {
        out.push_str(&format!(
            "{kind},{},{},{},{}\n",
            fmt_f64(profile.p),
            fmt_f64(*scale),
            fmt_f64(*raw),
            fmt_f64(*normalized)
        ));
    }
    out
}

/// `(vertex_id, g)` rows.
pub fn maximal_csv(field: &MaximalField) -> String {
    let mut out = String::from("vertex_id,g\n");
    for (id, g) in field.values.iter().enumerate() {
        out.push_str(&format!("{id},{}\n", fmt_f64(*g)));
    }
    out
}

/// `(function, locus, scale, lhs, rhs, ratio)` rows. Loci may contain
/// commas, so the locus field is double-quoted.
pub fn check_instances_csv(report: &CheckReport) -> String {
    let mut out = String::from("function,locus,scale,lhs,rhs,ratio\n");
    for inst in &report.instances {
        out.push_str(&format!(
            "{},\"{}\",{},{},{},{}\n",
            inst.function,
            inst.locus.replace('"', "\"\""),
            fmt_f64(inst.scale),
            fmt_f64(inst.lhs),
            fmt_f64(inst.rhs),
            fmt_f64(inst.ratio)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 5.0 / 3.0, 1e-300, -2.5e17] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }
}
