use crate::model::Fractal;

/// Lumped masses `M(x) = ∫ ψ_{x,m} dμ = Σ_{w ∋ x} μ_w α_{loc(x,w)}`.
pub fn mass_matrix(fractal: &Fractal, m: usize) -> Vec<f64> {
    let table = fractal.table(m);
    let alpha = fractal.structure().alpha();
    let mu = table.partition().measures();
    let v0 = table.v0size();
    let mut out = vec![0.0; table.vertex_count()];
    for (s, &v) in table.cell_vertices().iter().enumerate() {
        out[v as usize] += mu[s / v0] * alpha[s % v0];
    }
    out
}
