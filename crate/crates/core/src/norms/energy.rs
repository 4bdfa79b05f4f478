use crate::dynamics::RegularizedNonlinearity;
use crate::field::Field;

/// `½∫|∇u|²` from the spectrum.
pub fn kinetic_energy(field: &Field) -> f64 {
    0.5 * field.hdot_norm(1.0).powi(2)
}

/// `½∫|∇u|² + 1/(p+1) ∫|u|^{p+1}`.
pub fn energy(field: &Field, p: f64) -> f64 {
    let cell = field.grid().cell_volume();
    let potential: f64 = field.values().iter().map(|z| z.norm().powf(p + 1.0)).sum::<f64>() * cell;
    kinetic_energy(field) + potential / (p + 1.0)
}

/// `½∫|∇v|² + ½∫φ_n(|v|²)`, with the potential scaled by the nonlinearity's strength.
pub fn energy_n(field: &Field, reg: &RegularizedNonlinearity) -> f64 {
    let cell = field.grid().cell_volume();
    let potential: f64 = field.values().iter().map(|z| reg.phi(z.norm_sqr())).sum::<f64>() * cell;
    kinetic_energy(field) + 0.5 * reg.strength * potential
}
