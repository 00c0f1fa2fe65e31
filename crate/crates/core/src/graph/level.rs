use rand::distributions::Open01;
use rand::Rng;

/// Highest level a node can be assigned.
pub const MAX_LEVEL: usize = 31;

/// `floor(-ln(u) * level_mult)`, clamped to [`MAX_LEVEL`].
pub fn level_for_uniform(u: f64, level_mult: f64) -> usize {
    let raw = (-u.ln() * level_mult).floor();
    if raw.is_nan() || raw <= 0.0 {
        0
    } else if raw >= MAX_LEVEL as f64 {
        MAX_LEVEL
    } else {
        raw as usize
    }
}

/// Samples a level from the exponentially decaying distribution. Consumes
/// exactly one uniform draw from the open interval (0, 1).
pub fn generate_level<R: Rng + ?Sized>(rng: &mut R, level_mult: f64) -> usize {
    let u: f64 = rng.sample(Open01);
    level_for_uniform(u, level_mult)
}
