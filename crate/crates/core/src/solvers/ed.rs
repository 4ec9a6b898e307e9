use super::{CpInstance, InstanceError};

/// One-dimensional instance placing point `i` at `values[i] − min`, so the
/// closest distance is zero exactly when two values coincide.
pub fn ed_to_cp(values: &[i64]) -> Result<CpInstance, InstanceError> {
    let lo = *values.iter().min().ok_or(InstanceError::Empty)?;
    let coords: Vec<Vec<u64>> = values.iter().map(|&v| vec![(v as i128 - lo as i128) as u64]).collect();
    let span = coords.iter().map(|c| c[0]).max().unwrap_or(0);
    let bits = (64 - span.leading_zeros()).max(1);
    if bits > 32 {
        return Err(InstanceError::BadBits(bits));
    }
    CpInstance::from_coords(coords, bits)
}
