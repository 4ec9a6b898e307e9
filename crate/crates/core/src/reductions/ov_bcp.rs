use num_rational::Ratio;

use crate::solvers::{BcpInstance, OvInstance};

/// Five-bit encoding of one coordinate on the A side.
pub fn gadget_a(bit: u8) -> [u64; 5] {
    if bit == 0 {
        [1, 1, 0, 0, 0]
    } else {
        [0, 0, 1, 1, 0]
    }
}

/// Five-bit encoding of one coordinate on the B side.
pub fn gadget_b(bit: u8) -> [u64; 5] {
    if bit == 0 {
        [1, 0, 1, 0, 0]
    } else {
        [0, 1, 0, 0, 1]
    }
}

/// Hamming embedding in `{0,1}^{5d}`: each coordinate contributes 2 to the
/// cross distance when the product is 0 and 4 when it is 1, so an orthogonal
/// pair exists iff the minimum cross distance is `2d`.
pub fn ov_to_bcp(inst: &OvInstance) -> BcpInstance {
    let enc = |v: &[u8], g: fn(u8) -> [u64; 5]| v.iter().flat_map(|&x| g(x)).collect::<Vec<u64>>();
    let a = inst.a().iter().map(|v| enc(v, gadget_a)).collect();
    let b = inst.b().iter().map(|v| enc(v, gadget_b)).collect();
    BcpInstance::from_coords(a, b, 1, Ratio::from_integer(0)).expect("gadget output is a valid instance")
}
