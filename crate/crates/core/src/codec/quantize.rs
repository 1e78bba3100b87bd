// SPDX-License-Identifier: Apache-2.0

use super::vocab::COORD_BINS;
use crate::error::{Result, RigError};

/// Bin of a normalized coordinate: `clamp(floor((x + 0.5) · 128), 0, 127)`.
pub fn quantize(x: f64) -> Result<u16> {
    if !x.is_finite() {
        return Err(RigError::NonFinite("coordinate"));
    }
    let bins = COORD_BINS as f64;
    Ok(((x + 0.5) * bins).floor().clamp(0.0, bins - 1.0) as u16)
}

/// Centre of a bin.
pub fn dequantize(bin: u16) -> f64 {
    (bin as f64 + 0.5) / COORD_BINS as f64 - 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn boundaries() {
        assert_eq!(quantize(-0.5).unwrap(), 0);
        assert_eq!(quantize(0.5).unwrap(), 127);
        assert_eq!(quantize(0.0).unwrap(), 64);
        assert_eq!(dequantize(64), 0.00390625);
        assert_eq!(quantize(-3.0).unwrap(), 0);
        assert_eq!(quantize(7.0).unwrap(), 127);
        assert!(quantize(f64::NAN).is_err());
        assert!(quantize(f64::INFINITY).is_err());
    }

    proptest! {
        #[test]
        fn error_within_half_bin(x in -0.5f64..=0.5) {
            let err = (dequantize(quantize(x).unwrap()) - x).abs();
            prop_assert!(err <= 1.0 / 256.0 + 1e-15);
        }

        #[test]
        fn monotone(a in -0.6f64..0.6, b in -0.6f64..0.6) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(quantize(lo).unwrap() <= quantize(hi).unwrap());
        }

        #[test]
        fn idempotent_through_centres(bin in 0u16..128) {
            let c = dequantize(bin);
            prop_assert_eq!(quantize(c).unwrap(), bin);
            prop_assert_eq!(dequantize(quantize(c).unwrap()), c);
        }
    }
}
