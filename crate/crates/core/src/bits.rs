//! Two-state bit vectors up to 64 bits wide.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Widest vector the simulator handles.
pub const MAX_WIDTH: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("width {0} outside 1..=64")]
    BadWidth(u32),
    #[error("value {value:#x} does not fit in {width} bits")]
    Overflow { value: u64, width: u32 },
    #[error("invalid binary string {0:?}")]
    BadDigits(String),
}

/// A fixed-width unsigned value. The textual form is MSB first, exactly
/// `width` characters of `0`/`1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVector {
    width: u32,
    value: u64,
}

/// Mask with the low `width` bits set.
#[inline]
pub fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl BitVector {
    pub fn new(width: u32, value: u64) -> Result<Self, BitsError> {
        if width == 0 || width > MAX_WIDTH {
            return Err(BitsError::BadWidth(width));
        }
        if value & !mask(width) != 0 {
            return Err(BitsError::Overflow { value, width });
        }
        Ok(Self { width, value })
    }

    /// Builds a vector keeping only the low `width` bits of `value`.
    pub fn truncating(width: u32, value: u64) -> Result<Self, BitsError> {
        Self::new(width, value & mask(width.min(MAX_WIDTH)))
    }

    pub fn zeros(width: u32) -> Result<Self, BitsError> {
        Self::new(width, 0)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn bit(&self, i: u32) -> bool {
        i < self.width && (self.value >> i) & 1 == 1
    }

    pub fn to_bin_string(&self) -> String {
        (0..self.width)
            .rev()
            .map(|i| if self.bit(i) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bin_str(s: &str) -> Result<Self, BitsError> {
        let width = s.len() as u32;
        if width == 0 || width > MAX_WIDTH {
            return Err(BitsError::BadDigits(s.to_owned()));
        }
        let mut value = 0u64;
        for c in s.chars() {
            value = (value << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(BitsError::BadDigits(s.to_owned())),
                };
        }
        Ok(Self { width, value })
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bin_string())
    }
}

impl FromStr for BitVector {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_bin_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn opcode_six_is_110() {
        let v = BitVector::new(3, 6).unwrap();
        assert_eq!(v.to_string(), "110");
    }

    #[test]
    fn rejects_overflow_and_bad_width() {
        assert!(matches!(BitVector::new(3, 8), Err(BitsError::Overflow { .. })));
        assert!(matches!(BitVector::new(0, 0), Err(BitsError::BadWidth(0))));
        assert!(matches!(BitVector::new(65, 0), Err(BitsError::BadWidth(65))));
        assert!(BitVector::from_bin_str("10x").is_err());
        assert!(BitVector::from_bin_str("").is_err());
    }

    #[test]
    fn full_width_vector() {
        let v = BitVector::new(64, u64::MAX).unwrap();
        assert_eq!(v.to_string().len(), 64);
        assert_eq!(BitVector::from_bin_str(&v.to_string()).unwrap(), v);
    }

    proptest! {
        #[test]
        fn text_form_round_trips(width in 1u32..=64, raw in any::<u64>()) {
            let v = BitVector::truncating(width, raw).unwrap();
            let s = v.to_string();
            prop_assert_eq!(s.len() as u32, width);
            prop_assert_eq!(BitVector::from_bin_str(&s).unwrap(), v);
        }
    }
}
