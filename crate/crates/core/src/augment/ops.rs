use crate::error::{Error, Result};

/// The fourteen single-image transformations of the augmentation space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AugOp {
    Identity,
    ShearX,
    ShearY,
    TranslateX,
    TranslateY,
    Rotate,
    Brightness,
    Color,
    Contrast,
    Sharpness,
    Posterize,
    Solarize,
    AutoContrast,
    Equalize,
}

impl AugOp {
    pub const ALL: [AugOp; 14] = [
        AugOp::Identity,
        AugOp::ShearX,
        AugOp::ShearY,
        AugOp::TranslateX,
        AugOp::TranslateY,
        AugOp::Rotate,
        AugOp::Brightness,
        AugOp::Color,
        AugOp::Contrast,
        AugOp::Sharpness,
        AugOp::Posterize,
        AugOp::Solarize,
        AugOp::AutoContrast,
        AugOp::Equalize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AugOp::Identity => "Identity",
            AugOp::ShearX => "ShearX",
            AugOp::ShearY => "ShearY",
            AugOp::TranslateX => "TranslateX",
            AugOp::TranslateY => "TranslateY",
            AugOp::Rotate => "Rotate",
            AugOp::Brightness => "Brightness",
            AugOp::Color => "Color",
            AugOp::Contrast => "Contrast",
            AugOp::Sharpness => "Sharpness",
            AugOp::Posterize => "Posterize",
            AugOp::Solarize => "Solarize",
            AugOp::AutoContrast => "AutoContrast",
            AugOp::Equalize => "Equalize",
        }
    }

    pub fn from_name(name: &str) -> Option<AugOp> {
        Self::ALL.into_iter().find(|op| op.name() == name)
    }

    pub fn magnitude_based(self) -> bool {
        !matches!(self, AugOp::Identity | AugOp::AutoContrast | AugOp::Equalize)
    }

    /// Geometric and enhancement ops apply their magnitude with a random sign.
    pub fn signed(self) -> bool {
        matches!(
            self,
            AugOp::ShearX
                | AugOp::ShearY
                | AugOp::TranslateX
                | AugOp::TranslateY
                | AugOp::Rotate
                | AugOp::Brightness
                | AugOp::Color
                | AugOp::Contrast
                | AugOp::Sharpness
        )
    }

    /// Closed magnitude range as `(low, high)`, or `None` for ops without a
    /// magnitude. Solarize's magnitude is its threshold.
    pub fn range(self) -> Option<(f64, f64)> {
        match self {
            AugOp::Identity | AugOp::AutoContrast | AugOp::Equalize => None,
            AugOp::ShearX | AugOp::ShearY => Some((0.0, 0.99)),
            AugOp::TranslateX | AugOp::TranslateY => Some((0.0, 32.0)),
            AugOp::Rotate => Some((0.0, 135.0)),
            AugOp::Brightness | AugOp::Color | AugOp::Contrast | AugOp::Sharpness => Some((0.0, 0.99)),
            AugOp::Posterize => Some((2.0, 8.0)),
            AugOp::Solarize => Some((0.0, 255.0)),
        }
    }

    pub fn integer_magnitude(self) -> bool {
        self == AugOp::Posterize
    }
}

/// One augmentation as applied to one image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppliedAug {
    pub op: AugOp,
    pub magnitude: Option<f64>,
    /// `+1` or `-1`; always `+1` for unsigned ops.
    pub sign: i8,
}

impl AppliedAug {
    pub fn new(op: AugOp, magnitude: Option<f64>, sign: i8) -> Result<Self> {
        match (op.range(), magnitude) {
            (None, None) => {}
            (None, Some(_)) => return Err(Error::Invalid(format!("{} takes no magnitude", op.name()))),
            (Some(_), None) => return Err(Error::Invalid(format!("{} needs a magnitude", op.name()))),
            (Some((lo, hi)), Some(m)) => {
                if !(lo..=hi).contains(&m) {
                    return Err(Error::out_of_range("magnitude", format!("{} {m} not in [{lo}, {hi}]", op.name())));
                }
                if op.integer_magnitude() && m.fract() != 0.0 {
                    return Err(Error::out_of_range("magnitude", format!("{} needs an integer, got {m}", op.name())));
                }
            }
        }
        match sign {
            1 => {}
            -1 if op.signed() => {}
            -1 => return Err(Error::Invalid(format!("{} is unsigned", op.name()))),
            _ => return Err(Error::Invalid(format!("sign must be 1 or -1, got {sign}"))),
        }
        Ok(Self { op, magnitude, sign })
    }

    pub fn signed_magnitude(&self) -> f64 {
        self.magnitude.unwrap_or(0.0) * self.sign as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for op in AugOp::ALL {
            assert_eq!(AugOp::from_name(op.name()), Some(op));
        }
        assert_eq!(AugOp::from_name("Cutout"), None);
    }

    #[test]
    fn table_ranges() {
        assert_eq!(AugOp::ShearX.range(), Some((0.0, 0.99)));
        assert_eq!(AugOp::TranslateY.range(), Some((0.0, 32.0)));
        assert_eq!(AugOp::Rotate.range(), Some((0.0, 135.0)));
        assert_eq!(AugOp::Posterize.range(), Some((2.0, 8.0)));
        assert_eq!(AugOp::Solarize.range(), Some((0.0, 255.0)));
        let unsized_ops: Vec<_> = AugOp::ALL.into_iter().filter(|o| !o.magnitude_based()).collect();
        assert_eq!(unsized_ops, vec![AugOp::Identity, AugOp::AutoContrast, AugOp::Equalize]);
        assert_eq!(AugOp::ALL.into_iter().filter(|o| o.signed()).count(), 9);
    }

    #[test]
    fn applied_aug_contract() {
        assert!(AppliedAug::new(AugOp::Rotate, Some(12.5), -1).is_ok());
        assert!(AppliedAug::new(AugOp::Rotate, Some(500.0), 1).is_err());
        assert!(AppliedAug::new(AugOp::Rotate, None, 1).is_err());
        assert!(AppliedAug::new(AugOp::Identity, Some(1.0), 1).is_err());
        assert!(AppliedAug::new(AugOp::Posterize, Some(4.5), 1).is_err());
        assert!(AppliedAug::new(AugOp::Posterize, Some(4.0), -1).is_err());
        assert!(AppliedAug::new(AugOp::Solarize, Some(0.0), 1).is_ok());
        assert!(AppliedAug::new(AugOp::Equalize, None, 0).is_err());
    }
}
