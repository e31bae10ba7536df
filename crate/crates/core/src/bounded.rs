//! A value paired with a certified, non-negative error radius.

/// The closed interval `[value - radius, value + radius]`.
///
/// Radius accounting is first order: combining two `BoundedReal`s adds the
/// radii in ordinary floating arithmetic without outward rounding of the last
/// bit. Every operation that produces one documents where its radius comes
/// from; radii here bound truncation error, not floating-point rounding,
/// unless a call site says otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedReal {
    pub value: f64,
    pub radius: f64,
}

impl BoundedReal {
    pub fn new(value: f64, radius: f64) -> Self {
        assert!(radius >= 0.0, "radius must be non-negative, got {radius}");
        BoundedReal { value, radius }
    }

    /// A point interval.
    pub fn exact(value: f64) -> Self {
        BoundedReal { value, radius: 0.0 }
    }

    pub fn lower(&self) -> f64 {
        self.value - self.radius
    }

    pub fn upper(&self) -> f64 {
        self.value + self.radius
    }

    pub fn contains(&self, t: f64) -> bool {
        (t - self.value).abs() <= self.radius
    }

    /// True when the other interval lies entirely inside this one.
    pub fn contains_interval(&self, other: &BoundedReal) -> bool {
        self.lower() <= other.lower() && other.upper() <= self.upper()
    }

    pub fn straddles_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// Interval sum; radii add.
    pub fn add(&self, other: &BoundedReal) -> BoundedReal {
        BoundedReal {
            value: self.value + other.value,
            radius: self.radius + other.radius,
        }
    }

    /// Shift by an exact scalar; the radius is unchanged.
    pub fn offset(&self, t: f64) -> BoundedReal {
        BoundedReal {
            value: self.value + t,
            radius: self.radius,
        }
    }

    pub fn neg(&self) -> BoundedReal {
        BoundedReal {
            value: -self.value,
            radius: self.radius,
        }
    }
}
