//! Compensated summation with a cancellation index.

use crate::logreal::LogReal;

/// Neumaier's variant of Kahan summation; also tracks the sum of magnitudes.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
    abs: f64,
    n: usize,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs += x.abs();
        self.n += 1;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn abs_sum(&self) -> f64 {
        self.abs
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `sum |x_i| / max(|sum x_i|, tiny)`.
    pub fn cancellation(&self) -> f64 {
        cancellation_index(self.abs, self.value())
    }

    fn scale(&mut self, f: f64) {
        self.sum *= f;
        self.comp *= f;
        self.abs *= f;
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn cancellation_index(abs_sum: f64, value: f64) -> f64 {
    (abs_sum / value.abs().max(f64::MIN_POSITIVE)).min(f64::MAX)
}

/// Compensated sum of `LogReal` terms kept at a floating power-of-two scale,
/// so terms far outside the binary64 range can be added exactly as long as
/// their ratios are representable.
#[derive(Clone, Copy, Debug, Default)]
pub struct ScaledSum {
    exp2: i64,
    started: bool,
    acc: CompensatedSum,
}

impl ScaledSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of(terms: &[LogReal]) -> Self {
        let mut s = Self::new();
        for &t in terms {
            s.add(t);
        }
        s
    }

    pub fn add(&mut self, t: LogReal) {
        if t.is_zero() {
            self.acc.n += 1;
            return;
        }
        let (m, e) = t.parts();
        if !self.started {
            self.exp2 = e;
            self.started = true;
        } else if e > self.exp2 + 64 {
            self.acc.scale(pow2(self.exp2 - e));
            self.exp2 = e;
        }
        self.acc.add(m * pow2(e - self.exp2));
    }

    pub fn value(&self) -> LogReal {
        LogReal::from_mantissa(self.acc.value(), self.exp2)
    }

    pub fn abs_sum(&self) -> LogReal {
        LogReal::from_mantissa(self.acc.abs_sum(), self.exp2)
    }

    pub fn len(&self) -> usize {
        self.acc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.acc.is_empty()
    }

    pub fn cancellation(&self) -> f64 {
        self.acc.cancellation()
    }
}

fn pow2(d: i64) -> f64 {
    LogReal::from_mantissa(1.0, d).to_f64()
}
