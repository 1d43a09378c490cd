//! Gray-coded square QAM.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A square M-QAM constellation scaled to unit average energy.
#[derive(Debug, Clone, PartialEq)]
pub struct QamConstellation {
    order: u32,
    side: u32,
    scale: f64,
    points: Vec<Complex64>,
}

fn gray(x: u32) -> u32 {
    x ^ (x >> 1)
}

fn gray_inverse(mut g: u32) -> u32 {
    let mut x = g;
    while g > 1 {
        g >>= 1;
        x ^= g;
    }
    x
}

impl QamConstellation {
    pub fn new(order: u32) -> Result<Self> {
        let side = (order as f64).sqrt().round() as u32;
        if order < 4 || side * side != order || !side.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "QAM order must be a square power of two >= 4, got {order}"
            )));
        }
        let scale = 1.0 / (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        let bits = side.trailing_zeros();
        let level = |idx: u32| (2.0 * gray_inverse(idx) as f64 - (side as f64 - 1.0)) * scale;
        let points = (0..order)
            .map(|s| Complex64::new(level(s >> bits), level(s & (side - 1))))
            .collect();
        Ok(Self {
            order,
            side,
            scale,
            points,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Half the distance between neighbouring points.
    pub fn half_spacing(&self) -> f64 {
        self.scale
    }

    pub fn map(&self, symbols: &[u32]) -> Result<Vec<Complex64>> {
        symbols
            .iter()
            .map(|&s| {
                self.points
                    .get(s as usize)
                    .copied()
                    .ok_or(Error::SymbolOutOfRange {
                        symbol: s,
                        order: self.order,
                    })
            })
            .collect()
    }

    fn slice_axis(&self, v: f64) -> u32 {
        let idx = ((v / self.scale + (self.side as f64 - 1.0)) / 2.0).round();
        let idx = idx.clamp(0.0, (self.side - 1) as f64) as u32;
        gray(idx)
    }

    /// Nearest-point hard decision.
    pub fn demap_one(&self, p: Complex64) -> u32 {
        let bits = self.side.trailing_zeros();
        (self.slice_axis(p.re) << bits) | self.slice_axis(p.im)
    }

    pub fn demap(&self, points: &[Complex64]) -> Vec<u32> {
        points.iter().map(|&p| self.demap_one(p)).collect()
    }
}

pub fn qam_map(symbols: &[u32], order: u32) -> Result<Vec<Complex64>> {
    QamConstellation::new(order)?.map(symbols)
}

pub fn qam_demap(points: &[Complex64], order: u32) -> Result<Vec<u32>> {
    Ok(QamConstellation::new(order)?.demap(points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_qam_coordinates() {
        let q = QamConstellation::new(16).unwrap();
        let s = 10f64.sqrt();
        for p in q.points() {
            for v in [p.re * s, p.im * s] {
                let r = v.round();
                assert!((v - r).abs() < 1e-12);
                assert!([-3.0, -1.0, 1.0, 3.0].contains(&r));
            }
        }
        let mut uniq: Vec<_> = q.points().iter().map(|p| ((p.re * s).round() as i32, (p.im * s).round() as i32)).collect();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 16);
    }

    #[test]
    fn unit_energy() {
        for m in [4, 16, 64] {
            let q = QamConstellation::new(m).unwrap();
            let e: f64 = q.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
            assert!((e - 1.0).abs() < 1e-12, "M={m}");
        }
    }

    #[test]
    fn round_trip_every_symbol() {
        for m in [4u32, 16, 64] {
            let syms: Vec<u32> = (0..m).collect();
            let pts = qam_map(&syms, m).unwrap();
            assert_eq!(qam_demap(&pts, m).unwrap(), syms);
        }
    }

    #[test]
    fn neighbours_differ_in_one_bit() {
        let q = QamConstellation::new(64).unwrap();
        let d = 2.0 * q.half_spacing();
        for (i, a) in q.points().iter().enumerate() {
            for (j, b) in q.points().iter().enumerate() {
                if ((a - b).norm() - d).abs() < 1e-9 {
                    assert_eq!((i ^ j).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(qam_map(&[16], 16), Err(Error::SymbolOutOfRange { symbol: 16, order: 16 })));
        assert!(QamConstellation::new(8).is_err());
        assert!(QamConstellation::new(9).is_err());
    }
}
