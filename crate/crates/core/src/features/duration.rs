//! Segment-duration statistics.

use crate::vad::{SegmentKind, SegmentMap};

/// Segments shorter than this are not counted as relevant.
pub const RELEVANT_MIN_S: f64 = 0.05;

/// Upper edges of the six histogram bins; the first bin starts at
/// [`RELEVANT_MIN_S`] inclusive.
pub const HISTOGRAM_EDGES_S: [f64; 6] = [0.1, 0.2, 0.4, 0.8, 1.6, f64::INFINITY];

pub const PER_KIND: usize = 11;
pub const COUNT: usize = 2 * PER_KIND;

/// Statistics for one segment kind, laid out as
/// `mean, max, min, percent, hist[6], slope`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KindDurations {
    pub mean_s: f64,
    pub max_s: f64,
    pub min_s: f64,
    pub percent_of_total: f64,
    pub histogram: [u32; 6],
    /// Least-squares slope of duration against position among the relevant
    /// segments of this kind, in seconds per segment.
    pub slope_s: f64,
}

impl KindDurations {
    pub fn to_array(&self) -> [f64; PER_KIND] {
        let h = self.histogram.map(f64::from);
        [
            self.mean_s,
            self.max_s,
            self.min_s,
            self.percent_of_total,
            h[0],
            h[1],
            h[2],
            h[3],
            h[4],
            h[5],
            self.slope_s,
        ]
    }
}

pub fn histogram_bin(duration_s: f64) -> Option<usize> {
    if duration_s < RELEVANT_MIN_S {
        return None;
    }
    HISTOGRAM_EDGES_S.iter().position(|&edge| duration_s <= edge)
}

/// Ordinary least-squares slope of `ys` against `0, 1, 2, ...`.
pub fn index_slope(ys: &[f64]) -> f64 {
    let n = ys.len();
    if n < 2 {
        return 0.0;
    }
    let xm = (n - 1) as f64 / 2.0;
    let ym = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (y - ym);
        sxx += dx * dx;
    }
    sxy / sxx
}

pub fn kind_durations(map: &SegmentMap, kind: SegmentKind) -> KindDurations {
    let total = map.total_duration_s();
    let kind_total: f64 = map.of_kind(kind).map(|s| s.duration_s()).sum();
    let relevant: Vec<f64> = map
        .of_kind(kind)
        .map(|s| s.duration_s())
        .filter(|&d| d >= RELEVANT_MIN_S)
        .collect();
    let percent_of_total = if total > 0.0 { 100.0 * kind_total / total } else { 0.0 };
    if relevant.is_empty() {
        return KindDurations {
            percent_of_total,
            ..Default::default()
        };
    }
    let mut histogram = [0u32; 6];
    for &d in &relevant {
        if let Some(b) = histogram_bin(d) {
            histogram[b] += 1;
        }
    }
    KindDurations {
        mean_s: relevant.iter().sum::<f64>() / relevant.len() as f64,
        max_s: relevant.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_s: relevant.iter().copied().fold(f64::INFINITY, f64::min),
        percent_of_total,
        histogram,
        slope_s: index_slope(&relevant),
    }
}

/// Voiced block followed by unvoiced block, 22 values.
pub fn duration_features(map: &SegmentMap) -> [f64; COUNT] {
    let mut out = [0.0; COUNT];
    out[..PER_KIND].copy_from_slice(&kind_durations(map, SegmentKind::Voiced).to_array());
    out[PER_KIND..].copy_from_slice(&kind_durations(map, SegmentKind::Unvoiced).to_array());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use SegmentKind::*;

    #[test]
    fn three_equal_segments() {
        let map = SegmentMap::from_durations(&[(1.0, Voiced), (1.0, Unvoiced), (1.0, Voiced)]).unwrap();
        let v = kind_durations(&map, Voiced);
        assert_eq!((v.mean_s, v.max_s, v.min_s), (1.0, 1.0, 1.0));
        assert!((v.percent_of_total - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(v.histogram, [0, 0, 0, 0, 2, 0]);
        assert_eq!(v.slope_s, 0.0);
        let u = kind_durations(&map, Unvoiced);
        assert_eq!(u.histogram, [0, 0, 0, 0, 1, 0]);
    }

    #[test]
    fn single_unvoiced_segment() {
        let map = SegmentMap::from_durations(&[(2.5, Unvoiced)]).unwrap();
        let f = duration_features(&map);
        assert!(f[..PER_KIND].iter().all(|&v| v == 0.0));
        assert_eq!(f[PER_KIND + 3], 100.0);
        assert_eq!(f[PER_KIND + 9], 1.0);
    }

    #[test]
    fn slope_of_growing_segments() {
        let map = SegmentMap::from_durations(&[
            (0.2, Voiced),
            (0.3, Unvoiced),
            (0.4, Voiced),
            (0.3, Unvoiced),
            (0.6, Voiced),
        ])
        .unwrap();
        let v = kind_durations(&map, Voiced);
        assert!((v.slope_s - 0.2).abs() < 1e-12);
    }

    #[test]
    fn short_segments_are_not_relevant() {
        let map = SegmentMap::from_durations(&[(0.03, Voiced), (1.0, Unvoiced), (0.05, Voiced)]).unwrap();
        let v = kind_durations(&map, Voiced);
        assert_eq!(v.histogram.iter().sum::<u32>(), 1);
        assert_eq!(v.histogram[0], 1);
        assert!((v.mean_s - 0.05).abs() < 1e-12);
    }

    #[test]
    fn bin_edges_are_right_closed() {
        assert_eq!(histogram_bin(0.04), None);
        assert_eq!(histogram_bin(0.05), Some(0));
        assert_eq!(histogram_bin(0.1), Some(0));
        assert_eq!(histogram_bin(0.1000001), Some(1));
        assert_eq!(histogram_bin(1.6), Some(4));
        assert_eq!(histogram_bin(30.0), Some(5));
    }
}
